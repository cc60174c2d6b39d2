//! Adapted LeNet-5: forward, backpropagation, Adam, training and metrics.

pub struct Metrics;
pub struct NetSpec;
pub struct Network;
pub struct TrainConfig;
pub struct TrainHistory;
pub struct WeightArchive;
