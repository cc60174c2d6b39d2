//! Transfer protocol: pretrain, freeze, adapt.

pub enum Task { Classify, Locate }
pub enum TransferMode { FineTune, Frozen, Dedicated }
pub struct TransferPlan;
