//! Transmission-line fault diagnosis workbench.
//!
//! End-to-end pipeline for synthesizing labelled transmission-line fault
//! data from a phasor-domain circuit model, extracting normalized 7×7
//! main-harmonic feature frames, training an adapted LeNet-5 for fault
//! classification and location regression, and running a transfer-learning
//! protocol (frozen feature extractor, fine-tuned head) across seven line
//! lengths against K-means and dedicated-CNN baselines.
//!
//! Subsystems:
//! - [`powersim`]: two-source three-phase line solved in the phasor domain,
//!   waveform synthesis over a parameter grid.
//! - [`featurex`]: 60 Hz main-harmonic feature extraction, 7×7 frame
//!   assembly, min-max scaling, stratified splits.
//! - [`neuralnet`]: from-scratch adapted LeNet-5 with backpropagation,
//!   Adam, training loops and evaluation metrics.
//! - [`transfer`]: source pretraining, layer freezing and target adaptation.
//! - [`baselines`]: K-means clustering baseline with cluster-to-label
//!   accuracy.
//! - [`harness`]: seeded experiment orchestration, repeat statistics,
//!   latency measurement and report emission.

pub mod baselines;
pub mod error;
pub mod featurex;
pub mod harness;
pub mod neuralnet;
pub mod powersim;
pub mod transfer;

pub use error::{Error, Result};
pub use featurex::{ClassCode, FeatureVector, Sample, Scaler, CLASS_COUNT};
pub use neuralnet::{
    Metrics, NetSpec, Network, TrainConfig, TrainHistory, WeightArchive,
};
pub use powersim::{
    FaultSpec, GridSpec, LineParams, PhasorSolution, SourceParams, WaveformRecord,
    SAMPLE_RATE_HZ, SUPPORTED_LENGTHS_KM, SYSTEM_FREQ_HZ,
};
pub use transfer::{Task, TransferMode, TransferPlan};
