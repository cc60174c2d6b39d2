//! Mini-batch training with seeded shuffling and per-epoch history.

use super::adam::AdamState;
use super::layer::{softmax, LayerCache, ParamGrads};
use super::metrics::{evaluate_classifier, evaluate_regressor, Metrics};
use super::network::{Layer, Network};
use crate::error::{Error, Result};
use crate::featurex::{Sample, CLASS_COUNT};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    CrossEntropy,
    MeanSquaredError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
}

impl TrainConfig {
    /// 64 epochs of cross-entropy at the 3e-4 Adam learning rate.
    pub fn classifier(seed: u64) -> Self {
        TrainConfig {
            epochs: 64,
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            seed,
            loss: LossKind::CrossEntropy,
        }
    }

    /// 32 epochs of mean-squared-error at the same learning rate.
    pub fn regressor(seed: u64) -> Self {
        TrainConfig {
            epochs: 32,
            loss: LossKind::MeanSquaredError,
            ..Self::classifier(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::validation(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be positive"));
        }
        Ok(())
    }
}

/// Per-epoch curves: accuracy for classification, loss (MSE) for
/// regression; one entry per epoch for both the training and validation
/// sets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub train: Vec<f64>,
    pub val: Vec<f64>,
}

fn targets(samples: &[Sample], loss: LossKind) -> Result<Vec<f64>> {
    match loss {
        LossKind::CrossEntropy => Ok(samples.iter().map(|s| s.class_label() as f64).collect()),
        LossKind::MeanSquaredError => samples
            .iter()
            .map(|s| {
                s.location.ok_or_else(|| {
                    Error::validation(
                        "regression requires faulted samples; found a no-fault sample",
                    )
                })
            })
            .collect(),
    }
}

/// Loss value and gradient with respect to the logits for one sample.
fn loss_and_delta(logits: &[f64], target: f64, loss: LossKind) -> (f64, Vec<f64>) {
    match loss {
        LossKind::CrossEntropy => {
            let probs = softmax(logits);
            let label = target as usize;
            let loss = -(probs[label].max(1e-300)).ln();
            let mut delta = probs;
            delta[label] -= 1.0;
            (loss, delta)
        }
        LossKind::MeanSquaredError => {
            let err = logits[0] - target;
            (err * err, vec![2.0 * err])
        }
    }
}

/// Trains the network in place. Returns the per-epoch history and the
/// final validation metrics (with the wall-clock training time filled in).
///
/// Training is deterministic for a fixed seed: seeded shuffles, fixed batch
/// order, single-threaded accumulation. Activations below the first
/// trainable layer are constant, so they are computed once up front and the
/// epoch loop runs only the trainable tail — the mechanism by which a
/// frozen feature extractor cuts training time.
pub fn train(
    net: &mut Network,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
) -> Result<(TrainHistory, Metrics)> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::validation("training and validation sets must be non-empty"));
    }
    if cfg.loss == LossKind::CrossEntropy && net.spec.output_len()? != CLASS_COUNT {
        return Err(Error::shape("cross-entropy training needs an 11-way head"));
    }
    if cfg.loss == LossKind::MeanSquaredError && net.spec.output_len()? != 1 {
        return Err(Error::shape("regression training needs a scalar head"));
    }
    let train_targets = targets(train_set, cfg.loss)?;
    let val_targets = targets(val_set, cfg.loss)?;

    let started = Instant::now();
    let prefix = net.frozen_prefix_len();

    // Constant activations through the frozen prefix, computed once.
    let map_prefix = |samples: &[Sample]| -> Vec<Vec<f64>> {
        samples
            .iter()
            .map(|s| net.forward_range(0, prefix, &s.flat_frame()))
            .collect()
    };
    let train_inputs = map_prefix(train_set);
    let val_inputs = map_prefix(val_set);

    let n_layers = net.layers.len();
    let mut caches: Vec<LayerCache> = vec![LayerCache::default(); n_layers];
    let mut grads: Vec<Option<ParamGrads>> = net
        .layers
        .iter()
        .map(|l| match l {
            Layer::Conv(c) if !c.frozen => Some(ParamGrads::zeros(c.w.len(), c.b.len())),
            Layer::Dense(d) if !d.frozen => Some(ParamGrads::zeros(d.w.len(), d.b.len())),
            _ => None,
        })
        .collect();
    let mut adam = AdamState::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory::default();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut train_stat = MetricAccumulator::new(cfg.loss);
        for batch in order.chunks(cfg.batch_size) {
            for g in grads.iter_mut().flatten() {
                g.clear();
            }
            for &idx in batch {
                // Forward through the trainable tail, caching activations.
                let mut activation = train_inputs[idx].clone();
                for li in prefix..n_layers {
                    activation = net.layers[li].forward(&activation, Some(&mut caches[li]));
                }
                let (loss, mut delta) = loss_and_delta(&activation, train_targets[idx], cfg.loss);
                epoch_loss += loss;
                train_stat.record(&activation, train_targets[idx]);
                // Backward, stopping at the first trainable layer.
                for li in (prefix..n_layers).rev() {
                    let want_grad_in = li > prefix;
                    let grad_in = match &net.layers[li] {
                        Layer::Conv(c) => {
                            c.backward(&caches[li], &delta, grads[li].as_mut(), want_grad_in)
                        }
                        Layer::Dense(d) => {
                            d.backward(&caches[li], &delta, grads[li].as_mut(), want_grad_in)
                        }
                        Layer::Pool(p) => p.backward(&delta, want_grad_in),
                        Layer::Flatten => Some(std::mem::take(&mut delta)),
                    };
                    match grad_in {
                        Some(g) => delta = g,
                        None => break,
                    }
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in grads.iter_mut().flatten() {
                g.scale(scale);
            }
            adam.step(net, &grads, cfg);
        }
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: epoch_loss,
            });
        }
        history.train.push(train_stat.value());
        let mut val_stat = MetricAccumulator::new(cfg.loss);
        for (input, &target) in val_inputs.iter().zip(&val_targets) {
            let out = net.forward_range(prefix, n_layers, input);
            val_stat.record(&out, target);
        }
        history.val.push(val_stat.value());
    }
    let train_time_s = started.elapsed().as_secs_f64();

    let mut metrics = match cfg.loss {
        LossKind::CrossEntropy => evaluate_classifier(net, val_set)?,
        LossKind::MeanSquaredError => evaluate_regressor(net, val_set)?,
    };
    metrics.train_time_s = train_time_s;
    Ok((history, metrics))
}

/// Streaming epoch metric: Eq. (1)-style micro accuracy over one-vs-rest
/// counts for classification, mean squared error for regression.
struct MetricAccumulator {
    loss: LossKind,
    confusion: Vec<Vec<usize>>,
    sq_err: f64,
    n: usize,
}

impl MetricAccumulator {
    fn new(loss: LossKind) -> Self {
        MetricAccumulator {
            loss,
            confusion: vec![vec![0; CLASS_COUNT]; CLASS_COUNT],
            sq_err: 0.0,
            n: 0,
        }
    }

    fn record(&mut self, output: &[f64], target: f64) {
        self.n += 1;
        match self.loss {
            LossKind::CrossEntropy => {
                let pred = argmax(output);
                self.confusion[target as usize][pred] += 1;
            }
            LossKind::MeanSquaredError => {
                let err = output[0] - target;
                self.sq_err += err * err;
            }
        }
    }

    fn value(&self) -> f64 {
        match self.loss {
            LossKind::CrossEntropy => Metrics::from_confusion(&self.confusion)
                .accuracy
                .unwrap_or(0.0),
            LossKind::MeanSquaredError => self.sq_err / self.n.max(1) as f64,
        }
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurex::{ClassCode, FRAME_DIM};

    /// Two linearly separable classes: constant frames at distinct levels.
    fn toy_set(per_class: usize, jitter: f64) -> Vec<Sample> {
        let mut out = Vec::new();
        for i in 0..per_class {
            let eps = jitter * (i as f64 / per_class as f64 - 0.5);
            out.push(Sample {
                frame: [[0.2 + eps; FRAME_DIM]; FRAME_DIM],
                class: ClassCode::from_label(0).unwrap(),
                location: None,
            });
            out.push(Sample {
                frame: [[0.8 + eps; FRAME_DIM]; FRAME_DIM],
                class: ClassCode::from_label(1).unwrap(),
                location: Some(0.5),
            });
        }
        out
    }

    #[test]
    fn separable_toy_problem_reaches_full_accuracy() {
        let samples = toy_set(16, 0.05);
        let mut net = Network::new(&crate::neuralnet::NetSpec::classifier(), 1).unwrap();
        let mut cfg = TrainConfig::classifier(2);
        cfg.epochs = 64;
        let (history, metrics) = train(&mut net, &samples, &samples, &cfg).unwrap();
        assert_eq!(history.train.len(), 64);
        assert_eq!(history.val.len(), 64);
        // Micro accuracy 1.0 means every sample classified correctly.
        assert_eq!(metrics.accuracy, Some(1.0), "history tail: {:?}", &history.val[60..]);
    }

    #[test]
    fn training_is_deterministic_under_seed() {
        let samples = toy_set(8, 0.02);
        let run = || {
            let mut net = Network::new(&crate::neuralnet::NetSpec::classifier(), 5).unwrap();
            let mut cfg = TrainConfig::classifier(6);
            cfg.epochs = 3;
            train(&mut net, &samples, &samples, &cfg).unwrap();
            net.to_archive().to_bytes()
        };
        assert_eq!(run(), run(), "bit-identical archives for identical seeds");
    }

    #[test]
    fn fully_frozen_network_never_changes() {
        let samples = toy_set(4, 0.02);
        let mut net = Network::new(&crate::neuralnet::NetSpec::classifier(), 5).unwrap();
        net.set_frozen(&["c1", "c3", "f5", "f6", "head"], true);
        let before = net.param_snapshot();
        let mut cfg = TrainConfig::classifier(6);
        cfg.epochs = 4;
        train(&mut net, &samples, &samples, &cfg).unwrap();
        assert_eq!(before, net.param_snapshot());
    }

    #[test]
    fn regression_rejects_no_fault_samples() {
        let samples = toy_set(4, 0.0);
        let mut net = Network::new(&crate::neuralnet::NetSpec::regressor(), 5).unwrap();
        let cfg = TrainConfig::regressor(6);
        // Class-0 samples carry no location.
        assert!(train(&mut net, &samples, &samples, &cfg).is_err());
    }

    #[test]
    fn regressor_fits_toy_locations() {
        let samples: Vec<Sample> = toy_set(16, 0.05)
            .into_iter()
            .filter(|s| s.location.is_some())
            .collect();
        let mut net = Network::new(&crate::neuralnet::NetSpec::regressor(), 1).unwrap();
        let mut cfg = TrainConfig::regressor(2);
        cfg.epochs = 48;
        let (_, metrics) = train(&mut net, &samples, &samples, &cfg).unwrap();
        assert!(metrics.mse.unwrap() < 0.01, "mse {:?}", metrics.mse);
    }

    #[test]
    fn empty_sets_rejected() {
        let samples = toy_set(2, 0.0);
        let mut net = Network::new(&crate::neuralnet::NetSpec::classifier(), 1).unwrap();
        let cfg = TrainConfig::classifier(1);
        assert!(train(&mut net, &[], &samples, &cfg).is_err());
        assert!(train(&mut net, &samples, &[], &cfg).is_err());
    }
}
