//! Adam optimizer with bias correction.

use super::layer::ParamGrads;
use super::network::{Layer, Network};
use super::train::TrainConfig;

struct Slot {
    mw: Vec<f64>,
    vw: Vec<f64>,
    mb: Vec<f64>,
    vb: Vec<f64>,
}

/// First/second moment estimates for every trainable layer, plus the step
/// counter. Frozen layers get no slot and are never touched.
pub struct AdamState {
    slots: Vec<Option<Slot>>,
    t: u64,
}

impl AdamState {
    pub fn new(net: &Network) -> Self {
        let slots = net
            .layers
            .iter()
            .map(|layer| match layer {
                Layer::Conv(c) if !c.frozen => Some(Slot {
                    mw: vec![0.0; c.w.len()],
                    vw: vec![0.0; c.w.len()],
                    mb: vec![0.0; c.b.len()],
                    vb: vec![0.0; c.b.len()],
                }),
                Layer::Dense(d) if !d.frozen => Some(Slot {
                    mw: vec![0.0; d.w.len()],
                    vw: vec![0.0; d.w.len()],
                    mb: vec![0.0; d.b.len()],
                    vb: vec![0.0; d.b.len()],
                }),
                _ => None,
            })
            .collect();
        AdamState { slots, t: 0 }
    }

    /// One Adam update from accumulated batch gradients. `grads` is indexed
    /// by layer; entries are `None` for frozen and parameter-free layers,
    /// which keep their parameters bit-identical.
    pub fn step(&mut self, net: &mut Network, grads: &[Option<ParamGrads>], cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for (li, layer) in net.layers.iter_mut().enumerate() {
            let (slot, g) = match (&mut self.slots[li], &grads[li]) {
                (Some(slot), Some(g)) => (slot, g),
                _ => continue,
            };
            let (w, b) = match layer {
                Layer::Conv(c) => (&mut c.w, &mut c.b),
                Layer::Dense(d) => (&mut d.w, &mut d.b),
                _ => continue,
            };
            update(w, &g.w, &mut slot.mw, &mut slot.vw, cfg, bc1, bc2);
            update(b, &g.b, &mut slot.mb, &mut slot.vb, cfg, bc1, bc2);
        }
    }
}

fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    cfg: &TrainConfig,
    bias_corr1: f64,
    bias_corr2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bias_corr1;
        let v_hat = v[i] / bias_corr2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::network::NetSpec;
    use crate::neuralnet::train::LossKind;

    fn config() -> TrainConfig {
        TrainConfig {
            epochs: 1,
            learning_rate: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            seed: 0,
            loss: LossKind::CrossEntropy,
        }
    }

    fn grads_like(net: &Network, fill: f64) -> Vec<Option<ParamGrads>> {
        net.layers
            .iter()
            .map(|l| match l {
                Layer::Conv(c) if !c.frozen => {
                    let mut g = ParamGrads::zeros(c.w.len(), c.b.len());
                    g.w.fill(fill);
                    g.b.fill(fill);
                    Some(g)
                }
                Layer::Dense(d) if !d.frozen => {
                    let mut g = ParamGrads::zeros(d.w.len(), d.b.len());
                    g.w.fill(fill);
                    g.b.fill(fill);
                    Some(g)
                }
                _ => None,
            })
            .collect()
    }

    #[test]
    fn first_step_moves_by_learning_rate_times_sign() {
        // Closed form at t=1: Δ = −lr·g/(|g| + ε') ≈ −lr·sign(g).
        let mut net = Network::new(&NetSpec::classifier(), 5).unwrap();
        let before = net.param_snapshot();
        let cfg = config();
        let mut adam = AdamState::new(&net);
        let grads = grads_like(&net, 0.37);
        adam.step(&mut net, &grads, &cfg);
        let after = net.param_snapshot();
        for ((_, w0, _), (_, w1, _)) in before.iter().zip(&after) {
            for (a, b) in w0.iter().zip(w1) {
                let delta = b - a;
                let expected = -cfg.learning_rate; // sign(0.37) = +1
                assert!(
                    (delta - expected).abs() < 0.01 * cfg.learning_rate,
                    "delta {delta} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn zero_gradient_is_a_fixpoint() {
        let mut net = Network::new(&NetSpec::classifier(), 5).unwrap();
        let before = net.param_snapshot();
        let cfg = config();
        let mut adam = AdamState::new(&net);
        let grads = grads_like(&net, 0.0);
        for _ in 0..10 {
            adam.step(&mut net, &grads, &cfg);
        }
        assert_eq!(before, net.param_snapshot());
    }

    #[test]
    fn frozen_layer_never_moves() {
        let mut net = Network::new(&NetSpec::classifier(), 5).unwrap();
        net.set_frozen(&["c1", "c3"], true);
        let before = net.param_snapshot();
        let cfg = config();
        let mut adam = AdamState::new(&net);
        // Hand AdamState full gradients anyway: frozen slots must not exist.
        let mut net_thawed = net.clone();
        net_thawed.set_frozen(&["c1", "c3"], false);
        let grads = grads_like(&net_thawed, 1.0);
        adam.step(&mut net, &grads, &cfg);
        let after = net.param_snapshot();
        for ((name, w0, b0), (_, w1, b1)) in before.iter().zip(&after) {
            if name == "c1" || name == "c3" {
                assert_eq!(w0, w1, "{name} weights moved");
                assert_eq!(b0, b1, "{name} biases moved");
            } else {
                assert_ne!(w0, w1, "{name} should have moved");
            }
        }
    }
}
