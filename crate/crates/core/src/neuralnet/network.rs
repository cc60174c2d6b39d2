//! Network assembly: layer specs, shape validation, initialization, forward.

use super::layer::{softmax, Activation, AvgPool2d, Conv2d, Dense, LayerCache};
use crate::error::{Error, Result};
use crate::featurex::{CLASS_COUNT, FRAME_DIM};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One layer of the architecture description.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Conv {
        name: String,
        in_shape: (usize, usize, usize),
        out_channels: usize,
        kernel: usize,
        relu: bool,
    },
    AvgPool {
        size: usize,
        stride: usize,
    },
    Flatten,
    Dense {
        name: String,
        in_dim: usize,
        out_dim: usize,
        relu: bool,
    },
}

/// Ordered layer list plus the output transform. The two constructors give
/// the adapted LeNet-5 for 7×7 frames: C1 conv 6@3×3 + ReLU, S2 average
/// pool 2×2/1, C3 conv 16@3×3 + ReLU, S4 average pool 2×2/2, flatten,
/// F5 dense 120 + ReLU, F6 dense 84 + ReLU, then an 11-way softmax head or
/// a single linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    pub layers: Vec<LayerSpec>,
    pub softmax_output: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Chw(usize, usize, usize),
    Flat(usize),
}

impl NetSpec {
    fn backbone(head_dim: usize) -> Vec<LayerSpec> {
        vec![
            LayerSpec::Conv {
                name: "c1".into(),
                in_shape: (1, FRAME_DIM, FRAME_DIM),
                out_channels: 6,
                kernel: 3,
                relu: true,
            },
            LayerSpec::AvgPool { size: 2, stride: 1 },
            LayerSpec::Conv {
                name: "c3".into(),
                in_shape: (6, 4, 4),
                out_channels: 16,
                kernel: 3,
                relu: true,
            },
            LayerSpec::AvgPool { size: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense {
                name: "f5".into(),
                in_dim: 16,
                out_dim: 120,
                relu: true,
            },
            LayerSpec::Dense {
                name: "f6".into(),
                in_dim: 120,
                out_dim: 84,
                relu: true,
            },
            LayerSpec::Dense {
                name: "head".into(),
                in_dim: 84,
                out_dim: head_dim,
                relu: false,
            },
        ]
    }

    /// 11-class softmax classifier.
    pub fn classifier() -> Self {
        NetSpec {
            layers: Self::backbone(CLASS_COUNT),
            softmax_output: true,
        }
    }

    /// Scalar linear-output regressor for the normalized fault location.
    pub fn regressor() -> Self {
        NetSpec {
            layers: Self::backbone(1),
            softmax_output: false,
        }
    }

    pub fn input_len(&self) -> usize {
        match self.layers.first() {
            Some(LayerSpec::Conv { in_shape, .. }) => in_shape.0 * in_shape.1 * in_shape.2,
            Some(LayerSpec::Dense { in_dim, .. }) => *in_dim,
            _ => 0,
        }
    }

    pub fn output_len(&self) -> Result<usize> {
        match self.shape_chain()?.last() {
            Some(Shape::Flat(n)) => Ok(*n),
            Some(Shape::Chw(c, h, w)) => Ok(c * h * w),
            None => Err(Error::shape("empty layer list")),
        }
    }

    fn shape_chain(&self) -> Result<Vec<Shape>> {
        if self.layers.is_empty() {
            return Err(Error::shape("network needs at least one layer"));
        }
        let mut shapes = Vec::with_capacity(self.layers.len());
        let mut current = match &self.layers[0] {
            LayerSpec::Conv { in_shape, .. } => Shape::Chw(in_shape.0, in_shape.1, in_shape.2),
            LayerSpec::Dense { in_dim, .. } => Shape::Flat(*in_dim),
            other => {
                return Err(Error::shape(format!(
                    "network must start with a conv or dense layer, found {other:?}"
                )))
            }
        };
        for (i, spec) in self.layers.iter().enumerate() {
            current = match (spec, current) {
                (
                    LayerSpec::Conv {
                        in_shape,
                        out_channels,
                        kernel,
                        name,
                        ..
                    },
                    Shape::Chw(c, h, w),
                ) => {
                    if (c, h, w) != *in_shape {
                        return Err(Error::shape(format!(
                            "layer {i} ({name}): expects input {in_shape:?}, gets ({c}, {h}, {w})"
                        )));
                    }
                    if *kernel > h || *kernel > w {
                        return Err(Error::shape(format!(
                            "layer {i} ({name}): {kernel}×{kernel} kernel exceeds {h}×{w} input"
                        )));
                    }
                    Shape::Chw(*out_channels, h - kernel + 1, w - kernel + 1)
                }
                (LayerSpec::AvgPool { size, stride }, Shape::Chw(c, h, w)) => {
                    if *size > h || *size > w || *stride == 0 {
                        return Err(Error::shape(format!(
                            "layer {i}: pool {size}/{stride} does not fit {h}×{w}"
                        )));
                    }
                    Shape::Chw(c, (h - size) / stride + 1, (w - size) / stride + 1)
                }
                (LayerSpec::Flatten, Shape::Chw(c, h, w)) => Shape::Flat(c * h * w),
                (LayerSpec::Dense { name, in_dim, out_dim, .. }, Shape::Flat(n)) => {
                    if n != *in_dim {
                        return Err(Error::shape(format!(
                            "layer {i} ({name}): expects {in_dim} inputs, gets {n}"
                        )));
                    }
                    Shape::Flat(*out_dim)
                }
                (spec, shape) => {
                    return Err(Error::shape(format!(
                        "layer {i}: {spec:?} cannot follow {shape:?}"
                    )))
                }
            };
            shapes.push(current);
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape_chain().map(|_| ())
    }
}

/// A runtime layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(Conv2d),
    Pool(AvgPool2d),
    Flatten,
    Dense(Dense),
}

impl Layer {
    pub fn name(&self) -> Option<&str> {
        match self {
            Layer::Conv(c) => Some(&c.name),
            Layer::Dense(d) => Some(&d.name),
            _ => None,
        }
    }

    pub fn is_trainable(&self) -> bool {
        match self {
            Layer::Conv(c) => !c.frozen,
            Layer::Dense(d) => !d.frozen,
            _ => false,
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, Layer::Conv(_) | Layer::Dense(_))
    }

    pub fn forward(&self, x: &[f64], cache: Option<&mut LayerCache>) -> Vec<f64> {
        match self {
            Layer::Conv(c) => c.forward(x, cache),
            Layer::Pool(p) => p.forward(x),
            Layer::Flatten => x.to_vec(),
            Layer::Dense(d) => d.forward(x, cache),
        }
    }
}

/// The assembled network: spec plus parameterized layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: NetSpec,
    pub layers: Vec<Layer>,
}

impl Network {
    /// Builds the network with He-style uniform fan-in initialization
    /// (weights ~ U(±√(6/fan_in)), zero biases) drawn from the seed, layer
    /// by layer in order.
    pub fn new(spec: &NetSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(spec.layers.len());
        for layer_spec in &spec.layers {
            let layer = match layer_spec {
                LayerSpec::Conv {
                    name,
                    in_shape,
                    out_channels,
                    kernel,
                    relu,
                } => {
                    let fan_in = in_shape.0 * kernel * kernel;
                    let limit = (6.0 / fan_in as f64).sqrt();
                    let w_len = out_channels * in_shape.0 * kernel * kernel;
                    let w: Vec<f64> = (0..w_len).map(|_| rng.random_range(-limit..limit)).collect();
                    let conv = Conv2d {
                        name: name.clone(),
                        in_ch: in_shape.0,
                        in_h: in_shape.1,
                        in_w: in_shape.2,
                        out_ch: *out_channels,
                        kernel: *kernel,
                        activation: if *relu { Activation::Relu } else { Activation::Linear },
                        frozen: false,
                        w,
                        b: vec![0.0; *out_channels],
                    };
                    Layer::Conv(conv)
                }
                LayerSpec::AvgPool { size, stride } => {
                    // Shape bookkeeping: recover (c, h, w) from the conv
                    // layer before this one.
                    let prev = layers
                        .iter()
                        .rev()
                        .find_map(|l| match l {
                            Layer::Conv(c) => Some((c.out_ch, c.out_h(), c.out_w())),
                            Layer::Pool(p) => Some((p.ch, p.out_h(), p.out_w())),
                            _ => None,
                        })
                        .ok_or_else(|| Error::shape("pool without a preceding conv"))?;
                    let pool = AvgPool2d {
                        ch: prev.0,
                        in_h: prev.1,
                        in_w: prev.2,
                        size: *size,
                        stride: *stride,
                    };
                    Layer::Pool(pool)
                }
                LayerSpec::Flatten => Layer::Flatten,
                LayerSpec::Dense {
                    name,
                    in_dim,
                    out_dim,
                    relu,
                } => {
                    let limit = (6.0 / *in_dim as f64).sqrt();
                    let w: Vec<f64> = (0..in_dim * out_dim)
                        .map(|_| rng.random_range(-limit..limit))
                        .collect();
                    Layer::Dense(Dense {
                        name: name.clone(),
                        in_dim: *in_dim,
                        out_dim: *out_dim,
                        activation: if *relu { Activation::Relu } else { Activation::Linear },
                        frozen: false,
                        w,
                        b: vec![0.0; *out_dim],
                    })
                }
            };
            layers.push(layer);
        }
        Ok(Network {
            spec: spec.clone(),
            layers,
        })
    }

    /// Inference pass. Classification outputs are softmax probabilities;
    /// regression outputs are unbounded.
    pub fn forward(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != self.spec.input_len() {
            return Err(Error::shape(format!(
                "input has {} values, network expects {}",
                frame.len(),
                self.spec.input_len()
            )));
        }
        let logits = self.forward_range(0, self.layers.len(), frame);
        Ok(if self.spec.softmax_output {
            softmax(&logits)
        } else {
            logits
        })
    }

    /// Raw logits (no softmax).
    pub fn forward_logits(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != self.spec.input_len() {
            return Err(Error::shape(format!(
                "input has {} values, network expects {}",
                frame.len(),
                self.spec.input_len()
            )));
        }
        Ok(self.forward_range(0, self.layers.len(), frame))
    }

    /// Runs layers `[from, to)` without caches.
    pub fn forward_range(&self, from: usize, to: usize, x: &[f64]) -> Vec<f64> {
        let mut activation = x.to_vec();
        for layer in &self.layers[from..to] {
            activation = layer.forward(&activation, None);
        }
        activation
    }

    /// Index of the first trainable parameterized layer; every layer before
    /// it is frozen or parameter-free, so activations up to it are constant
    /// during training. Equals `layers.len()` when nothing is trainable.
    pub fn frozen_prefix_len(&self) -> usize {
        self.layers
            .iter()
            .position(|l| l.is_trainable())
            .unwrap_or(self.layers.len())
    }

    /// Marks layers as frozen (true) or trainable (false) by name.
    pub fn set_frozen(&mut self, names: &[&str], frozen: bool) {
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) if names.contains(&c.name.as_str()) => c.frozen = frozen,
                Layer::Dense(d) if names.contains(&d.name.as_str()) => d.frozen = frozen,
                _ => {}
            }
        }
    }

    /// (name, weights, biases, frozen) for every parameterized layer.
    pub fn param_layers(&self) -> Vec<(&str, &[f64], &[f64], bool)> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Conv(c) => Some((c.name.as_str(), c.w.as_slice(), c.b.as_slice(), c.frozen)),
                Layer::Dense(d) => Some((d.name.as_str(), d.w.as_slice(), d.b.as_slice(), d.frozen)),
                _ => None,
            })
            .collect()
    }

    /// Deep copy of all parameters, for freeze-contract checks.
    pub fn param_snapshot(&self) -> Vec<(String, Vec<f64>, Vec<f64>)> {
        self.param_layers()
            .into_iter()
            .map(|(n, w, b, _)| (n.to_string(), w.to_vec(), b.to_vec()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classifier_shapes_chain() {
        let spec = NetSpec::classifier();
        spec.validate().unwrap();
        assert_eq!(spec.input_len(), 49);
        assert_eq!(spec.output_len().unwrap(), 11);
    }

    #[test]
    fn regressor_outputs_scalar() {
        let spec = NetSpec::regressor();
        spec.validate().unwrap();
        assert_eq!(spec.output_len().unwrap(), 1);
    }

    #[test]
    fn bad_shape_chain_rejected() {
        let mut spec = NetSpec::classifier();
        spec.layers[5] = LayerSpec::Dense {
            name: "f5".into(),
            in_dim: 20,
            out_dim: 120,
            relu: true,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn softmax_head_outputs_probabilities() {
        let net = Network::new(&NetSpec::classifier(), 3).unwrap();
        let frame: Vec<f64> = (0..49).map(|i| (i as f64) / 49.0).collect();
        let out = net.forward(&frame).unwrap();
        assert_eq!(out.len(), 11);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(out.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let mut net = Network::new(&NetSpec::classifier(), 0).unwrap();
        for layer in &mut net.layers {
            match layer {
                Layer::Conv(c) => {
                    c.w.fill(0.0);
                    c.b.fill(0.0);
                }
                Layer::Dense(d) => {
                    d.w.fill(0.0);
                    d.b.fill(0.0);
                }
                _ => {}
            }
        }
        let out = net.forward(&vec![0.3; 49]).unwrap();
        for p in out {
            assert_relative_eq!(p, 1.0 / 11.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn wrong_input_length_rejected() {
        let net = Network::new(&NetSpec::classifier(), 0).unwrap();
        assert!(net.forward(&[0.0; 48]).is_err());
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let a = Network::new(&NetSpec::classifier(), 11).unwrap();
        let b = Network::new(&NetSpec::classifier(), 11).unwrap();
        let c = Network::new(&NetSpec::classifier(), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn frozen_prefix_tracks_freeze_flags() {
        let mut net = Network::new(&NetSpec::classifier(), 0).unwrap();
        assert_eq!(net.frozen_prefix_len(), 0);
        net.set_frozen(&["c1", "c3"], true);
        // Layers: c1, pool, c3, pool, flatten → first trainable is f5 at 5.
        assert_eq!(net.frozen_prefix_len(), 5);
        net.set_frozen(&["f5", "f6"], true);
        assert_eq!(net.frozen_prefix_len(), 7);
        net.set_frozen(&["head"], true);
        assert_eq!(net.frozen_prefix_len(), 8);
    }
}
