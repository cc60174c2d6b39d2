//! Network layers: valid convolution, average pooling, flatten, dense.
//!
//! Layers are immutable during forward/backward; per-sample activations go
//! into caller-owned caches and parameter gradients accumulate into
//! caller-owned buffers, so a shared network is safe for concurrent
//! inference.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Linear => v,
            Activation::Relu => v.max(0.0),
        }
    }
}

/// Per-sample forward activations needed by the backward pass.
#[derive(Debug, Default, Clone)]
pub struct LayerCache {
    pub input: Vec<f64>,
    /// Pre-activation outputs (for the ReLU mask).
    pub pre: Vec<f64>,
}

/// Gradient accumulator for one parameterized layer.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros(w_len: usize, b_len: usize) -> Self {
        ParamGrads {
            w: vec![0.0; w_len],
            b: vec![0.0; b_len],
        }
    }

    pub fn clear(&mut self) {
        self.w.fill(0.0);
        self.b.fill(0.0);
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.w {
            *g *= factor;
        }
        for g in &mut self.b {
            *g *= factor;
        }
    }
}

/// Valid 2-D convolution over channel-major input `[ch][h][w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub name: String,
    pub in_ch: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub activation: Activation,
    pub frozen: bool,
    /// Weights `[out_ch][in_ch][kernel][kernel]`, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Conv2d {
    pub fn out_h(&self) -> usize {
        self.in_h - self.kernel + 1
    }

    pub fn out_w(&self) -> usize {
        self.in_w - self.kernel + 1
    }

    pub fn in_len(&self) -> usize {
        self.in_ch * self.in_h * self.in_w
    }

    pub fn out_len(&self) -> usize {
        self.out_ch * self.out_h() * self.out_w()
    }

    pub fn forward(&self, x: &[f64], mut cache: Option<&mut LayerCache>) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_len());
        let (oh, ow, k) = (self.out_h(), self.out_w(), self.kernel);
        let mut pre = vec![0.0; self.out_len()];
        for oc in 0..self.out_ch {
            let w_oc = &self.w[oc * self.in_ch * k * k..(oc + 1) * self.in_ch * k * k];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = self.b[oc];
                    for ic in 0..self.in_ch {
                        let w_ic = &w_oc[ic * k * k..(ic + 1) * k * k];
                        let x_ic = &x[ic * self.in_h * self.in_w..];
                        for ky in 0..k {
                            let x_row = &x_ic[(oy + ky) * self.in_w + ox..];
                            let w_row = &w_ic[ky * k..ky * k + k];
                            for kx in 0..k {
                                acc += w_row[kx] * x_row[kx];
                            }
                        }
                    }
                    pre[(oc * oh + oy) * ow + ox] = acc;
                }
            }
        }
        let out: Vec<f64> = pre.iter().map(|&v| self.activation.apply(v)).collect();
        if let Some(c) = cache.as_deref_mut() {
            c.input.clear();
            c.input.extend_from_slice(x);
            c.pre = pre;
        }
        out
    }

    /// Backpropagates through activation and convolution. Accumulates
    /// parameter gradients into `grads` when given (frozen layers pass
    /// `None`), and returns the input gradient when `want_grad_in`.
    pub fn backward(
        &self,
        cache: &LayerCache,
        grad_out: &[f64],
        grads: Option<&mut ParamGrads>,
        want_grad_in: bool,
    ) -> Option<Vec<f64>> {
        let (oh, ow, k) = (self.out_h(), self.out_w(), self.kernel);
        let mut delta = grad_out.to_vec();
        if self.activation == Activation::Relu {
            for (d, &p) in delta.iter_mut().zip(&cache.pre) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        if let Some(g) = grads {
            for oc in 0..self.out_ch {
                let gw_oc = &mut g.w[oc * self.in_ch * k * k..(oc + 1) * self.in_ch * k * k];
                for oy in 0..oh {
                    for ox in 0..ow {
                        let d = delta[(oc * oh + oy) * ow + ox];
                        g.b[oc] += d;
                        for ic in 0..self.in_ch {
                            let x_ic = &cache.input[ic * self.in_h * self.in_w..];
                            let gw_ic = &mut gw_oc[ic * k * k..(ic + 1) * k * k];
                            for ky in 0..k {
                                let x_row = &x_ic[(oy + ky) * self.in_w + ox..];
                                for kx in 0..k {
                                    gw_ic[ky * k + kx] += d * x_row[kx];
                                }
                            }
                        }
                    }
                }
            }
        }
        if !want_grad_in {
            return None;
        }
        let mut grad_in = vec![0.0; self.in_len()];
        for oc in 0..self.out_ch {
            let w_oc = &self.w[oc * self.in_ch * k * k..(oc + 1) * self.in_ch * k * k];
            for oy in 0..oh {
                for ox in 0..ow {
                    let d = delta[(oc * oh + oy) * ow + ox];
                    for ic in 0..self.in_ch {
                        let w_ic = &w_oc[ic * k * k..(ic + 1) * k * k];
                        let gi_ic = &mut grad_in[ic * self.in_h * self.in_w..];
                        for ky in 0..k {
                            let gi_row = &mut gi_ic[(oy + ky) * self.in_w + ox..];
                            for kx in 0..k {
                                gi_row[kx] += d * w_ic[ky * k + kx];
                            }
                        }
                    }
                }
            }
        }
        Some(grad_in)
    }
}

/// Average pooling with a square window; no trainable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvgPool2d {
    pub ch: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub size: usize,
    pub stride: usize,
}

impl AvgPool2d {
    pub fn out_h(&self) -> usize {
        (self.in_h - self.size) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.in_w - self.size) / self.stride + 1
    }

    pub fn in_len(&self) -> usize {
        self.ch * self.in_h * self.in_w
    }

    pub fn out_len(&self) -> usize {
        self.ch * self.out_h() * self.out_w()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_len());
        let (oh, ow) = (self.out_h(), self.out_w());
        let norm = 1.0 / (self.size * self.size) as f64;
        let mut out = vec![0.0; self.out_len()];
        for c in 0..self.ch {
            let x_c = &x[c * self.in_h * self.in_w..];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = 0.0;
                    for wy in 0..self.size {
                        let row = (oy * self.stride + wy) * self.in_w + ox * self.stride;
                        for wx in 0..self.size {
                            acc += x_c[row + wx];
                        }
                    }
                    out[(c * oh + oy) * ow + ox] = acc * norm;
                }
            }
        }
        out
    }

    /// Distributes each output gradient evenly over its window
    /// (overlapping windows accumulate).
    pub fn backward(&self, grad_out: &[f64], want_grad_in: bool) -> Option<Vec<f64>> {
        if !want_grad_in {
            return None;
        }
        let (oh, ow) = (self.out_h(), self.out_w());
        let norm = 1.0 / (self.size * self.size) as f64;
        let mut grad_in = vec![0.0; self.in_len()];
        for c in 0..self.ch {
            let gi_c = &mut grad_in[c * self.in_h * self.in_w..(c + 1) * self.in_h * self.in_w];
            for oy in 0..oh {
                for ox in 0..ow {
                    let d = grad_out[(c * oh + oy) * ow + ox] * norm;
                    for wy in 0..self.size {
                        let row = (oy * self.stride + wy) * self.in_w + ox * self.stride;
                        for wx in 0..self.size {
                            gi_c[row + wx] += d;
                        }
                    }
                }
            }
        }
        Some(grad_in)
    }
}

/// Fully connected layer with flat row-major weights `[out_dim][in_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub frozen: bool,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    pub fn forward(&self, x: &[f64], mut cache: Option<&mut LayerCache>) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut pre = vec![0.0; self.out_dim];
        for (o, p) in pre.iter_mut().enumerate() {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let dot: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
            *p = dot + self.b[o];
        }
        let out: Vec<f64> = pre.iter().map(|&v| self.activation.apply(v)).collect();
        if let Some(c) = cache.as_deref_mut() {
            c.input.clear();
            c.input.extend_from_slice(x);
            c.pre = pre;
        }
        out
    }

    pub fn backward(
        &self,
        cache: &LayerCache,
        grad_out: &[f64],
        grads: Option<&mut ParamGrads>,
        want_grad_in: bool,
    ) -> Option<Vec<f64>> {
        let mut delta = grad_out.to_vec();
        if self.activation == Activation::Relu {
            for (d, &p) in delta.iter_mut().zip(&cache.pre) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        if let Some(g) = grads {
            for (o, &d) in delta.iter().enumerate() {
                g.b[o] += d;
                let gw_row = &mut g.w[o * self.in_dim..(o + 1) * self.in_dim];
                for (gw, &xi) in gw_row.iter_mut().zip(&cache.input) {
                    *gw += d * xi;
                }
            }
        }
        if !want_grad_in {
            return None;
        }
        let mut grad_in = vec![0.0; self.in_dim];
        for (o, &d) in delta.iter().enumerate() {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            for (gi, &wi) in grad_in.iter_mut().zip(row) {
                *gi += d * wi;
            }
        }
        Some(grad_in)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
