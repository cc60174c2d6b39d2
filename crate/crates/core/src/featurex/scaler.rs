//! Per-feature min-max normalization fitted on the training split.

use super::frame::{Sample, FRAME_DIM};
use crate::error::{Error, Result};

/// Column-wise minima and maxima over every frame row of the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub min: [f64; FRAME_DIM],
    pub max: [f64; FRAME_DIM],
}

/// Fits the scaler over all rows of all training frames.
pub fn fit_scaler(train: &[Sample]) -> Result<Scaler> {
    if train.is_empty() {
        return Err(Error::validation("cannot fit a scaler on an empty set"));
    }
    let mut min = [f64::INFINITY; FRAME_DIM];
    let mut max = [f64::NEG_INFINITY; FRAME_DIM];
    for sample in train {
        for row in &sample.frame {
            for (c, &v) in row.iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
    }
    Ok(Scaler { min, max })
}

impl Scaler {
    /// Maps one value of feature column `col` into [0, 1], clamping values
    /// outside the fitted range; a zero-range column maps to 0.
    pub fn apply_value(&self, col: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[col], self.max[col]);
        if hi > lo {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn apply(&self, sample: &mut Sample) {
        for row in sample.frame.iter_mut() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.apply_value(c, *v);
            }
        }
    }

    pub fn apply_all(&self, samples: &mut [Sample]) {
        for s in samples.iter_mut() {
            self.apply(s);
        }
    }
}
