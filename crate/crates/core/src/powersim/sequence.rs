//! Sequence-to-phase impedance conversion for the transposed line.

use super::params::{LineParams, SYSTEM_FREQ_HZ};
use crate::error::Result;
use nalgebra::Matrix3;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Symmetric 3×3 phase impedance (or admittance) matrix of a transposed
/// line: equal self terms on the diagonal, equal mutual terms off it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseImpedanceMatrix {
    pub z_self: Complex64,
    pub z_mutual: Complex64,
}

impl PhaseImpedanceMatrix {
    pub fn to_matrix(&self) -> Matrix3<Complex64> {
        let s = self.z_self;
        let m = self.z_mutual;
        Matrix3::new(s, m, m, m, s, m, m, m, s)
    }

    /// Scales both entries, e.g. per-km values by a segment length.
    pub fn scale(&self, factor: f64) -> Self {
        PhaseImpedanceMatrix {
            z_self: self.z_self * factor,
            z_mutual: self.z_mutual * factor,
        }
    }
}

/// Series phase impedance matrix of the line at 60 Hz, per km when `per_km`
/// is set, otherwise for the full line length.
///
/// The sequence impedances are z0 = r0 + jωl0 and z1 = r1 + jωl1, and the
/// transposed-line phase matrix has z_self = (z0 + 2·z1)/3 on the diagonal
/// and z_mutual = (z0 − z1)/3 off it.
pub fn sequence_to_phase(p: &LineParams, per_km: bool) -> Result<PhaseImpedanceMatrix> {
    p.validated()?;
    let omega = 2.0 * PI * SYSTEM_FREQ_HZ;
    let z0 = Complex64::new(p.r0, omega * p.l0 * 1e-3);
    let z1 = Complex64::new(p.r1, omega * p.l1 * 1e-3);
    let m = PhaseImpedanceMatrix {
        z_self: (z0 + 2.0 * z1) / 3.0,
        z_mutual: (z0 - z1) / 3.0,
    };
    Ok(if per_km { m } else { m.scale(p.length_km) })
}

/// Inverse of [`sequence_to_phase`]: recovers (z0, z1) from the phase matrix.
pub fn phase_to_sequence(m: &PhaseImpedanceMatrix) -> (Complex64, Complex64) {
    (m.z_self + 2.0 * m.z_mutual, m.z_self - m.z_mutual)
}

/// Shunt phase admittance matrix jωC of the line at 60 Hz, per km or for
/// the full length. Same symmetric structure as the series matrix.
pub fn shunt_admittance(p: &LineParams, per_km: bool) -> Result<PhaseImpedanceMatrix> {
    p.validated()?;
    let omega = 2.0 * PI * SYSTEM_FREQ_HZ;
    let y0 = Complex64::new(0.0, omega * p.c0 * 1e-6);
    let y1 = Complex64::new(0.0, omega * p.c1 * 1e-6);
    let m = PhaseImpedanceMatrix {
        z_self: (y0 + 2.0 * y1) / 3.0,
        z_mutual: (y0 - y1) / 3.0,
    };
    Ok(if per_km { m } else { m.scale(p.length_km) })
}
