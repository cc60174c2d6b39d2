//! Complex modified nodal analysis for the small fault-study network.
//!
//! Dense assembly: the system has at most ~22 unknowns (16 node voltages
//! plus 6 source currents), so a dense complex LU is both simpler and
//! faster than anything sparse.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

/// MNA system A·x = b over complex phasors. Unknowns are node voltages
/// (ground excluded) followed by one branch current per voltage source.
pub struct ComplexMna {
    n_nodes: usize,
    n_vsources: usize,
    a: DMatrix<Complex64>,
    b: DVector<Complex64>,
}

impl ComplexMna {
    pub fn new(n_nodes: usize, n_vsources: usize) -> Self {
        let size = n_nodes + n_vsources;
        ComplexMna {
            n_nodes,
            n_vsources,
            a: DMatrix::zeros(size, size),
            b: DVector::zeros(size),
        }
    }

    pub fn size(&self) -> usize {
        self.n_nodes + self.n_vsources
    }

    /// Stamps an admittance between two nodes (`None` = ground).
    pub fn stamp_admittance(&mut self, i: Option<usize>, j: Option<usize>, y: Complex64) {
        if let Some(i) = i {
            self.a[(i, i)] += y;
        }
        if let Some(j) = j {
            self.a[(j, j)] += y;
        }
        if let (Some(i), Some(j)) = (i, j) {
            self.a[(i, j)] -= y;
            self.a[(j, i)] -= y;
        }
    }

    /// Stamps a 3×3 admittance block between two node triples (a coupled
    /// three-phase series element).
    pub fn stamp_admittance_block(
        &mut self,
        from: [usize; 3],
        to: [usize; 3],
        y: &Matrix3<Complex64>,
    ) {
        for p in 0..3 {
            for q in 0..3 {
                let v = y[(p, q)];
                self.a[(from[p], from[q])] += v;
                self.a[(to[p], to[q])] += v;
                self.a[(from[p], to[q])] -= v;
                self.a[(to[p], from[q])] -= v;
            }
        }
    }

    /// Stamps a 3×3 shunt admittance block from a node triple to ground.
    pub fn stamp_shunt_block(&mut self, nodes: [usize; 3], y: &Matrix3<Complex64>) {
        for p in 0..3 {
            for q in 0..3 {
                self.a[(nodes[p], nodes[q])] += y[(p, q)];
            }
        }
    }

    /// Stamps an ideal voltage source `e` from ground to `node` using the
    /// extra current variable `src_idx`. The solved current flows from
    /// ground through the source into the node.
    pub fn stamp_vsource(&mut self, src_idx: usize, node: usize, e: Complex64) {
        let row = self.n_nodes + src_idx;
        self.a[(node, row)] += Complex64::new(1.0, 0.0);
        self.a[(row, node)] += Complex64::new(1.0, 0.0);
        self.b[row] = e;
    }

    /// Solves the system, returning node voltages followed by source
    /// currents. A singular matrix reports the LU pivot conditioning so the
    /// degenerate parameter set can be diagnosed.
    pub fn solve(&self) -> Result<DVector<Complex64>> {
        let lu = self.a.clone().lu();
        match lu.solve(&self.b) {
            Some(x) => Ok(x),
            None => {
                let u = lu.u();
                let diag: Vec<f64> = (0..u.nrows().min(u.ncols()))
                    .map(|i| u[(i, i)].norm())
                    .collect();
                let max = diag.iter().cloned().fold(0.0, f64::max);
                let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
                let rcond = if max > 0.0 { min / max } else { 0.0 };
                Err(Error::solver(format!(
                    "singular {n}x{n} MNA matrix: |pivot| range [{min:.3e}, {max:.3e}], \
                     reciprocal condition estimate {rcond:.3e}",
                    n = self.size(),
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn voltage_divider() {
        // E = 10 V through two series 1 Ω resistors to ground: midpoint 5 V.
        let mut mna = ComplexMna::new(2, 1);
        let y = Complex64::new(1.0, 0.0);
        mna.stamp_admittance(Some(0), Some(1), y);
        mna.stamp_admittance(Some(1), None, y);
        mna.stamp_vsource(0, 0, Complex64::new(10.0, 0.0));
        let x = mna.solve().unwrap();
        assert_relative_eq!(x[0].re, 10.0, max_relative = 1e-12);
        assert_relative_eq!(x[1].re, 5.0, max_relative = 1e-12);
        // source current = -5 A convention check: current from ground into
        // node equals the series current 5 A
        assert_relative_eq!(x[2].re, -5.0, max_relative = 1e-12);
    }

    #[test]
    fn singular_matrix_reports_conditioning() {
        // A floating node with no connections at all.
        let mna = ComplexMna::new(1, 0);
        let err = mna.solve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("singular"), "unexpected message: {msg}");
    }
}
