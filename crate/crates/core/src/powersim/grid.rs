//! Dataset grid generation over the fault parameter axes.

use super::params::{FaultSpec, LineParams, SourceParams};
use super::solver::solve_split;
use super::waveform::{synthesize_waveforms, NoiseSpec, WaveformRecord, MIN_POST_SAMPLES};
use crate::error::{Error, Result};
use crate::featurex::CLASS_CODES;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameter axes of the generation grid. Fault distances are given as
/// percentages of the line length, so the same grid adapts to every length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Fault distances as a percentage of the line length.
    pub distance_pcts: Vec<f64>,
    /// Fault inception angles (degrees past the voltage zero crossing).
    pub inception_angles_deg: Vec<f64>,
    /// Fault resistances (Ω).
    pub resistances_ohm: Vec<f64>,
    /// Source phase differences Δφ (degrees).
    pub phase_diffs_deg: Vec<f64>,
    /// Source voltage fluctuations ΔV = V1 − V2 (kV).
    pub voltage_flucts_kv: Vec<f64>,
    /// Number of no-fault records; replicates spread over the Δφ × ΔV
    /// combinations and the voltage cycle.
    pub no_fault_replicates: usize,
    /// Samples synthesized before the inception index.
    pub n_pre: usize,
    /// Samples synthesized from the inception index onwards (≥ 36).
    pub n_post: usize,
}

impl GridSpec {
    /// The full training grid: 6 distances × 5 angles × 8 resistances ×
    /// 3 Δφ × 3 ΔV per faulted class, 240 no-fault replicates.
    pub fn full() -> Self {
        GridSpec {
            distance_pcts: vec![1.2, 10.0, 24.0, 40.0, 60.0, 95.0],
            inception_angles_deg: vec![1.0, 20.0, 50.0, 100.0, 150.0],
            resistances_ohm: vec![0.1, 1.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            phase_diffs_deg: vec![-30.0, 0.0, 30.0],
            voltage_flucts_kv: vec![-40.0, 0.0, 40.0],
            no_fault_replicates: 240,
            n_pre: 20,
            n_post: 40,
        }
    }

    /// Desk-scale grid keeping the extreme axis values and the full
    /// Δφ × ΔV product: 72 records per faulted class, 72 no-fault.
    pub fn reduced() -> Self {
        GridSpec {
            distance_pcts: vec![1.2, 95.0],
            inception_angles_deg: vec![1.0, 150.0],
            resistances_ohm: vec![0.1, 60.0],
            phase_diffs_deg: vec![-30.0, 0.0, 30.0],
            voltage_flucts_kv: vec![-40.0, 0.0, 40.0],
            no_fault_replicates: 72,
            n_pre: 20,
            n_post: 40,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes: [(&str, &Vec<f64>); 5] = [
            ("distance_pcts", &self.distance_pcts),
            ("inception_angles_deg", &self.inception_angles_deg),
            ("resistances_ohm", &self.resistances_ohm),
            ("phase_diffs_deg", &self.phase_diffs_deg),
            ("voltage_flucts_kv", &self.voltage_flucts_kv),
        ];
        for (name, axis) in axes {
            if axis.is_empty() {
                return Err(Error::validation(format!("grid axis {name} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "grid axis {name} contains a non-finite value"
                )));
            }
        }
        for &pct in &self.distance_pcts {
            if !(pct > 0.0 && pct < 100.0) {
                return Err(Error::validation(format!(
                    "fault distance {pct}% of line length would fall outside the line"
                )));
            }
        }
        for &r in &self.resistances_ohm {
            if !(r > 0.0) {
                return Err(Error::validation(format!(
                    "fault resistance {r} Ω must be positive"
                )));
            }
        }
        if self.n_post < MIN_POST_SAMPLES {
            return Err(Error::validation(format!(
                "n_post must be at least {MIN_POST_SAMPLES}, got {}",
                self.n_post
            )));
        }
        Ok(())
    }

    /// Number of records per faulted class.
    pub fn records_per_fault_class(&self) -> usize {
        self.distance_pcts.len()
            * self.inception_angles_deg.len()
            * self.resistances_ohm.len()
            * self.phase_diffs_deg.len()
            * self.voltage_flucts_kv.len()
    }

    /// Total record count: no-fault replicates plus ten faulted classes.
    pub fn total_records(&self) -> usize {
        self.no_fault_replicates + 10 * self.records_per_fault_class()
    }

    /// Enumerates every [`FaultSpec`] of the grid in a fixed order:
    /// no-fault replicates first, then the faulted classes in label order,
    /// each over distance → angle → resistance → Δφ → ΔV.
    pub fn fault_specs(&self, length_km: f64) -> Vec<FaultSpec> {
        let mut specs = Vec::with_capacity(self.total_records());
        let combos = self.phase_diffs_deg.len() * self.voltage_flucts_kv.len();
        for rep in 0..self.no_fault_replicates {
            let combo = rep % combos;
            let dphi = self.phase_diffs_deg[combo / self.voltage_flucts_kv.len()];
            let dv = self.voltage_flucts_kv[combo % self.voltage_flucts_kv.len()];
            // Spread replicates over the voltage cycle so windows land at
            // distinct phases.
            let angle = 360.0 * rep as f64 / self.no_fault_replicates as f64;
            specs.push(FaultSpec::no_fault(dphi, dv, angle));
        }
        for code in &CLASS_CODES[1..] {
            for &pct in &self.distance_pcts {
                for &angle in &self.inception_angles_deg {
                    for &r_f in &self.resistances_ohm {
                        for &dphi in &self.phase_diffs_deg {
                            for &dv in &self.voltage_flucts_kv {
                                specs.push(FaultSpec {
                                    fault_type: *code,
                                    distance_km: pct / 100.0 * length_km,
                                    inception_angle_deg: angle,
                                    resistance_ohm: r_f,
                                    phase_diff_deg: dphi,
                                    voltage_fluct_kv: dv,
                                });
                            }
                        }
                    }
                }
            }
        }
        specs
    }
}

/// Generates every record of the grid. Deterministic for a given seed: the
/// noise seed of record `i` is `seed + i`, so results are bit-identical
/// regardless of how the work is scheduled across threads.
pub fn generate_grid(
    line: &LineParams,
    src1: &SourceParams,
    src2: &SourceParams,
    grid: &GridSpec,
    seed: u64,
    snr_db: Option<f64>,
) -> Result<Vec<WaveformRecord>> {
    line.validated()?;
    grid.validate()?;
    let specs = grid.fault_specs(line.length_km);
    specs
        .into_par_iter()
        .enumerate()
        .map(|(index, fault)| {
            let record_seed = seed.wrapping_add(index as u64);
            generate_record(line, src1, src2, &fault, grid, record_seed, snr_db)
        })
        .collect()
}

fn generate_record(
    line: &LineParams,
    src1: &SourceParams,
    src2: &SourceParams,
    fault: &FaultSpec,
    grid: &GridSpec,
    record_seed: u64,
    snr_db: Option<f64>,
) -> Result<WaveformRecord> {
    fault.validate(line.length_km)?;
    let faulted = !fault.fault_type.is_no_fault();
    let split_km = if faulted {
        fault.distance_km
    } else {
        line.length_km / 2.0
    };
    let pre = solve_split(
        line,
        src1,
        src2,
        fault.phase_diff_deg,
        fault.voltage_fluct_kv,
        split_km,
        None,
    )?;
    let post = if faulted {
        solve_split(
            line,
            src1,
            src2,
            fault.phase_diff_deg,
            fault.voltage_fluct_kv,
            split_km,
            Some((
                fault.fault_type.phases(),
                fault.fault_type.grounded(),
                fault.resistance_ohm,
            )),
        )?
    } else {
        pre.clone()
    };
    let noise = snr_db.map(|snr_db| NoiseSpec {
        snr_db,
        seed: record_seed,
    });
    let mut rec = synthesize_waveforms(&pre, &post, line, fault, grid.n_pre, grid.n_post, noise)?;
    rec.seed = record_seed;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_counts_match_axis_product() {
        let grid = GridSpec::full();
        assert_eq!(grid.records_per_fault_class(), 6 * 5 * 8 * 3 * 3);
        assert_eq!(grid.records_per_fault_class(), 2160);
        assert_eq!(grid.total_records(), 21600 + 240);
    }

    #[test]
    fn distance_scales_with_length() {
        let grid = GridSpec::full();
        let specs = grid.fault_specs(200.0);
        let max_d = specs
            .iter()
            .map(|s| s.distance_km)
            .fold(0.0f64, f64::max);
        assert_eq!(max_d, 190.0, "95% of 200 km");
    }

    #[test]
    fn empty_axis_rejected() {
        let mut grid = GridSpec::reduced();
        grid.resistances_ohm.clear();
        assert!(grid.validate().is_err());
        let line = LineParams::nominal(100.0).unwrap();
        let s = SourceParams::nominal();
        assert!(generate_grid(&line, &s, &s, &grid, 0, None).is_err());
    }

    #[test]
    fn out_of_line_distance_rejected() {
        let mut grid = GridSpec::reduced();
        grid.distance_pcts = vec![100.0];
        assert!(grid.validate().is_err());
    }

    #[test]
    fn generation_is_deterministic_and_labelled() {
        let mut grid = GridSpec::reduced();
        // Tiny grid to keep the test fast.
        grid.distance_pcts = vec![40.0];
        grid.inception_angles_deg = vec![20.0];
        grid.resistances_ohm = vec![10.0];
        grid.no_fault_replicates = 4;
        let line = LineParams::nominal(100.0).unwrap();
        let s = SourceParams::nominal();
        let a = generate_grid(&line, &s, &s, &grid, 42, Some(60.0)).unwrap();
        let b = generate_grid(&line, &s, &s, &grid, 42, Some(60.0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), grid.total_records());
        // Labels: 4 no-fault then 9 per faulted class.
        assert!(a[..4].iter().all(|r| r.fault.fault_type.is_no_fault()));
        assert_eq!(a[4].fault.fault_type.label(), 1);
        let c = generate_grid(&line, &s, &s, &grid, 43, Some(60.0)).unwrap();
        assert_ne!(a, c, "different master seed changes the noise");
    }
}
