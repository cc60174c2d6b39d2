//! Line, source and fault parameters with their nominal values.

use crate::error::{Error, Result};
use crate::featurex::ClassCode;
use serde::{Deserialize, Serialize};

/// System frequency in Hz.
pub const SYSTEM_FREQ_HZ: f64 = 60.0;

/// Measurement sample rate in Hz (20 samples per 60 Hz cycle).
pub const SAMPLE_RATE_HZ: f64 = 1200.0;

/// The seven studied line lengths in km.
pub const SUPPORTED_LENGTHS_KM: [f64; 7] = [12.5, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0];

/// Constant three-phase load at the receiving bus: 100 kW active,
/// 50 kVAR inductive.
pub const LOAD_ACTIVE_KW: f64 = 100.0;
pub const LOAD_REACTIVE_KVAR: f64 = 50.0;

/// Per-km sequence parameters of the line plus its length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    /// Zero-sequence resistance (Ω/km).
    pub r0: f64,
    /// Positive-sequence resistance (Ω/km).
    pub r1: f64,
    /// Zero-sequence inductance (mH/km).
    pub l0: f64,
    /// Positive-sequence inductance (mH/km).
    pub l1: f64,
    /// Zero-sequence capacitance (µF/km).
    pub c0: f64,
    /// Positive-sequence capacitance (µF/km).
    pub c1: f64,
    /// Line length (km); one of [`SUPPORTED_LENGTHS_KM`].
    pub length_km: f64,
}

impl LineParams {
    /// Nominal per-km parameters at the given length.
    pub fn nominal(length_km: f64) -> Result<Self> {
        LineParams {
            r0: 0.3864,
            r1: 0.01273,
            l0: 4.1264,
            l1: 0.9337,
            c0: 7.751e-3,
            c1: 12.74e-3,
            length_km,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("r0", self.r0),
            ("r1", self.r1),
            ("l0", self.l0),
            ("l1", self.l1),
            ("c0", self.c0),
            ("c1", self.c1),
            ("length_km", self.length_km),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!(
                    "line parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        if !SUPPORTED_LENGTHS_KM.contains(&self.length_km) {
            return Err(Error::validation(format!(
                "line length {} km is not one of the supported lengths {:?}",
                self.length_km, SUPPORTED_LENGTHS_KM
            )));
        }
        Ok(self)
    }
}

/// Generator electrical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Phase-to-phase RMS voltage (kV).
    pub v_ll_kv: f64,
    /// Frequency (Hz); must equal the system frequency.
    pub freq_hz: f64,
    /// Source resistance (Ω).
    pub r_ohm: f64,
    /// Source inductance (mH).
    pub l_mh: f64,
    /// Phase of the internal EMF (degrees).
    pub phase_deg: f64,
}

impl SourceParams {
    /// Nominal 240 kV source.
    pub fn nominal() -> Self {
        SourceParams {
            v_ll_kv: 240.0,
            freq_hz: SYSTEM_FREQ_HZ,
            r_ohm: 0.08929,
            l_mh: 16.58,
            phase_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.freq_hz != SYSTEM_FREQ_HZ {
            return Err(Error::validation(format!(
                "source frequency must be {SYSTEM_FREQ_HZ} Hz, got {}",
                self.freq_hz
            )));
        }
        if !(self.v_ll_kv > 0.0) {
            return Err(Error::validation(format!(
                "source voltage must be positive, got {} kV",
                self.v_ll_kv
            )));
        }
        Ok(())
    }
}

/// One fault scenario: what fails, where, when, and under which source
/// asymmetry. `phase_diff_deg` is the phase lead of source 1 over source 2
/// and `voltage_fluct_kv` is the line-to-line voltage difference V1 − V2,
/// applied to source 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub fault_type: ClassCode,
    /// Distance of the fault from bus 1 (km). Ignored for no-fault.
    pub distance_km: f64,
    /// Point on the phase-A source voltage cycle at which the fault closes,
    /// in degrees past the positive-going zero crossing.
    pub inception_angle_deg: f64,
    /// Fault branch resistance R_f (Ω). Ignored for no-fault.
    pub resistance_ohm: f64,
    /// Δφ between the two sources (degrees).
    pub phase_diff_deg: f64,
    /// ΔV = V1 − V2 (kV).
    pub voltage_fluct_kv: f64,
}

impl FaultSpec {
    pub fn no_fault(phase_diff_deg: f64, voltage_fluct_kv: f64, inception_angle_deg: f64) -> Self {
        FaultSpec {
            fault_type: ClassCode::no_fault(),
            distance_km: 0.0,
            inception_angle_deg,
            resistance_ohm: 0.0,
            phase_diff_deg,
            voltage_fluct_kv,
        }
    }

    pub fn validate(&self, length_km: f64) -> Result<()> {
        if self.fault_type.is_no_fault() {
            return Ok(());
        }
        if !(self.distance_km > 0.0 && self.distance_km < length_km) {
            return Err(Error::validation(format!(
                "fault distance {} km must lie strictly inside the {length_km} km line",
                self.distance_km
            )));
        }
        if !(self.resistance_ohm > 0.0) {
            return Err(Error::validation(format!(
                "fault resistance must be positive, got {} Ω",
                self.resistance_ohm
            )));
        }
        Ok(())
    }
}
