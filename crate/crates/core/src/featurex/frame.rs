//! 7×7 feature frame assembly from waveform records.

use super::classcode::ClassCode;
use super::harmonic::{main_harmonic, zero_sequence};
use crate::error::{Error, Result};
use crate::powersim::{WaveformRecord, SYSTEM_FREQ_HZ};

/// Samples per analysis window (1.5 cycles at 20 samples per cycle).
pub const WINDOW_LEN: usize = 30;

/// Frame side: 7 windows by 7 features.
pub const FRAME_DIM: usize = 7;

/// A 30-sample view over all six measured channels, aligned in time.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub start: usize,
    channels: [&'a [f64]; 6],
}

impl<'a> Window<'a> {
    pub fn from_record(rec: &'a WaveformRecord, start: usize) -> Result<Self> {
        if start + WINDOW_LEN > rec.n_samples() {
            return Err(Error::validation(format!(
                "window [{start}, {}) exceeds record length {}",
                start + WINDOW_LEN,
                rec.n_samples()
            )));
        }
        let channels = rec.channels().map(|c| &c[start..start + WINDOW_LEN]);
        Ok(Window { start, channels })
    }

    /// The seven per-window features: main-harmonic amplitudes of the three
    /// voltages and three currents plus the zero-sequence current, computed
    /// from its own time series rather than the other amplitudes.
    pub fn feature_vector(&self) -> Result<FeatureVector> {
        let fs = 1200.0;
        let mut features = [0.0f64; FRAME_DIM];
        for (i, ch) in self.channels.iter().enumerate() {
            features[i] = main_harmonic(ch, SYSTEM_FREQ_HZ, fs)?;
        }
        let zs = zero_sequence(self.channels[3], self.channels[4], self.channels[5])?;
        features[6] = main_harmonic(&zs, SYSTEM_FREQ_HZ, fs)?;
        Ok(FeatureVector(features))
    }
}

/// [|V_a|, |V_b|, |V_c|, |I_a|, |I_b|, |I_c|, |I_0|].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FRAME_DIM]);

/// One dataset sample: the 7×7 frame (rows = consecutive windows, columns =
/// features), its class, and the normalized fault location d/L (undefined
/// for no-fault records).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub frame: [[f64; FRAME_DIM]; FRAME_DIM],
    pub class: ClassCode,
    pub location: Option<f64>,
}

impl Sample {
    pub fn class_label(&self) -> u8 {
        self.class.label()
    }

    /// Frame flattened row-major, as fed to the network.
    pub fn flat_frame(&self) -> [f64; FRAME_DIM * FRAME_DIM] {
        let mut flat = [0.0; FRAME_DIM * FRAME_DIM];
        for (r, row) in self.frame.iter().enumerate() {
            flat[r * FRAME_DIM..(r + 1) * FRAME_DIM].copy_from_slice(row);
        }
        flat
    }
}

/// Builds the sample for a record: 7 windows starting at the inception
/// index with stride 1, one feature vector per row.
pub fn assemble_frame(rec: &WaveformRecord) -> Result<Sample> {
    if rec.post_inception_len() < WINDOW_LEN + FRAME_DIM - 1 {
        return Err(Error::validation(format!(
            "record needs at least {} post-inception samples for the frame, got {}",
            WINDOW_LEN + FRAME_DIM - 1,
            rec.post_inception_len()
        )));
    }
    let mut frame = [[0.0; FRAME_DIM]; FRAME_DIM];
    for (k, row) in frame.iter_mut().enumerate() {
        let w = Window::from_record(rec, rec.inception_index + k)?;
        *row = w.feature_vector()?.0;
    }
    let location = if rec.fault.fault_type.is_no_fault() {
        None
    } else {
        Some(rec.fault.distance_km / rec.line.length_km)
    };
    Ok(Sample {
        frame,
        class: rec.fault.fault_type,
        location,
    })
}
