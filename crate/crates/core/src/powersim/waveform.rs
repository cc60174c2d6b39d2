//! Time-domain waveform synthesis from pre/post-fault phasor solutions.

use super::params::{FaultSpec, LineParams, SAMPLE_RATE_HZ, SYSTEM_FREQ_HZ};
use super::solver::PhasorSolution;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// Minimum number of post-inception samples: 7 stride-1 windows of 30.
pub const MIN_POST_SAMPLES: usize = 36;

/// Optional zero-mean Gaussian measurement noise, scaled per channel to the
/// requested signal-to-noise ratio.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Sampled three-phase voltages and currents at bus 2 with the fault
/// metadata that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    /// Sample rate; always 1200 Hz.
    pub sample_rate_hz: f64,
    pub va: Vec<f64>,
    pub vb: Vec<f64>,
    pub vc: Vec<f64>,
    pub ia: Vec<f64>,
    pub ib: Vec<f64>,
    pub ic: Vec<f64>,
    /// Index of the first sample taken from the post-fault solution.
    pub inception_index: usize,
    pub fault: FaultSpec,
    pub line: LineParams,
    /// Noise seed used for this record (0 when synthesized without noise).
    pub seed: u64,
}

impl WaveformRecord {
    pub fn n_samples(&self) -> usize {
        self.va.len()
    }

    pub fn post_inception_len(&self) -> usize {
        self.n_samples() - self.inception_index
    }

    /// Channels in feature order: va, vb, vc, ia, ib, ic.
    pub fn channels(&self) -> [&[f64]; 6] {
        [&self.va, &self.vb, &self.vc, &self.ia, &self.ib, &self.ic]
    }

    pub fn channels_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.va,
            &mut self.vb,
            &mut self.vc,
            &mut self.ia,
            &mut self.ib,
            &mut self.ic,
        ]
    }
}

/// Stitches time-domain samples from the pre-fault phasors (before the
/// inception index) and post-fault phasors (from it onwards).
///
/// The common time origin is chosen so that at the inception sample the
/// phase-A source voltage sits exactly `fault.inception_angle_deg` degrees
/// past its positive-going zero crossing; all phasors are rotated by the
/// same angle, preserving their relative phases.
pub fn synthesize_waveforms(
    pre: &PhasorSolution,
    post: &PhasorSolution,
    line: &LineParams,
    fault: &FaultSpec,
    n_pre: usize,
    n_post: usize,
    noise: Option<NoiseSpec>,
) -> Result<WaveformRecord> {
    if n_post < MIN_POST_SAMPLES {
        return Err(Error::validation(format!(
            "need at least {MIN_POST_SAMPLES} post-inception samples, got {n_post}"
        )));
    }
    let omega = 2.0 * PI * SYSTEM_FREQ_HZ;
    let fs = SAMPLE_RATE_HZ;
    let t_inc = n_pre as f64 / fs;
    // v_a(t) = |E|·cos(ωt + α + δ) = |E|·sin(ωt + α + δ + π/2); the angle
    // past the positive zero crossing is the sine argument.
    let alpha = pre.emf_src1[0].arg();
    let delta = fault.inception_angle_deg.to_radians() - PI / 2.0 - alpha - omega * t_inc;

    let n_total = n_pre + n_post;
    let sample = |phasor: Complex64, n: usize| -> f64 {
        let t = n as f64 / fs;
        phasor.norm() * (omega * t + phasor.arg() + delta).cos()
    };
    let trace = |pre_ph: Complex64, post_ph: Complex64| -> Vec<f64> {
        (0..n_total)
            .map(|n| {
                if n < n_pre {
                    sample(pre_ph, n)
                } else {
                    sample(post_ph, n)
                }
            })
            .collect()
    };

    let v_pre = pre.bus2_voltages();
    let v_post = post.bus2_voltages();
    let i_pre = pre.bus2_currents();
    let i_post = post.bus2_currents();
    let mut rec = WaveformRecord {
        sample_rate_hz: fs,
        va: trace(v_pre[0], v_post[0]),
        vb: trace(v_pre[1], v_post[1]),
        vc: trace(v_pre[2], v_post[2]),
        ia: trace(i_pre[0], i_post[0]),
        ib: trace(i_pre[1], i_post[1]),
        ic: trace(i_pre[2], i_post[2]),
        inception_index: n_pre,
        fault: *fault,
        line: *line,
        seed: noise.map(|n| n.seed).unwrap_or(0),
    };

    if let Some(spec) = noise {
        add_noise(&mut rec, spec);
    }
    Ok(rec)
}

fn add_noise(rec: &mut WaveformRecord, spec: NoiseSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gain = 10f64.powf(-spec.snr_db / 20.0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for channel in rec.channels_mut() {
        let n = channel.len() as f64;
        let rms = (channel.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
        let std = rms * gain;
        for x in channel.iter_mut() {
            *x += std * normal.sample(&mut rng);
        }
    }
}
