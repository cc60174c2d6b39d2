//! 60 Hz main-harmonic amplitude estimation over 30-sample windows.

use crate::error::{Error, Result};

use super::frame::WINDOW_LEN;

/// Amplitude of the `f0` component of a window: |(2/N)·Σ x[n]·e^(−j2πf0·n/fs)|.
///
/// At the nominal 60 Hz / 1200 Hz / 30 samples the window spans exactly
/// 1.5 cycles (20 samples per cycle), for which the self-leakage sum
/// Σ e^(−j·2·(π/10)·n) vanishes, so a pure tone of amplitude A at any
/// phase is recovered exactly.
pub fn main_harmonic(window: &[f64], f0_hz: f64, fs_hz: f64) -> Result<f64> {
    if window.len() != WINDOW_LEN {
        return Err(Error::validation(format!(
            "main_harmonic expects a {WINDOW_LEN}-sample window, got {}",
            window.len()
        )));
    }
    let theta = 2.0 * std::f64::consts::PI * f0_hz / fs_hz;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (n, &x) in window.iter().enumerate() {
        let phase = theta * n as f64;
        re += x * phase.cos();
        im -= x * phase.sin();
    }
    let n = window.len() as f64;
    Ok(2.0 / n * (re * re + im * im).sqrt())
}

/// Element-wise zero-sequence series (i_a + i_b + i_c)/3.
pub fn zero_sequence(ia: &[f64], ib: &[f64], ic: &[f64]) -> Result<Vec<f64>> {
    if ia.len() != ib.len() || ib.len() != ic.len() {
        return Err(Error::validation(format!(
            "zero_sequence requires equal-length inputs, got {}/{}/{}",
            ia.len(),
            ib.len(),
            ic.len()
        )));
    }
    Ok(ia
        .iter()
        .zip(ib)
        .zip(ic)
        .map(|((a, b), c)| (a + b + c) / 3.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const F0: f64 = 60.0;
    const FS: f64 = 1200.0;

    fn tone(amp: f64, phase: f64) -> Vec<f64> {
        (0..WINDOW_LEN)
            .map(|n| amp * (2.0 * PI * F0 * n as f64 / FS + phase).cos())
            .collect()
    }

    /// Brute-force oracle: evaluate the same single-bin correlation through
    /// an explicit complex DFT summation using independent arithmetic
    /// (polar accumulation instead of incremental phase).
    fn dft_oracle(window: &[f64]) -> f64 {
        let n = window.len();
        let mut acc = (0.0f64, 0.0f64);
        for k in 0..n {
            let ang = -2.0 * PI * F0 * k as f64 / FS;
            acc.0 += window[k] * ang.cos();
            acc.1 += window[k] * ang.sin();
        }
        2.0 / n as f64 * acc.0.hypot(acc.1)
    }

    #[test]
    fn leakage_sum_vanishes_over_thirty_samples() {
        // Σ_{n=0}^{29} e^{−j2θn} with θ = π/10 sums to zero, which is what
        // makes the tone recovery exact.
        let two_theta = 2.0 * 2.0 * PI * F0 / FS;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for n in 0..WINDOW_LEN {
            re += (two_theta * n as f64).cos();
            im -= (two_theta * n as f64).sin();
        }
        assert!(re.abs() < 1e-12 && im.abs() < 1e-12, "leakage {re}+j{im}");
    }

    #[test]
    fn unit_tone_recovered_at_any_phase() {
        for k in 0..24 {
            let phase = k as f64 * PI / 12.0;
            let amp = main_harmonic(&tone(1.0, phase), F0, FS).unwrap();
            assert_relative_eq!(amp, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn scaled_tone_recovers_amplitude() {
        let amp = main_harmonic(&tone(2.5, 0.0), F0, FS).unwrap();
        assert_relative_eq!(amp, 2.5, epsilon = 1e-12);
        assert_relative_eq!(amp, dft_oracle(&tone(2.5, 0.0)), epsilon = 1e-12);
    }

    #[test]
    fn zero_window_gives_zero() {
        assert_eq!(main_harmonic(&[0.0; WINDOW_LEN], F0, FS).unwrap(), 0.0);
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(main_harmonic(&[0.0; 29], F0, FS).is_err());
    }

    #[test]
    fn zero_sequence_of_balanced_set_vanishes() {
        let ia = tone(1.0, 0.0);
        let ib = tone(1.0, -2.0 * PI / 3.0);
        let ic = tone(1.0, 2.0 * PI / 3.0);
        let zs = zero_sequence(&ia, &ib, &ic).unwrap();
        for v in zs {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sequence_of_identical_channels_is_identity() {
        let c = vec![3.25; 10];
        let zs = zero_sequence(&c, &c, &c).unwrap();
        assert_eq!(zs, c);
    }

    #[test]
    fn zero_sequence_length_mismatch_rejected() {
        assert!(zero_sequence(&[1.0; 3], &[1.0; 3], &[1.0; 4]).is_err());
    }

    proptest! {
        // main_harmonic agrees with the brute-force DFT oracle.
        #[test]
        fn matches_dft_oracle(window in proptest::collection::vec(-1e3f64..1e3, WINDOW_LEN)) {
            let ours = main_harmonic(&window, F0, FS).unwrap();
            let oracle = dft_oracle(&window);
            prop_assert!((ours - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }

        // |α|-homogeneity.
        #[test]
        fn homogeneous(window in proptest::collection::vec(-10.0f64..10.0, WINDOW_LEN),
                       alpha in -8.0f64..8.0) {
            let base = main_harmonic(&window, F0, FS).unwrap();
            let scaled: Vec<f64> = window.iter().map(|x| alpha * x).collect();
            let got = main_harmonic(&scaled, F0, FS).unwrap();
            prop_assert!((got - alpha.abs() * base).abs() <= 1e-12 * (1.0 + base * alpha.abs()));
        }
    }
}
