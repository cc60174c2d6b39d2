//! Stratified train/test split.

use super::frame::Sample;
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Splits samples into (train, test) stratified by class label. Within each
/// class the assignment is a seeded shuffle, so the split is deterministic.
pub fn split_dataset(
    samples: Vec<Sample>,
    ratio: f64,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::validation(format!(
            "split ratio must lie strictly inside (0, 1), got {ratio}"
        )));
    }
    let mut by_class: BTreeMap<u8, Vec<Sample>> = BTreeMap::new();
    for s in samples {
        by_class.entry(s.class_label()).or_default().push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut class_samples) in by_class {
        let n = class_samples.len();
        if n < 2 {
            return Err(Error::validation(format!(
                "class {label} has {n} sample(s); need at least 2 to split"
            )));
        }
        class_samples.shuffle(&mut rng);
        let n_train = ((n as f64 * ratio).round() as usize).clamp(1, n - 1);
        let rest = class_samples.split_off(n_train);
        train.extend(class_samples);
        test.extend(rest);
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurex::{ClassCode, FRAME_DIM};

    fn dummy(label: u8, tag: f64) -> Sample {
        Sample {
            frame: [[tag; FRAME_DIM]; FRAME_DIM],
            class: ClassCode::from_label(label).unwrap(),
            location: (label != 0).then_some(0.5),
        }
    }

    fn class_counts(set: &[Sample]) -> BTreeMap<u8, usize> {
        let mut m = BTreeMap::new();
        for s in set {
            *m.entry(s.class_label()).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn seventy_thirty_split_of_full_class() {
        // 2160 samples per class at ratio 0.7 → 1512 train, 648 test.
        let samples: Vec<Sample> = (0..2160).map(|i| dummy(1, i as f64)).collect();
        let (train, test) = split_dataset(samples, 0.7, 1).unwrap();
        assert_eq!(train.len(), 1512);
        assert_eq!(test.len(), 648);
    }

    #[test]
    fn split_is_deterministic() {
        let make = || -> Vec<Sample> {
            (0..50)
                .flat_map(|i| (0..3).map(move |l| dummy(l, i as f64 + l as f64 * 1000.0)))
                .collect()
        };
        let a = split_dataset(make(), 0.7, 9).unwrap();
        let b = split_dataset(make(), 0.7, 9).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(make(), 0.7, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stratification_preserves_proportions() {
        let mut samples = Vec::new();
        for label in 0..5u8 {
            for i in 0..40 + label as usize {
                samples.push(dummy(label, i as f64));
            }
        }
        let totals = class_counts(&samples);
        let (train, _test) = split_dataset(samples, 0.7, 3).unwrap();
        let train_counts = class_counts(&train);
        for (label, total) in totals {
            let expected = total as f64 * 0.7;
            let got = train_counts[&label] as f64;
            assert!(
                (got - expected).abs() <= 1.0,
                "class {label}: {got} train of {total}"
            );
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let samples = vec![dummy(0, 0.0), dummy(0, 1.0)];
        assert!(split_dataset(samples.clone(), 1.0, 0).is_err());
        assert!(split_dataset(samples, 0.0, 0).is_err());
        let lonely = vec![dummy(0, 0.0), dummy(1, 0.0), dummy(0, 1.0)];
        assert!(split_dataset(lonely, 0.7, 0).is_err(), "class 1 has one member");
    }
}
