//! Feature dataset CSV and scaler sidecar files.
//!
//! Dataset CSV: header row, then one sample per row — 49 frame columns
//! `f<row><col>` in row-major order, `class_label`, `class_code`, and
//! `location` (empty for no-fault samples).
//!
//! Scaler sidecar: a small text file, one `name min max` line per feature.

use super::classcode::ClassCode;
use super::frame::{Sample, FRAME_DIM};
use super::scaler::Scaler;
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

const FEATURE_NAMES: [&str; FRAME_DIM] = ["v_a", "v_b", "v_c", "i_a", "i_b", "i_c", "i_0"];
const SCALER_HEADER: &str = "tlxd-scaler v1";

pub fn write_dataset_csv(path: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::validation("no samples to write"));
    }
    let mut out = String::new();
    for r in 0..FRAME_DIM {
        for c in 0..FRAME_DIM {
            out.push_str(&format!("f{r}{c},"));
        }
    }
    out.push_str("class_label,class_code,location\n");
    for s in samples {
        for row in &s.frame {
            for v in row {
                out.push_str(&format!("{v},"));
            }
        }
        match s.location {
            Some(loc) => out.push_str(&format!("{},{},{loc}\n", s.class_label(), s.class)),
            None => out.push_str(&format!("{},{},\n", s.class_label(), s.class)),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(&display, "empty dataset"))?;
    let expected_cols = FRAME_DIM * FRAME_DIM + 3;
    if header.split(',').count() != expected_cols {
        return Err(Error::parse(
            &display,
            format!("expected {expected_cols} columns"),
        ));
    }
    let mut samples = Vec::new();
    for (lineno, row) in lines.enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != expected_cols {
            return Err(Error::parse(
                &display,
                format!("row {}: wrong field count", lineno + 2),
            ));
        }
        let mut frame = [[0.0; FRAME_DIM]; FRAME_DIM];
        for r in 0..FRAME_DIM {
            for c in 0..FRAME_DIM {
                frame[r][c] = fields[r * FRAME_DIM + c].parse::<f64>().map_err(|e| {
                    Error::parse(&display, format!("row {}: f{r}{c}: {e}", lineno + 2))
                })?;
            }
        }
        let label: u8 = fields[49]
            .parse()
            .map_err(|e| Error::parse(&display, format!("row {}: label: {e}", lineno + 2)))?;
        let class = ClassCode::parse(fields[50])?;
        if class.label() != label {
            return Err(Error::parse(
                &display,
                format!("row {}: label {label} does not match code {class}", lineno + 2),
            ));
        }
        let location = if fields[51].is_empty() {
            None
        } else {
            Some(fields[51].parse::<f64>().map_err(|e| {
                Error::parse(&display, format!("row {}: location: {e}", lineno + 2))
            })?)
        };
        samples.push(Sample {
            frame,
            class,
            location,
        });
    }
    if samples.is_empty() {
        return Err(Error::parse(&display, "no samples"));
    }
    Ok(samples)
}

pub fn write_scaler(path: impl AsRef<Path>, scaler: &Scaler) -> Result<()> {
    let mut out = String::from(SCALER_HEADER);
    out.push('\n');
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        out.push_str(&format!("{name} {} {}\n", scaler.min[i], scaler.max[i]));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_scaler(path: impl AsRef<Path>) -> Result<Scaler> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(SCALER_HEADER) {
        return Err(Error::parse(&display, "missing scaler header"));
    }
    let mut scaler = Scaler {
        min: [0.0; FRAME_DIM],
        max: [0.0; FRAME_DIM],
    };
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(&display, "truncated scaler file"))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(*name) {
            return Err(Error::parse(&display, format!("expected feature {name}")));
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::parse(&display, "missing value"))?
                .parse::<f64>()
                .map_err(|e| Error::parse(&display, e.to_string()))
        };
        scaler.min[i] = parse(parts.next())?;
        scaler.max[i] = parse(parts.next())?;
    }
    Ok(scaler)
}
