//! Waveform dataset serialization: CSV rows and a compact binary container.
//!
//! CSV layout: one record per row. Metadata columns first (length,
//! fault code, distance, angle, resistance, Δφ, ΔV, seed, sample rate,
//! n_pre, n_post, inception index), then the waveform samples as one
//! column per channel sample: the three voltage blocks followed by the
//! three current blocks (`va_*`, `vb_*`, `vc_*`, `ia_*`, `ib_*`, `ic_*`).
//!
//! Binary layout (`TLWF`): magic `TLWF`, u16 version, u32 record count,
//! then per record the metadata followed by the six channel blocks as
//! little-endian 64-bit floats.

use super::params::{FaultSpec, LineParams};
use super::waveform::WaveformRecord;
use crate::error::{Error, Result};
use crate::featurex::ClassCode;
use std::fs;
use std::io::Write as _;
use std::path::Path;

const BIN_MAGIC: &[u8; 4] = b"TLWF";
const BIN_VERSION: u16 = 1;

const CHANNEL_NAMES: [&str; 6] = ["va", "vb", "vc", "ia", "ib", "ic"];

fn meta_header() -> String {
    "length_km,fault_type,distance_km,inception_angle_deg,resistance_ohm,\
     phase_diff_deg,voltage_fluct_kv,seed,sample_rate_hz,n_pre,n_post,inception_index"
        .to_string()
}

pub fn write_waveforms_csv(path: impl AsRef<Path>, records: &[WaveformRecord]) -> Result<()> {
    let path = path.as_ref();
    if records.is_empty() {
        return Err(Error::validation("no waveform records to write"));
    }
    let n = records[0].n_samples();
    if records.iter().any(|r| r.n_samples() != n) {
        return Err(Error::validation(
            "waveform records differ in length; cannot form a rectangular CSV",
        ));
    }
    let mut out = String::new();
    out.push_str(&meta_header());
    for ch in CHANNEL_NAMES {
        for i in 0..n {
            out.push_str(&format!(",{ch}_{i}"));
        }
    }
    out.push('\n');
    for r in records {
        let n_pre = r.inception_index;
        let n_post = r.n_samples() - n_pre;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.line.length_km,
            r.fault.fault_type,
            r.fault.distance_km,
            r.fault.inception_angle_deg,
            r.fault.resistance_ohm,
            r.fault.phase_diff_deg,
            r.fault.voltage_fluct_kv,
            r.seed,
            r.sample_rate_hz,
            n_pre,
            n_post,
            r.inception_index,
        ));
        for ch in r.channels() {
            for v in ch {
                out.push_str(&format!(",{v}"));
            }
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_waveforms_csv(path: impl AsRef<Path>) -> Result<Vec<WaveformRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(&display, "empty file"))?;
    let n_meta = meta_header().split(',').count();
    let n_cols = header.split(',').count();
    if (n_cols - n_meta) % 6 != 0 || n_cols <= n_meta {
        return Err(Error::parse(
            &display,
            format!("expected {n_meta} metadata columns plus 6 equal channel blocks, got {n_cols} columns"),
        ));
    }
    let n = (n_cols - n_meta) / 6;

    let mut records = Vec::new();
    for (lineno, row) in lines.enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != n_cols {
            return Err(Error::parse(
                &display,
                format!("row {}: expected {n_cols} fields, got {}", lineno + 2, fields.len()),
            ));
        }
        let parse_f64 = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| Error::parse(&display, format!("row {}: field {i}: {e}", lineno + 2)))
        };
        let length_km = parse_f64(0)?;
        let fault_type = ClassCode::parse(fields[1])?;
        let fault = FaultSpec {
            fault_type,
            distance_km: parse_f64(2)?,
            inception_angle_deg: parse_f64(3)?,
            resistance_ohm: parse_f64(4)?,
            phase_diff_deg: parse_f64(5)?,
            voltage_fluct_kv: parse_f64(6)?,
        };
        let seed = fields[7]
            .parse::<u64>()
            .map_err(|e| Error::parse(&display, format!("row {}: seed: {e}", lineno + 2)))?;
        let sample_rate_hz = parse_f64(8)?;
        let inception_index = fields[11]
            .parse::<usize>()
            .map_err(|e| Error::parse(&display, format!("row {}: inception: {e}", lineno + 2)))?;
        let line_params = LineParams::nominal(length_km)?;

        let mut channels: Vec<Vec<f64>> = Vec::with_capacity(6);
        for c in 0..6 {
            let start = n_meta + c * n;
            let mut ch = Vec::with_capacity(n);
            for i in 0..n {
                ch.push(parse_f64(start + i)?);
            }
            channels.push(ch);
        }
        let mut it = channels.into_iter();
        records.push(WaveformRecord {
            sample_rate_hz,
            va: it.next().unwrap(),
            vb: it.next().unwrap(),
            vc: it.next().unwrap(),
            ia: it.next().unwrap(),
            ib: it.next().unwrap(),
            ic: it.next().unwrap(),
            inception_index,
            fault,
            line: line_params,
            seed,
        });
    }
    if records.is_empty() {
        return Err(Error::parse(&display, "no records"));
    }
    Ok(records)
}

pub fn write_waveforms_bin(path: impl AsRef<Path>, records: &[WaveformRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::validation("no waveform records to write"));
    }
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(BIN_MAGIC);
    buf.extend_from_slice(&BIN_VERSION.to_le_bytes());
    buf.extend_from_slice(&(records.len() as u32).to_le_bytes());
    for r in records {
        buf.extend_from_slice(&r.line.length_km.to_le_bytes());
        buf.push(r.fault.fault_type.label());
        for v in [
            r.fault.distance_km,
            r.fault.inception_angle_deg,
            r.fault.resistance_ohm,
            r.fault.phase_diff_deg,
            r.fault.voltage_fluct_kv,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&r.seed.to_le_bytes());
        buf.extend_from_slice(&(r.inception_index as u32).to_le_bytes());
        buf.extend_from_slice(&(r.n_samples() as u32).to_le_bytes());
        for ch in r.channels() {
            for v in ch {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_waveforms_bin(path: impl AsRef<Path>) -> Result<Vec<WaveformRecord>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let buf = fs::read(path)?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        if *cursor + n > buf.len() {
            return Err(Error::parse(&display, "truncated waveform container"));
        }
        let s = &buf[*cursor..*cursor + n];
        *cursor += n;
        Ok(s)
    };
    let f64_at = |cursor: &mut usize| -> Result<f64> {
        Ok(f64::from_le_bytes(take(cursor, 8)?.try_into().unwrap()))
    };
    if take(&mut cursor, 4)? != BIN_MAGIC {
        return Err(Error::parse(&display, "bad magic; not a TLWF container"));
    }
    let version = u16::from_le_bytes(take(&mut cursor, 2)?.try_into().unwrap());
    if version != BIN_VERSION {
        return Err(Error::parse(
            &display,
            format!("unsupported TLWF version {version}"),
        ));
    }
    let count = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let length_km = f64_at(&mut cursor)?;
        let label = take(&mut cursor, 1)?[0];
        let fault_type = ClassCode::from_label(label)?;
        let distance_km = f64_at(&mut cursor)?;
        let inception_angle_deg = f64_at(&mut cursor)?;
        let resistance_ohm = f64_at(&mut cursor)?;
        let phase_diff_deg = f64_at(&mut cursor)?;
        let voltage_fluct_kv = f64_at(&mut cursor)?;
        let seed = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        let inception_index =
            u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut channels: Vec<Vec<f64>> = Vec::with_capacity(6);
        for _ in 0..6 {
            let mut ch = Vec::with_capacity(n);
            for _ in 0..n {
                ch.push(f64_at(&mut cursor)?);
            }
            channels.push(ch);
        }
        let mut it = channels.into_iter();
        records.push(WaveformRecord {
            sample_rate_hz: super::params::SAMPLE_RATE_HZ,
            va: it.next().unwrap(),
            vb: it.next().unwrap(),
            vc: it.next().unwrap(),
            ia: it.next().unwrap(),
            ib: it.next().unwrap(),
            ic: it.next().unwrap(),
            inception_index,
            fault: FaultSpec {
                fault_type,
                distance_km,
                inception_angle_deg,
                resistance_ohm,
                phase_diff_deg,
                voltage_fluct_kv,
            },
            line: LineParams::nominal(length_km)?,
            seed,
        });
    }
    if cursor != buf.len() {
        return Err(Error::parse(&display, "trailing bytes after last record"));
    }
    Ok(records)
}
