//! Portable weight archive.
//!
//! Layout: magic `TLXD`, format version (u16 LE), entry count (u32 LE),
//! then per entry: name length (u32 LE) + UTF-8 name, rank (u32 LE),
//! dims (u32 LE each), frozen flag (u8), values as little-endian 64-bit
//! floats; finally a CRC32 (u32 LE) over everything after the version
//! field, so any corruption or truncation is rejected, never loaded
//! partially. Each parameterized layer contributes two entries: `<name>.w`
//! and `<name>.b`.

use super::network::{Layer, NetSpec, Network};
use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"TLXD";
pub const ARCHIVE_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub name: String,
    pub dims: Vec<u32>,
    pub frozen: bool,
    pub values: Vec<f64>,
}

impl ArchiveEntry {
    fn value_count(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }
}

/// Versioned serialized network parameters with per-layer freeze flags.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightArchive {
    pub version: u16,
    pub entries: Vec<ArchiveEntry>,
}

impl WeightArchive {
    pub fn from_network(net: &Network) -> Self {
        let mut entries = Vec::new();
        for layer in &net.layers {
            match layer {
                Layer::Conv(c) => {
                    entries.push(ArchiveEntry {
                        name: format!("{}.w", c.name),
                        dims: vec![c.out_ch as u32, c.in_ch as u32, c.kernel as u32, c.kernel as u32],
                        frozen: c.frozen,
                        values: c.w.clone(),
                    });
                    entries.push(ArchiveEntry {
                        name: format!("{}.b", c.name),
                        dims: vec![c.out_ch as u32],
                        frozen: c.frozen,
                        values: c.b.clone(),
                    });
                }
                Layer::Dense(d) => {
                    entries.push(ArchiveEntry {
                        name: format!("{}.w", d.name),
                        dims: vec![d.out_dim as u32, d.in_dim as u32],
                        frozen: d.frozen,
                        values: d.w.clone(),
                    });
                    entries.push(ArchiveEntry {
                        name: format!("{}.b", d.name),
                        dims: vec![d.out_dim as u32],
                        frozen: d.frozen,
                        values: d.b.clone(),
                    });
                }
                _ => {}
            }
        }
        WeightArchive {
            version: ARCHIVE_VERSION,
            entries,
        }
    }

    pub fn entry(&self, name: &str) -> Option<&ArchiveEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body: Vec<u8> = Vec::new();
        body.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            body.extend_from_slice(&(e.name.len() as u32).to_le_bytes());
            body.extend_from_slice(e.name.as_bytes());
            body.extend_from_slice(&(e.dims.len() as u32).to_le_bytes());
            for d in &e.dims {
                body.extend_from_slice(&d.to_le_bytes());
            }
            body.push(e.frozen as u8);
            for v in &e.values {
                body.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut out = Vec::with_capacity(body.len() + 10);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&crc32(&body).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = 0usize;
        let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
            if *cursor + n > bytes.len() {
                return Err(Error::archive("truncated archive"));
            }
            let s = &bytes[*cursor..*cursor + n];
            *cursor += n;
            Ok(s)
        };
        if take(&mut cursor, 4)? != MAGIC {
            return Err(Error::archive("bad magic; not a TLXD weight archive"));
        }
        let version = u16::from_le_bytes(take(&mut cursor, 2)?.try_into().unwrap());
        if version != ARCHIVE_VERSION {
            return Err(Error::archive(format!(
                "unsupported archive version {version}, expected {ARCHIVE_VERSION}"
            )));
        }
        if bytes.len() < 4 + 2 + 4 {
            return Err(Error::archive("truncated archive"));
        }
        let body = &bytes[6..bytes.len() - 4];
        let stored_crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
        let actual_crc = crc32(body);
        if stored_crc != actual_crc {
            return Err(Error::archive(format!(
                "checksum mismatch: stored {stored_crc:08x}, computed {actual_crc:08x}"
            )));
        }

        let mut cursor = 0usize;
        let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
            if *cursor + n > body.len() {
                return Err(Error::archive("truncated archive body"));
            }
            let s = &body[*cursor..*cursor + n];
            *cursor += n;
            Ok(s)
        };
        let count = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        if count > 1024 {
            return Err(Error::archive(format!("implausible entry count {count}")));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            if name_len > 256 {
                return Err(Error::archive(format!("implausible name length {name_len}")));
            }
            let name = String::from_utf8(take(&mut cursor, name_len)?.to_vec())
                .map_err(|_| Error::archive("entry name is not UTF-8"))?;
            let rank = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
            if rank > 8 {
                return Err(Error::archive(format!("implausible rank {rank}")));
            }
            let mut dims = Vec::with_capacity(rank);
            for _ in 0..rank {
                dims.push(u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()));
            }
            let frozen = match take(&mut cursor, 1)?[0] {
                0 => false,
                1 => true,
                b => return Err(Error::archive(format!("bad frozen flag {b}"))),
            };
            let n_values: usize = dims.iter().map(|&d| d as usize).product();
            let mut values = Vec::with_capacity(n_values);
            for _ in 0..n_values {
                values.push(f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()));
            }
            entries.push(ArchiveEntry {
                name,
                dims,
                frozen,
                values,
            });
        }
        if cursor != body.len() {
            return Err(Error::archive("trailing bytes after last entry"));
        }
        Ok(WeightArchive { version, entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}

impl Network {
    pub fn to_archive(&self) -> WeightArchive {
        WeightArchive::from_network(self)
    }

    /// Loads parameters from the archive into this network. With
    /// `layer_filter = None` every parameterized layer must match; with a
    /// filter only the named layers are loaded. Shapes are checked entry by
    /// entry and a mismatch reports which layers would have been accepted.
    pub fn apply_archive(
        &mut self,
        archive: &WeightArchive,
        layer_filter: Option<&[&str]>,
    ) -> Result<usize> {
        // Validate everything first so a mismatch loads nothing.
        let mut accepted: Vec<String> = Vec::new();
        let mut plan: Vec<(usize, Vec<f64>, Vec<f64>, bool)> = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            let (name, w_dims, b_dims): (String, Vec<u32>, Vec<u32>) = match layer {
                Layer::Conv(c) => (
                    c.name.clone(),
                    vec![c.out_ch as u32, c.in_ch as u32, c.kernel as u32, c.kernel as u32],
                    vec![c.out_ch as u32],
                ),
                Layer::Dense(d) => (
                    d.name.clone(),
                    vec![d.out_dim as u32, d.in_dim as u32],
                    vec![d.out_dim as u32],
                ),
                _ => continue,
            };
            if let Some(filter) = layer_filter {
                if !filter.contains(&name.as_str()) {
                    continue;
                }
            }
            let w_entry = archive
                .entry(&format!("{name}.w"))
                .ok_or_else(|| Error::archive(format!("archive has no entry {name}.w")))?;
            let b_entry = archive
                .entry(&format!("{name}.b"))
                .ok_or_else(|| Error::archive(format!("archive has no entry {name}.b")))?;
            for (entry, dims) in [(w_entry, &w_dims), (b_entry, &b_dims)] {
                if &entry.dims != dims {
                    return Err(Error::archive(format!(
                        "shape mismatch at layer {name}: archive {:?} vs network {:?} \
                         (accepted so far: [{}])",
                        entry.dims,
                        dims,
                        accepted.join(", ")
                    )));
                }
                if entry.values.len() != entry.value_count() {
                    return Err(Error::archive(format!(
                        "entry {} has {} values for dims {:?}",
                        entry.name,
                        entry.values.len(),
                        entry.dims
                    )));
                }
            }
            plan.push((li, w_entry.values.clone(), b_entry.values.clone(), w_entry.frozen));
            accepted.push(name);
        }
        let n = plan.len();
        for (li, w, b, frozen) in plan {
            match &mut self.layers[li] {
                Layer::Conv(c) => {
                    c.w = w;
                    c.b = b;
                    c.frozen = frozen;
                }
                Layer::Dense(d) => {
                    d.w = w;
                    d.b = b;
                    d.frozen = frozen;
                }
                _ => unreachable!("plan only holds parameterized layers"),
            }
        }
        Ok(n)
    }

    /// Reconstructs a network from an archive alone. The architecture is
    /// the fixed adapted LeNet-5; the head entry decides classifier vs
    /// regressor.
    pub fn from_archive(archive: &WeightArchive) -> Result<Network> {
        let head = archive
            .entry("head.w")
            .ok_or_else(|| Error::archive("archive has no head.w entry"))?;
        let spec = match head.dims.first() {
            Some(11) => NetSpec::classifier(),
            Some(1) => NetSpec::regressor(),
            other => {
                return Err(Error::archive(format!(
                    "unrecognized head dimension {other:?}; expected 11 or 1"
                )))
            }
        };
        let mut net = Network::new(&spec, 0)?;
        net.apply_archive(archive, None)?;
        Ok(net)
    }
}

/// Saves all parameters and freeze flags.
pub fn save_weights(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    net.to_archive().save(path)
}

/// Loads a network back bit-exactly.
pub fn load_weights(path: impl AsRef<Path>) -> Result<Network> {
    Network::from_archive(&WeightArchive::load(path)?)
}

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc: u32 = 0xFFFF_FFFF;
    for &byte in bytes {
        crc ^= byte as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn crc32_known_vector() {
        // Standard check value for "123456789".
        assert_eq!(crc32(b"123456789"), 0xCBF43926);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Network::new(&NetSpec::classifier(), 77).unwrap();
        let bytes = net.to_archive().to_bytes();
        let back = WeightArchive::from_bytes(&bytes).unwrap();
        let restored = Network::from_archive(&back).unwrap();
        assert_eq!(net.param_snapshot(), restored.param_snapshot());
        assert_eq!(bytes, restored.to_archive().to_bytes());
    }

    #[test]
    fn forward_outputs_identical_after_round_trip() {
        use rand::Rng;
        use rand::SeedableRng;
        let net = Network::new(&NetSpec::regressor(), 3).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.tlxd");
        save_weights(&net, &path).unwrap();
        let restored = load_weights(&path).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let frame: Vec<f64> = (0..49).map(|_| rng.random_range(0.0..1.0)).collect();
            assert_eq!(net.forward(&frame).unwrap(), restored.forward(&frame).unwrap());
        }
    }

    #[test]
    fn truncated_archive_rejected() {
        let net = Network::new(&NetSpec::classifier(), 4).unwrap();
        let bytes = net.to_archive().to_bytes();
        for cut in [bytes.len() - 1, bytes.len() - 9, 10, 5] {
            assert!(
                WeightArchive::from_bytes(&bytes[..cut]).is_err(),
                "cut at {cut} accepted"
            );
        }
    }

    #[test]
    fn corrupted_byte_rejected() {
        let net = Network::new(&NetSpec::classifier(), 4).unwrap();
        let bytes = net.to_archive().to_bytes();
        // Flip one byte at a spread of positions, skipping the magic
        // (which fails with a different error) — every flip must error.
        for pos in (6..bytes.len()).step_by(101) {
            let mut corrupt = bytes.clone();
            corrupt[pos] ^= 0x41;
            assert!(
                WeightArchive::from_bytes(&corrupt).is_err(),
                "flip at {pos} accepted"
            );
        }
    }

    #[test]
    fn classifier_archive_into_regressor_reports_head_only() {
        let classifier = Network::new(&NetSpec::classifier(), 9).unwrap();
        let archive = classifier.to_archive();
        let mut regressor = Network::new(&NetSpec::regressor(), 10).unwrap();
        // Feature extractor and fully connected trunk load fine.
        let n = regressor
            .apply_archive(&archive, Some(&["c1", "c3", "f5", "f6"]))
            .unwrap();
        assert_eq!(n, 4);
        // The head mismatches 11 vs 1 and is reported by name, with the
        // accepted layers listed.
        let err = regressor.apply_archive(&archive, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("head"), "{msg}");
        assert!(msg.contains("f6"), "accepted list missing: {msg}");
    }

    #[test]
    fn freeze_flags_survive_round_trip() {
        let mut net = Network::new(&NetSpec::classifier(), 9).unwrap();
        net.set_frozen(&["c1", "c3"], true);
        let bytes = net.to_archive().to_bytes();
        let restored = Network::from_archive(&WeightArchive::from_bytes(&bytes).unwrap()).unwrap();
        let flags: Vec<(&str, bool)> = restored
            .param_layers()
            .into_iter()
            .map(|(n, _, _, f)| (n, f))
            .collect();
        assert_eq!(
            flags,
            vec![("c1", true), ("c3", true), ("f5", false), ("f6", false), ("head", false)]
        );
    }
}
