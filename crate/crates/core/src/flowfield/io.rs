//! `WPF1` field files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `WPF1` |
//! | 3×4   | `u32` nx, ny, nz |
//! | 8     | `f64` extent (m) |
//! | 8     | `f64` flow speed (m/s) |
//! | 8     | `f64` flow angle (deg) |
//! | 8     | `u64` seed |
//! | 8·N   | `f64` speeds, x fastest |
//! | N     | occupancy bytes, 0 or 1 |
//! | 4     | `u32` CRC32 (IEEE) of the speed and occupancy payload |

use std::fs;
use std::path::Path;

use super::{FlowField, GridSpec, ScenarioParams};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"WPF1";
const HEADER_LEN: usize = 4 + 12 + 32;

pub(crate) fn payload_crc(speed: &[f64], occupied: &[bool]) -> u32 {
    let mut hasher = crc32fast::Hasher::new();
    let mut buf = Vec::with_capacity(8 * 1024);
    for chunk in speed.chunks(1024) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        hasher.update(&buf);
    }
    for chunk in occupied.chunks(8 * 1024) {
        buf.clear();
        buf.extend(chunk.iter().map(|&o| o as u8));
        hasher.update(&buf);
    }
    hasher.finalize()
}

pub fn field_to_bytes(field: &FlowField) -> Vec<u8> {
    let spec = field.spec();
    let sc = field.scenario();
    let n = spec.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 9 * n + 4);
    out.extend_from_slice(&MAGIC);
    for dim in spec.dims() {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&spec.extent.to_le_bytes());
    out.extend_from_slice(&sc.flow_speed.to_le_bytes());
    out.extend_from_slice(&sc.flow_angle.to_le_bytes());
    out.extend_from_slice(&sc.seed.to_le_bytes());
    for v in field.speeds() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend(field.occupancy().iter().map(|&o| o as u8));
    out.extend_from_slice(&field.fingerprint().to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(Error::Truncated { needed: end, found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<FlowField> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic[..3] != MAGIC[..3] {
        return Err(Error::BadMagic);
    }
    if magic[3] != MAGIC[3] {
        return Err(Error::VersionMismatch { found: magic[3] as char });
    }
    let dims = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let extent = r.f64()?;
    let scenario = ScenarioParams { flow_speed: r.f64()?, flow_angle: r.f64()?, seed: r.u64()? };
    let spec = GridSpec::new(dims[0], dims[1], dims[2], extent)
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    scenario.validate().map_err(|e| Error::Format(format!("bad header: {e}")))?;

    let n = spec.len();
    let needed = HEADER_LEN + 9 * n + 4;
    if bytes.len() < needed {
        return Err(Error::Truncated { needed, found: bytes.len() });
    }
    if bytes.len() > needed {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - needed)));
    }
    let speed: Vec<f64> = r
        .take(8 * n)?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let occ_bytes = r.take(n)?;
    let stored = r.u32()?;
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&bytes[HEADER_LEN..HEADER_LEN + 9 * n]);
    let computed = hasher.finalize();
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    let occupied = occ_bytes
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Format(format!("occupancy byte {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    FlowField::from_parts(spec, speed, occupied, scenario)
}

pub fn write_field(path: impl AsRef<Path>, field: &FlowField) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, field_to_bytes(field)).map_err(Error::file(path))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::file(path))?;
    field_from_bytes(&bytes)
}
