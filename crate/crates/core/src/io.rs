//! Binary field container with a JSON metadata sidecar.
//!
//! Layout: magic `DVF1`, then little-endian u32 d, u32 n, f64 ℓ, u32 N,
//! u8 offset flag, followed by N·n^d complex values as interleaved f64 re/im
//! (component-major, nodes in row-major order).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec, SpinorField};
use crate::scalar::{cplx, Real};

const MAGIC: &[u8; 4] = b"DVF1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub ncomp: usize,
    pub l2_norm: f64,
}

pub fn encode_field<T: Real>(f: &SpinorField<T>) -> Vec<u8> {
    let spec = f.grid().spec();
    let mut out = Vec::with_capacity(25 + 16 * f.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(spec.d as u32).to_le_bytes());
    out.extend_from_slice(&(spec.n as u32).to_le_bytes());
    out.extend_from_slice(&spec.half_length.to_le_bytes());
    out.extend_from_slice(&(f.ncomp() as u32).to_le_bytes());
    out.push(spec.origin_offset as u8);
    for z in f.data() {
        out.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
        out.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
    }
    out
}

pub fn decode_field<T: Real>(bytes: &[u8]) -> Result<SpinorField<T>> {
    let bad = |m: &str| Error::Format(m.to_string());
    if bytes.len() < 25 || &bytes[..4] != MAGIC {
        return Err(bad("missing header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (d, n, l, ncomp) = (u32_at(4), u32_at(8), f64_at(12), u32_at(20));
    let offset = match bytes[24] {
        0 => false,
        1 => true,
        _ => return Err(bad("offset flag must be 0 or 1")),
    };
    let spec = GridSpec { d, n, half_length: l, origin_offset: offset };
    spec.validate()?;
    if ncomp == 0 {
        return Err(bad("zero components"));
    }
    let count = ncomp.checked_mul(spec.npts()).ok_or_else(|| bad("size overflow"))?;
    let payload = &bytes[25..];
    if payload.len() != 16 * count {
        return Err(bad(&format!("payload has {} bytes, expected {}", payload.len(), 16 * count)));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            cplx(T::lit(re), T::lit(im))
        })
        .collect();
    let grid = Grid::new(spec)?;
    SpinorField::from_data(&grid, ncomp, data)
}

pub fn metadata<T: Real>(f: &SpinorField<T>) -> FieldMeta {
    FieldMeta { schema_version: 1, grid: f.grid().spec().clone(), ncomp: f.ncomp(), l2_norm: f.l2_norm().to_f64_lossy() }
}

/// Writes `path` and `path.json`.
pub fn write_field<T: Real>(path: &Path, f: &SpinorField<T>) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_field(f))?;
    let meta = serde_json::to_string_pretty(&metadata(f))?;
    std::fs::write(sidecar(path), meta)?;
    Ok(())
}

pub fn read_field<T: Real>(path: &Path) -> Result<SpinorField<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

pub fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
