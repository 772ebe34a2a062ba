//! Environment dumps for reproducing a failing run. The binary layout is
//! described in `docs/FORMATS.md`.

use serde::{Deserialize, Serialize};

use super::env::EnvironmentGrid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LPPE";
const VERSION: u8 = 1;
const FLAG_BOUNDARY: u8 = 1;

/// Compact binary encoding.
pub fn encode_binary(env: &EnvironmentGrid) -> Vec<u8> {
    let (m, n) = (env.m(), env.n());
    let mut out = Vec::with_capacity(30 + (m * n).div_ceil(8) + m.div_ceil(8) + 4 * n);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.push(if env.has_boundary() { FLAG_BOUNDARY } else { 0 });
    out.extend_from_slice(&env.seed().to_le_bytes());
    out.extend_from_slice(&env.stream().to_le_bytes());
    pack_bits(env.bulk_weights(), &mut out);
    pack_bits(env.axis_row(), &mut out);
    if let Some(y) = env.boundary_y() {
        for &w in y {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<EnvironmentGrid> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = r.take(1)?[0];
    if version != VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let m = r.u32()? as usize;
    let n = r.u32()? as usize;
    let flags = r.take(1)?[0];
    if flags & !FLAG_BOUNDARY != 0 {
        return Err(Error::Decode(format!("unknown flags {flags:#04x}")));
    }
    let seed = r.u64()?;
    let stream = r.u64()?;
    let cells = m
        .checked_mul(n)
        .filter(|&c| c <= bytes.len().saturating_mul(8))
        .ok_or_else(|| Error::Decode("dimensions exceed the payload".into()))?;
    let bulk = unpack_bits(r.take(cells.div_ceil(8))?, cells);
    let axis = unpack_bits(r.take(m.div_ceil(8))?, m);
    let env = if flags & FLAG_BOUNDARY != 0 {
        let y = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        EnvironmentGrid::with_boundary(m, n, bulk, axis, y)?
    } else {
        EnvironmentGrid::iid(m, n, bulk, axis)?
    };
    if r.pos != bytes.len() {
        return Err(Error::Decode(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(env.with_provenance(seed, stream))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDump {
    m: usize,
    n: usize,
    seed: u64,
    stream: u64,
    bulk: Vec<u8>,
    axis_x: Vec<u8>,
    boundary_y: Option<Vec<u32>>,
}

pub fn encode_json(env: &EnvironmentGrid) -> String {
    let dump = JsonDump {
        m: env.m(),
        n: env.n(),
        seed: env.seed(),
        stream: env.stream(),
        bulk: env.bulk_weights().to_vec(),
        axis_x: env.axis_row().to_vec(),
        boundary_y: env.boundary_y().map(<[u32]>::to_vec),
    };
    serde_json::to_string(&dump).expect("plain data serializes")
}

/// Parses a JSON dump, applying the same validation as the constructors.
pub fn decode_json(text: &str) -> Result<EnvironmentGrid> {
    let d: JsonDump = serde_json::from_str(text).map_err(|e| Error::Decode(e.to_string()))?;
    let env = match d.boundary_y {
        Some(y) => EnvironmentGrid::with_boundary(d.m, d.n, d.bulk, d.axis_x, y)?,
        None => EnvironmentGrid::iid(d.m, d.n, d.bulk, d.axis_x)?,
    };
    Ok(env.with_provenance(d.seed, d.stream))
}

fn pack_bits(bits: &[u8], out: &mut Vec<u8>) {
    for chunk in bits.chunks(8) {
        out.push(chunk.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b << k)));
    }
}

fn unpack_bits(bytes: &[u8], len: usize) -> Vec<u8> {
    (0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect()
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Decode("unexpected end of input".into()))?;
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
}
