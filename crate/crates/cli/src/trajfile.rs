//! Binary trajectory container.
//!
//! All integers and floats are little-endian.
//!
//! | offset | type        | field                          |
//! |--------|-------------|--------------------------------|
//! | 0      | `[u8; 8]`   | magic `KSTRAJ\0\0`             |
//! | 8      | `u32`       | format version (1)             |
//! | 12     | `u32`       | reserved, 0                    |
//! | 16     | `f64`       | domain length L                |
//! | 24     | `u64`       | grid points N                  |
//! | 32     | `f64`       | time step dt                   |
//! | 40     | `u64`       | save stride                    |
//! | 48     | `u64`       | seed                           |
//! | 56     | `u64`       | snapshot count S               |
//! | 64     | `u64`       | config text length C           |
//! | 72     | `[u8; C]`   | run config (UTF-8)             |
//! | 72+C   | `[f64; S]`  | save times                     |
//! | ...    | `[f64; S*N]`| snapshots, row-major by time   |
//!
//! Stripe masks use the same layout with magic `KSMASK\0\0`, no dt/stride/seed
//! fields (S and N follow the reserved word directly, then C and the config)
//! and one byte per sample (1 = inside a stripe) in place of the times and
//! snapshots.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use ks_core::{Grid64, KsError, RealField64, Trajectory64};
use thiserror::Error;

use crate::config::RunConfig;

pub const MAGIC: [u8; 8] = *b"KSTRAJ\0\0";
pub const MASK_MAGIC: [u8; 8] = *b"KSMASK\0\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrajFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a trajectory file (bad magic)")]
    BadMagic,
    #[error("unsupported trajectory format version {found} (expected {VERSION})")]
    VersionMismatch { found: u32 },
    #[error("corrupt trajectory file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Field(#[from] KsError),
}

/// Header fields plus the embedded config text.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajHeader {
    pub length: f64,
    pub points: u64,
    pub dt: f64,
    pub save_stride: u64,
    pub seed: u64,
    pub snapshots: u64,
    pub config_text: String,
}

impl TrajHeader {
    pub fn config(&self) -> anyhow::Result<RunConfig> {
        RunConfig::parse(&self.config_text)
    }
}

pub fn encode(cfg: &RunConfig, traj: &Trajectory64) -> Vec<u8> {
    let n = traj.grid().points();
    let config_text = cfg.to_text();
    let mut out = Vec::with_capacity(72 + config_text.len() + traj.len() * (n + 1) * 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&traj.grid().length().to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&cfg.dt.to_le_bytes());
    out.extend_from_slice(&(cfg.save_stride as u64).to_le_bytes());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    out.extend_from_slice(&(traj.len() as u64).to_le_bytes());
    out.extend_from_slice(&(config_text.len() as u64).to_le_bytes());
    out.extend_from_slice(config_text.as_bytes());
    for t in traj.times() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for s in traj.snapshots() {
        for v in s.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// `mask[s][j]` for snapshot `s`, point `j`.
pub fn encode_mask(cfg: &RunConfig, mask: &[Vec<bool>]) -> Vec<u8> {
    let n = mask.first().map_or(0, |r| r.len());
    let config_text = cfg.to_text();
    let mut out = Vec::with_capacity(40 + config_text.len() + mask.len() * n);
    out.extend_from_slice(&MASK_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&(mask.len() as u64).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(config_text.len() as u64).to_le_bytes());
    out.extend_from_slice(config_text.as_bytes());
    for row in mask {
        assert_eq!(row.len(), n, "ragged mask");
        out.extend(row.iter().map(|&b| b as u8));
    }
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<(String, Vec<Vec<bool>>), TrajFileError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MASK_MAGIC {
        return Err(TrajFileError::BadMagic);
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(TrajFileError::VersionMismatch { found: version });
    }
    c.u32()?;
    let s = c.u64()? as usize;
    let n = c.u64()? as usize;
    let config_len = c.u64()? as usize;
    let config_text = std::str::from_utf8(c.take(config_len)?)
        .map_err(|e| TrajFileError::Corrupt(format!("config text: {e}")))?
        .to_owned();
    if s.checked_mul(n) != Some(bytes.len() - c.pos) {
        return Err(TrajFileError::Corrupt("mask size".into()));
    }
    let mask = (0..s)
        .map(|_| c.take(n).map(|r| r.iter().map(|&b| b != 0).collect()))
        .collect::<Result<_, _>>()?;
    Ok((config_text, mask))
}

pub fn write(path: &Path, cfg: &RunConfig, traj: &Trajectory64) -> Result<(), TrajFileError> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(&encode(cfg, traj))?;
    f.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TrajFileError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| TrajFileError::Corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, TrajFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, TrajFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, TrajFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn read_header(c: &mut Cursor<'_>) -> Result<TrajHeader, TrajFileError> {
    if c.take(8)? != MAGIC {
        return Err(TrajFileError::BadMagic);
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(TrajFileError::VersionMismatch { found: version });
    }
    c.u32()?;
    let length = c.f64()?;
    let points = c.u64()?;
    let dt = c.f64()?;
    let save_stride = c.u64()?;
    let seed = c.u64()?;
    let snapshots = c.u64()?;
    let config_len = c.u64()? as usize;
    let config_text = std::str::from_utf8(c.take(config_len)?)
        .map_err(|e| TrajFileError::Corrupt(format!("config text: {e}")))?
        .to_owned();
    Ok(TrajHeader {
        length,
        points,
        dt,
        save_stride,
        seed,
        snapshots,
        config_text,
    })
}

pub fn decode(bytes: &[u8]) -> Result<(TrajHeader, Trajectory64), TrajFileError> {
    let mut c = Cursor { bytes, pos: 0 };
    let header = read_header(&mut c)?;
    let n = usize::try_from(header.points).map_err(|_| TrajFileError::Corrupt("N".into()))?;
    let s = usize::try_from(header.snapshots).map_err(|_| TrajFileError::Corrupt("S".into()))?;
    let expected = s
        .checked_mul(n + 1)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| TrajFileError::Corrupt("size overflow".into()))?;
    if bytes.len() - c.pos != expected {
        return Err(TrajFileError::Corrupt(format!(
            "expected {expected} payload bytes, found {}",
            bytes.len() - c.pos
        )));
    }
    let grid = Grid64::new(header.length, n)?;
    let times = (0..s).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
    let mut snapshots = Vec::with_capacity(s);
    for _ in 0..s {
        let values = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
        snapshots.push(RealField64::new(grid.clone(), values)?);
    }
    let traj = Trajectory64::new(grid, times, snapshots)?;
    Ok((header, traj))
}

pub fn read(path: &Path) -> Result<(TrajHeader, Trajectory64), TrajFileError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
