//! Binary snapshot files.
//!
//! Layout (all little-endian): the 5-byte magic `YLAB1`, `N` as `u64`,
//! `L` as `f64`, field count as `u64`, time `t` as `f64`, then for every
//! field `N * N` real-space samples as `f64` in row-major order (rows
//! along `x2`).

use std::io::{Read, Write};
use std::path::Path;

use super::{Grid2D, RealField, SpectralField};
use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 5] = b"YLAB1";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: Grid2D,
    pub t: f64,
    pub fields: Vec<RealField>,
}

impl Snapshot {
    pub fn from_spectral(t: f64, fields: &[&SpectralField]) -> Result<Self> {
        let grid = fields
            .first()
            .ok_or_else(|| LabError::Format("snapshot needs at least one field".into()))?
            .grid()
            .clone();
        for f in fields {
            grid.check_same(f.grid())?;
        }
        Ok(Snapshot {
            grid,
            t,
            fields: fields.iter().map(|f| f.to_real()).collect(),
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        w.write_all(&self.grid.l().to_le_bytes())?;
        w.write_all(&(self.fields.len() as u64).to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.grid.len() * 8);
        for f in &self.fields {
            buf.clear();
            for v in f.values() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)
            .map_err(|_| LabError::Format("file too short for header".into()))?;
        if &magic != MAGIC {
            return Err(LabError::Format("bad magic, expected YLAB1".into()));
        }
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)
                .map_err(|_| LabError::Format("truncated header".into()))?;
            Ok(b8)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let l = f64::from_le_bytes(next(&mut r)?);
        let count = u64::from_le_bytes(next(&mut r)?) as usize;
        let t = f64::from_le_bytes(next(&mut r)?);
        if n > 1 << 16 || count > 1 << 10 {
            return Err(LabError::Format(format!(
                "implausible header N={n} count={count}"
            )));
        }
        let grid = Grid2D::new(n, l).map_err(|e| LabError::Format(e.to_string()))?;
        let mut fields = Vec::with_capacity(count);
        let mut raw = vec![0u8; n * n * 8];
        for _ in 0..count {
            r.read_exact(&mut raw)
                .map_err(|_| LabError::Format("truncated field data".into()))?;
            let vals = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            fields.push(RealField::from_values(&grid, vals));
        }
        Ok(Snapshot { grid, t, fields })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
