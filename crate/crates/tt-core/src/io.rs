//! Self-describing binary container for TT objects.
//!
//! Layout (all integers little-endian): magic `TTSPIN1`, kind byte (0 vector,
//! 1 operator), scalar byte (0 = complex f64), u32 site count, per-site mode
//! sizes as u32 (vectors: one per site; operators: out then in, interleaved),
//! u32 ranks r_0..r_N, then the cores in declared layout as (re, im) f64
//! pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array3, Array4};

use crate::error::TTError;
use crate::operator::TTOperator;
use crate::vector::TTVector;
use crate::C64;

const MAGIC: &[u8; 7] = b"TTSPIN1";
const KIND_VECTOR: u8 = 0;
const KIND_OPERATOR: u8 = 1;
const SCALAR_C128: u8 = 0;

fn write_u32<W: Write>(w: &mut W, v: usize) -> std::io::Result<()> {
    let v = u32::try_from(v).expect("dimension fits in u32");
    w.write_all(&v.to_le_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> Result<usize, TTError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf) as usize)
}

fn write_scalars<'a, W: Write, I: Iterator<Item = &'a C64>>(
    w: &mut W,
    it: I,
) -> std::io::Result<()> {
    for z in it {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_scalars<R: Read>(r: &mut R, count: usize) -> Result<Vec<C64>, TTError> {
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect())
}

fn read_header<R: Read>(r: &mut R, expect_kind: u8) -> Result<usize, TTError> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TTError::BadContainer("magic mismatch".into()));
    }
    let mut kind_scalar = [0u8; 2];
    r.read_exact(&mut kind_scalar)?;
    if kind_scalar[0] != expect_kind {
        return Err(TTError::BadContainer(format!(
            "kind byte {} does not match expected {}",
            kind_scalar[0], expect_kind
        )));
    }
    if kind_scalar[1] != SCALAR_C128 {
        return Err(TTError::BadContainer(format!(
            "unsupported scalar type {}",
            kind_scalar[1]
        )));
    }
    let n = read_u32(r)?;
    if n == 0 {
        return Err(TTError::BadContainer("zero site count".into()));
    }
    Ok(n)
}

impl TTVector {
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[KIND_VECTOR, SCALAR_C128])?;
        write_u32(w, self.n_sites())?;
        for m in self.mode_sizes() {
            write_u32(w, m)?;
        }
        for r in self.ranks() {
            write_u32(w, r)?;
        }
        for core in self.cores() {
            write_scalars(w, core.iter())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, TTError> {
        let n = read_header(r, KIND_VECTOR)?;
        let mut modes = Vec::with_capacity(n);
        for _ in 0..n {
            modes.push(read_u32(r)?);
        }
        let mut ranks = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            ranks.push(read_u32(r)?);
        }
        let mut cores = Vec::with_capacity(n);
        for i in 0..n {
            let count = ranks[i]
                .checked_mul(modes[i])
                .and_then(|v| v.checked_mul(ranks[i + 1]))
                .ok_or_else(|| TTError::BadContainer("core size overflow".into()))?;
            let data = read_scalars(r, count)?;
            cores.push(
                Array3::from_shape_vec((ranks[i], modes[i], ranks[i + 1]), data)
                    .map_err(|e| TTError::BadContainer(e.to_string()))?,
            );
        }
        let t = TTVector::new(cores)?;
        Ok(t)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, TTError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

impl TTOperator {
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[KIND_OPERATOR, SCALAR_C128])?;
        write_u32(w, self.n_sites())?;
        for (m, p) in self.out_modes().into_iter().zip(self.in_modes()) {
            write_u32(w, m)?;
            write_u32(w, p)?;
        }
        for r in self.ranks() {
            write_u32(w, r)?;
        }
        for core in self.cores() {
            write_scalars(w, core.iter())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, TTError> {
        let n = read_header(r, KIND_OPERATOR)?;
        let mut out_modes = Vec::with_capacity(n);
        let mut in_modes = Vec::with_capacity(n);
        for _ in 0..n {
            out_modes.push(read_u32(r)?);
            in_modes.push(read_u32(r)?);
        }
        let mut ranks = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            ranks.push(read_u32(r)?);
        }
        let mut cores = Vec::with_capacity(n);
        for i in 0..n {
            let count = ranks[i]
                .checked_mul(out_modes[i])
                .and_then(|v| v.checked_mul(in_modes[i]))
                .and_then(|v| v.checked_mul(ranks[i + 1]))
                .ok_or_else(|| TTError::BadContainer("core size overflow".into()))?;
            let data = read_scalars(r, count)?;
            cores.push(
                Array4::from_shape_vec((ranks[i], out_modes[i], in_modes[i], ranks[i + 1]), data)
                    .map_err(|e| TTError::BadContainer(e.to_string()))?,
            );
        }
        TTOperator::new(cores)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, TTError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}
