//! Binary format for [`Mps`] and [`Mpo`].
//!
//! All integers and floats are little-endian:
//!
//! | offset        | size        | field                                    |
//! |---------------|-------------|------------------------------------------|
//! | 0             | 4           | magic `b"QTNC"`                          |
//! | 4             | 2           | format version, `u16`, currently 1       |
//! | 6             | 1           | kind, `0` = MPS, `1` = MPO               |
//! | 7             | 1           | reserved, 0                              |
//! | 8             | 4           | `n`, `u32`                               |
//! | 12            | 4 (n + 1)   | bond dimensions `D_0..D_n`, `u32` each   |
//! | 16 + 4n       | ...         | site payloads, site 0 first              |
//!
//! Site `i` holds `D_i * d * D_(i+1)` complex entries in row-major
//! `(left, phys, right)` order with `d = 2` for an MPS and `d = 4` for an MPO,
//! whose physical index is `out * 2 + in`. Each entry is two `f64`s, real part
//! first. Canonical-form flags are not stored.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array3;

use super::chain::Chain;
use super::mpo::Mpo;
use super::mps::Mps;
use super::TensorChain;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const MAGIC: [u8; 4] = *b"QTNC";
pub const VERSION: u16 = 1;

const KIND_MPS: u8 = 0;
const KIND_MPO: u8 = 1;

fn write_chain<W: Write>(chain: &Chain, kind: u8, mut w: W) -> Result<()> {
    let dims = chain.bond_dims();
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind, 0])?;
    w.write_all(&(chain.len() as u32).to_le_bytes())?;
    for d in dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for t in chain.tensors() {
        for z in t.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_chain<R: Read>(mut r: R, expect_kind: u8) -> Result<Chain> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    if head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    if head[6] != expect_kind {
        return Err(Error::Format(format!(
            "kind byte {} does not match the requested type",
            head[6]
        )));
    }
    let n = read_u32(&mut r)? as usize;
    if n == 0 {
        return Err(Error::Format("zero sites".into()));
    }
    let dims = (0..=n)
        .map(|_| read_u32(&mut r).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let phys = if expect_kind == KIND_MPS { 2 } else { 4 };
    let mut tensors = Vec::with_capacity(n);
    let mut buf = [0u8; 16];
    for i in 0..n {
        let count = dims[i]
            .checked_mul(phys)
            .and_then(|x| x.checked_mul(dims[i + 1]))
            .ok_or_else(|| Error::Format("tensor size overflows".into()))?;
        let mut data = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            data.push(C64::new(re, im));
        }
        tensors.push(
            Array3::from_shape_vec((dims[i], phys, dims[i + 1]), data).expect("count matches"),
        );
    }
    Chain::new(tensors, phys).map_err(|e| Error::Format(e.to_string()))
}

impl Mps {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        write_chain(self.chain(), KIND_MPS, w)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        Ok(Mps::wrap(read_chain(r, KIND_MPS)?))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl Mpo {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        write_chain(self.chain(), KIND_MPO, w)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        Ok(Mpo::wrap(read_chain(r, KIND_MPO)?))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
