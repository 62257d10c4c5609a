//! Binary serialization helpers: little-endian double arrays and a stable
//! 64-bit content hash (FNV-1a) used to key grids, basis caches and output
//! provenance fields.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::Real;

/// FNV-1a, 64-bit.  Stable across platforms and releases, unlike the
/// std hasher; not cryptographic, used only as a content fingerprint.
#[derive(Debug, Clone)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
    }

    pub fn update_f64(&mut self, x: f64) {
        self.update(&x.to_le_bytes());
    }

    pub fn update_u64(&mut self, x: u64) {
        self.update(&x.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Hash of an arbitrary byte string, convenience wrapper.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::new();
    h.update(bytes);
    h.finish()
}

/// Write a scalar slice as little-endian f64.
pub fn write_f64s<T: Real, W: Write>(w: &mut W, xs: &[T]) -> Result<()> {
    for &x in xs {
        w.write_all(&x.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

/// Read `n` little-endian f64 values into the scalar type.
pub fn read_f64s<T: Real, R: Read>(r: &mut R, n: usize) -> Result<Vec<T>> {
    let mut buf = [0u8; 8];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let v = f64::from_le_bytes(buf);
        out.push(T::from_f64(v).ok_or_else(|| {
            Error::Format(format!("value {v} not representable in target scalar"))
        })?);
    }
    Ok(out)
}

pub fn write_u64<W: Write>(w: &mut W, x: u64) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
