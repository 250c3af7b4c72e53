//! On-disk filter format, all integers little-endian:
//!
//! ```text
//! "ABF1" | version u8 = 1 | m u64 | k u32 | seed u64 | counter_max u32 | n_stored u64 | m x counter u32
//! ```

use crate::error::{Error, Result};

use super::{CountingFilter, FilterParams};

pub const MAGIC: &[u8; 4] = b"ABF1";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 4 + 8 + 4 + 8;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes =
            self.buf.get(self.pos..end).ok_or_else(|| Error::Format(format!("truncated while reading {what}")))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.take::<8>(what).map(u64::from_le_bytes)
    }
}

impl CountingFilter {
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * p.m());
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(p.m() as u64).to_le_bytes());
        out.extend_from_slice(&(p.k() as u32).to_le_bytes());
        out.extend_from_slice(&p.seed().to_le_bytes());
        out.extend_from_slice(&p.counter_max().to_le_bytes());
        out.extend_from_slice(&self.n_stored.to_le_bytes());
        for c in &self.counters {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if &r.take::<4>("magic")? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let [version] = r.take::<1>("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let m = r.u64("m")?;
        let k = r.u32("k")?;
        let seed = r.u64("seed")?;
        let counter_max = r.u32("counter_max")?;
        let n_stored = r.u64("n_stored")?;

        let m = usize::try_from(m).map_err(|_| Error::Format(format!("m = {m} too large")))?;
        let expected = m
            .checked_mul(4)
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Format(format!("m = {m} too large")))?;
        if buf.len() != expected {
            return Err(Error::Format(format!("expected {expected} bytes, found {}", buf.len())));
        }
        let params = FilterParams::with_counter_max(m, k as usize, seed, counter_max)
            .map_err(|e| Error::Format(e.to_string()))?;

        let mut counters = Vec::with_capacity(m);
        let mut sum = 0u128;
        for _ in 0..m {
            let c = r.u32("counter")?;
            if c > counter_max {
                return Err(Error::Format(format!("counter {c} exceeds counter_max {counter_max}")));
            }
            sum += c as u128;
            counters.push(c);
        }
        if sum != k as u128 * n_stored as u128 {
            return Err(Error::Format(format!("counter sum {sum} inconsistent with k = {k}, n_stored = {n_stored}")));
        }
        Ok(CountingFilter { params, counters, n_stored })
    }
}
