//! Bitstrings used as the side channel of compression outputs.
//!
//! Bits are stored most-significant first; fixed-width fields are big-endian
//! and every variable-length field is either Elias-gamma prefixed or has a
//! length known to the decoder.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// Appends `value` in `width` bits, big-endian.
    pub fn push_fixed(&mut self, value: usize, width: u32) {
        debug_assert!(width >= usize::BITS || value < (1usize << width));
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    /// Appends the Elias-gamma code of `n >= 1`.
    pub fn push_gamma(&mut self, n: usize) {
        assert!(n >= 1, "gamma code needs n >= 1");
        let width = usize::BITS - n.leading_zeros();
        for _ in 1..width {
            self.bits.push(false);
        }
        self.push_fixed(n, width);
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.bits, pos: 0 }
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(|bits| Self { bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self { bits: iter.into_iter().collect() }
    }
}

/// Length of the Elias-gamma code of `n`.
pub fn gamma_len(n: usize) -> usize {
    let width = (usize::BITS - n.leading_zeros()) as usize;
    2 * width - 1
}

/// Bits needed to index `n` alternatives: `ceil(log2 n)`.
pub fn index_width(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn bit(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| Error::Decode("unexpected end of bits".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn fixed(&mut self, width: u32) -> Result<usize> {
        let mut v = 0usize;
        for _ in 0..width {
            v = (v << 1) | usize::from(self.bit()?);
        }
        Ok(v)
    }

    pub fn gamma(&mut self) -> Result<usize> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
            if zeros >= usize::BITS {
                return Err(Error::Decode("gamma code too long".into()));
            }
        }
        let rest = self.fixed(zeros)?;
        Ok((1usize << zeros) | rest)
    }

    pub fn take(&mut self, n: usize) -> Result<BitString> {
        if self.pos + n > self.bits.len() {
            return Err(Error::Decode("unexpected end of bits".into()));
        }
        let out = self.bits[self.pos..self.pos + n].iter().copied().collect();
        self.pos += n;
        Ok(out)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn rest(&mut self) -> BitString {
        let n = self.remaining();
        self.take(n).expect("in range")
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(Error::Decode(format!("{} trailing bits", self.remaining())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(index_width(1), 0);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(4), 2);
        assert_eq!(index_width(5), 3);
        assert_eq!(gamma_len(1), 1);
        assert_eq!(gamma_len(4), 5);
    }

    #[test]
    fn fixed_is_big_endian() {
        let mut b = BitString::new();
        b.push_fixed(5, 4);
        assert_eq!(b.to_string(), "0101");
    }

    proptest! {
        #[test]
        fn gamma_and_fixed_roundtrip(values in proptest::collection::vec(1usize..5000, 0..20), w in 13u32..16) {
            let mut b = BitString::new();
            for &v in &values {
                b.push_gamma(v);
                b.push_fixed(v, w);
            }
            let expected: usize = values.iter().map(|&v| gamma_len(v) + w as usize).sum();
            prop_assert_eq!(b.len(), expected);
            let mut r = b.reader();
            for &v in &values {
                prop_assert_eq!(r.gamma().unwrap(), v);
                prop_assert_eq!(r.fixed(w).unwrap(), v);
            }
            prop_assert!(r.finish().is_ok());
        }
    }
}
