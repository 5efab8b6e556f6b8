//! Bit packing shared by the reductions that store, for every kept
//! inflated pair, the original sample position plus a small index.
//!
//! Layout: one flag bit telling whether some original point carries more
//! than one inflated pair; if set, a unary count `g - 1` per kept point;
//! then `width` index bits per inflated pair; then the substrate bits
//! behind an Elias-gamma length prefix (`len + 1`).

use crate::bits::{gamma_len, BitString};
use crate::error::{Error, Result};

/// The kept inflated pairs as `(original position, index)`, sorted.
pub struct Packed {
    pub kept: Vec<usize>,
    pub bits: BitString,
    pub index_bits: usize,
    pub grouped: bool,
}

pub fn pack(pairs: &[(usize, usize)], width: u32, substrate_bits: &BitString) -> Packed {
    debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
    let mut kept: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    kept.dedup();
    let grouped = kept.len() < pairs.len();
    let mut bits = BitString::new();
    bits.push(grouped);
    if grouped {
        for &i in &kept {
            let g = pairs.iter().filter(|p| p.0 == i).count();
            (1..g).for_each(|_| bits.push(true));
            bits.push(false);
        }
    }
    for &(_, j) in pairs {
        bits.push_fixed(j, width);
    }
    let index_bits = pairs.len() * width as usize;
    bits.push_gamma(substrate_bits.len() + 1);
    bits.extend(substrate_bits);
    Packed { kept, bits, index_bits, grouped }
}

/// Inverse of [`pack`]: for `kept` original pairs, returns the
/// `(kept slot, index)` list and the substrate bits.
pub fn unpack(kept: usize, width: u32, bits: &BitString) -> Result<(Vec<(usize, usize)>, BitString)> {
    let mut r = bits.reader();
    let grouped = r.bit()?;
    let mut counts = vec![1usize; kept];
    if grouped {
        for c in counts.iter_mut() {
            *c = 1;
            while r.bit()? {
                *c += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (slot, &g) in counts.iter().enumerate() {
        for _ in 0..g {
            out.push((slot, r.fixed(width)?));
        }
    }
    let len = r.gamma()? - 1;
    let sub = r.take(len)?;
    r.finish()?;
    if !grouped && out.len() != kept {
        return Err(Error::Decode("group counts disagree with kept pairs".into()));
    }
    Ok((out, sub))
}

/// Overhead the layout adds beyond `kept + width` per pair and the raw
/// substrate bits.
pub fn overhead(grouped: bool, inflated_pairs: usize, substrate_bits: usize) -> usize {
    1 + gamma_len(substrate_bits + 1) + if grouped { inflated_pairs } else { 0 }
}
