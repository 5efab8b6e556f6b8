//! Exact rational arithmetic helpers.
//!
//! Label values and grid points are `Ratio<i64>`; losses are accumulated in
//! arbitrary precision so that powers never overflow.

use num::bigint::BigInt;
pub use num::rational::BigRational;
use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Precision of certified root bounds, as a power of two.
pub const ROOT_PRECISION_BITS: u32 = 40;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Converts back to `Ratio<i64>` if both parts fit.
pub fn from_big(r: &BigRational) -> Option<Rational> {
    Some(Rational::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_big(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn pow_big(base: &BigRational, exp: u32) -> BigRational {
    num::pow::pow(base.clone(), exp as usize)
}

/// Exact integer `k`-th root of a nonnegative big integer, if it exists.
fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num::pow::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Certified bracket `[lo, hi]` around `x^(1/k)` for `x >= 0`, with
/// `lo^k <= x <= hi^k` and `hi - lo <= 2^-40`. Exact roots give `lo == hi`.
pub fn root_bounds(x: &BigRational, k: u32) -> Result<(BigRational, BigRational)> {
    if k == 0 {
        return Err(Error::InvalidParameter("root of order 0".into()));
    }
    if x.is_negative() {
        return Err(Error::InvalidParameter("root of a negative number".into()));
    }
    if k == 1 {
        return Ok((x.clone(), x.clone()));
    }
    if let (Some(n), Some(d)) = (exact_int_root(x.numer(), k), exact_int_root(x.denom(), k)) {
        let r = BigRational::new(n, d);
        return Ok((r.clone(), r));
    }
    let scale = BigInt::one() << ROOT_PRECISION_BITS;
    // floor(x * 2^(40k))^(1/k) / 2^40 is a lower bound within 2^-40.
    let scaled = (x * BigRational::from_integer(num::pow::pow(scale.clone(), k as usize))).floor();
    let lo_num = scaled.to_integer().nth_root(k);
    let lo = BigRational::new(lo_num.clone(), scale.clone());
    let hi = BigRational::new(lo_num + BigInt::one(), scale);
    debug_assert!(pow_big(&lo, k) <= *x && pow_big(&hi, k) >= *x);
    Ok((lo, hi))
}

/// Certified bracket around `x^p` for rational `p = a/b > 0`, `x in [0,1]`.
pub fn rational_power_bounds(x: &BigRational, p: &Rational) -> Result<(BigRational, BigRational)> {
    if *p <= Rational::zero() {
        return Err(Error::InvalidParameter("exponent must be positive".into()));
    }
    let a = u32::try_from(*p.numer()).map_err(|_| Error::InvalidParameter("exponent too large".into()))?;
    let b = u32::try_from(*p.denom()).map_err(|_| Error::InvalidParameter("exponent too large".into()))?;
    root_bounds(&pow_big(x, a), b)
}

/// Largest rational with denominator `2^40` (or the exact root) not above `x^(1/k)`.
pub fn root_floor(x: &Rational, k: u32) -> Result<Rational> {
    let (lo, _) = root_bounds(&to_big(x), k)?;
    from_big(&lo).ok_or_else(|| Error::InvalidParameter("root not representable".into()))
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("2").unwrap(), rat(2, 1));
        assert_eq!(fmt_rational(&rat(2, 4)), "1/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn exact_roots() {
        let (lo, hi) = root_bounds(&to_big(&rat(1, 16)), 2).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(from_big(&lo).unwrap(), rat(1, 4));
        assert_eq!(root_floor(&rat(8, 27), 3).unwrap(), rat(2, 3));
    }

    #[test]
    fn inexact_root_is_certified() {
        let x = to_big(&rat(1, 2));
        let (lo, hi) = root_bounds(&x, 2).unwrap();
        assert!(pow_big(&lo, 2) <= x);
        assert!(pow_big(&hi, 2) >= x);
        let width = &hi - &lo;
        assert!(width <= BigRational::new(BigInt::one(), BigInt::one() << 40));
    }

    #[test]
    fn fractional_power() {
        let x = to_big(&rat(1, 4));
        let (lo, hi) = rational_power_bounds(&x, &rat(3, 2)).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(from_big(&lo).unwrap(), rat(1, 8));
    }
}
