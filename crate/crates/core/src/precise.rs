//! Multi-precision helpers on top of `astro-float`.
//!
//! Used where f64 is not enough: log-space comparisons of exact cylinder
//! lengths (at 100 decimal digits) and exact floors of huge exponentials
//! for pinned construction digits.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Gate, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// A working precision plus the constant cache astro-float needs.
pub struct Precision {
    bits: usize,
    cc: Consts,
}

impl std::fmt::Debug for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Precision").field("bits", &self.bits).finish()
    }
}

impl Precision {
    /// Precision good for `digits` decimal digits (plus guard bits).
    pub fn decimal_digits(digits: usize) -> Self {
        Self::bits(digits * 3322 / 1000 + 32)
    }

    pub fn bits(bits: usize) -> Self {
        let bits = bits.max(128).div_ceil(64) * 64;
        Precision { bits, cc: Consts::new().expect("astro-float constant cache") }
    }

    pub fn precision_bits(&self) -> usize {
        self.bits
    }

    pub fn f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    pub fn biguint(&self, x: &BigUint) -> BigFloat {
        if x.is_zero() {
            return BigFloat::from_f64(0.0, self.bits);
        }
        let words = x.to_u64_digits();
        let e = (words.len() * 64) as i32;
        let v = BigFloat::from_words(&words, Sign::Pos, e);
        // round to the working precision
        v.add(&BigFloat::from_f64(0.0, self.bits), self.bits, RM)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.bits, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(self.bits, RM, &mut self.cc)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn ln_biguint(&mut self, x: &BigUint) -> BigFloat {
        let v = self.biguint(x);
        self.ln(&v)
    }

    /// `ln(x)` for a positive rational, as `ln(numer) - ln(denom)`.
    pub fn ln_rational(&mut self, x: &BigRational) -> BigFloat {
        let n = self.ln_biguint(x.numer().magnitude());
        let d = self.ln_biguint(x.denom().magnitude());
        self.sub(&n, &d)
    }
}

/// Nearest f64 of a finite BigFloat (NaN for NaN, signed infinity on overflow).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((m, _, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    if m.iter().all(|w| *w == 0) {
        return 0.0;
    }
    // value = 0.m * 2^e; the most significant word is last
    let top = *m.last().unwrap() as f64;
    let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
    let frac = (top + next / 18_446_744_073_709_551_616.0) / 18_446_744_073_709_551_616.0;
    let v = frac * 2f64.powi(e.clamp(-1100, 1100));
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// `floor(x)` as a big integer, for finite non-negative `x`.
pub fn floor_to_biguint(x: &BigFloat) -> Option<BigUint> {
    if x.is_nan() || x.is_inf() || x.is_negative() {
        return None;
    }
    let (m, _, _, e, _) = x.as_raw_parts()?;
    if e <= 0 {
        return Some(BigUint::zero());
    }
    let mut mant = BigUint::zero();
    for w in m.iter().rev() {
        mant = (mant << 64u32) + BigUint::from(*w);
    }
    let total = (m.len() * 64) as i64;
    let shift = total - e as i64;
    Some(if shift >= 0 { mant >> shift as u64 } else { mant << (-shift) as u64 })
}

/// Bits needed to represent `e^x` (x in natural-log units), rounded up.
pub fn bits_of_exp(x: f64) -> f64 {
    (x / std::f64::consts::LN_2).max(0.0) + 1.0
}

/// `floor(e^{x} - e^{y})` clamped below at 1, where `x`, `y` are supplied as
/// closures producing their high-precision values (so irrational exponents
/// such as `n^beta` are evaluated at the working precision too).
///
/// `approx_x` is an f64 estimate of `x` used for the budget gate.
pub fn floor_exp_diff(
    approx_x: f64,
    max_bits: u64,
    what: &str,
    value: impl FnOnce(&mut Precision) -> BigFloat,
) -> Result<BigUint> {
    let need = bits_of_exp(approx_x);
    if !need.is_finite() || need > max_bits as f64 {
        return Err(Error::refuse(
            Gate::DigitBudget,
            format!("{what} needs about {need:.0} bits (budget {max_bits})"),
        ));
    }
    let mut p = Precision::bits(need as usize + 96);
    let v = value(&mut p);
    let f = floor_to_biguint(&v).unwrap_or_default();
    Ok(if f.is_zero() { BigUint::from(1u32) } else { f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn biguint_round_trip_through_floor() {
        let p = Precision::bits(512);
        let x = BigUint::from(3u32).pow(200);
        let v = p.biguint(&x);
        assert_eq!(floor_to_biguint(&v).unwrap(), x);
        assert_eq!(floor_to_biguint(&p.f64(7.9)).unwrap().to_u64(), Some(7));
        assert_eq!(floor_to_biguint(&p.f64(0.25)).unwrap().to_u64(), Some(0));
    }

    #[test]
    fn ln_agrees_with_f64() {
        let mut p = Precision::decimal_digits(100);
        let v = p.ln_biguint(&BigUint::from(10u32));
        assert!((to_f64(&v) - std::f64::consts::LN_10).abs() < 1e-15);
        let r = BigRational::new(1.into(), 714.into());
        let v = p.ln_rational(&r);
        assert!((to_f64(&v) + 714f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn floor_of_exponential_differences() {
        // floor(e^2 - e) = 4, floor(e^3 - e^2) = 12
        let f = |a: f64, b: f64| {
            floor_exp_diff(a, 1 << 20, "test", |p| {
                let ea = p.exp(&p.f64(a));
                let eb = p.exp(&p.f64(b));
                p.sub(&ea, &eb)
            })
            .unwrap()
            .to_u64()
            .unwrap()
        };
        assert_eq!(f(2.0, 1.0), 4);
        assert_eq!(f(3.0, 2.0), 12);
        // below 1 clamps to 1
        assert_eq!(f(0.1, 0.0), 1);
    }

    #[test]
    fn digit_budget_refuses() {
        let err = floor_exp_diff(1e6, 1024, "a_k", |p| p.f64(0.0)).unwrap_err();
        assert!(err.is_refusal());
    }
}
