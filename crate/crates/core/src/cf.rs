//! Exact continued-fraction algebra.
//!
//! For `x = [a_1, a_2, ...] = 1/(a_1 + 1/(a_2 + ...))` the convergents obey
//! `p_n = a_n p_{n-1} + p_{n-2}`, `q_n = a_n q_{n-1} + q_{n-2}` seeded with
//! `p_{-1} = 1, p_0 = 0, q_{-1} = 0, q_0 = 1`. The rank-n cylinder of a word
//! is the open interval between `p_n/q_n` and `(p_n + p_{n-1})/(q_n + q_{n-1})`
//! and has length `1/(q_n (q_n + q_{n-1}))`.
//!
//! Everything here is exact; floating point only appears in the `ln_*`
//! helpers used by estimators downstream.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite sequence of partial quotients, every digit `>= 1`.
///
/// The empty word is allowed and stands for the whole unit interval.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<BigUint>);

impl Word {
    pub fn new(digits: Vec<BigUint>) -> Result<Self> {
        if let Some(i) = digits.iter().position(|d| d.is_zero()) {
            return Err(Error::InvalidInput(format!("digit at index {} is 0; digits must be >= 1", i + 1)));
        }
        Ok(Word(digits))
    }

    pub fn from_u64s<I: IntoIterator<Item = u64>>(digits: I) -> Result<Self> {
        Self::new(digits.into_iter().map(BigUint::from).collect())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<BigUint> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Digit at 1-based position `i`.
    pub fn get(&self, i: usize) -> Option<&BigUint> {
        i.checked_sub(1).and_then(|k| self.0.get(k))
    }

    pub fn push(&mut self, digit: BigUint) -> Result<()> {
        if digit.is_zero() {
            return Err(Error::InvalidInput("digit 0 cannot be appended".into()));
        }
        self.0.push(digit);
        Ok(())
    }

    /// `w·a`
    pub fn child(&self, digit: u64) -> Result<Word> {
        let mut w = self.clone();
        w.push(BigUint::from(digit))?;
        Ok(w)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The last two continuants `(q_n, q_{n-1})`.
    pub fn continuants(&self) -> (BigUint, BigUint) {
        let mut q = BigUint::one();
        let mut q_prev = BigUint::zero();
        for a in &self.0 {
            let next = a * &q + &q_prev;
            q_prev = std::mem::replace(&mut q, next);
        }
        (q, q_prev)
    }

    /// `q_n` of the word.
    pub fn q(&self) -> BigUint {
        self.continuants().0
    }

    /// The finite continued fraction `p_n / q_n` (0 for the empty word).
    pub fn evaluate(&self) -> BigRational {
        let (p, _, q, _) = self.recurrence();
        BigRational::new(p.into(), q.into())
    }

    fn recurrence(&self) -> (BigUint, BigUint, BigUint, BigUint) {
        let (mut p, mut p_prev) = (BigUint::zero(), BigUint::one());
        let (mut q, mut q_prev) = (BigUint::one(), BigUint::zero());
        for a in &self.0 {
            let np = a * &p + &p_prev;
            let nq = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, np);
            q_prev = std::mem::replace(&mut q, nq);
        }
        (p, p_prev, q, q_prev)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

// Digits may exceed native widths, so words travel as arrays of decimal strings.
impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|d| d.to_str_radix(10)))
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Digit {
            Int(u64),
            Str(String),
        }
        let raw = Vec::<Digit>::deserialize(d)?;
        let mut digits = Vec::with_capacity(raw.len());
        for r in raw {
            let v = match r {
                Digit::Int(v) => BigUint::from(v),
                Digit::Str(s) => s
                    .parse::<BigUint>()
                    .map_err(|e| serde::de::Error::custom(format!("bad digit {s:?}: {e}")))?,
            };
            digits.push(v);
        }
        Word::new(digits).map_err(serde::de::Error::custom)
    }
}

/// `(p_k, q_k)` from the three-term recursion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentPair {
    pub p: BigUint,
    pub q: BigUint,
}

impl ConvergentPair {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone().into(), self.q.clone().into())
    }
}

/// A rank-n basic interval with exact endpoints, ordered `left < right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: Word,
    pub left: BigRational,
    pub right: BigRational,
    pub length: BigRational,
    /// `q_n` and `q_{n-1}` of the word, kept for the length formula.
    pub q: BigUint,
    pub q_prev: BigUint,
}

impl Cylinder {
    /// `1/(q_n (q_n + q_{n-1}))`, computed from the continuants alone.
    pub fn length_from_continuants(&self) -> BigRational {
        let den = &self.q * (&self.q + &self.q_prev);
        BigRational::new(1.into(), den.into())
    }

    pub fn contains(&self, other: &Cylinder) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    /// Natural log of the length.
    pub fn ln_length(&self) -> f64 {
        ln_rational(&self.length)
    }
}

/// Running sums `s_n` and running maxima `T_n` of a word's digits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DigitStats {
    pub s: Vec<BigUint>,
    pub t_max: Vec<BigUint>,
}

fn check_unit_open(x: &BigRational) -> Result<()> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::InvalidInput(format!("x = {x} is not in the open interval (0, 1)")));
    }
    Ok(())
}

/// Greedy expansion of a rational in `(0, 1)`, stopping at `max_len` digits or
/// at exact termination (the last digit of a terminated expansion is never
/// renormalized, so `[..., a]` is returned rather than `[..., a-1, 1]`).
pub fn expand(x: &BigRational, max_len: usize) -> Result<Word> {
    check_unit_open(x)?;
    let mut num = x.numer().magnitude().clone();
    let mut den = x.denom().magnitude().clone();
    let mut digits = Vec::new();
    while digits.len() < max_len && !num.is_zero() {
        // 1/x = den/num
        let (a, r) = den.div_rem(&num);
        digits.push(a);
        den = num;
        num = r;
    }
    Ok(Word(digits))
}

/// One step of the Gauss map, `{1/x}`.
pub fn gauss_step(x: &BigRational) -> Result<BigRational> {
    check_unit_open(x)?;
    let inv = x.recip();
    Ok(inv.fract())
}

/// Convergents `(p_k, q_k)` for `k = 1..=n`.
pub fn convergents(w: &Word) -> Result<Vec<ConvergentPair>> {
    if w.is_empty() {
        return Err(Error::InvalidInput("convergents of the empty word".into()));
    }
    let (mut p, mut p_prev) = (BigUint::zero(), BigUint::one());
    let (mut q, mut q_prev) = (BigUint::one(), BigUint::zero());
    let mut out = Vec::with_capacity(w.len());
    for a in w.digits() {
        let np = a * &p + &p_prev;
        let nq = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        out.push(ConvergentPair { p: p.clone(), q: q.clone() });
    }
    Ok(out)
}

/// The cylinder `I_n(w)`. The empty word gives `(0, 1)`.
pub fn cylinder(w: &Word) -> Cylinder {
    let (p, p_prev, q, q_prev) = w.recurrence();
    let a = BigRational::new(p.clone().into(), q.clone().into());
    let b = BigRational::new((&p + &p_prev).into(), (&q + &q_prev).into());
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let length = &right - &left;
    Cylinder { word: w.clone(), left, right, length, q, q_prev }
}

pub fn digit_stats(w: &Word) -> DigitStats {
    let mut s = Vec::with_capacity(w.len());
    let mut t_max: Vec<BigUint> = Vec::with_capacity(w.len());
    let mut sum = BigUint::zero();
    for a in w.digits() {
        sum += a;
        s.push(sum.clone());
        let m = match t_max.last() {
            Some(prev) if prev >= a => prev.clone(),
            _ => a.clone(),
        };
        t_max.push(m);
    }
    DigitStats { s, t_max }
}

/// Natural log of a positive big integer, accurate to f64 precision for any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

/// Odometer over all words of a fixed length with digits in `1..=max_digit`,
/// in lexicographic order. Digits are small, so plain `u32` is used.
#[derive(Clone, Debug)]
pub struct Words {
    current: Vec<u32>,
    max_digit: u32,
    done: bool,
}

impl Words {
    pub fn new(len: usize, max_digit: u32) -> Self {
        Words { current: vec![1; len], max_digit, done: max_digit == 0 }
    }
}

impl Iterator for Words {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = self.current.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.max_digit {
                self.current[i] += 1;
                break;
            }
            self.current[i] = 1;
        }
        Some(out)
    }
}

impl From<&[u32]> for Word {
    fn from(d: &[u32]) -> Self {
        // u32 digits from `Words` are always >= 1
        Word(d.iter().map(|&a| BigUint::from(a.max(1))).collect())
    }
}
