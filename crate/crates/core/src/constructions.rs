//! Explicit words: pinned-digit constructions, greedy growth tracking, and
//! the perturbation and deletion maps.
//!
//! Formula digits are floored and clamped below at 1. Huge pinned digits are
//! evaluated with enough precision for an exact floor, after a size check in
//! log space.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cf::Word;
use crate::error::{Error, Gate, Result};
use crate::growth::GrowthSequence;
use crate::precise::{floor_exp_diff, floor_to_biguint, Precision};

/// Default size limit for a single pinned digit, in bits.
pub const DEFAULT_MAX_DIGIT_BITS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructionKind {
    /// `a_{k^N} = floor(e^{(k^N)^beta} - e^{((k-1)^N)^beta})` for `k >= 2`, other digits in `1..=M`.
    HM {
        #[serde(rename = "M")]
        max_digit: u32,
        beta: f64,
        #[serde(rename = "N")]
        n_exp: u32,
    },
    /// `a_{l^2} = floor(4 alpha l ln l)` for `l >= 2`, other digits in `1..=M`.
    EMAlpha {
        #[serde(rename = "M")]
        max_digit: u32,
        alpha: f64,
    },
    /// Greedy digits with `s_n` following `phi(n)`.
    Tracking {
        seq: GrowthSequence,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
    /// A word over `1..=M` passed through [`perturb`].
    Perturbed {
        #[serde(rename = "M")]
        max_digit: u32,
    },
    /// `a_n = floor(c^{b^n})` at every index.
    EBc { b: f64, c: f64 },
}

/// How free digits are filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FreePolicy {
    #[default]
    AllOnes,
    RandomUniform { seed: u64 },
    /// Mixed-radix index over the free slots, first slot least significant.
    Enumerate { index: u64 },
}

/// JSON form: `{"kind": .., "params": {..}, "policy": {..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub policy: FreePolicy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default)]
    policy: FreePolicy,
}

impl TryFrom<RawSpec> for ConstructionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let params = if raw.params.is_null() { serde_json::json!({}) } else { raw.params };
        let kind: ConstructionKind = serde_json::from_value(serde_json::json!({ "kind": raw.kind, "params": params }))
            .map_err(|e| Error::InvalidInput(format!("construction: {e}")))?;
        kind.validate()?;
        Ok(ConstructionSpec { kind, policy: raw.policy })
    }
}

impl From<ConstructionSpec> for RawSpec {
    fn from(s: ConstructionSpec) -> Self {
        let v = serde_json::to_value(&s.kind).expect("kind serializes");
        RawSpec {
            kind: v["kind"].as_str().unwrap_or_default().to_string(),
            params: v.get("params").cloned().unwrap_or(serde_json::Value::Null),
            policy: s.policy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pinned {
    pub index: usize,
    #[serde(with = "decimal")]
    pub digit: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeSlot {
    pub index: usize,
    pub lo: u64,
    pub hi: u64,
}

/// A word with its forced and free positions (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinnedWord {
    pub word: Word,
    pub pinned: Vec<Pinned>,
    pub free: Vec<FreeSlot>,
    /// Set by tracking constructions whose digits were truncated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub capped: bool,
}

impl PinnedWord {
    pub fn is_pinned(&self, index: usize) -> bool {
        self.pinned.iter().any(|p| p.index == index)
    }
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_m(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::param("M", "must be >= 1"));
    }
    Ok(())
}

impl ConstructionKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstructionKind::HM { max_digit, beta, n_exp } => {
                check_m(*max_digit)?;
                if !(0.0..1.0).contains(beta) {
                    return Err(Error::param("beta", format!("must lie in [0, 1), got {beta}")));
                }
                if *n_exp < 1 {
                    return Err(Error::param("N", "must be an integer >= 1"));
                }
            }
            ConstructionKind::EMAlpha { max_digit, alpha } => {
                check_m(*max_digit)?;
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::param("alpha", format!("must be a finite number > 0, got {alpha}")));
                }
            }
            ConstructionKind::Tracking { cap, .. } => {
                if *cap == Some(0) {
                    return Err(Error::param("cap", "must be >= 1"));
                }
            }
            ConstructionKind::Perturbed { max_digit } => check_m(*max_digit)?,
            ConstructionKind::EBc { b, c } => {
                for (name, v) in [("b", *b), ("c", *c)] {
                    if !(v.is_finite() && v > 1.0) {
                        return Err(Error::param(name, format!("must be > 1, got {v}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `#{k >= 1 : k^N <= n}`, counting the unpinned slot `k = 1`.
pub fn t_defined(n: u64, n_exp: u32) -> u64 {
    if n == 0 {
        0
    } else {
        n.nth_root(n_exp)
    }
}

/// Pinned positions `k^N <= n` with `k >= 2`.
pub fn pinned_count(n: u64, n_exp: u32) -> u64 {
    t_defined(n, n_exp).saturating_sub(1)
}

fn fill_free(free: &[FreeSlot], policy: FreePolicy) -> Result<Vec<BigUint>> {
    match policy {
        FreePolicy::AllOnes => Ok(free.iter().map(|f| BigUint::from(f.lo)).collect()),
        FreePolicy::RandomUniform { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(free.iter().map(|f| BigUint::from(rng.gen_range(f.lo..=f.hi))).collect())
        }
        FreePolicy::Enumerate { index } => {
            let mut rest = index;
            let digits = free
                .iter()
                .map(|f| {
                    let radix = f.hi - f.lo + 1;
                    let d = f.lo + rest % radix;
                    rest /= radix;
                    BigUint::from(d)
                })
                .collect();
            if rest != 0 {
                return Err(Error::param("index", format!("{index} exceeds the number of free assignments")));
            }
            Ok(digits)
        }
    }
}

/// Number of assignments of the free slots, if it fits in `u64`.
pub fn free_assignments(free: &[FreeSlot]) -> Option<u64> {
    free.iter().try_fold(1u64, |acc, f| acc.checked_mul(f.hi - f.lo + 1))
}

fn assemble(n: usize, pinned: Vec<Pinned>, max_digit: u64, policy: FreePolicy) -> Result<PinnedWord> {
    let free: Vec<FreeSlot> = (1..=n)
        .filter(|i| !pinned.iter().any(|p| p.index == *i))
        .map(|index| FreeSlot { index, lo: 1, hi: max_digit })
        .collect();
    let values = fill_free(&free, policy)?;
    let mut digits = vec![BigUint::zero(); n];
    for p in &pinned {
        digits[p.index - 1] = p.digit.clone();
    }
    for (f, v) in free.iter().zip(values) {
        digits[f.index - 1] = v;
    }
    Ok(PinnedWord { word: Word::new(digits)?, pinned, free, capped: false })
}

fn clamp_one(d: BigUint) -> BigUint {
    if d.is_zero() {
        BigUint::one()
    } else {
        d
    }
}

/// `floor(e^{(k^N)^beta} - e^{((k-1)^N)^beta})`, clamped at 1.
fn h_m_digit(k: u64, beta: f64, n_exp: u32, max_bits: u64) -> Result<BigUint> {
    let nk = (k as f64).powi(n_exp as i32);
    let approx = nk.powf(beta);
    let (k_hi, k_lo) = (BigUint::from(k).pow(n_exp), BigUint::from(k - 1).pow(n_exp));
    floor_exp_diff(approx, max_bits, &format!("a_{{{k}^{n_exp}}}"), |p| {
        let b = p.f64(beta);
        let mut e = |n: &BigUint| {
            let ln_n = p.ln_biguint(n);
            let x = p.mul(&b, &ln_n);
            let x = p.exp(&x);
            p.exp(&x)
        };
        let (hi, lo) = (e(&k_hi), e(&k_lo));
        p.sub(&hi, &lo)
    })
}

/// `floor(c^{b^n})`.
fn e_bc_digit(n: u64, b: f64, c: f64, max_bits: u64) -> Result<BigUint> {
    let int = |v: f64| (v.fract() == 0.0 && v < 4.0e9).then_some(v as u32);
    let bits = b.powf(n as f64) * c.log2();
    if !(bits.is_finite() && bits <= max_bits as f64) {
        return Err(Error::refuse(
            Gate::DigitBudget,
            format!("a_{n} = c^(b^{n}) needs about {bits:.0} bits (budget {max_bits})"),
        ));
    }
    if let (Some(bi), Some(ci)) = (int(b), int(c)) {
        let e = BigUint::from(bi).pow(n as u32);
        let e = e.to_u32().expect("exponent bounded by the bit budget");
        return Ok(BigUint::from(ci).pow(e));
    }
    let approx = bits * std::f64::consts::LN_2;
    floor_exp_diff(approx, max_bits, &format!("a_{n}"), |p| {
        let (bb, cc) = (p.f64(b), p.f64(c));
        let ln_b = p.ln(&bb);
        let ln_c = p.ln(&cc);
        let nn = p.f64(n as f64);
        let t = p.mul(&nn, &ln_b);
        let bn = p.exp(&t);
        let x = p.mul(&bn, &ln_c);
        p.exp(&x)
    })
    .map(clamp_one)
}

/// Build the length-`n` word of a construction.
pub fn generate(spec: &ConstructionSpec, n: usize, max_digit_bits: u64) -> Result<PinnedWord> {
    spec.kind.validate()?;
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    match &spec.kind {
        ConstructionKind::HM { max_digit, beta, n_exp } => {
            let mut pinned = Vec::new();
            for k in 2u64.. {
                let idx = k.checked_pow(*n_exp).unwrap_or(u64::MAX);
                if idx > n as u64 {
                    break;
                }
                let digit = clamp_one(h_m_digit(k, *beta, *n_exp, max_digit_bits)?);
                pinned.push(Pinned { index: idx as usize, digit });
            }
            assemble(n, pinned, *max_digit as u64, spec.policy)
        }
        ConstructionKind::EMAlpha { max_digit, alpha } => {
            let mut pinned = Vec::new();
            for l in 2u64.. {
                let idx = l * l;
                if idx > n as u64 {
                    break;
                }
                let l = l as f64;
                let v = (4.0 * alpha * l * l.ln()).floor();
                let digit = clamp_one(BigUint::from(v.max(0.0) as u64));
                pinned.push(Pinned { index: idx as usize, digit });
            }
            assemble(n, pinned, *max_digit as u64, spec.policy)
        }
        ConstructionKind::Tracking { seq, cap } => {
            let t = track_phi(seq, n, *cap, max_digit_bits)?;
            let pinned = t.word.digits().iter().enumerate().map(|(i, d)| Pinned { index: i + 1, digit: d.clone() }).collect();
            Ok(PinnedWord { word: t.word, pinned, free: Vec::new(), capped: t.capped })
        }
        ConstructionKind::Perturbed { max_digit } => {
            let base = assemble(n, Vec::new(), *max_digit as u64, spec.policy)?;
            let word = perturb(&base.word)?;
            let pinned: Vec<Pinned> = perturbed_indices(n)
                .map(|i| Pinned { index: i, digit: word.digits()[i - 1].clone() })
                .collect();
            let free = base.free.into_iter().filter(|f| !pinned.iter().any(|p| p.index == f.index)).collect();
            Ok(PinnedWord { word, pinned, free, capped: false })
        }
        ConstructionKind::EBc { b, c } => {
            let pinned = (1..=n)
                .map(|i| Ok(Pinned { index: i, digit: e_bc_digit(i as u64, *b, *c, max_digit_bits)? }))
                .collect::<Result<Vec<_>>>()?;
            assemble(n, pinned, 1, spec.policy)
        }
    }
}

/// Result of [`track_phi`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tracked {
    pub word: Word,
    /// Some digit was cut down to `cap`; the tracking guarantee is void.
    pub capped: bool,
    /// Indices where `s_n` ran above `round(phi(n))` because digits are `>= 1`.
    pub overshoots: u64,
    /// `phi(n)` was available exactly at every index.
    pub exact: bool,
}

/// `round_half_up(phi(n))` as an integer, exact when the family allows it.
fn rounded_phi(seq: &GrowthSequence, n: u64, max_bits: u64, exact: &mut bool) -> Result<BigUint> {
    if let Some(v) = seq.exact(n, max_bits) {
        return Ok(v);
    }
    let lp = seq.log_phi(n)?;
    let ln_phi = lp.ln_phi();
    if ln_phi < 36.0 {
        return Ok(BigUint::from((ln_phi.exp() + 0.5).floor().max(0.0) as u64));
    }
    // beyond f64's integer range the log carries only ~16 significant digits
    *exact = false;
    let bits = crate::precise::bits_of_exp(ln_phi);
    if !(bits.is_finite() && bits <= max_bits as f64) {
        return Err(Error::refuse(
            Gate::DigitBudget,
            format!("phi({n}) needs about {bits:.0} bits (budget {max_bits})"),
        ));
    }
    let mut p = Precision::bits(bits as usize + 64);
    let (lead, tail) = (p.f64(lp.lead), p.f64(lp.tail));
    let x = p.add(&lead, &tail);
    let v = p.exp(&x);
    let half = p.f64(0.5);
    Ok(floor_to_biguint(&p.add(&v, &half)).unwrap_or_default())
}

/// Greedy digits `a_n = max(1, round(phi(n)) - s_{n-1})`, optionally capped.
///
/// Refuses when `s_n` overshoots `round(phi(n))` at every index of the second
/// half of `1..=n`: digits are at least 1, so `s_n >= n` and such a `phi`
/// cannot be followed.
pub fn track_phi(seq: &GrowthSequence, n: usize, cap: Option<u64>, max_bits: u64) -> Result<Tracked> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    if n as u64 > seq.max_index() {
        return Err(Error::param("n", format!("beyond the sequence (length {})", seq.max_index())));
    }
    let cap = cap.map(BigUint::from);
    let mut digits = Vec::with_capacity(n);
    let mut s = BigUint::zero();
    let (mut capped, mut exact) = (false, true);
    let mut overshoots = 0u64;
    let mut late_overshoots = 0usize;
    for k in 1..=n {
        let target = rounded_phi(seq, k as u64, max_bits, &mut exact)?;
        let mut a = if target > s { &target - &s } else { BigUint::zero() };
        if a.is_zero() {
            a = BigUint::one();
        }
        if let Some(c) = &cap {
            if a > *c {
                a = c.clone();
                capped = true;
            }
        }
        s += &a;
        if s > target {
            overshoots += 1;
            if k > n / 2 {
                late_overshoots += 1;
            }
        }
        digits.push(a);
    }
    if n >= 2 && late_overshoots == n - n / 2 {
        return Err(Error::refuse(
            Gate::DigitLowerBound,
            format!("phi(k) < s_k for every k in {}..={n}; digits >= 1 force s_k >= k", n / 2 + 1),
        ));
    }
    Ok(Tracked { word: Word::new(digits)?, capped, overshoots, exact })
}

/// Indices `l^l <= n`, `l >= 2`.
pub fn perturbed_indices(n: usize) -> impl Iterator<Item = usize> {
    (2u32..)
        .map(|l| (l as u64).checked_pow(l).unwrap_or(u64::MAX))
        .take_while(move |i| *i <= n as u64)
        .map(|i| i as usize)
}

/// `l^{l+1} - (l-1)^l`, added at index `l^l`.
pub fn perturb_increment(l: u32) -> BigUint {
    BigUint::from(l).pow(l + 1) - BigUint::from(l - 1).pow(l)
}

/// Raise the digit at each `l^l` (`l >= 2`) by `l^{l+1} - (l-1)^l`.
pub fn perturb(w: &Word) -> Result<Word> {
    if w.len() < 4 {
        return Err(Error::InvalidInput(format!("perturb needs length >= 4, got {}", w.len())));
    }
    let mut digits = w.digits().to_vec();
    for (l, i) in (2u32..).zip(perturbed_indices(w.len())) {
        digits[i - 1] += perturb_increment(l);
    }
    Word::new(digits)
}

/// The word with its pinned positions removed.
pub fn delete_pinned(pw: &PinnedWord) -> Word {
    let digits = pw
        .word
        .digits()
        .iter()
        .enumerate()
        .filter(|(i, _)| !pw.is_pinned(i + 1))
        .map(|(_, d)| d.clone())
        .collect();
    Word::new(digits).expect("digits of a valid word")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ConstructionKind) -> ConstructionSpec {
        ConstructionSpec { kind, policy: FreePolicy::AllOnes }
    }

    #[test]
    fn h_m_fixture() {
        let s = spec(ConstructionKind::HM { max_digit: 3, beta: 0.5, n_exp: 2 });
        let pw = generate(&s, 9, DEFAULT_MAX_DIGIT_BITS).unwrap();
        let pins: Vec<(usize, u64)> = pw.pinned.iter().map(|p| (p.index, p.digit.to_u64().unwrap())).collect();
        assert_eq!(pins, vec![(4, 4), (9, 12)]);
        assert_eq!(pw.word, Word::from_u64s([1, 1, 1, 4, 1, 1, 1, 1, 12]).unwrap());
        let del = delete_pinned(&pw);
        assert_eq!(del.len(), 7);
        assert_eq!(t_defined(9, 2), 3);
        assert_eq!(pinned_count(9, 2), 2);
    }

    #[test]
    fn e_m_alpha_fixture() {
        let s = spec(ConstructionKind::EMAlpha { max_digit: 2, alpha: 1.0 });
        let pw = generate(&s, 9, DEFAULT_MAX_DIGIT_BITS).unwrap();
        let pins: Vec<(usize, u64)> = pw.pinned.iter().map(|p| (p.index, p.digit.to_u64().unwrap())).collect();
        assert_eq!(pins, vec![(4, 5), (9, 13)]);
    }

    #[test]
    fn e_bc_fixture() {
        let s = spec(ConstructionKind::EBc { b: 2.0, c: 2.0 });
        let pw = generate(&s, 3, DEFAULT_MAX_DIGIT_BITS).unwrap();
        assert_eq!(pw.word, Word::from_u64s([4, 16, 256]).unwrap());
        assert!(pw.free.is_empty());
        // non-integer parameters go through the high-precision path
        let s = spec(ConstructionKind::EBc { b: 2.0, c: 2.5 });
        let pw = generate(&s, 3, DEFAULT_MAX_DIGIT_BITS).unwrap();
        assert_eq!(pw.word, Word::from_u64s([6, 39, 1525]).unwrap());
    }

    #[test]
    fn digit_budget_refusal_names_index() {
        let s = spec(ConstructionKind::HM { max_digit: 2, beta: 0.9, n_exp: 3 });
        let e = generate(&s, 1000, 256).unwrap_err();
        match e {
            Error::Refused { gate: Gate::DigitBudget, detail } => assert!(detail.contains("a_{")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perturb_increments() {
        assert_eq!(perturb_increment(2), BigUint::from(7u32));
        assert_eq!(perturb_increment(3), BigUint::from(73u32));
        let w = Word::from_u64s(vec![1; 30]).unwrap();
        let p = perturb(&w).unwrap();
        for i in 1..=30 {
            let d = p.get(i).unwrap().to_u64().unwrap();
            let expect = match i {
                4 => 8,
                27 => 74,
                _ => 1,
            };
            assert_eq!(d, expect, "index {i}");
        }
        assert!(perturb(&Word::from_u64s([1, 1, 1]).unwrap()).is_err());
    }

    #[test]
    fn policies() {
        let kind = ConstructionKind::HM { max_digit: 3, beta: 0.5, n_exp: 2 };
        let a = generate(&ConstructionSpec { kind: kind.clone(), policy: FreePolicy::RandomUniform { seed: 7 } }, 9, 1 << 20).unwrap();
        let b = generate(&ConstructionSpec { kind: kind.clone(), policy: FreePolicy::RandomUniform { seed: 7 } }, 9, 1 << 20).unwrap();
        assert_eq!(a, b);
        assert!(a.free.iter().all(|f| (1..=3).contains(&a.word.get(f.index).unwrap().to_u64().unwrap())));
        assert_eq!(free_assignments(&a.free), Some(3u64.pow(7)));
        let last = generate(&ConstructionSpec { kind: kind.clone(), policy: FreePolicy::Enumerate { index: 2186 } }, 9, 1 << 20).unwrap();
        assert!(last.free.iter().all(|f| last.word.get(f.index).unwrap() == &BigUint::from(3u32)));
        assert!(generate(&ConstructionSpec { kind, policy: FreePolicy::Enumerate { index: 2187 } }, 9, 1 << 20).is_err());
    }

    #[test]
    fn spec_json() {
        let js = r#"{"kind":"h_m","params":{"M":3,"beta":0.5,"N":2},"policy":{"kind":"random_uniform","seed":5}}"#;
        let s: ConstructionSpec = serde_json::from_str(js).unwrap();
        assert_eq!(s.policy, FreePolicy::RandomUniform { seed: 5 });
        let back: ConstructionSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let pw = generate(&s, 9, 1 << 20).unwrap();
        let v = serde_json::to_value(&pw).unwrap();
        assert_eq!(v["pinned"][1]["digit"], "12");
    }

    #[test]
    fn tracking_identity_and_refusal() {
        let lin = crate::growth::make_phi(crate::growth::Family::Linear { alpha: 1.0 }).unwrap();
        let t = track_phi(&lin, 50, None, 1 << 20).unwrap();
        assert!(t.word.digits().iter().all(|d| d.is_one()));
        let half = crate::growth::make_phi(crate::growth::Family::Linear { alpha: 0.5 }).unwrap();
        let e = track_phi(&half, 50, None, 1 << 20).unwrap_err();
        assert!(matches!(e, Error::Refused { gate: Gate::DigitLowerBound, .. }));
    }
}
