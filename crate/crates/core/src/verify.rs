//! Brute-force and randomized checkers for the cylinder inequalities:
//! continuant ratio bounds for words differing on a few indices, the
//! comparison of their cylinder lengths, the basic-interval bounds, and the
//! deletion inequality for pinned words.
//!
//! Polynomial comparisons are exact rational. Comparisons with irrational
//! exponents (`|I|^{1 +- eps}`) are done on logs of the exact lengths at 100
//! decimal digits.

use astro_float::BigFloat;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{cylinder, Word, Words};
use crate::constructions::{delete_pinned, PinnedWord};
use crate::error::{Error, Gate, Result};
use crate::precise::{to_f64, Precision};

/// Decimal digits used for log-space comparisons.
pub const LOG_DIGITS: usize = 100;

/// Largest continuant, in bits, the deletion check will evaluate.
pub const MAX_RATIONAL_BITS: u64 = 1 << 22;

/// Two equal-length words and the indices (1-based) where they differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInstance {
    pub sigma: Word,
    pub tau: Word,
    pub omega: Vec<usize>,
}

impl PairInstance {
    pub fn new(sigma: Word, tau: Word) -> Result<Self> {
        if sigma.len() != tau.len() {
            return Err(Error::InvalidInput(format!(
                "sigma and tau differ in length ({} vs {})",
                sigma.len(),
                tau.len()
            )));
        }
        let omega = (1..=sigma.len()).filter(|&i| sigma.get(i) != tau.get(i)).collect();
        Ok(PairInstance { sigma, tau, omega })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// `t(n) = #omega`
    pub fn t(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        let fresh = PairInstance::new(self.sigma.clone(), self.tau.clone())?;
        if fresh.omega != self.omega {
            return Err(Error::InvalidInput(format!(
                "omega {:?} is not the set of differing indices {:?}",
                self.omega, fresh.omega
            )));
        }
        Ok(())
    }

    fn product(&self, num_plus: (u32, u32)) -> BigRational {
        // prod over omega of (sigma_i + a) / (tau_i + b)
        let (a, b) = num_plus;
        let mut r = BigRational::one();
        for &i in &self.omega {
            let s = self.sigma.get(i).unwrap() + a;
            let t = self.tau.get(i).unwrap() + b;
            r *= BigRational::new(s.into(), t.into());
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    RatioBounds,
    Comparison,
    ComparisonLower,
    ComparisonUpper,
    IntervalBounds,
    Deletion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Pair(PairInstance),
    Word { word: Word },
    Pinned { word: Word, pinned: Vec<usize>, deleted: Word },
}

/// Smallest slack of the checked inequalities; negative means violated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Margin {
    /// Exact rational, as `p/q`.
    Exact(String),
    /// Natural-log units, rounded from a 100-digit evaluation.
    Log(f64),
}

impl Margin {
    pub fn as_f64(&self) -> f64 {
        match self {
            Margin::Exact(s) => s.parse::<BigRational>().ok().and_then(|r| r.to_f64()).unwrap_or(f64::NAN),
            Margin::Log(v) => *v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub instance: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    pub hypothesis_satisfied: bool,
    /// Only meaningful when the hypothesis holds.
    pub conclusion_holds: bool,
    /// The statement is degenerate here (no differing or pinned indices).
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_case: Option<String>,
    pub margin: Margin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Instance>,
}

impl CheckReport {
    /// Hypothesis holds and conclusion fails.
    pub fn is_failure(&self) -> bool {
        self.hypothesis_satisfied && !self.conclusion_holds
    }
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `prod sigma_i/(tau_i + 1) < q_n(sigma)/q_n(tau) < prod (sigma_i + 1)/tau_i`
/// over the differing indices, exactly.
///
/// With no differing index all three sides equal 1; that instance is reported
/// vacuous, and the bounds hold as equalities.
pub fn check_ratio_bounds(inst: &PairInstance) -> Result<CheckReport> {
    inst.validate()?;
    if inst.n() == 0 {
        return Err(Error::InvalidInput("empty words".into()));
    }
    let ratio = BigRational::new(inst.sigma.q().into(), inst.tau.q().into());
    let lower = inst.product((0, 1));
    let upper = inst.product((1, 0));
    let slack = std::cmp::min(&ratio - &lower, &upper - &ratio);
    let vacuous = inst.omega.is_empty();
    let holds = if vacuous { slack.is_zero() } else { slack > BigRational::zero() };
    Ok(CheckReport {
        check: Check::RatioBounds,
        instance: Instance::Pair(inst.clone()),
        epsilon: None,
        psi: None,
        hypothesis_satisfied: true,
        conclusion_holds: holds,
        vacuous,
        edge_case: None,
        margin: Margin::Exact(rational_string(&slack)),
        counterexample: (!holds).then(|| Instance::Pair(inst.clone())),
    })
}

fn check_eps(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be a finite number > 0, got {epsilon}")));
    }
    Ok(())
}

struct LogLengths {
    p: Precision,
    sigma: BigFloat,
    tau: BigFloat,
}

fn log_lengths(inst: &PairInstance) -> LogLengths {
    let mut p = Precision::decimal_digits(LOG_DIGITS);
    let sigma = p.ln_rational(&cylinder(&inst.sigma).length);
    let tau = p.ln_rational(&cylinder(&inst.tau).length);
    LogLengths { p, sigma, tau }
}

impl LogLengths {
    /// `ln|I(sigma)| - (1 + eps) ln|I(tau)|`
    fn lower_slack(&mut self, eps: f64) -> BigFloat {
        let k = self.p.f64(1.0 + eps);
        let t = self.p.mul(&k, &self.tau);
        self.p.sub(&self.sigma, &t)
    }

    /// `(1 - eps) ln|I(tau)| - ln|I(sigma)|`
    fn upper_slack(&mut self, eps: f64) -> BigFloat {
        let k = self.p.f64(1.0 - eps);
        let t = self.p.mul(&k, &self.tau);
        self.p.sub(&t, &self.sigma)
    }

    /// `x >= ln 2 + 2 ln(bound)` with `x = (n - 1) eps ln 2`
    fn gate(&mut self, n: usize, eps: f64, ln_bound: &BigFloat) -> bool {
        let two = self.p.f64(2.0);
        let ln2 = self.p.ln(&two);
        let k = self.p.f64((n as f64 - 1.0) * eps);
        let lhs = self.p.mul(&k, &ln2);
        let rhs = self.p.add(&ln2, &self.p.mul(&two, ln_bound));
        let d = self.p.sub(&lhs, &rhs);
        !d.is_negative()
    }
}

fn min_float(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.cmp(&b).is_some_and(|o| o <= 0) {
        a
    } else {
        b
    }
}

/// Two-sided length comparison
/// `|I_n(tau)|^{1+eps} <= |I_n(sigma)| <= |I_n(tau)|^{1-eps}` under
/// `max(sigma_i, tau_i) + 1 <= psi` on the differing indices and
/// `2^{(n-1) eps} >= 2 psi^{2t}`.
///
/// The conclusion is evaluated whatever the hypothesis says, but only a
/// hypothesis-true, conclusion-false report counts as a failure.
pub fn check_comparison(inst: &PairInstance, epsilon: f64, psi: f64) -> Result<CheckReport> {
    inst.validate()?;
    check_eps(epsilon)?;
    if !(psi.is_finite() && psi > 0.0) {
        return Err(Error::param("psi", format!("must be a finite number > 0, got {psi}")));
    }
    let mut ll = log_lengths(inst);
    let digits_ok = inst.omega.iter().all(|&i| {
        let m = std::cmp::max(inst.sigma.get(i).unwrap(), inst.tau.get(i).unwrap()) + 1u32;
        m.to_f64().is_some_and(|v| v <= psi)
    });
    let psi_f = ll.p.f64(psi);
    let ln_psi = ll.p.ln(&psi_f);
    let t = ll.p.f64(inst.t() as f64);
    let ln_bound = ll.p.mul(&t, &ln_psi);
    let hypothesis = digits_ok && ll.gate(inst.n(), epsilon, &ln_bound);
    let lo = ll.lower_slack(epsilon);
    let hi = ll.upper_slack(epsilon);
    let margin = min_float(lo, hi);
    let holds = !margin.is_negative();
    Ok(CheckReport {
        check: Check::Comparison,
        instance: Instance::Pair(inst.clone()),
        epsilon: Some(epsilon),
        psi: Some(psi),
        hypothesis_satisfied: hypothesis,
        conclusion_holds: holds,
        vacuous: inst.omega.is_empty(),
        edge_case: None,
        margin: Margin::Log(to_f64(&margin)),
        counterexample: (hypothesis && !holds).then(|| Instance::Pair(inst.clone())),
    })
}

/// The one-sided forms: `2^{(n-1) eps} >= 2 (prod(sigma_i + 1)/prod tau_i)^2`
/// gives `|I(tau)|^{1+eps} <= |I(sigma)|`, and the same with `sigma`, `tau`
/// swapped in the product gives `|I(sigma)| <= |I(tau)|^{1-eps}`.
pub fn check_comparison_sides(inst: &PairInstance, epsilon: f64) -> Result<[CheckReport; 2]> {
    inst.validate()?;
    check_eps(epsilon)?;
    let mut ll = log_lengths(inst);
    let side = |check: Check, ratio: BigRational, slack: BigFloat, ll: &mut LogLengths| {
        let ln_ratio = ll.p.ln_rational(&ratio);
        let hypothesis = ll.gate(inst.n(), epsilon, &ln_ratio);
        let holds = !slack.is_negative();
        CheckReport {
            check,
            instance: Instance::Pair(inst.clone()),
            epsilon: Some(epsilon),
            psi: None,
            hypothesis_satisfied: hypothesis,
            conclusion_holds: holds,
            vacuous: inst.omega.is_empty(),
            edge_case: None,
            margin: Margin::Log(to_f64(&slack)),
            counterexample: (hypothesis && !holds).then(|| Instance::Pair(inst.clone())),
        }
    };
    let lo = ll.lower_slack(epsilon);
    let hi = ll.upper_slack(epsilon);
    let lower = side(Check::ComparisonLower, inst.product((1, 0)), lo, &mut ll);
    let swapped = PairInstance { sigma: inst.tau.clone(), tau: inst.sigma.clone(), omega: inst.omega.clone() };
    let upper = side(Check::ComparisonUpper, swapped.product((1, 0)), hi, &mut ll);
    Ok([lower, upper])
}

/// `1/(2 q_n^2) <= |I_n| < 1/q_n^2`, exactly. The left side is strict except
/// for the single word `(1)`, which is flagged as the edge case.
pub fn check_interval_bounds(w: &Word) -> Result<CheckReport> {
    if w.is_empty() {
        return Err(Error::InvalidInput("empty word".into()));
    }
    let c = cylinder(w);
    let q2: BigUint = &c.q * &c.q;
    let upper = BigRational::new(1.into(), q2.clone().into());
    let lower = BigRational::new(1.into(), (q2 * 2u32).into());
    let left = &c.length - &lower;
    let right = &upper - &c.length;
    let edge = left.is_zero();
    let holds = right > BigRational::zero() && (left > BigRational::zero() || (edge && w.len() == 1));
    Ok(CheckReport {
        check: Check::IntervalBounds,
        instance: Instance::Word { word: w.clone() },
        epsilon: None,
        psi: None,
        hypothesis_satisfied: true,
        conclusion_holds: holds,
        vacuous: false,
        edge_case: edge.then(|| format!("|I| = 1/(2 q_n^2) = {} at n = {}", c.length, w.len())),
        margin: Margin::Exact(rational_string(std::cmp::min(&left, &right))),
        counterexample: (!holds).then(|| Instance::Word { word: w.clone() }),
    })
}

/// `|I_n(a)| >= |I_{n-t}(a with pinned digits deleted)|^{1+eps}`, with both
/// lengths exact and the power taken in log space.
pub fn check_deletion_inequality(pw: &PinnedWord, epsilon: f64) -> Result<CheckReport> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be a finite number >= 0, got {epsilon}")));
    }
    let bits = pw.word.q().bits();
    if bits > MAX_RATIONAL_BITS {
        return Err(Error::refuse(
            Gate::DigitBudget,
            format!("q_n has {bits} bits (limit {MAX_RATIONAL_BITS})"),
        ));
    }
    let deleted = delete_pinned(pw);
    let full = cylinder(&pw.word).length;
    let short = cylinder(&deleted).length;
    let mut p = Precision::decimal_digits(LOG_DIGITS);
    let ln_full = p.ln_rational(&full);
    let ln_short = p.ln_rational(&short);
    let k = p.f64(1.0 + epsilon);
    let margin = p.sub(&ln_full, &p.mul(&k, &ln_short));
    let holds = !margin.is_negative();
    let instance = Instance::Pinned {
        word: pw.word.clone(),
        pinned: pw.pinned.iter().map(|x| x.index).collect(),
        deleted,
    };
    Ok(CheckReport {
        check: Check::Deletion,
        instance: instance.clone(),
        epsilon: Some(epsilon),
        psi: None,
        hypothesis_satisfied: true,
        conclusion_holds: holds,
        vacuous: pw.pinned.is_empty(),
        edge_case: None,
        margin: Margin::Log(to_f64(&margin)),
        counterexample: (!holds).then_some(instance),
    })
}

/// Totals of an exhaustive or random sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub checked: u64,
    pub hypothesis_satisfied: u64,
    pub vacuous: u64,
    pub edge_cases: Vec<CheckReport>,
    pub failures: Vec<CheckReport>,
}

impl SweepSummary {
    fn add(&mut self, r: CheckReport) {
        self.checked += 1;
        self.hypothesis_satisfied += r.hypothesis_satisfied as u64;
        self.vacuous += r.vacuous as u64;
        if r.is_failure() {
            self.failures.push(r);
        } else if r.edge_case.is_some() {
            self.edge_cases.push(r);
        }
    }

    fn merge(mut self, other: SweepSummary) -> SweepSummary {
        self.checked += other.checked;
        self.hypothesis_satisfied += other.hypothesis_satisfied;
        self.vacuous += other.vacuous;
        self.edge_cases.extend(other.edge_cases);
        self.failures.extend(other.failures);
        self
    }
}

fn check_grid(max_len: usize, max_digit: u32) -> Result<()> {
    if max_len < 1 || max_digit < 1 {
        return Err(Error::InvalidInput("grid needs max_len >= 1 and max_digit >= 1".into()));
    }
    if (max_digit as f64).powi(2 * max_len as i32) > 1e9 {
        return Err(Error::refuse(Gate::WordBudget, format!("grid {max_digit}^(2*{max_len}) is too large")));
    }
    Ok(())
}

/// Ratio bounds over every same-length pair with length `<= max_len` and
/// digits `<= max_digit`, sharded by the first digit of `sigma`.
pub fn exhaustive_ratio_bounds(max_len: usize, max_digit: u32) -> Result<SweepSummary> {
    check_grid(max_len, max_digit)?;
    let parts: Vec<Result<SweepSummary>> = (1..=max_digit)
        .into_par_iter()
        .map(|first| {
            let mut sum = SweepSummary::default();
            for n in 1..=max_len {
                for s in Words::new(n, max_digit).filter(|w| w[0] == first) {
                    let sigma = Word::from(s.as_slice());
                    for t in Words::new(n, max_digit) {
                        let inst = PairInstance::new(sigma.clone(), Word::from(t.as_slice()))?;
                        sum.add(check_ratio_bounds(&inst)?);
                    }
                }
            }
            Ok(sum)
        })
        .collect();
    parts.into_iter().try_fold(SweepSummary::default(), |acc, p| Ok(acc.merge(p?)))
}

/// Interval bounds for every word with length `<= max_len`, digits `<= max_digit`.
pub fn exhaustive_interval_bounds(max_len: usize, max_digit: u32) -> Result<SweepSummary> {
    if (max_digit as f64).powi(max_len as i32) > 1e8 {
        return Err(Error::refuse(Gate::WordBudget, format!("grid {max_digit}^{max_len} is too large")));
    }
    let parts: Vec<Result<SweepSummary>> = (1..=max_digit)
        .into_par_iter()
        .map(|first| {
            let mut sum = SweepSummary::default();
            for n in 1..=max_len {
                for w in Words::new(n, max_digit).filter(|w| w[0] == first) {
                    sum.add(check_interval_bounds(&Word::from(w.as_slice()))?);
                }
            }
            Ok(sum)
        })
        .collect();
    parts.into_iter().try_fold(SweepSummary::default(), |acc, p| Ok(acc.merge(p?)))
}

/// Parameters of the random comparison instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPairConfig {
    pub seed: u64,
    pub count: usize,
    #[serde(default = "default_min_len")]
    pub min_len: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_digit_max")]
    pub digit_max: u32,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
}

fn default_min_len() -> usize {
    2
}
fn default_max_len() -> usize {
    20
}
fn default_digit_max() -> u32 {
    8
}
fn default_t_max() -> usize {
    3
}

impl RandomPairConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        RandomPairConfig {
            seed,
            count,
            min_len: default_min_len(),
            max_len: default_max_len(),
            digit_max: default_digit_max(),
            t_max: default_t_max(),
        }
    }
}

/// A seeded comparison instance with `psi` and `eps` chosen to pass the gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPair {
    pub id: usize,
    pub seed: u64,
    pub instance: PairInstance,
    pub psi: f64,
    pub epsilon: f64,
}

/// `psi = max(sigma_i, tau_i) + 1` over the differing set and
/// `eps = eps_min (1 + u)`, `u ~ U[0, 1)`, where `eps_min` solves
/// `2^{(n-1) eps} = 2 psi^{2t}`. Each instance draws from its own stream
/// (`seed`, `id`), so instances are reproducible one by one.
pub fn random_pairs(cfg: &RandomPairConfig) -> Result<Vec<RandomPair>> {
    if cfg.min_len < 2 || cfg.min_len > cfg.max_len {
        return Err(Error::param("min_len", "need 2 <= min_len <= max_len"));
    }
    if cfg.digit_max < 2 {
        return Err(Error::param("digit_max", "must be >= 2 so digits can differ"));
    }
    if cfg.t_max < 1 {
        return Err(Error::param("t_max", "must be >= 1"));
    }
    (0..cfg.count)
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(id as u64);
            let n = rng.gen_range(cfg.min_len..=cfg.max_len);
            let sigma: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=cfg.digit_max)).collect();
            let t = rng.gen_range(1..=cfg.t_max.min(n));
            let mut omega: Vec<usize> = sample(&mut rng, n, t).into_iter().collect();
            omega.sort_unstable();
            let mut tau = sigma.clone();
            for &i in &omega {
                // uniform over the other digit_max - 1 values
                let d = rng.gen_range(1..cfg.digit_max);
                tau[i] = if d >= sigma[i] { d + 1 } else { d };
            }
            let psi = omega.iter().map(|&i| sigma[i].max(tau[i]) + 1).max().unwrap() as f64;
            let eps_min = (1.0 + 2.0 * t as f64 * psi.log2()) / (n as f64 - 1.0);
            let epsilon = eps_min * (1.0 + rng.gen::<f64>());
            let instance = PairInstance::new(Word::from(sigma.as_slice()), Word::from(tau.as_slice()))?;
            Ok(RandomPair { id, seed: cfg.seed, instance, psi, epsilon })
        })
        .collect()
}

/// One JSON object per line.
pub fn to_json_lines(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("reports serialize"));
        out.push('\n');
    }
    out
}

/// `instance_id,check,hypothesis,conclusion,margin`
pub fn to_csv(reports: &[CheckReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance_id", "check", "hypothesis", "conclusion", "margin"]).expect("in-memory write");
    for (i, r) in reports.iter().enumerate() {
        let check = serde_json::to_value(r.check).expect("check serializes");
        let margin = match &r.margin {
            Margin::Exact(s) => s.clone(),
            Margin::Log(v) => format!("{v:e}"),
        };
        w.write_record([
            i.to_string(),
            check.as_str().unwrap_or_default().to_string(),
            r.hypothesis_satisfied.to_string(),
            r.conclusion_holds.to_string(),
            margin,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{generate, ConstructionKind, ConstructionSpec, FreePolicy};

    fn w(d: &[u64]) -> Word {
        Word::from_u64s(d.iter().copied()).unwrap()
    }

    #[test]
    fn ratio_bounds_example() {
        let inst = PairInstance::new(w(&[2, 1]), w(&[1, 1])).unwrap();
        assert_eq!(inst.omega, vec![1]);
        let r = check_ratio_bounds(&inst).unwrap();
        assert!(r.conclusion_holds && !r.vacuous);
        // ratio 3/2, bounds (1, 3): slack min(1/2, 3/2)
        assert_eq!(r.margin, Margin::Exact("1/2".into()));
        let same = PairInstance::new(w(&[2, 1]), w(&[2, 1])).unwrap();
        let r = check_ratio_bounds(&same).unwrap();
        assert!(r.vacuous && r.conclusion_holds);
        assert_eq!(r.margin, Margin::Exact("0/1".into()));
    }

    #[test]
    fn bad_omega_rejected() {
        let mut inst = PairInstance::new(w(&[2, 1]), w(&[1, 1])).unwrap();
        inst.omega = vec![2];
        assert!(check_ratio_bounds(&inst).is_err());
        assert!(PairInstance::new(w(&[1]), w(&[1, 1])).is_err());
    }

    #[test]
    fn interval_bounds_examples() {
        let r = check_interval_bounds(&w(&[1])).unwrap();
        assert!(r.conclusion_holds && r.edge_case.is_some());
        let r = check_interval_bounds(&w(&[1, 1])).unwrap();
        assert!(r.conclusion_holds && r.edge_case.is_none());
        // 1/6 - 1/8 = 1/24, 1/4 - 1/6 = 1/12
        assert_eq!(r.margin, Margin::Exact("1/24".into()));
    }

    #[test]
    fn comparison_example() {
        // n = 10, one differing index, digits <= 5, psi = 6, eps = 0.7
        let sigma = w(&[1, 2, 3, 4, 5, 1, 2, 3, 4, 5]);
        let tau = w(&[1, 2, 3, 4, 5, 1, 2, 5, 4, 5]);
        let inst = PairInstance::new(sigma, tau).unwrap();
        let r = check_comparison(&inst, 0.7, 6.0).unwrap();
        assert!(r.hypothesis_satisfied && r.conclusion_holds);
        let r = check_comparison(&inst, 0.1, 6.0).unwrap();
        assert!(!r.hypothesis_satisfied);
        let same = PairInstance::new(inst.sigma.clone(), inst.sigma.clone()).unwrap();
        let r = check_comparison(&same, 0.3, 6.0).unwrap();
        assert!(r.conclusion_holds && r.vacuous);
        assert!(r.margin.as_f64() > 0.0);
    }

    #[test]
    fn deletion_zero_eps_fails_and_no_pins_is_equality() {
        let spec = ConstructionSpec { kind: ConstructionKind::HM { max_digit: 3, beta: 0.5, n_exp: 2 }, policy: FreePolicy::AllOnes };
        let pw = generate(&spec, 9, 1 << 20).unwrap();
        let r = check_deletion_inequality(&pw, 0.0).unwrap();
        assert!(!r.conclusion_holds);
        let pw = generate(&spec, 3, 1 << 20).unwrap();
        let r = check_deletion_inequality(&pw, 0.0).unwrap();
        assert!(r.conclusion_holds && r.vacuous);
        assert_eq!(r.margin.as_f64(), 0.0);
    }

    #[test]
    fn random_pairs_reproducible_and_gated() {
        let cfg = RandomPairConfig::new(11, 20);
        let a = random_pairs(&cfg).unwrap();
        assert_eq!(a, random_pairs(&cfg).unwrap());
        for p in &a {
            let r = check_comparison(&p.instance, p.epsilon, p.psi).unwrap();
            assert!(r.hypothesis_satisfied, "instance {}", p.id);
            assert!(p.instance.t() >= 1 && p.instance.t() <= 3);
        }
    }

    #[test]
    fn exports() {
        let r = check_interval_bounds(&w(&[1, 1])).unwrap();
        let csv = to_csv(&[r.clone()]);
        assert_eq!(csv, "instance_id,check,hypothesis,conclusion,margin\n0,interval_bounds,true,true,1/24\n");
        let jl = to_json_lines(&[r.clone(), r]);
        assert_eq!(jl.lines().count(), 2);
    }
}
