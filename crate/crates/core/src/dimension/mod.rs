//! Hausdorff-dimension estimators.
//!
//! Pressure roots (cylinder sums or transfer-operator collocation), the
//! `B`/`b` case split for `{a_n >= phi(n) i.o.}`-type sets, the ratio formula
//! `1/(2 + limsup log s_{n+1} / log(s_1 ... s_n))`, the leading term of the
//! `F_alpha` gap, and roots of finite covers.

mod collocation;
mod pressure;

pub use collocation::{hurwitz_zeta, Collocation};
pub use pressure::{pressure, solve_root, CylinderTable, PressureConfig, PressureMethod, Weight, DEFAULT_MAX_WORDS};

use serde::{Deserialize, Serialize};

use crate::cf::Cylinder;
use crate::error::{Error, Gate, Result};
use crate::growth::GrowthSequence;
use crate::limit::Limit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CylinderSum,
    Collocation,
    ClosedForm,
    Flww,
    Lr,
    Cover,
}

/// One line of a convergence table. For pressure roots `depth` is the word
/// depth (or collocation order); for the ratio formula it is `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub depth: u32,
    pub root: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateParams {
    Pressure(PressureConfig),
    Ww { base: Limit, b: Option<Limit> },
    Ratio { s: DigitBound, t: Option<DigitBound>, depth: u64 },
    Cover { cylinders: usize },
}

/// `ln(t_n - 1) / ln s_n` at the deepest index where both are finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisDiagnostic {
    pub ratio: f64,
    pub at: u64,
    /// `|ratio| > HYPOTHESIS_TOL`: the lemma does not apply.
    pub flagged: bool,
}

pub const HYPOTHESIS_TOL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub method: Method,
    pub params: EstimateParams,
    pub bracket: (f64, f64),
    pub rows: Vec<DepthRow>,
    /// Roots of the averaged pressure `(1/n) ln Z_n(s) - s ln B`, cylinder sums only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mean_roots: Vec<DepthRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<HypothesisDiagnostic>,
}

impl DimensionEstimate {
    fn exact(value: f64, method: Method, params: EstimateParams) -> Self {
        DimensionEstimate {
            value,
            method,
            params,
            bracket: (value, value),
            rows: Vec::new(),
            mean_roots: Vec::new(),
            notes: Vec::new(),
            hypothesis: None,
        }
    }

    /// `depth,root,bracket_lo,bracket_hi` table of the per-depth rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["depth", "root", "bracket_lo", "bracket_hi"]).expect("in-memory write");
        for r in &self.rows {
            w.serialize((r.depth, r.root, r.bracket_lo, r.bracket_hi)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub(crate) fn aitken(x0: f64, x1: f64, x2: f64) -> Option<f64> {
    let (d1, d2) = (x1 - x0, x2 - x1);
    let den = d2 - d1;
    if d2 == 0.0 {
        return Some(x2);
    }
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let v = x2 - d2 * d2 / den;
    v.is_finite().then_some(v)
}

/// Dimension of `{a_n >= phi(n) i.o.}`-type sets by the growth rates
/// `B = liminf phi(n)^{1/n}` and `b = liminf log phi(n+1)/log phi(n)`:
/// 1 when `B = 1`, `s_B` for `1 < B < inf`, `1/(1 + b)` when `B = inf`.
///
/// `s_B` comes from [`solve_root`] on `solver` with its base replaced by `B`.
pub fn ww_dimension(base: Limit, b: Option<Limit>, solver: &PressureConfig, tol: f64) -> Result<DimensionEstimate> {
    let params = EstimateParams::Ww { base, b };
    match base {
        Limit::Finite(v) if !(v >= 1.0) => Err(Error::param("B", format!("must be >= 1, got {v}"))),
        Limit::Finite(v) if v == 1.0 => Ok(DimensionEstimate::exact(1.0, Method::ClosedForm, params)),
        Limit::Finite(v) => {
            let mut est = solve_root(&solver.with_base(v), tol)?;
            if b.is_some() {
                est.notes.push("b is ignored when B is finite".into());
            }
            Ok(est)
        }
        Limit::Infinite => {
            let value = match b {
                None => return Err(Error::param("b", "required when B = inf")),
                Some(Limit::Finite(b)) if !(b >= 1.0) => {
                    return Err(Error::param("b", format!("must be >= 1, got {b}")))
                }
                Some(Limit::Finite(b)) => 1.0 / (1.0 + b),
                Some(Limit::Infinite) => 0.0,
            };
            Ok(DimensionEstimate::exact(value, Method::ClosedForm, params))
        }
    }
}

/// A digit bound sequence `s_n` (or `t_n`), `n >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DigitBound {
    /// `c^{b^n}`
    DoubleExp { b: f64, c: f64 },
    /// `base^n`
    Geometric { base: f64 },
    /// `n + offset`
    Shift { offset: f64 },
    Constant { value: f64 },
    /// `1 + 1/n`
    OnePlusInverse,
    /// `phi(n)` of a growth sequence
    Growth { seq: GrowthSequence },
}

impl DigitBound {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64, min: f64| {
            if v.is_finite() && v > min {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be > {min}, got {v}")))
            }
        };
        match self {
            DigitBound::DoubleExp { b, c } => pos("b", *b, 1.0).and(pos("c", *c, 1.0)),
            DigitBound::Geometric { base } => pos("base", *base, 1.0),
            DigitBound::Shift { offset } => pos("offset", *offset, -1.0),
            DigitBound::Constant { value } => pos("value", *value, 0.0),
            DigitBound::OnePlusInverse | DigitBound::Growth { .. } => Ok(()),
        }
    }

    pub fn tends_to_infinity(&self) -> bool {
        match self {
            DigitBound::DoubleExp { .. } | DigitBound::Geometric { .. } | DigitBound::Shift { .. } => true,
            DigitBound::Constant { .. } | DigitBound::OnePlusInverse => false,
            DigitBound::Growth { seq } => seq.known_limits().is_some_and(|h| {
                h.limsup_phi_over_n.is_some_and(|l| l.is_positive(0.0))
                    || h.liminf_log_phi_over_n.is_some_and(|l| l.is_positive(0.0))
            }),
        }
    }

    /// `ln s_n`
    pub fn ln_at(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        Ok(match self {
            DigitBound::DoubleExp { b, c } => (x * b.ln()).exp() * c.ln(),
            DigitBound::Geometric { base } => x * base.ln(),
            DigitBound::Shift { offset } => (x + offset).ln(),
            DigitBound::Constant { value } => value.ln(),
            DigitBound::OnePlusInverse => (1.0 / x).ln_1p(),
            DigitBound::Growth { seq } => seq.log_phi(n)?.ln_phi(),
        })
    }

    /// `ln ln s_n`; finite even after `ln s_n` overflows.
    pub fn ln_ln_at(&self, n: u64) -> Result<f64> {
        Ok(match self {
            DigitBound::DoubleExp { b, c } => n as f64 * b.ln() + c.ln().ln(),
            DigitBound::Growth { seq } => seq.log_phi(n)?.ln_ln_phi(),
            _ => self.ln_at(n)?.ln(),
        })
    }

    /// `ln(s_n - 1)`; `-inf` at `s_n = 1`, NaN below.
    pub fn ln_minus_one(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        Ok(match self {
            DigitBound::OnePlusInverse => -x.ln(),
            DigitBound::Shift { offset } => (x + offset - 1.0).ln(),
            DigitBound::Constant { value } => (value - 1.0).ln(),
            _ => {
                let l = self.ln_at(n)?;
                // ln(e^l - 1) = l + ln(1 - e^{-l})
                if l > 0.0 {
                    l + (-(-l).exp_m1()).ln()
                } else if l == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::NAN
                }
            }
        })
    }
}

/// `r_n = ln s_{n+1} / sum_{k<=n} ln s_k` for `n = 1..=depth`, from `ln ln s`.
fn ratio_sequence(ll: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ll.len().saturating_sub(1));
    // running log-sum-exp of ll[0..=n-1]
    let (mut m, mut acc) = (f64::NEG_INFINITY, 0.0f64);
    for n in 1..ll.len() {
        let x = ll[n - 1];
        if x > m {
            acc = acc * (m - x).exp() + 1.0;
            m = x;
        } else if x > f64::NEG_INFINITY {
            acc += (x - m).exp();
        }
        let denom = m + acc.ln();
        out.push((ll[n] - denom).exp());
    }
    out
}

fn ratio_estimate(
    s: &DigitBound,
    t: Option<&DigitBound>,
    depth: u64,
    method: Method,
) -> Result<DimensionEstimate> {
    let ll: Vec<f64> = (1..=depth + 1).map(|n| s.ln_ln_at(n)).collect::<Result<_>>()?;
    let r = ratio_sequence(&ll);
    let at = |n: u64| r[(n - 1) as usize];

    let tail_sup = r[(depth as usize) / 2..].iter().copied().fold(0.0f64, f64::max);
    let mut notes = Vec::new();
    let (q1, q2, q3) = (depth / 4, depth / 2, depth);
    let limit = if q1 >= 1 && q1 < q2 {
        let (a, b, c) = (at(q1), at(q2), at(q3));
        let monotone = (a >= b && b >= c) || (a <= b && b <= c);
        match aitken(a, b, c) {
            Some(v) if monotone => {
                notes.push(format!("limit by aitken on r at n = {q1}, {q2}, {q3}"));
                v.max(0.0)
            }
            _ => {
                notes.push(format!("r not monotone on the tail; limit is the running sup over n >= {}", depth / 2));
                tail_sup
            }
        }
    } else {
        notes.push("depth too small to extrapolate; limit is the running sup".into());
        tail_sup
    };
    notes.push(format!("running sup of r over n >= {}: {tail_sup}", depth / 2));
    let value = 1.0 / (2.0 + limit);

    let mut sample: Vec<u64> = std::iter::successors(Some(1u64), |n| Some(n * 2)).take_while(|n| *n < depth).collect();
    sample.extend([q1, q2, q3]);
    sample.retain(|n| *n >= 1);
    sample.sort_unstable();
    sample.dedup();
    let rows = sample
        .into_iter()
        .map(|n| {
            let v = 1.0 / (2.0 + at(n));
            DepthRow { depth: n.min(u32::MAX as u64) as u32, root: v, bracket_lo: v, bracket_hi: v }
        })
        .collect();

    let last = 1.0 / (2.0 + at(depth));
    let sup_value = 1.0 / (2.0 + tail_sup);
    let hypothesis = match t {
        Some(t) => Some(lr_hypothesis(s, t, depth)?),
        None => None,
    };
    Ok(DimensionEstimate {
        value,
        method,
        params: EstimateParams::Ratio { s: s.clone(), t: t.cloned(), depth },
        bracket: (value.min(sup_value).min(last), value.max(last).max(sup_value)),
        rows,
        mean_roots: Vec::new(),
        notes,
        hypothesis,
    })
}

fn lr_hypothesis(s: &DigitBound, t: &DigitBound, depth: u64) -> Result<HypothesisDiagnostic> {
    for n in (1..=depth).rev() {
        let (num, den) = (t.ln_minus_one(n)?, s.ln_at(n)?);
        let h = num / den;
        if h.is_finite() {
            return Ok(HypothesisDiagnostic { ratio: h, at: n, flagged: h.abs() > HYPOTHESIS_TOL });
        }
    }
    Ok(HypothesisDiagnostic { ratio: f64::NAN, at: depth, flagged: true })
}

fn check_depth(depth: u64) -> Result<()> {
    if !(1..=100_000_000).contains(&depth) {
        return Err(Error::param("depth", format!("must lie in 1..=1e8, got {depth}")));
    }
    Ok(())
}

/// `1/(2 + limsup ln s_{n+1} / ln(s_1 ... s_n))` for `s_n >= 3`, `s_n -> inf`.
///
/// The limsup is estimated from `n <= depth`: Aitken on `r` at
/// `depth/4, depth/2, depth` when those are monotone, else the running sup of
/// the tail. Both are kept in the notes.
pub fn flww_dimension(s: &DigitBound, depth: u64) -> Result<DimensionEstimate> {
    s.validate()?;
    check_depth(depth)?;
    if !s.tends_to_infinity() {
        return Err(Error::refuse(Gate::LemmaHypothesis, "s_n must tend to infinity"));
    }
    let floor = 3f64.ln().ln() - 1e-12;
    for n in 1..=depth + 1 {
        let ll = s.ln_ln_at(n)?;
        if !(ll >= floor) {
            return Err(Error::refuse(
                Gate::LemmaHypothesis,
                format!("s_n >= 3 fails at n = {n} (ln s_n = {})", s.ln_at(n)?),
            ));
        }
    }
    ratio_estimate(s, None, depth, Method::Flww)
}

/// The same formula for `s_n <= a_n < t_n s_n`, `s_n >= 1`, `t_n > 1`. The
/// requirement `ln(t_n - 1)/ln s_n -> 0` is reported as a diagnostic, flagged
/// when it is far from 0 at the deepest index.
pub fn lr_dimension(s: &DigitBound, t: &DigitBound, depth: u64) -> Result<DimensionEstimate> {
    s.validate()?;
    t.validate()?;
    check_depth(depth)?;
    for n in 1..=depth + 1 {
        if !(s.ln_at(n)? >= 0.0) {
            return Err(Error::param("s", format!("s_n >= 1 fails at n = {n}")));
        }
        let lt = t.ln_minus_one(n)?;
        if !(lt > f64::NEG_INFINITY) {
            return Err(Error::param("t", format!("t_n > 1 fails at n = {n}")));
        }
    }
    ratio_estimate(s, Some(t), depth, Method::Lr)
}

/// Euler's constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Leading term `(6/pi^2) e^{-1-gamma} 2^{-alpha}` of `1 - dim_H F_alpha`.
///
/// `2^{-alpha}` is split as `2^{-frac} * 2^{-floor}` with the integer part
/// applied as an exact power of two, so shifting `alpha` by 1 halves the
/// result exactly.
pub fn cv_gap(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be a finite number >= 0, got {alpha}")));
    }
    let c = 6.0 / (std::f64::consts::PI * std::f64::consts::PI) * (-1.0 - EULER_GAMMA).exp();
    let k = alpha.floor();
    let frac = alpha - k;
    let head = c * (-frac * std::f64::consts::LN_2).exp();
    Ok(head * 2f64.powi(-(k as i32).min(1100)))
}

/// The `s >= 0` with `sum |I|^s = 1` over a finite family of disjoint cylinders.
pub fn cover_dimension(cover: &[Cylinder], tol: f64) -> Result<DimensionEstimate> {
    if cover.is_empty() {
        return Err(Error::InvalidInput("cover is empty".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", format!("must be a finite number > 0, got {tol}")));
    }
    let mut order: Vec<&Cylinder> = cover.iter().collect();
    order.sort_by(|a, b| a.left.cmp(&b.left));
    for w in order.windows(2) {
        if w[1].left < w[0].right {
            return Err(Error::InvalidInput(format!(
                "cylinders of ({}) and ({}) overlap",
                w[0].word, w[1].word
            )));
        }
    }
    let params = EstimateParams::Cover { cylinders: cover.len() };
    if cover.len() == 1 {
        return Ok(DimensionEstimate::exact(0.0, Method::Cover, params));
    }
    let ln_len: Vec<f64> = cover.iter().map(|c| c.ln_length()).collect();
    let ln_sum = |s: f64| {
        let m = ln_len.iter().map(|l| s * l).fold(f64::NEG_INFINITY, f64::max);
        m + ln_len.iter().map(|l| (s * l - m).exp()).sum::<f64>().ln()
    };
    // disjoint subintervals of (0,1) have total length <= 1
    let (value, lo, hi) = pressure::bisect(ln_sum, 0.0, 1.0, tol)?;
    let mut est = DimensionEstimate::exact(value, Method::Cover, params);
    est.bracket = (lo, hi);
    est.rows.push(DepthRow { depth: cover.iter().map(|c| c.word.len()).max().unwrap_or(0) as u32, root: value, bracket_lo: lo, bracket_hi: hi });
    Ok(est)
}
