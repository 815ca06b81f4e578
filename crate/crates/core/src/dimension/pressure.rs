//! Finite-depth pressure from exhaustive cylinder sums, and the root solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collocation::Collocation;
use super::{aitken, DepthRow, DimensionEstimate, EstimateParams, Method};
use crate::error::{Error, Gate, Result};

/// Words enumerated by one cylinder-sum table, at most (all levels together).
pub const DEFAULT_MAX_WORDS: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    CylinderSum,
    Collocation,
}

/// What a depth-n word contributes: `q_n^{-2s}` or `|I_n|^s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    #[default]
    Continuant,
    CylinderLength,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureConfig {
    #[serde(rename = "B", default = "one")]
    pub base: f64,
    #[serde(rename = "M")]
    pub max_digit: u32,
    #[serde(default = "one_u32")]
    pub depth: u32,
    /// First depth recorded in the per-depth table (defaults to
    /// `max(2, depth - 6)`; at depth 1 the digit 1 alone keeps `Z_1 > 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_depth: Option<u32>,
    #[serde(default = "default_method")]
    pub method: PressureMethod,
    #[serde(default = "default_order")]
    pub collocation_order: u32,
    /// Add the digits `a > M` to the collocation operator (Hurwitz zeta tail).
    #[serde(default)]
    pub zeta_tail: bool,
    #[serde(default)]
    pub weight: Weight,
    #[serde(default = "default_max_words")]
    pub max_words: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn default_method() -> PressureMethod {
    PressureMethod::CylinderSum
}
fn default_order() -> u32 {
    24
}
fn default_max_words() -> u64 {
    DEFAULT_MAX_WORDS
}

impl PressureConfig {
    pub fn cylinder_sum(base: f64, max_digit: u32, depth: u32) -> Self {
        PressureConfig {
            base,
            max_digit,
            depth,
            min_depth: None,
            method: PressureMethod::CylinderSum,
            collocation_order: default_order(),
            zeta_tail: false,
            weight: Weight::Continuant,
            max_words: DEFAULT_MAX_WORDS,
            bracket: None,
        }
    }

    pub fn collocation(base: f64, max_digit: u32, order: u32) -> Self {
        PressureConfig {
            method: PressureMethod::Collocation,
            collocation_order: order,
            ..Self::cylinder_sum(base, max_digit, 1)
        }
    }

    /// The whole alphabet: digits up to 40 explicitly, the rest through the
    /// zeta tail. Used for `s_B`.
    pub fn full_alphabet() -> Self {
        PressureConfig { zeta_tail: true, ..Self::collocation(1.0, 40, 32) }
    }

    pub fn with_base(&self, base: f64) -> Self {
        PressureConfig { base, ..self.clone() }
    }

    pub fn first_depth(&self) -> u32 {
        self.min_depth.unwrap_or(self.depth.saturating_sub(6).max(2)).clamp(1, self.depth)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base.is_finite() && self.base >= 1.0) {
            return Err(Error::param("B", format!("must be a finite number >= 1, got {}", self.base)));
        }
        if self.max_digit < 1 {
            return Err(Error::param("M", "must be >= 1"));
        }
        if self.depth < 1 {
            return Err(Error::param("depth", "must be >= 1"));
        }
        if let Some(m) = self.min_depth {
            if m < 1 || m > self.depth {
                return Err(Error::param("min_depth", format!("must lie in 1..=depth, got {m}")));
            }
        }
        if self.method == PressureMethod::Collocation && self.collocation_order < 8 {
            return Err(Error::param("collocation_order", format!("must be >= 8, got {}", self.collocation_order)));
        }
        if self.zeta_tail && self.method != PressureMethod::Collocation {
            return Err(Error::param("zeta_tail", "only available with method = collocation"));
        }
        if self.weight == Weight::CylinderLength && self.method != PressureMethod::CylinderSum {
            return Err(Error::param("weight", "cylinder_length weights need method = cylinder_sum"));
        }
        if self.max_words == 0 {
            return Err(Error::param("max_words", "must be > 0"));
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::param("bracket", format!("need 0 <= lo < hi, got ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    /// Words in levels `1..=depth`, saturating.
    pub fn word_count(&self) -> u64 {
        let m = self.max_digit as u64;
        let mut level = 1u64;
        let mut total = 0u64;
        for _ in 0..self.depth {
            level = level.saturating_mul(m);
            total = total.saturating_add(level);
        }
        total
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    ln_q: f64,
    /// `ln(1 + q_{n-1}/q_n)`
    ln1p_r: f64,
    r: f64,
}

/// `ln q_n` for every word of every level, sharded by first digit.
///
/// The continuants are carried as `ln q_n` and the ratio `q_{n-1}/q_n`, so
/// nothing overflows however deep or wide the table is.
pub struct CylinderTable {
    max_digit: u32,
    weight: Weight,
    // shards[a - 1][level - 1]
    shards: Vec<Vec<Vec<Entry>>>,
}

impl CylinderTable {
    pub fn build(cfg: &PressureConfig) -> Result<Self> {
        cfg.validate()?;
        let count = cfg.word_count();
        if count > cfg.max_words {
            return Err(Error::refuse(
                Gate::WordBudget,
                format!(
                    "M = {}, depth = {} needs {count} words (max_words = {})",
                    cfg.max_digit, cfg.depth, cfg.max_words
                ),
            ));
        }
        let shards = (1..=cfg.max_digit)
            .into_par_iter()
            .map(|a| {
                let a = a as f64;
                let mut levels = vec![vec![Entry { ln_q: a.ln(), ln1p_r: (1.0 / a).ln_1p(), r: 1.0 / a }]];
                for _ in 1..cfg.depth {
                    let prev = levels.last().unwrap();
                    let mut next = Vec::with_capacity(prev.len() * cfg.max_digit as usize);
                    for e in prev {
                        for d in 1..=cfg.max_digit {
                            // q_{n+1} = q_n (d + r)
                            let g = d as f64 + e.r;
                            let r = 1.0 / g;
                            next.push(Entry { ln_q: e.ln_q + g.ln(), ln1p_r: r.ln_1p(), r });
                        }
                    }
                    levels.push(next);
                }
                levels
            })
            .collect();
        Ok(CylinderTable { max_digit: cfg.max_digit, weight: cfg.weight, shards })
    }

    pub fn depth(&self) -> u32 {
        self.shards[0].len() as u32
    }

    fn log_weight(&self, e: &Entry, s: f64) -> f64 {
        match self.weight {
            Weight::Continuant => -2.0 * s * e.ln_q,
            Weight::CylinderLength => -s * (2.0 * e.ln_q + e.ln1p_r),
        }
    }

    /// `ln Z_n(s)`, with `Z_0 = 1`.
    pub fn ln_sum(&self, level: u32, s: f64) -> f64 {
        if level == 0 {
            return 0.0;
        }
        let parts: Vec<(f64, f64)> = self
            .shards
            .par_iter()
            .map(|shard| {
                let entries = &shard[level as usize - 1];
                let m = entries.iter().map(|e| self.log_weight(e, s)).fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = entries.iter().map(|e| (self.log_weight(e, s) - m).exp()).sum();
                (m, sum)
            })
            .collect();
        // fixed reduction order keeps results independent of the thread count
        let m = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = parts.iter().map(|(pm, ps)| ps * (pm - m).exp()).sum();
        m + sum.ln()
    }

    pub fn max_digit(&self) -> u32 {
        self.max_digit
    }
}

/// `P_n(s) = (1/n) ln Z_n(s) - s ln B`, or `ln lambda(s) - s ln B` for collocation.
pub fn pressure(s: f64, cfg: &PressureConfig) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("must be a finite number >= 0, got {s}")));
    }
    cfg.validate()?;
    let ln_b = cfg.base.ln();
    match cfg.method {
        PressureMethod::CylinderSum => {
            let t = CylinderTable::build(cfg)?;
            Ok(t.ln_sum(cfg.depth, s) / cfg.depth as f64 - s * ln_b)
        }
        PressureMethod::Collocation => {
            let c = Collocation::new(cfg.collocation_order as usize, cfg.max_digit, cfg.zeta_tail);
            Ok(c.ln_eigenvalue(s) - s * ln_b)
        }
    }
}

/// Bisection for `inf {s in [lo, hi] : f(s) <= 0}` of a decreasing `f`.
/// Returns the midpoint of the final bracket together with the bracket.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, f64)> {
    let (p_lo, p_hi) = (f(lo), f(hi));
    if p_lo <= 0.0 {
        return Ok((lo, lo, lo));
    }
    if p_hi > 0.0 || p_hi.is_nan() {
        return Err(Error::NoSignChange { lo, hi, p_lo, p_hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b), a, b))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", format!("must be a finite number > 0, got {tol}")));
    }
    Ok(())
}

/// Root of the pressure equation.
///
/// Cylinder sums: for each depth `n` from `first_depth()` to `depth`, the root
/// of the ratio pressure `ln(Z_n/Z_{n-1}) - s ln B` goes in `rows` and the root
/// of the averaged pressure `P_n` in `mean_roots`. The ratio roots converge
/// geometrically, so `value` is their Aitken extrapolation; the averaged roots
/// carry an O(1/n) bias.
///
/// Collocation: one row per order `8, 12, ..`, `value` from the highest.
pub fn solve_root(cfg: &PressureConfig, tol: f64) -> Result<DimensionEstimate> {
    cfg.validate()?;
    check_tol(tol)?;
    let (lo, hi) = cfg.bracket.unwrap_or((0.0, 1.5));
    let ln_b = cfg.base.ln();
    let mut rows = Vec::new();
    let mut mean_roots = Vec::new();
    let mut notes = Vec::new();

    let value = match cfg.method {
        PressureMethod::CylinderSum => {
            let t = CylinderTable::build(cfg)?;
            for n in cfg.first_depth()..=cfg.depth {
                let (r, a, b) = bisect(|s| t.ln_sum(n, s) - t.ln_sum(n - 1, s) - s * ln_b, lo, hi, tol)?;
                rows.push(DepthRow { depth: n, root: r, bracket_lo: a, bracket_hi: b });
                let (r, a, b) = bisect(|s| t.ln_sum(n, s) / n as f64 - s * ln_b, lo, hi, tol)?;
                mean_roots.push(DepthRow { depth: n, root: r, bracket_lo: a, bracket_hi: b });
            }
            let k = rows.len();
            if k >= 3 {
                match aitken(rows[k - 3].root, rows[k - 2].root, rows[k - 1].root) {
                    Some(v) if (lo..=hi).contains(&v) => v,
                    _ => {
                        notes.push("aitken step degenerate; using the deepest ratio root".into());
                        rows[k - 1].root
                    }
                }
            } else {
                notes.push("fewer than three depths; no extrapolation".into());
                rows[k - 1].root
            }
        }
        PressureMethod::Collocation => {
            let mut orders: Vec<u32> = (8..=cfg.collocation_order).step_by(4).collect();
            if orders.last() != Some(&cfg.collocation_order) {
                orders.push(cfg.collocation_order);
            }
            for order in orders {
                let c = Collocation::new(order as usize, cfg.max_digit, cfg.zeta_tail);
                let (r, a, b) = bisect(|s| c.ln_eigenvalue(s) - s * ln_b, lo, hi, tol)?;
                rows.push(DepthRow { depth: order, root: r, bracket_lo: a, bracket_hi: b });
            }
            rows.last().unwrap().root
        }
    };
    let last = rows.last().unwrap();
    let method = match cfg.method {
        PressureMethod::CylinderSum => Method::CylinderSum,
        PressureMethod::Collocation => Method::Collocation,
    };
    Ok(DimensionEstimate {
        value,
        method,
        params: EstimateParams::Pressure(cfg.clone()),
        bracket: (value.min(last.bracket_lo), value.max(last.bracket_hi)),
        rows,
        mean_roots,
        notes,
        hypothesis: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_sum() {
        let cfg = PressureConfig::cylinder_sum(1.0, 2, 1);
        let p = pressure(1.0, &cfg).unwrap();
        assert!((p - 1.25f64.ln()).abs() < 1e-15);
        let single = PressureConfig::cylinder_sum(1.0, 1, 7);
        assert_eq!(pressure(0.0, &single).unwrap(), 0.0);
    }

    #[test]
    fn table_matches_exact_continuants() {
        let cfg = PressureConfig::cylinder_sum(1.0, 3, 5);
        let t = CylinderTable::build(&cfg).unwrap();
        // Z_5(1/2) = sum over words of 1/q_5
        let mut z = 0.0;
        for w in crate::cf::Words::new(5, 3) {
            let q = crate::cf::Word::from(w.as_slice()).q();
            z += 1.0 / crate::cf::ln_biguint(&q).exp();
        }
        assert!((t.ln_sum(5, 0.5) - z.ln()).abs() < 1e-13);
    }

    #[test]
    fn budget_refusal_names_the_bound() {
        let cfg = PressureConfig { max_words: 1000, ..PressureConfig::cylinder_sum(1.0, 2, 12) };
        match CylinderTable::build(&cfg) {
            Err(Error::Refused { gate: Gate::WordBudget, detail }) => assert!(detail.contains("max_words = 1000")),
            other => panic!("expected refusal, got {:?}", other.err()),
        }
    }

    #[test]
    fn negative_s_rejected() {
        let cfg = PressureConfig::cylinder_sum(1.0, 2, 3);
        assert!(pressure(-0.1, &cfg).is_err());
    }

    #[test]
    fn singleton_root_is_zero() {
        let est = solve_root(&PressureConfig::cylinder_sum(1.0, 1, 8), 1e-10).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let cfg = PressureConfig { bracket: Some((0.0, 0.3)), ..PressureConfig::cylinder_sum(1.0, 2, 6) };
        assert!(matches!(solve_root(&cfg, 1e-8), Err(Error::NoSignChange { .. })));
    }
}
