//! Growth sequences `phi(n)`, their window exponents, and the
//! necessary-condition classifier for full-dimensional level sets
//! `E_{phi(n)} = {x : s_n(x)/phi(n) -> 1}`.
//!
//! Sequences are evaluated in log space. A [`LogPhi`] keeps the dominant part
//! of `ln phi(n)` and a small correction apart, so the correction survives
//! even when the dominant part is enormous, and carries `ln` of the dominant
//! part so `ln ln phi(n)` stays finite after `ln phi(n)` itself overflows.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dimension::{self, PressureConfig};
use crate::error::{Error, Gate, Result};
use crate::limit::Limit;

/// Points evaluated by one [`growth_exponents`] call, at most.
pub const MAX_WINDOW_POINTS: u64 = 50_000_000;

/// Below this, an extrapolated `liminf log phi(n)/n` counts as zero.
pub const ZERO_RATE_TOL: f64 = 1e-3;

/// Per-bin growth factor of `sup phi(n)/n` that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `alpha * n`
    Linear { alpha: f64 },
    /// `alpha * n * max(1, ln n)`
    NLogN { alpha: f64 },
    /// `e^{n_k^beta} + n - n_k` for `n_k <= n < n_{k+1}`, `n_k = k^N`
    Theorem2 {
        beta: f64,
        #[serde(rename = "N")]
        n_exp: u32,
    },
    /// `alpha * n + (l-1)^l` for `(l-1)^{l-1} <= n < l^l`
    Irregular { alpha: f64 },
    /// `sum_{k<=n} c^{b^k}`
    DoubleExpSum { b: f64, c: f64 },
    /// `1 + int_3^{max(n,3)} x / ln ln x dx`
    MaxDigitIntegral {},
    /// Tabulated values for `n = 1..=len`, given either directly or as logs.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_values: Option<Vec<f64>>,
    },
}

/// `ln phi(n) = lead + tail`, with `ln_lead = ln(lead)` kept separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPhi {
    pub lead: f64,
    pub tail: f64,
    pub ln_lead: f64,
}

impl LogPhi {
    fn plain(v: f64) -> Self {
        LogPhi { lead: v, tail: 0.0, ln_lead: v.ln() }
    }

    pub fn ln_phi(&self) -> f64 {
        self.lead + self.tail
    }

    /// `ln ln phi(n)`; NaN when `phi(n) <= 1`.
    pub fn ln_ln_phi(&self) -> f64 {
        let v = self.lead + self.tail;
        if v.is_finite() {
            v.ln()
        } else {
            self.ln_lead + (self.tail / self.lead).ln_1p()
        }
    }
}

/// A validated growth sequence, optionally multiplied by a positive constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct GrowthSequence {
    family: Family,
    scale: f64,
    // Table values normalized to logs.
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    family: String,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
}

impl TryFrom<RawSequence> for GrowthSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        let params = if raw.params.is_null() { serde_json::json!({}) } else { raw.params };
        let tagged = serde_json::json!({ "family": raw.family, "params": params });
        let family: Family = serde_json::from_value(tagged)
            .map_err(|e| Error::InvalidInput(format!("growth family: {e}")))?;
        let seq = make_phi(family)?;
        match raw.scale {
            Some(c) => seq.scaled(c),
            None => Ok(seq),
        }
    }
}

impl From<GrowthSequence> for RawSequence {
    fn from(seq: GrowthSequence) -> Self {
        let v = serde_json::to_value(&seq.family).expect("family serializes");
        RawSequence {
            family: v["family"].as_str().unwrap_or_default().to_string(),
            params: v.get("params").cloned().unwrap_or(serde_json::Value::Null),
            scale: (seq.scale != 1.0).then_some(seq.scale),
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param(name, format!("must be a finite number > 0, got {v}")));
    }
    Ok(())
}

/// Validate family parameters and build the sequence.
pub fn make_phi(family: Family) -> Result<GrowthSequence> {
    let mut table = Vec::new();
    match &family {
        Family::Linear { alpha } | Family::NLogN { alpha } | Family::Irregular { alpha } => positive("alpha", *alpha)?,
        Family::Theorem2 { beta, n_exp } => {
            if !(0.0..1.0).contains(beta) {
                return Err(Error::param("beta", format!("must lie in [0, 1), got {beta}")));
            }
            if *n_exp < 1 {
                return Err(Error::param("N", "must be an integer >= 1"));
            }
        }
        Family::DoubleExpSum { b, c } => {
            for (name, v) in [("b", *b), ("c", *c)] {
                if !(v.is_finite() && v > 1.0) {
                    return Err(Error::param(name, format!("must be > 1, got {v}")));
                }
            }
        }
        Family::MaxDigitIntegral {} => {}
        Family::Table { values, log_values } => {
            table = match (values, log_values) {
                (Some(v), None) => {
                    if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                        return Err(Error::param("values", format!("entry {} is not a finite positive number", i + 1)));
                    }
                    v.iter().map(|x| x.ln()).collect()
                }
                (None, Some(l)) => {
                    if let Some(i) = l.iter().position(|x| !x.is_finite()) {
                        return Err(Error::param("log_values", format!("entry {} is not finite", i + 1)));
                    }
                    l.clone()
                }
                _ => return Err(Error::param("values", "give exactly one of `values` or `log_values`")),
            };
            if table.is_empty() {
                return Err(Error::param("values", "table is empty"));
            }
            if let Some(i) = table.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::param(
                    "values",
                    format!("table is not non-decreasing: phi({}) < phi({})", i + 2, i + 1),
                ));
            }
        }
    }
    Ok(GrowthSequence { family, scale: 1.0, table })
}

impl GrowthSequence {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `c * phi(n)`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        positive("scale", c)?;
        let mut s = self.clone();
        s.scale *= c;
        Ok(s)
    }

    /// Largest `n` the sequence is defined for.
    pub fn max_index(&self) -> u64 {
        match self.family {
            Family::Table { .. } => self.table.len() as u64,
            _ => u64::MAX,
        }
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidInput("sequences are indexed from n = 1".into()));
        }
        if n > self.max_index() {
            return Err(Error::InvalidInput(format!("n = {n} beyond the table (length {})", self.max_index())));
        }
        Ok(())
    }

    pub fn log_phi(&self, n: u64) -> Result<LogPhi> {
        self.check_index(n)?;
        let mut lp = match &self.family {
            Family::Linear { alpha } => LogPhi::plain(alpha.ln() + (n as f64).ln()),
            Family::NLogN { alpha } => {
                let x = n as f64;
                LogPhi::plain(alpha.ln() + x.ln() + x.ln().max(1.0).ln())
            }
            Family::Theorem2 { beta, n_exp } => theorem2_log(n, *beta, *n_exp),
            Family::Irregular { alpha } => {
                let (l, _) = irregular_piece(n);
                let lift = ((l - 1) as f64).powi(l as i32);
                LogPhi::plain((alpha * n as f64 + lift).ln())
            }
            Family::DoubleExpSum { b, c } => double_exp_log(n, *b, *c),
            Family::MaxDigitIntegral {} => LogPhi::plain(max_digit_phi(n).ln()),
            Family::Table { .. } => LogPhi::plain(self.table[(n - 1) as usize]),
        };
        if self.scale != 1.0 {
            lp.tail += self.scale.ln();
        }
        Ok(lp)
    }

    /// `log_phi` over `lo..=hi`; the integral family is accumulated
    /// incrementally instead of re-integrating from 3 at every point.
    pub fn log_phi_range(&self, lo: u64, hi: u64) -> Result<Vec<LogPhi>> {
        self.check_index(lo)?;
        self.check_index(hi)?;
        if let Family::MaxDigitIntegral {} = self.family {
            let mut out = Vec::with_capacity((hi - lo + 1) as usize);
            let mut phi = max_digit_phi(lo);
            for n in lo..=hi {
                if n > lo && n > 3 {
                    phi += unit_step(n);
                }
                let mut lp = LogPhi::plain(phi.ln());
                lp.tail += self.scale.ln();
                out.push(lp);
            }
            return Ok(out);
        }
        (lo..=hi).map(|n| self.log_phi(n)).collect()
    }

    /// `phi(n)` as an exact integer, when the family makes that meaningful
    /// and the value stays under `max_bits`.
    pub fn exact(&self, n: u64, max_bits: u64) -> Option<BigUint> {
        if n == 0 || n > self.max_index() || self.scale != 1.0 {
            return None;
        }
        let int = |v: f64| (v.fract() == 0.0 && v > 0.0 && v < 9.0e15).then(|| v as u64);
        match &self.family {
            Family::Linear { alpha } => int(*alpha).map(|a| BigUint::from(a) * n),
            Family::Irregular { alpha } => {
                let a = int(*alpha)?;
                let (l, _) = irregular_piece(n);
                Some(BigUint::from(a) * n + BigUint::from(l - 1).pow(l as u32))
            }
            Family::DoubleExpSum { b, c } => {
                let (b, c) = (int(*b)?, int(*c)?);
                let top_bits = (b as f64).powf(n as f64) * (c as f64).log2();
                if !(top_bits.is_finite() && top_bits + 8.0 <= max_bits as f64) {
                    return None;
                }
                let c = BigUint::from(c);
                let mut sum = BigUint::zero();
                let mut e = BigUint::from(1u32);
                for _ in 1..=n {
                    e *= b;
                    sum += c.pow(e.to_u32()?);
                }
                Some(sum)
            }
            _ => None,
        }
    }

    /// First `n` in `lo..hi` with `phi(n+1) < phi(n)`, if any.
    pub fn first_decrease(&self, lo: u64, hi: u64) -> Result<Option<u64>> {
        let v = self.log_phi_range(lo, hi)?;
        Ok(v.windows(2).position(|w| w[1].ln_phi() < w[0].ln_phi()).map(|i| lo + i as u64))
    }

    /// Closed-form limits for the tagged families.
    pub fn known_limits(&self) -> Option<AsymptoticHints> {
        let zero = Some(Limit::Finite(0.0));
        let inf = Some(Limit::Infinite);
        let mut h = match &self.family {
            Family::Linear { alpha } => AsymptoticHints {
                limsup_phi_over_n: Some(Limit::Finite(*alpha)),
                liminf_log_phi_over_n: zero,
                liminf_loglog_phi_over_n: None,
                limsup_loglog_phi_over_log_n: zero,
            },
            Family::NLogN { .. } | Family::Irregular { .. } | Family::MaxDigitIntegral {} => AsymptoticHints {
                limsup_phi_over_n: inf,
                liminf_log_phi_over_n: zero,
                liminf_loglog_phi_over_n: None,
                limsup_loglog_phi_over_log_n: zero,
            },
            Family::Theorem2 { beta, n_exp } => {
                // beta = 0 degenerates to e + n - n_k: phi(n)/n stays bounded.
                let sup = if *beta > 0.0 {
                    Limit::Infinite
                } else if *n_exp == 1 {
                    Limit::Finite(0.0)
                } else {
                    Limit::Finite(1.0)
                };
                AsymptoticHints {
                    limsup_phi_over_n: Some(sup),
                    liminf_log_phi_over_n: zero,
                    liminf_loglog_phi_over_n: None,
                    limsup_loglog_phi_over_log_n: Some(Limit::Finite(*beta)),
                }
            }
            Family::DoubleExpSum { b, .. } => AsymptoticHints {
                limsup_phi_over_n: inf,
                liminf_log_phi_over_n: inf,
                liminf_loglog_phi_over_n: Some(Limit::Finite(b.ln())),
                limsup_loglog_phi_over_log_n: inf,
            },
            Family::Table { .. } => return None,
        };
        if let Some(Limit::Finite(v)) = h.limsup_phi_over_n.as_mut() {
            *v *= self.scale;
        }
        Some(h)
    }
}

fn theorem2_log(n: u64, beta: f64, n_exp: u32) -> LogPhi {
    let k = n.nth_root(n_exp);
    let nk = k.pow(n_exp);
    let ln_nk = (nk as f64).ln();
    let lead = (beta * ln_nk).exp();
    // ln(e^{lead} + (n - n_k)) = lead + ln(1 + (n - n_k) e^{-lead})
    let tail = ((n - nk) as f64 * (-lead).exp()).ln_1p();
    LogPhi { lead, tail, ln_lead: beta * ln_nk }
}

/// `(l, l^l)` with `(l-1)^{l-1} <= n < l^l`, `l >= 2`.
fn irregular_piece(n: u64) -> (u64, u128) {
    let mut l = 2u64;
    loop {
        let ll = (l as u128).pow(l as u32);
        if (n as u128) < ll {
            return (l, ll);
        }
        l += 1;
    }
}

fn double_exp_log(n: u64, b: f64, c: f64) -> LogPhi {
    let (lb, lc) = (b.ln(), c.ln());
    let ln_lead = n as f64 * lb + lc.ln();
    let lead = b.powf(n as f64) * lc;
    // sum_{k<n} c^{b^k - b^n}, largest terms first
    let mut overhead = 0.0f64;
    if lead.is_finite() {
        for k in (1..n).rev() {
            let gap = (k as f64 * lb).exp() * (((n - k) as f64) * lb).exp_m1();
            let term = (-gap * lc).exp();
            if term == 0.0 || term < overhead * 1e-18 {
                break;
            }
            overhead += term;
        }
    }
    LogPhi { lead, tail: overhead.ln_1p(), ln_lead }
}

fn integrand(x: f64) -> f64 {
    x / x.ln().ln()
}

/// `int_a^b x / ln ln x dx` on `[a, b] ⊂ [3, inf)`, split geometrically.
fn integral(a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo * 2.0).min(b);
        let scale = integrand(hi) * (hi - lo);
        total += quadrature::integrate(integrand, lo, hi, 1e-14 * scale.max(1e-300)).integral;
        lo = hi;
    }
    total
}

/// `int_{n-1}^n x / ln ln x dx`. Away from the singularity at `e` a 5-point
/// Gauss-Legendre rule is already at rounding level.
fn unit_step(n: u64) -> f64 {
    if n < 64 {
        return integral(((n - 1) as f64).max(3.0), n as f64);
    }
    const NODES: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let mid = n as f64 - 0.5;
    NODES.iter().zip(WEIGHTS).map(|(t, w)| w * integrand(mid + 0.5 * t)).sum::<f64>() * 0.5
}

fn max_digit_phi(n: u64) -> f64 {
    1.0 + integral(3.0, (n as f64).max(3.0))
}

/// An extremum over the window and where it was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub at: u64,
}

impl Extremum {
    fn max(slot: &mut Option<Extremum>, value: f64, at: u64) {
        if value.is_nan() {
            return;
        }
        match slot {
            Some(e) if e.value >= value => {}
            _ => *slot = Some(Extremum { value, at }),
        }
    }

    fn min(slot: &mut Option<Extremum>, value: f64, at: u64) {
        if value.is_nan() {
            return;
        }
        match slot {
            Some(e) if e.value <= value => {}
            _ => *slot = Some(Extremum { value, at }),
        }
    }
}

/// Extrema over one trend bin `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendBin {
    pub lo: u64,
    pub hi: u64,
    /// `ln sup phi(n)/n`; the log keeps exponential families finite.
    pub ln_sup_phi_over_n: Extremum,
    pub inf_log_phi_over_n: Extremum,
    pub inf_loglog_phi_over_n: Option<Extremum>,
    pub sup_loglog_phi_over_log_n: Option<Extremum>,
}

/// Window extrema of `phi(n)/n`, `ln phi(n)/n` and `ln ln phi(n)/ln n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub window: (u64, u64),
    pub ln_sup_phi_over_n: Extremum,
    pub inf_log_phi_over_n: Extremum,
    /// `None` when `phi(n) <= 1` on the whole window (or the window is `{1}`).
    pub sup_loglog_phi_over_log_n: Option<Extremum>,
    pub trend: Vec<TrendBin>,
}

impl ExponentReport {
    /// `sup phi(n)/n` (may overflow to `inf` for fast families).
    pub fn sup_phi_over_n(&self) -> f64 {
        self.ln_sup_phi_over_n.value.exp()
    }
}

/// Bin edges: decades when the window spans at least two of them,
/// otherwise four geometric bins. A short trailing bin is merged into its
/// predecessor so every bin carries comparable weight.
fn trend_edges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let span = hi as f64 / lo as f64;
    let decades = span >= 100.0;
    let ratio = if decades { 10.0 } else { span.powf(0.25).max(1.0 + 1e-9) };
    let mut edges: Vec<(u64, u64)> = Vec::new();
    let mut start = lo;
    let mut bound = if decades {
        10f64.powi((lo as f64).log10().floor() as i32 + 1)
    } else {
        lo as f64 * ratio
    };
    while start <= hi {
        let end = ((bound.ceil() as u64).saturating_sub(1)).max(start).min(hi);
        edges.push((start, end));
        start = end + 1;
        bound *= ratio;
    }
    if edges.len() >= 2 {
        let (a, b) = edges[edges.len() - 1];
        if (b as f64 / a as f64) < ratio.sqrt() {
            edges.pop();
            edges.last_mut().unwrap().1 = b;
        }
    }
    edges
}

/// Window extrema and per-bin trend of the three growth exponents.
pub fn growth_exponents(seq: &GrowthSequence, n_lo: u64, n_hi: u64) -> Result<ExponentReport> {
    if n_lo < 1 || n_lo >= n_hi {
        return Err(Error::InvalidInput(format!("window must satisfy 1 <= n_lo < n_hi, got ({n_lo}, {n_hi})")));
    }
    if n_hi - n_lo + 1 > MAX_WINDOW_POINTS {
        return Err(Error::refuse(
            Gate::WindowBudget,
            format!("window has {} points (limit {MAX_WINDOW_POINTS})", n_hi - n_lo + 1),
        ));
    }
    let mut trend = Vec::new();
    let (mut g_sup, mut g_inf, mut g_ll) = (None, None, None);
    for (lo, hi) in trend_edges(n_lo, n_hi) {
        let vals = seq.log_phi_range(lo, hi)?;
        let (mut sup, mut inf, mut inf_ll, mut sup_ll) = (None, None, None, None);
        for (n, lp) in (lo..=hi).zip(&vals) {
            let ln_n = (n as f64).ln();
            let l = lp.ln_phi();
            Extremum::max(&mut sup, l - ln_n, n);
            Extremum::min(&mut inf, l / n as f64, n);
            let ll = lp.ln_ln_phi();
            if ll.is_finite() {
                Extremum::min(&mut inf_ll, ll / n as f64, n);
                if n >= 2 {
                    Extremum::max(&mut sup_ll, ll / ln_n, n);
                }
            }
        }
        let (sup, inf) = (sup.expect("bin is non-empty"), inf.expect("bin is non-empty"));
        Extremum::max(&mut g_sup, sup.value, sup.at);
        Extremum::min(&mut g_inf, inf.value, inf.at);
        if let Some(e) = sup_ll {
            Extremum::max(&mut g_ll, e.value, e.at);
        }
        trend.push(TrendBin {
            lo,
            hi,
            ln_sup_phi_over_n: sup,
            inf_log_phi_over_n: inf,
            inf_loglog_phi_over_n: inf_ll,
            sup_loglog_phi_over_log_n: sup_ll,
        });
    }
    Ok(ExponentReport {
        window: (n_lo, n_hi),
        ln_sup_phi_over_n: g_sup.expect("window is non-empty"),
        inf_log_phi_over_n: g_inf.expect("window is non-empty"),
        sup_loglog_phi_over_log_n: g_ll,
        trend,
    })
}

/// Asserted limits of the growth exponents. Any field may be left open.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticHints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limsup_phi_over_n: Option<Limit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liminf_log_phi_over_n: Option<Limit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liminf_loglog_phi_over_n: Option<Limit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limsup_loglog_phi_over_log_n: Option<Limit>,
}

impl AsymptoticHints {
    fn is_empty(&self) -> bool {
        *self == AsymptoticHints::default()
    }

    /// Reject hint sets no non-decreasing positive sequence can satisfy.
    pub fn check_consistent(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("contradictory hints: {msg}")));
        for (name, v) in [
            ("limsup_phi_over_n", self.limsup_phi_over_n),
            ("liminf_log_phi_over_n", self.liminf_log_phi_over_n),
            ("liminf_loglog_phi_over_n", self.liminf_loglog_phi_over_n),
            ("limsup_loglog_phi_over_log_n", self.limsup_loglog_phi_over_log_n),
        ] {
            if let Some(Limit::Finite(x)) = v {
                if x.is_nan() || (name != "limsup_loglog_phi_over_log_n" && x < 0.0) {
                    return bad(format!("{name} = {x} is not a valid limit"));
                }
            }
        }
        let rate_positive = self.liminf_log_phi_over_n.is_some_and(|l| l.is_positive(0.0));
        if let (Some(Limit::Finite(a)), true) = (self.limsup_phi_over_n, rate_positive) {
            return bad(format!(
                "limsup phi(n)/n = {a} is finite but liminf log phi(n)/n > 0 forces phi(n)/n -> inf"
            ));
        }
        if let (Some(Limit::Finite(r)), Some(b)) = (self.liminf_log_phi_over_n, self.liminf_loglog_phi_over_n) {
            if b.is_positive(0.0) {
                return bad(format!(
                    "liminf loglog phi(n)/n = {b} > 0 forces liminf log phi(n)/n = inf, not {r}"
                ));
            }
        }
        if let (Some(Limit::Finite(e)), true) = (self.limsup_loglog_phi_over_log_n, rate_positive) {
            if e < 1.0 {
                return bad(format!(
                    "exponential growth forces limsup loglog phi(n)/log n >= 1, not {e}"
                ));
            }
        }
        Ok(())
    }

    /// Field-wise merge; a field set in both must agree.
    pub fn merge(&self, other: &AsymptoticHints) -> Result<AsymptoticHints> {
        fn pick(name: &str, a: Option<Limit>, b: Option<Limit>) -> Result<Option<Limit>> {
            match (a, b) {
                (Some(x), Some(y)) => {
                    let same = match (x, y) {
                        (Limit::Finite(p), Limit::Finite(q)) => (p - q).abs() <= 1e-12 * p.abs().max(1.0),
                        (Limit::Infinite, Limit::Infinite) => true,
                        _ => false,
                    };
                    if same {
                        Ok(Some(x))
                    } else {
                        Err(Error::InvalidInput(format!("contradictory hints: {name} given as {x} and {y}")))
                    }
                }
                (x, y) => Ok(x.or(y)),
            }
        }
        Ok(AsymptoticHints {
            limsup_phi_over_n: pick("limsup_phi_over_n", self.limsup_phi_over_n, other.limsup_phi_over_n)?,
            liminf_log_phi_over_n: pick("liminf_log_phi_over_n", self.liminf_log_phi_over_n, other.liminf_log_phi_over_n)?,
            liminf_loglog_phi_over_n: pick(
                "liminf_loglog_phi_over_n",
                self.liminf_loglog_phi_over_n,
                other.liminf_loglog_phi_over_n,
            )?,
            limsup_loglog_phi_over_log_n: pick(
                "limsup_loglog_phi_over_log_n",
                self.limsup_loglog_phi_over_log_n,
                other.limsup_loglog_phi_over_log_n,
            )?,
        })
    }
}

fn aitken(x0: f64, x1: f64, x2: f64) -> Option<f64> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let den = d2 - d1;
    if den.abs() <= 1e-300 || !den.is_finite() {
        return None;
    }
    let v = x2 - d2 * d2 / den;
    v.is_finite().then_some(v)
}

impl ExponentReport {
    /// Limits suggested by the per-bin trend. Never certified.
    pub fn trend_limits(&self) -> AsymptoticHints {
        let t = &self.trend;
        let last = t.last().expect("report has bins");

        // limsup phi/n: diverging when the bin supremum keeps growing by a fixed factor
        let sups: Vec<f64> = t.iter().map(|b| b.ln_sup_phi_over_n.value).collect();
        let growing = sups.len() >= 3
            && sups[sups.len() - 3..].windows(2).all(|w| w[1] - w[0] > DIVERGENCE_FACTOR.ln());
        let limsup = if growing { Limit::Infinite } else { Limit::Finite(last.ln_sup_phi_over_n.value.exp()) };

        let rates: Vec<f64> = t.iter().map(|b| b.inf_log_phi_over_n.value).collect();
        let rate_growing = rates.len() >= 3
            && rates[rates.len() - 3..].windows(2).all(|w| w[0] > 0.0 && w[1] / w[0] > DIVERGENCE_FACTOR);
        let rate = if rate_growing {
            Limit::Infinite
        } else {
            let v = match rates.len() {
                n if n >= 3 => aitken(rates[n - 3], rates[n - 2], rates[n - 1]).unwrap_or(rates[n - 1]),
                n => rates[n - 1],
            };
            // the extrapolation may undershoot a decaying sequence
            Limit::Finite(v.clamp(0.0, rates[rates.len() - 1].max(0.0)))
        };

        let loglog_rate = last.inf_loglog_phi_over_n.map(|e| Limit::Finite(e.value.max(0.0)));
        let exponent = last.sup_loglog_phi_over_log_n.map(|e| Limit::Finite(e.value));
        AsymptoticHints {
            limsup_phi_over_n: Some(limsup),
            liminf_log_phi_over_n: Some(rate),
            liminf_loglog_phi_over_n: if rate.is_infinite() { loglog_rate } else { None },
            limsup_loglog_phi_over_log_n: exponent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    RuledOutSublinear,
    RuledOutSuperexponential,
    PassesNecessary,
    UpperBounded,
}

/// Where the limits behind a verdict came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitBasis {
    /// Every limit used was asserted (family closed form or user hint).
    Asserted,
    /// At least one limit came from window-trend extrapolation.
    WindowTrend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierVerdict {
    pub status: VerdictStatus,
    pub cited_rule: String,
    pub dimension_upper_bound: Option<f64>,
    pub certified: bool,
    pub basis: LimitBasis,
    pub limits: AsymptoticHints,
    /// `limsup loglog phi(n)/log n` and whether it is below 1/2.
    pub loglog_exponent: Option<Limit>,
    pub loglog_exponent_below_half: Option<bool>,
}

/// Solver used for the `s_B` bound of the superexponential case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default = "PressureConfig::full_alphabet")]
    pub solver: PressureConfig,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { solver: PressureConfig::full_alphabet(), tol: default_tol() }
    }
}

const RULE_SUBLINEAR: &str =
    "sublinear_limsup: full dimension needs limsup phi(n)/n = inf; a finite limsup alpha puts E_phi inside F_alpha, whose dimension is bounded away from 1";
const RULE_SUPEREXPONENTIAL: &str =
    "superexponential_liminf: full dimension needs liminf log phi(n)/n = 0; with liminf log phi(n)/n = log B > 0, E_phi lies in {a_n >= B^n i.o.}, of dimension s_B (1/(1+b) when B = inf)";
const RULE_PASS: &str =
    "necessary_conditions_hold: limsup phi(n)/n = inf and liminf log phi(n)/n = 0; sufficiency is not claimed";

/// Apply the necessary conditions for `dim_H E_phi = 1`.
///
/// `hints` are asserted limits (family closed forms and/or user input).
/// Fields they leave open are filled from the report's trend, which makes
/// the verdict uncertified.
pub fn classify_necessary(
    report: &ExponentReport,
    hints: Option<&AsymptoticHints>,
    cfg: &ClassifyConfig,
) -> Result<ClassifierVerdict> {
    let asserted = hints.copied().unwrap_or_default();
    asserted.check_consistent()?;
    let trend = report.trend_limits();

    let mut from_trend = false;
    let mut take = |a: Option<Limit>, t: Option<Limit>| -> Option<Limit> {
        if a.is_some() {
            a
        } else {
            from_trend |= t.is_some();
            t
        }
    };
    let limsup = take(asserted.limsup_phi_over_n, trend.limsup_phi_over_n).expect("trend always sets it");
    let mut limits = AsymptoticHints { limsup_phi_over_n: Some(limsup), ..asserted };

    let verdict = |status, rule: &str, bound, limits: AsymptoticHints, trend_used: bool| {
        let exponent = limits.limsup_loglog_phi_over_log_n;
        ClassifierVerdict {
            status,
            cited_rule: rule.to_string(),
            dimension_upper_bound: bound,
            certified: !trend_used,
            basis: if trend_used { LimitBasis::WindowTrend } else { LimitBasis::Asserted },
            limits,
            loglog_exponent: exponent,
            loglog_exponent_below_half: exponent.map(|e| e.as_f64() < 0.5),
        }
    };

    if !limsup.is_infinite() {
        return Ok(verdict(VerdictStatus::RuledOutSublinear, RULE_SUBLINEAR, None, limits, from_trend));
    }

    let rate = take(asserted.liminf_log_phi_over_n, trend.liminf_log_phi_over_n).expect("trend always sets it");
    limits.liminf_log_phi_over_n = Some(rate);
    // the loglog exponent is reported only; it never decides the status
    limits.limsup_loglog_phi_over_log_n = asserted.limsup_loglog_phi_over_log_n.or(trend.limsup_loglog_phi_over_log_n);

    if rate.is_positive(ZERO_RATE_TOL) {
        let bound = match rate {
            Limit::Finite(log_b) => {
                let b = log_b.exp();
                dimension::ww_dimension(Limit::Finite(b), None, &cfg.solver, cfg.tol)?.value
            }
            Limit::Infinite => {
                let lb = take(asserted.liminf_loglog_phi_over_n, trend.liminf_loglog_phi_over_n)
                    .unwrap_or(Limit::Finite(0.0));
                limits.liminf_loglog_phi_over_n = Some(lb);
                let little_b = match lb {
                    Limit::Finite(v) => Limit::Finite(v.exp()),
                    Limit::Infinite => Limit::Infinite,
                };
                dimension::ww_dimension(Limit::Infinite, Some(little_b), &cfg.solver, cfg.tol)?.value
            }
        };
        let status = if from_trend { VerdictStatus::UpperBounded } else { VerdictStatus::RuledOutSuperexponential };
        return Ok(verdict(status, RULE_SUPEREXPONENTIAL, Some(bound), limits, from_trend));
    }
    Ok(verdict(VerdictStatus::PassesNecessary, RULE_PASS, None, limits, from_trend))
}

/// Evaluate, then classify with the family's closed-form limits merged with
/// any user hints.
pub fn classify_sequence(
    seq: &GrowthSequence,
    window: (u64, u64),
    user_hints: Option<&AsymptoticHints>,
    cfg: &ClassifyConfig,
) -> Result<(ExponentReport, ClassifierVerdict)> {
    let report = growth_exponents(seq, window.0, window.1)?;
    let family = seq.known_limits().unwrap_or_default();
    let hints = match user_hints {
        Some(u) => family.merge(u)?,
        None => family,
    };
    let verdict = classify_necessary(&report, (!hints.is_empty()).then_some(&hints), cfg)?;
    Ok((report, verdict))
}
