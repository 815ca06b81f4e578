//! One function per command: budget checks, the library call, and the
//! JSON/CSV shapes of the result.

use cfdim_core::constructions::{delete_pinned, generate, perturb, PinnedWord};
use cfdim_core::dimension::{
    cover_dimension, cv_gap, flww_dimension, lr_dimension, pressure, solve_root, ww_dimension, PressureConfig,
    PressureMethod,
};
use cfdim_core::growth::classify_sequence;
use cfdim_core::verify::{
    check_comparison, check_comparison_sides, check_deletion_inequality, check_interval_bounds, check_ratio_bounds,
    exhaustive_interval_bounds, exhaustive_ratio_bounds, random_pairs, to_csv, CheckReport, PairInstance,
    RandomPairConfig, SweepSummary,
};
use cfdim_core::{cf::Words, cylinder, Error, Gate, Word};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Budgets, ClassifyParams, ConstructParams, DimParams, PressureParams, Request, VerifyParams};
use crate::{Outcome, RunConfig, RunError};

type Res<T> = Result<T, RunError>;

fn refuse(gate: Gate, detail: String) -> RunError {
    RunError::Core(Error::Refused { gate, detail })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn csv_table<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub(crate) fn dispatch(cfg: &RunConfig) -> Res<Outcome> {
    let b = &cfg.budgets;
    match &cfg.request {
        Request::Classify(p) => classify(p, b),
        Request::Dim(p) => dim(p, b),
        Request::Construct(p) => construct(p, b),
        Request::Verify(p) => verify(p, b, cfg.seed),
        Request::Pressure(p) => pressure_values(p, b),
    }
}

/// The solver as the budgets allow it: cylinder depth capped by `max_depth`,
/// the word count by `max_words`.
fn budgeted(solver: &PressureConfig, b: &Budgets) -> Res<PressureConfig> {
    if solver.method == PressureMethod::CylinderSum && solver.depth > b.max_depth {
        return Err(refuse(Gate::WordBudget, format!("depth {} exceeds max_depth {}", solver.depth, b.max_depth)));
    }
    let mut c = solver.clone();
    c.max_words = c.max_words.min(b.max_words);
    Ok(c)
}

fn window_budget(points: u64, what: &str, b: &Budgets) -> Res<()> {
    if points > b.max_window {
        return Err(refuse(Gate::WindowBudget, format!("{what} spans {points} points (max_window {})", b.max_window)));
    }
    Ok(())
}

/// Up to 1000 indices spread geometrically over the window, ends included.
fn sample_indices(lo: u64, hi: u64) -> Vec<u64> {
    const POINTS: u32 = 1000;
    if hi - lo < POINTS as u64 {
        return (lo..=hi).collect();
    }
    let ratio = (hi as f64 / lo as f64).ln();
    let mut out: Vec<u64> = (0..POINTS)
        .map(|k| ((lo as f64) * (ratio * k as f64 / (POINTS - 1) as f64).exp()).round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.dedup();
    *out.last_mut().unwrap() = hi;
    out
}

fn classify(p: &ClassifyParams, b: &Budgets) -> Res<Outcome> {
    let (lo, hi) = p.window;
    window_budget(hi.saturating_sub(lo).saturating_add(1), "window", b)?;
    let mut solver = p.solver.clone();
    solver.solver = budgeted(&solver.solver, b)?;
    let (report, verdict) = classify_sequence(&p.sequence, p.window, p.hints.as_ref(), &solver)?;
    let mut rows = Vec::new();
    if lo >= 1 && lo < hi {
        for n in sample_indices(lo, hi) {
            rows.push((n, p.sequence.log_phi(n)?.ln_phi()));
        }
    }
    Ok(Outcome {
        result: json!({ "report": to_value(&report), "verdict": to_value(&verdict) }),
        csv: csv_table(&["n", "value"], rows),
    })
}

fn cover_words(words: &Option<Vec<Word>>, full: &Option<crate::config::FullCover>, b: &Budgets) -> Res<Vec<Word>> {
    match (words, full) {
        (Some(w), None) => Ok(w.clone()),
        (None, Some(f)) => {
            if f.len > b.max_depth as usize {
                return Err(refuse(Gate::WordBudget, format!("len {} exceeds max_depth {}", f.len, b.max_depth)));
            }
            let count = (f.max_digit as f64).powi(f.len as i32);
            if count > b.max_words as f64 {
                return Err(refuse(Gate::WordBudget, format!("{count} words exceeds max_words {}", b.max_words)));
            }
            Ok(Words::new(f.len, f.max_digit).map(|w| Word::from(w.as_slice())).collect())
        }
        _ => Err(RunError::Config("cover needs exactly one of `words` and `full`".into())),
    }
}

fn dim(p: &DimParams, b: &Budgets) -> Res<Outcome> {
    let est = match p {
        DimParams::SolveRoot { pressure, tol } => solve_root(&budgeted(pressure, b)?, *tol)?,
        DimParams::Ww { base, b: little_b, solver, tol } => ww_dimension(*base, *little_b, &budgeted(solver, b)?, *tol)?,
        DimParams::Flww { s, depth } => {
            window_budget(*depth, "depth", b)?;
            flww_dimension(s, *depth)?
        }
        DimParams::Lr { s, t, depth } => {
            window_budget(*depth, "depth", b)?;
            lr_dimension(s, t, *depth)?
        }
        DimParams::Cover { words, full, tol } => {
            let cover: Vec<_> = cover_words(words, full, b)?.iter().map(cylinder).collect();
            cover_dimension(&cover, *tol)?
        }
        DimParams::CvGap { alpha } => {
            let rows = alpha.iter().map(|&a| Ok((a, cv_gap(a)?))).collect::<Result<Vec<_>, Error>>()?;
            let values: Vec<Value> = rows.iter().map(|(a, v)| json!({ "alpha": a, "value": v })).collect();
            return Ok(Outcome { result: json!({ "values": values }), csv: csv_table(&["alpha", "value"], rows) });
        }
    };
    Ok(Outcome { csv: est.to_csv(), result: to_value(&est) })
}

fn pressure_values(p: &PressureParams, b: &Budgets) -> Res<Outcome> {
    let cfg = budgeted(&p.config, b)?;
    let rows = p.s.iter().map(|&s| Ok((s, pressure(s, &cfg)?))).collect::<Result<Vec<_>, Error>>()?;
    let values: Vec<Value> = rows.iter().map(|(s, v)| json!({ "s": s, "value": v })).collect();
    Ok(Outcome { result: json!({ "values": values }), csv: csv_table(&["s", "value"], rows) })
}

fn word_rows(w: &Word) -> Vec<(usize, String)> {
    w.digits().iter().enumerate().map(|(i, d)| (i + 1, d.to_string())).collect()
}

fn construct_word(spec: &cfdim_core::constructions::ConstructionSpec, n: usize, b: &Budgets) -> Res<PinnedWord> {
    window_budget(n as u64, "n", b)?;
    Ok(generate(spec, n, b.max_digit_bits)?)
}

fn construct(p: &ConstructParams, b: &Budgets) -> Res<Outcome> {
    let pw = construct_word(&p.spec, p.n, b)?;
    let mut result = json!({ "pinned_word": to_value(&pw) });
    if p.perturb {
        result["perturbed"] = to_value(&perturb(&pw.word)?);
    }
    if p.delete {
        result["deleted"] = to_value(&delete_pinned(&pw));
    }
    Ok(Outcome { result, csv: csv_table(&["n", "value"], word_rows(&pw.word)) })
}

fn single(r: CheckReport) -> Outcome {
    let csv = to_csv(std::slice::from_ref(&r));
    Outcome { result: to_value(&r), csv }
}

fn sweep(s: SweepSummary) -> Outcome {
    let listed: Vec<CheckReport> = s.failures.iter().chain(&s.edge_cases).cloned().collect();
    Outcome { csv: to_csv(&listed), result: to_value(&s) }
}

fn grid_budget(max_len: usize, max_digit: u32, pairs: bool, b: &Budgets) -> Res<()> {
    if max_len > b.max_depth as usize {
        return Err(refuse(Gate::WordBudget, format!("max_len {max_len} exceeds max_depth {}", b.max_depth)));
    }
    let per_word = if pairs { (max_digit as f64).powi(2) } else { max_digit as f64 };
    let count: f64 = (1..=max_len).map(|n| per_word.powi(n as i32)).sum();
    if count > b.max_words as f64 {
        return Err(refuse(Gate::WordBudget, format!("{count} instances exceeds max_words {}", b.max_words)));
    }
    Ok(())
}

fn verify(p: &VerifyParams, b: &Budgets, seed: u64) -> Res<Outcome> {
    Ok(match p {
        VerifyParams::RatioBounds { sigma, tau } => {
            single(check_ratio_bounds(&PairInstance::new(sigma.clone(), tau.clone())?)?)
        }
        VerifyParams::RatioBoundsExhaustive { max_len, max_digit } => {
            grid_budget(*max_len, *max_digit, true, b)?;
            sweep(exhaustive_ratio_bounds(*max_len, *max_digit)?)
        }
        VerifyParams::Comparison { sigma, tau, epsilon, psi } => {
            single(check_comparison(&PairInstance::new(sigma.clone(), tau.clone())?, *epsilon, *psi)?)
        }
        VerifyParams::ComparisonRandom { count, min_len, max_len, digit_max, t_max } => {
            window_budget(*count as u64, "count", b)?;
            let mut rc = RandomPairConfig::new(seed, *count);
            rc.min_len = min_len.unwrap_or(rc.min_len);
            rc.max_len = max_len.unwrap_or(rc.max_len);
            rc.digit_max = digit_max.unwrap_or(rc.digit_max);
            rc.t_max = t_max.unwrap_or(rc.t_max);
            let mut reports = Vec::new();
            for pair in random_pairs(&rc)? {
                reports.push(check_comparison(&pair.instance, pair.epsilon, pair.psi)?);
                reports.extend(check_comparison_sides(&pair.instance, pair.epsilon)?);
            }
            let failures = reports.iter().filter(|r| r.is_failure()).count();
            let gated = reports.iter().filter(|r| r.hypothesis_satisfied).count();
            let min_margin = reports
                .iter()
                .filter(|r| r.hypothesis_satisfied)
                .map(|r| r.margin.as_f64())
                .fold(f64::INFINITY, f64::min);
            Outcome {
                csv: to_csv(&reports),
                result: json!({
                    "instances": count,
                    "checks": reports.len(),
                    "hypothesis_satisfied": gated,
                    "failures": failures,
                    "min_margin": if min_margin.is_finite() { json!(min_margin) } else { Value::Null },
                    "reports": to_value(&reports),
                }),
            }
        }
        VerifyParams::IntervalBounds { word } => single(check_interval_bounds(word)?),
        VerifyParams::IntervalBoundsExhaustive { max_len, max_digit } => {
            grid_budget(*max_len, *max_digit, false, b)?;
            sweep(exhaustive_interval_bounds(*max_len, *max_digit)?)
        }
        VerifyParams::Deletion { spec, n, epsilon } => {
            let pw = construct_word(spec, *n, b)?;
            // q_n < prod (a_i + 1), so this bounds its size from above
            let bits: u64 = pw.word.digits().iter().map(|d| d.bits() + 1).sum();
            if bits > b.max_rational_bits {
                return Err(refuse(
                    Gate::DigitBudget,
                    format!("q_n may need {bits} bits (max_rational_bits {})", b.max_rational_bits),
                ));
            }
            single(check_deletion_inequality(&pw, *epsilon)?)
        }
    })
}
