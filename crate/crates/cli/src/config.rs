//! The run configuration: one JSON object, strictly parsed.
//!
//! ```json
//! {
//!   "command": "dim",
//!   "params": { "estimator": "solve_root", "pressure": { "B": 1, "M": 2, "depth": 16 } },
//!   "budgets": { "max_depth": 24 },
//!   "output": { "path": "e2.csv", "format": "csv" },
//!   "seed": 7
//! }
//! ```

use std::path::PathBuf;

use cfdim_core::constructions::ConstructionSpec;
use cfdim_core::dimension::{DigitBound, PressureConfig};
use cfdim_core::growth::{AsymptoticHints, ClassifyConfig, GrowthSequence};
use cfdim_core::{Limit, Word};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Classify,
    Dim,
    Construct,
    Verify,
    Pressure,
}

/// Resource limits applied before any module runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Deepest cylinder enumeration.
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    /// Words enumerated by a cylinder-sum table.
    #[serde(default = "default_max_words")]
    pub max_words: u64,
    /// Bits of the largest continuant put into an exact rational.
    #[serde(default = "default_max_rational_bits")]
    pub max_rational_bits: u64,
    /// Bits of a single generated digit.
    #[serde(default = "default_max_digit_bits")]
    pub max_digit_bits: u64,
    /// Points evaluated by a growth window or a ratio-formula evaluator.
    #[serde(default = "default_max_window")]
    pub max_window: u64,
}

fn default_max_depth() -> u32 {
    24
}
fn default_max_words() -> u64 {
    cfdim_core::dimension::DEFAULT_MAX_WORDS
}
fn default_max_rational_bits() -> u64 {
    cfdim_core::verify::MAX_RATIONAL_BITS
}
fn default_max_digit_bits() -> u64 {
    cfdim_core::constructions::DEFAULT_MAX_DIGIT_BITS
}
fn default_max_window() -> u64 {
    cfdim_core::growth::MAX_WINDOW_POINTS
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_depth: default_max_depth(),
            max_words: default_max_words(),
            max_rational_bits: default_max_rational_bits(),
            max_digit_bits: default_max_digit_bits(),
            max_window: default_max_window(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Where the report goes; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub sequence: GrowthSequence,
    pub window: (u64, u64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hints: Option<AsymptoticHints>,
    #[serde(default)]
    pub solver: ClassifyConfig,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullCover {
    pub len: usize,
    #[serde(rename = "M")]
    pub max_digit: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimParams {
    SolveRoot {
        pressure: PressureConfig,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Ww {
        #[serde(rename = "B")]
        base: Limit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Limit>,
        #[serde(default = "PressureConfig::full_alphabet")]
        solver: PressureConfig,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Flww {
        s: DigitBound,
        depth: u64,
    },
    Lr {
        s: DigitBound,
        t: DigitBound,
        depth: u64,
    },
    /// Either explicit `words` or the `full` cover of one length.
    Cover {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        words: Option<Vec<Word>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        full: Option<FullCover>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    CvGap {
        alpha: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructParams {
    pub spec: ConstructionSpec,
    pub n: usize,
    /// Also report the perturbed word.
    #[serde(default)]
    pub perturb: bool,
    /// Also report the word with pinned digits deleted.
    #[serde(default)]
    pub delete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifyParams {
    RatioBounds {
        sigma: Word,
        tau: Word,
    },
    RatioBoundsExhaustive {
        max_len: usize,
        max_digit: u32,
    },
    Comparison {
        sigma: Word,
        tau: Word,
        epsilon: f64,
        psi: f64,
    },
    /// Seeded instances tuned to pass the gate; the seed is the run seed.
    ComparisonRandom {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min_len: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_len: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digit_max: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_max: Option<usize>,
    },
    IntervalBounds {
        word: Word,
    },
    IntervalBoundsExhaustive {
        max_len: usize,
        max_digit: u32,
    },
    Deletion {
        spec: ConstructionSpec,
        n: usize,
        epsilon: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureParams {
    pub config: PressureConfig,
    pub s: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Request {
    Classify(ClassifyParams),
    Dim(DimParams),
    Construct(ConstructParams),
    Verify(VerifyParams),
    Pressure(PressureParams),
}

impl Request {
    pub fn name(&self) -> CommandName {
        match self {
            Request::Classify(_) => CommandName::Classify,
            Request::Dim(_) => CommandName::Dim,
            Request::Construct(_) => CommandName::Construct,
            Request::Verify(_) => CommandName::Verify,
            Request::Pressure(_) => CommandName::Pressure,
        }
    }
}

/// A parsed and validated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct RunConfig {
    pub request: Request,
    pub budgets: Budgets,
    pub output: Output,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    command: CommandName,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default)]
    budgets: Budgets,
    #[serde(default)]
    output: Output,
    #[serde(default)]
    seed: u64,
}

const TOP_LEVEL: [&str; 5] = ["command", "params", "budgets", "output", "seed"];

fn typed<T: DeserializeOwned>(what: &str, v: serde_json::Value) -> Result<T, String> {
    serde_json::from_value(v).map_err(|e| format!("{what}: {e}"))
}

impl TryFrom<RawConfig> for RunConfig {
    type Error = String;

    fn try_from(raw: RawConfig) -> Result<Self, String> {
        let params = if raw.params.is_null() { serde_json::json!({}) } else { raw.params };
        let request = match raw.command {
            CommandName::Classify => Request::Classify(typed("params", params)?),
            CommandName::Dim => Request::Dim(typed("params", params)?),
            CommandName::Construct => Request::Construct(typed("params", params)?),
            CommandName::Verify => Request::Verify(typed("params", params)?),
            CommandName::Pressure => Request::Pressure(typed("params", params)?),
        };
        let b = &raw.budgets;
        let zero: Vec<&str> = [
            ("max_depth", b.max_depth as u64),
            ("max_words", b.max_words),
            ("max_rational_bits", b.max_rational_bits),
            ("max_digit_bits", b.max_digit_bits),
            ("max_window", b.max_window),
        ]
        .into_iter()
        .filter(|(_, v)| *v == 0)
        .map(|(k, _)| k)
        .collect();
        if !zero.is_empty() {
            return Err(format!("budgets must be positive: {}", zero.join(", ")));
        }
        Ok(RunConfig { request, budgets: raw.budgets, output: raw.output, seed: raw.seed })
    }
}

impl From<RunConfig> for RawConfig {
    fn from(c: RunConfig) -> Self {
        let params = match &c.request {
            Request::Classify(p) => serde_json::to_value(p),
            Request::Dim(p) => serde_json::to_value(p),
            Request::Construct(p) => serde_json::to_value(p),
            Request::Verify(p) => serde_json::to_value(p),
            Request::Pressure(p) => serde_json::to_value(p),
        }
        .expect("params serialize");
        RawConfig { command: c.request.name(), params, budgets: c.budgets, output: c.output, seed: c.seed }
    }
}

impl RunConfig {
    /// Parse a config document. Unknown top-level keys are all listed at
    /// once; nested objects stop at the first offending field.
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| RunError::Config(format!("not JSON: {e}")))?;
        let obj = v.as_object().ok_or_else(|| RunError::Config("config must be a JSON object".into()))?;
        let unknown: Vec<&str> = obj.keys().map(String::as_str).filter(|k| !TOP_LEVEL.contains(k)).collect();
        if !unknown.is_empty() {
            return Err(RunError::Config(format!(
                "unknown field(s) {}; expected {}",
                unknown.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", "),
                TOP_LEVEL.join(", ")
            )));
        }
        serde_json::from_value(v).map_err(|e| RunError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(r#"{"command":"dim","params":{"estimator":"cv_gap","alpha":[0,1]}}"#).unwrap();
        assert_eq!(c.budgets, Budgets::default());
        assert_eq!(c.output, Output::default());
        assert_eq!(c.seed, 0);
        assert_eq!(c.request, Request::Dim(DimParams::CvGap { alpha: vec![0.0, 1.0] }));
    }

    #[test]
    fn unknown_top_level_fields_are_listed() {
        let e = RunConfig::from_json(r#"{"command":"dim","params":{},"sed":1,"outptu":{}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("`sed`") && msg.contains("`outptu`"), "{msg}");
    }

    #[test]
    fn nested_unknown_fields_are_named() {
        let e = RunConfig::from_json(r#"{"command":"dim","params":{"estimator":"cv_gap","alpha":[0],"beta":1}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("beta"), "{e}");
        let e = RunConfig::from_json(r#"{"command":"dim","params":{"estimator":"cv_gap","alpha":[0]},"budgets":{"max_dpth":3}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("max_dpth"), "{e}");
    }

    #[test]
    fn budgets_must_be_positive() {
        let e = RunConfig::from_json(
            r#"{"command":"dim","params":{"estimator":"cv_gap","alpha":[0]},"budgets":{"max_depth":0,"max_window":0}}"#,
        )
        .unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("max_depth") && msg.contains("max_window"), "{msg}");
    }

    #[test]
    fn round_trips() {
        let text = r#"{"command":"verify","params":{"check":"comparison_random","count":10},"seed":42,
                       "output":{"path":"out.csv","format":"csv"}}"#;
        let c = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
