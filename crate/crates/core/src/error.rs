use thiserror::Error;

/// Errors raised by the library.
///
/// `Refused` is reserved for gates (enumeration budgets, lemma hypotheses):
/// the input is well formed but the requested computation is declined.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter { name: &'static str, constraint: String },
    #[error("refused by {gate}: {detail}")]
    Refused { gate: Gate, detail: String },
    #[error("no sign change on [{lo}, {hi}] (P(lo) = {p_lo}, P(hi) = {p_hi})")]
    NoSignChange { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },
}

/// The named gate behind a refusal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    WordBudget,
    WindowBudget,
    DigitBudget,
    LemmaHypothesis,
    DigitLowerBound,
    /// The pressure has no sign change on the root bracket.
    RootBracket,
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Gate::WordBudget => "word enumeration budget",
            Gate::WindowBudget => "evaluation window budget",
            Gate::DigitBudget => "digit size budget",
            Gate::LemmaHypothesis => "lemma hypothesis",
            Gate::DigitLowerBound => "digit lower bound (s_n >= n)",
            Gate::RootBracket => "root bracket",
        };
        f.write_str(s)
    }
}

impl Error {
    pub(crate) fn param(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter { name, constraint: constraint.into() }
    }

    pub(crate) fn refuse(gate: Gate, detail: impl Into<String>) -> Self {
        Error::Refused { gate, detail: detail.into() }
    }

    /// True for gate refusals (as opposed to malformed input).
    pub fn is_refusal(&self) -> bool {
        self.gate().is_some()
    }

    /// The gate behind a refusal.
    pub fn gate(&self) -> Option<Gate> {
        match self {
            Error::Refused { gate, .. } => Some(*gate),
            Error::NoSignChange { .. } => Some(Gate::RootBracket),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
