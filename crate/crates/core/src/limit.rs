use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A limit value on the extended half-line: finite, or `+inf`.
///
/// JSON form: a number, or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Limit {
    Finite(f64),
    Infinite,
}

impl Limit {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Limit::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(*v),
            Limit::Infinite => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Strictly positive (including `+inf`).
    pub fn is_positive(&self, zero_tol: f64) -> bool {
        match self {
            Limit::Finite(v) => *v > zero_tol,
            Limit::Infinite => true,
        }
    }
}

impl From<f64> for Limit {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Limit::Infinite
        } else {
            Limit::Finite(v)
        }
    }
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v}"),
            Limit::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Limit::Finite(v) => s.serialize_f64(*v),
            Limit::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Limit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() => Ok(Limit::Finite(v)),
            Raw::Num(_) => Err(serde::de::Error::custom("non-finite number; use \"inf\"")),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "+inf") => Ok(Limit::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        assert_eq!(serde_json::from_str::<Limit>("2.5").unwrap(), Limit::Finite(2.5));
        assert_eq!(serde_json::from_str::<Limit>("\"inf\"").unwrap(), Limit::Infinite);
        assert!(serde_json::from_str::<Limit>("\"big\"").is_err());
        assert_eq!(serde_json::to_string(&Limit::Infinite).unwrap(), "\"inf\"");
    }
}
