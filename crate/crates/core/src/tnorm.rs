//! Triangular norms used to aggregate the probabilistic triangle inequality.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::Probability;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TNorm {
    #[serde(rename = "min")]
    Minimum,
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "lukasiewicz")]
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Minimum, TNorm::Product, TNorm::Lukasiewicz];

    pub fn apply(self, a: f64, b: f64) -> Result<f64> {
        Probability::new(a)?;
        Probability::new(b)?;
        Ok(self.combine(a, b))
    }

    /// Unchecked binary form for hot loops whose inputs are evaluations of
    /// distribution functions (already in `[0, 1]`).
    #[inline]
    pub(crate) fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Minimum => a.min(b),
            TNorm::Product => a * b,
            TNorm::Lukasiewicz if a == 1.0 => b,
            TNorm::Lukasiewicz if b == 1.0 => a,
            TNorm::Lukasiewicz => (a + b - 1.0).max(0.0),
        }
    }

    /// Left fold of [`TNorm::apply`]; the empty fold is 1.
    pub fn fold(self, values: &[f64]) -> Result<f64> {
        values.iter().try_fold(1.0, |acc, &v| {
            Probability::new(v)?;
            Ok(self.combine(acc, v))
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TNorm::Minimum => "min",
            TNorm::Product => "product",
            TNorm::Lukasiewicz => "lukasiewicz",
        }
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(TNorm::Minimum),
            "product" => Ok(TNorm::Product),
            "lukasiewicz" => Ok(TNorm::Lukasiewicz),
            other => Err(Error::invalid(format!(
                "unknown t-norm {other:?}; expected \"min\", \"product\" or \"lukasiewicz\""
            ))),
        }
    }
}
