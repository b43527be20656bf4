use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite discretization of "for all t > 0": strictly increasing positive times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub const DEFAULT_LOWER: f64 = 1e-3;
    pub const DEFAULT_UPPER: f64 = 1e2;
    pub const DEFAULT_POINTS: usize = 50;

    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("time grid is empty"));
        }
        if points.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("time grid points must be finite and positive"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `count` points spaced evenly in log scale on `[lower, upper]`, endpoints included.
    pub fn log_spaced(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if !(lower > 0.0 && upper > lower && lower.is_finite() && upper.is_finite()) {
            return Err(Error::invalid(format!(
                "log grid needs 0 < lower < upper, got [{lower}, {upper}]"
            )));
        }
        match count {
            0 => Err(Error::invalid("time grid is empty")),
            1 => Self::new(vec![lower]),
            _ => {
                let (a, b) = (lower.ln(), upper.ln());
                let step = (b - a) / (count - 1) as f64;
                let mut points: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
                points[0] = lower;
                points[count - 1] = upper;
                Self::new(points)
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied()
    }
}

impl Default for TimeGrid {
    /// 50 log-spaced points on `[1e-3, 1e2]`.
    fn default() -> Self {
        Self::log_spaced(Self::DEFAULT_LOWER, Self::DEFAULT_UPPER, Self::DEFAULT_POINTS)
            .expect("default grid parameters are valid")
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.points
    }
}
