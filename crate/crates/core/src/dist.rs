//! Distribution functions: the values taken by a probabilistic distance.
//!
//! A [`DistFn`] `F` reads as "`F(t)` is the probability that the distance is
//! less than `t`". Every variant is non-decreasing and left-continuous.
//! `ScaledGaussian` with `delta < 1` tops out below one; it is kept as a
//! sub-distribution (see [`DistFn::is_proper`]) so that spaces built from it
//! can be checked and reported on rather than rejected up front.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Standard normal CDF, computed through the complementary error function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::invalid(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    /// Point mass at `d`: `0` for `t <= d`, `1` for `t > d`.
    DiracStep { d: f64 },
    /// `Phi(t - d)`.
    GaussianShift { d: f64 },
    /// `delta * Phi(t)` for `t > 0`, `0` otherwise.
    ScaledGaussian { delta: f64 },
    /// `#{s_i < t} / n` over sorted samples.
    Empirical { samples: Arc<[f64]> },
}

/// A (sub-)distribution function.
///
/// The Gaussian variants carry a time scale so that [`DistFn::timescale`] can
/// represent `t -> F(t / c)` exactly; Dirac and empirical functions fold the
/// scale into their parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DistFn {
    kind: DistKind,
    scale: f64,
}

impl DistFn {
    /// Point mass at `d >= 0`. `d = +inf` is admitted and evaluates to 0 everywhere.
    pub fn dirac(d: f64) -> Result<Self> {
        if d.is_nan() || d < 0.0 {
            return Err(Error::invalid(format!("Dirac step location must be >= 0, got {d}")));
        }
        Ok(Self::from_kind(DistKind::DiracStep { d }))
    }

    pub fn gaussian_shift(d: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::invalid(format!("Gaussian shift must be finite, got {d}")));
        }
        Ok(Self::from_kind(DistKind::GaussianShift { d }))
    }

    pub fn scaled_gaussian(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!(
                "scaled Gaussian delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(Self::from_kind(DistKind::ScaledGaussian { delta }))
    }

    /// Empirical CDF of nonnegative distance samples, strict-count semantics.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical distribution needs at least one sample"));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!(
                "empirical samples must be finite and >= 0, got {bad}"
            )));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self::from_kind(DistKind::Empirical { samples: sorted.into() }))
    }

    fn from_kind(kind: DistKind) -> Self {
        Self { kind, scale: 1.0 }
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    /// Time scale `c` such that `eval(t) = base(t / c)`; always 1 for Dirac and empirical.
    pub fn time_scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            DistKind::DiracStep { d } => {
                if t > *d {
                    1.0
                } else {
                    0.0
                }
            }
            DistKind::GaussianShift { d } => std_normal_cdf(t / self.scale - d),
            DistKind::ScaledGaussian { delta } => {
                if t > 0.0 {
                    delta * std_normal_cdf(t / self.scale)
                } else {
                    0.0
                }
            }
            DistKind::Empirical { samples } => {
                let below = samples.partition_point(|&s| s < t);
                below as f64 / samples.len() as f64
            }
        }
    }

    pub fn eval_on(&self, grid: &TimeGrid) -> Vec<f64> {
        grid.iter().map(|t| self.eval(t)).collect()
    }

    /// `t -> F(t / c)`.
    pub fn timescale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("time scale must be finite and > 0, got {c}")));
        }
        Ok(match &self.kind {
            DistKind::DiracStep { d } => Self::from_kind(DistKind::DiracStep { d: c * d }),
            DistKind::Empirical { samples } => {
                let scaled: Vec<f64> = samples.iter().map(|s| c * s).collect();
                Self::from_kind(DistKind::Empirical { samples: scaled.into() })
            }
            kind => Self {
                kind: kind.clone(),
                scale: self.scale * c,
            },
        })
    }

    /// Limit of `eval(t)` as `t -> +inf`.
    pub fn upper_limit(&self) -> f64 {
        match self.kind {
            DistKind::ScaledGaussian { delta } => delta,
            _ => 1.0,
        }
    }

    /// False for sub-distributions whose upper limit is below one.
    pub fn is_proper(&self) -> bool {
        self.upper_limit() == 1.0
    }

    pub fn sample_count(&self) -> Option<usize> {
        match &self.kind {
            DistKind::Empirical { samples } => Some(samples.len()),
            _ => None,
        }
    }

    /// Default comparison tolerance: 0 for analytic variants, `2/sqrt(n)` for
    /// an empirical function over `n` samples.
    pub fn default_tolerance(&self) -> f64 {
        match self.sample_count() {
            Some(n) => 2.0 / (n as f64).sqrt(),
            None => 0.0,
        }
    }

    pub fn summary(&self) -> DistSummary {
        let time_scale = (self.scale != 1.0).then_some(self.scale);
        match &self.kind {
            DistKind::DiracStep { d } => DistSummary::DiracStep { d: *d },
            DistKind::GaussianShift { d } => DistSummary::GaussianShift { d: *d, time_scale },
            DistKind::ScaledGaussian { delta } => DistSummary::ScaledGaussian {
                delta: *delta,
                time_scale,
            },
            DistKind::Empirical { samples } => DistSummary::Empirical {
                count: samples.len(),
                sketch: QuantileSketch::of_sorted(samples),
            },
        }
    }
}

/// Report encoding of a [`DistFn`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum DistSummary {
    DiracStep {
        d: f64,
    },
    GaussianShift {
        d: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        time_scale: Option<f64>,
    },
    ScaledGaussian {
        delta: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        time_scale: Option<f64>,
    },
    Empirical {
        count: usize,
        sketch: QuantileSketch,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSketch {
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

impl QuantileSketch {
    fn of_sorted(sorted: &[f64]) -> Self {
        // linear interpolation between order statistics
        let q = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Self {
            min: sorted[0],
            p25: q(0.25),
            p50: q(0.5),
            p75: q(0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Per-point minimum of two distribution functions on a grid.
pub fn pointwise_min(f: &DistFn, g: &DistFn, grid: &TimeGrid) -> Vec<f64> {
    grid.iter().map(|t| f.eval(t).min(g.eval(t))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub holds: bool,
    pub worst_margin: f64,
    pub witness_t: f64,
}

/// Checks `F >= G` on the grid up to `tol`. The witness is the first grid
/// point attaining the smallest margin `F(t) - G(t)`.
pub fn dominates(f: &DistFn, g: &DistFn, grid: &TimeGrid, tol: f64) -> Dominance {
    let mut worst = f64::INFINITY;
    let mut witness_t = grid.points()[0];
    for t in grid.iter() {
        let margin = f.eval(t) - g.eval(t);
        if margin < worst {
            worst = margin;
            witness_t = t;
        }
    }
    Dominance {
        holds: worst >= -tol,
        worst_margin: worst,
        witness_t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(points: &[f64]) -> TimeGrid {
        TimeGrid::new(points.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let step = DistFn::dirac(2.0).unwrap();
        assert_eq!(step.eval(2.0), 0.0);
        assert_eq!(step.eval(2.5), 1.0);
        assert_eq!(DistFn::gaussian_shift(0.0).unwrap().eval(0.0), 0.5);
        let emp = DistFn::from_samples(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(emp.eval(2.0), 1.0 / 3.0);
    }

    #[test]
    fn timescale_examples() {
        let step = DistFn::dirac(1.0).unwrap().timescale(0.5).unwrap();
        assert_eq!(step.eval(0.6), 1.0);
        assert_eq!(step.kind(), &DistKind::DiracStep { d: 0.5 });
        let g = DistFn::gaussian_shift(1.0).unwrap().timescale(2.0).unwrap();
        assert_eq!(g.eval(2.0), 0.5);
        let f = DistFn::scaled_gaussian(0.7).unwrap();
        let same = f.timescale(1.0).unwrap();
        for t in [-1.0, 0.0, 0.3, 2.0, 9.0] {
            assert_eq!(f.eval(t), same.eval(t));
        }
        assert!(f.timescale(0.0).is_err());
        assert!(f.timescale(-1.0).is_err());
        assert!(f.timescale(f64::NAN).is_err());
    }

    #[test]
    fn pointwise_min_examples() {
        let one = DistFn::dirac(1.0).unwrap();
        let two = DistFn::dirac(2.0).unwrap();
        assert_eq!(pointwise_min(&one, &two, &grid(&[1.5])), vec![0.0]);
        let g = TimeGrid::default();
        assert_eq!(pointwise_min(&one, &one, &g), one.eval_on(&g));
        let m = pointwise_min(
            &DistFn::gaussian_shift(0.0).unwrap(),
            &DistFn::scaled_gaussian(0.5).unwrap(),
            &grid(&[3.0]),
        );
        assert_eq!(m[0], 0.5 * std_normal_cdf(3.0));
        assert!((m[0] - 0.4993).abs() < 1e-4);
    }

    #[test]
    fn dominates_examples() {
        let one = DistFn::dirac(1.0).unwrap();
        let two = DistFn::dirac(2.0).unwrap();
        let g = TimeGrid::default();
        let d = dominates(&one, &two, &g, 0.0);
        assert!(d.holds && d.worst_margin >= 0.0);
        let d = dominates(&one, &one, &g, 0.0);
        assert!(d.holds);
        assert_eq!(d.worst_margin, 0.0);
        let d = dominates(&two, &one, &grid(&[0.5, 1.5, 3.0]), 0.0);
        assert!(!d.holds);
        assert_eq!(d.worst_margin, -1.0);
        assert_eq!(d.witness_t, 1.5);
    }

    #[test]
    fn from_samples_examples() {
        let zero = DistFn::from_samples(&[0.0, 0.0, 0.0]).unwrap();
        for t in [1e-12, 1e-3, 1.0, 1e6] {
            assert_eq!(zero.eval(t), 1.0);
        }
        assert_eq!(zero.eval(0.0), 0.0);
        let f = DistFn::from_samples(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.eval(2.0), 1.0 / 3.0);
        assert_eq!(f.eval(2.0 + 1e-9), 2.0 / 3.0);
        assert!(DistFn::from_samples(&[]).is_err());
        assert!(DistFn::from_samples(&[1.0, f64::INFINITY]).is_err());
        assert!(DistFn::from_samples(&[1.0, f64::NAN]).is_err());
        assert!(DistFn::from_samples(&[-1.0]).is_err());
    }

    #[test]
    fn limits_and_properness() {
        let sub = DistFn::scaled_gaussian(0.5).unwrap();
        assert!(!sub.is_proper());
        assert_eq!(sub.eval(-1e9), 0.0);
        assert!((sub.eval(1e9) - 0.5).abs() < 1e-15);
        assert!(DistFn::scaled_gaussian(1.0).unwrap().is_proper());
        assert!(DistFn::scaled_gaussian(0.0).is_err());
        assert!(DistFn::scaled_gaussian(1.5).is_err());
        for f in [DistFn::dirac(3.0).unwrap(), DistFn::gaussian_shift(-2.0).unwrap()] {
            assert!(f.is_proper());
            assert_eq!(f.eval(-1e9), 0.0);
            assert_eq!(f.eval(1e9), 1.0);
        }
    }

    #[test]
    fn default_tolerances() {
        assert_eq!(DistFn::dirac(1.0).unwrap().default_tolerance(), 0.0);
        let f = DistFn::from_samples(&vec![1.0; 400]).unwrap();
        assert_eq!(f.default_tolerance(), 0.1);
    }

    #[test]
    fn summary_sketch() {
        let f = DistFn::from_samples(&[4.0, 0.0, 1.0, 3.0, 2.0]).unwrap();
        match f.summary() {
            DistSummary::Empirical { count, sketch } => {
                assert_eq!(count, 5);
                assert_eq!(
                    sketch,
                    QuantileSketch {
                        min: 0.0,
                        p25: 1.0,
                        p50: 2.0,
                        p75: 3.0,
                        max: 4.0
                    }
                );
            }
            other => panic!("unexpected summary {other:?}"),
        }
        assert_eq!(DistFn::dirac(2.0).unwrap().summary(), DistSummary::DiracStep { d: 2.0 });
    }

    #[test]
    fn probability_validation() {
        assert!(Probability::new(0.0).is_ok());
        assert!(Probability::new(1.0).is_ok());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }
}
