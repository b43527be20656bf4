//! Probabilistic cone metric spaces over `R^d`, the axiom verifier and the
//! tau-convergence detectors.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{norm, Cone};
use crate::dist::DistFn;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};
use crate::tnorm::TNorm;

pub use crate::grid::TimeGrid;

pub type Point = Vec<f64>;

/// Rejection-sampling budget for drawing points inside the point cone.
pub const MAX_SAMPLING_ATTEMPTS: usize = 100_000;

/// A distribution-valued distance between points of `R^d`.
pub trait Distance: Send + Sync + fmt::Debug {
    fn between(&self, x: &[f64], y: &[f64]) -> DistFn;

    fn name(&self) -> String;
}

/// Menger embedding of the Euclidean metric: `F_{x,y}` is the unit step at `|x - y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiracMetric;

impl Distance for DiracMetric {
    fn between(&self, x: &[f64], y: &[f64]) -> DistFn {
        let d = euclidean(x, y);
        // NaN coordinates behave as an infinitely distant point
        DistFn::dirac(if d.is_nan() { f64::INFINITY } else { d }).expect("distance is >= 0")
    }

    fn name(&self) -> String {
        "dirac".into()
    }
}

/// Direction-dependent Gaussian distance: `Phi(t - |u - v|)` when `u - v`
/// lies in the cone, `delta * Phi(t)` otherwise.
///
/// Not symmetric and `F_{u,u} = Phi` is not identically one, so it fails
/// the identity and symmetry axioms; the axiom verifier reports this.
#[derive(Debug, Clone)]
pub struct ConeGaussian {
    cone: Cone,
    delta: DistFn,
    delta_value: f64,
}

impl ConeGaussian {
    pub fn new(cone: Cone, delta: f64) -> Result<Self> {
        let delta_fn = DistFn::scaled_gaussian(delta)?;
        Ok(Self {
            cone,
            delta: delta_fn,
            delta_value: delta,
        })
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn delta(&self) -> f64 {
        self.delta_value
    }
}

impl Distance for ConeGaussian {
    fn between(&self, u: &[f64], v: &[f64]) -> DistFn {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        if self.cone.contains_unchecked(&diff) {
            DistFn::gaussian_shift(norm(&diff)).unwrap_or_else(|_| self.delta.clone())
        } else {
            self.delta.clone()
        }
    }

    fn name(&self) -> String {
        format!("cone-gaussian(delta={})", self.delta_value)
    }
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::invalid(
                "sampling box bounds must be nonempty and of equal length",
            ));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::invalid("sampling box needs finite bounds with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if l == u { l } else { rng.random_range(l..=u) })
            .collect()
    }
}

/// A point set `R^d` with a distribution-valued distance, a t-norm, an
/// optional cone of feasible points and a box for random point generation.
#[derive(Debug, Clone)]
pub struct PcmSpace {
    dim: usize,
    distance: Arc<dyn Distance>,
    tnorm: TNorm,
    point_cone: Option<Cone>,
    sampling_box: SamplingBox,
}

impl PcmSpace {
    /// Space with sampling box `[-1, 1]^dim` and no point cone.
    pub fn new(dim: usize, distance: Arc<dyn Distance>, tnorm: TNorm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("space dimension must be positive"));
        }
        Ok(Self {
            dim,
            distance,
            tnorm,
            point_cone: None,
            sampling_box: SamplingBox::symmetric(dim, 1.0)?,
        })
    }

    /// Euclidean metric as Dirac steps with the minimum t-norm.
    pub fn dirac(dim: usize) -> Result<Self> {
        Self::new(dim, Arc::new(DiracMetric), TNorm::Minimum)
    }

    pub fn with_cone(mut self, cone: Cone) -> Result<Self> {
        if cone.dim() != self.dim {
            return Err(Error::invalid(format!(
                "point cone has dimension {}, space has {}",
                cone.dim(),
                self.dim
            )));
        }
        self.point_cone = Some(cone);
        Ok(self)
    }

    pub fn with_box(mut self, sampling_box: SamplingBox) -> Result<Self> {
        if sampling_box.dim() != self.dim {
            return Err(Error::invalid(format!(
                "sampling box has dimension {}, space has {}",
                sampling_box.dim(),
                self.dim
            )));
        }
        self.sampling_box = sampling_box;
        Ok(self)
    }

    pub fn with_tnorm(mut self, tnorm: TNorm) -> Self {
        self.tnorm = tnorm;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tnorm(&self) -> TNorm {
        self.tnorm
    }

    pub fn point_cone(&self) -> Option<&Cone> {
        self.point_cone.as_ref()
    }

    pub fn sampling_box(&self) -> &SamplingBox {
        &self.sampling_box
    }

    pub fn distance_name(&self) -> String {
        self.distance.name()
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> DistFn {
        self.distance.between(x, y)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "point has dimension {}, space has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.point_cone.as_ref().is_none_or(|c| c.contains_unchecked(x))
    }

    /// One point uniform in the sampling box, rejected against the point cone.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Result<Point> {
        for _ in 0..MAX_SAMPLING_ATTEMPTS {
            let x = self.sampling_box.sample(rng);
            if self.is_feasible(&x) {
                return Ok(x);
            }
        }
        Err(Error::InfeasibleSampling {
            attempts: MAX_SAMPLING_ATTEMPTS,
        })
    }

    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = stream_rng(seed, streams::SPACE_POINTS);
        (0..count).map(|_| self.sample_point(&mut rng)).collect()
    }

    /// `F_{x,y}(eps) > 1 - eps`.
    pub fn tau_converged(&self, x: &[f64], y: &[f64], eps: f64) -> Result<bool> {
        check_eps(eps)?;
        Ok(self.tau_close(x, y, eps))
    }

    pub(crate) fn tau_close(&self, x: &[f64], y: &[f64], eps: f64) -> bool {
        self.distance(x, y).eval(eps) > 1.0 - eps
    }

    /// Cauchy criterion on a finite window: every ordered pair of distinct
    /// indices is tau-close at `eps`.
    pub fn cauchy_window(&self, pts: &[Point], eps: f64) -> Result<bool> {
        check_eps(eps)?;
        if pts.is_empty() {
            return Err(Error::invalid("Cauchy window is empty"));
        }
        Ok(pts
            .iter()
            .enumerate()
            .all(|(i, x)| pts.iter().enumerate().all(|(j, y)| i == j || self.tau_close(x, y, eps))))
    }

    pub fn check_axioms(&self, n_points: usize, grid: &TimeGrid, tol: f64, seed: u64) -> Result<AxiomReport> {
        if n_points < 3 {
            return Err(Error::invalid(format!(
                "axiom check needs at least 3 points, got {n_points}"
            )));
        }
        let points = self.sample_points(n_points, seed)?;
        let mut report = self.check_axioms_on(&points, grid, tol)?;
        report.seed = Some(seed);
        Ok(report)
    }

    /// Runs the axiom suite on the given points: identity on every point,
    /// symmetry on every pair, the t-norm triangle inequality on every
    /// ordered triple and every `(t, s)` in `grid x grid`, and cone
    /// feasibility of every point.
    pub fn check_axioms_on(&self, points: &[Point], grid: &TimeGrid, tol: f64) -> Result<AxiomReport> {
        if points.is_empty() {
            return Err(Error::invalid("axiom check needs at least one point"));
        }
        for p in points {
            self.check_point(p)?;
        }
        let n = points.len();
        let ts = grid.points();
        let nt = ts.len();
        let dists: Vec<DistFn> = (0..n * n)
            .into_par_iter()
            .map(|ij| self.distance(&points[ij / n], &points[ij % n]))
            .collect();
        let tab: Vec<Vec<f64>> = dists.par_iter().map(|f| f.eval_on(grid)).collect();

        let mut identity = MarginTracker::default();
        for i in 0..n {
            for (k, &t) in ts.iter().enumerate() {
                identity.observe(tab[i * n + i][k] - 1.0, || Witness::single(&points[i], t));
            }
        }
        let identity = identity.finish(tol, n);

        let mut symmetry = MarginTracker::default();
        for i in 0..n {
            for j in i + 1..n {
                for (k, &t) in ts.iter().enumerate() {
                    let gap = (tab[i * n + j][k] - tab[j * n + i][k]).abs();
                    symmetry.observe(-gap, || Witness::pair(&points[i], &points[j], t));
                }
            }
        }
        let symmetry = symmetry.finish(tol, n * (n - 1) / 2);

        let tnorm = self.tnorm;
        // F_{x,z}(t + s) for every ordered pair, laid out as [pair][a * nt + b]
        let sums: Vec<Vec<f64>> = dists
            .par_iter()
            .map(|f| {
                ts.iter()
                    .flat_map(|&t| ts.iter().map(move |&s| f.eval(t + s)))
                    .collect()
            })
            .collect();
        let per_x: Vec<MarginTracker> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut tracker = MarginTracker::default();
                for j in 0..n {
                    let fij = &tab[i * n + j];
                    for l in 0..n {
                        let fjl = &tab[j * n + l];
                        let fil = &sums[i * n + l];
                        for a in 0..nt {
                            for b in 0..nt {
                                let margin = fil[a * nt + b] - tnorm.combine(fij[a], fjl[b]);
                                tracker.observe(margin, || {
                                    Witness::triple(&points[i], &points[j], &points[l], ts[a], ts[b])
                                });
                            }
                        }
                    }
                }
                tracker
            })
            .collect();
        let triangle = per_x
            .into_iter()
            .fold(MarginTracker::default(), MarginTracker::merge)
            .finish(tol, n * n * n);

        let mut cone_check = MarginTracker::default();
        if let Some(cone) = &self.point_cone {
            for p in points {
                let inside = cone.contains_unchecked(p);
                cone_check.observe(if inside { 0.0 } else { -1.0 }, || Witness::point(p));
            }
        }
        let point_cone = cone_check.finish(tol, if self.point_cone.is_some() { n } else { 0 });

        let mut sub_distribution = SubDistributionFlag::default();
        for i in 0..n {
            for j in 0..n {
                let f = &dists[i * n + j];
                if !f.is_proper() {
                    sub_distribution.count += 1;
                    if sub_distribution.witness.is_none() {
                        sub_distribution.witness = Some(SubDistributionWitness {
                            x: points[i].clone(),
                            y: points[j].clone(),
                            upper_limit: f.upper_limit(),
                        });
                    }
                }
            }
        }
        sub_distribution.present = sub_distribution.count > 0;

        let indistinguishable_pairs = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && points[i] != points[j])
            .filter(|&(i, j)| tab[i * n + j].iter().all(|&v| v >= 1.0 - tol))
            .count();

        let all_pass = identity.pass && symmetry.pass && triangle.pass && point_cone.pass && !sub_distribution.present;
        Ok(AxiomReport {
            distance: self.distance_name(),
            tnorm: self.tnorm,
            n_points: n,
            tol,
            seed: None,
            grid: grid.clone(),
            identity,
            symmetry,
            triangle,
            point_cone,
            sub_distribution,
            indistinguishable_pairs,
            all_pass,
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Where an axiom's worst margin was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl Witness {
    fn point(x: &[f64]) -> Self {
        Self {
            points: vec![x.to_vec()],
            t: None,
            s: None,
        }
    }

    fn single(x: &[f64], t: f64) -> Self {
        Self {
            points: vec![x.to_vec()],
            t: Some(t),
            s: None,
        }
    }

    fn pair(x: &[f64], y: &[f64], t: f64) -> Self {
        Self {
            points: vec![x.to_vec(), y.to_vec()],
            t: Some(t),
            s: None,
        }
    }

    fn triple(x: &[f64], y: &[f64], z: &[f64], t: f64, s: f64) -> Self {
        Self {
            points: vec![x.to_vec(), y.to_vec(), z.to_vec()],
            t: Some(t),
            s: Some(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub pass: bool,
    /// Smallest margin seen; `0` when nothing was checked.
    pub worst_margin: f64,
    /// Number of points, pairs or triples examined.
    pub checked: usize,
    /// Present iff the check failed.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SubDistributionFlag {
    pub present: bool,
    /// Ordered pairs whose distance tops out below one.
    pub count: usize,
    pub witness: Option<SubDistributionWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubDistributionWitness {
    pub x: Point,
    pub y: Point,
    pub upper_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub distance: String,
    pub tnorm: TNorm,
    pub n_points: usize,
    pub tol: f64,
    pub seed: Option<u64>,
    pub grid: TimeGrid,
    pub identity: AxiomCheck,
    pub symmetry: AxiomCheck,
    pub triangle: AxiomCheck,
    /// Feasibility of the sampled points in the point cone; vacuous without one.
    pub point_cone: AxiomCheck,
    pub sub_distribution: SubDistributionFlag,
    /// Distinct points whose distance is one on the whole grid. On a finite
    /// grid this is only consistent with identity, never a proof of it.
    pub indistinguishable_pairs: usize,
    pub all_pass: bool,
}

/// Running minimum over margins, keeping the first argmin in visiting order.
#[derive(Debug, Default)]
pub(crate) struct MarginTracker {
    worst: Option<f64>,
    witness: Option<Witness>,
}

impl MarginTracker {
    pub(crate) fn observe(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        if self.worst.is_none_or(|w| margin < w) {
            self.worst = Some(margin);
            self.witness = Some(witness());
        }
    }

    /// Combines a tracker for an earlier index range with a later one.
    pub(crate) fn merge(self, later: MarginTracker) -> MarginTracker {
        match (self.worst, later.worst) {
            (Some(a), Some(b)) if b < a => later,
            (None, _) => later,
            _ => self,
        }
    }

    fn finish(self, tol: f64, checked: usize) -> AxiomCheck {
        let worst_margin = self.worst.unwrap_or(0.0);
        let pass = worst_margin >= -tol;
        AxiomCheck {
            pass,
            worst_margin,
            checked,
            witness: if pass { None } else { self.witness },
        }
    }
}
