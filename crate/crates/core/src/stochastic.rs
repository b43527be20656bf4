//! Monte Carlo ensembles, the empirical probabilistic metric on random
//! variables, the almost-sure Kannan check for samplewise random operators,
//! and a pathwise Picard solver for random Volterra integral equations
//!
//! `X(t, w) = h(t, w) + int_0^t k(t, s, w) f(s, X(s, w)) ds`.
//!
//! Every path `j` draws its randomness from its own counter-based stream
//! (see [`crate::rng::path_rng`]) and all reductions over paths run in path
//! order, so results do not depend on the worker count, and growing the
//! path count leaves existing paths unchanged.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{norm, Cone};
use crate::contract::{
    grid_minimum, reduce_in_order, CertificateWitness, ContractionCertificate, ContractionKind, ContractionParams,
};
use crate::dist::DistFn;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mapping::Mapping;
use crate::rng::path_rng;
use crate::space::euclidean;

/// `N` draws of a random vector in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    data: Vec<f64>,
}

impl Ensemble {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(
                "ensemble needs at least one sample of positive dimension",
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ensemble samples must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("ensemble rows must share one dimension"));
        }
        Self::new(dim, rows.concat())
    }

    /// Sample `j` is `draw(rng_j, j)` with `rng_j` the path stream `j` under `seed`.
    pub fn generate<F>(n: usize, dim: usize, seed: u64, draw: F) -> Result<Self>
    where
        F: Fn(&mut ChaCha8Rng, usize) -> Vec<f64> + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| draw(&mut path_rng(seed, j), j))
            .collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(
                "sample generator returned a vector of the wrong dimension",
            ));
        }
        Self::new(dim, rows.concat())
    }

    /// Independent standard normal coordinates.
    pub fn standard_normal(n: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::generate(n, dim, seed, |rng, _| {
            (0..dim).map(|_| rng.sample(StandardNormal)).collect()
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    /// Applies `f` to every sample; the result must keep the dimension.
    pub fn map_rows(&self, f: impl Fn(usize, &[f64]) -> Vec<f64> + Sync) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self
            .data
            .par_chunks(self.dim)
            .enumerate()
            .map(|(j, x)| f(j, x))
            .collect();
        if rows.iter().any(|r| r.len() != self.dim) {
            return Err(Error::invalid("samplewise map changed the dimension"));
        }
        Self::new(self.dim, rows.concat())
    }

    pub fn apply(&self, op: &dyn RandomOperator) -> Result<Self> {
        self.map_rows(|j, x| op.apply(j, x))
    }

    /// Whether every sample lies in `cone` (the almost-sure cone constraint).
    pub fn in_cone(&self, cone: &Cone) -> Result<bool> {
        if cone.dim() != self.dim {
            return Err(Error::invalid("cone and ensemble dimensions differ"));
        }
        Ok(self.rows().all(|x| cone.contains_unchecked(x)))
    }
}

/// A random operator acting sample by sample.
pub trait RandomOperator: Send + Sync {
    fn apply(&self, sample: usize, x: &[f64]) -> Vec<f64>;

    fn name(&self) -> String;
}

/// The same deterministic map applied to every sample.
#[derive(Debug)]
pub struct Samplewise<M>(pub M);

impl<M: Mapping> RandomOperator for Samplewise<M> {
    fn apply(&self, _sample: usize, x: &[f64]) -> Vec<f64> {
        self.0.apply(x)
    }

    fn name(&self) -> String {
        format!("samplewise {}", self.0.name())
    }
}

fn check_shapes(x: &Ensemble, y: &Ensemble) -> Result<()> {
    if x.len() != y.len() || x.dim() != y.dim() {
        return Err(Error::invalid(format!(
            "ensemble shapes differ: {}x{} vs {}x{}",
            x.len(),
            x.dim(),
            y.len(),
            y.dim()
        )));
    }
    Ok(())
}

/// Empirical CDF of the samplewise distances `|X_j - Y_j|`.
pub fn empirical_metric(x: &Ensemble, y: &Ensemble) -> Result<DistFn> {
    check_shapes(x, y)?;
    let d: Vec<f64> = x.rows().zip(y.rows()).map(|(a, b)| euclidean(a, b)).collect();
    DistFn::from_samples(&d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplewiseViolation {
    pub pair_index: usize,
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of `|TX - TY| <= alpha max{|X - TX|, |Y - TY|}` sample by sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplewiseCheck {
    pub n_samples: usize,
    pub violations: usize,
    pub violating_fraction: f64,
    pub holds: bool,
    pub first_violation: Option<SamplewiseViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomKannanCertificate {
    pub operator: String,
    pub alpha: f64,
    pub samplewise: SamplewiseCheck,
    /// Kannan condition on the empirical metrics, `t / (2 alpha)` form.
    pub distributional: ContractionCertificate,
}

pub const SAMPLEWISE_FORM_NOTE: &str = "the samplewise condition controls the empirical metric at argument t/alpha; \
     the distributional check tests the weaker t/(2 alpha) Kannan form";

/// Two-part almost-sure Kannan check on ensemble pairs.
pub fn check_random_kannan(
    op: &dyn RandomOperator,
    pairs: &[(Ensemble, Ensemble)],
    alpha: f64,
    grid: &TimeGrid,
    tol: f64,
) -> Result<RandomKannanCertificate> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("random Kannan check needs at least one ensemble pair"));
    }
    for (x, y) in pairs {
        check_shapes(x, y)?;
    }

    let mut n_samples = 0;
    let mut violations = 0;
    let mut first_violation = None;
    let mut per_pair = Vec::with_capacity(pairs.len());
    for (i, (x, y)) in pairs.iter().enumerate() {
        let tx = x.apply(op)?;
        let ty = y.apply(op)?;
        for j in 0..x.len() {
            let lhs = euclidean(tx.row(j), ty.row(j));
            let rhs = alpha * euclidean(x.row(j), tx.row(j)).max(euclidean(y.row(j), ty.row(j)));
            n_samples += 1;
            if lhs > rhs {
                violations += 1;
                if first_violation.is_none() {
                    first_violation = Some(SamplewiseViolation {
                        pair_index: i,
                        sample: j,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        let f_txty = empirical_metric(&tx, &ty)?;
        let f_xtx = empirical_metric(x, &tx)?;
        let f_yty = empirical_metric(y, &ty)?;
        per_pair.push(grid_minimum(grid, i, |t| {
            let s = t / (2.0 * alpha);
            f_txty.eval(t) - f_xtx.eval(s).min(f_yty.eval(s))
        }));
    }

    let worst = reduce_in_order(per_pair);
    let worst_margin = worst.map_or(0.0, |w| w.margin);
    let pass = worst_margin >= -tol;
    let distributional = ContractionCertificate {
        kind: ContractionKind::Kannan,
        mapping: op.name(),
        params: ContractionParams {
            alpha: Some(alpha),
            ..Default::default()
        },
        n_pairs: pairs.len(),
        grid: grid.clone(),
        tol,
        worst_margin,
        witness: worst.filter(|_| !pass).map(|w| CertificateWitness {
            pair_index: w.pair,
            x: None,
            y: None,
            t: w.t,
        }),
        pass,
        delta: None,
        notes: vec![SAMPLEWISE_FORM_NOTE.to_string()],
    };
    Ok(RandomKannanCertificate {
        operator: op.name(),
        alpha,
        samplewise: SamplewiseCheck {
            n_samples,
            violations,
            violating_fraction: violations as f64 / n_samples as f64,
            holds: violations == 0,
            first_violation,
        },
        distributional,
    })
}

// ---------------------------------------------------------------------------
// Random Volterra integral equations

/// Deterministic kernel profile `k0(t, s)` for `s <= t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelShape {
    /// `k0 = value`.
    Constant { value: f64 },
    /// `k0 = exp(-rate (t - s))`.
    ExpDecay { rate: f64 },
}

impl KernelShape {
    fn eval(self, t: f64, s: f64) -> f64 {
        match self {
            KernelShape::Constant { value } => value,
            KernelShape::ExpDecay { rate } => (-rate * (t - s)).exp(),
        }
    }
}

/// `k(t, s, w) = a(w) k0(t, s)` with amplitude `a = 1 + spread U`, `U`
/// uniform on `[-1, 1]` per path (`spread = 0` gives a deterministic kernel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kernel {
    pub shape: KernelShape,
    #[serde(default)]
    pub amplitude_spread: f64,
}

impl Kernel {
    pub fn deterministic(shape: KernelShape) -> Self {
        Self {
            shape,
            amplitude_spread: 0.0,
        }
    }
}

/// `h(t, w) = intercept + slope t + noise Z(w)` with `Z` standard normal per path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    Constant {
        value: f64,
        #[serde(default)]
        noise: f64,
    },
    Linear {
        intercept: f64,
        slope: f64,
        #[serde(default)]
        noise: f64,
    },
}

impl Forcing {
    fn parts(self) -> (f64, f64, f64) {
        match self {
            Forcing::Constant { value, noise } => (value, 0.0, noise),
            Forcing::Linear {
                intercept,
                slope,
                noise,
            } => (intercept, slope, noise),
        }
    }
}

/// The nonlinearity `f(s, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `f = value`.
    Constant { value: f64 },
    /// `f = slope x + intercept`.
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
}

impl Nonlinearity {
    #[inline]
    fn eval(self, _s: f64, x: f64) -> f64 {
        match self {
            Nonlinearity::Constant { value } => value,
            Nonlinearity::Linear { slope, intercept } => slope * x + intercept,
        }
    }

    /// Smallest Lipschitz constant in `x`.
    pub fn natural_lipschitz(self) -> f64 {
        match self {
            Nonlinearity::Constant { .. } => 0.0,
            Nonlinearity::Linear { slope, .. } => slope.abs(),
        }
    }
}

/// Values on an `N x (n_t + 1)` path-by-time lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PathField {
    n_times: usize,
    data: Vec<f64>,
}

impl PathField {
    pub fn new(n_times: usize, data: Vec<f64>) -> Result<Self> {
        if n_times == 0 || data.is_empty() || !data.len().is_multiple_of(n_times) {
            return Err(Error::invalid("path field needs at least one path and one time"));
        }
        Ok(Self { n_times, data })
    }

    pub fn n_paths(&self) -> usize {
        self.data.len() / self.n_times
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn path(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_times..(j + 1) * self.n_times]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_times)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Average over paths at each time, accumulated in path order.
    pub fn mean_path(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.n_times];
        for p in self.paths() {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        let n = self.n_paths() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// A random Volterra problem on a time grid `0 = t_0 < ... < t_n = 1`.
///
/// The forcing field and kernel amplitudes are drawn once at construction.
/// Quadrature is the composite trapezoid rule restricted to `s <= t`.
#[derive(Debug, Clone)]
pub struct SieProblem {
    times: Vec<f64>,
    kernel: Kernel,
    forcing: Forcing,
    nonlinearity: Nonlinearity,
    lipschitz: f64,
    seed: u64,
    /// Row `i` holds `w_l^{(i)} k0(t_i, s_l)` for `l <= i`; row `i` starts at `i (i + 1) / 2`.
    weighted_kernel: Vec<f64>,
    /// Full-interval trapezoid weights on `[0, 1]`.
    time_weights: Vec<f64>,
    amplitudes: Vec<f64>,
    forcing_field: PathField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SieSpec {
    pub n_steps: usize,
    pub n_paths: usize,
    pub kernel: Kernel,
    pub forcing: Forcing,
    pub nonlinearity: Nonlinearity,
    /// Declared Lipschitz constant `L`; defaults to the nonlinearity's own.
    #[serde(default)]
    pub lipschitz: Option<f64>,
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|l| {
            let left = if l > 0 { times[l] - times[l - 1] } else { 0.0 };
            let right = if l + 1 < n { times[l + 1] - times[l] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

impl SieProblem {
    /// Uniform grid with `spec.n_steps` steps on `[0, 1]`.
    pub fn new(spec: SieSpec, seed: u64) -> Result<Self> {
        if spec.n_steps == 0 {
            return Err(Error::invalid("integral equation needs at least one time step"));
        }
        let times: Vec<f64> = (0..=spec.n_steps).map(|i| i as f64 / spec.n_steps as f64).collect();
        Self::with_times(times, spec, seed)
    }

    pub fn with_times(times: Vec<f64>, spec: SieSpec, seed: u64) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("time grid must start at 0 and increase strictly"));
        }
        if spec.n_paths == 0 {
            return Err(Error::invalid("integral equation needs at least one path"));
        }
        let natural = spec.nonlinearity.natural_lipschitz();
        let lipschitz = spec.lipschitz.unwrap_or(natural);
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "Lipschitz constant must be positive; declare one for this nonlinearity (got {lipschitz})"
            )));
        }
        if lipschitz < natural {
            return Err(Error::invalid(format!(
                "declared Lipschitz constant {lipschitz} is below the nonlinearity's {natural}"
            )));
        }
        let spread = spec.kernel.amplitude_spread;
        if !(spread.is_finite() && spread >= 0.0) {
            return Err(Error::invalid("kernel amplitude spread must be finite and >= 0"));
        }

        let n_t = times.len();
        let mut weighted_kernel = Vec::with_capacity(row_start(n_t));
        for i in 0..n_t {
            let w = trapezoid_weights(&times[..=i]);
            weighted_kernel.extend((0..=i).map(|l| w[l] * spec.kernel.shape.eval(times[i], times[l])));
        }
        let time_weights = trapezoid_weights(&times);

        let (intercept, slope, noise) = spec.forcing.parts();
        let draws: Vec<(f64, Vec<f64>)> = (0..spec.n_paths)
            .into_par_iter()
            .map(|j| {
                let mut rng = path_rng(seed, j);
                let z: f64 = rng.sample(StandardNormal);
                let u: f64 = rng.random_range(-1.0..=1.0);
                let h = times.iter().map(|t| intercept + slope * t + noise * z).collect();
                (1.0 + spread * u, h)
            })
            .collect();
        let amplitudes = draws.iter().map(|(a, _)| *a).collect();
        let forcing_field = PathField::new(n_t, draws.into_iter().flat_map(|(_, h)| h).collect())?;
        if !forcing_field.is_finite() {
            return Err(Error::invalid("forcing is not finite"));
        }

        Ok(Self {
            times,
            kernel: spec.kernel,
            forcing: spec.forcing,
            nonlinearity: spec.nonlinearity,
            lipschitz,
            seed,
            weighted_kernel,
            time_weights,
            amplitudes,
            forcing_field,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_paths(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn forcing(&self) -> Forcing {
        self.forcing
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn forcing_field(&self) -> &PathField {
        &self.forcing_field
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Discrete `L^2([0,1] x Omega)` norm of `a - b`: trapezoid in time,
    /// uniform over paths.
    pub fn l2_distance(&self, a: &PathField, b: &PathField) -> f64 {
        let per_path: Vec<f64> = a
            .paths()
            .zip(b.paths())
            .map(|(p, q)| {
                p.iter()
                    .zip(q)
                    .zip(&self.time_weights)
                    .map(|((x, y), w)| w * (x - y) * (x - y))
                    .sum::<f64>()
            })
            .collect();
        (per_path.iter().sum::<f64>() / a.n_paths() as f64).sqrt()
    }

    fn check_field(&self, x: &PathField) -> Result<()> {
        if x.n_times() != self.times.len() || x.n_paths() != self.n_paths() {
            return Err(Error::invalid(format!(
                "path field is {}x{}, problem expects {}x{}",
                x.n_paths(),
                x.n_times(),
                self.n_paths(),
                self.times.len()
            )));
        }
        Ok(())
    }
}

/// One application of the solution map
/// `(TX)(t_i) = h(t_i) + sum_{l <= i} w_l k(t_i, s_l) f(s_l, X(s_l))`.
pub fn sie_apply(p: &SieProblem, x: &PathField) -> Result<PathField> {
    p.check_field(x)?;
    let n_t = p.times.len();
    let f = p.nonlinearity;
    let rows: Vec<f64> = x
        .data
        .par_chunks(n_t)
        .zip(p.forcing_field.data.par_chunks(n_t))
        .zip(p.amplitudes.par_iter())
        .flat_map_iter(|((xs, hs), &a)| {
            let g: Vec<f64> = p.times.iter().zip(xs).map(|(&s, &v)| f.eval(s, v)).collect();
            (0..n_t).map(move |i| {
                let row = &p.weighted_kernel[row_start(i)..row_start(i) + i + 1];
                let integral: f64 = row.iter().zip(&g).map(|(w, gl)| w * gl).sum();
                hs[i] + a * integral
            })
        })
        .collect();
    let out = PathField::new(n_t, rows)?;
    if !out.is_finite() {
        return Err(Error::FieldDivergence { iteration: 0 });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieConditions {
    pub lipschitz: f64,
    pub sup_k: f64,
    /// Path mean of `M(w) = max_t int_0^t |k(t, s, w)| ds`.
    pub m_hat: f64,
    pub m_std_error: f64,
    pub m_max: f64,
    /// `L sqrt(M_hat sup_k)`.
    pub k_const: f64,
    /// Paths with `L M(w) >= 1/2`.
    pub paths_violating_lm: usize,
    pub satisfied: bool,
}

/// Evaluates the contraction constant and the per-path condition `L M < 1/2`.
pub fn sie_conditions(p: &SieProblem) -> SieConditions {
    let n_t = p.times.len();
    let mut sup_base = 0.0_f64;
    let mut m_base = 0.0_f64;
    for i in 0..n_t {
        let w = trapezoid_weights(&p.times[..=i]);
        let mut integral = 0.0;
        for (wl, &s) in w.iter().zip(&p.times[..=i]) {
            let k = p.kernel.shape.eval(p.times[i], s).abs();
            sup_base = sup_base.max(k);
            integral += wl * k;
        }
        m_base = m_base.max(integral);
    }
    let m: Vec<f64> = p.amplitudes.iter().map(|a| a.abs() * m_base).collect();
    let n = m.len() as f64;
    let m_hat = m.iter().sum::<f64>() / n;
    let m_std_error = if m.len() > 1 {
        (m.iter().map(|v| (v - m_hat).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    let sup_k = p.amplitudes.iter().fold(0.0_f64, |acc, a| acc.max(a.abs())) * sup_base;
    let k_const = p.lipschitz * (m_hat * sup_k).sqrt();
    let paths_violating_lm = m.iter().filter(|&&mj| p.lipschitz * mj >= 0.5).count();
    SieConditions {
        lipschitz: p.lipschitz,
        sup_k,
        m_hat,
        m_std_error,
        m_max: m.iter().copied().fold(0.0, f64::max),
        k_const,
        paths_violating_lm,
        satisfied: k_const < 0.5 && paths_violating_lm == 0,
    }
}

#[derive(Debug, Clone)]
pub struct SieSolution {
    pub field: PathField,
    /// `|X^{m+1} - X^m|` in discrete L^2, one entry per iteration.
    pub l2_diffs: Vec<f64>,
    pub conditions: SieConditions,
    pub iterations: usize,
    pub converged: bool,
    /// Every iterate, the start included, was nonnegative everywhere.
    pub nonnegative_iterates: bool,
}

/// Picard iteration from `X^0 = h` until the L^2 step falls below `eps`.
/// Runs even when [`sie_conditions`] is not satisfied; the caller reads
/// `conditions.satisfied`.
pub fn sie_solve(p: &SieProblem, eps: f64, max_iter: usize) -> Result<SieSolution> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let conditions = sie_conditions(p);
    let mut x = p.forcing_field.clone();
    let mut nonnegative = x.min_value() >= 0.0;
    let mut l2_diffs = Vec::new();
    let mut converged = false;
    for iteration in 1..=max_iter {
        let next = sie_apply(p, &x).map_err(|e| match e {
            Error::FieldDivergence { .. } => Error::FieldDivergence { iteration },
            other => other,
        })?;
        let diff = p.l2_distance(&next, &x);
        l2_diffs.push(diff);
        nonnegative &= next.min_value() >= 0.0;
        x = next;
        if diff < eps {
            converged = true;
            break;
        }
    }
    Ok(SieSolution {
        field: x,
        iterations: l2_diffs.len(),
        l2_diffs,
        conditions,
        converged,
        nonnegative_iterates: nonnegative,
    })
}

/// Pairs `(X, lambda X)` with `X = (|Z_1|, .., |Z_d|)`: nonnegative
/// ensembles for the samplewise Kannan experiments.
pub fn scaled_orthant_pair(n: usize, dim: usize, lambda: f64, seed: u64) -> Result<(Ensemble, Ensemble)> {
    let x = Ensemble::generate(n, dim, seed, |rng, _| {
        (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect()
    })?;
    let y = x.map_rows(|_, r| r.iter().map(|v| lambda * v).collect())?;
    Ok((x, y))
}

/// Norms of every sample, in sample order.
pub fn sample_norms(x: &Ensemble) -> Vec<f64> {
    x.rows().map(norm).collect()
}
