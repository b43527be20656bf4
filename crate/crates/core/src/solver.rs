//! Picard iteration with tau-convergence stopping, the a-priori Kannan
//! bounds and the Cauchy chain bound, fixed-point verification and a
//! uniqueness probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{DistFn, DistSummary};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mapping::Mapping;
use crate::space::{PcmSpace, Point};
use crate::tnorm::TNorm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    Diverged,
}

/// The orbit `x_{n+1} = T x_n` together with the step distances
/// `F_{x_n, x_{n+1}}`.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub points: Vec<Point>,
    pub steps: Vec<DistFn>,
    pub stopped_reason: StopReason,
    pub n_iters: usize,
    pub eps: f64,
}

impl IterationTrace {
    pub fn last(&self) -> &Point {
        self.points.last().expect("trace holds at least the start point")
    }

    pub fn converged(&self) -> bool {
        self.stopped_reason == StopReason::Converged
    }

    /// `F_{x_n, x_{n+1}}` tabulated on `grid`, one row per step.
    pub fn step_table(&self, grid: &TimeGrid) -> Vec<Vec<f64>> {
        self.steps.iter().map(|f| f.eval_on(grid)).collect()
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            n_iters: self.n_iters,
            stopped_reason: self.stopped_reason,
            eps: self.eps,
            start: self.points[0].clone(),
            limit: self.last().clone(),
            first_step: self.steps.first().map(DistFn::summary),
            last_step: self.steps.last().map(DistFn::summary),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub n_iters: usize,
    pub stopped_reason: StopReason,
    pub eps: f64,
    pub start: Point,
    pub limit: Point,
    pub first_step: Option<DistSummary>,
    pub last_step: Option<DistSummary>,
}

/// Iterates `map` from `x0` until successive iterates are tau-close at
/// `eps` or `max_iter` steps were taken. A non-finite iterate ends the run
/// with [`Error::Divergence`] carrying the orbit so far.
pub fn picard(space: &PcmSpace, map: &dyn Mapping, x0: &[f64], eps: f64, max_iter: usize) -> Result<IterationTrace> {
    space.check_point(x0)?;
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !space.is_feasible(x0) {
        return Err(Error::invalid("start point lies outside the point cone"));
    }
    let mut trace = IterationTrace {
        points: vec![x0.to_vec()],
        steps: Vec::new(),
        stopped_reason: StopReason::MaxIter,
        n_iters: 0,
        eps,
    };
    for _ in 0..max_iter {
        let current = trace.last();
        let next = map.apply(current);
        let finite = next.len() == space.dim() && next.iter().all(|v| v.is_finite());
        let step = space.distance(current, &next);
        trace.points.push(next);
        trace.n_iters += 1;
        if !finite {
            trace.stopped_reason = StopReason::Diverged;
            return Err(Error::Divergence { trace: Box::new(trace) });
        }
        let close = step.eval(eps) > 1.0 - eps;
        trace.steps.push(step);
        if close {
            trace.stopped_reason = StopReason::Converged;
            break;
        }
    }
    Ok(trace)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// Guaranteed lower bound on `F_{x_n, x_{n+1}}(t)`: `F_{x_0,x_1}(t / (2 alpha)^n)`.
pub fn kannan_bound(f01: &DistFn, alpha: f64, n: usize, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_t(t)?;
    Ok(kannan_bound_unchecked(f01, alpha, n, t))
}

fn kannan_bound_unchecked(f01: &DistFn, alpha: f64, n: usize, t: f64) -> f64 {
    f01.eval(t / rate_power(alpha, n))
}

fn rate_power(alpha: f64, n: usize) -> f64 {
    (2.0 * alpha).powi(n.min(i32::MAX as usize) as i32)
}

/// Lower bound on `F_{x_n, x_m}(t)`: the t-norm fold over `j = n..m-1` of
/// `F_{x_0,x_1}(t / ((m - n) (2 alpha)^j))`.
pub fn cauchy_chain_bound(f01: &DistFn, alpha: f64, n: usize, m: usize, t: f64, tnorm: TNorm) -> Result<f64> {
    check_alpha(alpha)?;
    check_t(t)?;
    if n >= m {
        return Err(Error::invalid(format!("chain bound needs n < m, got n = {n}, m = {m}")));
    }
    Ok(cauchy_chain_unchecked(f01, alpha, n, m, t, tnorm))
}

fn cauchy_chain_unchecked(f01: &DistFn, alpha: f64, n: usize, m: usize, t: f64, tnorm: TNorm) -> f64 {
    let span = (m - n) as f64;
    (n..m).fold(1.0, |acc, j| {
        tnorm.combine(acc, f01.eval(t / (span * rate_power(alpha, j))))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Step,
    CauchyChain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub kind: BoundKind,
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub alpha: f64,
    pub tnorm: TNorm,
    pub tol: f64,
    pub grid: TimeGrid,
    pub step_checks: usize,
    pub chain_checks: usize,
    pub step_violations: usize,
    pub chain_violations: usize,
    /// Smallest `lhs - rhs` over every comparison; 0 when none were made.
    pub worst_margin: f64,
    /// The first violations found, at most [`BoundCheck::MAX_LISTED`].
    pub violations: Vec<BoundViolation>,
    pub holds: bool,
}

impl BoundCheck {
    pub const MAX_LISTED: usize = 32;
}

/// Index pairs `(n, m)` for the chain check: every `n` with the next
/// `window` successors, plus `(n, last)`.
fn chain_pairs(len: usize, window: usize) -> Vec<(usize, usize)> {
    let last = len.saturating_sub(1);
    let mut pairs = Vec::new();
    for n in 0..last {
        let upper = (n + window).min(last);
        pairs.extend((n + 1..=upper).map(|m| (n, m)));
        if upper < last {
            pairs.push((n, last));
        }
    }
    pairs
}

/// `(kind, n, m, t, lhs, rhs)`.
type Comparison = (BoundKind, usize, usize, f64, f64, f64);

/// Chain pairs per start index, capped to keep long traces cheap.
const CHAIN_WINDOW: usize = 8;

/// Compares the orbit against the a-priori bounds: every step distance
/// `F_{x_n,x_{n+1}}(t)` against [`kannan_bound`], and a window of pairs
/// `F_{x_n,x_m}(t)` against [`cauchy_chain_bound`].
pub fn check_bounds(
    space: &PcmSpace,
    trace: &IterationTrace,
    alpha: f64,
    grid: &TimeGrid,
    tnorm: TNorm,
    tol: f64,
) -> Result<BoundCheck> {
    check_alpha(alpha)?;
    if trace.points.len() < 2 || trace.steps.is_empty() {
        return Err(Error::invalid("bound check needs a trace with at least one step"));
    }
    let f01 = &trace.steps[0];
    let mut comparisons: Vec<Comparison> = Vec::new();

    let step_rows: Vec<Vec<Comparison>> = trace
        .steps
        .par_iter()
        .enumerate()
        .map(|(n, step)| {
            grid.iter()
                .map(|t| {
                    (
                        BoundKind::Step,
                        n,
                        n + 1,
                        t,
                        step.eval(t),
                        kannan_bound_unchecked(f01, alpha, n, t),
                    )
                })
                .collect()
        })
        .collect();
    let step_checks = step_rows.iter().map(Vec::len).sum();
    comparisons.extend(step_rows.into_iter().flatten());

    let pairs = chain_pairs(trace.points.len(), CHAIN_WINDOW);
    let chain_rows: Vec<Vec<Comparison>> = pairs
        .par_iter()
        .map(|&(n, m)| {
            let f = space.distance(&trace.points[n], &trace.points[m]);
            grid.iter()
                .map(|t| {
                    let rhs = cauchy_chain_unchecked(f01, alpha, n, m, t, tnorm);
                    (BoundKind::CauchyChain, n, m, t, f.eval(t), rhs)
                })
                .collect()
        })
        .collect();
    let chain_checks = chain_rows.iter().map(Vec::len).sum();
    comparisons.extend(chain_rows.into_iter().flatten());

    let mut check = BoundCheck {
        alpha,
        tnorm,
        tol,
        grid: grid.clone(),
        step_checks,
        chain_checks,
        step_violations: 0,
        chain_violations: 0,
        worst_margin: 0.0,
        violations: Vec::new(),
        holds: true,
    };
    let mut worst = f64::INFINITY;
    for (kind, n, m, t, lhs, rhs) in comparisons {
        let margin = lhs - rhs;
        worst = worst.min(margin);
        if margin < -tol {
            match kind {
                BoundKind::Step => check.step_violations += 1,
                BoundKind::CauchyChain => check.chain_violations += 1,
            }
            if check.violations.len() < BoundCheck::MAX_LISTED {
                check.violations.push(BoundViolation {
                    kind,
                    n,
                    m,
                    t,
                    lhs,
                    rhs,
                });
            }
        }
    }
    check.worst_margin = if worst.is_finite() { worst } else { 0.0 };
    check.holds = check.step_violations == 0 && check.chain_violations == 0;
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointCheck {
    pub is_fixed: bool,
    /// Smallest `F_{Tx,x}(t)` over the grid.
    pub worst: f64,
}

/// `F_{Tx,x}(t) >= 1 - tol` on every grid time.
pub fn verify_fixed_point(
    space: &PcmSpace,
    map: &dyn Mapping,
    x: &[f64],
    grid: &TimeGrid,
    tol: f64,
) -> Result<FixedPointCheck> {
    space.check_point(x)?;
    let f = space.distance(&map.apply(x), x);
    let worst = grid.iter().map(|t| f.eval(t)).fold(f64::INFINITY, f64::min);
    Ok(FixedPointCheck {
        is_fixed: worst >= 1.0 - tol,
        worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub unique: bool,
    pub all_converged: bool,
    pub limits: Vec<Point>,
    pub iterations: Vec<usize>,
}

/// Runs [`picard`] from every start; the fixed point looks unique when all
/// runs converged and every pair of limits is tau-close at `agree_tol`.
pub fn uniqueness_probe(
    space: &PcmSpace,
    map: &dyn Mapping,
    starts: &[Point],
    eps: f64,
    max_iter: usize,
    agree_tol: f64,
) -> Result<UniquenessProbe> {
    if starts.len() < 2 {
        return Err(Error::invalid("uniqueness probe needs at least two starts"));
    }
    if !(agree_tol > 0.0) {
        return Err(Error::invalid(format!(
            "agreement tolerance must be positive, got {agree_tol}"
        )));
    }
    let traces: Vec<IterationTrace> = starts
        .par_iter()
        .map(|x0| picard(space, map, x0, eps, max_iter))
        .collect::<Result<_>>()?;
    let all_converged = traces.iter().all(IterationTrace::converged);
    let limits: Vec<Point> = traces.iter().map(|t| t.last().clone()).collect();
    let agree = limits.iter().enumerate().all(|(i, a)| {
        limits
            .iter()
            .enumerate()
            .all(|(j, b)| i == j || space.tau_close(a, b, agree_tol))
    });
    Ok(UniquenessProbe {
        unique: all_converged && agree,
        all_converged,
        iterations: traces.iter().map(|t| t.n_iters).collect(),
        limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::norm;
    use crate::mapping::{Affine, Constant, Identity, RotationHalf, Scale};

    fn dirac() -> PcmSpace {
        PcmSpace::dirac(2).unwrap()
    }

    #[test]
    fn rotation_orbit_by_hand() {
        let trace = picard(&dirac(), &RotationHalf, &[1.0, 0.0], 1e-10, 10_000).unwrap();
        assert_eq!(trace.points[1], vec![0.5, 0.5]);
        assert!(trace.points[2][0].abs() < 1e-15 && (trace.points[2][1] - 0.5).abs() < 1e-15);
        for (n, p) in trace.points.iter().enumerate().take(40) {
            assert!((norm(p) - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-12);
        }
        assert!(trace.converged());
        assert!(norm(trace.last()) < 1e-9);
        assert_eq!(trace.n_iters, trace.points.len() - 1);
        assert_eq!(trace.steps.len(), trace.n_iters);
    }

    #[test]
    fn identity_stops_after_one_step() {
        let trace = picard(&dirac(), &Identity, &[0.3, 0.2], 0.1, 50).unwrap();
        assert_eq!(trace.n_iters, 1);
        assert_eq!(trace.stopped_reason, StopReason::Converged);
    }

    #[test]
    fn unit_shift_hits_max_iter() {
        let shift = Affine::shift(vec![1.0, 0.0]).unwrap();
        let trace = picard(&dirac(), &shift, &[0.0, 0.0], 0.5, 25).unwrap();
        assert_eq!(trace.stopped_reason, StopReason::MaxIter);
        assert_eq!(trace.n_iters, 25);
    }

    #[test]
    fn dirac_stopping_rule_is_step_length() {
        let space = dirac();
        let trace = picard(&space, &Scale(0.5), &[1.0, 0.0], 1e-3, 1000).unwrap();
        let n = trace.n_iters;
        let dist = |i: usize| {
            norm(&[
                trace.points[i][0] - trace.points[i + 1][0],
                trace.points[i][1] - trace.points[i + 1][1],
            ])
        };
        assert!(dist(n - 1) < 1e-3);
        assert!((0..n - 1).all(|i| dist(i) >= 1e-3));
    }

    #[test]
    fn divergence_carries_trace() {
        let blowup = Scale(1e200);
        match picard(&dirac(), &blowup, &[1.0, 1.0], 1e-6, 100) {
            Err(Error::Divergence { trace }) => {
                assert_eq!(trace.stopped_reason, StopReason::Diverged);
                assert!(trace.last().iter().any(|v| !v.is_finite()));
                assert_eq!(trace.n_iters, 2);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn picard_rejects_bad_inputs() {
        let space = dirac().with_cone(crate::cone::Cone::orthant(2).unwrap()).unwrap();
        assert!(picard(&space, &Identity, &[-1.0, 0.0], 0.1, 10).is_err());
        assert!(picard(&space, &Identity, &[1.0, 0.0], 0.0, 10).is_err());
        assert!(picard(&space, &Identity, &[1.0, 0.0], 0.1, 0).is_err());
        assert!(picard(&space, &Identity, &[1.0], 0.1, 10).is_err());
    }

    #[test]
    fn kannan_bound_examples() {
        let f = DistFn::gaussian_shift(0.7).unwrap();
        assert_eq!(kannan_bound(&f, 0.3, 0, 1.3).unwrap(), f.eval(1.3));
        assert_eq!(kannan_bound(&f, 0.25, 3, 1.0).unwrap(), f.eval(8.0));
        let step = DistFn::dirac(1.0).unwrap();
        assert_eq!(kannan_bound(&step, 0.25, 3, 1.0).unwrap(), 1.0);
        assert!(kannan_bound(&step, 0.5, 3, 1.0).is_err());
        assert!(kannan_bound(&step, 0.25, 3, 0.0).is_err());
    }

    #[test]
    fn chain_bound_examples() {
        let f = DistFn::gaussian_shift(0.4).unwrap();
        for tnorm in TNorm::ALL {
            assert_eq!(
                cauchy_chain_bound(&f, 0.3, 4, 5, 0.9, tnorm).unwrap(),
                kannan_bound(&f, 0.3, 4, 0.9).unwrap()
            );
        }
        let zero = DistFn::dirac(0.0).unwrap();
        assert_eq!(cauchy_chain_bound(&zero, 0.2, 0, 9, 1e-3, TNorm::Product).unwrap(), 1.0);
        let step = DistFn::dirac(1.0).unwrap();
        assert_eq!(cauchy_chain_bound(&step, 0.25, 2, 4, 1.0, TNorm::Minimum).unwrap(), 1.0);
        // 1 / (2 * 0.5^2) = 2 and 1 / (2 * 0.5^3) = 4, both past the step at 1;
        // at t = 0.4 the first term sits at 0.8 < 1
        assert_eq!(cauchy_chain_bound(&step, 0.25, 2, 4, 0.4, TNorm::Minimum).unwrap(), 0.0);
        assert!(cauchy_chain_bound(&step, 0.25, 4, 4, 1.0, TNorm::Minimum).is_err());
    }

    #[test]
    fn bounds_hold_for_contractive_scale() {
        let space = dirac();
        let trace = picard(&space, &Scale(0.25), &[0.8, -0.6], 1e-12, 1000).unwrap();
        let check = check_bounds(&space, &trace, 0.4, &TimeGrid::default(), TNorm::Minimum, 0.0).unwrap();
        assert!(check.holds, "{check:?}");
        assert!(check.chain_checks > 0);
    }

    #[test]
    fn single_step_trace_holds() {
        let space = dirac();
        let trace = picard(&space, &Constant(vec![0.0, 0.0]), &[0.0, 0.0], 0.1, 10).unwrap();
        assert_eq!(trace.n_iters, 1);
        let check = check_bounds(&space, &trace, 0.25, &TimeGrid::default(), TNorm::Product, 0.0).unwrap();
        assert!(check.holds);
        assert_eq!(check.worst_margin, 0.0);
    }

    #[test]
    fn shifted_identity_violates_bounds() {
        let space = dirac();
        let shift = Affine::shift(vec![1.0, 0.0]).unwrap();
        let trace = picard(&space, &shift, &[0.0, 0.0], 0.5, 10).unwrap();
        let check = check_bounds(&space, &trace, 0.25, &TimeGrid::default(), TNorm::Minimum, 0.0).unwrap();
        assert!(!check.holds);
        assert!(check.step_violations > 0);
        let v = &check.violations[0];
        assert_eq!((v.lhs, v.rhs), (0.0, 1.0));
    }

    #[test]
    fn fixed_point_examples() {
        let space = dirac();
        let g = TimeGrid::default();
        assert!(
            verify_fixed_point(&space, &RotationHalf, &[0.0, 0.0], &g, 0.0)
                .unwrap()
                .is_fixed
        );
        let not = verify_fixed_point(&space, &RotationHalf, &[1.0, 0.0], &g, 0.0).unwrap();
        assert!(!not.is_fixed);
        assert_eq!(not.worst, 0.0);
        assert!(
            verify_fixed_point(&space, &Identity, &[0.4, 9.0], &g, 0.0)
                .unwrap()
                .is_fixed
        );
    }

    #[test]
    fn uniqueness_examples() {
        let space = dirac();
        let starts = vec![vec![1.0, 0.0], vec![-0.3, 0.9]];
        let probe = uniqueness_probe(&space, &Identity, &starts, 1e-8, 100, 1e-6).unwrap();
        assert!(!probe.unique);
        assert!(probe.all_converged);
        let c = Constant(vec![0.25, 0.5]);
        let probe = uniqueness_probe(&space, &c, &starts, 1e-8, 100, 1e-6).unwrap();
        assert!(probe.unique);
        assert!(probe.limits.iter().all(|l| l == &vec![0.25, 0.5]));
        assert!(uniqueness_probe(&space, &c, &starts[..1], 1e-8, 100, 1e-6).is_err());
    }

    #[test]
    fn chain_pair_layout() {
        assert_eq!(chain_pairs(3, 8), vec![(0, 1), (0, 2), (1, 2)]);
        let pairs = chain_pairs(20, 2);
        assert!(pairs.contains(&(0, 19)));
        assert!(pairs.contains(&(0, 2)));
        assert!(!pairs.contains(&(0, 3)));
    }
}
