//! Sampled falsification of contraction conditions.
//!
//! Each checker evaluates a margin `lhs(t) - rhs(t)` for every sampled pair
//! `(x, y)` and every grid time `t`. A negative margin below `-tol` is a
//! counterexample; a passing certificate means no counterexample was found
//! on the sampled pairs and grid, nothing more.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::DistFn;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::mapping::Mapping;
use crate::rng::{stream_rng, streams};
use crate::space::{PcmSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContractionKind {
    Banach,
    Kannan,
    Chatterjea,
    Zamfirescu,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ContractionParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateWitness {
    pub pair_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Point>,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionCertificate {
    pub kind: ContractionKind,
    pub mapping: String,
    pub params: ContractionParams,
    pub n_pairs: usize,
    pub grid: TimeGrid,
    pub tol: f64,
    pub worst_margin: f64,
    /// Present iff the certificate failed.
    pub witness: Option<CertificateWitness>,
    pub pass: bool,
    /// Hybrid rate for Zamfirescu certificates, when it is below one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// The six distance functions any of the conditions can ask for.
struct PairDistances {
    txty: DistFn,
    xy: DistFn,
    xtx: DistFn,
    yty: DistFn,
    xty: DistFn,
    ytx: DistFn,
}

impl PairDistances {
    fn new(space: &PcmSpace, map: &dyn Mapping, x: &[f64], y: &[f64]) -> Self {
        let tx = map.apply(x);
        let ty = map.apply(y);
        Self {
            txty: space.distance(&tx, &ty),
            xy: space.distance(x, y),
            xtx: space.distance(x, &tx),
            yty: space.distance(y, &ty),
            xty: space.distance(x, &ty),
            ytx: space.distance(y, &tx),
        }
    }

    fn banach(&self, t: f64, alpha: f64) -> f64 {
        self.txty.eval(t) - self.xy.eval(t / alpha)
    }

    fn kannan(&self, t: f64, alpha: f64) -> f64 {
        let s = t / (2.0 * alpha);
        self.txty.eval(t) - self.xtx.eval(s).min(self.yty.eval(s))
    }

    fn chatterjea(&self, t: f64, alpha: f64) -> f64 {
        let s = t / (2.0 * alpha);
        self.txty.eval(t) - self.xty.eval(s).min(self.ytx.eval(s))
    }
}

/// Smallest margin with its first (pair, t) in index order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairMargin {
    pub margin: f64,
    pub pair: usize,
    pub t: f64,
}

/// Reduces per-pair minima in pair order so the result is independent of
/// how the pairs were scheduled across workers.
pub(crate) fn reduce_in_order(per_pair: impl IntoIterator<Item = Option<PairMargin>>) -> Option<PairMargin> {
    per_pair
        .into_iter()
        .flatten()
        .fold(None, |best: Option<PairMargin>, m| match best {
            Some(b) if b.margin <= m.margin => Some(b),
            _ => Some(m),
        })
}

pub(crate) fn grid_minimum(grid: &TimeGrid, pair: usize, margin: impl Fn(f64) -> f64) -> Option<PairMargin> {
    grid.iter().fold(None, |best: Option<PairMargin>, t| {
        let m = margin(t);
        match best {
            Some(b) if b.margin <= m => Some(b),
            _ => Some(PairMargin { margin: m, pair, t }),
        }
    })
}

fn check_range(name: &str, value: f64, upper: f64) -> Result<()> {
    if !(value > 0.0 && value < upper) {
        return Err(Error::invalid(format!("{name} must lie in (0, {upper}), got {value}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn certify(
    kind: ContractionKind,
    params: ContractionParams,
    space: &PcmSpace,
    map: &dyn Mapping,
    pairs: &[(Point, Point)],
    grid: &TimeGrid,
    tol: f64,
    margin: impl Fn(&PairDistances, f64) -> f64 + Sync,
) -> Result<ContractionCertificate> {
    for (x, y) in pairs {
        space.check_point(x)?;
        space.check_point(y)?;
    }
    let per_pair: Vec<Option<PairMargin>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let d = PairDistances::new(space, map, x, y);
            grid_minimum(grid, i, |t| margin(&d, t))
        })
        .collect();
    let worst = reduce_in_order(per_pair);
    let worst_margin = worst.map_or(0.0, |w| w.margin);
    let pass = worst_margin >= -tol;
    let witness = match worst {
        Some(w) if !pass => Some(CertificateWitness {
            pair_index: w.pair,
            x: Some(pairs[w.pair].0.clone()),
            y: Some(pairs[w.pair].1.clone()),
            t: w.t,
        }),
        _ => None,
    };
    Ok(ContractionCertificate {
        kind,
        mapping: map.name(),
        params,
        n_pairs: pairs.len(),
        grid: grid.clone(),
        tol,
        worst_margin,
        witness,
        pass,
        delta: None,
        notes: map.notes(),
    })
}

/// `F_{Tx,Ty}(t) >= F_{x,y}(t / alpha)`, `alpha` in `(0, 1)`.
pub fn check_banach(
    space: &PcmSpace,
    map: &dyn Mapping,
    alpha: f64,
    pairs: &[(Point, Point)],
    grid: &TimeGrid,
    tol: f64,
) -> Result<ContractionCertificate> {
    check_range("alpha", alpha, 1.0)?;
    let params = ContractionParams {
        alpha: Some(alpha),
        ..Default::default()
    };
    certify(ContractionKind::Banach, params, space, map, pairs, grid, tol, |d, t| {
        d.banach(t, alpha)
    })
}

/// `F_{Tx,Ty}(t) >= min{F_{x,Tx}(t/2a), F_{y,Ty}(t/2a)}`, `alpha` in `(0, 1/2)`.
pub fn check_kannan(
    space: &PcmSpace,
    map: &dyn Mapping,
    alpha: f64,
    pairs: &[(Point, Point)],
    grid: &TimeGrid,
    tol: f64,
) -> Result<ContractionCertificate> {
    check_range("alpha", alpha, 0.5)?;
    let params = ContractionParams {
        alpha: Some(alpha),
        ..Default::default()
    };
    certify(ContractionKind::Kannan, params, space, map, pairs, grid, tol, |d, t| {
        d.kannan(t, alpha)
    })
}

/// `F_{Tx,Ty}(t) >= min{F_{x,Ty}(t/2a), F_{y,Tx}(t/2a)}`, `alpha` in `(0, 1/2)`.
pub fn check_chatterjea(
    space: &PcmSpace,
    map: &dyn Mapping,
    alpha: f64,
    pairs: &[(Point, Point)],
    grid: &TimeGrid,
    tol: f64,
) -> Result<ContractionCertificate> {
    check_range("alpha", alpha, 0.5)?;
    let params = ContractionParams {
        alpha: Some(alpha),
        ..Default::default()
    };
    certify(
        ContractionKind::Chatterjea,
        params,
        space,
        map,
        pairs,
        grid,
        tol,
        |d, t| d.chatterjea(t, alpha),
    )
}

/// At least one of the Banach (`alpha`), Kannan (`beta`) and Chatterjea
/// (`gamma`) conditions, decided separately at every `(x, y, t)`.
#[allow(clippy::too_many_arguments)]
pub fn check_zamfirescu(
    space: &PcmSpace,
    map: &dyn Mapping,
    alpha: f64,
    beta: f64,
    gamma: f64,
    pairs: &[(Point, Point)],
    grid: &TimeGrid,
    tol: f64,
) -> Result<ContractionCertificate> {
    check_range("alpha", alpha, 1.0)?;
    check_range("beta", beta, 0.5)?;
    check_range("gamma", gamma, 0.5)?;
    let params = ContractionParams {
        alpha: Some(alpha),
        beta: Some(beta),
        gamma: Some(gamma),
    };
    let mut cert = certify(
        ContractionKind::Zamfirescu,
        params,
        space,
        map,
        pairs,
        grid,
        tol,
        |d, t| d.banach(t, alpha).max(d.kannan(t, beta)).max(d.chatterjea(t, gamma)),
    )?;
    match zamfirescu_delta(alpha, beta, gamma) {
        Ok(delta) => cert.delta = Some(delta),
        Err(Error::RateNotCertified { delta }) => cert.notes.push(format!(
            "hybrid rate delta = {delta} >= 1: geometric rate not certified"
        )),
        Err(e) => return Err(e),
    }
    Ok(cert)
}

/// `max{alpha, 2 beta / (1 - beta), 2 gamma / (1 - gamma)}`, refused with
/// [`Error::RateNotCertified`] when it is not below one.
pub fn zamfirescu_delta(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_range("alpha", alpha, 1.0)?;
    check_range("beta", beta, 0.5)?;
    check_range("gamma", gamma, 0.5)?;
    let delta = alpha.max(2.0 * beta / (1.0 - beta)).max(2.0 * gamma / (1.0 - gamma));
    if delta >= 1.0 {
        return Err(Error::RateNotCertified { delta });
    }
    Ok(delta)
}

/// `n_pairs` test pairs for `map`. Every fourth pair is diagonal `(x, x)`,
/// the next is `(x, Tx)`, the remaining two are independent draws.
pub fn sample_pairs(space: &PcmSpace, map: &dyn Mapping, n_pairs: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
    let mut rng = stream_rng(seed, streams::CONTRACT_PAIRS);
    (0..n_pairs)
        .map(|i| {
            let x = space.sample_point(&mut rng)?;
            Ok(match i % 4 {
                0 => (x.clone(), x),
                1 => {
                    let tx = map.apply(&x);
                    (x, tx)
                }
                _ => {
                    let y = space.sample_point(&mut rng)?;
                    (x, y)
                }
            })
        })
        .collect()
}

/// The alpha sweep used for Kannan classification: 0.10, 0.15, ..., 0.45.
pub fn kannan_alpha_sweep() -> Vec<f64> {
    (2..=9).map(|k| k as f64 / 20.0).collect()
}
