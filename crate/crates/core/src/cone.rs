//! Pointed convex cones in `R^d` and the partial order they induce.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Slack applied to every membership inequality.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "ConeSpec")]
pub enum Cone {
    /// `{x : x_i >= 0 for all i}`.
    Orthant { dim: usize },
    /// `{x : a_i . x >= 0 for all i}`.
    Halfspaces { dim: usize, normals: Vec<Vec<f64>> },
}

// wire form: halfspace dimension is implied by the normals
#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ConeSpec {
    Orthant {
        dim: usize,
    },
    Halfspaces {
        #[serde(default)]
        dim: Option<usize>,
        normals: Vec<Vec<f64>>,
    },
}

impl TryFrom<ConeSpec> for Cone {
    type Error = Error;

    fn try_from(spec: ConeSpec) -> Result<Self> {
        match spec {
            ConeSpec::Orthant { dim } => Cone::orthant(dim),
            ConeSpec::Halfspaces { dim, normals } => {
                let cone = Cone::halfspaces(normals)?;
                match dim {
                    Some(d) if d != cone.dim() => Err(Error::invalid(format!(
                        "halfspace cone declares dim {d} but normals have dimension {}",
                        cone.dim()
                    ))),
                    _ => Ok(cone),
                }
            }
        }
    }
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("cone dimension must be positive"));
        }
        Ok(Cone::Orthant { dim })
    }

    /// Intersection of halfspaces through the origin. The normals must span
    /// `R^d`; otherwise the cone contains a line and is not pointed.
    pub fn halfspaces(normals: Vec<Vec<f64>>) -> Result<Self> {
        let dim = normals.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(Error::invalid("halfspace cone needs at least one nonempty normal"));
        }
        if normals.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("halfspace normals must share one dimension"));
        }
        if normals.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("halfspace normals must be finite"));
        }
        if rank(&normals) < dim {
            return Err(Error::invalid(
                "halfspace normals do not span the space; cone is not pointed",
            ));
        }
        Ok(Cone::Halfspaces { dim, normals })
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { dim } | Cone::Halfspaces { dim, .. } => *dim,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "vector of dimension {} tested against cone of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Cone::Orthant { .. } => x.iter().all(|&v| v >= -MEMBERSHIP_TOL),
            Cone::Halfspaces { normals, .. } => normals.iter().all(|a| dot(a, x) >= -MEMBERSHIP_TOL),
        }
    }

    /// `x <= y` iff `y - x` lies in the cone.
    pub fn leq(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let diff: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
        Ok(self.contains_unchecked(&diff))
    }

    /// A random cone member with entries of order one.
    pub fn sample_member<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Cone::Orthant { dim } => (0..*dim).map(|_| rng.random::<f64>()).collect(),
            Cone::Halfspaces { dim, .. } => loop {
                let x: Vec<f64> = (0..*dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                if self.contains_unchecked(&x) {
                    break x;
                }
            },
        }
    }

    /// Sampled check of normality with constant `n`: for pairs `0 <= x <= y`
    /// verifies `|x| <= n |y|` in the Euclidean norm.
    ///
    /// Each pair draws `y` and `p` from the cone and sets `x = y - lambda p`,
    /// halving `lambda` from a uniform draw until `x` is back in the cone.
    /// The first pair is always `x = y`.
    pub fn normality_check(&self, n: f64, sample_count: usize, seed: u64) -> Result<NormalityReport> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid(format!("normality constant must be positive, got {n}")));
        }
        if sample_count == 0 {
            return Err(Error::invalid("normality check needs at least one sample"));
        }
        let mut rng = stream_rng(seed, streams::CONE_NORMALITY);
        let mut worst_ratio = 0.0_f64;
        let mut witness: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut holds = true;
        for i in 0..sample_count {
            let y = self.sample_member(&mut rng);
            let x = if i == 0 {
                y.clone()
            } else {
                let p = self.sample_member(&mut rng);
                let mut lambda: f64 = rng.random();
                let mut x = axpy(&y, -lambda, &p);
                let mut halvings = 0;
                while !(self.contains_unchecked(&x)) && halvings < 64 {
                    lambda *= 0.5;
                    halvings += 1;
                    x = axpy(&y, -lambda, &p);
                }
                if self.contains_unchecked(&x) {
                    x
                } else {
                    y.clone()
                }
            };
            let (nx, ny) = (norm(&x), norm(&y));
            if ny > 0.0 {
                let ratio = nx / ny;
                if ratio > worst_ratio {
                    worst_ratio = ratio;
                }
            }
            if nx > n * ny && holds {
                holds = false;
                witness = Some((x, y));
            }
        }
        Ok(NormalityReport {
            constant: n,
            samples: sample_count,
            holds,
            worst_ratio,
            witness,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub constant: f64,
    pub samples: usize,
    pub holds: bool,
    pub worst_ratio: f64,
    /// First sampled `(x, y)` with `|x| > N |y|`.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn axpy(y: &[f64], a: f64, p: &[f64]) -> Vec<f64> {
    y.iter().zip(p).map(|(yi, pi)| yi + a * pi).collect()
}

fn rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let scale = m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let eps = 1e-12 * scale.max(1.0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())) else {
            break;
        };
        if m[pivot][col].abs() <= eps {
            continue;
        }
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank {
                let f = row[col] / pivot_row[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}
