//! Self-maps of `R^d` and the built-in registry used by configuration files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::norm;
use crate::error::{Error, Result};

/// A deterministic map `R^d -> R^d`.
pub trait Mapping: Send + Sync + fmt::Debug {
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn name(&self) -> String;

    /// Caveats carried into every report that uses this map.
    fn notes(&self) -> Vec<String> {
        Vec::new()
    }
}

impl<M: Mapping + ?Sized> Mapping for Box<M> {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (**self).apply(x)
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn notes(&self) -> Vec<String> {
        (**self).notes()
    }
}

/// `u -> (u + (|u| / |Au|) Au) / 2` with `A` the quarter-turn rotation of the
/// plane. Since `|Au| = |u|` this is `(I + A) u / 2`: a 45 degree rotation
/// scaled by `1/sqrt(2)`.
///
/// The formula is undefined at the origin (`|Au| = 0`); the map is extended
/// by continuity with `T(0) = 0`, its unique fixed point.
#[derive(Debug, Clone, Copy, Default)]
pub struct RotationHalf;

impl RotationHalf {
    pub const ORIGIN_NOTE: &'static str =
        "rotation-half is undefined at the origin (|Au| = 0); extended by continuity with T(0) = 0";
}

impl Mapping for RotationHalf {
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let au = [-u[1], u[0]];
        let nau = norm(&au);
        if nau == 0.0 {
            return vec![0.0, 0.0];
        }
        let ratio = norm(u) / nau;
        vec![0.5 * (u[0] + ratio * au[0]), 0.5 * (u[1] + ratio * au[1])]
    }

    fn name(&self) -> String {
        "rotation-half".into()
    }

    fn notes(&self) -> Vec<String> {
        vec![Self::ORIGIN_NOTE.to_string()]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scale(pub f64);

impl Mapping for Scale {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| self.0 * v).collect()
    }

    fn name(&self) -> String {
        format!("scale:{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Constant(pub Vec<f64>);

impl Mapping for Constant {
    fn apply(&self, _x: &[f64]) -> Vec<f64> {
        self.0.clone()
    }

    fn name(&self) -> String {
        format!("constant:{}", join(&self.0))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Mapping for Identity {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn name(&self) -> String {
        "identity".into()
    }
}

/// `x -> A x + b`, `A` stored row-major.
#[derive(Debug, Clone)]
pub struct Affine {
    dim: usize,
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl Affine {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let dim = offset.len();
        if dim == 0 || matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(
                "affine map needs a square d x d matrix and a length-d offset",
            ));
        }
        Ok(Self {
            dim,
            matrix: matrix.into_iter().flatten().collect(),
            offset,
        })
    }

    /// `x -> x + b`.
    pub fn shift(offset: Vec<f64>) -> Result<Self> {
        let d = offset.len();
        let eye = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(eye, offset)
    }
}

impl Mapping for Affine {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks(self.dim)
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    fn name(&self) -> String {
        format!("affine:{};{}", join(&self.matrix), join(&self.offset))
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Built-in mapping registry, written as strings in configuration files:
/// `rotation-half`, `scale:c`, `constant:c` or `constant:c1,c2,..`,
/// `identity`, `shift:b1,b2,..` and `affine:a11,a12,..;b1,b2,..` (matrix
/// row-major, then offset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MappingSpec {
    RotationHalf,
    Scale(f64),
    Constant(Vec<f64>),
    Identity,
    Shift(Vec<f64>),
    Affine { matrix: Vec<f64>, offset: Vec<f64> },
}

impl MappingSpec {
    /// Instantiates the map on `R^dim`; a scalar constant is broadcast.
    pub fn build(&self, dim: usize) -> Result<Box<dyn Mapping>> {
        let mismatch = |what: &str, got: usize| Error::invalid(format!("{what} has dimension {got}, space has {dim}"));
        Ok(match self {
            MappingSpec::RotationHalf => {
                if dim != 2 {
                    return Err(mismatch("rotation-half", 2));
                }
                Box::new(RotationHalf)
            }
            MappingSpec::Scale(c) => Box::new(Scale(*c)),
            MappingSpec::Identity => Box::new(Identity),
            MappingSpec::Constant(c) => match c.len() {
                1 => Box::new(Constant(vec![c[0]; dim])),
                n if n == dim => Box::new(Constant(c.clone())),
                n => return Err(mismatch("constant", n)),
            },
            MappingSpec::Shift(b) => {
                if b.len() != dim {
                    return Err(mismatch("shift", b.len()));
                }
                Box::new(Affine::shift(b.clone())?)
            }
            MappingSpec::Affine { matrix, offset } => {
                if offset.len() != dim || matrix.len() != dim * dim {
                    return Err(mismatch("affine", offset.len()));
                }
                let rows = matrix.chunks(dim).map(<[f64]>::to_vec).collect();
                Box::new(Affine::new(rows, offset.clone())?)
            }
        })
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("cannot parse {v:?} as a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("mapping parameters must be finite"));
    }
    Ok(values)
}

impl FromStr for MappingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a)),
            None => (s.trim(), None),
        };
        match (head, args) {
            ("rotation-half", None) => Ok(MappingSpec::RotationHalf),
            ("identity", None) => Ok(MappingSpec::Identity),
            ("scale", Some(a)) => {
                let v = parse_list(a)?;
                match v.as_slice() {
                    [c] => Ok(MappingSpec::Scale(*c)),
                    _ => Err(Error::invalid("scale takes exactly one factor")),
                }
            }
            ("constant", Some(a)) => Ok(MappingSpec::Constant(parse_list(a)?)),
            ("shift", Some(a)) => Ok(MappingSpec::Shift(parse_list(a)?)),
            ("affine", Some(a)) => {
                let (m, b) = a
                    .split_once(';')
                    .ok_or_else(|| Error::invalid("affine expects \"affine:<matrix row-major>;<offset>\""))?;
                let matrix = parse_list(m)?;
                let offset = parse_list(b)?;
                if matrix.len() != offset.len() * offset.len() {
                    return Err(Error::invalid(format!(
                        "affine matrix has {} entries, expected {} for offset of length {}",
                        matrix.len(),
                        offset.len() * offset.len(),
                        offset.len()
                    )));
                }
                Ok(MappingSpec::Affine { matrix, offset })
            }
            _ => Err(Error::invalid(format!(
                "unknown mapping {s:?}; expected rotation-half, scale:c, constant:c, identity, shift:b or affine:A;b"
            ))),
        }
    }
}

impl TryFrom<String> for MappingSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingSpec::RotationHalf => f.write_str("rotation-half"),
            MappingSpec::Identity => f.write_str("identity"),
            MappingSpec::Scale(c) => write!(f, "scale:{c}"),
            MappingSpec::Constant(c) => write!(f, "constant:{}", join(c)),
            MappingSpec::Shift(b) => write!(f, "shift:{}", join(b)),
            MappingSpec::Affine { matrix, offset } => write!(f, "affine:{};{}", join(matrix), join(offset)),
        }
    }
}

impl From<MappingSpec> for String {
    fn from(spec: MappingSpec) -> String {
        spec.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_half_orbit_by_hand() {
        let t = RotationHalf;
        assert_eq!(t.apply(&[1.0, 0.0]), vec![0.5, 0.5]);
        let x2 = t.apply(&[0.5, 0.5]);
        assert!(x2[0].abs() < 1e-15 && (x2[1] - 0.5).abs() < 1e-15);
        assert_eq!(t.apply(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn rotation_half_norm_ratio() {
        let t = RotationHalf;
        for u in [[3.0, -4.0], [1e-8, 2e-8], [-7.5, 0.25]] {
            let ratio = norm(&t.apply(&u)) / norm(&u);
            assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_registry() {
        assert_eq!(
            "rotation-half".parse::<MappingSpec>().unwrap(),
            MappingSpec::RotationHalf
        );
        assert_eq!("scale:0.5".parse::<MappingSpec>().unwrap(), MappingSpec::Scale(0.5));
        assert_eq!(
            "constant:1,2".parse::<MappingSpec>().unwrap(),
            MappingSpec::Constant(vec![1.0, 2.0])
        );
        assert_eq!(
            "shift:1,0".parse::<MappingSpec>().unwrap(),
            MappingSpec::Shift(vec![1.0, 0.0])
        );
        let affine: MappingSpec = "affine:0.5,0,0,0.5;1,2".parse().unwrap();
        let map = affine.build(2).unwrap();
        assert_eq!(map.apply(&[2.0, 4.0]), vec![2.0, 4.0]);
        assert!("affine:1,2,3;1,2".parse::<MappingSpec>().is_err());
        assert!("scale".parse::<MappingSpec>().is_err());
        assert!("scale:x".parse::<MappingSpec>().is_err());
        assert!("warp:1".parse::<MappingSpec>().is_err());
        for s in [
            "rotation-half",
            "scale:0.25",
            "constant:3",
            "identity",
            "shift:1,0",
            "affine:1,0,0,1;0,0",
        ] {
            assert_eq!(s.parse::<MappingSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn build_checks_dimension() {
        assert!(MappingSpec::RotationHalf.build(3).is_err());
        assert!(MappingSpec::Shift(vec![1.0]).build(2).is_err());
        let c = MappingSpec::Constant(vec![0.5]).build(3).unwrap();
        assert_eq!(c.apply(&[9.0, 9.0, 9.0]), vec![0.5; 3]);
        let s = MappingSpec::Shift(vec![1.0, 0.0]).build(2).unwrap();
        assert_eq!(s.apply(&[1.0, 1.0]), vec![2.0, 1.0]);
    }
}
