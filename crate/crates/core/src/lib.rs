//! Probabilistic cone metric spaces as executable objects.
//!
//! Distances between points are distribution functions ([`dist::DistFn`]),
//! aggregated through a t-norm ([`tnorm::TNorm`]), with an optional cone
//! ([`cone::Cone`]) constraining the feasible points. On top of that the
//! crate classifies self-maps against the Banach, Kannan, Chatterjea and
//! Zamfirescu contraction conditions ([`contract`]), runs Picard iteration
//! with tau-convergence stopping and a-priori distributional bounds
//! ([`solver`]), and solves random operator and random Volterra integral
//! equations by Monte Carlo ([`stochastic`]).

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod contract;
pub mod dist;
pub mod error;
pub mod grid;
pub mod mapping;
pub mod rng;
pub mod solver;
pub mod space;
pub mod stochastic;
pub mod tnorm;

pub use cone::Cone;
pub use contract::{ContractionCertificate, ContractionKind};
pub use dist::{DistFn, Probability};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use mapping::{Mapping, MappingSpec};
pub use solver::IterationTrace;
pub use space::{ConeGaussian, DiracMetric, Distance, PcmSpace, Point};
pub use tnorm::TNorm;
