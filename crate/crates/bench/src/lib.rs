//! Fixtures shared by the benchmarks.

use pcone::stochastic::{Forcing, Kernel, KernelShape, Nonlinearity, SieProblem, SieSpec};
use pcone::{Mapping, MappingSpec, PcmSpace};

pub const SEED: u64 = 7;

pub fn dirac_plane() -> PcmSpace {
    PcmSpace::dirac(2).expect("two-dimensional Dirac space")
}

pub fn rotation_half() -> Box<dyn Mapping> {
    MappingSpec::RotationHalf.build(2).expect("rotation-half is planar")
}

/// `X = 1 + 0.1 Z + int_0^t 0.4 X ds` on `n_steps` steps and `n_paths` paths.
pub fn linear_volterra(n_steps: usize, n_paths: usize) -> SieProblem {
    let spec = SieSpec {
        n_steps,
        n_paths,
        kernel: Kernel::deterministic(KernelShape::Constant { value: 1.0 }),
        forcing: Forcing::Constant { value: 1.0, noise: 0.1 },
        nonlinearity: Nonlinearity::Linear {
            slope: 0.4,
            intercept: 0.0,
        },
        lipschitz: None,
    };
    SieProblem::new(spec, SEED).expect("valid benchmark problem")
}
