use std::sync::Arc;

use pcone::contract::{check_banach, check_chatterjea, check_kannan, check_zamfirescu, sample_pairs};
use pcone::dist::dominates;
use pcone::mapping::{Affine, Constant, Scale};
use pcone::rng::stream_rng;
use pcone::solver::{kannan_bound, picard};
use pcone::{Cone, DistFn, Mapping, PcmSpace, TNorm, TimeGrid};
use proptest::prelude::*;

fn any_dist() -> impl Strategy<Value = DistFn> {
    prop_oneof![
        (0.0f64..5.0).prop_map(|d| DistFn::dirac(d).unwrap()),
        (0.0f64..5.0).prop_map(|d| DistFn::gaussian_shift(d).unwrap()),
        (0.01f64..=1.0).prop_map(|d| DistFn::scaled_gaussian(d).unwrap()),
        prop::collection::vec(0.0f64..5.0, 1..40).prop_map(|s| DistFn::from_samples(&s).unwrap()),
    ]
}

fn random_grid() -> impl Strategy<Value = TimeGrid> {
    prop::collection::btree_set(1u32..100_000, 2..30)
        .prop_map(|s| TimeGrid::new(s.into_iter().map(|k| k as f64 * 1e-4).collect()).unwrap())
}

fn cones() -> impl Strategy<Value = Cone> {
    prop_oneof![
        (1usize..4).prop_map(|d| Cone::orthant(d).unwrap()),
        Just(Cone::halfspaces(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()),
        Just(Cone::halfspaces(vec![vec![1.0, 0.0], vec![-1.0, 2.0], vec![0.0, 1.0]]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn dist_is_monotone(f in any_dist(), grid in random_grid()) {
        let values = f.eval_on(&grid);
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn empirical_atoms_are_left_continuous(samples in prop::collection::vec(0.0f64..5.0, 1..60)) {
        let f = DistFn::from_samples(&samples).unwrap();
        for &s in &samples {
            let below = samples.iter().filter(|&&v| v < s).count();
            prop_assert_eq!(f.eval(s), below as f64 / samples.len() as f64);
        }
    }

    #[test]
    fn timescale_composes(f in any_dist(), a in 0.1f64..10.0, b in 0.1f64..10.0, grid in random_grid()) {
        let twice = f.timescale(a).unwrap().timescale(b).unwrap();
        let once = f.timescale(a * b).unwrap();
        for t in grid.iter() {
            prop_assert!((twice.eval(t) - once.eval(t)).abs() <= 1e-12, "t = {}", t);
        }
    }

    #[test]
    fn dominates_is_reflexive_and_antisymmetric(f in any_dist(), g in any_dist()) {
        let grid = TimeGrid::default();
        prop_assert!(dominates(&f, &f, &grid, 0.0).holds);
        if dominates(&f, &g, &grid, 0.0).holds && dominates(&g, &f, &grid, 0.0).holds {
            for t in grid.iter() {
                prop_assert_eq!(f.eval(t), g.eval(t));
            }
        }
    }

    #[test]
    fn tnorm_fold_ignores_parenthesization(values in prop::collection::vec(0.0f64..=1.0, 1..10), split in 0usize..10) {
        for t in [TNorm::Minimum, TNorm::Product] {
            let k = split.min(values.len());
            let grouped = t.apply(t.fold(&values[..k]).unwrap(), t.fold(&values[k..]).unwrap()).unwrap();
            prop_assert!((grouped - t.fold(&values).unwrap()).abs() <= 1e-15);
        }
    }

    #[test]
    fn cone_is_closed_under_conic_combinations(cone in cones(), seed in any::<u64>(), a in 0.0f64..10.0, b in 0.0f64..10.0) {
        let mut rng = stream_rng(seed, 0);
        for _ in 0..20 {
            let x = cone.sample_member(&mut rng);
            let y = cone.sample_member(&mut rng);
            let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            prop_assert!(cone.contains(&z).unwrap());
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            if x.iter().any(|v| v.abs() > 1e-9) {
                prop_assert!(!cone.contains(&neg).unwrap(), "pointedness fails at {:?}", x);
            }
        }
    }

    #[test]
    fn leq_is_a_partial_order(cone in cones(), seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 1);
        let x = cone.sample_member(&mut rng);
        let step1 = cone.sample_member(&mut rng);
        let step2 = cone.sample_member(&mut rng);
        let y: Vec<f64> = x.iter().zip(&step1).map(|(u, v)| u + v).collect();
        let z: Vec<f64> = y.iter().zip(&step2).map(|(u, v)| u + v).collect();
        prop_assert!(cone.leq(&x, &x).unwrap());
        prop_assert!(cone.leq(&x, &y).unwrap() && cone.leq(&y, &z).unwrap());
        prop_assert!(cone.leq(&x, &z).unwrap());
        if cone.leq(&y, &x).unwrap() {
            prop_assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() <= 1e-12));
        }
    }

    #[test]
    fn dirac_space_passes_axioms_for_every_seed(seed in any::<u64>(), dim in 1usize..4) {
        let space = PcmSpace::dirac(dim).unwrap();
        let grid = TimeGrid::log_spaced(1e-2, 10.0, 12).unwrap();
        prop_assert!(space.check_axioms(5, &grid, 0.0, seed).unwrap().all_pass);
    }

    #[test]
    fn tau_convergence_is_symmetric_and_monotone_in_eps(
        x in prop::collection::vec(-1.0f64..1.0, 2),
        y in prop::collection::vec(-1.0f64..1.0, 2),
        eps in 1e-3f64..0.9,
        extra in 0.0f64..0.09,
    ) {
        let space = PcmSpace::dirac(2).unwrap();
        let forward = space.tau_converged(&x, &y, eps).unwrap();
        prop_assert_eq!(forward, space.tau_converged(&y, &x, eps).unwrap());
        if forward {
            prop_assert!(space.tau_converged(&x, &y, eps + extra).unwrap());
        }
    }

    #[test]
    fn kannan_is_monotone_in_alpha(c in 0.0f64..0.6, seed in any::<u64>()) {
        let space = PcmSpace::dirac(2).unwrap();
        let map = Scale(c);
        let pairs = sample_pairs(&space, &map, 24, seed).unwrap();
        let grid = TimeGrid::default();
        let alphas = [0.1, 0.2, 0.3, 0.4, 0.49];
        let passes: Vec<bool> = alphas
            .iter()
            .map(|&a| check_kannan(&space, &map, a, &pairs, &grid, 0.0).unwrap().pass)
            .collect();
        for w in passes.windows(2) {
            prop_assert!(!w[0] || w[1], "{:?}", passes);
        }
    }

    #[test]
    fn zamfirescu_covers_each_clause(
        m in prop::collection::vec(-1.0f64..1.0, 4),
        b in prop::collection::vec(-0.5f64..0.5, 2),
        seed in any::<u64>(),
    ) {
        let space = PcmSpace::dirac(2).unwrap();
        let map = Affine::new(vec![vec![m[0], m[1]], vec![m[2], m[3]]], b).unwrap();
        let pairs = sample_pairs(&space, &map, 16, seed).unwrap();
        let grid = TimeGrid::default();
        let (alpha, beta, gamma) = (0.7, 0.3, 0.3);
        let any_clause = check_banach(&space, &map, alpha, &pairs, &grid, 0.0).unwrap().pass
            || check_kannan(&space, &map, beta, &pairs, &grid, 0.0).unwrap().pass
            || check_chatterjea(&space, &map, gamma, &pairs, &grid, 0.0).unwrap().pass;
        let z = check_zamfirescu(&space, &map, alpha, beta, gamma, &pairs, &grid, 0.0).unwrap();
        prop_assert!(!any_clause || z.pass);
    }

    #[test]
    fn constant_maps_pass_all_checks(c in prop::collection::vec(-1.0f64..1.0, 2), a in 0.01f64..0.49, seed in any::<u64>()) {
        let space = PcmSpace::dirac(2).unwrap();
        let map = Constant(c);
        let pairs = sample_pairs(&space, &map, 12, seed).unwrap();
        let grid = TimeGrid::default();
        prop_assert!(check_banach(&space, &map, a, &pairs, &grid, 0.0).unwrap().pass);
        prop_assert!(check_kannan(&space, &map, a, &pairs, &grid, 0.0).unwrap().pass);
        prop_assert!(check_chatterjea(&space, &map, a, &pairs, &grid, 0.0).unwrap().pass);
        prop_assert!(check_zamfirescu(&space, &map, a, a, a, &pairs, &grid, 0.0).unwrap().pass);
    }

    #[test]
    fn kannan_bound_monotone(d in 0.0f64..3.0, n in 1usize..8, a1 in 0.01f64..0.49, a2 in 0.01f64..0.49, t in 0.01f64..5.0, dt in 0.0f64..5.0) {
        let f = DistFn::gaussian_shift(d).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(kannan_bound(&f, hi, n, t).unwrap() <= kannan_bound(&f, lo, n, t).unwrap());
        prop_assert!(kannan_bound(&f, lo, n, t).unwrap() <= kannan_bound(&f, lo, n, t + dt).unwrap());
    }

    #[test]
    fn dirac_stopping_rule_is_euclidean(c in -0.99f64..0.99, x0 in prop::collection::vec(-1.0f64..1.0, 2), eps in 1e-6f64..0.5) {
        let space = PcmSpace::dirac(2).unwrap();
        let map = Scale(c);
        let trace = picard(&space, &map, &x0, eps, 10_000).unwrap();
        for (k, w) in trace.points.windows(2).enumerate() {
            let d = w[0].iter().zip(&w[1]).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            let last = k + 1 == trace.n_iters;
            prop_assert_eq!(d < eps, last && trace.converged());
        }
    }
}

#[test]
fn certificates_are_deterministic() {
    let space = PcmSpace::new(2, Arc::new(pcone::DiracMetric), TNorm::Product).unwrap();
    let map: Box<dyn Mapping> = "rotation-half".parse::<pcone::MappingSpec>().unwrap().build(2).unwrap();
    let grid = TimeGrid::default();
    let run = || {
        let pairs = sample_pairs(&space, map.as_ref(), 40, 5).unwrap();
        check_kannan(&space, map.as_ref(), 0.3, &pairs, &grid, 0.0).unwrap()
    };
    assert_eq!(run(), run());
}
