//! One function per subcommand. Each returns the config echo and the
//! results section of the report and writes its CSV files.

use std::sync::Arc;

use anyhow::Result;
use pcone::contract::{
    check_banach, check_chatterjea, check_kannan, check_zamfirescu, kannan_alpha_sweep, sample_pairs,
};
use pcone::solver::{check_bounds, picard, uniqueness_probe, verify_fixed_point};
use pcone::stochastic::{sie_solve, Forcing, Kernel, KernelShape, Nonlinearity, SieProblem, SieSolution, SieSpec};
use pcone::{
    Cone, ConeGaussian, ContractionCertificate, Error, IterationTrace, MappingSpec, PcmSpace, TNorm, TimeGrid,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{build_grid, build_mapping, AxiomsConfig, ClassifyConfig, SieConfig, SolveConfig};
use crate::report::OutputDir;

pub struct Outcome {
    pub config: Value,
    pub results: Value,
}

fn to_value(v: impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn axiom_flags(report: &pcone::space::AxiomReport) -> Vec<&'static str> {
    let mut flags = Vec::new();
    if !report.identity.pass {
        flags.push("identity-violation");
    }
    if !report.symmetry.pass {
        flags.push("asymmetry");
    }
    if !report.triangle.pass {
        flags.push("triangle-violation");
    }
    if !report.point_cone.pass {
        flags.push("infeasible-points");
    }
    if report.sub_distribution.present {
        flags.push("sub-distribution");
    }
    flags
}

pub fn run_axioms(cfg: &AxiomsConfig, seed: u64) -> Result<Outcome> {
    let space = cfg.space.build()?;
    let grid = build_grid(&cfg.grid)?;
    let report = space.check_axioms(cfg.n_points, &grid, cfg.tol, seed)?;
    let results = json!({ "flags": axiom_flags(&report), "report": to_value(&report)? });
    Ok(Outcome {
        config: to_value(cfg)?,
        results,
    })
}

fn passing(certs: &[ContractionCertificate], pick: impl Fn(&ContractionCertificate) -> Option<f64>) -> Vec<f64> {
    certs.iter().filter(|c| c.pass).filter_map(pick).collect()
}

pub fn run_classify(cfg: &ClassifyConfig, seed: u64) -> Result<Outcome> {
    let space = cfg.space.build()?;
    let map = build_mapping(&cfg.mapping, space.dim())?;
    let grid = build_grid(&cfg.grid)?;
    let pairs = sample_pairs(&space, map.as_ref(), cfg.n_pairs, seed)?;
    let (map, tol) = (map.as_ref(), cfg.tol);

    let banach = cfg
        .banach
        .iter()
        .map(|&a| check_banach(&space, map, a, &pairs, &grid, tol))
        .collect::<pcone::Result<Vec<_>>>()?;
    let kannan = cfg
        .kannan_alphas()
        .iter()
        .map(|&a| check_kannan(&space, map, a, &pairs, &grid, tol))
        .collect::<pcone::Result<Vec<_>>>()?;
    let chatterjea = cfg
        .chatterjea
        .iter()
        .map(|&a| check_chatterjea(&space, map, a, &pairs, &grid, tol))
        .collect::<pcone::Result<Vec<_>>>()?;
    let zamfirescu = cfg
        .zamfirescu
        .iter()
        .map(|p| check_zamfirescu(&space, map, p.alpha, p.beta, p.gamma, &pairs, &grid, tol))
        .collect::<pcone::Result<Vec<_>>>()?;

    let alpha = |c: &ContractionCertificate| c.params.alpha;
    let results = json!({
        "mapping": map.name(),
        "notes": map.notes(),
        "n_pairs": pairs.len(),
        "passing": {
            "banach": passing(&banach, alpha),
            "kannan": passing(&kannan, alpha),
            "chatterjea": passing(&chatterjea, alpha),
            "zamfirescu": zamfirescu.iter().filter(|c| c.pass).count(),
        },
        "certificates": {
            "banach": to_value(&banach)?,
            "kannan": to_value(&kannan)?,
            "chatterjea": to_value(&chatterjea)?,
            "zamfirescu": to_value(&zamfirescu)?,
        },
    });
    Ok(Outcome {
        config: to_value(cfg)?,
        results,
    })
}

/// `|x_{n+1}| / |x_n|` along the orbit while `|x_n| > 0`.
pub fn norm_ratios(trace: &IterationTrace) -> Vec<f64> {
    let norms: Vec<f64> = trace
        .points
        .iter()
        .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    norms
        .windows(2)
        .take_while(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect()
}

fn write_trace(out: &OutputDir, name: &str, trace: &IterationTrace, grid: &TimeGrid) -> Result<()> {
    let dim = trace.points[0].len();
    let mut header = vec!["iter".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    header.extend(grid.iter().map(|t| format!("F(t={t})")));
    let steps = trace.step_table(grid);
    let rows: Vec<Vec<f64>> = trace
        .points
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let mut row = vec![n as f64];
            row.extend(p);
            match steps.get(n) {
                Some(s) => row.extend(s),
                None => row.extend(std::iter::repeat_n(f64::NAN, grid.len())),
            }
            row
        })
        .collect();
    out.write_csv(name, &header, &rows)?;
    Ok(())
}

pub fn run_solve(cfg: &SolveConfig, seed: u64, out: &OutputDir) -> Result<Outcome> {
    let space = cfg.space.build()?;
    let map = build_mapping(&cfg.mapping, space.dim())?;
    let grid = build_grid(&cfg.grid)?;
    if cfg.x0.len() != space.dim() {
        return Err(crate::config::ConfigError(format!(
            "x0 has {} coordinates, space.dim is {}",
            cfg.x0.len(),
            space.dim()
        ))
        .into());
    }
    let trace = match picard(&space, map.as_ref(), &cfg.x0, cfg.eps, cfg.max_iter) {
        Ok(trace) => trace,
        Err(Error::Divergence { trace }) => {
            write_trace(out, "trace.csv", &trace, &grid)?;
            return Err(Error::Divergence { trace }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_trace(out, "trace.csv", &trace, &grid)?;

    let fixed_point = verify_fixed_point(&space, map.as_ref(), trace.last(), &grid, cfg.fixed_point_tol)?;
    let bounds = match &cfg.bounds {
        Some(b) => {
            let tnorm = b.tnorm.unwrap_or(space.tnorm());
            Some(check_bounds(&space, &trace, b.alpha, &grid, tnorm, b.tol)?)
        }
        None => None,
    };
    let uniqueness = match &cfg.uniqueness {
        Some(u) => {
            let starts = space.sample_points(u.starts, seed)?;
            Some(uniqueness_probe(
                &space,
                map.as_ref(),
                &starts,
                cfg.eps,
                cfg.max_iter,
                u.agree_tol,
            )?)
        }
        None => None,
    };
    let results = json!({
        "mapping": map.name(),
        "notes": map.notes(),
        "trace": to_value(trace.summary())?,
        "norm_ratios": norm_ratios(&trace),
        "fixed_point": to_value(&fixed_point)?,
        "bounds": to_value(&bounds)?,
        "uniqueness": to_value(&uniqueness)?,
    });
    Ok(Outcome {
        config: to_value(cfg)?,
        results,
    })
}

fn sie_results(p: &SieProblem, s: &SieSolution) -> Result<Value> {
    let mut warnings = Vec::new();
    if !s.conditions.satisfied {
        warnings.push(format!(
            "conditions not satisfied: K = {} (needs < 0.5), {} paths with L M >= 0.5; iterates reported anyway",
            s.conditions.k_const, s.conditions.paths_violating_lm
        ));
    }
    if !s.converged {
        warnings.push(format!("no convergence within {} iterations", s.iterations));
    }
    let ratios: Vec<f64> = s
        .l2_diffs
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let mean = s.field.mean_path();
    Ok(json!({
        "conditions": to_value(&s.conditions)?,
        "warnings": warnings,
        "converged": s.converged,
        "iterations": s.iterations,
        "l2_diffs": s.l2_diffs,
        "l2_diff_ratios": ratios,
        "nonnegative_iterates": s.nonnegative_iterates,
        "n_paths": p.n_paths(),
        "n_times": p.times().len(),
        "mean_at_end": mean.last().copied(),
    }))
}

fn write_sie(out: &OutputDir, prefix: &str, p: &SieProblem, s: &SieSolution) -> Result<()> {
    let mean = s.field.mean_path();
    let rows: Vec<Vec<f64>> = p.times().iter().zip(&mean).map(|(t, m)| vec![*t, *m]).collect();
    out.write_csv(&format!("{prefix}mean_path.csv"), &["t".into(), "mean".into()], &rows)?;
    let rows: Vec<Vec<f64>> = s
        .l2_diffs
        .iter()
        .enumerate()
        .map(|(i, d)| vec![(i + 1) as f64, *d])
        .collect();
    out.write_csv(
        &format!("{prefix}l2_diffs.csv"),
        &["iter".into(), "l2_diff".into()],
        &rows,
    )?;
    Ok(())
}

pub fn run_sie(cfg: &SieConfig, seed: u64, out: &OutputDir) -> Result<Outcome> {
    let problem =
        SieProblem::new(cfg.problem, seed).map_err(|e| crate::config::ConfigError(format!("problem: {e}")))?;
    let solution = sie_solve(&problem, cfg.eps, cfg.max_iter)?;
    write_sie(out, "sie_", &problem, &solution)?;
    Ok(Outcome {
        config: to_value(cfg)?,
        results: sie_results(&problem, &solution)?,
    })
}

/// The fixed reproduction: the rotation-half orbit, its Kannan sweep on
/// random and on orbit pairs, the axiom report of the asymmetric cone
/// space, the Zamfirescu rates and the linear Volterra benchmark.
pub fn run_demo(seed: u64, out: &OutputDir) -> Result<Outcome> {
    let grid = TimeGrid::default();
    let dirac = PcmSpace::dirac(2)?;
    let rotation = MappingSpec::RotationHalf.build(2)?;

    let trace = picard(&dirac, rotation.as_ref(), &[1.0, 0.0], 1e-10, 500)?;
    write_trace(out, "rotation_trace.csv", &trace, &grid)?;
    let fixed_point = verify_fixed_point(&dirac, rotation.as_ref(), &[0.0, 0.0], &grid, 0.0)?;

    let random_pairs = sample_pairs(&dirac, rotation.as_ref(), 64, seed)?;
    let orbit_pairs: Vec<_> = trace.points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let sweep = kannan_alpha_sweep();
    let mut random_pass = Vec::new();
    let mut orbit_pass = Vec::new();
    for &a in &sweep {
        if check_kannan(&dirac, rotation.as_ref(), a, &random_pairs, &grid, 0.0)?.pass {
            random_pass.push(a);
        }
        if check_kannan(&dirac, rotation.as_ref(), a, &orbit_pairs, &grid, 0.0)?.pass {
            orbit_pass.push(a);
        }
    }

    let cone_space = PcmSpace::new(2, Arc::new(ConeGaussian::new(Cone::orthant(2)?, 0.5)?), TNorm::Minimum)?;
    let axioms = cone_space.check_axioms(10, &grid, 0.0, seed)?;

    let zamfirescu: Vec<Value> = [(0.5, 0.25, 0.2), (0.3, 0.3, 0.3), (0.5, 0.4, 0.2)]
        .iter()
        .map(|&(a, b, g)| match pcone::contract::zamfirescu_delta(a, b, g) {
            Ok(d) => json!({ "alpha": a, "beta": b, "gamma": g, "delta": d, "certified": true }),
            Err(Error::RateNotCertified { delta }) => {
                json!({ "alpha": a, "beta": b, "gamma": g, "delta": delta, "certified": false })
            }
            Err(e) => json!({ "alpha": a, "beta": b, "gamma": g, "error": e.to_string() }),
        })
        .collect();

    let linear = SieSpec {
        n_steps: 1000,
        n_paths: 1,
        kernel: Kernel::deterministic(KernelShape::Constant { value: 1.0 }),
        forcing: Forcing::Constant { value: 1.0, noise: 0.0 },
        nonlinearity: Nonlinearity::Linear {
            slope: 0.4,
            intercept: 0.0,
        },
        lipschitz: None,
    };
    let problem = SieProblem::new(linear, seed)?;
    let solution = sie_solve(&problem, 1e-12, 200)?;
    write_sie(out, "sie_", &problem, &solution)?;
    let max_error = problem
        .times()
        .iter()
        .zip(solution.field.path(0))
        .map(|(t, x)| (x - (0.4 * t).exp()).abs())
        .fold(0.0, f64::max);

    let results = json!({
        "rotation": {
            "notes": rotation.notes(),
            "trace": to_value(trace.summary())?,
            "norm_ratios": norm_ratios(&trace),
            "origin_fixed_point": to_value(&fixed_point)?,
            "kannan_sweep": sweep,
            "kannan_passing_random_pairs": random_pass,
            "kannan_passing_orbit_pairs": orbit_pass,
        },
        "cone_space_axioms": { "flags": axiom_flags(&axioms), "report": to_value(&axioms)? },
        "zamfirescu": zamfirescu,
        "linear_volterra": {
            "results": sie_results(&problem, &solution)?,
            "max_abs_error_vs_exp": max_error,
        },
    });
    Ok(Outcome {
        config: json!({ "builtin": "demo" }),
        results,
    })
}
