//! Mean of a cloud on `H^n` constrained to the ball `B(c, r)`.

use riemprox::objectives::{frechet_lipschitz, BallIndicator, DataCloud, FrechetMean, SplitProblem};
use riemprox::solvers::{crpg_solve, pga_solve, SolverTrace, StepsizeRule, StoppingCriterion};
use riemprox::theory::{
    check_strongly_convex_rate, gradient_step_bound_slack, RateEnvelope, StronglyConvexRateReport,
};
use riemprox::{Geometry, Hyperbolic, HyperbolicPoint64};

use super::{frechet_mean, instance_rng, longest, min_relative_decrease_slack, seconds, Outcome};
use crate::config::ExperimentConfig;
use crate::csv::CsvTable;
use crate::error::BenchError;
use crate::row;

/// Feasibility tolerance on `dist(final, c) - r`.
pub const FEASIBILITY_TOL: f64 = 1e-8;

pub type ConstrainedProblem =
    SplitProblem<f64, Hyperbolic, FrechetMean<HyperbolicPoint64>, BallIndicator<HyperbolicPoint64, f64>>;

pub struct ConstrainedInstance {
    pub n: usize,
    pub run: usize,
    pub problem: ConstrainedProblem,
    pub center: HyperbolicPoint64,
}

/// Ball centred at the apex; data are unit Gaussian samples around a point
/// at distance `2r` from the centre, so the constraint is active. The start
/// is the centre and `L = zeta_1(-1, D)` with `D` twice the largest distance
/// from the centre to the data.
pub fn constrained_instance(cfg: &ExperimentConfig, n: usize, run: usize) -> Result<ConstrainedInstance, BenchError> {
    let geom = Hyperbolic::new(n)?;
    let mut rng = instance_rng(cfg.seed, n, run);
    let center: HyperbolicPoint64 = geom.apex();
    let mut dir = vec![0.0; n];
    dir[0] = 2.0 * cfg.radius;
    let anchor = geom.from_spatial_tangent(&dir)?;
    let points: Vec<HyperbolicPoint64> = (0..cfg.points).map(|_| geom.sample_gaussian(&anchor, 1.0, &mut rng)).collect();
    let reach = points.iter().map(|q| geom.dist(&center, q)).fold(0.0, f64::max);
    let l = frechet_lipschitz(&geom, 2.0 * reach);
    let ball = BallIndicator::new(center.clone(), cfg.radius)?;
    let problem = SplitProblem::new(geom, FrechetMean { cloud: DataCloud::new(points)? }, ball, l, 1.0)?;
    Ok(ConstrainedInstance { n, run, problem, center })
}

pub struct ConstrainedRun {
    pub solver: &'static str,
    pub rule: StepsizeRule<f64>,
    pub trace: SolverTrace<f64, HyperbolicPoint64>,
    pub dist_to_center: f64,
    pub rate: Option<StronglyConvexRateReport<f64>>,
    pub grad_step_bound_slack: f64,
}

pub struct ConstrainedCase {
    pub instance: ConstrainedInstance,
    pub runs: Vec<ConstrainedRun>,
    pub f_best: f64,
    /// Largest coordinate gap between constant-step CRPG and PGA iterates;
    /// NaN when either was not run.
    pub crpg_pga_gap: f64,
}

pub struct ConstrainedResults {
    pub cases: Vec<ConstrainedCase>,
    pub outcome: Outcome,
}

/// CRPG with `lambda = 1/L`, CRPG with backtracking from `s = 1/L` (or the
/// configured `s`), and PGA with `lambda = 1/L`.
pub fn solve_constrained_case(cfg: &ExperimentConfig, instance: ConstrainedInstance) -> Result<ConstrainedCase, BenchError> {
    let prob = &instance.problem;
    let geom = &prob.geometry;
    let l = prob.lipschitz;
    let lambda = 1.0 / l;
    let stop = StoppingCriterion::gradient_mapping(cfg.tol, cfg.max_iter);
    let p0 = &instance.center;
    let mut runs = Vec::new();
    let mut push = |solver, rule, trace: SolverTrace<f64, HyperbolicPoint64>| {
        let dist_to_center = geom.dist(&instance.center, trace.final_point());
        runs.push(ConstrainedRun {
            solver,
            rule,
            trace: trace.with_seed(cfg.seed),
            dist_to_center,
            rate: None,
            grad_step_bound_slack: f64::NAN,
        });
    };
    let constant = StepsizeRule::Constant { lambda };
    if cfg.stepsize.constant() {
        push("crpg_constant", constant, crpg_solve(prob, p0, constant, stop)?);
    }
    if cfg.stepsize.backtracking() {
        let rule = StepsizeRule::Backtracking { s: cfg.s.unwrap_or(lambda), eta: cfg.eta, theta: cfg.theta };
        push("crpg_backtracking", rule, crpg_solve(prob, p0, rule, stop)?);
    }
    push("pga", constant, pga_solve(prob, p0, lambda, stop)?);

    let f_best = runs.iter().flat_map(|r| r.trace.costs()).fold(f64::INFINITY, f64::min);
    let traces: Vec<_> = runs.iter().map(|r| &r.trace).collect();
    let p_star = traces[longest(&traces)].final_point().clone();
    let mean = frechet_mean(geom, &prob.smooth.cloud, p0, l)?;
    let dist_qstar = geom.dist(&mean, p0);
    for r in &mut runs {
        let env = RateEnvelope::from_trace(geom, &r.trace, &r.rule, l, prob.strong_convexity);
        r.rate = Some(check_strongly_convex_rate(geom, &r.trace, &env, f_best, &p_star));
        r.grad_step_bound_slack = gradient_step_bound_slack(&r.trace, env.alpha, dist_qstar, env.r_hat);
    }
    let find = |name| runs.iter().find(|r| r.solver == name);
    let crpg_pga_gap = match (find("crpg_constant"), find("pga")) {
        (Some(a), Some(b)) if a.trace.iterates.len() == b.trace.iterates.len() => a
            .trace
            .iterates
            .iter()
            .zip(&b.trace.iterates)
            .map(|(x, y)| geom.coord_distance(x, y))
            .fold(0.0, f64::max),
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    };
    Ok(ConstrainedCase { instance, runs, f_best, crpg_pga_gap })
}

pub fn run_constrained_mean(cfg: &ExperimentConfig) -> Result<ConstrainedResults, BenchError> {
    let mut cases = Vec::new();
    for &n in &cfg.dimensions {
        for run in 0..cfg.runs {
            cases.push(solve_constrained_case(cfg, constrained_instance(cfg, n, run)?)?);
        }
    }
    let outcome = constrained_tables(cfg, &cases);
    Ok(ConstrainedResults { cases, outcome })
}

fn constrained_tables(cfg: &ExperimentConfig, cases: &[ConstrainedCase]) -> Outcome {
    let mut per_run = CsvTable::new(
        "constrained_mean_runs",
        &[
            "n", "run", "solver", "iterations", "converged", "final_objective", "f_best", "dist_to_center", "feasible",
            "min_rel_decrease_slack", "rho", "rate_checked", "rate_min_contraction_slack", "rate_min_iterate_slack",
            "grad_step_bound_slack",
        ],
    );
    let mut equiv = CsvTable::new("constrained_mean_equivalence", &["n", "run", "max_iterate_gap"]);
    let mut timing = CsvTable::new("constrained_mean_timing", &["n", "run", "solver", "iterations", "seconds"]);
    let mut out = Outcome::default();
    for case in cases {
        let (n, run) = (case.instance.n, case.instance.run);
        for r in &case.runs {
            let rate = r.rate.as_ref().expect("rate computed");
            let feasible = r.dist_to_center <= cfg.radius + FEASIBILITY_TOL;
            per_run.push(row![
                n, run, r.solver, r.trace.iterations(), r.trace.converged, r.trace.final_cost, case.f_best,
                r.dist_to_center, feasible, min_relative_decrease_slack(&r.trace), rate.rho, rate.checked,
                rate.min_contraction_slack, rate.min_iterate_slack, r.grad_step_bound_slack,
            ]);
            timing.push(row![n, run, r.solver, r.trace.iterations(), seconds(r.trace.wall_time)]);
            if !r.trace.converged {
                out.nonconverged.push(format!("constrained-mean n={n} run={run} solver={}", r.solver));
            }
        }
        equiv.push(row![n, run, case.crpg_pga_gap]);
    }
    out.tables = vec![per_run, equiv];
    out.timing_tables = vec![timing];
    out
}
