//! Convex problem on `P(n)`: `g = (log det p)^4`, `h = tau dist(., q)`.

use riemprox::objectives::{logdet4_lipschitz_ball, DistanceTo, LogDetQuartic, SplitProblem};
use riemprox::solvers::{crpg_solve, SolverTrace, StepsizeRule, StoppingCriterion};
use riemprox::theory::{
    check_convex_rate, gradient_step_bound_slack, ConvexRateReport, RateEnvelope,
};
use riemprox::{Geometry, Spd, SpdPoint64};

use super::{instance_rng, longest, min_relative_decrease_slack, seconds, Outcome};
use crate::config::ExperimentConfig;
use crate::csv::CsvTable;
use crate::error::BenchError;
use crate::row;

pub type SpdProblem = SplitProblem<f64, Spd, LogDetQuartic, DistanceTo<SpdPoint64, f64>>;

/// Problem and start point of one `(n, run)` pair.
pub struct SpdInstance {
    pub n: usize,
    pub run: usize,
    pub problem: SpdProblem,
    pub p0: SpdPoint64,
}

/// Random anchor and start; `L` is the largest Hessian bound `12 n (log det)^2`
/// over the ball of radius `2 dist(p0, anchor)` around the start.
pub fn spd_instance(cfg: &ExperimentConfig, n: usize, run: usize) -> Result<SpdInstance, BenchError> {
    let geom = Spd::new(n)?;
    let mut rng = instance_rng(cfg.seed, n, run);
    let anchor: SpdPoint64 = geom.random_point(&mut rng);
    let p0: SpdPoint64 = geom.random_point(&mut rng);
    let radius = 2.0 * geom.dist(&p0, &anchor);
    let l = riemprox::objectives::floor_lipschitz(logdet4_lipschitz_ball(&geom, &p0, radius));
    let problem = SplitProblem::new(geom, LogDetQuartic, DistanceTo { anchor, tau: cfg.tau }, l, 0.0)?;
    Ok(SpdInstance { n, run, problem, p0 })
}

pub struct SpdRun {
    pub mode: &'static str,
    pub rule: StepsizeRule<f64>,
    pub trace: SolverTrace<f64, SpdPoint64>,
    pub rate: Option<ConvexRateReport<f64>>,
    pub envelope: Option<RateEnvelope<f64>>,
    pub grad_step_bound_slack: f64,
}

pub struct SpdCase {
    pub instance: SpdInstance,
    pub runs: Vec<SpdRun>,
    /// Smallest cost seen across the runs of this instance.
    pub f_best: f64,
}

pub struct SpdResults {
    pub cases: Vec<SpdCase>,
    pub outcome: Outcome,
}

/// Constant `1/L` and backtracking from `s = 3/(2L)` (or the configured `s`).
pub fn spd_rules(cfg: &ExperimentConfig, l: f64) -> Vec<(&'static str, StepsizeRule<f64>)> {
    let mut rules = Vec::new();
    if cfg.stepsize.constant() {
        rules.push(("constant", StepsizeRule::inverse_lipschitz(l)));
    }
    if cfg.stepsize.backtracking() {
        let s = cfg.s.unwrap_or(1.5 / l);
        rules.push(("backtracking", StepsizeRule::Backtracking { s, eta: cfg.eta, theta: cfg.theta }));
    }
    rules
}

pub fn solve_spd_case(cfg: &ExperimentConfig, instance: SpdInstance) -> Result<SpdCase, BenchError> {
    let prob = &instance.problem;
    let stop = StoppingCriterion::gradient_mapping(cfg.tol, cfg.max_iter);
    let mut runs = Vec::new();
    for (mode, rule) in spd_rules(cfg, prob.lipschitz) {
        let trace = crpg_solve(prob, &instance.p0, rule, stop)?.with_seed(cfg.seed);
        runs.push(SpdRun { mode, rule, trace, rate: None, envelope: None, grad_step_bound_slack: f64::NAN });
    }
    let f_best = runs
        .iter()
        .flat_map(|r| r.trace.costs())
        .fold(f64::INFINITY, f64::min);
    let traces: Vec<_> = runs.iter().map(|r| &r.trace).collect();
    let p_star = traces[longest(&traces)].final_point().clone();
    let geom = &prob.geometry;
    // minimizers of g alone form {det = 1}, at distance |log det p0| / sqrt(n) from p0
    let dist_qstar = instance.p0.log_det().abs() / (instance.n as f64).sqrt();
    for r in &mut runs {
        let env = RateEnvelope::from_trace(geom, &r.trace, &r.rule, prob.lipschitz, 0.0);
        r.rate = Some(check_convex_rate(geom, &r.trace, &env, f_best, &p_star));
        r.grad_step_bound_slack = gradient_step_bound_slack(&r.trace, env.alpha, dist_qstar, env.r_hat);
        r.envelope = Some(env);
    }
    Ok(SpdCase { instance, runs, f_best })
}

pub fn run_spd_convex(cfg: &ExperimentConfig) -> Result<SpdResults, BenchError> {
    let mut cases = Vec::new();
    for &n in &cfg.dimensions {
        for run in 0..cfg.runs {
            cases.push(solve_spd_case(cfg, spd_instance(cfg, n, run)?)?);
        }
    }
    let outcome = spd_tables(&cases);
    Ok(SpdResults { cases, outcome })
}

fn spd_tables(cases: &[SpdCase]) -> Outcome {
    let mut summary = CsvTable::new(
        "spd_convex_summary",
        &[
            "n", "manifold_dim", "run", "mode", "iterations", "converged", "final_objective", "f_best", "lipschitz",
            "alpha", "beta", "min_rel_decrease_slack", "rate_checked", "rate_ambiguous", "rate_excluded",
            "rate_min_step_slack", "rate_min_summed_slack", "envelope_min_slack", "grad_step_bound_slack",
        ],
    );
    let mut table = CsvTable::new(
        "spd_convex_table",
        &["manifold_dim", "run", "constant_iterations", "constant_objective", "backtracking_iterations", "backtracking_objective"],
    );
    let mut curve = CsvTable::new("spd_convex_error", &["n", "run", "mode", "k", "lambda", "cost", "delta"]);
    let mut timing = CsvTable::new("spd_convex_timing", &["n", "manifold_dim", "run", "mode", "iterations", "seconds"]);
    let mut out = Outcome::default();
    for case in cases {
        let n = case.instance.n;
        let dim = n * (n + 1) / 2;
        let run = case.instance.run;
        let mut cells: [(String, String); 2] = Default::default();
        for r in &case.runs {
            let rate = r.rate.as_ref().expect("rate computed");
            let env = r.envelope.as_ref().expect("envelope computed");
            summary.push(row![
                n, dim, run, r.mode, r.trace.iterations(), r.trace.converged, r.trace.final_cost, case.f_best,
                case.instance.problem.lipschitz, env.alpha, env.beta, min_relative_decrease_slack(&r.trace),
                rate.checked, rate.ambiguous, rate.excluded, rate.min_step_slack, rate.min_summed_slack,
                rate.min_envelope_slack, r.grad_step_bound_slack,
            ]);
            let costs = r.trace.costs();
            for (k, c) in costs.iter().enumerate() {
                let lambda = r.trace.records.get(k).map_or(f64::NAN, |rec| rec.lambda);
                curve.push(row![n, run, r.mode, k, lambda, *c, *c - case.f_best]);
            }
            timing.push(row![n, dim, run, r.mode, r.trace.iterations(), seconds(r.trace.wall_time)]);
            let slot = if r.mode == "constant" { 0 } else { 1 };
            cells[slot] = (r.trace.iterations().to_string(), crate::csv::fmt_f64(r.trace.final_cost));
            if !r.trace.converged {
                out.nonconverged.push(format!("spd-convex n={n} run={run} mode={}", r.mode));
            }
        }
        let [(ci, co), (bi, bo)] = cells;
        table.push(row![dim, run, ci, co, bi, bo]);
    }
    out.tables = vec![summary, table, curve];
    out.timing_tables = vec![timing];
    out
}
