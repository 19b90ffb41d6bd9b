//! Sparse mean on `H^n`: `g = (1/2N) sum dist^2(., q_i)`, `h = mu ||.||_1`.

use riemprox::objectives::{frechet_lipschitz, DataCloud, FrechetMean, HyperbolicL1, SplitProblem};
use riemprox::solvers::{cppa_solve, crpg_solve, SolverTrace, StepsizeRule, StoppingCriterion};
use riemprox::{Geometry, Hyperbolic, HyperbolicPoint64};

use super::{instance_rng, min_relative_decrease_slack, seconds, Outcome};
use crate::config::ExperimentConfig;
use crate::csv::CsvTable;
use crate::error::BenchError;
use crate::row;

/// Coordinates below this magnitude count as zero.
pub const SPARSITY_THRESHOLD: f64 = 1e-8;

pub type SparseProblem = SplitProblem<f64, Hyperbolic, FrechetMean<HyperbolicPoint64>, HyperbolicL1<f64>>;

pub struct SparseInstance {
    pub n: usize,
    pub run: usize,
    pub mu: f64,
    pub problem: SparseProblem,
    pub anchor: HyperbolicPoint64,
    pub p0: HyperbolicPoint64,
}

/// `N` points `exp_a(V_i)` with `V_i` unit Gaussian tangents at a random
/// anchor `a`, and a random start. `L = zeta_1(-1, D)` with `D` the diameter
/// of the ball around the start containing the data and the anchor.
/// The data do not depend on `mu`, so a `mu` sweep shares one cloud.
pub fn sparse_instance(cfg: &ExperimentConfig, n: usize, run: usize, mu: f64) -> Result<SparseInstance, BenchError> {
    let geom = Hyperbolic::new(n)?;
    let mut rng = instance_rng(cfg.seed, n, run);
    let anchor: HyperbolicPoint64 = geom.random_point(&mut rng);
    let points: Vec<HyperbolicPoint64> = (0..cfg.points).map(|_| geom.sample_gaussian(&anchor, 1.0, &mut rng)).collect();
    let p0: HyperbolicPoint64 = geom.random_point(&mut rng);
    let reach = points.iter().chain(std::iter::once(&anchor)).map(|q| geom.dist(&p0, q)).fold(0.0, f64::max);
    let l = frechet_lipschitz(&geom, 2.0 * reach);
    let problem = SplitProblem::new(geom, FrechetMean { cloud: DataCloud::new(points)? }, HyperbolicL1::new(mu), l, 1.0)?;
    Ok(SparseInstance { n, run, mu, problem, anchor, p0 })
}

/// Spatial coordinates of magnitude below [`SPARSITY_THRESHOLD`].
pub fn sparsity(p: &HyperbolicPoint64) -> usize {
    let c = p.coords();
    c[..c.len() - 1].iter().filter(|x| x.abs() < SPARSITY_THRESHOLD).count()
}

pub struct SparseRun {
    pub solver: &'static str,
    pub trace: SolverTrace<f64, HyperbolicPoint64>,
    pub sparsity: usize,
}

pub struct SparseCase {
    pub instance: SparseInstance,
    pub runs: Vec<SparseRun>,
}

pub struct SparseResults {
    pub cases: Vec<SparseCase>,
    pub outcome: Outcome,
}

/// CRPG with the selected stepsize rules (`s = 3/(2L)` unless configured)
/// and CPPA with `lambda_k = lambda_0 / (k + 1)` stopped on cost change.
pub fn solve_sparse_case(cfg: &ExperimentConfig, instance: SparseInstance) -> Result<SparseCase, BenchError> {
    let prob = &instance.problem;
    let l = prob.lipschitz;
    let stop = StoppingCriterion::gradient_mapping(cfg.tol, cfg.max_iter);
    let mut runs = Vec::new();
    let mut push = |solver, trace: SolverTrace<f64, HyperbolicPoint64>| {
        let trace = trace.with_seed(cfg.seed);
        let sparsity = sparsity(trace.final_point());
        runs.push(SparseRun { solver, trace, sparsity });
    };
    if cfg.stepsize.constant() {
        push("crpg_constant", crpg_solve(prob, &instance.p0, StepsizeRule::inverse_lipschitz(l), stop)?);
    }
    if cfg.stepsize.backtracking() {
        let rule = StepsizeRule::Backtracking { s: cfg.s.unwrap_or(1.5 / l), eta: cfg.eta, theta: cfg.theta };
        push("crpg_backtracking", crpg_solve(prob, &instance.p0, rule, stop)?);
    }
    let cppa_stop = StoppingCriterion::cost_change(cfg.tol, cfg.max_iter);
    push(
        "cppa",
        cppa_solve(&prob.geometry, &prob.smooth.cloud, &prob.nonsmooth, &instance.p0, cfg.cppa_lambda0, cppa_stop)?,
    );
    Ok(SparseCase { instance, runs })
}

pub fn run_sparse_mean(cfg: &ExperimentConfig) -> Result<SparseResults, BenchError> {
    let mut cases = Vec::new();
    for &mu in &cfg.mu {
        for &n in &cfg.dimensions {
            for run in 0..cfg.runs {
                cases.push(solve_sparse_case(cfg, sparse_instance(cfg, n, run, mu)?)?);
            }
        }
    }
    let outcome = sparse_tables(&cases);
    Ok(SparseResults { cases, outcome })
}

/// `(mu, n, solver)`; grouped sums are count, iterations, objective,
/// sparsity and seconds.
type GroupKey = (f64, usize, &'static str);

fn sparse_tables(cases: &[SparseCase]) -> Outcome {
    let mut per_run = CsvTable::new(
        "sparse_mean_runs",
        &[
            "mu", "n", "run", "solver", "iterations", "converged", "final_objective", "sparsity", "prox_failures",
            "min_rel_decrease_slack",
        ],
    );
    let mut table = CsvTable::new(
        "sparse_mean_table",
        &["mu", "n", "solver", "runs", "mean_iterations", "mean_objective", "mean_sparsity"],
    );
    let mut timing = CsvTable::new("sparse_mean_timing", &["mu", "n", "run", "solver", "iterations", "seconds"]);
    let mut out = Outcome::default();
    let mut groups: Vec<(GroupKey, [f64; 5])> = Vec::new();
    for case in cases {
        let inst = &case.instance;
        for r in &case.runs {
            let is_crpg = r.solver != "cppa";
            let slack = if is_crpg { min_relative_decrease_slack(&r.trace) } else { f64::NAN };
            per_run.push(row![
                inst.mu, inst.n, inst.run, r.solver, r.trace.iterations(), r.trace.converged, r.trace.final_cost,
                r.sparsity, r.trace.prox_failures, slack,
            ]);
            timing.push(row![inst.mu, inst.n, inst.run, r.solver, r.trace.iterations(), seconds(r.trace.wall_time)]);
            if !r.trace.converged {
                out.nonconverged.push(format!("sparse-mean mu={} n={} run={} solver={}", inst.mu, inst.n, inst.run, r.solver));
            }
            let key = (inst.mu, inst.n, r.solver);
            let vals = [1.0, r.trace.iterations() as f64, r.trace.final_cost, r.sparsity as f64, seconds(r.trace.wall_time)];
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, acc)) => acc.iter_mut().zip(vals).for_each(|(a, v)| *a += v),
                None => groups.push((key, vals)),
            }
        }
    }
    let mut mean_timing = CsvTable::new("sparse_mean_table_timing", &["mu", "n", "solver", "runs", "mean_seconds"]);
    for ((mu, n, solver), acc) in groups {
        let c = acc[0];
        table.push(row![mu, n, solver, c as usize, acc[1] / c, acc[2] / c, acc[3] / c]);
        mean_timing.push(row![mu, n, solver, c as usize, acc[4] / c]);
    }
    out.tables = vec![per_run, table];
    out.timing_tables = vec![timing, mean_timing];
    out
}
