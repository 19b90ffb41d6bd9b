//! Experiment drivers. Each driver returns typed results plus the CSV
//! tables derived from them; `run_experiment` dispatches on the config and
//! writes the tables.

pub mod constrained;
pub mod inequalities;
pub mod sparse;
pub mod spd;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemprox::objectives::{DataCloud, FrechetMean, NoPenalty, SplitProblem};
use riemprox::solvers::{crpg_solve, SolverTrace, StepsizeRule, StoppingCriterion};
use riemprox::{Geometry, Real};

use crate::config::{Experiment, ExperimentConfig};
use crate::csv::{config_comments, CsvTable};
use crate::error::BenchError;

/// Tables of one experiment plus the flags that decide the exit code.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<CsvTable>,
    /// Tables holding wall-clock measurements; excluded from determinism checks.
    pub timing_tables: Vec<CsvTable>,
    /// Descriptions of runs that stopped on their iteration cap.
    pub nonconverged: Vec<String>,
    /// Descriptions of failed hard assertions.
    pub violations: Vec<String>,
}

impl Outcome {
    /// Exit code: 2 for violated assertions, 3 for non-convergence, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() {
            2
        } else if !self.nonconverged.is_empty() {
            3
        } else {
            0
        }
    }

    fn finish(mut self, cfg: &ExperimentConfig) -> Self {
        let comments = config_comments(cfg);
        for t in self.tables.iter_mut().chain(self.timing_tables.iter_mut()) {
            t.comments = comments.clone();
        }
        self
    }

    pub fn write(&self, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, BenchError> {
        let mut paths = Vec::new();
        for t in self.tables.iter().chain(&self.timing_tables) {
            paths.push(t.write_to(&cfg.output)?);
        }
        Ok(paths)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, BenchError> {
    cfg.validate()?;
    let out = match cfg.experiment {
        Experiment::SpdConvex => spd::run_spd_convex(cfg)?.outcome,
        Experiment::SparseMean => sparse::run_sparse_mean(cfg)?.outcome,
        Experiment::ConstrainedMean => constrained::run_constrained_mean(cfg)?.outcome,
        Experiment::CheckInequalities => inequalities::run_inequality_suite(cfg)?.outcome,
    };
    Ok(out.finish(cfg))
}

/// Generator for one `(dimension, run)` instance: the configured seed with
/// a stream derived from the pair, so instances are independent of the
/// order in which they run.
pub fn instance_rng(seed: u64, dimension: usize, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((dimension as u64) << 32) | run as u64);
    rng
}

/// Smallest `sufficient_decrease_slack / (1 + |f(p^k)|)` over a trace.
pub fn min_relative_decrease_slack<T: Real, P>(trace: &SolverTrace<T, P>) -> f64 {
    trace
        .records
        .iter()
        .map(|r| (r.sufficient_decrease_slack / (T::one() + r.cost.abs())).to_f64().unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min)
}

/// Unconstrained mean of `cloud` by gradient descent with step `1/L`.
pub fn frechet_mean<M: Geometry<f64> + Clone>(
    geom: &M,
    cloud: &DataCloud<M::Point>,
    start: &M::Point,
    lipschitz: f64,
) -> Result<M::Point, BenchError> {
    let problem = SplitProblem::new(geom.clone(), FrechetMean { cloud: cloud.clone() }, NoPenalty, lipschitz, 1.0)?;
    let tr = crpg_solve(
        &problem,
        start,
        StepsizeRule::inverse_lipschitz(lipschitz),
        StoppingCriterion::gradient_mapping(1e-9, 20_000),
    )?;
    Ok(tr.final_point().clone())
}

/// Index of the trace with the most iterations; its final point stands in
/// for the minimizer.
pub fn longest<T, P>(traces: &[&SolverTrace<T, P>]) -> usize {
    let mut best = 0;
    for (i, t) in traces.iter().enumerate() {
        if t.records.len() > traces[best].records.len() {
            best = i;
        }
    }
    best
}

pub fn seconds(d: std::time::Duration) -> f64 {
    d.as_secs_f64()
}
