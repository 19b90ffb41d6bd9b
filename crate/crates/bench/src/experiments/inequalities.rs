//! Random-instance evaluation of every descent inequality and rate check.

use rand::Rng;
use riemprox::objectives::{
    frechet_lipschitz, logdet4_lipschitz_ball, DataCloud, DiagonalQuadratic, DistanceTo, EuclideanL1, FrechetMean,
    HyperbolicL1, LogDetQuartic, ProximableTerm, SmoothTerm, SplitProblem,
};
use riemprox::theory::{
    check_prox_grad_inequality, check_sufficient_decrease, check_sufficient_decrease_second,
    euclidean_prox_grad_slack, InequalityReport, ProxGradVariant,
};
use riemprox::{Euclidean, Geometry, Hyperbolic, HyperbolicPoint64, Spd, SpdPoint64};

use super::constrained::{constrained_instance, solve_constrained_case};
use super::spd::{solve_spd_case, spd_instance};
use super::{instance_rng, Outcome};
use crate::config::{ExperimentConfig, StepsizeMode};
use crate::csv::CsvTable;
use crate::error::BenchError;
use crate::row;

/// Absolute tolerance between the curvature-aware slacks and the flat closed form.
pub const FLAT_TOL: f64 = 1e-10;
/// Fixed-point settings of the `l1` prox inside the suite. The inequalities
/// assume an exact prox, so the loose experiment settings do not apply.
pub const SUITE_L1_TOL: f64 = 1e-14;
pub const SUITE_L1_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub geometry: &'static str,
    pub check: &'static str,
    pub evaluated: usize,
    pub applicable: usize,
    pub violations: usize,
    /// Smallest `slack / scale` over applicable evaluations.
    pub min_rel_slack: f64,
    sum_rel_slack: f64,
}

impl CheckSummary {
    fn new(geometry: &'static str, check: &'static str) -> Self {
        Self {
            geometry,
            check,
            evaluated: 0,
            applicable: 0,
            violations: 0,
            min_rel_slack: f64::INFINITY,
            sum_rel_slack: 0.0,
        }
    }

    fn add(&mut self, r: &InequalityReport<f64>) {
        self.evaluated += 1;
        if !r.applicable {
            return;
        }
        self.applicable += 1;
        let rel = r.relative_slack();
        self.min_rel_slack = self.min_rel_slack.min(rel);
        self.sum_rel_slack += rel;
        if !r.holds() || !r.slack.is_finite() {
            self.violations += 1;
        }
    }

    pub fn mean_rel_slack(&self) -> f64 {
        if self.applicable == 0 {
            f64::NAN
        } else {
            self.sum_rel_slack / self.applicable as f64
        }
    }
}

pub struct InequalityResults {
    pub summaries: Vec<CheckSummary>,
    /// Flat instances evaluated and the largest gap to the closed form.
    pub flat_evaluated: usize,
    pub flat_max_gap: f64,
    pub outcome: Outcome,
}

const CHECKS: [&str; 5] = [
    "sufficient_decrease",
    "sufficient_decrease_second",
    "prox_grad_first",
    "prox_grad_second",
    "prox_grad_hadamard",
];

fn evaluate<M, G, H>(
    problem: &SplitProblem<f64, M, G, H>,
    p: &M::Point,
    q: &M::Point,
    lambda: f64,
    sums: &mut [CheckSummary],
) -> Result<(), BenchError>
where
    M: Geometry<f64>,
    G: SmoothTerm<f64, M>,
    H: ProximableTerm<f64, M>,
{
    sums[0].add(&check_sufficient_decrease(problem, p, lambda)?);
    sums[1].add(&check_sufficient_decrease_second(problem, p, lambda)?);
    for (i, v) in ProxGradVariant::ALL.into_iter().enumerate() {
        sums[2 + i].add(&check_prox_grad_inequality(problem, p, q, lambda, v)?);
    }
    Ok(())
}

fn summaries_for(geometry: &'static str) -> Vec<CheckSummary> {
    CHECKS.iter().map(|c| CheckSummary::new(geometry, c)).collect()
}

/// Sparse-mean objectives on `H^3`, one per configured `mu`, with points,
/// data and start drawn around the apex. `L = zeta_1(-1, D)` with `D` twice
/// the sum of the data and sample radii.
fn hyperbolic_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckSummary>, BenchError> {
    let geom = Hyperbolic::new(3)?;
    let mut rng = instance_rng(cfg.seed, 3, 0);
    let anchor: HyperbolicPoint64 = geom.random_point(&mut rng);
    let cloud: Vec<HyperbolicPoint64> = (0..cfg.points).map(|_| geom.sample_gaussian(&anchor, 1.0, &mut rng)).collect();
    let pairs: Vec<(HyperbolicPoint64, HyperbolicPoint64, f64)> = (0..cfg.samples)
        .map(|_| (geom.random_point(&mut rng), geom.random_point(&mut rng), rng.random_range(0.05..1.95)))
        .collect();
    let apex = geom.apex::<f64>();
    let r_data = cloud.iter().map(|q| geom.dist(&apex, q)).fold(0.0, f64::max);
    let r_samples = pairs.iter().flat_map(|(p, q, _)| [geom.dist(&apex, p), geom.dist(&apex, q)]).fold(0.0, f64::max);
    let l = frechet_lipschitz(&geom, 2.0 * (r_data + r_samples));
    let problems = cfg
        .mu
        .iter()
        .map(|&mu| {
            let l1 = HyperbolicL1 { mu, tol: SUITE_L1_TOL, max_iter: SUITE_L1_MAX_ITER };
            SplitProblem::new(geom, FrechetMean { cloud: DataCloud::new(cloud.clone())? }, l1, l, 1.0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut sums = summaries_for("H3");
    for (i, (p, q, u)) in pairs.iter().enumerate() {
        evaluate(&problems[i % problems.len()], p, q, u / l, &mut sums)?;
    }
    Ok(sums)
}

/// The SPD objective on `P(2)` with points in the unit ball around the
/// identity and `L` the Hessian bound over the radius-2 ball.
fn spd_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckSummary>, BenchError> {
    let geom = Spd::new(2)?;
    let mut rng = instance_rng(cfg.seed, 2, 1);
    let id = geom.identity::<f64>();
    let anchor: SpdPoint64 = geom.sample_in_ball(&id, 1.0, &mut rng);
    let l = logdet4_lipschitz_ball(&geom, &id, 2.0);
    let problem = SplitProblem::new(geom, LogDetQuartic, DistanceTo { anchor, tau: cfg.tau }, l, 0.0)?;
    let mut sums = summaries_for("P2");
    for _ in 0..cfg.samples {
        let p = geom.sample_in_ball(&id, 1.0, &mut rng);
        let q = geom.sample_in_ball(&id, 1.0, &mut rng);
        let u: f64 = rng.random_range(0.05..1.95);
        evaluate(&problem, &p, &q, u / l, &mut sums)?;
    }
    Ok(sums)
}

/// Diagonal quadratic plus `l1` on `R^4`: every curvature coefficient is 1
/// and each prox-grad slack must equal the flat closed form.
fn flat_suite(cfg: &ExperimentConfig) -> Result<(usize, f64, Vec<CheckSummary>), BenchError> {
    let geom = Euclidean::new(4)?;
    let mut rng = instance_rng(cfg.seed, 4, 2);
    let mut sums = summaries_for("R4");
    let mut gap = 0.0f64;
    for _ in 0..cfg.samples {
        let weights: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..3.0)).collect();
        let center: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let quad = DiagonalQuadratic { weights, center };
        let l = quad.lipschitz();
        let mu = cfg.mu[0];
        let problem = SplitProblem::new(geom, quad, EuclideanL1 { mu }, l, 0.0)?;
        let p: Vec<f64> = geom.random_point(&mut rng);
        let q: Vec<f64> = geom.random_point(&mut rng);
        let lambda = rng.random_range(0.05..1.95) / l;
        let (flat, _) = euclidean_prox_grad_slack(&problem, &p, &q, lambda)?;
        for (i, v) in ProxGradVariant::ALL.into_iter().enumerate() {
            let r = check_prox_grad_inequality(&problem, &p, &q, lambda, v)?;
            gap = gap.max((r.slack - flat).abs());
            sums[2 + i].add(&r);
        }
        sums[0].add(&check_sufficient_decrease(&problem, &p, lambda)?);
        sums[1].add(&check_sufficient_decrease_second(&problem, &p, lambda)?);
    }
    Ok((cfg.samples, gap, sums))
}

/// Rate checks on one short SPD run and one small constrained-mean run.
fn rate_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckSummary>, BenchError> {
    let mut sub = cfg.clone();
    sub.stepsize = StepsizeMode::Both;
    sub.s = None;
    sub.eta = 0.9;
    sub.theta = 2.0;
    sub.max_iter = 20000;
    let spd = solve_spd_case(&sub, spd_instance(&sub, 2, 0)?)?;
    let mut convex = CheckSummary::new("P2", "convex_rate");
    for r in &spd.runs {
        let rep = r.rate.as_ref().expect("rate computed");
        convex.evaluated += rep.checked + rep.ambiguous + rep.excluded;
        convex.applicable += rep.checked;
        convex.violations += rep.violations.len() + usize::from(!rep.passes() && rep.violations.is_empty());
        convex.min_rel_slack = convex.min_rel_slack.min(rep.min_step_slack);
    }
    convex.sum_rel_slack = f64::NAN;
    let mut sub = cfg.clone();
    sub.stepsize = StepsizeMode::Both;
    sub.s = None;
    sub.eta = 0.995;
    sub.theta = 1.0;
    sub.points = 50;
    sub.max_iter = 5000;
    let con = solve_constrained_case(&sub, constrained_instance(&sub, 3, 0)?)?;
    let mut strong = CheckSummary::new("H3", "strongly_convex_rate");
    for r in &con.runs {
        let rep = r.rate.as_ref().expect("rate computed");
        strong.evaluated += rep.checked + rep.excluded;
        strong.applicable += rep.checked;
        strong.violations += rep.violations.len() + usize::from(!rep.passes() && rep.violations.is_empty());
        strong.min_rel_slack = strong.min_rel_slack.min(rep.min_contraction_slack.min(rep.min_iterate_slack));
    }
    strong.sum_rel_slack = f64::NAN;
    Ok(vec![convex, strong])
}

pub fn run_inequality_suite(cfg: &ExperimentConfig) -> Result<InequalityResults, BenchError> {
    let mut summaries = hyperbolic_suite(cfg)?;
    summaries.extend(spd_suite(cfg)?);
    let (flat_evaluated, flat_max_gap, flat) = flat_suite(cfg)?;
    summaries.extend(flat);
    summaries.extend(rate_suite(cfg)?);

    let mut table = CsvTable::new(
        "inequalities_summary",
        &["geometry", "check", "evaluated", "applicable", "violations", "min_rel_slack", "mean_rel_slack"],
    );
    let mut out = Outcome::default();
    for s in &summaries {
        table.push(row![s.geometry, s.check, s.evaluated, s.applicable, s.violations, s.min_rel_slack, s.mean_rel_slack()]);
        if s.violations > 0 {
            out.violations.push(format!("{} {}: {} violations", s.geometry, s.check, s.violations));
        }
    }
    let mut flat_table = CsvTable::new("inequalities_flat", &["evaluated", "max_abs_gap", "tolerance", "within_tolerance"]);
    let within = flat_max_gap <= FLAT_TOL;
    flat_table.push(row![flat_evaluated, flat_max_gap, FLAT_TOL, within]);
    if !within {
        out.violations.push(format!("flat mode gap {flat_max_gap:e} exceeds {FLAT_TOL:e}"));
    }
    out.tables = vec![table, flat_table];
    Ok(InequalityResults { summaries, flat_evaluated, flat_max_gap, outcome: out })
}
