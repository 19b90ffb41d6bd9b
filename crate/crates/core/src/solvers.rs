//! Proximal gradient iterations and the two baselines used for comparison:
//! the cyclic proximal point algorithm and projected gradient.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::manifold::{Geometry, Vector};
use crate::objectives::{
    frechet_value, BallIndicator, DataCloud, ProximableTerm, SmoothTerm, SplitProblem,
};
use crate::prox::{project_ball, prox_sq_distance};
use crate::scalar::Real;

/// Contractions allowed in one backtracking call before giving up.
pub const MAX_CONTRACTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeRule<T> {
    Constant { lambda: T },
    /// Initial guess `s`, contraction factor `eta`, warm-start factor `theta`.
    Backtracking { s: T, eta: T, theta: T },
}

impl<T: Real> StepsizeRule<T> {
    /// `lambda = 1 / L`
    pub fn inverse_lipschitz(lipschitz: T) -> Self {
        Self::Constant { lambda: T::one() / lipschitz }
    }

    /// Checks the rule against the smoothness constant: a constant step must
    /// not exceed `1/L`, a backtracking guess must lie in `(0, 2/L)`.
    pub fn validate(&self, lipschitz: T) -> Result<()> {
        match *self {
            Self::Constant { lambda } => {
                let cap = T::one() / lipschitz;
                if !(lambda > T::zero()) || lambda > cap * (T::one() + T::c(1e-12)) {
                    return Err(Error::InvalidStepsize(format!(
                        "constant stepsize {lambda} outside (0, 1/L = {cap}]"
                    )));
                }
            }
            Self::Backtracking { s, eta, theta } => {
                let two_over_l = T::c(2.0) / lipschitz;
                if !(s > T::zero()) || !(s < two_over_l) {
                    return Err(Error::InvalidStepsize(format!("initial guess {s} outside (0, 2/L = {two_over_l})")));
                }
                if !(eta > T::zero() && eta < T::one()) {
                    return Err(Error::InvalidStepsize(format!("contraction factor {eta} outside (0, 1)")));
                }
                if !(theta >= T::one()) {
                    return Err(Error::InvalidStepsize(format!("warm-start factor {theta} below 1")));
                }
            }
        }
        Ok(())
    }

    /// `(alpha, beta)` with `beta / L <= lambda_k <= alpha / L` for every step.
    pub fn alpha_beta(&self, lipschitz: T) -> (T, T) {
        match *self {
            Self::Constant { lambda } => (lambda * lipschitz, lambda * lipschitz),
            Self::Backtracking { s, eta, .. } => (s * lipschitz, (s * lipschitz).min(eta)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingCriterion<T> {
    /// Stop once `dist(p^k, p^{k+1}) / lambda_k` drops below this.
    pub grad_map_tol: Option<T>,
    pub max_iter: usize,
    /// Stop once `|f(p^k) - f(p^{k+1})|` drops below this.
    pub cost_change_tol: Option<T>,
}

impl<T: Real> Default for StoppingCriterion<T> {
    fn default() -> Self {
        Self { grad_map_tol: Some(T::c(1e-7)), max_iter: 5000, cost_change_tol: None }
    }
}

impl<T: Real> StoppingCriterion<T> {
    pub fn gradient_mapping(tol: T, max_iter: usize) -> Self {
        Self { grad_map_tol: Some(tol), max_iter, cost_change_tol: None }
    }

    pub fn cost_change(tol: T, max_iter: usize) -> Self {
        Self { grad_map_tol: None, max_iter, cost_change_tol: Some(tol) }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 && self.grad_map_tol.is_none() && self.cost_change_tol.is_none() {
            return Err(Error::Domain("stopping criterion has nothing active".into()));
        }
        for t in [self.grad_map_tol, self.cost_change_tol].into_iter().flatten() {
            if !(t > T::zero()) {
                return Err(Error::Domain(format!("stopping tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    fn met(&self, grad_map: T, cost_change: T) -> bool {
        self.grad_map_tol.is_some_and(|t| grad_map < t) || self.cost_change_tol.is_some_and(|t| cost_change < t)
    }
}

/// One step `p^k -> p^{k+1}`. Entries that a solver does not compute are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub lambda: T,
    /// `f(p^k)`
    pub cost: T,
    /// `dist(p^k, p^{k+1})`
    pub step_length: T,
    /// `dist(p^k, z_{p^k})`, the gradient step length `D_k`.
    pub grad_step_length: T,
    pub grad_map_norm: T,
    /// `f(p^k) - f(p^{k+1}) - (2 - lambda L) / (2 lambda) dist^2(p^k, p^{k+1})`
    pub sufficient_decrease_slack: T,
    pub backtracks: usize,
    pub prox_converged: bool,
}

#[derive(Debug, Clone)]
pub struct SolverTrace<T, P> {
    pub records: Vec<IterationRecord<T>>,
    /// `p^0, ..., p^K`, one more than `records`.
    pub iterates: Vec<P>,
    /// `f(p^K)`
    pub final_cost: T,
    pub converged: bool,
    /// Steps whose inner prox iteration hit its cap.
    pub prox_failures: usize,
    pub wall_time: Duration,
    pub seed: Option<u64>,
}

impl<T: Real, P> SolverTrace<T, P> {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_point(&self) -> &P {
        self.iterates.last().expect("trace holds the start point")
    }

    /// `f(p^0), ..., f(p^K)`
    pub fn costs(&self) -> Vec<T> {
        let mut c: Vec<T> = self.records.iter().map(|r| r.cost).collect();
        c.push(self.final_cost);
        c
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// `exp_p(-lambda grad g(p))`
pub fn gradient_step<T, M, G, H>(problem: &SplitProblem<T, M, G, H>, lambda: T, p: &M::Point) -> Result<M::Point>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    step_along(problem, lambda, p, &problem.grad(p))
}

fn step_along<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    lambda: T,
    p: &M::Point,
    grad: &M::Tangent,
) -> Result<M::Point>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    if !(lambda > T::zero()) {
        return Err(Error::InvalidStepsize(format!("stepsize must be positive, got {lambda}")));
    }
    problem.geometry.exp(p, &grad.scaled(-lambda))
}

/// Gradient step followed by the prox, with the intermediate point.
#[derive(Debug, Clone)]
pub struct CrpgStep<P> {
    pub gradient_point: P,
    pub point: P,
    pub prox_converged: bool,
}

/// `prox_{lambda h}(exp_p(-lambda grad g(p)))`
pub fn crpg_iterate<T, M, G, H>(problem: &SplitProblem<T, M, G, H>, lambda: T, p: &M::Point) -> Result<CrpgStep<M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    crpg_iterate_with(problem, lambda, p, &problem.grad(p))
}

fn crpg_iterate_with<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    lambda: T,
    p: &M::Point,
    grad: &M::Tangent,
) -> Result<CrpgStep<M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let z = step_along(problem, lambda, p, grad)?;
    let out = problem.prox(lambda, &z)?;
    Ok(CrpgStep { gradient_point: z, point: out.point, prox_converged: out.converged })
}

/// `dist(p, p_next) / lambda`
pub fn gradient_mapping_norm<T: Real, M: Geometry<T>>(geom: &M, lambda: T, p: &M::Point, p_next: &M::Point) -> T {
    geom.dist(p, p_next) / lambda
}

/// Accepted stepsize and the step it produced.
#[derive(Debug, Clone)]
pub struct BacktrackOutcome<T, P> {
    pub lambda: T,
    pub step: CrpgStep<P>,
    pub contractions: usize,
}

/// Shrinks `lambda` from `min(s, theta * prev_lambda)` by `eta` until
/// `g(T) <= g(p) + <grad g(p), log_p T> + dist^2(p, T) / (2 lambda)`.
///
/// The comparison allows a roundoff margin of `64 eps (1 + |g(p)|)`; without
/// it, noise in `g` near a minimizer triggers contractions the smoothness
/// constant does not call for. Once `lambda <= 1/L` the condition holds by
/// smoothness, so the step is accepted even when far-away data push the
/// evaluation error of `g` past that margin.
pub fn backtrack<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p: &M::Point,
    prev_lambda: T,
    s: T,
    eta: T,
    theta: T,
) -> Result<BacktrackOutcome<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let grad = problem.grad(p);
    let gp = problem.g(p);
    backtrack_with(problem, p, &grad, gp, prev_lambda, s, eta, theta)
}

#[allow(clippy::too_many_arguments)]
fn backtrack_with<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p: &M::Point,
    grad: &M::Tangent,
    gp: T,
    prev_lambda: T,
    s: T,
    eta: T,
    theta: T,
) -> Result<BacktrackOutcome<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let geom = &problem.geometry;
    let margin = T::c(64.0) * T::epsilon() * (T::one() + gp.abs());
    let mut lambda = s.min(theta * prev_lambda);
    let mut contractions = 0;
    loop {
        let step = crpg_iterate_with(problem, lambda, p, grad)?;
        let d = geom.dist(p, &step.point);
        let model = gp + geom.inner(p, grad, &geom.log(p, &step.point)) + d * d / (T::c(2.0) * lambda);
        if problem.g(&step.point) <= model + margin || lambda * problem.lipschitz <= T::one() {
            return Ok(BacktrackOutcome { lambda, step, contractions });
        }
        if contractions == MAX_CONTRACTIONS {
            return Err(Error::BacktrackingExhausted(MAX_CONTRACTIONS));
        }
        lambda *= eta;
        contractions += 1;
    }
}

/// Proximal gradient method from `p0` (which must lie in the domain of `h`).
/// Stopping on `max_iter` leaves `converged` false.
pub fn crpg_solve<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p0: &M::Point,
    rule: StepsizeRule<T>,
    stop: StoppingCriterion<T>,
) -> Result<SolverTrace<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    rule.validate(problem.lipschitz)?;
    run_gradient_loop(problem, p0, stop, |p, prev| match rule {
        StepsizeRule::Constant { lambda } => {
            let step = crpg_iterate(problem, lambda, p)?;
            Ok(BacktrackOutcome { lambda, step, contractions: 0 })
        }
        StepsizeRule::Backtracking { s, eta, theta } => {
            let prev = prev.unwrap_or(s);
            backtrack(problem, p, prev, s, eta, theta)
        }
    })
}

/// Projected gradient: `p <- project_ball(exp_p(-lambda grad g(p)))`.
pub fn pga_solve<T, M, G>(
    problem: &SplitProblem<T, M, G, BallIndicator<M::Point, T>>,
    p0: &M::Point,
    lambda: T,
    stop: StoppingCriterion<T>,
) -> Result<SolverTrace<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
{
    StepsizeRule::Constant { lambda }.validate(problem.lipschitz)?;
    let ball = &problem.nonsmooth;
    run_gradient_loop(problem, p0, stop, |p, _| {
        let z = gradient_step(problem, lambda, p)?;
        let point = project_ball(&problem.geometry, &ball.center, ball.radius, &z)?;
        Ok(BacktrackOutcome {
            lambda,
            step: CrpgStep { gradient_point: z, point, prox_converged: true },
            contractions: 0,
        })
    })
}

fn run_gradient_loop<T, M, G, H, F>(
    problem: &SplitProblem<T, M, G, H>,
    p0: &M::Point,
    stop: StoppingCriterion<T>,
    mut step: F,
) -> Result<SolverTrace<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
    F: FnMut(&M::Point, Option<T>) -> Result<BacktrackOutcome<T, M::Point>>,
{
    stop.validate()?;
    if !problem.h(p0).is_finite() {
        return Err(Error::Domain("start point lies outside the domain of h".into()));
    }
    let start = Instant::now();
    let geom = &problem.geometry;
    let l = problem.lipschitz;
    let two = T::c(2.0);
    let mut p = p0.clone();
    let mut cost = problem.cost(&p);
    let mut iterates = vec![p.clone()];
    let mut records = Vec::new();
    let mut prev_lambda = None;
    let mut prox_failures = 0;
    let mut converged = false;
    for k in 0..stop.max_iter {
        let out = step(&p, prev_lambda)?;
        let lambda = out.lambda;
        let next = out.step.point;
        let next_cost = problem.cost(&next);
        let d = geom.dist(&p, &next);
        let grad_map = d / lambda;
        if !out.step.prox_converged {
            prox_failures += 1;
        }
        records.push(IterationRecord {
            k,
            lambda,
            cost,
            step_length: d,
            grad_step_length: geom.dist(&p, &out.step.gradient_point),
            grad_map_norm: grad_map,
            sufficient_decrease_slack: (cost - next_cost) - (two - lambda * l) / (two * lambda) * d * d,
            backtracks: out.contractions,
            prox_converged: out.step.prox_converged,
        });
        let change = (cost - next_cost).abs();
        iterates.push(next.clone());
        p = next;
        cost = next_cost;
        prev_lambda = Some(lambda);
        if stop.met(grad_map, change) {
            converged = true;
            break;
        }
    }
    Ok(SolverTrace {
        records,
        iterates,
        final_cost: cost,
        converged,
        prox_failures,
        wall_time: start.elapsed(),
        seed: None,
    })
}

/// Cyclic proximal point algorithm for `(1/2N) sum dist^2(., q_i) + h`.
///
/// Cycle `k` uses `lambda_k = lambda0 / (k + 1)` and applies the prox of each
/// `dist^2(., q_i) / (2N)` in index order, then the prox of `h`. Records hold
/// `lambda_k`, cost, step length and `step_length / lambda_k`; the remaining
/// fields are NaN.
pub fn cppa_solve<T, M, H>(
    geom: &M,
    cloud: &DataCloud<M::Point>,
    extra: &H,
    p0: &M::Point,
    lambda0: T,
    stop: StoppingCriterion<T>,
) -> Result<SolverTrace<T, M::Point>>
where
    T: Real,
    M: Geometry<T>,
    H: ProximableTerm<T, M>,
{
    stop.validate()?;
    if !(lambda0 > T::zero()) {
        return Err(Error::InvalidStepsize(format!("initial stepsize must be positive, got {lambda0}")));
    }
    let start = Instant::now();
    let weight = T::one() / T::from_usize_lossy(cloud.len());
    let cost_of = |p: &M::Point| frechet_value(geom, cloud, p) + extra.value(geom, p);
    let mut p = p0.clone();
    let mut cost = cost_of(&p);
    let mut iterates = vec![p.clone()];
    let mut records = Vec::new();
    let mut prox_failures = 0;
    let mut converged = false;
    for k in 0..stop.max_iter {
        let lambda = lambda0 / T::from_usize_lossy(k + 1);
        let mut q = p.clone();
        for qi in cloud.points() {
            q = prox_sq_distance(geom, qi, weight, lambda, &q)?;
        }
        let out = extra.prox(geom, lambda, &q)?;
        if !out.converged {
            prox_failures += 1;
        }
        let next = out.point;
        let next_cost = cost_of(&next);
        let d = geom.dist(&p, &next);
        records.push(IterationRecord {
            k,
            lambda,
            cost,
            step_length: d,
            grad_step_length: T::nan(),
            grad_map_norm: d / lambda,
            sufficient_decrease_slack: T::nan(),
            backtracks: 0,
            prox_converged: out.converged,
        });
        let change = (cost - next_cost).abs();
        iterates.push(next.clone());
        p = next;
        cost = next_cost;
        if stop.met(d / lambda, change) {
            converged = true;
            break;
        }
    }
    Ok(SolverTrace {
        records,
        iterates,
        final_cost: cost,
        converged,
        prox_failures,
        wall_time: start.elapsed(),
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::Euclidean;
    use crate::hyperbolic::{Hyperbolic, HyperbolicPoint};
    use crate::manifold::geodesic;
    use crate::objectives::{
        frechet_gradient, frechet_lipschitz, DiagonalQuadratic, DistanceTo, EuclideanL1, FrechetMean,
        HyperbolicL1, NoPenalty, ZeroSmooth,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type H = HyperbolicPoint<f64>;

    fn cloud_problem(
        n: usize,
        pts: Vec<H>,
    ) -> SplitProblem<f64, Hyperbolic, FrechetMean<H>, NoPenalty> {
        let g = Hyperbolic::new(n).unwrap();
        let cloud = DataCloud::new(pts).unwrap();
        let mut diam = 0.0f64;
        for a in cloud.points() {
            for b in cloud.points() {
                diam = diam.max(g.dist(a, b));
            }
        }
        let l = frechet_lipschitz(&g, 2.0 * diam + 1.0);
        SplitProblem::new(g, FrechetMean { cloud }, NoPenalty, l, 1.0).unwrap()
    }

    #[test]
    fn stepsize_rule_validation() {
        let l = 2.0;
        assert!(StepsizeRule::Constant { lambda: 0.5 }.validate(l).is_ok());
        assert!(StepsizeRule::Constant { lambda: 0.6 }.validate(l).is_err());
        assert!(StepsizeRule::Backtracking { s: 0.9, eta: 0.5, theta: 1.0 }.validate(l).is_ok());
        assert!(StepsizeRule::Backtracking { s: 1.0, eta: 0.5, theta: 1.0 }.validate(l).is_err());
        assert!(StepsizeRule::Backtracking { s: 0.5, eta: 1.0, theta: 1.0 }.validate(l).is_err());
        assert!(StepsizeRule::Backtracking { s: 0.5, eta: 0.5, theta: 0.9 }.validate(l).is_err());
        assert_eq!(StepsizeRule::inverse_lipschitz(l).alpha_beta(l), (1.0, 1.0));
        let (a, b) = StepsizeRule::Backtracking { s: 0.75, eta: 0.9, theta: 2.0 }.alpha_beta(l);
        assert_eq!((a, b), (1.5, 0.9));
    }

    #[test]
    fn gradient_step_examples() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p: H = g.random_point(&mut rng);
        let q = g.random_point(&mut rng);
        let prob = cloud_problem(2, vec![q.clone()]);
        let one = gradient_step(&prob, 1.0, &p).unwrap();
        assert!(g.dist(&one, &q) < 1e-10);
        let at_q = gradient_step(&prob, 0.3, &q).unwrap();
        assert!(g.dist(&at_q, &q) < 1e-12);
        let z = gradient_step(&prob, 0.3, &p).unwrap();
        let gn = g.norm(&p, &prob.grad(&p));
        assert!((g.dist(&p, &z) - 0.3 * gn).abs() < 1e-10);
    }

    #[test]
    fn crpg_iterate_special_cases() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<H> = (0..5).map(|_| g.random_point(&mut rng)).collect();
        let p = g.random_point(&mut rng);
        // h = 0: plain gradient step
        let prob = cloud_problem(2, pts.clone());
        let a = crpg_iterate(&prob, 0.2, &p).unwrap().point;
        let b = gradient_step(&prob, 0.2, &p).unwrap();
        assert_eq!(a, b);
        // g = 0: plain proximal step
        let anchor = pts[0].clone();
        let rpp = SplitProblem::new(g, ZeroSmooth, DistanceTo { anchor: anchor.clone(), tau: 1.0 }, 1.0, 0.0).unwrap();
        let a = crpg_iterate(&rpp, 0.2, &p).unwrap().point;
        let b = crate::prox::prox_distance(&g, &anchor, 1.0, 0.2, &p).unwrap();
        assert!(g.coord_distance(&a, &b) < 1e-15);
        // ball not active: gradient step unchanged
        let c = g.apex::<f64>();
        let ball_prob = SplitProblem::new(
            g,
            FrechetMean { cloud: DataCloud::new(vec![c.clone()]).unwrap() },
            BallIndicator::new(c.clone(), 5.0).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let start = g.sample_gaussian(&c, 0.3, &mut rng);
        let a = crpg_iterate(&ball_prob, 0.5, &start).unwrap().point;
        assert_eq!(a, gradient_step(&ball_prob, 0.5, &start).unwrap());
    }

    #[test]
    fn gradient_mapping_examples() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<H> = (0..4).map(|_| g.random_point(&mut rng)).collect();
        let prob = cloud_problem(2, pts);
        let p = g.random_point(&mut rng);
        assert_eq!(gradient_mapping_norm(&g, 0.5, &p, &p), 0.0);
        let gn = g.norm(&p, &prob.grad(&p));
        for lambda in [0.2, 0.1] {
            let next = crpg_iterate(&prob, lambda, &p).unwrap().point;
            assert!((gradient_mapping_norm(&g, lambda, &p, &next) - gn).abs() < 1e-9);
        }
    }

    #[test]
    fn single_point_mean_converges_to_it() {
        let g = Hyperbolic::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q: H = g.random_point(&mut rng);
        let p0 = g.random_point(&mut rng);
        let mut prob = cloud_problem(3, vec![q.clone()]);
        prob.lipschitz = frechet_lipschitz(&g, 2.0 * g.dist(&p0, &q));
        let tr = crpg_solve(&prob, &p0, StepsizeRule::inverse_lipschitz(prob.lipschitz), StoppingCriterion::default())
            .unwrap();
        assert!(tr.converged);
        assert!(g.dist(tr.final_point(), &q) <= 1e-6);
        assert_eq!(tr.iterates.len(), tr.records.len() + 1);
    }

    #[test]
    fn backtracking_warm_start_and_bounds() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let anchor: H = g.random_point(&mut rng);
        let pts: Vec<H> = (0..30).map(|_| g.sample_gaussian(&anchor, 1.0, &mut rng)).collect();
        let prob = cloud_problem(2, pts);
        let l = prob.lipschitz;
        let p0 = anchor.clone();
        // With a small guess the condition holds immediately.
        let out = backtrack(&prob, &p0, 0.5 / l, 0.5 / l, 0.9, 1.0).unwrap();
        assert_eq!(out.contractions, 0);
        assert_eq!(out.lambda, 0.5 / l);
        let (s, eta) = (1.9 / l, 0.5);
        let tr = crpg_solve(&prob, &p0, StepsizeRule::Backtracking { s, eta, theta: 2.0 }, StoppingCriterion::default())
            .unwrap();
        assert!(tr.converged);
        assert!(tr.records[0].lambda <= s);
        for r in &tr.records {
            assert!(r.lambda >= s.min(eta / l) && r.lambda <= s);
        }
    }

    #[test]
    fn cost_is_monotone_with_sufficient_decrease() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let anchor: H = g.random_point(&mut rng);
        let pts: Vec<H> = (0..50).map(|_| g.sample_gaussian(&anchor, 1.0, &mut rng)).collect();
        let p0 = g.random_point(&mut rng);
        let mut diam = 0.0f64;
        for a in &pts {
            diam = diam.max(g.dist(&p0, a));
        }
        let l = frechet_lipschitz(&g, 2.0 * diam);
        let prob = SplitProblem::new(
            g,
            FrechetMean { cloud: DataCloud::new(pts).unwrap() },
            HyperbolicL1::new(0.2),
            l,
            0.0,
        )
        .unwrap();
        for rule in [StepsizeRule::inverse_lipschitz(l), StepsizeRule::Backtracking { s: 1.5 / l, eta: 0.9, theta: 2.0 }] {
            let tr = crpg_solve(&prob, &p0, rule, StoppingCriterion::default()).unwrap();
            let costs = tr.costs();
            for w in costs.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
            for r in &tr.records {
                assert!(r.sufficient_decrease_slack >= -1e-9 * (1.0 + r.cost.abs()));
            }
        }
    }

    #[test]
    fn heavy_l1_weight_zeroes_spatial_coordinates() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let anchor = g.from_spatial_tangent(&[0.4, -0.3]).unwrap();
        let pts: Vec<H> = (0..20).map(|_| g.sample_gaussian(&anchor, 0.3, &mut rng)).collect();
        let l = frechet_lipschitz(&g, 4.0);
        let prob = SplitProblem::new(
            g,
            FrechetMean { cloud: DataCloud::new(pts).unwrap() },
            HyperbolicL1::new(10.0),
            l,
            0.0,
        )
        .unwrap();
        let tr = crpg_solve(&prob, &anchor, StepsizeRule::inverse_lipschitz(l), StoppingCriterion::default()).unwrap();
        let fin = tr.final_point();
        assert_eq!(fin, &g.apex());
        // grid oracle over a patch around the apex: nothing beats it
        let best = (0..=200)
            .flat_map(|i| (0..=200).map(move |j| (i, j)))
            .map(|(i, j)| {
                let v = [-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0];
                prob.cost(&g.from_spatial_tangent(&v).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        assert!(prob.cost(fin) <= best + 1e-9);
    }

    #[test]
    fn cppa_examples() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q1: H = g.random_point(&mut rng);
        let q2 = g.random_point(&mut rng);
        let p0 = g.random_point(&mut rng);
        let stop = StoppingCriterion { grad_map_tol: None, max_iter: 100_000, cost_change_tol: None };
        // N = 1: the distance shrinks by prod_k 1 / (1 + lambda_k), about K^-lambda0.
        let one = DataCloud::new(vec![q1.clone()]).unwrap();
        let tr = cppa_solve(&g, &one, &NoPenalty, &p0, 4.0, stop).unwrap();
        assert!(g.dist(tr.final_point(), &q1) < 1e-6);
        let two = DataCloud::new(vec![q1.clone(), q2.clone()]).unwrap();
        let mid = geodesic(&g, &q1, &q2, 0.5).unwrap();
        for lambda0 in [1.0, 4.0] {
            let tr = cppa_solve(&g, &two, &NoPenalty, &p0, lambda0, stop).unwrap();
            let err = g.dist(tr.final_point(), &mid);
            assert!(err < 1e-4, "lambda0 = {lambda0}: {err}");
        }
        assert!(tr.records.iter().all(|r| r.grad_step_length.is_nan()));
    }

    #[test]
    fn cppa_mean_has_small_gradient() {
        let g = Hyperbolic::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let anchor: H = g.random_point(&mut rng);
        let cloud = DataCloud::new((0..30).map(|_| g.sample_gaussian(&anchor, 0.5, &mut rng)).collect()).unwrap();
        // The cyclic order leaves a bias of order lambda_k, so this needs many cycles.
        let tr = cppa_solve(&g, &cloud, &NoPenalty, &anchor, 1.0, StoppingCriterion { grad_map_tol: None, max_iter: 200_000, cost_change_tol: None })
            .unwrap();
        let gn = g.norm(tr.final_point(), &frechet_gradient(&g, &cloud, tr.final_point()));
        assert!(gn <= 1e-5, "{gn}");
    }

    #[test]
    fn pga_matches_crpg_with_indicator() {
        let g = Hyperbolic::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = g.apex::<f64>();
        let far = g.from_spatial_tangent(&[2.0, 0.0, 0.0, 0.0]).unwrap();
        let pts: Vec<H> = (0..40).map(|_| g.sample_gaussian(&far, 0.5, &mut rng)).collect();
        let l = frechet_lipschitz(&g, 8.0);
        let prob = SplitProblem::new(
            g,
            FrechetMean { cloud: DataCloud::new(pts).unwrap() },
            BallIndicator::new(c.clone(), 1.0).unwrap(),
            l,
            1.0,
        )
        .unwrap();
        let stop = StoppingCriterion::default();
        let a = crpg_solve(&prob, &c, StepsizeRule::inverse_lipschitz(l), stop).unwrap();
        let b = pga_solve(&prob, &c, 1.0 / l, stop).unwrap();
        assert_eq!(a.iterates.len(), b.iterates.len());
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            assert!(g.coord_distance(x, y) <= 1e-12);
        }
        assert!((g.dist(&c, b.final_point()) - 1.0).abs() < 1e-6);
        // inactive constraint: same limit as gradient descent
        let big = SplitProblem::new(
            g,
            prob.smooth.clone(),
            BallIndicator::new(c.clone(), 50.0).unwrap(),
            l,
            1.0,
        )
        .unwrap();
        let free = SplitProblem::new(g, prob.smooth.clone(), NoPenalty, l, 1.0).unwrap();
        let a = pga_solve(&big, &c, 1.0 / l, stop).unwrap();
        let b = crpg_solve(&free, &c, StepsizeRule::inverse_lipschitz(l), stop).unwrap();
        assert!(g.dist(a.final_point(), b.final_point()) < 1e-6);
    }

    #[test]
    fn flat_lasso_reaches_closed_form() {
        let e = Euclidean::new(3).unwrap();
        let q = DiagonalQuadratic { weights: vec![1.0, 2.0, 4.0], center: vec![3.0, 0.1, -2.0] };
        let l = q.lipschitz();
        let prob = SplitProblem::new(e, q, EuclideanL1 { mu: 0.5 }, l, 1.0).unwrap();
        let tr = crpg_solve(&prob, &vec![0.0; 3], StepsizeRule::inverse_lipschitz(l), StoppingCriterion::default())
            .unwrap();
        // minimizer: soft-threshold b_i by mu / a_i
        let expect = [2.5f64, 0.0, -1.875];
        for (x, y) in tr.final_point().iter().zip(expect) {
            assert!((x - y).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_start_outside_domain() {
        let g = Hyperbolic::new(2).unwrap();
        let c = g.apex::<f64>();
        let prob = SplitProblem::new(
            g,
            FrechetMean { cloud: DataCloud::new(vec![c.clone()]).unwrap() },
            BallIndicator::new(c, 0.5).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let out = g.from_spatial_tangent(&[2.0, 0.0]).unwrap();
        assert!(crpg_solve(&prob, &out, StepsizeRule::inverse_lipschitz(1.0), StoppingCriterion::default()).is_err());
    }
}
