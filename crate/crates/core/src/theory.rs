//! Numerical checks of the descent inequalities and rate bounds, evaluated at
//! sampled points and along solver traces.
//!
//! Every report carries a slack `lhs - rhs`; nonnegative means the bound
//! holds. Rate checks substitute computable proxies for the unknown
//! minimizer and level-set diameter, described on [`RateEnvelope`].

use crate::error::Result;
use crate::manifold::{curvature_coefficients, triangle_diameter, zeta1, Geometry};
use crate::objectives::{ProximableTerm, SmoothTerm, SplitProblem};
use crate::solvers::{crpg_iterate, SolverTrace, StepsizeRule};
use crate::scalar::Real;

/// Additive tolerance on the smoothness precondition of the prox-grad checks.
pub const PRECONDITION_TOL: f64 = 1e-10;
/// `Delta` values below this are excluded from rate ratios.
pub const DELTA_FLOOR: f64 = 1e-12;
/// Iterations whose regime ratio is within this relative distance of 1 are
/// reported as ambiguous and not asserted.
pub const REGIME_BAND: f64 = 0.05;
/// Iterate count above which the level-set diameter proxy falls back to the
/// triangle bound instead of all pairwise distances.
pub const EXACT_DIAMETER_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport<T> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
    /// `lhs - rhs`
    pub slack: T,
    /// Magnitude the tolerance is relative to.
    pub scale: T,
    /// Relative tolerance: the check passes when `slack >= -tolerance * scale`.
    pub tolerance: T,
    /// False when the precondition of the inequality failed; such reports
    /// are not asserted.
    pub applicable: bool,
    pub lambda: T,
    /// Named distances and diameters that entered the right-hand side.
    pub context: Vec<(&'static str, T)>,
}

impl<T: Real> InequalityReport<T> {
    pub fn holds(&self) -> bool {
        !self.applicable || self.slack >= -self.tolerance * self.scale
    }

    /// `slack / scale`
    pub fn relative_slack(&self) -> T {
        self.slack / self.scale
    }
}

/// Which prox-grad lower bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProxGradVariant {
    /// Coefficients at the three triangle diameters, `d^2(p, q)` weighted by
    /// `zeta_1(D_2)`.
    First,
    /// Coefficients at the triangle diameters, `d^2(p, T)` weighted by
    /// `zeta_2(D_3)`.
    Second,
    /// Nonpositive-curvature form with coefficients at `d(q, z_q)` and `d(p, q)`.
    Hadamard,
}

impl ProxGradVariant {
    pub const ALL: [Self; 3] = [Self::First, Self::Second, Self::Hadamard];

    pub fn name(self) -> &'static str {
        match self {
            Self::First => "prox_grad_first",
            Self::Second => "prox_grad_second",
            Self::Hadamard => "prox_grad_hadamard",
        }
    }
}

fn sq<T: Real>(x: T) -> T {
    x * x
}

/// `g(T) <= g(q) + <grad g(q), log_q T> + d^2(q, T) / (2 lambda) + 1e-10`
fn smoothness_precondition<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    q: &M::Point,
    t: &M::Point,
    lambda: T,
) -> bool
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let geom = &problem.geometry;
    let grad = problem.grad(q);
    let model = problem.g(q) + geom.inner(q, &grad, &geom.log(q, t)) + sq(geom.dist(q, t)) / (T::c(2.0) * lambda);
    problem.g(t) <= model + T::c(PRECONDITION_TOL)
}

fn cost_scale<T: Real>(a: T, b: T) -> T {
    T::one() + a.abs() + b.abs()
}

/// `f(p) - f(T(p)) >= (2 - lambda L) / (2 lambda) d^2(p, T(p))` for
/// `lambda in (0, 2/L)`. Tolerance `1e-9` relative to `1 + |f(p)| + |f(T)|`.
pub fn check_sufficient_decrease<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p: &M::Point,
    lambda: T,
) -> Result<InequalityReport<T>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let t = crpg_iterate(problem, lambda, p)?.point;
    let (fp, ft) = (problem.cost(p), problem.cost(&t));
    let d = problem.geometry.dist(p, &t);
    let two = T::c(2.0);
    let rhs = (two - lambda * problem.lipschitz) / (two * lambda) * d * d;
    let lhs = fp - ft;
    Ok(InequalityReport {
        name: "sufficient_decrease",
        lhs,
        rhs,
        slack: lhs - rhs,
        scale: cost_scale(fp, ft),
        tolerance: T::c(1e-9),
        applicable: lambda > T::zero() && lambda * problem.lipschitz < two,
        lambda,
        context: vec![("d(p,T)", d)],
    })
}

/// `f(p) - f(T(p)) >= d^2(p, T(p)) / (2 lambda)`, applicable when the
/// smoothness model holds at `p` for the step taken.
pub fn check_sufficient_decrease_second<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p: &M::Point,
    lambda: T,
) -> Result<InequalityReport<T>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let t = crpg_iterate(problem, lambda, p)?.point;
    let (fp, ft) = (problem.cost(p), problem.cost(&t));
    let d = problem.geometry.dist(p, &t);
    let rhs = d * d / (T::c(2.0) * lambda);
    let lhs = fp - ft;
    Ok(InequalityReport {
        name: "sufficient_decrease_second",
        lhs,
        rhs,
        slack: lhs - rhs,
        scale: cost_scale(fp, ft),
        tolerance: T::c(1e-9),
        applicable: smoothness_precondition(problem, p, &t, lambda),
        lambda,
        context: vec![("d(p,T)", d)],
    })
}

/// Lower bound on `f(p) - f(T(q))` through the linearization
/// `l(p, q) = g(p) - g(q) - <grad g(q), log_q p>` and curvature-weighted
/// distance terms. Tolerance `1e-8`, relative to `1 + |f(p)| + |f(T)|` plus
/// the magnitudes of the right-hand-side terms.
pub fn check_prox_grad_inequality<T, M, G, H>(
    problem: &SplitProblem<T, M, G, H>,
    p: &M::Point,
    q: &M::Point,
    lambda: T,
    variant: ProxGradVariant,
) -> Result<InequalityReport<T>>
where
    T: Real,
    M: Geometry<T>,
    G: SmoothTerm<T, M>,
    H: ProximableTerm<T, M>,
{
    let geom = &problem.geometry;
    let step = crpg_iterate(problem, lambda, q)?;
    let (z, t) = (step.gradient_point, step.point);
    let applicable = smoothness_precondition(problem, q, &t, lambda);

    let grad_q = problem.grad(q);
    let ell = problem.g(p) - problem.g(q) - geom.inner(q, &grad_q, &geom.log(q, p));
    let (fp, ft) = (problem.cost(p), problem.cost(&t));
    let lhs = fp - ft;

    let d_pt = geom.dist(p, &t);
    let d_pq = geom.dist(p, q);
    let d_qz = geom.dist(q, &z);
    let d_zt = geom.dist(&z, &t);
    let d_qt = geom.dist(q, &t);
    let two_l = T::c(2.0) * lambda;
    let curv = geom.curvature();
    let coef = |s: T| curvature_coefficients(curv.kappa_min, curv.kappa_max, s);

    let (terms, context): (Vec<T>, Vec<(&'static str, T)>) = match variant {
        ProxGradVariant::First | ProxGradVariant::Second => {
            let d1 = triangle_diameter(geom, q, &z, &t);
            let d2 = triangle_diameter(geom, q, &z, p);
            let d3 = triangle_diameter(geom, &t, &z, p);
            let (c1, c2, c3) = (coef(d1)?, coef(d2)?, coef(d3)?);
            let terms = if variant == ProxGradVariant::First {
                vec![
                    ell,
                    sq(d_pt) / two_l,
                    -c2.zeta1 * sq(d_pq) / two_l,
                    (c3.zeta2 - T::one()) * sq(d_zt) / two_l,
                    (c1.zeta2 - T::one()) * sq(d_qz) / two_l,
                ]
            } else {
                vec![
                    ell,
                    c3.zeta2 * sq(d_pt) / two_l,
                    -sq(d_pq) / two_l,
                    (T::one() - c2.zeta1) * sq(d_qz) / two_l,
                    (c1.zeta2 - T::one()) * sq(d_qt) / two_l,
                ]
            };
            (terms, vec![("D1", d1), ("D2", d2), ("D3", d3), ("d(p,q)", d_pq), ("d(q,z)", d_qz)])
        }
        ProxGradVariant::Hadamard => {
            let four_l = T::c(4.0) * lambda;
            let terms = vec![
                ell,
                sq(d_pt) / two_l,
                -(zeta1(curv.kappa_min, d_qz) + T::one()) / four_l * sq(d_pq),
                -(zeta1(curv.kappa_min, d_pq) - T::one()) / four_l * sq(d_qz),
            ];
            (terms, vec![("d(p,q)", d_pq), ("d(q,z)", d_qz), ("d(p,T)", d_pt)])
        }
    };
    let rhs = terms.iter().fold(T::zero(), |s, &x| s + x);
    let scale = terms.iter().fold(cost_scale(fp, ft), |s, &x| s + x.abs());
    Ok(InequalityReport {
        name: variant.name(),
        lhs,
        rhs,
        slack: lhs - rhs,
        scale,
        tolerance: T::c(1e-8),
        applicable,
        lambda,
        context,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Sublinear,
    Linear,
}

/// Constants of the rate bounds for one run.
///
/// `r_hat` stands in for the level-set diameter: the largest pairwise
/// distance among the iterates plus `dist(p^0, p^K)` (with more than
/// [`EXACT_DIAMETER_LIMIT`] iterates the pairwise maximum is replaced by its
/// triangle bound `2 max_k dist(p^0, p^k)`). `r_alpha_hat` is the largest
/// recorded gradient step length `D_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEnvelope<T> {
    pub kind: RateKind,
    pub alpha: T,
    pub beta: T,
    pub lipschitz: T,
    pub mu_bar: T,
    pub kappa_min: T,
    pub r_hat: T,
    pub r_alpha_hat: T,
    pub zeta1_r_alpha: T,
}

/// Level-set diameter proxy described on [`RateEnvelope`].
pub fn level_set_diameter_proxy<T: Real, M: Geometry<T>>(geom: &M, iterates: &[M::Point]) -> T {
    let Some(first) = iterates.first() else {
        return T::zero();
    };
    let last = iterates.last().expect("nonempty");
    let spread = if iterates.len() <= EXACT_DIAMETER_LIMIT {
        let mut m = T::zero();
        for (i, a) in iterates.iter().enumerate() {
            for b in &iterates[i + 1..] {
                m = m.max(geom.dist(a, b));
            }
        }
        m
    } else {
        T::c(2.0) * iterates.iter().fold(T::zero(), |m, p| m.max(geom.dist(first, p)))
    };
    spread + geom.dist(first, last)
}

impl<T: Real> RateEnvelope<T> {
    pub fn from_trace<M: Geometry<T>>(
        geom: &M,
        trace: &SolverTrace<T, M::Point>,
        rule: &StepsizeRule<T>,
        lipschitz: T,
        mu_bar: T,
    ) -> Self {
        let (alpha, beta) = rule.alpha_beta(lipschitz);
        let kappa_min = geom.curvature().kappa_min;
        let r_alpha_hat = trace
            .records
            .iter()
            .fold(T::zero(), |m, r| if r.grad_step_length.is_nan() { m } else { m.max(r.grad_step_length) });
        Self {
            kind: if mu_bar > T::zero() { RateKind::Linear } else { RateKind::Sublinear },
            alpha,
            beta,
            lipschitz,
            mu_bar,
            kappa_min,
            r_hat: level_set_diameter_proxy(geom, &trace.iterates),
            r_alpha_hat,
            zeta1_r_alpha: zeta1(kappa_min, r_alpha_hat),
        }
    }

    /// `C = 2 L zeta_1(R_alpha) R^2 / beta`, the constant of the `C / k` envelope.
    pub fn sublinear_constant(&self) -> T {
        T::c(2.0) * self.lipschitz * self.zeta1_r_alpha * sq(self.r_hat) / self.beta
    }

    /// `min(1 / C, 1 / Delta_0)`
    pub fn delta(&self, delta0: T) -> T {
        (T::one() / self.sublinear_constant()).min(T::one() / delta0)
    }

    /// `1 - min(beta mu / (4 L zeta_1(R_alpha)), 1/2)`
    pub fn contraction(&self) -> T {
        let r = self.beta * self.mu_bar / (T::c(4.0) * self.lipschitz * self.zeta1_r_alpha);
        T::one() - r.min(T::c(0.5))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRateReport<T> {
    pub delta0: T,
    /// Iterations whose per-step bound was asserted.
    pub checked: usize,
    pub ambiguous: usize,
    /// Iterations skipped because `Delta_{k-1}` fell below the floor.
    pub excluded: usize,
    /// Smallest `(bound - Delta_k) / Delta_0` over asserted steps.
    pub min_step_slack: T,
    /// Smallest `(1 / (1/Delta_0 + k delta) - Delta_k) / Delta_0`.
    pub min_summed_slack: T,
    /// Smallest `C / k - Delta_k` for `k >= 1`.
    pub min_envelope_slack: T,
    /// Smallest `Delta_k - Delta_{k+1}`.
    pub min_monotone_slack: T,
    /// Indices `k` whose step bound failed.
    pub violations: Vec<usize>,
}

impl<T: Real> ConvexRateReport<T> {
    /// Step and summed bounds within `1e-8 Delta_0`, envelope within `1e-8`,
    /// monotone within `1e-12`.
    pub fn passes(&self) -> bool {
        let tol = T::c(1e-8);
        self.violations.is_empty()
            && self.min_step_slack >= -tol
            && self.min_summed_slack >= -tol
            && self.min_envelope_slack >= -tol
            && self.min_monotone_slack >= -T::c(1e-12)
    }
}

/// Checks the two-regime recursion, its summed form and the `C / k`
/// envelope along `trace`, with `Delta_k = f(p^k) - f_best` and `p_star` in
/// place of the minimizer.
pub fn check_convex_rate<T: Real, M: Geometry<T>>(
    geom: &M,
    trace: &SolverTrace<T, M::Point>,
    envelope: &RateEnvelope<T>,
    f_best: T,
    p_star: &M::Point,
) -> ConvexRateReport<T> {
    let deltas: Vec<T> = trace.costs().into_iter().map(|c| c - f_best).collect();
    let delta0 = deltas[0];
    let floor = T::c(DELTA_FLOOR);
    let mut report = ConvexRateReport {
        delta0,
        checked: 0,
        ambiguous: 0,
        excluded: 0,
        min_step_slack: T::infinity(),
        min_summed_slack: T::infinity(),
        min_envelope_slack: T::infinity(),
        min_monotone_slack: T::infinity(),
        violations: Vec::new(),
    };
    if !(delta0 > floor) {
        return report;
    }
    let c = envelope.sublinear_constant();
    let delta = envelope.delta(delta0);
    let half = T::c(0.5);
    let band = T::c(REGIME_BAND);
    for k in 1..deltas.len() {
        let (prev, cur) = (deltas[k - 1], deltas[k]);
        report.min_monotone_slack = report.min_monotone_slack.min(prev - cur);
        let kf = T::from_usize_lossy(k);
        report.min_summed_slack =
            report.min_summed_slack.min((T::one() / (T::one() / delta0 + kf * delta) - cur) / delta0);
        report.min_envelope_slack = report.min_envelope_slack.min(c / kf - cur);
        if prev < floor {
            report.excluded += 1;
            continue;
        }
        let rec = &trace.records[k - 1];
        let d_star = geom.dist(&trace.iterates[k - 1], p_star);
        let denom = zeta1(envelope.kappa_min, rec.grad_step_length) * d_star * d_star;
        let ratio = if denom > T::zero() { rec.lambda * prev / denom } else { T::infinity() };
        if (ratio - T::one()).abs() <= band {
            report.ambiguous += 1;
            continue;
        }
        let bound = if ratio >= T::one() {
            half * prev
        } else {
            (T::one() - prev / c) * prev
        };
        let slack = (bound - cur) / delta0;
        report.checked += 1;
        report.min_step_slack = report.min_step_slack.min(slack);
        if slack < -T::c(1e-8) {
            report.violations.push(k);
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct StronglyConvexRateReport<T> {
    pub delta0: T,
    pub rho: T,
    pub checked: usize,
    pub excluded: usize,
    /// Smallest `(rho Delta_k - Delta_{k+1}) / Delta_0`.
    pub min_contraction_slack: T,
    /// Smallest `(rho^k Delta_0 - mu / 2 d^2(p^k, p*)) / Delta_0`.
    pub min_iterate_slack: T,
    pub violations: Vec<usize>,
}

impl<T: Real> StronglyConvexRateReport<T> {
    /// Both bounds within `1e-10 Delta_0`.
    pub fn passes(&self) -> bool {
        let tol = T::c(1e-10);
        self.violations.is_empty() && self.min_contraction_slack >= -tol && self.min_iterate_slack >= -tol
    }
}

/// Checks `Delta_{k+1} <= rho Delta_k` and `mu / 2 d^2(p^k, p*) <= rho^k Delta_0`
/// along `trace` with `p_star` in place of the minimizer.
pub fn check_strongly_convex_rate<T: Real, M: Geometry<T>>(
    geom: &M,
    trace: &SolverTrace<T, M::Point>,
    envelope: &RateEnvelope<T>,
    f_best: T,
    p_star: &M::Point,
) -> StronglyConvexRateReport<T> {
    let deltas: Vec<T> = trace.costs().into_iter().map(|c| c - f_best).collect();
    let delta0 = deltas[0];
    let rho = envelope.contraction();
    let mut report = StronglyConvexRateReport {
        delta0,
        rho,
        checked: 0,
        excluded: 0,
        min_contraction_slack: T::infinity(),
        min_iterate_slack: T::infinity(),
        violations: Vec::new(),
    };
    if !(delta0 > T::c(DELTA_FLOOR)) {
        return report;
    }
    let tol = T::c(1e-10);
    let mut rho_k = T::one();
    for (k, p) in trace.iterates.iter().enumerate() {
        let d = geom.dist(p, p_star);
        let it = (rho_k * delta0 - envelope.mu_bar * T::c(0.5) * d * d) / delta0;
        report.min_iterate_slack = report.min_iterate_slack.min(it);
        rho_k *= rho;
        if k + 1 == deltas.len() {
            break;
        }
        if deltas[k] < T::c(DELTA_FLOOR) {
            report.excluded += 1;
            continue;
        }
        let s = (rho * deltas[k] - deltas[k + 1]) / delta0;
        report.checked += 1;
        report.min_contraction_slack = report.min_contraction_slack.min(s);
        if s < -tol || it < -tol {
            report.violations.push(k);
        }
    }
    report
}

/// Smallest `bound - D_k` with `bound = sqrt(alpha / (2 - alpha)) (d(q*, p^0) + R)`,
/// where `q*` minimizes `g` alone. Diagnostic only: both inputs are proxies.
pub fn gradient_step_bound_slack<T: Real, P>(trace: &SolverTrace<T, P>, alpha: T, dist_qstar_p0: T, r_hat: T) -> T {
    let bound = (alpha / (T::c(2.0) - alpha)).sqrt() * (dist_qstar_p0 + r_hat);
    trace
        .records
        .iter()
        .filter(|r| !r.grad_step_length.is_nan())
        .fold(T::infinity(), |m, r| m.min(bound - r.grad_step_length))
}

/// Flat-space prox-grad bound computed with vector arithmetic:
/// `l(p, q) + (|p - T|^2 - |p - q|^2) / (2 lambda)`. Returns `(slack, T(q))`.
pub fn euclidean_prox_grad_slack<T, G, H>(
    problem: &SplitProblem<T, crate::euclidean::Euclidean, G, H>,
    p: &[T],
    q: &[T],
    lambda: T,
) -> Result<(T, Vec<T>)>
where
    T: Real,
    G: SmoothTerm<T, crate::euclidean::Euclidean>,
    H: ProximableTerm<T, crate::euclidean::Euclidean>,
{
    let (p, q) = (p.to_vec(), q.to_vec());
    let grad: Vec<T> = problem.grad(&q);
    let z: Vec<T> = q.iter().zip(&grad).map(|(&a, &g)| a - lambda * g).collect();
    let t = problem.prox(lambda, &z)?.point;
    let dot = grad.iter().zip(p.iter().zip(&q)).fold(T::zero(), |s, (&g, (&a, &b))| s + g * (a - b));
    let ell = problem.g(&p) - problem.g(&q) - dot;
    let norm2 = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y));
    let rhs = ell + (norm2(&p, &t) - norm2(&p, &q)) / (T::c(2.0) * lambda);
    Ok((problem.cost(&p) - problem.cost(&t) - rhs, t))
}
