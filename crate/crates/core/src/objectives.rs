//! Composite objectives `f = g + h`: smooth terms with gradients, proximable
//! terms, and the problem bundle the solvers consume.

use rand::Rng;

use crate::error::{Error, Result};
use crate::euclidean::Euclidean;
use crate::hyperbolic::{Hyperbolic, HyperbolicPoint};
use crate::linalg::Matrix;
use crate::manifold::{zeta1, Geometry, Vector};
use crate::prox::{l1_norm, project_ball, prox_distance, prox_l1_hyperbolic};
use crate::scalar::{sign0, Real};
use crate::spd::{Spd, SpdPoint};

/// Smallest Lipschitz constant handed to a solver.
pub const LIPSCHITZ_FLOOR: f64 = 1e-6;

/// Differentiable part `g`.
pub trait SmoothTerm<T: Real, M: Geometry<T>> {
    fn value(&self, geom: &M, p: &M::Point) -> T;
    fn gradient(&self, geom: &M, p: &M::Point) -> M::Tangent;
}

/// Result of a proximal map. `converged` is false when an inner iteration
/// stopped at its cap.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutput<P> {
    pub point: P,
    pub converged: bool,
}

impl<P> ProxOutput<P> {
    pub fn exact(point: P) -> Self {
        Self { point, converged: true }
    }
}

/// Nonsmooth part `h`, possibly taking the value `+inf`.
pub trait ProximableTerm<T: Real, M: Geometry<T>> {
    fn value(&self, geom: &M, p: &M::Point) -> T;
    /// `argmin_q h(q) + dist^2(p, q) / (2 lambda)`
    fn prox(&self, geom: &M, lambda: T, p: &M::Point) -> Result<ProxOutput<M::Point>>;
}

/// `f = g + h` on one geometry, with the smoothness constant `L` of `g` and
/// the strong convexity modulus of `f` (zero when merely convex).
#[derive(Debug, Clone)]
pub struct SplitProblem<T, M, G, H> {
    pub geometry: M,
    pub smooth: G,
    pub nonsmooth: H,
    pub lipschitz: T,
    pub strong_convexity: T,
}

impl<T: Real, M: Geometry<T>, G: SmoothTerm<T, M>, H: ProximableTerm<T, M>> SplitProblem<T, M, G, H> {
    pub fn new(geometry: M, smooth: G, nonsmooth: H, lipschitz: T, strong_convexity: T) -> Result<Self> {
        if !(lipschitz > T::zero()) || !lipschitz.is_finite() {
            return Err(Error::Domain(format!("lipschitz constant must be positive, got {lipschitz}")));
        }
        if !(strong_convexity >= T::zero()) {
            return Err(Error::Domain(format!("strong convexity must be nonnegative, got {strong_convexity}")));
        }
        Ok(Self { geometry, smooth, nonsmooth, lipschitz, strong_convexity })
    }

    pub fn g(&self, p: &M::Point) -> T {
        self.smooth.value(&self.geometry, p)
    }

    pub fn grad(&self, p: &M::Point) -> M::Tangent {
        self.smooth.gradient(&self.geometry, p)
    }

    pub fn h(&self, p: &M::Point) -> T {
        self.nonsmooth.value(&self.geometry, p)
    }

    pub fn prox(&self, lambda: T, p: &M::Point) -> Result<ProxOutput<M::Point>> {
        self.nonsmooth.prox(&self.geometry, lambda, p)
    }

    pub fn cost(&self, p: &M::Point) -> T {
        self.g(p) + self.h(p)
    }
}

/// `max(l, 1e-6)`
pub fn floor_lipschitz<T: Real>(l: T) -> T {
    l.max(T::c(LIPSCHITZ_FLOOR))
}

/// `g = 0`
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSmooth;

impl<T: Real, M: Geometry<T>> SmoothTerm<T, M> for ZeroSmooth {
    fn value(&self, _geom: &M, _p: &M::Point) -> T {
        T::zero()
    }

    fn gradient(&self, geom: &M, p: &M::Point) -> M::Tangent {
        geom.zero_tangent(p)
    }
}

/// `h = 0`, whose prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPenalty;

impl<T: Real, M: Geometry<T>> ProximableTerm<T, M> for NoPenalty {
    fn value(&self, _geom: &M, _p: &M::Point) -> T {
        T::zero()
    }

    fn prox(&self, _geom: &M, _lambda: T, p: &M::Point) -> Result<ProxOutput<M::Point>> {
        Ok(ProxOutput::exact(p.clone()))
    }
}

/// `(log det p)^4` on SPD matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogDetQuartic;

pub fn logdet4_value<T: Real>(p: &SpdPoint<T>) -> T {
    p.log_det().powi(4)
}

/// `4 (log det p)^3 p`
pub fn logdet4_gradient<T: Real>(p: &SpdPoint<T>) -> Matrix<T> {
    p.matrix().scaled(T::c(4.0) * p.log_det().powi(3))
}

/// Largest `12 n (log det q)^2` over `samples` points drawn uniformly in the
/// geodesic ball `B(p0, radius)`. Not floored.
pub fn logdet4_lipschitz<T: Real, R: Rng + ?Sized>(
    geom: &Spd,
    p0: &SpdPoint<T>,
    radius: T,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    if !(radius > T::zero()) || samples == 0 {
        return Err(Error::Domain("lipschitz estimate needs radius > 0 and samples >= 1".into()));
    }
    let coef = T::c(12.0) * T::from_usize_lossy(geom.n());
    let mut best = T::zero();
    for _ in 0..samples {
        let q = geom.sample_in_ball(p0, radius, rng);
        best = best.max(coef * q.log_det().powi(2));
    }
    Ok(best)
}

/// Exact maximum of `12 n (log det q)^2` over the geodesic ball `B(p0, radius)`:
/// `log det` is affine along geodesics with slope at most `sqrt(n)`, so the
/// maximum is `12 n (|log det p0| + sqrt(n) radius)^2`.
pub fn logdet4_lipschitz_ball<T: Real>(geom: &Spd, p0: &SpdPoint<T>, radius: T) -> T {
    let n = T::from_usize_lossy(geom.n());
    let phi = p0.log_det().abs() + n.sqrt() * radius;
    T::c(12.0) * n * phi * phi
}

impl<T: Real> SmoothTerm<T, Spd> for LogDetQuartic {
    fn value(&self, _geom: &Spd, p: &SpdPoint<T>) -> T {
        logdet4_value(p)
    }

    fn gradient(&self, _geom: &Spd, p: &SpdPoint<T>) -> Matrix<T> {
        logdet4_gradient(p)
    }
}

/// `tau * dist(., anchor)`
#[derive(Debug, Clone)]
pub struct DistanceTo<P, T> {
    pub anchor: P,
    pub tau: T,
}

impl<T: Real, M: Geometry<T>> ProximableTerm<T, M> for DistanceTo<M::Point, T> {
    fn value(&self, geom: &M, p: &M::Point) -> T {
        self.tau * geom.dist(p, &self.anchor)
    }

    fn prox(&self, geom: &M, lambda: T, p: &M::Point) -> Result<ProxOutput<M::Point>> {
        prox_distance(geom, &self.anchor, self.tau, lambda, p).map(ProxOutput::exact)
    }
}

/// Points with uniform weights `1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCloud<P> {
    points: Vec<P>,
}

impl<P> DataCloud<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(1/2N) sum_i dist^2(p, q_i)`
pub fn frechet_value<T: Real, M: Geometry<T>>(geom: &M, cloud: &DataCloud<M::Point>, p: &M::Point) -> T {
    let s = cloud.points.iter().fold(T::zero(), |s, q| {
        let d = geom.dist(p, q);
        s + d * d
    });
    s / (T::c(2.0) * T::from_usize_lossy(cloud.len()))
}

/// `-(1/N) sum_i log_p(q_i)`
pub fn frechet_gradient<T: Real, M: Geometry<T>>(
    geom: &M,
    cloud: &DataCloud<M::Point>,
    p: &M::Point,
) -> M::Tangent {
    let w = -T::one() / T::from_usize_lossy(cloud.len());
    let mut g = geom.zero_tangent(p);
    for q in &cloud.points {
        g.axpy(w, &geom.log(p, q));
    }
    g
}

/// `zeta_1(kappa_min, D)` for a set of diameter `D` containing the data and
/// the iterates. At least 1.
pub fn frechet_lipschitz<T: Real, M: Geometry<T>>(geom: &M, enclosing_diameter: T) -> T {
    zeta1(geom.curvature().kappa_min, enclosing_diameter)
}

/// Fréchet mean objective `g`.
#[derive(Debug, Clone)]
pub struct FrechetMean<P> {
    pub cloud: DataCloud<P>,
}

impl<T: Real, M: Geometry<T>> SmoothTerm<T, M> for FrechetMean<M::Point> {
    fn value(&self, geom: &M, p: &M::Point) -> T {
        frechet_value(geom, &self.cloud, p)
    }

    fn gradient(&self, geom: &M, p: &M::Point) -> M::Tangent {
        frechet_gradient(geom, &self.cloud, p)
    }
}

/// `mu * ||p||_1` on the hyperboloid, time-like coordinate included.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicL1<T> {
    pub mu: T,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> HyperbolicL1<T> {
    /// Fixed-point tolerance `1e-7`, at most 20 iterations.
    pub fn new(mu: T) -> Self {
        Self { mu, tol: T::c(1e-7), max_iter: 20 }
    }
}

impl<T: Real> ProximableTerm<T, Hyperbolic> for HyperbolicL1<T> {
    fn value(&self, _geom: &Hyperbolic, p: &HyperbolicPoint<T>) -> T {
        self.mu * l1_norm(p)
    }

    fn prox(&self, _geom: &Hyperbolic, lambda: T, p: &HyperbolicPoint<T>) -> Result<ProxOutput<HyperbolicPoint<T>>> {
        let r = prox_l1_hyperbolic(p, lambda * self.mu, self.tol, self.max_iter)?;
        Ok(ProxOutput { point: r.point, converged: r.converged })
    }
}

/// Indicator of the closed ball `B(center, radius)`. Points within
/// `1e-10 * (1 + radius)` of the boundary count as inside so that projected
/// points are feasible despite roundoff.
#[derive(Debug, Clone)]
pub struct BallIndicator<P, T> {
    pub center: P,
    pub radius: T,
}

impl<P, T: Real> BallIndicator<P, T> {
    pub fn new(center: P, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains<M: Geometry<T, Point = P>>(&self, geom: &M, p: &P) -> bool {
        geom.dist(&self.center, p) <= self.radius + T::c(1e-10) * (T::one() + self.radius)
    }
}

impl<T: Real, M: Geometry<T>> ProximableTerm<T, M> for BallIndicator<M::Point, T> {
    fn value(&self, geom: &M, p: &M::Point) -> T {
        if self.contains(geom, p) {
            T::zero()
        } else {
            T::infinity()
        }
    }

    fn prox(&self, geom: &M, _lambda: T, p: &M::Point) -> Result<ProxOutput<M::Point>> {
        project_ball(geom, &self.center, self.radius, p).map(ProxOutput::exact)
    }
}

/// `1/2 sum_i a_i (x_i - b_i)^2` on `R^n`, used for flat reference checks.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratic<T> {
    pub weights: Vec<T>,
    pub center: Vec<T>,
}

impl<T: Real> DiagonalQuadratic<T> {
    /// Largest weight, the smoothness constant.
    pub fn lipschitz(&self) -> T {
        self.weights.iter().fold(T::zero(), |m, &w| m.max(w))
    }
}

impl<T: Real> SmoothTerm<T, Euclidean> for DiagonalQuadratic<T> {
    fn value(&self, _geom: &Euclidean, p: &Vec<T>) -> T {
        let mut s = T::zero();
        for ((&a, &b), &x) in self.weights.iter().zip(&self.center).zip(p) {
            s += a * (x - b) * (x - b);
        }
        s * T::c(0.5)
    }

    fn gradient(&self, _geom: &Euclidean, p: &Vec<T>) -> Vec<T> {
        self.weights.iter().zip(&self.center).zip(p).map(|((&a, &b), &x)| a * (x - b)).collect()
    }
}

/// `mu * ||x||_1` on `R^n` with the soft-thresholding prox.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanL1<T> {
    pub mu: T,
}

impl<T: Real> ProximableTerm<T, Euclidean> for EuclideanL1<T> {
    fn value(&self, _geom: &Euclidean, p: &Vec<T>) -> T {
        self.mu * p.iter().fold(T::zero(), |s, &x| s + x.abs())
    }

    fn prox(&self, _geom: &Euclidean, lambda: T, p: &Vec<T>) -> Result<ProxOutput<Vec<T>>> {
        let t = lambda * self.mu;
        Ok(ProxOutput::exact(p.iter().map(|&x| sign0(x) * (x.abs() - t).max(T::zero())).collect()))
    }
}
