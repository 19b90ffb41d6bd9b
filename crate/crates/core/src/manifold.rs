//! The manifold interface shared by every geometry, plus the curvature
//! comparison coefficients that enter stepsize and rate constants.

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{t_cot_t, t_coth_t, Real};

/// Linear structure of a tangent space representation.
pub trait Vector<T: Real>: Clone + Debug {
    fn scaled(&self, a: T) -> Self;

    /// `self += a * x`
    fn axpy(&mut self, a: T, x: &Self);

    fn zeros_like(&self) -> Self;
}

impl<T: Real> Vector<T> for Vec<T> {
    fn scaled(&self, a: T) -> Self {
        self.iter().map(|&v| v * a).collect()
    }

    fn axpy(&mut self, a: T, x: &Self) {
        assert_eq!(self.len(), x.len(), "tangent vectors of different length");
        for (s, &v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn zeros_like(&self) -> Self {
        vec![T::zero(); self.len()]
    }
}

/// Lower and upper bounds on the sectional curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBounds<T> {
    pub kappa_min: T,
    pub kappa_max: T,
}

impl<T: Real> CurvatureBounds<T> {
    pub fn new(kappa_min: T, kappa_max: T) -> Result<Self> {
        if !(kappa_min <= kappa_max) {
            return Err(Error::Domain(format!(
                "kappa_min = {kappa_min} exceeds kappa_max = {kappa_max}"
            )));
        }
        Ok(Self { kappa_min, kappa_max })
    }

    pub fn flat() -> Self {
        Self { kappa_min: T::zero(), kappa_max: T::zero() }
    }

    pub fn coefficients(&self, s: T) -> Result<CurvatureCoefficients<T>> {
        curvature_coefficients(self.kappa_min, self.kappa_max, s)
    }

    /// `zeta1` alone. Never fails for `s >= 0`.
    pub fn zeta1(&self, s: T) -> T {
        zeta1(self.kappa_min, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCoefficients<T> {
    pub zeta1: T,
    pub zeta2: T,
    pub sigma: T,
}

/// `zeta_{1,kappa}(s)`: `1` for `kappa >= 0`, otherwise `sqrt(-kappa) s coth(sqrt(-kappa) s)`.
pub fn zeta1<T: Real>(kappa_min: T, s: T) -> T {
    if kappa_min >= T::zero() {
        T::one()
    } else {
        t_coth_t((-kappa_min).sqrt() * s)
    }
}

/// Comparison coefficients `(zeta1, zeta2, sigma)` for curvature bounds
/// `kappa_min <= kappa_max` at distance `s >= 0`.
pub fn curvature_coefficients<T: Real>(
    kappa_min: T,
    kappa_max: T,
    s: T,
) -> Result<CurvatureCoefficients<T>> {
    if !(s >= T::zero()) {
        return Err(Error::Domain(format!("negative distance s = {s}")));
    }
    let z1 = zeta1(kappa_min, s);
    let z2 = if kappa_max <= T::zero() {
        T::one()
    } else {
        let arg = kappa_max.sqrt() * s;
        if arg >= T::PI() {
            return Err(Error::Domain(format!(
                "s = {s} reaches the conjugate radius pi/sqrt(kappa_max)"
            )));
        }
        t_cot_t(arg)
    };
    Ok(CurvatureCoefficients { zeta1: z1, zeta2: z2, sigma: z1.max(z2.abs()) })
}

/// Contract every concrete geometry provides.
///
/// Points are validated when constructed by the geometry, so distance and
/// logarithm are infallible. The exponential map produces a new point and
/// may fail the membership check.
pub trait Geometry<T: Real> {
    type Point: Clone + Debug;
    type Tangent: Vector<T>;

    fn name(&self) -> &'static str;

    /// Intrinsic dimension.
    fn manifold_dim(&self) -> usize;

    fn curvature(&self) -> CurvatureBounds<T>;

    fn inner(&self, p: &Self::Point, x: &Self::Tangent, y: &Self::Tangent) -> T;

    fn norm(&self, p: &Self::Point, x: &Self::Tangent) -> T {
        self.inner(p, x, x).max(T::zero()).sqrt()
    }

    fn dist(&self, p: &Self::Point, q: &Self::Point) -> T;

    fn exp(&self, p: &Self::Point, x: &Self::Tangent) -> Result<Self::Point>;

    fn log(&self, p: &Self::Point, q: &Self::Point) -> Self::Tangent;

    fn zero_tangent(&self, p: &Self::Point) -> Self::Tangent;

    /// Membership residual of a point (0 for an exact member), relative to
    /// the coordinate scale where rounding alone makes it grow.
    fn membership_residual(&self, p: &Self::Point) -> T;

    /// Tangency residual of `x` at `p` (0 for an exact tangent).
    fn tangency_residual(&self, p: &Self::Point, x: &Self::Tangent) -> T;

    /// Largest absolute coordinate difference of two points.
    fn coord_distance(&self, p: &Self::Point, q: &Self::Point) -> T;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    fn random_tangent<R: Rng + ?Sized>(&self, p: &Self::Point, rng: &mut R) -> Self::Tangent;
}

/// `exp_p(t log_p q)`. Values of `t` outside `[0, 1]` extrapolate.
pub fn geodesic<T: Real, M: Geometry<T>>(
    geom: &M,
    p: &M::Point,
    q: &M::Point,
    t: T,
) -> Result<M::Point> {
    if t == T::zero() {
        return Ok(p.clone());
    }
    let v = geom.log(p, q).scaled(t);
    geom.exp(p, &v)
}

/// Diameter of the geodesic triangle `abc`: its longest side.
pub fn triangle_diameter<T: Real, M: Geometry<T>>(
    geom: &M,
    a: &M::Point,
    b: &M::Point,
    c: &M::Point,
) -> T {
    geom.dist(a, b).max(geom.dist(b, c)).max(geom.dist(a, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_coefficients_are_one() {
        let c = curvature_coefficients(0.0, 0.0, 5.0).unwrap();
        assert_eq!((c.zeta1, c.zeta2, c.sigma), (1.0, 1.0, 1.0));
    }

    #[test]
    fn zeta1_limit_at_zero() {
        let c = curvature_coefficients(-1.0, 0.0, 0.0).unwrap();
        assert_eq!(c.zeta1, 1.0);
        assert_eq!(c.zeta2, 1.0);
    }

    #[test]
    fn zeta1_at_unit_distance() {
        // coth(1) = 1.3130352854993313...
        let c = curvature_coefficients(-1.0f64, 0.0, 1.0).unwrap();
        assert!((c.zeta1 - 1.313_035_285_499_331_3).abs() < 1e-12);
        assert!((c.sigma - c.zeta1).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(curvature_coefficients(-1.0f64, 0.0, -0.1).is_err());
        // pi / sqrt(1) is the pole of s cot s
        assert!(curvature_coefficients(-1.0f64, 1.0, 3.2).is_err());
        let c = curvature_coefficients(-1.0f64, 1.0, 1.0).unwrap();
        assert!((c.zeta2 - 1.0 / 1.0f64.tan()).abs() < 1e-14);
        assert!(CurvatureBounds::new(0.0f64, -1.0).is_err());
    }

    #[test]
    fn zeta1_nondecreasing_and_sigma_at_least_one() {
        for &kappa in &[-2.0f64, -1.0, -0.5, -1e-3] {
            let mut prev = 0.0;
            for i in 0..=400 {
                let s = i as f64 * 0.025;
                let c = curvature_coefficients(kappa, 0.0, s).unwrap();
                assert!(c.zeta1 >= prev);
                assert!(c.sigma >= 1.0);
                prev = c.zeta1;
            }
        }
        for i in 0..100 {
            let s = i as f64 * 0.03;
            let c = curvature_coefficients(-1.0f64, 0.5, s).unwrap();
            assert!(c.sigma >= 1.0);
        }
    }
}
