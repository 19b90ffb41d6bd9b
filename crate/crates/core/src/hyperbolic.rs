//! Hyperboloid model of `H^n` in `R^{n+1}` with the Minkowski metric of
//! signature `(+, ..., +, -)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{CurvatureBounds, Geometry, Vector};
use crate::scalar::{acosh_1p, sinhc, Real};

const MEMBERSHIP_TOL: f64 = 1e-10;
/// Largest relative tangency residual `exp` accepts. Sums of many tangents
/// at far points carry cancellation error well above the membership
/// tolerance, so only gross misuse is rejected.
pub const EXP_TANGENCY_TOL: f64 = 1e-6;

/// `sum_{i<=n} x_i y_i - x_{n+1} y_{n+1}`
pub fn minkowski_inner<T: Real>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len(), "Minkowski vectors of different length");
    let n = x.len() - 1;
    let mut s = T::zero();
    for i in 0..n {
        s += x[i] * y[i];
    }
    s - x[n] * y[n]
}

/// A point on the upper sheet `<x,x>_M = -1, x_{n+1} > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicPoint<T>(Vec<T>);

impl<T: Real> HyperbolicPoint<T> {
    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<T> {
        self.0
    }

    /// Keeps the spatial coordinates of `v` and resets the last one to
    /// `sqrt(1 + |v_s|^2)`. Far from the apex this moves a nearly-member
    /// vector much less than rescaling does.
    pub fn lifted(mut v: Vec<T>) -> Self {
        let n = v.len() - 1;
        let s2 = v[..n].iter().fold(T::zero(), |s, &c| s + c * c);
        v[n] = (T::one() + s2).sqrt();
        Self(v)
    }

    /// Rescales `v` onto the hyperboloid. Requires `<v,v>_M < 0` and a
    /// positive last coordinate.
    pub fn normalized(v: Vec<T>) -> Result<Self> {
        let q = minkowski_inner(&v, &v);
        let last = *v.last().expect("nonempty coordinates");
        if !(q < T::zero()) || !(last > T::zero()) {
            return Err(Error::Domain(format!(
                "cannot normalize onto the hyperboloid: <v,v>_M = {q}, last coordinate {last}"
            )));
        }
        let s = (-q).sqrt();
        Ok(Self(v.into_iter().map(|c| c / s).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hyperbolic {
    n: usize,
}

impl Hyperbolic {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("hyperbolic dimension must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(0, ..., 0, 1)`
    pub fn apex<T: Real>(&self) -> HyperbolicPoint<T> {
        let mut v = vec![T::zero(); self.n + 1];
        v[self.n] = T::one();
        HyperbolicPoint(v)
    }

    /// Validates coordinates as a hyperboloid point.
    pub fn point<T: Real>(&self, coords: Vec<T>) -> Result<HyperbolicPoint<T>> {
        self.check_len(coords.len())?;
        let q = minkowski_inner(&coords, &coords);
        if (q + T::one()).abs() > T::c(MEMBERSHIP_TOL) * (T::one() + coords[self.n] * coords[self.n]) {
            return Err(Error::Membership {
                geometry: "hyperbolic",
                reason: format!("<x,x>_M = {q}"),
            });
        }
        if !(coords[self.n] > T::zero()) {
            return Err(Error::Membership {
                geometry: "hyperbolic",
                reason: "lower sheet".into(),
            });
        }
        Ok(HyperbolicPoint(coords))
    }

    /// Point at distance `|v|` from the apex in direction `v` (spatial part).
    pub fn from_spatial_tangent<T: Real>(&self, v: &[T]) -> Result<HyperbolicPoint<T>> {
        self.check_len(v.len() + 1)?;
        let mut t = v.to_vec();
        t.push(T::zero());
        self.exp(&self.apex(), &t)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: self.n + 1, found: len });
        }
        Ok(())
    }

    /// `z + <x,z>_M x`
    pub fn project_tangent<T: Real>(&self, x: &HyperbolicPoint<T>, z: &[T]) -> Vec<T> {
        assert_eq!(z.len(), self.n + 1, "dimension mismatch");
        let c = minkowski_inner(&x.0, z);
        x.0.iter().zip(z).map(|(&xi, &zi)| zi + c * xi).collect()
    }

    /// `-<x,y>_M - 1`, computed as `<x-y, x-y>_M / 2` to avoid cancellation.
    fn cosh_dist_minus_one<T: Real>(&self, x: &HyperbolicPoint<T>, y: &HyperbolicPoint<T>) -> T {
        assert_eq!(x.0.len(), y.0.len(), "points from different hyperbolic spaces");
        let n = self.n;
        let d: Vec<T> = x.0.iter().zip(&y.0).map(|(&a, &b)| a - b).collect();
        // `|x - y|_M^2 / 2` loses `eps |x - y|^2` and `-<x,y>_M - 1` loses
        // `eps x_t y_t`; take whichever form rounds less.
        let diff_scale = d.iter().fold(T::zero(), |s, &c| s + c * c);
        let inner_scale = x.0[n] * y.0[n];
        let delta = if diff_scale <= inner_scale {
            minkowski_inner(&d, &d) * T::c(0.5)
        } else {
            -minkowski_inner(&x.0, &y.0) - T::one()
        };
        delta.max(T::zero())
    }

    /// Norm of a tangent `v` at `x`, read off its transport to the apex
    /// (`v_s - v_t x_s / (1 + x_t)`). Far from the apex this avoids the
    /// cancellation in `|v_s|^2 - v_t^2`.
    pub fn tangent_norm<T: Real>(&self, x: &HyperbolicPoint<T>, v: &[T]) -> T {
        let n = self.n;
        let c = v[n] / (T::one() + x.0[n]);
        v[..n].iter().zip(&x.0[..n]).fold(T::zero(), |s, (&vi, &xi)| {
            let w = vi - c * xi;
            s + w * w
        }).sqrt()
    }

    /// Parallel transport of `v` from the apex to `x` along their geodesic.
    pub fn transport_from_apex<T: Real>(&self, x: &HyperbolicPoint<T>, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n + 1, "dimension mismatch");
        let a = self.apex::<T>();
        let c = minkowski_inner(&x.0, v) / (T::one() - minkowski_inner(&a.0, &x.0));
        v.iter()
            .zip(a.0.iter().zip(&x.0))
            .map(|(&vi, (&ai, &xi))| vi + c * (ai + xi))
            .collect()
    }

    /// `exp_anchor(V)` with `V` isotropic Gaussian in `T_anchor`: each of the
    /// `n` orthonormal directions gets an `N(0, stddev^2)` coefficient.
    pub fn sample_gaussian<T: Real, R: Rng + ?Sized>(
        &self,
        anchor: &HyperbolicPoint<T>,
        stddev: T,
        rng: &mut R,
    ) -> HyperbolicPoint<T> {
        let v = self.random_tangent_at_apex(rng).scaled(stddev);
        let v = self.transport_from_apex(anchor, &v);
        self.exp(anchor, &v).expect("transported tangent is valid")
    }

    fn random_tangent_at_apex<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut v: Vec<T> = (0..self.n).map(|_| T::c(rng.sample::<f64, _>(StandardNormal))).collect();
        v.push(T::zero());
        v
    }
}

impl<T: Real> Geometry<T> for Hyperbolic {
    type Point = HyperbolicPoint<T>;
    type Tangent = Vec<T>;

    fn name(&self) -> &'static str {
        "hyperbolic"
    }

    fn manifold_dim(&self) -> usize {
        self.n
    }

    fn curvature(&self) -> CurvatureBounds<T> {
        CurvatureBounds { kappa_min: -T::one(), kappa_max: -T::one() }
    }

    fn inner(&self, _p: &Self::Point, x: &Vec<T>, y: &Vec<T>) -> T {
        minkowski_inner(x, y)
    }

    fn norm(&self, p: &Self::Point, x: &Vec<T>) -> T {
        self.tangent_norm(p, x)
    }

    fn dist(&self, p: &Self::Point, q: &Self::Point) -> T {
        acosh_1p(self.cosh_dist_minus_one(p, q))
    }

    /// Rejects `v` whose relative tangency residual exceeds
    /// [`EXP_TANGENCY_TOL`]; below that, the time-like component is rebuilt
    /// from the spatial ones, the lift matching [`HyperbolicPoint::lifted`].
    fn exp(&self, p: &Self::Point, v: &Vec<T>) -> Result<Self::Point> {
        self.check_len(v.len())?;
        let res = self.tangency_residual(p, v);
        if !(res <= T::c(EXP_TANGENCY_TOL)) {
            return Err(Error::Tangency {
                geometry: "hyperbolic",
                reason: format!("relative <x,v>_M residual {res}"),
            });
        }
        let n = self.n;
        let mut v = v.clone();
        v[n] = p.0[..n].iter().zip(&v[..n]).fold(T::zero(), |s, (&x, &y)| s + x * y) / p.0[n];
        let v = &v;
        let nv = self.tangent_norm(p, v);
        let ch = nv.cosh();
        let sc = sinhc(nv);
        let out: Vec<T> = p.0.iter().zip(v).map(|(&x, &vi)| ch * x + sc * vi).collect();
        if !out.iter().all(|c| c.is_finite()) {
            return Err(Error::Membership { geometry: "hyperbolic", reason: "non-finite exp".into() });
        }
        Ok(HyperbolicPoint::lifted(out))
    }

    fn log(&self, p: &Self::Point, q: &Self::Point) -> Vec<T> {
        let delta = self.cosh_dist_minus_one(p, q);
        let u = acosh_1p(delta);
        // u / sinh(u), where sinh(u) = sqrt(delta (2 + delta))
        let coef = T::one() / sinhc(u);
        // y + <x,y>_M x = (y - x) - delta x
        p.0.iter()
            .zip(&q.0)
            .map(|(&x, &y)| coef * ((y - x) - delta * x))
            .collect()
    }

    fn zero_tangent(&self, _p: &Self::Point) -> Vec<T> {
        vec![T::zero(); self.n + 1]
    }

    /// `|<x,x>_M + 1| / (1 + x_{n+1}^2)`. Rounding the coordinates alone
    /// leaves `|<x,x>_M + 1|` of order `eps x_{n+1}^2`, hence the scaling.
    fn membership_residual(&self, p: &Self::Point) -> T {
        let t = p.0[self.n];
        (minkowski_inner(&p.0, &p.0) + T::one()).abs() / (T::one() + t * t)
    }

    /// `|<x,v>_M| / (1 + x_{n+1} max_i |v_i|)`, scaled for the same reason as
    /// the membership residual.
    fn tangency_residual(&self, p: &Self::Point, x: &Vec<T>) -> T {
        let vmax = x.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        minkowski_inner(&p.0, x).abs() / (T::one() + p.0[self.n] * vmax)
    }

    fn coord_distance(&self, p: &Self::Point, q: &Self::Point) -> T {
        p.0.iter().zip(&q.0).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Gaussian tangent of unit standard deviation at the apex.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point {
        self.sample_gaussian(&self.apex(), T::one(), rng)
    }

    /// Isotropic standard Gaussian in `T_p`.
    fn random_tangent<R: Rng + ?Sized>(&self, p: &Self::Point, rng: &mut R) -> Vec<T> {
        let v = self.random_tangent_at_apex(rng);
        self.transport_from_apex(p, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::geodesic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h2() -> Hyperbolic {
        Hyperbolic::new(2).unwrap()
    }

    #[test]
    fn minkowski_examples() {
        let a = [0.0, 0.0, 1.0];
        assert_eq!(minkowski_inner(&a, &a), -1.0);
        let x = [1.0, 0.0, 2.0f64.sqrt()];
        assert!((minkowski_inner(&x, &x) + 1.0).abs() < 1e-15);
        let y = [1.0f64.sinh(), 0.0, 1.0f64.cosh()];
        assert!((minkowski_inner(&a, &y) + 1.543_080_634_815_243_7).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn minkowski_length_mismatch_panics() {
        minkowski_inner(&[1.0, 2.0], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn projection_examples() {
        let g = h2();
        let a = g.apex::<f64>();
        assert_eq!(g.project_tangent(&a, &[1.0, 0.0, 1.0]), vec![1.0, 0.0, 0.0]);
        let x = g.point(vec![1.0, 0.0, 2.0f64.sqrt()]).unwrap();
        let p = g.project_tangent(&x, x.coords());
        assert!(p.iter().all(|c| c.abs() < 1e-15));
        let t = vec![0.3, -0.2, 0.0];
        assert_eq!(g.project_tangent(&a, &t), t);
    }

    #[test]
    fn distance_and_log_accurate_far_from_apex() {
        let g = h2();
        let (a, r) = (0.7f64, 20.0f64);
        let x = g.point(vec![a.sinh(), 0.0, a.cosh()]).unwrap();
        let along = g.point(vec![r.sinh(), 0.0, r.cosh()]).unwrap();
        let across = g.point(vec![0.0, r.sinh(), r.cosh()]).unwrap();
        assert!((g.dist(&x, &along) - (r - a)).abs() < 1e-12);
        let expect = (a.cosh() * r.cosh()).acosh();
        assert!((g.dist(&x, &across) - expect).abs() < 1e-12);
        for y in [&along, &across] {
            let v = g.log(&x, y);
            assert!((g.norm(&x, &v) - g.dist(&x, y)).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_examples() {
        let g = h2();
        let a = g.apex::<f64>();
        assert_eq!(g.dist(&a, &a), 0.0);
        let y = g.point(vec![1.0f64.sinh(), 0.0, 1.0f64.cosh()]).unwrap();
        assert!((g.dist(&a, &y) - 1.0).abs() < 1e-14);
        let y = g.point(vec![2.5f64.sinh(), 0.0, 2.5f64.cosh()]).unwrap();
        assert!((g.dist(&a, &y) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn exp_log_examples() {
        let g = h2();
        let a = g.apex::<f64>();
        assert_eq!(g.exp(&a, &vec![0.0; 3]).unwrap(), a);
        let e = g.exp(&a, &vec![1.0, 0.0, 0.0]).unwrap();
        assert!((e.coords()[0] - 1.0f64.sinh()).abs() < 1e-14);
        assert!((e.coords()[2] - 1.0f64.cosh()).abs() < 1e-14);
        assert!(g.membership_residual(&e) < 1e-14);
        let l = g.log(&a, &e);
        assert!((l[0] - 1.0).abs() < 1e-13 && l[1].abs() < 1e-15 && l[2].abs() < 1e-15);
        assert!(g.log(&a, &a).iter().all(|&c| c == 0.0));
    }

    #[test]
    fn exp_rejects_non_tangent() {
        let g = h2();
        let a = g.apex::<f64>();
        assert!(matches!(g.exp(&a, &vec![0.0, 0.0, 1.0]), Err(Error::Tangency { .. })));
        assert!(matches!(g.exp(&a, &vec![0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn point_validation() {
        let g = h2();
        assert!(g.point(vec![0.0, 0.0, -1.0]).is_err());
        assert!(g.point(vec![1.0, 0.0, 1.0]).is_err());
        assert!(g.point(vec![0.0, 1.0]).is_err());
        assert!(Hyperbolic::new(0).is_err());
    }

    #[test]
    fn random_pairs_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Hyperbolic::new(3).unwrap();
        for _ in 0..100 {
            let x: HyperbolicPoint<f64> = g.random_point(&mut rng);
            let y = g.random_point(&mut rng);
            let v = g.log(&x, &y);
            let d = g.dist(&x, &y);
            assert!((g.norm(&x, &v) - d).abs() < 1e-9 * (1.0 + d));
            let back = g.exp(&x, &v).unwrap();
            assert!(g.coord_distance(&back, &y) < 1e-8 * (1.0 + y.coords()[3]));
            assert!(g.membership_residual(&back) <= 1e-10);
            assert!((g.dist(&x, &y) - g.dist(&y, &x)).abs() < 1e-10);
        }
    }

    #[test]
    fn geodesic_constant_speed_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = h2();
        for _ in 0..50 {
            let x: HyperbolicPoint<f64> = g.random_point(&mut rng);
            let y = g.random_point(&mut rng);
            let z = g.random_point(&mut rng);
            let d = g.dist(&x, &y);
            for &t in &[0.25, 0.5, 0.75] {
                let m = geodesic(&g, &x, &y, t).unwrap();
                assert!((g.dist(&x, &m) - t * d).abs() < 1e-8);
            }
            assert!(g.dist(&x, &z) <= g.dist(&x, &y) + g.dist(&y, &z) + 1e-9);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_shrinks() {
        let g = h2();
        let a = g.apex::<f64>();
        let p1 = g.sample_gaussian(&a, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        let p2 = g.sample_gaussian(&a, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(p1, p2);
        let tiny = g.sample_gaussian(&a, 1e-9, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(g.dist(&a, &tiny) < 1e-8);
    }

    #[test]
    fn sample_mean_distance_band() {
        let g = h2();
        let a = g.apex::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mean: f64 =
            (0..1000).map(|_| g.dist(&a, &g.sample_gaussian(&a, 1.0, &mut rng))).sum::<f64>() / 1000.0;
        assert!(mean > 0.5 && mean < 3.0, "mean distance {mean}");
    }

    #[test]
    fn works_in_single_precision() {
        let g = h2();
        let a = g.apex::<f32>();
        let e = g.exp(&a, &vec![0.5f32, -0.25, 0.0]).unwrap();
        let l = g.log(&a, &e);
        assert!((l[0] - 0.5).abs() < 1e-5 && (l[1] + 0.25).abs() < 1e-5);
    }

    #[test]
    fn transport_from_apex_is_isometric() {
        let g = Hyperbolic::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = g.apex::<f64>();
        for _ in 0..100 {
            let x: HyperbolicPoint<f64> = g.random_point(&mut rng);
            let u = g.random_tangent(&a, &mut rng);
            let v = g.random_tangent(&a, &mut rng);
            let (tu, tv) = (g.transport_from_apex(&x, &u), g.transport_from_apex(&x, &v));
            let scale = 1.0 + x.coords()[4];
            assert!(g.tangency_residual(&x, &tu) < 1e-12 * scale * scale);
            assert!((g.inner(&x, &tu, &tv) - g.inner(&a, &u, &v)).abs() < 1e-10 * scale * scale);
        }
        // the geodesic direction is carried onto itself
        let x = g.from_spatial_tangent(&[0.3, -1.0, 0.2, 0.5]).unwrap();
        let t = g.transport_from_apex(&x, &g.log(&a, &x));
        let back: Vec<f64> = g.log(&x, &a).iter().map(|c| -c).collect();
        assert!(t.iter().zip(&back).all(|(p, q)| (p - q).abs() < 1e-12));
    }
}
