//! Symmetric positive definite matrices `P(n)` with the affine-invariant
//! metric `<X, Y>_p = tr(p^{-1} X p^{-1} Y)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::manifold::{CurvatureBounds, Geometry, Vector};
use crate::scalar::Real;

/// An SPD matrix together with the eigen data every operation needs.
#[derive(Debug, Clone)]
pub struct SpdPoint<T> {
    mat: Matrix<T>,
    sqrt: Matrix<T>,
    inv_sqrt: Matrix<T>,
    inv: Matrix<T>,
    eigenvalues: Vec<T>,
}

impl<T: Real> PartialEq for SpdPoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl<T: Real> SpdPoint<T> {
    /// Symmetrizes `mat` and validates positive definiteness: the smallest
    /// eigenvalue must exceed `1e-12` times the largest.
    pub fn new(mat: Matrix<T>) -> Result<Self> {
        let mat = mat.symmetrized();
        let eig = SymmetricEigen::new(&mat);
        let lo = eig.values[0];
        let hi = *eig.values.last().expect("nonempty matrix");
        if !(lo > T::c(1e-12) * hi) || !(lo > T::zero()) || !hi.is_finite() {
            return Err(Error::Membership {
                geometry: "spd",
                reason: format!("eigenvalues in [{lo:e}, {hi:e}]"),
            });
        }
        Ok(Self {
            sqrt: eig.map(|x| x.sqrt()),
            inv_sqrt: eig.map(|x| T::one() / x.sqrt()),
            inv: eig.map(|x| T::one() / x),
            eigenvalues: eig.values,
            mat,
        })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn sqrt(&self) -> &Matrix<T> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Matrix<T> {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> &Matrix<T> {
        &self.inv
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `log det p`, summed from eigenvalue logs.
    pub fn log_det(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |s, &l| s + l.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spd {
    n: usize,
}

impl Spd {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix size must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point<T: Real>(&self, mat: Matrix<T>) -> Result<SpdPoint<T>> {
        if mat.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: mat.n() });
        }
        if mat.asymmetry() > T::c(1e-10) * (T::one() + mat.frobenius_norm()) {
            return Err(Error::Membership {
                geometry: "spd",
                reason: "matrix is not symmetric".into(),
            });
        }
        SpdPoint::new(mat)
    }

    pub fn identity<T: Real>(&self) -> SpdPoint<T> {
        SpdPoint::new(Matrix::identity(self.n)).expect("identity is SPD")
    }

    /// Random symmetric tangent with Gaussian entries (off-diagonal variance 1/2).
    fn gaussian_symmetric<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix<T> {
        let mut m = Matrix::zeros(self.n);
        let h = T::c(std::f64::consts::FRAC_1_SQRT_2);
        for i in 0..self.n {
            m[(i, i)] = T::c(rng.sample::<f64, _>(StandardNormal));
            for j in (i + 1)..self.n {
                let v = T::c(rng.sample::<f64, _>(StandardNormal)) * h;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// `exp_p(X)` with `X` a random direction scaled to length `radius * u^{1/d}`,
    /// `u` uniform: approximately uniform in the tangent ball of that radius.
    pub fn sample_in_ball<T: Real, R: Rng + ?Sized>(
        &self,
        center: &SpdPoint<T>,
        radius: T,
        rng: &mut R,
    ) -> SpdPoint<T> {
        let g = self.gaussian_symmetric::<T, R>(rng);
        // Gaussian at the identity is isotropic; move it to the tangent space at `center`.
        let x = g.congruence(center.sqrt());
        let nx = self.norm(center, &x);
        let d = <Self as Geometry<T>>::manifold_dim(self) as f64;
        let u: f64 = rng.random::<f64>();
        let len = radius * T::c(u.powf(1.0 / d));
        let x = if nx > T::zero() { x.scaled(len / nx) } else { x };
        self.exp(center, &x).expect("bounded tangent stays SPD")
    }
}

impl<T: Real> Geometry<T> for Spd {
    type Point = SpdPoint<T>;
    type Tangent = Matrix<T>;

    fn name(&self) -> &'static str {
        "spd"
    }

    fn manifold_dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn curvature(&self) -> CurvatureBounds<T> {
        CurvatureBounds { kappa_min: T::c(-0.5), kappa_max: T::zero() }
    }

    fn inner(&self, p: &SpdPoint<T>, x: &Matrix<T>, y: &Matrix<T>) -> T {
        let a = p.inv.matmul(x);
        let b = p.inv.matmul(y);
        a.trace_of_product(&b)
    }

    fn dist(&self, p: &SpdPoint<T>, q: &SpdPoint<T>) -> T {
        let c = q.mat.congruence(&p.inv_sqrt);
        let eig = SymmetricEigen::new(&c);
        eig.values
            .iter()
            .fold(T::zero(), |s, &l| {
                let ll = l.max(T::min_positive_value()).ln();
                s + ll * ll
            })
            .sqrt()
    }

    fn exp(&self, p: &SpdPoint<T>, x: &Matrix<T>) -> Result<SpdPoint<T>> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.n() });
        }
        let inner = x.congruence(&p.inv_sqrt);
        let e = SymmetricEigen::new(&inner).map(|v| v.exp());
        SpdPoint::new(e.congruence(&p.sqrt))
    }

    fn log(&self, p: &SpdPoint<T>, q: &SpdPoint<T>) -> Matrix<T> {
        let c = q.mat.congruence(&p.inv_sqrt);
        let l = SymmetricEigen::new(&c).map(|v| v.max(T::min_positive_value()).ln());
        l.congruence(&p.sqrt)
    }

    fn zero_tangent(&self, _p: &SpdPoint<T>) -> Matrix<T> {
        Matrix::zeros(self.n)
    }

    fn membership_residual(&self, p: &SpdPoint<T>) -> T {
        let neg = (-p.eigenvalues[0]).max(T::zero());
        p.mat.asymmetry() + neg
    }

    fn tangency_residual(&self, _p: &SpdPoint<T>, x: &Matrix<T>) -> T {
        x.asymmetry()
    }

    fn coord_distance(&self, p: &SpdPoint<T>, q: &SpdPoint<T>) -> T {
        p.mat.max_abs_diff(&q.mat)
    }

    /// `exp_I(X)` with `X` a random symmetric direction of length at most 2.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SpdPoint<T> {
        let g = self.gaussian_symmetric::<T, R>(rng);
        let ng = g.frobenius_norm();
        let u: f64 = rng.random::<f64>();
        let x = if ng > T::zero() { g.scaled(T::c(2.0 * u) / ng) } else { g };
        self.exp(&self.identity(), &x).expect("bounded tangent stays SPD")
    }

    fn random_tangent<R: Rng + ?Sized>(&self, p: &SpdPoint<T>, rng: &mut R) -> Matrix<T> {
        self.gaussian_symmetric::<T, R>(rng).congruence(&p.sqrt)
    }
}
