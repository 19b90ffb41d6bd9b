//! Flat `R^n`, the zero-curvature reference geometry.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::{CurvatureBounds, Geometry};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("euclidean dimension must be positive".into()));
        }
        Ok(Self { n })
    }
}

impl<T: Real> Geometry<T> for Euclidean {
    type Point = Vec<T>;
    type Tangent = Vec<T>;

    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn manifold_dim(&self) -> usize {
        self.n
    }

    fn curvature(&self) -> CurvatureBounds<T> {
        CurvatureBounds::flat()
    }

    fn inner(&self, _p: &Vec<T>, x: &Vec<T>, y: &Vec<T>) -> T {
        assert_eq!(x.len(), y.len(), "dimension mismatch");
        x.iter().zip(y).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }

    fn dist(&self, p: &Vec<T>, q: &Vec<T>) -> T {
        assert_eq!(p.len(), q.len(), "dimension mismatch");
        p.iter().zip(q).fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b)).sqrt()
    }

    fn exp(&self, p: &Vec<T>, x: &Vec<T>) -> Result<Vec<T>> {
        if x.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), found: x.len() });
        }
        Ok(p.iter().zip(x).map(|(&a, &b)| a + b).collect())
    }

    fn log(&self, p: &Vec<T>, q: &Vec<T>) -> Vec<T> {
        assert_eq!(p.len(), q.len(), "dimension mismatch");
        q.iter().zip(p).map(|(&a, &b)| a - b).collect()
    }

    fn zero_tangent(&self, _p: &Vec<T>) -> Vec<T> {
        vec![T::zero(); self.n]
    }

    fn membership_residual(&self, _p: &Vec<T>) -> T {
        T::zero()
    }

    fn tangency_residual(&self, _p: &Vec<T>, _x: &Vec<T>) -> T {
        T::zero()
    }

    fn coord_distance(&self, p: &Vec<T>, q: &Vec<T>) -> T {
        p.iter().zip(q).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.n).map(|_| T::c(rng.sample::<f64, _>(StandardNormal))).collect()
    }

    fn random_tangent<R: Rng + ?Sized>(&self, _p: &Vec<T>, rng: &mut R) -> Vec<T> {
        (0..self.n).map(|_| T::c(rng.sample::<f64, _>(StandardNormal))).collect()
    }
}
