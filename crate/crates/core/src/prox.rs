//! Proximal maps used by the solvers: distance to a point, squared distance
//! to a point, projection onto a geodesic ball, and the `l1` norm on the
//! hyperboloid (computed through a scalar fixed-point iteration).

use crate::error::{Error, Result};
use crate::hyperbolic::{minkowski_inner, Hyperbolic, HyperbolicPoint};
use crate::manifold::{geodesic, Geometry};
use crate::scalar::{acosh_1p, sign0, sinhc, Real};

/// Prox of `tau * dist(., anchor)` with parameter `lambda`: move from `p`
/// toward `anchor` by arclength `min(lambda * tau, dist(p, anchor))`.
pub fn prox_distance<T: Real, M: Geometry<T>>(
    geom: &M,
    anchor: &M::Point,
    tau: T,
    lambda: T,
    p: &M::Point,
) -> Result<M::Point> {
    let d = geom.dist(p, anchor);
    let step = lambda * tau;
    if d <= step {
        return Ok(anchor.clone());
    }
    geodesic(geom, p, anchor, step / d)
}

/// Prox of `weight / 2 * dist^2(., q)` with parameter `lambda`.
pub fn prox_sq_distance<T: Real, M: Geometry<T>>(
    geom: &M,
    q: &M::Point,
    weight: T,
    lambda: T,
    p: &M::Point,
) -> Result<M::Point> {
    let lw = lambda * weight;
    let t = if lw.is_infinite() { T::one() } else { lw / (T::one() + lw) };
    geodesic(geom, p, q, t)
}

/// Metric projection onto the closed ball `B(center, radius)`.
pub fn project_ball<T: Real, M: Geometry<T>>(
    geom: &M,
    center: &M::Point,
    radius: T,
    p: &M::Point,
) -> Result<M::Point> {
    let d = geom.dist(center, p);
    if d <= radius {
        return Ok(p.clone());
    }
    geodesic(geom, center, p, radius / d)
}

/// Soft-thresholds the spatial coordinates of `x` by `t` and raises the last
/// coordinate by `t`. Zero coordinates stay zero.
pub fn l1_shrink_vector<T: Real>(x: &HyperbolicPoint<T>, t: T) -> Vec<T> {
    let c = x.coords();
    let n = c.len() - 1;
    let mut out = Vec::with_capacity(c.len());
    for &xi in &c[..n] {
        out.push(sign0(xi) * (xi.abs() - t).max(T::zero()));
    }
    out.push(c[n] + t);
    out
}

/// Rescales `v` onto the hyperboloid.
pub fn l1_normalize<T: Real>(v: Vec<T>) -> Result<HyperbolicPoint<T>> {
    HyperbolicPoint::normalized(v)
}

/// `mu_eff * sqrt(<x,y>^2 - 1) / acosh(-<x,y>)`, equal to `mu_eff` at `y = x`.
pub fn l1_sigma<T: Real>(x: &HyperbolicPoint<T>, y: &HyperbolicPoint<T>, mu_eff: T) -> T {
    let d: Vec<T> = x.coords().iter().zip(y.coords()).map(|(&a, &b)| a - b).collect();
    let delta = (minkowski_inner(&d, &d) * T::c(0.5)).max(T::zero());
    mu_eff * sinhc(acosh_1p(delta))
}

/// Outcome of the hyperbolic `l1` prox.
#[derive(Debug, Clone, PartialEq)]
pub struct L1ProxResult<T> {
    pub point: HyperbolicPoint<T>,
    pub t_star: T,
    pub iterations: usize,
    pub converged: bool,
    /// Fixed-point iterates `t_0, t_1, ...`.
    pub history: Vec<T>,
}

/// `argmin_y ||y||_1 + dist^2(x, y) / (2 mu_eff)` on `H^n`.
///
/// Iterates `t <- sigma_x(p_x(t))` from `t_0 = mu_eff` until successive
/// iterates differ by less than `tol` or `max_iter` applications were made,
/// then returns `p_x(t)`. Hitting the cap is reported through `converged`.
pub fn prox_l1_hyperbolic<T: Real>(
    x: &HyperbolicPoint<T>,
    mu_eff: T,
    tol: T,
    max_iter: usize,
) -> Result<L1ProxResult<T>> {
    if !(mu_eff >= T::zero()) {
        return Err(Error::Domain(format!("l1 prox weight must be nonnegative, got {mu_eff}")));
    }
    if !(tol > T::zero()) || max_iter == 0 {
        return Err(Error::Domain("l1 prox needs tol > 0 and max_iter >= 1".into()));
    }
    let mut t = mu_eff;
    let mut history = vec![t];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let y = l1_normalize(l1_shrink_vector(x, t))?;
        let next = l1_sigma(x, &y, mu_eff);
        iterations += 1;
        history.push(next);
        let change = (next - t).abs();
        t = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    let point = l1_normalize(l1_shrink_vector(x, t))?;
    Ok(L1ProxResult { point, t_star: t, iterations, converged, history })
}

/// Norm of `log_y(x) - mu_eff * proj_y(J v)` where `v` is the subgradient
/// certificate built from `y`: `v_i = sign(y_i)` on the support and
/// `x_i / t_star` off it. Zero exactly when `y` solves the prox problem.
/// Also returns the largest `|v_i|` off the support, which must not exceed 1.
pub fn l1_prox_stationarity<T: Real>(
    geom: &Hyperbolic,
    x: &HyperbolicPoint<T>,
    y: &HyperbolicPoint<T>,
    t_star: T,
    mu_eff: T,
) -> (T, T) {
    let yc = y.coords();
    let xc = x.coords();
    let n = yc.len() - 1;
    let mut jv = Vec::with_capacity(n + 1);
    let mut worst = T::zero();
    for i in 0..n {
        if yc[i] != T::zero() {
            jv.push(sign0(yc[i]));
        } else if t_star > T::zero() {
            let v = xc[i] / t_star;
            worst = worst.max(v.abs());
            jv.push(v);
        } else {
            jv.push(T::zero());
        }
    }
    // J flips the time-like coordinate; sign(y_{n+1}) = 1.
    jv.push(-T::one());
    let proj = geom.project_tangent(y, &jv);
    let lg = geom.log(y, x);
    let r: Vec<T> = lg.iter().zip(&proj).map(|(&a, &b)| a - mu_eff * b).collect();
    (geom.norm(y, &r), worst)
}

/// `||y||_1 + dist^2(x, y) / (2 mu_eff)`, the objective the `l1` prox minimizes.
pub fn l1_prox_objective<T: Real>(
    geom: &Hyperbolic,
    x: &HyperbolicPoint<T>,
    y: &HyperbolicPoint<T>,
    mu_eff: T,
) -> T {
    let d = geom.dist(x, y);
    l1_norm(y) + d * d / (T::c(2.0) * mu_eff)
}

/// Sum of absolute coordinates, time-like coordinate included.
pub fn l1_norm<T: Real>(y: &HyperbolicPoint<T>) -> T {
    y.coords().iter().fold(T::zero(), |s, &c| s + c.abs())
}
