//! Poincaré ball formulas on raw tensors.
//!
//! `c` is the absolute curvature as a scalar tensor (so it can be learned) and
//! `dim` is the axis holding point coordinates. Every function that returns
//! a point projects it back inside the ball.

use crate::error::Result;
use crate::tensor::Tensor;

/// Points satisfy `√c‖x‖ ≤ 1 − BALL_EPS`.
pub const BALL_EPS: f64 = 1e-5;

/// Floor applied to norms that end up in a denominator.
pub const MIN_NORM: f64 = 1e-15;

/// Projected points land this fraction inside the boundary radius so that
/// projecting again is an exact no-op.
const PROJECT_SHRINK: f64 = 1.0 - 4.0 * f64::EPSILON;

fn keep(x: &Tensor, dim: usize) -> Result<Tensor> {
    x.norm2(&[dim as isize], true)
}

fn safe_norm(x: &Tensor, dim: usize) -> Result<Tensor> {
    Ok(keep(x, dim)?.clamp_min(MIN_NORM))
}

/// Radial rescale of points with `√c‖x‖ > 1 − BALL_EPS` onto that radius.
pub fn project(x: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let r = keep(x, dim)?.mul(&c.sqrt())?;
    let limit = 1.0 - BALL_EPS;
    let target = limit * PROJECT_SHRINK;
    let factor = r.map(
        "ball_project",
        move |r| if r > limit { target / r } else { 1.0 },
        move |r, _| if r > limit { -target / (r * r) } else { 0.0 },
    );
    x.mul(&factor)
}

/// Möbius addition without the final projection.
pub fn mobius_add_unprojected(x: &Tensor, y: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let x2 = x.sq_norm(dim)?;
    let y2 = y.sq_norm(dim)?;
    let xy = x.dot(y, dim)?;
    let two_c_xy = xy.mul(c)?.mul_scalar(2.0);
    // (1 + 2c<x,y> + c|y|²) x + (1 - c|x|²) y
    let coef_x = two_c_xy.add(&y2.mul(c)?)?.add_scalar(1.0);
    let coef_y = x2.mul(c)?.rsub_scalar(1.0);
    let num = x.mul(&coef_x)?.add(&y.mul(&coef_y)?)?;
    // 1 + 2c<x,y> + c²|x|²|y|²
    let denom = two_c_xy
        .add(&x2.mul(&y2)?.mul(&c.square())?)?
        .add_scalar(1.0)
        .clamp_min(MIN_NORM);
    num.div(&denom)
}

pub fn mobius_add(x: &Tensor, y: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    project(&mobius_add_unprojected(x, y, c, dim)?, c, dim)
}

/// `λₓ = 2 / (1 − c‖x‖²)`, kept along `dim`.
pub fn conformal_factor(x: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let denom = x.sq_norm(dim)?.mul(c)?.rsub_scalar(1.0).clamp_min(MIN_NORM);
    Tensor::scalar(2.0).div(&denom)
}

pub fn expmap0(v: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let scn = safe_norm(v, dim)?.mul(&c.sqrt())?;
    let y = v.mul(&scn.tanh().div(&scn)?)?;
    project(&y, c, dim)
}

pub fn logmap0(y: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let scn = safe_norm(y, dim)?.mul(&c.sqrt())?;
    y.mul(&scn.artanh().div(&scn)?)
}

/// `expₓ(v) = x ⊕ tanh(√c λₓ‖v‖/2) v/(√c‖v‖)`
pub fn expmap(x: &Tensor, v: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let sqrt_c = c.sqrt();
    let n = safe_norm(v, dim)?;
    let lam = conformal_factor(x, c, dim)?;
    let arg = sqrt_c.mul(&lam)?.mul(&n)?.mul_scalar(0.5);
    let second = v.mul(&arg.tanh().div(&sqrt_c.mul(&n)?)?)?;
    mobius_add(x, &second, c, dim)
}

/// `logₓ(y) = 2/(√c λₓ) · artanh(√c‖−x⊕y‖) · (−x⊕y)/‖−x⊕y‖`
pub fn logmap(x: &Tensor, y: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let sqrt_c = c.sqrt();
    let sub = mobius_add_unprojected(&x.neg(), y, c, dim)?;
    let n = safe_norm(&sub, dim)?;
    let lam = conformal_factor(x, c, dim)?;
    let scale = sqrt_c
        .mul(&n)?
        .artanh()
        .mul_scalar(2.0)
        .div(&sqrt_c.mul(&lam)?.mul(&n)?)?;
    sub.mul(&scale)
}

/// Geodesic distance; `dim` is kept when `keepdim`.
pub fn dist(x: &Tensor, y: &Tensor, c: &Tensor, dim: usize, keepdim: bool) -> Result<Tensor> {
    let sqrt_c = c.sqrt();
    let sub = mobius_add_unprojected(&x.neg(), y, c, dim)?;
    let n = sub.norm2(&[dim as isize], keepdim)?;
    n.mul(&sqrt_c)?.artanh().mul_scalar(2.0).div(&sqrt_c)
}

/// `gyr[u,v]w` in closed form. Agrees with `−(u⊕v) ⊕ (u ⊕ (v ⊕ w))` and is
/// linear in `w`, so `w` need not lie in the ball.
pub fn gyration(u: &Tensor, v: &Tensor, w: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let u2 = u.sq_norm(dim)?;
    let v2 = v.sq_norm(dim)?;
    let uv = u.dot(v, dim)?;
    let uw = u.dot(w, dim)?;
    let vw = v.dot(w, dim)?;
    let c2 = c.square();
    // a = -c²<u,w>|v|² + c<v,w> + 2c²<u,v><v,w>
    let a = uw
        .mul(&v2)?
        .mul(&c2)?
        .neg()
        .add(&vw.mul(c)?)?
        .add(&uv.mul(&vw)?.mul(&c2)?.mul_scalar(2.0))?;
    // b = -c²<v,w>|u|² - c<u,w>
    let b = vw.mul(&u2)?.mul(&c2)?.neg().sub(&uw.mul(c)?)?;
    // d = 1 + 2c<u,v> + c²|u|²|v|²
    let d = uv
        .mul(c)?
        .mul_scalar(2.0)
        .add(&u2.mul(&v2)?.mul(&c2)?)?
        .add_scalar(1.0)
        .clamp_min(MIN_NORM);
    let corr = u.mul(&a)?.add(&v.mul(&b)?)?.mul_scalar(2.0).div(&d)?;
    w.add(&corr)
}

/// Parallel transport of `v` from `Tₓ` to `T_y`: `(λₓ/λ_y)·gyr[y, −x]v`.
pub fn transport(x: &Tensor, y: &Tensor, v: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let ratio = conformal_factor(x, c, dim)?.div(&conformal_factor(y, c, dim)?)?;
    gyration(y, &x.neg(), v, c, dim)?.mul(&ratio)
}

/// Euclidean gradient to Riemannian gradient: `((1 − c‖x‖²)²/4)·g`.
pub fn egrad_to_rgrad(x: &Tensor, g: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let factor = x.sq_norm(dim)?.mul(c)?.rsub_scalar(1.0).square().mul_scalar(0.25);
    g.mul(&factor)
}

/// `⟨h, h⟩ₓ = (λₓ/2)²‖h‖²`, kept along `dim`.
pub fn inner_sq(x: &Tensor, h: &Tensor, c: &Tensor, dim: usize) -> Result<Tensor> {
    let half_lam = conformal_factor(x, c, dim)?.mul_scalar(0.5);
    h.sq_norm(dim)?.mul(&half_lam.square())
}

/// Class scores against gyroplanes `(p_k, a_k)`.
///
/// `x` is `N×D`, `p` and `a` are `K×D`; the result is `N×K`.
pub fn mlr_logits(x: &Tensor, p: &Tensor, a: &Tensor, c: &Tensor) -> Result<Tensor> {
    let (n, d) = (x.shape()[0], x.shape()[1]);
    let k = p.shape()[0];
    let sqrt_c = c.sqrt();
    let x3 = x.reshape(&[n, 1, d])?;
    let p3 = p.reshape(&[1, k, d])?;
    let a3 = a.reshape(&[1, k, d])?;
    let sub = mobius_add_unprojected(&p3.neg(), &x3, c, 2)?;
    let inner = sub.mul(&a3)?.sum(&[2], false)?;
    let sub2 = sub.square().sum(&[2], false)?;
    let a_norm = a.norm2(&[1], false)?.reshape(&[1, k])?;
    let lam_p = conformal_factor(p, c, 1)?.reshape(&[1, k])?;
    let denom = sub2.mul(c)?.rsub_scalar(1.0).clamp_min(MIN_NORM).mul(&a_norm)?;
    let arg = inner.mul(&sqrt_c)?.mul_scalar(2.0).div(&denom)?;
    lam_p.mul(&a_norm)?.div(&sqrt_c)?.mul(&arg.asinh())
}

/// Convergence settings for the Karcher iteration.
#[derive(Debug, Clone, Copy)]
pub struct FrechetOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

/// Weighted Fréchet mean over `batch_axis` by fixed-point Karcher iteration
/// `μ ← exp_μ(Σ wᵢ log_μ(xᵢ) / Σ wᵢ)` starting from the first point. The
/// result keeps `batch_axis` with extent 1. Gradients flow through every
/// executed iteration.
pub fn frechet_mean(
    x: &Tensor,
    batch_axis: usize,
    dim: usize,
    weights: Option<&Tensor>,
    c: &Tensor,
    opts: FrechetOptions,
) -> Result<Tensor> {
    let mut mu = x.slice(batch_axis, 0, 1)?;
    for _ in 0..opts.max_iter {
        let v = logmap(&mu, x, c, dim)?;
        let step = weighted_mean(&v, batch_axis, weights)?;
        let size = step.norm2(&[dim as isize], true)?;
        let largest = size.data().iter().fold(0.0f64, |m, &s| m.max(s));
        mu = expmap(&mu, &step, c, dim)?;
        if largest < opts.tol {
            break;
        }
    }
    Ok(mu)
}

/// Mean along `axis` (kept), optionally weighted by a vector of that extent.
pub(crate) fn weighted_mean(v: &Tensor, axis: usize, weights: Option<&Tensor>) -> Result<Tensor> {
    match weights {
        None => v.mean(&[axis as isize], true),
        Some(w) => {
            let mut shape = vec![1; v.rank()];
            shape[axis] = v.shape()[axis];
            let w = w.reshape(&shape)?;
            v.mul(&w)?.sum(&[axis as isize], true)?.div(&w.sum_all())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Tensor {
        Tensor::scalar(1.0)
    }

    fn v(x: &[f64]) -> Tensor {
        Tensor::vector(x)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn collinear_addition() {
        // (x + y) / (1 + c x y) = 0.7 / 1.12
        let z = mobius_add(&v(&[0.3, 0.0]), &v(&[0.4, 0.0]), &c1(), 0).unwrap();
        assert!(close(&z.to_vec(), &[0.625, 0.0], 1e-15));
    }

    #[test]
    fn identity_and_inverse() {
        let y = v(&[0.2, -0.5, 0.1]);
        let z = mobius_add(&v(&[0.0, 0.0, 0.0]), &y, &c1(), 0).unwrap();
        assert!(close(&z.to_vec(), &y.to_vec(), 1e-15));
        let z = mobius_add(&y.neg(), &y, &c1(), 0).unwrap();
        assert!(close(&z.to_vec(), &[0.0; 3], 1e-15));
    }

    #[test]
    fn projection_examples() {
        let p = project(&v(&[2.0, 0.0]), &c1(), 0).unwrap().to_vec();
        assert!((p[0] - 0.99999).abs() < 1e-12 && p[1] == 0.0);
        let inside = v(&[0.3, -0.1]);
        assert_eq!(project(&inside, &c1(), 0).unwrap().to_vec(), inside.to_vec());
        assert_eq!(project(&v(&[0.0, 0.0]), &c1(), 0).unwrap().to_vec(), vec![0.0, 0.0]);
        let once = project(&v(&[0.9999999, 0.0]), &c1(), 0).unwrap();
        assert!((once.to_vec()[0] - (1.0 - 1e-5)).abs() < 1e-12);
        let twice = project(&once, &c1(), 0).unwrap();
        assert_eq!(once.to_vec(), twice.to_vec());
    }

    #[test]
    fn projection_respects_curvature() {
        let c = Tensor::scalar(4.0);
        let p = project(&v(&[3.0, 4.0]), &c, 0).unwrap().to_vec();
        let r = 2.0 * (p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!(r <= 1.0 - BALL_EPS && r > 1.0 - BALL_EPS - 1e-12);
    }

    #[test]
    fn conformal_factor_values() {
        let lam = conformal_factor(&v(&[0.0, 0.0]), &Tensor::scalar(0.7), 0).unwrap();
        assert_eq!(lam.to_vec(), vec![2.0]);
        let lam = conformal_factor(&v(&[0.5, 0.0]), &c1(), 0).unwrap();
        assert!((lam.to_vec()[0] - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exp_and_log_at_origin() {
        let y = expmap0(&v(&[1.0, 0.0]), &c1(), 0).unwrap();
        assert!(close(&y.to_vec(), &[1f64.tanh(), 0.0], 1e-15));
        let y = expmap(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), &c1(), 0).unwrap();
        assert!(close(&y.to_vec(), &[0.761_594_155_955_764_9, 0.0], 1e-15));
        let t = logmap0(&v(&[0.5, 0.0]), &c1(), 0).unwrap();
        assert!(close(&t.to_vec(), &[0.549_306_144_334_054_8, 0.0], 1e-15));
        let t = logmap(&v(&[0.0, 0.0]), &v(&[0.5, 0.0]), &c1(), 0).unwrap();
        assert!(close(&t.to_vec(), &[0.549_306_144_334_054_8, 0.0], 1e-15));
    }

    #[test]
    fn zero_conventions() {
        let z = v(&[0.0, 0.0]);
        assert_eq!(expmap0(&z, &c1(), 0).unwrap().to_vec(), vec![0.0, 0.0]);
        assert_eq!(logmap0(&z, &c1(), 0).unwrap().to_vec(), vec![0.0, 0.0]);
        let x = v(&[0.3, 0.2]);
        assert!(close(&expmap(&x, &z, &c1(), 0).unwrap().to_vec(), &x.to_vec(), 1e-15));
        assert!(close(&logmap(&x, &x, &c1(), 0).unwrap().to_vec(), &[0.0, 0.0], 1e-15));
    }

    #[test]
    fn distance_examples() {
        let d = dist(&v(&[0.0, 0.0]), &v(&[0.5, 0.0]), &c1(), 0, false).unwrap();
        assert!((d.item().unwrap() - 1.098_612_288_668_109_6).abs() < 1e-14);
        let x = v(&[0.1, -0.4]);
        assert_eq!(dist(&x, &x, &c1(), 0, false).unwrap().item().unwrap(), 0.0);
    }

    #[test]
    fn gyration_matches_its_definition() {
        let c = Tensor::scalar(1.3);
        let u = v(&[0.2, -0.3, 0.1]);
        let w2 = v(&[0.3, 0.2, -0.4]);
        let w = v(&[-0.1, 0.25, 0.3]);
        let lhs = gyration(&u, &w2, &w, &c, 0).unwrap();
        let uv = mobius_add_unprojected(&u, &w2, &c, 0).unwrap();
        let vw = mobius_add_unprojected(&w2, &w, &c, 0).unwrap();
        let inner = mobius_add_unprojected(&u, &vw, &c, 0).unwrap();
        let rhs = mobius_add_unprojected(&uv.neg(), &inner, &c, 0).unwrap();
        assert!(close(&lhs.to_vec(), &rhs.to_vec(), 1e-14), "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn gyration_trivial_cases() {
        let c = c1();
        let w = v(&[0.7, -2.0]);
        let u = v(&[0.3, 0.4]);
        let g = gyration(&v(&[0.0, 0.0]), &u, &w, &c, 0).unwrap();
        assert!(close(&g.to_vec(), &w.to_vec(), 1e-15));
        let g = gyration(&u, &u.neg(), &w, &c, 0).unwrap();
        assert!(close(&g.to_vec(), &w.to_vec(), 1e-15));
    }

    #[test]
    fn transport_to_self_is_identity() {
        let x = v(&[0.3, -0.2]);
        let t = v(&[1.0, 2.0]);
        let pt = transport(&x, &x, &t, &c1(), 0).unwrap();
        assert!(close(&pt.to_vec(), &t.to_vec(), 1e-14));
    }

    #[test]
    fn rgrad_scaling() {
        let g = v(&[1.0, -2.0]);
        let r = egrad_to_rgrad(&v(&[0.0, 0.0]), &g, &c1(), 0).unwrap();
        assert_eq!(r.to_vec(), vec![0.25, -0.5]);
    }

    #[test]
    fn frechet_mean_midpoint() {
        let pts = Tensor::matrix(&[&[0.0, 0.0], &[0.5, 0.0]]).unwrap();
        let mu = frechet_mean(&pts, 0, 1, None, &c1(), FrechetOptions::default()).unwrap();
        let expected = 2.0 - 3f64.sqrt();
        assert!(close(&mu.to_vec(), &[expected, 0.0], 1e-9), "{mu:?}");
    }
}
