//! Euclidean space and the Poincaré ball behind one interface.
//!
//! A [`Manifold`] is a shared handle; identity is object identity, so two
//! balls with the same curvature value are still different manifolds.
//! Typed operations check that every input lives on `self` with aligned
//! manifold dimensions before computing anything.

pub mod poincare;
pub mod special;

use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::tensors::{check_compatible, ManifoldTensor, OnManifold, TangentTensor};

pub use poincare::{FrechetOptions, BALL_EPS, MIN_NORM};

static NEXT_MANIFOLD: AtomicUsize = AtomicUsize::new(0);

/// Absolute curvature `c = softplus(raw) > 0` of a Poincaré ball.
#[derive(Clone)]
pub struct Curvature {
    raw: Tensor,
    learnable: bool,
}

impl Curvature {
    /// Raw parameter initialized so that `softplus(raw) = c`.
    pub fn new(c: f64, learnable: bool) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("curvature must be positive, got {c}")));
        }
        Ok(Self::from_raw(inverse_softplus(c), learnable))
    }

    pub fn from_raw(raw: f64, learnable: bool) -> Self {
        let t = Tensor::scalar(raw);
        let raw = if learnable { t.requires_grad_leaf() } else { t };
        Self { raw, learnable }
    }

    pub fn learnable(&self) -> bool {
        self.learnable
    }

    /// The raw parameter tensor; it requires a gradient only when learnable.
    pub fn raw(&self) -> &Tensor {
        &self.raw
    }

    /// `c` as a graph scalar.
    pub fn value(&self) -> Tensor {
        self.raw.softplus()
    }

    pub fn value_f64(&self) -> f64 {
        crate::tensor::softplus(self.raw.data()[0])
    }
}

/// `ln(e^c − 1)`, the raw value whose softplus is `c`.
pub fn inverse_softplus(c: f64) -> f64 {
    if c > 30.0 {
        c + (-(-c).exp_m1()).ln()
    } else {
        c.exp_m1().ln()
    }
}

pub enum ManifoldKind {
    Euclidean,
    PoincareBall(Curvature),
}

struct ManifoldInner {
    id: usize,
    kind: ManifoldKind,
}

#[derive(Clone)]
pub struct Manifold(Rc<ManifoldInner>);

impl Manifold {
    fn with_kind(kind: ManifoldKind) -> Self {
        Manifold(Rc::new(ManifoldInner {
            id: NEXT_MANIFOLD.fetch_add(1, Ordering::Relaxed),
            kind,
        }))
    }

    pub fn euclidean() -> Self {
        Self::with_kind(ManifoldKind::Euclidean)
    }

    pub fn poincare_ball(curvature: Curvature) -> Self {
        Self::with_kind(ManifoldKind::PoincareBall(curvature))
    }

    /// Ball with fixed curvature `c`.
    pub fn ball(c: f64) -> Result<Self> {
        Ok(Self::poincare_ball(Curvature::new(c, false)?))
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.0.kind
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.0.kind, ManifoldKind::Euclidean)
    }

    pub fn curvature(&self) -> Option<&Curvature> {
        match &self.0.kind {
            ManifoldKind::Euclidean => None,
            ManifoldKind::PoincareBall(c) => Some(c),
        }
    }

    pub fn same_as(&self, other: &Manifold) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    /// Formulas with the curvature resolved for one forward pass.
    pub fn geometry(&self) -> Geometry {
        match &self.0.kind {
            ManifoldKind::Euclidean => Geometry::Flat,
            ManifoldKind::PoincareBall(c) => Geometry::Ball(c.value()),
        }
    }

    /// Same as [`geometry`](Self::geometry) but cut from the graph, for
    /// optimizer updates.
    pub fn geometry_detached(&self) -> Geometry {
        match &self.0.kind {
            ManifoldKind::Euclidean => Geometry::Flat,
            ManifoldKind::PoincareBall(c) => Geometry::Ball(Tensor::scalar(c.value_f64())),
        }
    }

    pub(crate) fn expect<T: OnManifold>(&self, x: &T) -> Result<()> {
        if self.same_as(x.manifold()) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch {
                left: self.to_string(),
                right: x.manifold().to_string(),
            })
        }
    }

    /// Projects raw coordinates onto the manifold along `dim`.
    pub fn project_tensor(&self, x: &Tensor, dim: usize) -> Result<Tensor> {
        self.geometry().project(x, dim)
    }

    pub fn mobius_add(&self, x: &ManifoldTensor, y: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.expect(x)?;
        check_compatible(x, y)?;
        let dim = out_dim(x, y);
        let (xt, yt) = same_rank(x.tensor(), y.tensor())?;
        let out = self.geometry().mobius_add(&xt, &yt, dim)?;
        Ok(ManifoldTensor::trusted(out, self.clone(), dim))
    }

    /// `gyr[u,v]w`; `w` is any vector with the manifold dimension of `u`.
    pub fn gyration(&self, u: &ManifoldTensor, v: &ManifoldTensor, w: &TangentTensor) -> Result<TangentTensor> {
        self.expect(u)?;
        check_compatible(u, v)?;
        check_compatible(u, w)?;
        let dim = out_dim(u, w);
        let rank = u.tensor().rank().max(v.tensor().rank()).max(w.tensor().rank());
        let (ut, vt, wt) = (lift(u.tensor(), rank)?, lift(v.tensor(), rank)?, lift(w.tensor(), rank)?);
        let out = self.geometry().gyration(&ut, &vt, &wt, dim)?;
        Ok(TangentTensor::trusted(out, self.clone(), None, dim))
    }

    /// `λₓ`, kept along the manifold dimension.
    pub fn conformal_factor(&self, x: &ManifoldTensor) -> Result<Tensor> {
        self.expect(x)?;
        self.geometry().conformal_factor(x.tensor(), x.man_dim())
    }

    /// Exponential map at the base points of `v` (the origin when absent).
    pub fn expmap(&self, v: &TangentTensor) -> Result<ManifoldTensor> {
        self.expect(v)?;
        let g = self.geometry();
        let (out, dim) = match v.base() {
            None => (g.expmap0(v.tensor(), v.man_dim())?, v.man_dim()),
            Some(base) => {
                let dim = out_dim(base, v);
                let (bt, vt) = same_rank(base.tensor(), v.tensor())?;
                (g.expmap(&bt, &vt, dim)?, dim)
            }
        };
        Ok(ManifoldTensor::trusted(out, self.clone(), dim))
    }

    /// Logarithmic map of `y` at `x` (the origin when `None`).
    pub fn logmap(&self, x: Option<&ManifoldTensor>, y: &ManifoldTensor) -> Result<TangentTensor> {
        self.expect(y)?;
        let g = self.geometry();
        match x {
            None => {
                let out = g.logmap0(y.tensor(), y.man_dim())?;
                Ok(TangentTensor::trusted(out, self.clone(), None, y.man_dim()))
            }
            Some(x) => {
                check_compatible(x, y)?;
                let dim = out_dim(x, y);
                let (xt, yt) = same_rank(x.tensor(), y.tensor())?;
                let out = g.logmap(&xt, &yt, dim)?;
                let base = broadcast_base(x, &out)?;
                Ok(TangentTensor::trusted(out, self.clone(), Some(base), dim))
            }
        }
    }

    /// Geodesic distance; the manifold dimension is reduced away.
    pub fn dist(&self, x: &ManifoldTensor, y: &ManifoldTensor) -> Result<Tensor> {
        self.expect(x)?;
        check_compatible(x, y)?;
        let (xt, yt) = same_rank(x.tensor(), y.tensor())?;
        self.geometry().dist(&xt, &yt, out_dim(x, y), false)
    }

    /// Parallel transport of `v` from its base (origin when absent) to `y`.
    pub fn transp(&self, v: &TangentTensor, y: &ManifoldTensor) -> Result<TangentTensor> {
        self.expect(v)?;
        check_compatible(v, y)?;
        let dim = out_dim(v, y);
        let g = self.geometry();
        let from = match v.base() {
            Some(b) => b.tensor().clone(),
            None => Tensor::zeros(&vec![1; v.tensor().rank()]),
        };
        let rank = v.tensor().rank().max(y.tensor().rank());
        let out = g.transport(&lift(&from, rank)?, &lift(y.tensor(), rank)?, &lift(v.tensor(), rank)?, dim)?;
        let base = broadcast_base(y, &out)?;
        Ok(TangentTensor::trusted(out, self.clone(), Some(base), dim))
    }

    /// Fréchet mean over `batch_dim`; the batch axis is removed unless
    /// `keepdim`.
    pub fn frechet_mean(
        &self,
        x: &ManifoldTensor,
        batch_dim: usize,
        weights: Option<&Tensor>,
        keepdim: bool,
    ) -> Result<ManifoldTensor> {
        self.frechet_mean_with(x, batch_dim, weights, keepdim, FrechetOptions::default())
    }

    pub fn frechet_mean_with(
        &self,
        x: &ManifoldTensor,
        batch_dim: usize,
        weights: Option<&Tensor>,
        keepdim: bool,
        opts: FrechetOptions,
    ) -> Result<ManifoldTensor> {
        self.expect(x)?;
        let rank = x.tensor().rank();
        if batch_dim >= rank || batch_dim == x.man_dim() {
            return Err(Error::dimension(format!(
                "batch axis {batch_dim} is invalid for rank {rank} with manifold dimension {}",
                x.man_dim()
            )));
        }
        let n = x.tensor().shape()[batch_dim];
        if n == 0 {
            return Err(Error::contract("Fréchet mean of an empty set"));
        }
        if let Some(w) = weights {
            let wd = w.data();
            if wd.len() != n {
                return Err(Error::shape(format!("{} weights for {n} points", wd.len())));
            }
            if wd.iter().any(|&v| v < 0.0 || !v.is_finite()) || wd.iter().all(|&v| v == 0.0) {
                return Err(Error::contract("weights must be nonnegative and not all zero"));
            }
        }
        let mu = self
            .geometry()
            .frechet_mean(x.tensor(), batch_dim, x.man_dim(), weights, opts)?;
        if keepdim {
            return Ok(ManifoldTensor::trusted(mu, self.clone(), x.man_dim()));
        }
        let mut shape = mu.shape().to_vec();
        shape.remove(batch_dim);
        let dim = if x.man_dim() > batch_dim { x.man_dim() - 1 } else { x.man_dim() };
        Ok(ManifoldTensor::trusted(mu.reshape(&shape)?, self.clone(), dim))
    }

    /// `(1/n) Σ d(xᵢ, μ)²` over `batch_dim`; `mu` must broadcast against `x`.
    /// The manifold and batch axes are both reduced away.
    pub fn frechet_variance(&self, x: &ManifoldTensor, mu: &ManifoldTensor, batch_dim: usize) -> Result<Tensor> {
        self.expect(x)?;
        check_compatible(x, mu)?;
        let dim = out_dim(x, mu);
        if batch_dim == dim {
            return Err(Error::dimension("batch axis equals the manifold dimension"));
        }
        let (xt, mt) = same_rank(x.tensor(), mu.tensor())?;
        let d = self.geometry().dist(&xt, &mt, dim, false)?;
        let axis = if batch_dim > dim { batch_dim - 1 } else { batch_dim };
        d.square().mean(&[axis as isize], false)
    }

    /// `M ⊗ x = exp₀(M log₀(x))`; `w` is `out × in`.
    pub fn mobius_matvec(&self, w: &Tensor, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.expect(x)?;
        let dim = x.man_dim();
        let t = x.tensor();
        if w.rank() != 2 || w.shape()[1] != t.shape()[dim] {
            return Err(Error::shape(format!(
                "matrix {:?} cannot act on points of dimension {}",
                w.shape(),
                t.shape()[dim]
            )));
        }
        let last = t.rank() - 1;
        let moved = t.move_axis(dim, last)?;
        let lead: Vec<usize> = moved.shape()[..last].to_vec();
        let rows: usize = lead.iter().product();
        let flat = moved.reshape(&[rows, w.shape()[1]])?;
        let y = self.geometry().matvec_rows(w, &flat)?;
        let mut shape = lead;
        shape.push(w.shape()[0]);
        let y = y.reshape(&shape)?.move_axis(last, dim)?;
        Ok(ManifoldTensor::trusted(y, self.clone(), dim))
    }

    /// Scores of `N×D` points against `K` gyroplanes with points `p` (`K×D`)
    /// and normals `a` (`K×D`).
    pub fn mlr_logits(&self, x: &ManifoldTensor, p: &ManifoldTensor, a: &Tensor) -> Result<Tensor> {
        self.expect(x)?;
        self.expect(p)?;
        let (xt, pt) = (x.tensor(), p.tensor());
        if xt.rank() != 2 || x.man_dim() != 1 || pt.rank() != 2 || p.man_dim() != 1 {
            return Err(Error::dimension(
                "mlr_logits expects N×D points and K×D hyperplanes with manifold dimension 1",
            ));
        }
        if pt.shape()[1] != xt.shape()[1] || a.shape() != pt.shape() {
            return Err(Error::dimension(format!(
                "points {:?}, hyperplane points {:?}, normals {:?}",
                xt.shape(),
                pt.shape(),
                a.shape()
            )));
        }
        let d = a.shape()[1];
        if a.data().chunks(d).any(|row| row.iter().all(|&v| v == 0.0)) {
            return Err(Error::contract("hyperplane normal is the zero vector"));
        }
        self.geometry().mlr_logits(xt, pt, a)
    }

    /// β-concatenation of points along their shared manifold dimension.
    pub fn cat(&self, points: &[ManifoldTensor]) -> Result<ManifoldTensor> {
        let first = points
            .first()
            .ok_or_else(|| Error::contract("concatenation of zero points"))?;
        for p in points {
            self.expect(p)?;
            if p.man_dim() != first.man_dim() || p.tensor().rank() != first.tensor().rank() {
                return Err(Error::dimension(format!(
                    "cannot concatenate manifold dimension {} with {}",
                    p.man_dim(),
                    first.man_dim()
                )));
            }
        }
        let dim = first.man_dim();
        let g = self.geometry();
        let tangents: Vec<Tensor> = points
            .iter()
            .map(|p| g.logmap0(p.tensor(), dim))
            .collect::<Result<_>>()?;
        let dims: Vec<usize> = points.iter().map(|p| p.tensor().shape()[dim]).collect();
        let total: usize = dims.iter().sum();
        let scaled: Vec<Tensor> = tangents
            .iter()
            .zip(&dims)
            .map(|(t, &n)| Ok(t.mul_scalar(g.concat_scale(n, total))))
            .collect::<Result<_>>()?;
        let joined = Tensor::concat(&scaled, dim)?;
        Ok(ManifoldTensor::trusted(g.expmap0(&joined, dim)?, self.clone(), dim))
    }
}

/// Manifold axis of a broadcast result: both operands sit at the same offset
/// from the end, and the result has the larger rank.
fn out_dim<A: OnManifold, B: OnManifold>(a: &A, b: &B) -> usize {
    let ra = a.tensor().rank();
    let rb = b.tensor().rank();
    if ra >= rb {
        a.man_dim()
    } else {
        b.man_dim()
    }
}

/// `x` with leading unit axes added up to `rank`.
fn lift(x: &Tensor, rank: usize) -> Result<Tensor> {
    if x.rank() >= rank {
        return Ok(x.clone());
    }
    let mut shape = vec![1; rank - x.rank()];
    shape.extend_from_slice(x.shape());
    x.reshape(&shape)
}

fn same_rank(a: &Tensor, b: &Tensor) -> Result<(Tensor, Tensor)> {
    let rank = a.rank().max(b.rank());
    Ok((lift(a, rank)?, lift(b, rank)?))
}

/// Base points for a tangent tensor computed at `x`; lifted to the rank of
/// `vectors` so the two broadcast.
fn broadcast_base(x: &ManifoldTensor, vectors: &Tensor) -> Result<ManifoldTensor> {
    let extra = vectors.rank() - x.tensor().rank();
    if extra == 0 {
        return Ok(x.clone());
    }
    let mut shape = vec![1; extra];
    shape.extend_from_slice(x.tensor().shape());
    Ok(ManifoldTensor::trusted(
        x.tensor().reshape(&shape)?,
        x.manifold().clone(),
        x.man_dim() + extra,
    ))
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            ManifoldKind::Euclidean => write!(f, "Euclidean#{}", self.0.id),
            ManifoldKind::PoincareBall(c) => {
                write!(f, "PoincareBall#{}(c={})", self.0.id, c.value_f64())
            }
        }
    }
}

impl fmt::Debug for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Manifold formulas with the curvature already evaluated. The flat case
/// implements the Euclidean definitions: `⊕` is `+`, `expₓ(v) = x + v`,
/// `logₓ(y) = y − x`, `λ = 1`, and transport is the identity.
#[derive(Clone)]
pub enum Geometry {
    Flat,
    Ball(Tensor),
}

impl Geometry {
    pub fn curvature(&self) -> Option<&Tensor> {
        match self {
            Geometry::Flat => None,
            Geometry::Ball(c) => Some(c),
        }
    }

    pub fn project(&self, x: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(x.clone()),
            Geometry::Ball(c) => poincare::project(x, c, dim),
        }
    }

    pub fn mobius_add(&self, x: &Tensor, y: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => x.add(y),
            Geometry::Ball(c) => poincare::mobius_add(x, y, c, dim),
        }
    }

    pub fn gyration(&self, u: &Tensor, v: &Tensor, w: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(w.clone()),
            Geometry::Ball(c) => poincare::gyration(u, v, w, c, dim),
        }
    }

    pub fn conformal_factor(&self, x: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => {
                let mut shape = x.shape().to_vec();
                shape[dim] = 1;
                Ok(Tensor::ones(&shape))
            }
            Geometry::Ball(c) => poincare::conformal_factor(x, c, dim),
        }
    }

    pub fn expmap0(&self, v: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(v.clone()),
            Geometry::Ball(c) => poincare::expmap0(v, c, dim),
        }
    }

    pub fn logmap0(&self, y: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(y.clone()),
            Geometry::Ball(c) => poincare::logmap0(y, c, dim),
        }
    }

    pub fn expmap(&self, x: &Tensor, v: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => x.add(v),
            Geometry::Ball(c) => poincare::expmap(x, v, c, dim),
        }
    }

    pub fn logmap(&self, x: &Tensor, y: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => y.sub(x),
            Geometry::Ball(c) => poincare::logmap(x, y, c, dim),
        }
    }

    pub fn dist(&self, x: &Tensor, y: &Tensor, dim: usize, keepdim: bool) -> Result<Tensor> {
        match self {
            Geometry::Flat => y.sub(x)?.norm2(&[dim as isize], keepdim),
            Geometry::Ball(c) => poincare::dist(x, y, c, dim, keepdim),
        }
    }

    pub fn transport(&self, x: &Tensor, y: &Tensor, v: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(v.clone()),
            Geometry::Ball(c) => poincare::transport(x, y, v, c, dim),
        }
    }

    pub fn egrad_to_rgrad(&self, x: &Tensor, g: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => Ok(g.clone()),
            Geometry::Ball(c) => poincare::egrad_to_rgrad(x, g, c, dim),
        }
    }

    /// Riemannian squared norm of `h` at `x`, kept along `dim`.
    pub fn inner_sq(&self, x: &Tensor, h: &Tensor, dim: usize) -> Result<Tensor> {
        match self {
            Geometry::Flat => h.sq_norm(dim),
            Geometry::Ball(c) => poincare::inner_sq(x, h, c, dim),
        }
    }

    /// Rows of `x` (`M×in`) mapped by `w` (`out×in`).
    pub fn matvec_rows(&self, w: &Tensor, x: &Tensor) -> Result<Tensor> {
        let wt = w.transpose(0, 1)?;
        match self {
            Geometry::Flat => x.matmul(&wt),
            Geometry::Ball(c) => {
                let v = poincare::logmap0(x, c, 1)?;
                poincare::expmap0(&v.matmul(&wt)?, c, 1)
            }
        }
    }

    pub fn mlr_logits(&self, x: &Tensor, p: &Tensor, a: &Tensor) -> Result<Tensor> {
        match self {
            Geometry::Flat => {
                // <x - p_k, a_k> = <x, a_k> - <p_k, a_k>
                let xa = x.matmul(&a.transpose(0, 1)?)?;
                let pa = p.mul(a)?.sum(&[1], false)?;
                xa.sub(&pa)
            }
            Geometry::Ball(c) => poincare::mlr_logits(x, p, a, c),
        }
    }

    pub fn frechet_mean(
        &self,
        x: &Tensor,
        batch_axis: usize,
        dim: usize,
        weights: Option<&Tensor>,
        opts: FrechetOptions,
    ) -> Result<Tensor> {
        match self {
            Geometry::Flat => poincare::weighted_mean(x, batch_axis, weights),
            Geometry::Ball(c) => poincare::frechet_mean(x, batch_axis, dim, weights, c, opts),
        }
    }

    /// Factor `β_total / β_n` applied to an `n`-dimensional tangent block
    /// before concatenation into `total` dimensions; 1 in flat space.
    pub fn concat_scale(&self, n: usize, total: usize) -> f64 {
        match self {
            Geometry::Flat => 1.0,
            Geometry::Ball(_) => special::beta_half(total) / special::beta_half(n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_roundtrip() {
        for c in [1e-8, 0.1, 1.0, 2.0, 50.0] {
            let k = Curvature::new(c, false).unwrap();
            assert!(((k.value_f64() - c) / c).abs() < 1e-12, "{c}");
        }
        assert!(Curvature::new(0.0, false).is_err());
        assert!(Curvature::new(-1.0, true).is_err());
    }

    #[test]
    fn frozen_curvature_gets_no_gradient() {
        let k = Curvature::new(1.0, false).unwrap();
        assert!(!k.raw().requires_grad());
        let k = Curvature::new(1.0, true).unwrap();
        k.value().mul_scalar(3.0).backward().unwrap();
        assert!(k.raw().grad().is_some());
    }

    #[test]
    fn identity_is_by_object() {
        let a = Manifold::ball(1.0).unwrap();
        let b = Manifold::ball(1.0).unwrap();
        assert!(a.same_as(&a.clone()));
        assert!(!a.same_as(&b));
        assert!(a.to_string().starts_with("PoincareBall#"));
    }

    #[test]
    fn euclidean_formulas() {
        let g = Geometry::Flat;
        let x = Tensor::vector(&[1.0, 2.0]);
        let v = Tensor::vector(&[0.5, 0.5]);
        assert_eq!(g.expmap(&x, &v, 0).unwrap().to_vec(), vec![1.5, 2.5]);
        let d = g.dist(&Tensor::vector(&[0.0, 0.0]), &Tensor::vector(&[3.0, 4.0]), 0, false);
        assert_eq!(d.unwrap().item().unwrap(), 5.0);
        assert_eq!(g.conformal_factor(&x, 0).unwrap().to_vec(), vec![1.0]);
        assert_eq!(g.transport(&x, &v, &v, 0).unwrap().to_vec(), v.to_vec());
        assert_eq!(g.concat_scale(3, 9), 1.0);
    }
}
