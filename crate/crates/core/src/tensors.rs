//! Tensors that know which manifold they live on.
//!
//! [`ManifoldTensor`] holds points, [`ManifoldParameter`] holds trainable
//! points and [`TangentTensor`] holds tangent vectors together with the
//! (broadcastable) base points of their tangent spaces. Every cross-object
//! operation goes through [`check_compatible`].

use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::tensor::{broadcast_shape, normalize_axis, Tensor};

/// Shared view of objects carrying manifold metadata.
pub trait OnManifold {
    fn tensor(&self) -> &Tensor;
    fn manifold(&self) -> &Manifold;
    /// Normalized (nonnegative) axis holding points or vectors.
    fn man_dim(&self) -> usize;
}

/// Points on a manifold, one per slice along `man_dim`.
#[derive(Clone, Debug)]
pub struct ManifoldTensor {
    tensor: Tensor,
    manifold: Manifold,
    man_dim: usize,
}

impl ManifoldTensor {
    /// Wraps `tensor`, projecting any point outside the ball back onto it.
    /// Negative `man_dim` counts from the end.
    pub fn new(tensor: Tensor, manifold: &Manifold, man_dim: isize) -> Result<Self> {
        let man_dim = normalize_axis(man_dim, tensor.rank())?;
        let tensor = manifold.project_tensor(&tensor, man_dim)?;
        Ok(Self {
            tensor,
            manifold: manifold.clone(),
            man_dim,
        })
    }

    /// For results of manifold operations, which already satisfy the
    /// membership invariant.
    pub(crate) fn trusted(tensor: Tensor, manifold: Manifold, man_dim: usize) -> Self {
        debug_assert!(man_dim < tensor.rank());
        Self {
            tensor,
            manifold,
            man_dim,
        }
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn man_dim(&self) -> usize {
        self.man_dim
    }

    pub fn shape(&self) -> &[usize] {
        self.tensor.shape()
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }
}

impl OnManifold for ManifoldTensor {
    fn tensor(&self) -> &Tensor {
        &self.tensor
    }
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn man_dim(&self) -> usize {
        self.man_dim
    }
}

/// A trainable leaf of points. Optimizer steps keep it on the manifold.
#[derive(Clone, Debug)]
pub struct ManifoldParameter {
    point: ManifoldTensor,
}

impl ManifoldParameter {
    pub fn new(data: Vec<f64>, shape: &[usize], manifold: &Manifold, man_dim: isize) -> Result<Self> {
        let raw = Tensor::from_vec(data, shape)?;
        let projected = ManifoldTensor::new(raw, manifold, man_dim)?;
        let leaf = projected.tensor().requires_grad_leaf();
        Ok(Self {
            point: ManifoldTensor::trusted(leaf, manifold.clone(), projected.man_dim()),
        })
    }

    /// The parameter as a point tensor; gradients flow into the leaf.
    pub fn value(&self) -> &ManifoldTensor {
        &self.point
    }

    /// Replaces the values, projecting them onto the manifold first.
    pub fn assign(&self, data: Vec<f64>) -> Result<()> {
        let raw = Tensor::from_vec(data, self.point.shape())?;
        let projected = self.point.manifold.project_tensor(&raw, self.point.man_dim)?;
        self.point.tensor.set_data(projected.to_vec())
    }
}

impl OnManifold for ManifoldParameter {
    fn tensor(&self) -> &Tensor {
        &self.point.tensor
    }
    fn manifold(&self) -> &Manifold {
        &self.point.manifold
    }
    fn man_dim(&self) -> usize {
        self.point.man_dim
    }
}

/// Tangent vectors, optionally with base points that broadcast against them.
/// Without base points every vector sits in the tangent space at the origin.
#[derive(Clone, Debug)]
pub struct TangentTensor {
    vectors: Tensor,
    manifold: Manifold,
    base: Option<ManifoldTensor>,
    man_dim: usize,
}

impl TangentTensor {
    pub fn new(
        vectors: Tensor,
        manifold: &Manifold,
        base: Option<ManifoldTensor>,
        man_dim: isize,
    ) -> Result<Self> {
        let man_dim = normalize_axis(man_dim, vectors.rank())?;
        let t = Self {
            vectors,
            manifold: manifold.clone(),
            base: None,
            man_dim,
        };
        if let Some(b) = &base {
            check_compatible(&t, b)?;
        }
        Ok(Self { base, ..t })
    }

    pub(crate) fn trusted(
        vectors: Tensor,
        manifold: Manifold,
        base: Option<ManifoldTensor>,
        man_dim: usize,
    ) -> Self {
        Self {
            vectors,
            manifold,
            base,
            man_dim,
        }
    }

    pub fn tensor(&self) -> &Tensor {
        &self.vectors
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn base(&self) -> Option<&ManifoldTensor> {
        self.base.as_ref()
    }

    pub fn man_dim(&self) -> usize {
        self.man_dim
    }
}

impl OnManifold for TangentTensor {
    fn tensor(&self) -> &Tensor {
        &self.vectors
    }
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn man_dim(&self) -> usize {
        self.man_dim
    }
}

/// Passes iff both objects reference the same manifold object, their
/// manifold dimensions sit at the same offset from the end with equal
/// extents, and their shapes broadcast.
pub fn check_compatible<A: OnManifold + ?Sized, B: OnManifold + ?Sized>(a: &A, b: &B) -> Result<()> {
    if !a.manifold().same_as(b.manifold()) {
        return Err(Error::ManifoldMismatch {
            left: a.manifold().to_string(),
            right: b.manifold().to_string(),
        });
    }
    let (sa, sb) = (a.tensor().shape(), b.tensor().shape());
    let (da, db) = (a.man_dim(), b.man_dim());
    if sa.len() - da != sb.len() - db {
        return Err(Error::Dimension(format!(
            "manifold dimensions do not align: axis {da} of {sa:?} on {} vs axis {db} of {sb:?} on {}",
            a.manifold(),
            b.manifold()
        )));
    }
    if sa[da] != sb[db] {
        return Err(Error::Dimension(format!(
            "manifold dimension extents differ: {} (axis {da} of {sa:?}) vs {} (axis {db} of {sb:?}) on {}",
            sa[da],
            sb[db],
            a.manifold()
        )));
    }
    broadcast_shape(sa, sb)?;
    Ok(())
}
