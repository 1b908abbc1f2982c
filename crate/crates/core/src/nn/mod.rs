//! Manifold-agnostic layers.
//!
//! Every layer is built with a [`Manifold`]. On the Euclidean manifold each
//! one computes exactly its textbook counterpart; on the Poincaré ball the
//! same code path runs through the ball's maps.

mod activation;
mod batchnorm;
mod conv;
mod embedding;
mod head;
mod init;
mod linear;
mod pool;

pub use activation::{HFlatten, HReLU};
pub use batchnorm::HBatchNorm;
pub use conv::{ConcatMode, HConv2d};
pub use embedding::HEmbedding;
pub use head::{cross_entropy, HMlr};
pub use init::ParamInit;
pub use linear::HLinear;
pub use pool::{HPool2d, PoolKind};

use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::tensor::Tensor;
use crate::tensors::{ManifoldParameter, ManifoldTensor, OnManifold, TangentTensor};

/// A trainable parameter: plain Euclidean values or points on a manifold.
#[derive(Clone, Debug)]
pub enum Param {
    Euclidean(Tensor),
    Point(ManifoldParameter),
}

impl Param {
    /// The leaf tensor that receives gradients.
    pub fn tensor(&self) -> &Tensor {
        match self {
            Param::Euclidean(t) => t,
            Param::Point(p) => p.tensor(),
        }
    }
}

/// A parameter with a stable, dotted name (`"0.weight"`).
#[derive(Clone, Debug)]
pub struct NamedParam {
    pub name: String,
    pub param: Param,
}

impl NamedParam {
    pub fn new(name: impl Into<String>, param: Param) -> Self {
        Self {
            name: name.into(),
            param,
        }
    }
}

/// A layer mapping points to points.
pub trait Module {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor>;

    /// Trainable parameters, in a fixed order.
    fn parameters(&self) -> Vec<NamedParam> {
        Vec::new()
    }

    fn manifold(&self) -> &Manifold;

    /// Switches between training and inference behaviour. Only batch norm
    /// cares.
    fn set_training(&self, _training: bool) {}
}

/// Wraps `x` as tangent vectors at the origin and maps them onto the
/// manifold with `exp₀`. On the Euclidean manifold this is the identity.
pub fn lift_to_manifold(x: &Tensor, manifold: &Manifold, man_dim: isize) -> Result<ManifoldTensor> {
    let v = TangentTensor::new(x.clone(), manifold, None, man_dim)?;
    manifold.expmap(&v)
}

/// Layers applied in order, all on one manifold object.
pub struct Sequential {
    manifold: Manifold,
    layers: Vec<Box<dyn Module>>,
}

impl Sequential {
    pub fn new(manifold: &Manifold) -> Self {
        Self {
            manifold: manifold.clone(),
            layers: Vec::new(),
        }
    }

    pub fn push(&mut self, layer: impl Module + 'static) -> Result<()> {
        if !layer.manifold().same_as(&self.manifold) {
            return Err(Error::ManifoldMismatch {
                left: self.manifold.to_string(),
                right: layer.manifold().to_string(),
            });
        }
        self.layers.push(Box::new(layer));
        Ok(())
    }

    pub fn with(mut self, layer: impl Module + 'static) -> Result<Self> {
        self.push(layer)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

impl Module for Sequential {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.forward(&h)?;
        }
        Ok(h)
    }

    fn parameters(&self) -> Vec<NamedParam> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for p in layer.parameters() {
                out.push(NamedParam::new(format!("{i}.{}", p.name), p.param));
            }
        }
        out
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn set_training(&self, training: bool) {
        for layer in &self.layers {
            layer.set_training(training);
        }
    }
}

/// Moves the manifold axis of `x` last and flattens the rest into rows.
/// Returns the rows and the permuted leading shape for [`unrows`].
pub(crate) fn rows(x: &Tensor, dim: usize) -> Result<(Tensor, Vec<usize>)> {
    let last = x.rank() - 1;
    let moved = x.move_axis(dim, last)?;
    let lead = moved.shape()[..last].to_vec();
    let n: usize = lead.iter().product();
    let d = moved.shape()[last];
    Ok((moved.reshape(&[n, d])?, lead))
}

/// Inverse of [`rows`] for `d`-dimensional rows.
pub(crate) fn unrows(r: &Tensor, lead: &[usize], dim: usize) -> Result<Tensor> {
    let mut shape = lead.to_vec();
    shape.push(r.shape()[1]);
    let last = shape.len() - 1;
    r.reshape(&shape)?.move_axis(last, dim)
}
