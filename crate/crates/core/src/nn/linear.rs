use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::{Module, NamedParam, Param, ParamInit};
use crate::tensor::Tensor;
use crate::tensors::{ManifoldParameter, ManifoldTensor, OnManifold};

/// `y = (W ⊗ x) ⊕ b`; on the Euclidean manifold `y = Wx + b`.
///
/// `W` is a Euclidean `out×in` matrix and `b` a point of dimension `out`.
/// Works along the manifold dimension of its input, whatever its rank.
pub struct HLinear {
    weight: Tensor,
    bias: ManifoldParameter,
    manifold: Manifold,
}

impl HLinear {
    pub fn new(in_features: usize, out_features: usize, manifold: &Manifold, init: &mut ParamInit) -> Result<Self> {
        let weight = init.uniform(&[out_features, in_features], in_features)?;
        let bias = init.points(&[out_features], manifold, 0)?;
        Ok(Self {
            weight,
            bias,
            manifold: manifold.clone(),
        })
    }

    /// Builds the layer from explicit values (projected onto the manifold).
    pub fn from_parts(weight: Tensor, bias: &[f64], manifold: &Manifold) -> Result<Self> {
        if weight.rank() != 2 || weight.shape()[0] != bias.len() {
            return Err(Error::shape(format!(
                "weight {:?} does not match bias of length {}",
                weight.shape(),
                bias.len()
            )));
        }
        Ok(Self {
            weight: weight.requires_grad_leaf(),
            bias: ManifoldParameter::new(bias.to_vec(), &[bias.len()], manifold, 0)?,
            manifold: manifold.clone(),
        })
    }

    pub fn in_features(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_features(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn weight(&self) -> &Tensor {
        &self.weight
    }

    pub fn bias(&self) -> &ManifoldParameter {
        &self.bias
    }
}

impl Module for HLinear {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let dim = x.man_dim();
        let extent = x.shape()[dim];
        if extent != self.in_features() {
            return Err(Error::dimension(format!(
                "linear layer expects points of dimension {}, got {extent}",
                self.in_features()
            )));
        }
        let y = self.manifold.mobius_matvec(&self.weight, x)?;
        // Align b's manifold axis with y's: out × 1 × … × 1.
        let trailing = x.tensor().rank() - dim - 1;
        let mut shape = vec![self.out_features()];
        shape.extend(std::iter::repeat_n(1, trailing));
        let b = ManifoldTensor::trusted(
            self.bias.tensor().reshape(&shape)?,
            self.manifold.clone(),
            0,
        );
        self.manifold.mobius_add(&y, &b)
    }

    fn parameters(&self) -> Vec<NamedParam> {
        vec![
            NamedParam::new("weight", Param::Euclidean(self.weight.clone())),
            NamedParam::new("bias", Param::Point(self.bias.clone())),
        ]
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
}
