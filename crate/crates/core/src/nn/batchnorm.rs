use std::cell::{Cell, RefCell};

use crate::error::{Error, Result};
use crate::manifolds::{FrechetOptions, Manifold};
use crate::nn::{rows, unrows, Module, NamedParam, Param};
use crate::tensor::Tensor;
use crate::tensors::{ManifoldParameter, ManifoldTensor, OnManifold};

const VAR_EPS: f64 = 1e-5;

/// Riemannian batch normalization.
///
/// Points are re-centred from their Fréchet mean `μ` to the learned point
/// `β` and their spread rescaled: `yᵢ = exp_β((γ/√(σ² + ε))·PT_{μ→β}(log_μ xᵢ))`
/// with `σ²` the Fréchet variance (one scalar for the whole batch). Every
/// axis other than the manifold axis counts as a batch axis. On the
/// Euclidean manifold this is `β + γ(x − μ)/√(σ² + ε)`.
pub struct HBatchNorm {
    beta: ManifoldParameter,
    gamma: Tensor,
    running_mean: RefCell<Tensor>,
    running_var: Cell<f64>,
    momentum: f64,
    training: Cell<bool>,
    frechet: FrechetOptions,
    manifold: Manifold,
}

impl HBatchNorm {
    pub fn new(features: usize, manifold: &Manifold) -> Result<Self> {
        Ok(Self {
            beta: ManifoldParameter::new(vec![0.0; features], &[features], manifold, 0)?,
            gamma: Tensor::parameter(vec![1.0], &[])?,
            running_mean: RefCell::new(Tensor::zeros(&[1, features])),
            running_var: Cell::new(1.0),
            momentum: 0.1,
            training: Cell::new(true),
            frechet: FrechetOptions {
                tol: 1e-12,
                max_iter: 100,
            },
            manifold: manifold.clone(),
        })
    }

    /// Sets `β` and `γ` directly.
    pub fn with_affine(mut self, beta: &[f64], gamma: f64) -> Result<Self> {
        let d = self.features();
        if beta.len() != d {
            return Err(Error::shape(format!("β has {} entries, expected {d}", beta.len())));
        }
        self.beta = ManifoldParameter::new(beta.to_vec(), &[d], &self.manifold, 0)?;
        self.gamma = Tensor::parameter(vec![gamma], &[])?;
        Ok(self)
    }

    pub fn features(&self) -> usize {
        self.beta.tensor().numel()
    }

    pub fn beta(&self) -> &ManifoldParameter {
        &self.beta
    }

    pub fn gamma(&self) -> &Tensor {
        &self.gamma
    }

    pub fn running_mean(&self) -> Vec<f64> {
        self.running_mean.borrow().to_vec()
    }

    pub fn running_var(&self) -> f64 {
        self.running_var.get()
    }

    pub fn is_training(&self) -> bool {
        self.training.get()
    }

    /// Normalizes an `M×D` batch.
    fn normalize(&self, x: &Tensor) -> Result<Tensor> {
        let m = &self.manifold;
        let g = m.geometry();
        let d = self.features();
        let (mu, var) = if self.training.get() {
            if x.shape()[0] < 2 {
                return Err(Error::contract("batch norm in training mode needs at least two points"));
            }
            let xm = ManifoldTensor::trusted(x.clone(), m.clone(), 1);
            let mu = m.frechet_mean_with(&xm, 0, None, true, self.frechet)?;
            let var = m.frechet_variance(&xm, &mu, 0)?;
            self.update_running(mu.tensor(), var.item()?)?;
            (mu.tensor().clone(), var)
        } else {
            (self.running_mean.borrow().clone(), Tensor::scalar(self.running_var.get()))
        };
        let beta = self.beta.tensor().reshape(&[1, d])?;
        let v = g.logmap(&mu, x, 1)?;
        let v = g.transport(&mu, &beta, &v, 1)?;
        let scale = self.gamma.div(&var.add_scalar(VAR_EPS).sqrt())?;
        g.expmap(&beta, &v.mul(&scale)?, 1)
    }

    fn update_running(&self, mu: &Tensor, var: f64) -> Result<()> {
        let g = self.manifold.geometry_detached();
        let mu = mu.detach();
        let rm = self.running_mean.borrow().clone();
        let step = g.logmap(&rm, &mu, 1)?.mul_scalar(self.momentum);
        *self.running_mean.borrow_mut() = g.expmap(&rm, &step, 1)?;
        let rv = self.running_var.get();
        self.running_var.set((1.0 - self.momentum) * rv + self.momentum * var);
        Ok(())
    }
}

impl Module for HBatchNorm {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let dim = x.man_dim();
        if x.shape()[dim] != self.features() {
            return Err(Error::dimension(format!(
                "batch norm over {} features got points of dimension {}",
                self.features(),
                x.shape()[dim]
            )));
        }
        let (r, lead) = rows(x.tensor(), dim)?;
        let y = self.normalize(&r)?;
        Ok(ManifoldTensor::trusted(unrows(&y, &lead, dim)?, self.manifold.clone(), dim))
    }

    fn parameters(&self) -> Vec<NamedParam> {
        vec![
            NamedParam::new("beta", Param::Point(self.beta.clone())),
            NamedParam::new("gamma", Param::Euclidean(self.gamma.clone())),
        ]
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn set_training(&self, training: bool) {
        self.training.set(training);
    }
}
