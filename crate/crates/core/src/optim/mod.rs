//! Riemannian SGD and Adam over mixed parameter sets, plus a step-decay
//! learning-rate schedule.
//!
//! Manifold parameters are updated with the exact exponential map and their
//! momentum is parallel-transported to the new point after every move.
//! Euclidean tensors (and Euclidean-manifold points) go through the same
//! equations, which then reduce to the standard optimizers.

mod radam;
mod rsgd;
mod schedule;

pub use radam::{RAdamConfig, RiemannianAdam};
pub use rsgd::{RSgdConfig, RiemannianSgd};
pub use schedule::StepDecay;

use crate::error::{Error, Result};
use crate::manifolds::Geometry;
use crate::nn::{NamedParam, Param};
use crate::tensor::Tensor;
use crate::tensors::OnManifold;

/// Common optimizer interface; the learning rate is the state a scheduler
/// shares with the optimizer.
pub trait Optimizer {
    /// Updates every parameter from its gradient slot.
    fn step(&mut self) -> Result<()>;
    /// Sets every gradient slot to zeros.
    fn zero_grad(&self);
    fn lr(&self) -> f64;
    fn set_lr(&mut self, lr: f64);
    /// Per-parameter buffers, in registration order.
    fn state(&self) -> Vec<SlotState>;
    /// Restores buffers saved by [`state`](Self::state).
    fn load_state(&mut self, state: Vec<SlotState>) -> Result<()>;
}

/// Buffers of one parameter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlotState {
    pub name: String,
    pub steps: u64,
    pub momentum: Option<Vec<f64>>,
    pub second_moment: Option<Vec<f64>>,
}

/// Registered parameters; registration is released on drop.
pub(crate) struct ParamSet {
    pub(crate) slots: Vec<(NamedParam, SlotState)>,
}

impl ParamSet {
    pub(crate) fn new(params: Vec<NamedParam>) -> Result<Self> {
        let mut slots = Vec::with_capacity(params.len());
        for p in params {
            if !p.param.tensor().requires_grad() {
                Self::release(&slots);
                return Err(Error::contract(format!("parameter `{}` does not require a gradient", p.name)));
            }
            if p.param.tensor().set_registered(true) {
                Self::release(&slots);
                return Err(Error::contract(format!(
                    "parameter `{}` is already registered with an optimizer",
                    p.name
                )));
            }
            let state = SlotState {
                name: p.name.clone(),
                ..SlotState::default()
            };
            slots.push((p, state));
        }
        Ok(Self { slots })
    }

    fn release(slots: &[(NamedParam, SlotState)]) {
        for (p, _) in slots {
            p.param.tensor().set_registered(false);
        }
    }

    pub(crate) fn zero_grad(&self) {
        for (p, _) in &self.slots {
            p.param.tensor().reset_grad();
        }
    }

    pub(crate) fn state(&self) -> Vec<SlotState> {
        self.slots.iter().map(|(_, s)| s.clone()).collect()
    }

    pub(crate) fn load_state(&mut self, state: Vec<SlotState>) -> Result<()> {
        if state.len() != self.slots.len() {
            return Err(Error::Data(format!(
                "optimizer state has {} slots, expected {}",
                state.len(),
                self.slots.len()
            )));
        }
        for ((p, slot), s) in self.slots.iter_mut().zip(state) {
            let n = p.param.tensor().numel();
            let bad = |v: &Option<Vec<f64>>, len: usize| v.as_ref().is_some_and(|v| v.len() != len);
            if s.name != p.name || bad(&s.momentum, n) {
                return Err(Error::Data(format!("optimizer state for `{}` does not fit `{}`", s.name, p.name)));
            }
            *slot = s;
        }
        Ok(())
    }
}

impl Drop for ParamSet {
    fn drop(&mut self) {
        Self::release(&self.slots);
    }
}

/// Everything one update needs about a parameter.
pub(crate) struct View {
    pub(crate) geometry: Geometry,
    pub(crate) dim: usize,
    pub(crate) x: Tensor,
    pub(crate) grad: Tensor,
}

impl View {
    pub(crate) fn of(p: &NamedParam) -> Result<Self> {
        let t = p.param.tensor();
        let grad = t
            .grad()
            .ok_or_else(|| Error::contract(format!("gradient missing for `{}`", p.name)))?;
        let (geometry, dim) = match &p.param {
            Param::Euclidean(_) => (Geometry::Flat, 0),
            Param::Point(mp) => (mp.manifold().geometry_detached(), mp.man_dim()),
        };
        Ok(Self {
            geometry,
            dim,
            x: Tensor::from_vec(t.to_vec(), t.shape())?,
            grad: Tensor::from_vec(grad, t.shape())?,
        })
    }

    pub(crate) fn is_flat(&self) -> bool {
        matches!(self.geometry, Geometry::Flat)
    }

    /// Moves to `project(expₓ(−lr·dir))`, writes the new point into the
    /// parameter and returns `momentum` transported there.
    pub(crate) fn advance(&self, target: &Tensor, lr: f64, dir: &Tensor, momentum: Option<&Tensor>) -> Result<Option<Tensor>> {
        let g = &self.geometry;
        let moved = g.expmap(&self.x, &dir.mul_scalar(-lr), self.dim)?;
        let x_new = g.project(&moved, self.dim)?;
        let m = momentum
            .map(|m| g.transport(&self.x, &x_new, m, self.dim))
            .transpose()?;
        target.set_data(x_new.to_vec())?;
        Ok(m)
    }
}

pub(crate) fn check_lr(lr: f64) -> Result<()> {
    if lr.is_finite() && lr > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("learning rate must be positive, got {lr}")))
    }
}
