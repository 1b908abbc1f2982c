use crate::error::{Error, Result};
use crate::nn::NamedParam;
use crate::optim::{check_lr, Optimizer, ParamSet, SlotState, View};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug)]
pub struct RAdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl RAdamConfig {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Riemannian Adam.
///
/// The first moment is a tangent vector transported with the parameter. The
/// second moment accumulates the Riemannian squared norm `(λₓ/2)²‖h‖²`, one
/// scalar per point of a ball parameter, and `h²` per coordinate for
/// Euclidean values, where the update is exactly Adam.
pub struct RiemannianAdam {
    params: ParamSet,
    config: RAdamConfig,
}

impl RiemannianAdam {
    pub fn new(params: Vec<NamedParam>, config: RAdamConfig) -> Result<Self> {
        check_lr(config.lr)?;
        let RAdamConfig { beta1, beta2, eps, .. } = config;
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return Err(Error::Config(format!("betas must lie in [0, 1), got ({beta1}, {beta2})")));
        }
        if !(eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        Ok(Self {
            params: ParamSet::new(params)?,
            config,
        })
    }

    pub fn config(&self) -> RAdamConfig {
        self.config
    }
}

impl Optimizer for RiemannianAdam {
    fn step(&mut self) -> Result<()> {
        let RAdamConfig { lr, beta1, beta2, eps } = self.config;
        for (p, state) in &mut self.params.slots {
            let view = View::of(p)?;
            let h = view.geometry.egrad_to_rgrad(&view.x, &view.grad, view.dim)?;
            let sq = if view.is_flat() {
                h.square()
            } else {
                view.geometry.inner_sq(&view.x, &h, view.dim)?
            };
            let m = match &state.momentum {
                Some(buf) => Tensor::from_vec(buf.clone(), h.shape())?
                    .mul_scalar(beta1)
                    .add(&h.mul_scalar(1.0 - beta1))?,
                None => h.mul_scalar(1.0 - beta1),
            };
            let v = match &state.second_moment {
                Some(buf) => Tensor::from_vec(buf.clone(), sq.shape())?
                    .mul_scalar(beta2)
                    .add(&sq.mul_scalar(1.0 - beta2))?,
                None => sq.mul_scalar(1.0 - beta2),
            };
            let t = state.steps + 1;
            let m_hat = m.mul_scalar(1.0 / (1.0 - beta1.powi(t as i32)));
            let v_hat = v.mul_scalar(1.0 / (1.0 - beta2.powi(t as i32)));
            let dir = m_hat.div(&v_hat.sqrt().add_scalar(eps))?;
            let moved = view.advance(p.param.tensor(), lr, &dir, Some(&m))?;
            state.momentum = moved.map(|m| m.to_vec());
            state.second_moment = Some(v.to_vec());
            state.steps = t;
        }
        Ok(())
    }

    fn zero_grad(&self) {
        self.params.zero_grad();
    }

    fn lr(&self) -> f64 {
        self.config.lr
    }

    fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }

    fn state(&self) -> Vec<SlotState> {
        self.params.state()
    }

    fn load_state(&mut self, state: Vec<SlotState>) -> Result<()> {
        self.params.load_state(state)
    }
}
