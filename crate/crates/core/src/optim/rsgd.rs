use crate::error::{Error, Result};
use crate::nn::NamedParam;
use crate::optim::{check_lr, Optimizer, ParamSet, SlotState, View};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug)]
pub struct RSgdConfig {
    pub lr: f64,
    pub momentum: f64,
}

impl RSgdConfig {
    pub fn new(lr: f64) -> Self {
        Self { lr, momentum: 0.9 }
    }

    pub fn with_momentum(mut self, momentum: f64) -> Self {
        self.momentum = momentum;
        self
    }
}

/// Riemannian SGD with momentum:
/// `h = rgrad`, `m ← μm + h`, `x ← expₓ(−lr·m)`, then `m` is transported
/// to the new point.
pub struct RiemannianSgd {
    params: ParamSet,
    config: RSgdConfig,
}

impl RiemannianSgd {
    pub fn new(params: Vec<NamedParam>, config: RSgdConfig) -> Result<Self> {
        check_lr(config.lr)?;
        if !(0.0..1.0).contains(&config.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0, 1), got {}", config.momentum)));
        }
        Ok(Self {
            params: ParamSet::new(params)?,
            config,
        })
    }

    pub fn config(&self) -> RSgdConfig {
        self.config
    }
}

impl Optimizer for RiemannianSgd {
    fn step(&mut self) -> Result<()> {
        let RSgdConfig { lr, momentum } = self.config;
        for (p, state) in &mut self.params.slots {
            let view = View::of(p)?;
            let h = view.geometry.egrad_to_rgrad(&view.x, &view.grad, view.dim)?;
            let m = match (&state.momentum, momentum > 0.0) {
                (Some(buf), true) => Tensor::from_vec(buf.clone(), h.shape())?.mul_scalar(momentum).add(&h)?,
                _ => h,
            };
            let keep = (momentum > 0.0).then_some(&m);
            let moved = view.advance(p.param.tensor(), lr, &m, keep)?;
            state.momentum = moved.map(|m| m.to_vec());
            state.steps += 1;
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
