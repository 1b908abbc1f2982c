use crate::error::{Error, Result};
use crate::optim::Optimizer;

/// Multiplies the learning rate by `gamma` every `every` epochs.
#[derive(Clone, Debug)]
pub struct StepDecay {
    gamma: f64,
    every: usize,
    epochs: usize,
}

impl StepDecay {
    pub fn new(gamma: f64, every: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!("decay factor must lie in (0, 1], got {gamma}")));
        }
        if every == 0 {
            return Err(Error::Config("decay period must be at least one epoch".into()));
        }
        Ok(Self { gamma, every, epochs: 0 })
    }

    /// Call once at the end of every epoch.
    pub fn epoch_end(&mut self, opt: &mut dyn Optimizer) {
        self.epochs += 1;
        if self.epochs.is_multiple_of(self.every) {
            opt.set_lr(opt.lr() * self.gamma);
        }
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Continues counting from `epochs` finished epochs, for resumed runs.
    pub fn resume_at(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{NamedParam, Param};
    use crate::optim::{RSgdConfig, RiemannianSgd};
    use crate::tensor::Tensor;

    fn opt(lr: f64) -> RiemannianSgd {
        let x = Tensor::parameter(vec![0.0], &[1]).unwrap();
        RiemannianSgd::new(vec![NamedParam::new("x", Param::Euclidean(x))], RSgdConfig::new(lr)).unwrap()
    }

    #[test]
    fn halving() {
        let mut o = opt(0.1);
        let mut s = StepDecay::new(0.5, 1).unwrap();
        s.epoch_end(&mut o);
        s.epoch_end(&mut o);
        assert!((o.lr() - 0.025).abs() < 1e-17);
    }

    #[test]
    fn unit_factor_is_constant() {
        let mut o = opt(0.1);
        let mut s = StepDecay::new(1.0, 2).unwrap();
        for _ in 0..7 {
            s.epoch_end(&mut o);
        }
        assert_eq!(o.lr(), 0.1);
        assert!(StepDecay::new(0.0, 1).is_err());
        assert!(StepDecay::new(0.5, 0).is_err());
    }
}
