use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::manifolds::Manifold;
use crate::tensor::Tensor;
use crate::tensors::ManifoldParameter;

/// Seeded source of initial parameter values. Building the same layers in
/// the same order from the same seed gives bitwise-identical parameters.
pub struct ParamInit {
    rng: ChaCha8Rng,
}

impl ParamInit {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Entries drawn from `U(−1/√fan_in, 1/√fan_in)`.
    pub fn uniform(&mut self, shape: &[usize], fan_in: usize) -> Result<Tensor> {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let n = shape.iter().product();
        let data = (0..n).map(|_| self.rng.random_range(-bound..bound)).collect();
        Tensor::parameter(data, shape)
    }

    /// Points `exp₀(v)` with tangent noise `v ~ N(0, 0.01²)`.
    pub fn points(&mut self, shape: &[usize], manifold: &Manifold, man_dim: usize) -> Result<ManifoldParameter> {
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        let n = shape.iter().product();
        let noise: Vec<f64> = (0..n).map(|_| normal.sample(&mut self.rng)).collect();
        let v = Tensor::from_vec(noise, shape)?;
        let x = manifold.geometry_detached().expmap0(&v, man_dim)?;
        ManifoldParameter::new(x.to_vec(), shape, manifold, man_dim as isize)
    }
}
