use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::Module;
use crate::tensors::ManifoldTensor;

/// `exp₀(relu(log₀(x)))`; plain relu on the Euclidean manifold.
pub struct HReLU {
    manifold: Manifold,
}

impl HReLU {
    pub fn new(manifold: &Manifold) -> Self {
        Self {
            manifold: manifold.clone(),
        }
    }
}

impl Module for HReLU {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let g = self.manifold.geometry();
        let dim = x.man_dim();
        let y = g.expmap0(&g.logmap0(x.tensor(), dim)?.relu(), dim)?;
        Ok(ManifoldTensor::trusted(y, self.manifold.clone(), dim))
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
}

/// `N×C×H×W` to `N×(C·H·W)` by concatenating the `H·W` channel points of each
/// sample (channel-major order); a plain reshape on the Euclidean manifold.
pub struct HFlatten {
    manifold: Manifold,
}

impl HFlatten {
    pub fn new(manifold: &Manifold) -> Self {
        Self {
            manifold: manifold.clone(),
        }
    }
}

impl Module for HFlatten {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let t = x.tensor();
        if t.rank() != 4 || x.man_dim() != 1 {
            return Err(Error::dimension(format!(
                "flatten expects N×C×H×W points along axis 1, got {:?} along axis {}",
                t.shape(),
                x.man_dim()
            )));
        }
        let (n, c) = (t.shape()[0], t.shape()[1]);
        let total = t.numel() / n.max(1);
        let g = self.manifold.geometry();
        let v = g.logmap0(t, 1)?.reshape(&[n, total])?;
        let scale = g.concat_scale(c, total);
        let v = if scale == 1.0 { v } else { v.mul_scalar(scale) };
        Ok(ManifoldTensor::trusted(g.expmap0(&v, 1)?, self.manifold.clone(), 1))
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    #[test]
    fn relu_fixes_nonnegative_points() {
        let b = Manifold::ball(1.0).unwrap();
        let x = ManifoldTensor::new(Tensor::matrix(&[&[0.3, 0.0, 0.5]]).unwrap(), &b, 1).unwrap();
        let y = HReLU::new(&b).forward(&x).unwrap();
        for (a, b) in y.tensor().data().iter().zip(x.tensor().data().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn euclidean_relu() {
        let e = Manifold::euclidean();
        let x = ManifoldTensor::new(Tensor::vector(&[-1.0, 2.0]), &e, 0).unwrap();
        assert_eq!(HReLU::new(&e).forward(&x).unwrap().tensor().to_vec(), vec![0.0, 2.0]);
    }

    #[test]
    fn flatten_single_pixel_is_reshape() {
        let b = Manifold::ball(1.0).unwrap();
        let x = ManifoldTensor::new(Tensor::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.2, 0.1], &[2, 3, 1, 1]).unwrap(), &b, 1)
            .unwrap();
        let y = HFlatten::new(&b).forward(&x).unwrap();
        assert_eq!(y.shape(), &[2, 3]);
        for (a, b) in y.tensor().data().iter().zip(x.tensor().data().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn flatten_stays_in_ball() {
        let b = Manifold::ball(1.0).unwrap();
        let data: Vec<f64> = (0..2 * 3 * 4 * 4).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
        let x = ManifoldTensor::new(Tensor::from_vec(data, &[2, 3, 4, 4]).unwrap(), &b, 1).unwrap();
        let y = HFlatten::new(&b).forward(&x).unwrap();
        for row in y.tensor().data().chunks(48) {
            assert!(row.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 - 1e-5);
        }
    }
}
