use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::Module;
use crate::tensors::ManifoldTensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolKind {
    /// Coordinatewise maximum in the tangent space at the origin.
    Max,
    /// Fréchet mean of the window.
    Avg,
}

/// Spatial pooling over `N×C×H×W` points along axis 1.
pub struct HPool2d {
    kind: PoolKind,
    window: usize,
    stride: usize,
    manifold: Manifold,
}

impl HPool2d {
    pub fn new(kind: PoolKind, window: usize, stride: usize, manifold: &Manifold) -> Self {
        Self {
            kind,
            window,
            stride,
            manifold: manifold.clone(),
        }
    }

    pub fn max(window: usize, manifold: &Manifold) -> Self {
        Self::new(PoolKind::Max, window, window, manifold)
    }

    pub fn avg(window: usize, manifold: &Manifold) -> Self {
        Self::new(PoolKind::Avg, window, window, manifold)
    }
}

impl Module for HPool2d {
    fn forward(&self, x: &ManifoldTensor) -> Result<ManifoldTensor> {
        self.manifold.expect(x)?;
        let t = x.tensor();
        if t.rank() != 4 || x.man_dim() != 1 {
            return Err(Error::dimension(format!(
                "pooling expects N×C×H×W points along axis 1, got {:?} along axis {}",
                t.shape(),
                x.man_dim()
            )));
        }
        let (n, c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]);
        let k = self.window;
        let oh = crate::tensor::conv_output_size(h, k, self.stride, 0);
        let ow = crate::tensor::conv_output_size(w, k, self.stride, 0);
        let (Some(oh), Some(ow)) = (oh, ow) else {
            return Err(Error::shape(format!("input {h}×{w} is smaller than the {k}×{k} window")));
        };
        let g = self.manifold.geometry();
        let win = (k, k);
        let stride = (self.stride, self.stride);
        let y = match self.kind {
            PoolKind::Max => {
                let v = g.logmap0(t, 1)?.unfold2d(win, stride, (0, 0))?;
                let v = v.reshape(&[n, c, k * k, oh * ow])?.max_over(&[2], false)?;
                g.expmap0(&v.reshape(&[n, c, oh, ow])?, 1)?
            }
            PoolKind::Avg => {
                let p = t.unfold2d(win, stride, (0, 0))?.reshape(&[n, c, k * k, oh * ow])?;
                let p = ManifoldTensor::trusted(p, self.manifold.clone(), 1);
                let mu = self.manifold.frechet_mean(&p, 2, None, false)?;
                mu.tensor().reshape(&[n, c, oh, ow])?
            }
        };
        Ok(ManifoldTensor::trusted(y, self.manifold.clone(), 1))
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
    fn euclidean_max() {
        let e = Manifold::euclidean();
        let x = ManifoldTensor::new(Tensor::from_vec(vec![1.0, 5.0, 3.0, 2.0], &[1, 1, 2, 2]).unwrap(), &e, 1).unwrap();
        assert_eq!(HPool2d::max(2, &e).forward(&x).unwrap().tensor().to_vec(), vec![5.0]);
    }

    #[test]
    fn avg_of_identical_points() {
        let b = Manifold::ball(1.0).unwrap();
        let data: Vec<f64> = [0.2; 4].into_iter().chain([-0.4; 4]).collect();
        let x = ManifoldTensor::new(Tensor::from_vec(data, &[1, 2, 2, 2]).unwrap(), &b, 1).unwrap();
        let y = HPool2d::avg(2, &b).forward(&x).unwrap().tensor().to_vec();
        assert!((y[0] - 0.2).abs() < 1e-12 && (y[1] + 0.4).abs() < 1e-12, "{y:?}");
    }

    #[test]
    fn avg_of_opposite_points_is_origin() {
        let b = Manifold::ball(1.0).unwrap();
        // channel 0 holds ±a, channel 1 holds 0: points (a,0) and (−a,0)
        let data = vec![0.5, -0.5, -0.5, 0.5, 0.0, 0.0, 0.0, 0.0];
        let x = ManifoldTensor::new(Tensor::from_vec(data, &[1, 2, 2, 2]).unwrap(), &b, 1).unwrap();
        let y = HPool2d::avg(2, &b).forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 2, 1, 1]);
        assert!(y.tensor().data().iter().all(|v| v.abs() < 1e-12));
    }
}
