use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::nn::{NamedParam, Param, ParamInit};
use crate::tensor::Tensor;
use crate::tensors::{ManifoldParameter, ManifoldTensor, OnManifold};

/// Multinomial logistic regression over gyroplanes.
///
/// Class `k` has a point `p_k` on the manifold and a Euclidean normal `a_k`;
/// its logit is the signed, scaled distance of `x` to that hyperplane. On
/// the Euclidean manifold the logit is `⟨x − p_k, a_k⟩`.
pub struct HMlr {
    points: ManifoldParameter,
    normals: Tensor,
    manifold: Manifold,
}

impl HMlr {
    pub fn new(features: usize, classes: usize, manifold: &Manifold, init: &mut ParamInit) -> Result<Self> {
        if classes < 2 {
            return Err(Error::Config(format!("classification needs at least 2 classes, got {classes}")));
        }
        let points = init.points(&[classes, features], manifold, 1)?;
        let normals = init.uniform(&[classes, features], features)?;
        Ok(Self {
            points,
            normals,
            manifold: manifold.clone(),
        })
    }

    pub fn from_parts(points: ManifoldParameter, normals: Tensor, manifold: &Manifold) -> Self {
        Self {
            points,
            normals: normals.requires_grad_leaf(),
            manifold: manifold.clone(),
        }
    }

    pub fn classes(&self) -> usize {
        self.normals.shape()[0]
    }

    /// `N×D` points to `N×K` logits.
    pub fn forward(&self, x: &ManifoldTensor) -> Result<Tensor> {
        self.manifold.mlr_logits(x, self.points.value(), &self.normals)
    }

    pub fn parameters(&self) -> Vec<NamedParam> {
        vec![
            NamedParam::new("points", Param::Point(self.points.clone())),
            NamedParam::new("normals", Param::Euclidean(self.normals.clone())),
        ]
    }

    pub fn manifold(&self) -> &Manifold {
        self.points.manifold()
    }
}

/// Mean of `−log softmax(logits)[label]` over the rows of an `N×K` tensor.
pub fn cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<Tensor> {
    if logits.rank() != 2 || logits.shape()[0] != labels.len() {
        return Err(Error::shape(format!(
            "logits {:?} do not match {} labels",
            logits.shape(),
            labels.len()
        )));
    }
    let k = logits.shape()[1];
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::Data(format!("label {bad} outside [0, {k})")));
    }
    // Shifting by the (constant) row maximum keeps exp finite.
    let shift = logits.detach().max_over(&[1], true)?;
    let z = logits.sub(&shift)?;
    let lse = z.exp().sum(&[1], true)?.ln();
    let mut onehot = vec![0.0; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        onehot[i * k + l] = 1.0;
    }
    let onehot = Tensor::from_vec(onehot, logits.shape())?;
    let picked = z.mul(&onehot)?.sum(&[1], true)?;
    lse.sub(&picked)?.mean_all().reshape(&[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::gradient_check;

    #[test]
    fn uniform_logits() {
        let l = Tensor::zeros(&[3, 4]);
        let ce = cross_entropy(&l, &[0, 1, 3]).unwrap().item().unwrap();
        assert!((ce - 4f64.ln()).abs() < 1e-15);
        assert!(cross_entropy(&l, &[0, 1, 4]).is_err());
    }

    #[test]
    fn logit_vanishes_at_hyperplane_point() {
        let b = Manifold::ball(1.0).unwrap();
        let p = ManifoldParameter::new(vec![0.2, -0.1, 0.0, 0.3], &[2, 2], &b, 1).unwrap();
        let head = HMlr::from_parts(p, Tensor::matrix(&[&[1.0, 0.5], &[-0.3, 0.2]]).unwrap(), &b);
        let x = ManifoldTensor::new(Tensor::matrix(&[&[0.2, -0.1]]).unwrap(), &b, 1).unwrap();
        assert!(head.forward(&x).unwrap().to_vec()[0].abs() < 1e-14);
    }

    #[test]
    fn cross_entropy_gradient() {
        let f = |x: &Tensor| cross_entropy(&x.reshape(&[2, 3])?, &[2, 0]);
        let err = gradient_check(f, &[0.3, -1.0, 2.0, 0.5, 0.1, -0.4], &[6], 1e-6).unwrap();
        assert!(err < 1e-7, "{err}");
    }
}
