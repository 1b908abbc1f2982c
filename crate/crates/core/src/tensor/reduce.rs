use std::rc::Rc;

use super::{normalize_axis, strides_of, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceOp {
    Sum,
    Mean,
    /// Euclidean norm; its gradient at the zero vector is zero.
    Norm2,
    /// Gradient goes to the first maximal element.
    Max,
}

impl Tensor {
    pub fn reduce(&self, op: ReduceOp, dims: &[isize], keepdims: bool) -> Result<Tensor> {
        let rank = self.rank();
        let mut reduced = vec![false; rank];
        for &d in dims {
            let axis = normalize_axis(d, rank).map_err(|e| Error::Shape(e.to_string()))?;
            reduced[axis] = true;
        }
        let in_shape = self.shape().to_vec();
        let kept_shape: Vec<usize> = in_shape
            .iter()
            .zip(&reduced)
            .map(|(&s, &r)| if r { 1 } else { s })
            .collect();
        let out_shape: Vec<usize> = if keepdims {
            kept_shape.clone()
        } else {
            in_shape
                .iter()
                .zip(&reduced)
                .filter(|(_, &r)| !r)
                .map(|(&s, _)| s)
                .collect()
        };
        let out_n: usize = kept_shape.iter().product();
        let group: usize = in_shape
            .iter()
            .zip(&reduced)
            .filter(|(_, &r)| r)
            .map(|(&s, _)| s)
            .product();

        // Output slot for every input element.
        let kept_strides = strides_of(&kept_shape);
        let n = self.numel();
        let mut map = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        let mut cur = 0usize;
        for _ in 0..n {
            map.push(cur);
            for d in (0..rank).rev() {
                idx[d] += 1;
                if !reduced[d] {
                    cur += kept_strides[d];
                }
                if idx[d] < in_shape[d] {
                    break;
                }
                if !reduced[d] {
                    cur -= kept_strides[d] * in_shape[d];
                }
                idx[d] = 0;
            }
        }
        let map = Rc::new(map);

        let x = self.data();
        let mut out = match op {
            ReduceOp::Max => vec![f64::NEG_INFINITY; out_n],
            _ => vec![0.0; out_n],
        };
        let mut argmax = vec![usize::MAX; if op == ReduceOp::Max { out_n } else { 0 }];
        for (i, &o) in map.iter().enumerate() {
            match op {
                ReduceOp::Sum | ReduceOp::Mean => out[o] += x[i],
                ReduceOp::Norm2 => out[o] += x[i] * x[i],
                ReduceOp::Max => {
                    if x[i] > out[o] || argmax[o] == usize::MAX {
                        out[o] = x[i];
                        argmax[o] = i;
                    }
                }
            }
        }
        match op {
            ReduceOp::Mean => out.iter_mut().for_each(|v| *v /= group as f64),
            ReduceOp::Norm2 => out.iter_mut().for_each(|v| *v = v.sqrt()),
            _ => {}
        }
        drop(x);

        let name = match op {
            ReduceOp::Sum => "sum",
            ReduceOp::Mean => "mean",
            ReduceOp::Norm2 => "norm2",
            ReduceOp::Max => "reduce_max",
        };
        let backward = Box::new(move |g: &[f64], out: &[f64], parents: &[Tensor]| {
            let x = parents[0].data();
            let mut gx = vec![0.0; x.len()];
            match op {
                ReduceOp::Sum => {
                    for (i, &o) in map.iter().enumerate() {
                        gx[i] = g[o];
                    }
                }
                ReduceOp::Mean => {
                    let s = 1.0 / group as f64;
                    for (i, &o) in map.iter().enumerate() {
                        gx[i] = g[o] * s;
                    }
                }
                ReduceOp::Norm2 => {
                    for (i, &o) in map.iter().enumerate() {
                        if out[o] > 0.0 {
                            gx[i] = g[o] * x[i] / out[o];
                        }
                    }
                }
                ReduceOp::Max => {
                    for (o, &i) in argmax.iter().enumerate() {
                        if i != usize::MAX {
                            gx[i] += g[o];
                        }
                    }
                }
            }
            vec![Some(gx)]
        });
        Ok(Tensor::from_op(
            out,
            out_shape,
            name,
            vec![self.clone()],
            backward,
        ))
    }

    pub fn sum(&self, dims: &[isize], keepdims: bool) -> Result<Tensor> {
        self.reduce(ReduceOp::Sum, dims, keepdims)
    }

    pub fn mean(&self, dims: &[isize], keepdims: bool) -> Result<Tensor> {
        self.reduce(ReduceOp::Mean, dims, keepdims)
    }

    pub fn norm2(&self, dims: &[isize], keepdims: bool) -> Result<Tensor> {
        self.reduce(ReduceOp::Norm2, dims, keepdims)
    }

    pub fn max_over(&self, dims: &[isize], keepdims: bool) -> Result<Tensor> {
        self.reduce(ReduceOp::Max, dims, keepdims)
    }

    /// Sum of every element, as a rank-0 tensor.
    pub fn sum_all(&self) -> Tensor {
        let dims: Vec<isize> = (0..self.rank() as isize).collect();
        self.sum(&dims, false).expect("all axes are valid")
    }

    pub fn mean_all(&self) -> Tensor {
        let dims: Vec<isize> = (0..self.rank() as isize).collect();
        self.mean(&dims, false).expect("all axes are valid")
    }

    /// `<self, other>` along `dim`, kept as an axis of extent 1.
    pub fn dot(&self, other: &Tensor, dim: usize) -> Result<Tensor> {
        self.mul(other)?.sum(&[dim as isize], true)
    }

    /// Squared norm along `dim`, kept as an axis of extent 1.
    pub fn sq_norm(&self, dim: usize) -> Result<Tensor> {
        self.square().sum(&[dim as isize], true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::gradient_check;

    #[test]
    fn sum_and_norm() {
        let x = Tensor::vector(&[1.0, 2.0, 3.0]);
        assert_eq!(x.sum_all().item().unwrap(), 6.0);
        let y = Tensor::vector(&[3.0, 4.0]);
        assert_eq!(y.norm2(&[0], false).unwrap().item().unwrap(), 5.0);
    }

    #[test]
    fn mean_gradient_is_one_over_n() {
        let x = Tensor::parameter(vec![1.0, 5.0, -2.0, 0.0], &[4]).unwrap();
        x.mean_all().backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn norm_gradient_at_zero_is_zero() {
        let x = Tensor::parameter(vec![0.0, 0.0], &[2]).unwrap();
        x.norm2(&[0], false).unwrap().backward().unwrap();
        assert_eq!(x.grad().unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn reduce_along_axis_keepdims() {
        let x = Tensor::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[2, 3]).unwrap();
        let s = x.sum(&[1], true).unwrap();
        assert_eq!(s.shape(), &[2, 1]);
        assert_eq!(s.to_vec(), vec![6.0, 15.0]);
        let s = x.sum(&[0], false).unwrap();
        assert_eq!(s.shape(), &[3]);
        assert_eq!(s.to_vec(), vec![5.0, 7.0, 9.0]);
        let m = x.max_over(&[-1], false).unwrap();
        assert_eq!(m.to_vec(), vec![3.0, 6.0]);
    }

    #[test]
    fn invalid_axis_errors() {
        let x = Tensor::zeros(&[2, 3]);
        assert!(matches!(x.sum(&[2], false), Err(Error::Shape(_))));
    }

    #[test]
    fn reduce_gradients() {
        let x0 = [0.3, -0.2, 0.5, 0.1, 0.7, -0.4];
        let w = Tensor::from_vec(vec![1.0, -2.0, 0.5], &[3]).unwrap();
        for op in [ReduceOp::Sum, ReduceOp::Mean, ReduceOp::Norm2, ReduceOp::Max] {
            let err = gradient_check(
                |x| Ok(x.reduce(op, &[0], false)?.mul(&w)?.sum_all()),
                &x0,
                &[2, 3],
                1e-6,
            )
            .unwrap();
            assert!(err < 1e-6, "{op:?}: {err}");
        }
    }
}
