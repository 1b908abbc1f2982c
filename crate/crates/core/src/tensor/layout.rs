use std::rc::Rc;

use super::{broadcast_index_map, broadcast_shape, strides_of, Tensor};
use crate::error::{Error, Result};

/// Marks an output element that reads no input (zero padding).
const PAD: usize = usize::MAX;

impl Tensor {
    /// `out[i] = self[src[i]]`, or zero where `src[i] == PAD`. The backward
    /// pass scatters and accumulates through the same map.
    fn gather(&self, src: Vec<usize>, out_shape: Vec<usize>, op: &'static str) -> Tensor {
        let data = {
            let x = self.data();
            src.iter()
                .map(|&j| if j == PAD { 0.0 } else { x[j] })
                .collect()
        };
        let src = Rc::new(src);
        let n_in = self.numel();
        let backward = Box::new(move |g: &[f64], _: &[f64], _: &[Tensor]| {
            let mut gx = vec![0.0; n_in];
            for (&j, &gi) in src.iter().zip(g) {
                if j != PAD {
                    gx[j] += gi;
                }
            }
            vec![Some(gx)]
        });
        Tensor::from_op(data, out_shape, op, vec![self.clone()], backward)
    }

    /// Reinterprets the row-major buffer with a new shape.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        let n: usize = shape.iter().product();
        if n != self.numel() {
            return Err(Error::shape(format!(
                "cannot reshape {:?} into {:?}",
                self.shape(),
                shape
            )));
        }
        let data = self.to_vec();
        let backward = Box::new(|g: &[f64], _: &[f64], _: &[Tensor]| vec![Some(g.to_vec())]);
        Ok(Tensor::from_op(
            data,
            shape.to_vec(),
            "reshape",
            vec![self.clone()],
            backward,
        ))
    }

    /// Reorders axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&p| p >= rank || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::shape(format!(
                "{perm:?} is not a permutation of {rank} axes"
            )));
        }
        let in_strides = strides_of(self.shape());
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape()[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let n = self.numel();
        let mut src = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        let mut cur = 0usize;
        for _ in 0..n {
            src.push(cur);
            for d in (0..rank).rev() {
                idx[d] += 1;
                cur += strides[d];
                if idx[d] < out_shape[d] {
                    break;
                }
                cur -= strides[d] * out_shape[d];
                idx[d] = 0;
            }
        }
        Ok(self.gather(src, out_shape, "permute"))
    }

    pub fn transpose(&self, a: usize, b: usize) -> Result<Tensor> {
        let mut perm: Vec<usize> = (0..self.rank()).collect();
        if a >= perm.len() || b >= perm.len() {
            return Err(Error::shape(format!(
                "transpose axes ({a}, {b}) out of range for rank {}",
                self.rank()
            )));
        }
        perm.swap(a, b);
        self.permute(&perm)
    }

    /// Moves axis `from` to position `to`, keeping the others in order.
    pub fn move_axis(&self, from: usize, to: usize) -> Result<Tensor> {
        if from == to {
            return Ok(self.clone());
        }
        let mut perm: Vec<usize> = (0..self.rank()).filter(|&a| a != from).collect();
        if to > perm.len() {
            return Err(Error::shape("move_axis target out of range"));
        }
        perm.insert(to, from);
        self.permute(&perm)
    }

    /// Elements `start..end` along `axis`.
    pub fn slice(&self, axis: usize, start: usize, end: usize) -> Result<Tensor> {
        let shape = self.shape();
        if axis >= shape.len() || start > end || end > shape[axis] {
            return Err(Error::shape(format!(
                "slice {start}..{end} on axis {axis} of {shape:?}"
            )));
        }
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let len = end - start;
        let mut src = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            for k in start..end {
                let base = (o * shape[axis] + k) * inner;
                src.extend(base..base + inner);
            }
        }
        let mut out_shape = shape.to_vec();
        out_shape[axis] = len;
        Ok(self.gather(src, out_shape, "slice"))
    }

    /// Selects entries along `axis` by index; repeated indices are allowed.
    pub fn index_select(&self, axis: usize, indices: &[usize]) -> Result<Tensor> {
        let shape = self.shape();
        if axis >= shape.len() {
            return Err(Error::shape(format!("axis {axis} out of range")));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= shape[axis]) {
            return Err(Error::shape(format!(
                "index {bad} out of range for extent {}",
                shape[axis]
            )));
        }
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut src = Vec::with_capacity(outer * indices.len() * inner);
        for o in 0..outer {
            for &k in indices {
                let base = (o * shape[axis] + k) * inner;
                src.extend(base..base + inner);
            }
        }
        let mut out_shape = shape.to_vec();
        out_shape[axis] = indices.len();
        Ok(self.gather(src, out_shape, "index_select"))
    }

    pub fn broadcast_to(&self, shape: &[usize]) -> Result<Tensor> {
        let out = broadcast_shape(self.shape(), shape)?;
        if out != shape {
            return Err(Error::shape(format!(
                "cannot broadcast {:?} to {:?}",
                self.shape(),
                shape
            )));
        }
        let src = broadcast_index_map(self.shape(), shape);
        Ok(self.gather(src, out, "broadcast_to"))
    }

    /// Joins tensors along `axis`; all other extents must agree.
    pub fn concat(tensors: &[Tensor], axis: usize) -> Result<Tensor> {
        let first = tensors
            .first()
            .ok_or_else(|| Error::shape("concat of an empty list"))?;
        let rank = first.rank();
        if axis >= rank {
            return Err(Error::shape(format!("concat axis {axis} for rank {rank}")));
        }
        for t in tensors {
            let ok = t.rank() == rank
                && t
                    .shape()
                    .iter()
                    .zip(first.shape())
                    .enumerate()
                    .all(|(d, (a, b))| d == axis || a == b);
            if !ok {
                return Err(Error::shape(format!(
                    "concat: {:?} does not match {:?} off axis {axis}",
                    t.shape(),
                    first.shape()
                )));
            }
        }
        let outer: usize = first.shape()[..axis].iter().product();
        let inner: usize = first.shape()[axis + 1..].iter().product();
        let extents: Vec<usize> = tensors.iter().map(|t| t.shape()[axis]).collect();
        let total: usize = extents.iter().sum();
        let mut data = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for t in tensors {
                let chunk = t.shape()[axis] * inner;
                data.extend_from_slice(&t.data()[o * chunk..(o + 1) * chunk]);
            }
        }
        let mut out_shape = first.shape().to_vec();
        out_shape[axis] = total;
        let backward = Box::new(move |g: &[f64], _: &[f64], parents: &[Tensor]| {
            let mut grads: Vec<Vec<f64>> = parents.iter().map(|p| Vec::with_capacity(p.numel())).collect();
            let mut pos = 0;
            for _ in 0..outer {
                for (k, e) in extents.iter().enumerate() {
                    let chunk = e * inner;
                    grads[k].extend_from_slice(&g[pos..pos + chunk]);
                    pos += chunk;
                }
            }
            grads.into_iter().map(Some).collect()
        });
        Ok(Tensor::from_op(
            data,
            out_shape,
            "concat",
            tensors.to_vec(),
            backward,
        ))
    }

    /// Rank-2 matrix product.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 || self.shape()[1] != other.shape()[0] {
            return Err(Error::shape(format!(
                "matmul of {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let (m, k, n) = (self.shape()[0], self.shape()[1], other.shape()[1]);
        let data = matmul_raw(&self.data(), &other.data(), m, k, n);
        let backward = Box::new(move |g: &[f64], _: &[f64], parents: &[Tensor]| {
            let a = parents[0].data();
            let b = parents[1].data();
            // dA = G Bᵀ, dB = Aᵀ G
            let ga = parents[0].requires_grad().then(|| {
                let mut ga = vec![0.0; m * k];
                for i in 0..m {
                    let grow = &g[i * n..(i + 1) * n];
                    for p in 0..k {
                        let brow = &b[p * n..(p + 1) * n];
                        ga[i * k + p] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                    }
                }
                ga
            });
            let gb = parents[1].requires_grad().then(|| {
                let mut gb = vec![0.0; k * n];
                for i in 0..m {
                    for p in 0..k {
                        let aip = a[i * k + p];
                        if aip == 0.0 {
                            continue;
                        }
                        let row = &mut gb[p * n..(p + 1) * n];
                        for (r, &gij) in row.iter_mut().zip(&g[i * n..(i + 1) * n]) {
                            *r += aip * gij;
                        }
                    }
                }
                gb
            });
            vec![ga, gb]
        });
        Ok(Tensor::from_op(
            data,
            vec![m, n],
            "matmul",
            vec![self.clone(), other.clone()],
            backward,
        ))
    }

    /// Patch extraction for 2-D convolution.
    ///
    /// `N×C×H×W` becomes `N×(C·kh·kw)×L` with `L = out_h·out_w`. Rows are
    /// ordered channel first, then kernel row, then kernel column. Padding
    /// reads exact zeros.
    pub fn unfold2d(
        &self,
        kernel: (usize, usize),
        stride: (usize, usize),
        padding: (usize, usize),
    ) -> Result<Tensor> {
        if self.rank() != 4 {
            return Err(Error::shape(format!(
                "unfold2d expects N×C×H×W, got {:?}",
                self.shape()
            )));
        }
        let (n, c, h, w) = (self.shape()[0], self.shape()[1], self.shape()[2], self.shape()[3]);
        let (kh, kw) = kernel;
        let (sh, sw) = stride;
        let (ph, pw) = padding;
        if kh == 0 || kw == 0 || sh == 0 || sw == 0 {
            return Err(Error::shape("unfold2d: kernel and stride must be positive"));
        }
        if kh > h + 2 * ph || kw > w + 2 * pw {
            return Err(Error::shape(format!(
                "kernel {kh}×{kw} larger than padded input {}×{}",
                h + 2 * ph,
                w + 2 * pw
            )));
        }
        let out_h = (h + 2 * ph - kh) / sh + 1;
        let out_w = (w + 2 * pw - kw) / sw + 1;
        let l = out_h * out_w;
        let rows = c * kh * kw;
        let mut src = Vec::with_capacity(n * rows * l);
        for b in 0..n {
            for ch in 0..c {
                for i in 0..kh {
                    for j in 0..kw {
                        for oy in 0..out_h {
                            for ox in 0..out_w {
                                let y = (oy * sh + i) as isize - ph as isize;
                                let x = (ox * sw + j) as isize - pw as isize;
                                if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
                                    src.push(PAD);
                                } else {
                                    src.push(((b * c + ch) * h + y as usize) * w + x as usize);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(self.gather(src, vec![n, rows, l], "unfold2d"))
    }
}

/// Output spatial extent of a sliding window.
pub fn conv_output_size(input: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = input + 2 * padding;
    (kernel <= padded && stride > 0).then(|| (padded - kernel) / stride + 1)
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            for (cv, &bv) in crow.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                *cv += aip * bv;
            }
        }
    }
    c
}
