//! Plain-array reference implementations used as independent oracles, and
//! small sampling helpers. Nothing here touches the autodiff engine.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Direction uniform on the sphere, norm uniform in `[lo, hi)`.
pub fn vector_with_norm(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let v = uniform(rng, d, -1.0, 1.0);
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            let r = rng.random_range(lo..hi);
            return v.iter().map(|x| x * r / n).collect();
        }
    }
}

/// `count` points in the ball of radius `radius / √c`, flattened row-major.
pub fn ball_points(rng: &mut ChaCha8Rng, count: usize, d: usize, c: f64, radius: f64) -> Vec<f64> {
    (0..count).flat_map(|_| vector_with_norm(rng, d, 0.0, radius / c.sqrt())).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `max |a − b| / max(|b|, floor)`.
pub fn max_rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
        .fold(0.0, f64::max)
}

/// Row-major `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// `y = x Wᵀ + b` for `x: N×in`, `w: out×in`.
pub fn linear(x: &Mat, w: &Mat, b: &[f64]) -> Mat {
    let mut y = Mat::zeros(x.rows, w.rows);
    for n in 0..x.rows {
        for o in 0..w.rows {
            let mut s = b[o];
            for i in 0..x.cols {
                s += x.at(n, i) * w.at(o, i);
            }
            y.data[n * w.rows + o] = s;
        }
    }
    y
}

/// Gradients of `linear` given `g = ∂L/∂y`: `(dx, dW, db)`.
pub fn linear_backward(x: &Mat, w: &Mat, g: &Mat) -> (Mat, Mat, Vec<f64>) {
    let mut dx = Mat::zeros(x.rows, x.cols);
    let mut dw = Mat::zeros(w.rows, w.cols);
    let mut db = vec![0.0; w.rows];
    for n in 0..x.rows {
        for o in 0..w.rows {
            let go = g.at(n, o);
            db[o] += go;
            for i in 0..x.cols {
                dw.data[o * w.cols + i] += go * x.at(n, i);
                dx.data[n * x.cols + i] += go * w.at(o, i);
            }
        }
    }
    (dx, dw, db)
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

pub fn relu_backward(x: &[f64], g: &[f64]) -> Vec<f64> {
    x.iter().zip(g).map(|(&v, &g)| if v > 0.0 { g } else { 0.0 }).collect()
}

/// Image batch `N×C×H×W`.
#[derive(Clone, Debug, PartialEq)]
pub struct Img {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Img {
    pub fn new(n: usize, c: usize, h: usize, w: usize, data: Vec<f64>) -> Self {
        assert_eq!(n * c * h * w, data.len());
        Self { n, c, h, w, data }
    }

    pub fn idx(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        ((n * self.c + c) * self.h + y) * self.w + x
    }

    pub fn get(&self, n: usize, c: usize, y: isize, x: isize) -> f64 {
        if y < 0 || x < 0 || y >= self.h as isize || x >= self.w as isize {
            0.0
        } else {
            self.data[self.idx(n, c, y as usize, x as usize)]
        }
    }
}

/// Direct cross-correlation with `weight[o][c][i][j]` stored as
/// `out × (C·k·k)`, channel-major.
pub fn conv2d(x: &Img, w: &Mat, b: &[f64], k: usize, stride: usize, pad: usize) -> Img {
    let oh = (x.h + 2 * pad - k) / stride + 1;
    let ow = (x.w + 2 * pad - k) / stride + 1;
    let outc = w.rows;
    let mut y = Img::new(x.n, outc, oh, ow, vec![0.0; x.n * outc * oh * ow]);
    for n in 0..x.n {
        for o in 0..outc {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut s = b[o];
                    for c in 0..x.c {
                        for i in 0..k {
                            for j in 0..k {
                                let yy = (oy * stride + i) as isize - pad as isize;
                                let xx = (ox * stride + j) as isize - pad as isize;
                                s += w.at(o, (c * k + i) * k + j) * x.get(n, c, yy, xx);
                            }
                        }
                    }
                    let at = y.idx(n, o, oy, ox);
                    y.data[at] = s;
                }
            }
        }
    }
    y
}

/// Gradients of an unpadded stride-1 `conv2d`: `(dx, dW, db)`.
pub fn conv2d_backward(x: &Img, w: &Mat, k: usize, g: &Img) -> (Img, Mat, Vec<f64>) {
    let mut dx = Img::new(x.n, x.c, x.h, x.w, vec![0.0; x.data.len()]);
    let mut dw = Mat::zeros(w.rows, w.cols);
    let mut db = vec![0.0; w.rows];
    for n in 0..x.n {
        for o in 0..g.c {
            for oy in 0..g.h {
                for ox in 0..g.w {
                    let go = g.data[g.idx(n, o, oy, ox)];
                    db[o] += go;
                    for c in 0..x.c {
                        for i in 0..k {
                            for j in 0..k {
                                let col = (c * k + i) * k + j;
                                let xi = x.idx(n, c, oy + i, ox + j);
                                dw.data[o * w.cols + col] += go * x.data[xi];
                                dx.data[xi] += go * w.at(o, col);
                            }
                        }
                    }
                }
            }
        }
    }
    (dx, dw, db)
}

/// Non-overlapping `k×k` max pooling; returns the output and, per output,
/// the flat index of the winning input (first maximum in row-major order).
pub fn max_pool(x: &Img, k: usize) -> (Img, Vec<usize>) {
    let (oh, ow) = (x.h / k, x.w / k);
    let mut y = Img::new(x.n, x.c, oh, ow, vec![0.0; x.n * x.c * oh * ow]);
    let mut arg = vec![0; y.data.len()];
    for n in 0..x.n {
        for c in 0..x.c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = x.idx(n, c, oy * k, ox * k);
                    for i in 0..k {
                        for j in 0..k {
                            let at = x.idx(n, c, oy * k + i, ox * k + j);
                            if x.data[at] > x.data[best] {
                                best = at;
                            }
                        }
                    }
                    let out = y.idx(n, c, oy, ox);
                    y.data[out] = x.data[best];
                    arg[out] = best;
                }
            }
        }
    }
    (y, arg)
}

pub fn max_pool_backward(x: &Img, arg: &[usize], g: &[f64]) -> Img {
    let mut dx = Img::new(x.n, x.c, x.h, x.w, vec![0.0; x.data.len()]);
    for (out, &src) in arg.iter().enumerate() {
        dx.data[src] += g[out];
    }
    dx
}

pub fn avg_pool(x: &Img, k: usize) -> Img {
    let (oh, ow) = (x.h / k, x.w / k);
    let mut y = Img::new(x.n, x.c, oh, ow, vec![0.0; x.n * x.c * oh * ow]);
    for n in 0..x.n {
        for c in 0..x.c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut s = 0.0;
                    for i in 0..k {
                        for j in 0..k {
                            s += x.data[x.idx(n, c, oy * k + i, ox * k + j)];
                        }
                    }
                    let out = y.idx(n, c, oy, ox);
                    y.data[out] = s / (k * k) as f64;
                }
            }
        }
    }
    y
}

/// `⟨x − p_k, a_k⟩` for every row of `x` and class `k`.
pub fn mlr(x: &Mat, p: &Mat, a: &Mat) -> Mat {
    let mut y = Mat::zeros(x.rows, p.rows);
    for n in 0..x.rows {
        for k in 0..p.rows {
            y.data[n * p.rows + k] = (0..x.cols).map(|d| (x.at(n, d) - p.at(k, d)) * a.at(k, d)).sum();
        }
    }
    y
}

/// Gradients of `mlr`: `(dx, dp, da)`.
pub fn mlr_backward(x: &Mat, p: &Mat, a: &Mat, g: &Mat) -> (Mat, Mat, Mat) {
    let mut dx = Mat::zeros(x.rows, x.cols);
    let mut dp = Mat::zeros(p.rows, p.cols);
    let mut da = Mat::zeros(a.rows, a.cols);
    for n in 0..x.rows {
        for k in 0..p.rows {
            let gk = g.at(n, k);
            for d in 0..x.cols {
                dx.data[n * x.cols + d] += gk * a.at(k, d);
                dp.data[k * p.cols + d] -= gk * a.at(k, d);
                da.data[k * a.cols + d] += gk * (x.at(n, d) - p.at(k, d));
            }
        }
    }
    (dx, dp, da)
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
pub fn cross_entropy(logits: &Mat, labels: &[usize]) -> (f64, Mat) {
    let n = logits.rows as f64;
    let mut loss = 0.0;
    let mut g = Mat::zeros(logits.rows, logits.cols);
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
        loss += m + z.ln() - row[label];
        for (k, v) in row.iter().enumerate() {
            let p = (v - m).exp() / z;
            g.data[r * logits.cols + k] = (p - if k == label { 1.0 } else { 0.0 }) / n;
        }
    }
    (loss / n, g)
}

/// Batch norm with one variance for the whole batch:
/// `β + γ (x − μ) / √(σ² + eps)` where `σ² = mean_i ‖xᵢ − μ‖²`.
pub fn batch_norm_scalar_var(x: &Mat, beta: &[f64], gamma: f64, eps: f64) -> Mat {
    let n = x.rows as f64;
    let mu: Vec<f64> = (0..x.cols).map(|d| (0..x.rows).map(|r| x.at(r, d)).sum::<f64>() / n).collect();
    let var = (0..x.rows)
        .map(|r| (0..x.cols).map(|d| (x.at(r, d) - mu[d]).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n;
    let s = gamma / (var + eps).sqrt();
    let data = (0..x.rows)
        .flat_map(|r| (0..x.cols).map(move |d| (r, d)))
        .map(|(r, d)| beta[d] + s * (x.at(r, d) - mu[d]))
        .collect();
    Mat::new(x.rows, x.cols, data)
}

/// Heavy-ball SGD as in common frameworks: `b ← μ b + g` (first step
/// `b = g`), `x ← x − lr b`.
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
    buf: Option<Vec<f64>>,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64) -> Self {
        Self { lr, momentum, buf: None }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        let b = match self.buf.take() {
            Some(mut b) if self.momentum > 0.0 => {
                for (bi, gi) in b.iter_mut().zip(g) {
                    *bi = self.momentum * *bi + gi;
                }
                b
            }
            _ => g.to_vec(),
        };
        for (xi, bi) in x.iter_mut().zip(&b) {
            *xi -= self.lr * bi;
        }
        self.buf = Some(b);
    }
}

/// Adam with bias correction.
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, len: usize) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            x[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

/// Gradients of a plain-array LeNet-style network (conv 5, ReLU, max-pool 2,
/// twice, then two ReLU fully connected layers and an MLR head), in the
/// parameter order `conv1 W, b, conv2 W, b, fc1 W, b, fc2 W, b, P, A`.
/// Returns the loss and the gradients.
pub fn lenet_loss_and_grad(params: &[Vec<f64>], shapes: &[Vec<usize>], images: &Img, labels: &[usize]) -> (f64, Vec<Vec<f64>>) {
    let mat = |i: usize| Mat::new(shapes[i][0], shapes[i][1], params[i].clone());
    let (w1, b1, w2, b2) = (mat(0), &params[1], mat(2), &params[3]);
    let (w3, b3, w4, b4) = (mat(4), &params[5], mat(6), &params[7]);
    let (p, a) = (mat(8), mat(9));
    let k = 5;

    let a1 = conv2d(images, &w1, b1, k, 1, 0);
    let r1 = Img { data: relu(&a1.data), ..a1.clone() };
    let (p1, arg1) = max_pool(&r1, 2);
    let a2 = conv2d(&p1, &w2, b2, k, 1, 0);
    let r2 = Img { data: relu(&a2.data), ..a2.clone() };
    let (p2, arg2) = max_pool(&r2, 2);
    let flat = Mat::new(p2.n, p2.c * p2.h * p2.w, p2.data.clone());
    let z3 = linear(&flat, &w3, b3);
    let h3 = Mat { data: relu(&z3.data), ..z3.clone() };
    let z4 = linear(&h3, &w4, b4);
    let h4 = Mat { data: relu(&z4.data), ..z4.clone() };
    let logits = mlr(&h4, &p, &a);
    let (loss, g) = cross_entropy(&logits, labels);

    let (dh4, dp, da) = mlr_backward(&h4, &p, &a, &g);
    let dz4 = Mat { data: relu_backward(&z4.data, &dh4.data), ..dh4 };
    let (dh3, dw4, db4) = linear_backward(&h3, &w4, &dz4);
    let dz3 = Mat { data: relu_backward(&z3.data, &dh3.data), ..dh3 };
    let (dflat, dw3, db3) = linear_backward(&flat, &w3, &dz3);
    let dr2 = max_pool_backward(&r2, &arg2, &dflat.data);
    let da2 = Img { data: relu_backward(&a2.data, &dr2.data), ..dr2 };
    let (dp1, dw2, db2) = conv2d_backward(&p1, &w2, k, &da2);
    let dr1 = max_pool_backward(&r1, &arg1, &dp1.data);
    let da1 = Img { data: relu_backward(&a1.data, &dr1.data), ..dr1 };
    let (_, dw1, db1) = conv2d_backward(images, &w1, k, &da1);
    let grads = vec![dw1.data, db1, dw2.data, db2, dw3.data, db3, dw4.data, db4, dp.data, da.data];
    (loss, grads)
}
