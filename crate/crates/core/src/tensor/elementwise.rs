use std::rc::Rc;

use super::{broadcast_index_map, broadcast_shape, Tensor};
use crate::error::{Error, Result};

/// Inputs to `artanh` are clamped to `[-ARTANH_LIMIT, ARTANH_LIMIT]`.
pub const ARTANH_LIMIT: f64 = 1.0 - 1e-10;

impl Tensor {
    fn binary<F, D>(&self, other: &Tensor, op: &'static str, f: F, df: D) -> Result<Tensor>
    where
        F: Fn(f64, f64) -> f64,
        D: Fn(f64, f64, f64) -> (f64, f64) + 'static,
    {
        let out_shape = broadcast_shape(self.shape(), other.shape())?;
        let n: usize = out_shape.iter().product();
        let same = self.shape() == other.shape();
        let (ia, ib): (Rc<Vec<usize>>, Rc<Vec<usize>>) = if same {
            (Rc::new(Vec::new()), Rc::new(Vec::new()))
        } else {
            (
                Rc::new(broadcast_index_map(self.shape(), &out_shape)),
                Rc::new(broadcast_index_map(other.shape(), &out_shape)),
            )
        };
        let data = {
            let a = self.data();
            let b = other.data();
            if same {
                a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect()
            } else {
                (0..n).map(|i| f(a[ia[i]], b[ib[i]])).collect::<Vec<_>>()
            }
        };
        let backward = Box::new(move |g: &[f64], out: &[f64], parents: &[Tensor]| {
            let a = parents[0].data();
            let b = parents[1].data();
            let want_a = parents[0].requires_grad();
            let want_b = parents[1].requires_grad();
            let mut ga = want_a.then(|| vec![0.0; a.len()]);
            let mut gb = want_b.then(|| vec![0.0; b.len()]);
            for i in 0..g.len() {
                let (ja, jb) = if same { (i, i) } else { (ia[i], ib[i]) };
                let (da, db) = df(a[ja], b[jb], out[i]);
                if let Some(ga) = ga.as_mut() {
                    ga[ja] += g[i] * da;
                }
                if let Some(gb) = gb.as_mut() {
                    gb[jb] += g[i] * db;
                }
            }
            vec![ga, gb]
        });
        Ok(Tensor::from_op(
            data,
            out_shape,
            op,
            vec![self.clone(), other.clone()],
            backward,
        ))
    }

    /// Elementwise map with a derivative `df(x, y)` expressed through the
    /// input `x` and the output `y`.
    pub(crate) fn map<F, D>(&self, op: &'static str, f: F, df: D) -> Tensor
    where
        F: Fn(f64) -> f64,
        D: Fn(f64, f64) -> f64 + 'static,
    {
        let data: Vec<f64> = self.data().iter().map(|&x| f(x)).collect();
        let backward = Box::new(move |g: &[f64], out: &[f64], parents: &[Tensor]| {
            let x = parents[0].data();
            let gx = g
                .iter()
                .zip(x.iter().zip(out))
                .map(|(&gi, (&xi, &yi))| gi * df(xi, yi))
                .collect();
            vec![Some(gx)]
        });
        Tensor::from_op(data, self.shape().to_vec(), op, vec![self.clone()], backward)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(other, "add", |a, b| a + b, |_, _, _| (1.0, 1.0))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(other, "sub", |a, b| a - b, |_, _, _| (1.0, -1.0))
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(other, "mul", |a, b| a * b, |a, b, _| (b, a))
    }

    /// Errors if any divisor is exactly zero.
    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        if other.data().contains(&0.0) {
            return Err(Error::DivisionByZero("div"));
        }
        self.binary(other, "div", |a, b| a / b, |_, b, y| (1.0 / b, -y / b))
    }

    /// Elementwise maximum; ties route the gradient to `self`.
    pub fn maximum(&self, other: &Tensor) -> Result<Tensor> {
        self.binary(
            other,
            "max",
            f64::max,
            |a, b, _| if a >= b { (1.0, 0.0) } else { (0.0, 1.0) },
        )
    }

    pub fn neg(&self) -> Tensor {
        self.map("neg", |x| -x, |_, _| -1.0)
    }

    pub fn add_scalar(&self, s: f64) -> Tensor {
        self.map("add_scalar", move |x| x + s, |_, _| 1.0)
    }

    pub fn mul_scalar(&self, s: f64) -> Tensor {
        self.map("mul_scalar", move |x| x * s, move |_, _| s)
    }

    /// `s - x`
    pub fn rsub_scalar(&self, s: f64) -> Tensor {
        self.map("rsub_scalar", move |x| s - x, |_, _| -1.0)
    }

    pub fn tanh(&self) -> Tensor {
        self.map("tanh", f64::tanh, |_, y| 1.0 - y * y)
    }

    /// Inverse hyperbolic tangent of the input clamped to
    /// `[-ARTANH_LIMIT, ARTANH_LIMIT]`.
    pub fn artanh(&self) -> Tensor {
        self.map(
            "artanh",
            |x| {
                let x = x.clamp(-ARTANH_LIMIT, ARTANH_LIMIT);
                0.5 * ((1.0 + x) / (1.0 - x)).ln()
            },
            |x, _| {
                if x.abs() > ARTANH_LIMIT {
                    0.0
                } else {
                    1.0 / (1.0 - x * x)
                }
            },
        )
    }

    pub fn asinh(&self) -> Tensor {
        self.map("asinh", f64::asinh, |x, _| 1.0 / (x * x + 1.0).sqrt())
    }

    pub fn sqrt(&self) -> Tensor {
        self.map("sqrt", f64::sqrt, |_, y| 0.5 / y)
    }

    pub fn exp(&self) -> Tensor {
        self.map("exp", f64::exp, |_, y| y)
    }

    pub fn ln(&self) -> Tensor {
        self.map("log", f64::ln, |x, _| 1.0 / x)
    }

    pub fn powf(&self, p: f64) -> Tensor {
        self.map("pow", move |x| x.powf(p), move |x, _| p * x.powf(p - 1.0))
    }

    pub fn square(&self) -> Tensor {
        self.map("square", |x| x * x, |x, _| 2.0 * x)
    }

    /// Gradient passes where `lo <= x <= hi`, zero elsewhere.
    pub fn clamp(&self, lo: f64, hi: f64) -> Tensor {
        self.map(
            "clamp",
            move |x| x.clamp(lo, hi),
            move |x, _| if x >= lo && x <= hi { 1.0 } else { 0.0 },
        )
    }

    pub fn clamp_min(&self, lo: f64) -> Tensor {
        self.clamp(lo, f64::INFINITY)
    }

    pub fn relu(&self) -> Tensor {
        self.map("relu", |x| x.max(0.0), |x, _| if x > 0.0 { 1.0 } else { 0.0 })
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(&self) -> Tensor {
        self.map("softplus", softplus, |x, _| sigmoid(x))
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
