use super::Tensor;
use crate::error::{Error, Result};

/// Central differences `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h` of a scalar function.
pub fn numeric_gradient<F>(f: F, x0: &[f64], shape: &[usize], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&Tensor) -> Result<Tensor>,
{
    let mut x = x0.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = f(&Tensor::from_vec(x.clone(), shape)?)?.item()?;
        x[i] = orig - h;
        let minus = f(&Tensor::from_vec(x.clone(), shape)?)?.item()?;
        x[i] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Largest relative disagreement between the backward gradient of `f` at
/// `x0` and central finite differences with step `h`.
///
/// Each coordinate's error is `|analytic − numeric| / max(|analytic|, |numeric|, 1e-3)`,
/// so gradients that vanish are compared on an absolute scale.
pub fn gradient_check<F>(f: F, x0: &[f64], shape: &[usize], h: f64) -> Result<f64>
where
    F: Fn(&Tensor) -> Result<Tensor>,
{
    let x = Tensor::parameter(x0.to_vec(), shape)?;
    let loss = f(&x)?;
    loss.backward()?;
    let analytic = x.grad().unwrap_or_else(|| vec![0.0; x0.len()]);
    let numeric = numeric_gradient(&f, x0, shape, h)?;
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(&numeric) {
        if !a.is_finite() || !n.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient (analytic {a}, numeric {n})"
            )));
        }
        let scale = a.abs().max(n.abs()).max(1e-3);
        worst = worst.max((a - n).abs() / scale);
    }
    Ok(worst)
}
