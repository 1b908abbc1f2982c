//! Reverse-mode differentiation on plain tensors, checked against central
//! differences.

use hypnn::tensor::gradient_check;
use hypnn::{Result, Tensor};

fn main() -> Result<()> {
    let w = Tensor::parameter(vec![0.5, -1.0, 2.0, 0.25], &[2, 2])?;
    let x = Tensor::matrix(&[&[1.0, 2.0], &[3.0, 4.0]])?;

    // loss = Σ tanh(x·w)²
    let loss = x.matmul(&w)?.tanh().square().sum_all();
    loss.backward()?;
    println!("loss     = {:.6}", loss.item()?);
    println!("dloss/dw = {:?}", w.grad().unwrap());

    let worst = gradient_check(
        |w| Ok(x.matmul(w)?.tanh().square().sum_all()),
        &[0.5, -1.0, 2.0, 0.25],
        &[2, 2],
        1e-6,
    )?;
    println!("largest gradient-check error: {worst:.2e}");
    Ok(())
}
