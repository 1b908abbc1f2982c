//! Gyrovector operations on the Poincaré ball and how they flatten out as the
//! curvature goes to zero.

use hypnn::{Manifold, ManifoldTensor, Result, TangentTensor, Tensor};

fn point(m: &Manifold, v: &[f64]) -> Result<ManifoldTensor> {
    ManifoldTensor::new(Tensor::vector(v), m, 0)
}

fn main() -> Result<()> {
    let ball = Manifold::ball(1.0)?;
    let x = point(&ball, &[0.3, -0.2])?;
    let y = point(&ball, &[-0.1, 0.6])?;

    let sum = ball.mobius_add(&x, &y)?;
    println!("x ⊕ y        = {:?}", sum.tensor().to_vec());
    println!("d(x, y)      = {:.6}", ball.dist(&x, &y)?.item()?);

    let v = ball.logmap(Some(&x), &y)?;
    let back = ball.expmap(&v)?;
    println!("exp_x(log_x y) = {:?}", back.tensor().to_vec());

    let w = TangentTensor::new(Tensor::vector(&[0.4, 0.1]), &ball, Some(x.clone()), 0)?;
    let moved = ball.transp(&w, &y)?;
    println!("transported  = {:?}", moved.tensor().to_vec());

    // Distances approach twice the Euclidean distance as c -> 0.
    let flat = 2.0 * ((0.3f64 + 0.1).powi(2) + (-0.2f64 - 0.6).powi(2)).sqrt();
    for c in [1.0, 1e-2, 1e-4, 1e-6] {
        let m = Manifold::ball(c)?;
        let d = m.dist(&point(&m, &[0.3, -0.2])?, &point(&m, &[-0.1, 0.6])?)?.item()?;
        println!("c = {c:<6e}  d = {d:.8}  (flat limit {flat:.8})");
    }
    Ok(())
}
