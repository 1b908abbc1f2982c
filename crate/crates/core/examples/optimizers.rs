//! Riemannian SGD and Adam moving a point on the ball towards a target by
//! minimising the squared geodesic distance. Every iterate stays inside.

use hypnn::nn::{NamedParam, Param};
use hypnn::optim::{Optimizer, RAdamConfig, RSgdConfig, RiemannianAdam, RiemannianSgd};
use hypnn::{Manifold, ManifoldParameter, ManifoldTensor, Result, Tensor};

fn descend(name: &str, ball: &Manifold, make: impl Fn(Vec<NamedParam>) -> Result<Box<dyn Optimizer>>) -> Result<()> {
    let p = ManifoldParameter::new(vec![-0.5, 0.2], &[2], ball, 0)?;
    let target = ManifoldTensor::new(Tensor::vector(&[0.7, 0.65]), ball, 0)?;
    let mut opt = make(vec![NamedParam::new("p", Param::Point(p.clone()))])?;
    for step in 0..=60 {
        opt.zero_grad();
        let loss = ball.dist(p.value(), &target)?.square();
        if step % 15 == 0 {
            let x = p.value().tensor().to_vec();
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            println!("{name:5} step {step:>2}  d² = {:.3e}  |x| = {r:.6}", loss.item()?);
        }
        loss.backward()?;
        opt.step()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let ball = Manifold::ball(1.0)?;
    descend("rsgd", &ball, |ps| Ok(Box::new(RiemannianSgd::new(ps, RSgdConfig::new(0.1).with_momentum(0.5))?)))?;
    descend("radam", &ball, |ps| Ok(Box::new(RiemannianAdam::new(ps, RAdamConfig::new(0.2))?)))?;
    Ok(())
}
