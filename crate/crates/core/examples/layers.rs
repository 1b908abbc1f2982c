//! A small hyperbolic network: linear map, activation, batch norm and an MLR
//! head, trained for a few steps on two clusters.

use hypnn::nn::{cross_entropy, lift_to_manifold, HBatchNorm, HLinear, HMlr, HReLU, Module, ParamInit, Sequential};
use hypnn::optim::{Optimizer, RAdamConfig, RiemannianAdam};
use hypnn::{Manifold, Result, Tensor};

fn main() -> Result<()> {
    let ball = Manifold::ball(1.0)?;
    let mut init = ParamInit::new(3);
    let body = Sequential::new(&ball)
        .with(HLinear::new(2, 8, &ball, &mut init)?)?
        .with(HReLU::new(&ball))?
        .with(HBatchNorm::new(8, &ball)?)?;
    let head = HMlr::new(8, 2, &ball, &mut init)?;

    let inputs = Tensor::from_vec(vec![1.0, 1.2, 0.8, 1.1, -1.0, -0.9, -1.2, -0.7], &[4, 2])?;
    let labels = [0, 0, 1, 1];

    let mut params = body.parameters();
    params.extend(head.parameters());
    let mut opt = RiemannianAdam::new(params, RAdamConfig::new(0.05))?;
    for step in 1..=20 {
        opt.zero_grad();
        let x = lift_to_manifold(&inputs, &ball, 1)?;
        let loss = cross_entropy(&head.forward(&body.forward(&x)?)?, &labels)?;
        loss.backward()?;
        opt.step()?;
        if step % 5 == 0 {
            println!("step {step:>2}  loss {:.5}", loss.item()?);
        }
    }
    Ok(())
}
