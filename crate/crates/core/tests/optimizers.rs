mod common;

use hypnn::nn::{NamedParam, Param};
use hypnn::optim::{Optimizer, RAdamConfig, RSgdConfig, RiemannianAdam, RiemannianSgd};
use hypnn::{Curvature, Manifold, ManifoldParameter, ManifoldTensor, Tensor};

const TARGET: [f64; 4] = [0.6, -0.3, -0.2, 0.5];

fn points(m: &Manifold) -> ManifoldParameter {
    ManifoldParameter::new(vec![-0.4, 0.1, 0.3, -0.2], &[2, 2], m, 1).unwrap()
}

fn loss(m: &Manifold, p: &ManifoldParameter) -> Tensor {
    let target = ManifoldTensor::new(Tensor::from_vec(TARGET.to_vec(), &[2, 2]).unwrap(), m, 1).unwrap();
    m.dist(p.value(), &target).unwrap().square().sum_all()
}

fn step(m: &Manifold, p: &ManifoldParameter, opt: &mut dyn Optimizer) {
    opt.zero_grad();
    loss(m, p).backward().unwrap();
    opt.step().unwrap();
}

#[test]
fn restored_state_continues_bit_for_bit() {
    let m = Manifold::ball(0.8).unwrap();
    let a = points(&m);
    let mut opt_a = RiemannianAdam::new(vec![NamedParam::new("p", Param::Point(a.clone()))], RAdamConfig::new(0.05)).unwrap();
    for _ in 0..5 {
        step(&m, &a, &mut opt_a);
    }

    let b = points(&m);
    b.assign(a.value().tensor().to_vec()).unwrap();
    let mut opt_b = RiemannianAdam::new(vec![NamedParam::new("p", Param::Point(b.clone()))], RAdamConfig::new(0.05)).unwrap();
    opt_b.load_state(opt_a.state()).unwrap();

    for _ in 0..5 {
        step(&m, &a, &mut opt_a);
        step(&m, &b, &mut opt_b);
    }
    let (xa, xb) = (a.value().tensor().to_vec(), b.value().tensor().to_vec());
    assert!(xa.iter().zip(&xb).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn state_for_another_layout_is_rejected() {
    let m = Manifold::ball(1.0).unwrap();
    let p = points(&m);
    let mut opt = RiemannianSgd::new(vec![NamedParam::new("p", Param::Point(p.clone()))], RSgdConfig::new(0.1).with_momentum(0.9)).unwrap();
    step(&m, &p, &mut opt);
    let mut state = opt.state();
    state[0].name = "q".into();
    assert!(opt.load_state(state).is_err());
    let mut state = opt.state();
    state[0].momentum = Some(vec![0.0; 3]);
    assert!(opt.load_state(state).is_err());
}

#[test]
fn dropping_an_optimizer_releases_its_parameters() {
    let m = Manifold::ball(1.0).unwrap();
    let p = points(&m);
    let named = || vec![NamedParam::new("p", Param::Point(p.clone()))];
    let first = RiemannianSgd::new(named(), RSgdConfig::new(0.1)).unwrap();
    assert!(RiemannianAdam::new(named(), RAdamConfig::new(0.1)).is_err());
    drop(first);
    assert!(RiemannianAdam::new(named(), RAdamConfig::new(0.1)).is_ok());
}

#[test]
fn learnable_curvature_gradient_matches_differences() {
    let value = |raw: f64| {
        let m = Manifold::poincare_ball(Curvature::from_raw(raw, false));
        loss(&m, &points(&m)).item().unwrap()
    };
    let raw = 0.3;
    let m = Manifold::poincare_ball(Curvature::from_raw(raw, true));
    loss(&m, &points(&m)).backward().unwrap();
    let analytic = m.curvature().unwrap().raw().grad().unwrap()[0];
    let h = 1e-6;
    let numeric = (value(raw + h) - value(raw - h)) / (2.0 * h);
    assert!((analytic - numeric).abs() < 1e-6 * (1.0 + numeric.abs()), "{analytic} vs {numeric}");
}

#[test]
fn many_steps_stay_inside_the_ball() {
    let m = Manifold::ball(2.0).unwrap();
    let p = points(&m);
    let mut opt = RiemannianAdam::new(vec![NamedParam::new("p", Param::Point(p.clone()))], RAdamConfig::new(0.5)).unwrap();
    for _ in 0..200 {
        opt.zero_grad();
        // Pushes every coordinate outwards without bound.
        p.value().tensor().sum_all().neg().backward().unwrap();
        opt.step().unwrap();
        let x = p.value().tensor().to_vec();
        for row in x.chunks(2) {
            assert!(2f64.sqrt() * common::norm(row) < 1.0);
        }
    }
}
