//! Log-gamma and Beta values at half-integer arguments.

use std::f64::consts::PI;

/// `ln Γ(k/2)` for a positive integer `k`, by the exact recurrence
/// `Γ(x + 1) = x·Γ(x)` from `Γ(1) = 1` or `Γ(1/2) = √π`.
pub fn ln_gamma_half(k: usize) -> f64 {
    assert!(k > 0, "ln_gamma_half needs k >= 1");
    let (mut acc, mut x) = if k.is_multiple_of(2) {
        (0.0, 1.0)
    } else {
        (0.5 * PI.ln(), 0.5)
    };
    let target = k as f64 / 2.0;
    while x < target {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// `B(n/2, 1/2)`, the factor that rescales tangent blocks of dimension `n`
/// during concatenation.
pub fn beta_half(n: usize) -> f64 {
    (ln_gamma_half(n) + ln_gamma_half(1) - ln_gamma_half(n + 1)).exp()
}
