//! `K_a = {x : x₁^a x₂^(1-a) ≥ |x₃|, x₁, x₂ ≥ 0}` with the barrier
//! `-log(x₁^(2a) x₂^(2-2a) - x₃²) - (1-a) log x₁ - a log x₂`.

use crate::linalg::SymMatrix;

pub(super) fn eval(a: f64, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let b = 2.0 - 2.0 * a;
    let p = (2.0 * a * x1.ln() + b * x2.ln()).exp();
    let psi = p - x3 * x3;
    let dpsi = [2.0 * a * p / x1, b * p / x2, -2.0 * x3];
    let value = -psi.ln() - (1.0 - a) * x1.ln() - a * x2.ln();
    let lin = [(1.0 - a) / x1, a / x2, 0.0];
    let grad = (0..3).map(|i| -dpsi[i] / psi - lin[i]).collect();

    let mut hpsi = SymMatrix::zeros(3);
    hpsi.set(0, 0, 2.0 * a * (2.0 * a - 1.0) * p / (x1 * x1));
    hpsi.set(1, 0, 2.0 * a * b * p / (x1 * x2));
    hpsi.set(1, 1, b * (b - 1.0) * p / (x2 * x2));
    hpsi.set(2, 2, -2.0);
    let quad = [(1.0 - a) / (x1 * x1), a / (x2 * x2), 0.0];
    let hess = SymMatrix::from_fn(3, |i, j| {
        let d = if i == j { quad[i] } else { 0.0 };
        dpsi[i] * dpsi[j] / (psi * psi) - hpsi.get(i, j) / psi + d
    });
    (value, grad, hess)
}

pub(super) fn margin(a: f64, x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x1 <= 0.0 || x2 <= 0.0 {
        return x1.min(x2);
    }
    let p = (2.0 * a * x1.ln() + (2.0 - 2.0 * a) * x2.ln()).exp();
    x1.min(x2).min(p - x3 * x3)
}

/// Dual cone `{s : (s₁/a)^a (s₂/(1-a))^(1-a) ≥ |s₃|}`, squared like the primal.
pub(super) fn dual_margin(a: f64, s: &[f64]) -> f64 {
    let (s1, s2, s3) = (s[0], s[1], s[2]);
    if s1 <= 0.0 || s2 <= 0.0 {
        return s1.min(s2);
    }
    let p = (2.0 * a * (s1 / a).ln() + (2.0 - 2.0 * a) * (s2 / (1.0 - a)).ln()).exp();
    s1.min(s2).min(p - s3 * s3)
}
