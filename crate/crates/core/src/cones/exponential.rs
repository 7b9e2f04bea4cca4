//! `K_exp = cl{x : x₁ ≥ x₂ exp(x₃/x₂), x₂ > 0}` with the barrier
//! `-log(x₂ log(x₁/x₂) - x₃) - log x₁ - log x₂`.

use crate::linalg::SymMatrix;

pub(super) fn eval(x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let l = (x1 / x2).ln();
    let psi = x2 * l - x3;
    let dpsi = [x2 / x1, l - 1.0, -1.0];
    let value = -psi.ln() - x1.ln() - x2.ln();
    let diag = [1.0 / x1, 1.0 / x2, 0.0];
    let grad = (0..3).map(|i| -dpsi[i] / psi - diag[i]).collect();

    let mut hpsi = SymMatrix::zeros(3);
    hpsi.set(0, 0, -x2 / (x1 * x1));
    hpsi.set(1, 0, 1.0 / x1);
    hpsi.set(1, 1, -1.0 / x2);
    let hess = SymMatrix::from_fn(3, |i, j| {
        let d = if i == j { diag[i] * diag[i] } else { 0.0 };
        dpsi[i] * dpsi[j] / (psi * psi) - hpsi.get(i, j) / psi + d
    });
    (value, grad, hess)
}

pub(super) fn margin(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    if x1 <= 0.0 || x2 <= 0.0 {
        return x1.min(x2);
    }
    x1.min(x2).min(x2 * (x1 / x2).ln() - x3)
}

/// Dual cone `{s : s₁ ≥ -s₃ exp(s₂/s₃ - 1), s₃ < 0}`, tested in the
/// equivalent log form `s₂ + r + r log(s₁/r) ≥ 0` with `r = -s₃`.
pub(super) fn dual_margin(s: &[f64]) -> f64 {
    let (s1, s2, r) = (s[0], s[1], -s[2]);
    if s1 <= 0.0 || r <= 0.0 {
        return s1.min(r);
    }
    s1.min(r).min(s2 + r + r * (s1 / r).ln())
}
