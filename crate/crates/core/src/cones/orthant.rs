use crate::linalg::SymMatrix;

pub(super) fn eval(x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    let value = -x.iter().map(|v| v.ln()).sum::<f64>();
    let grad = x.iter().map(|v| -1.0 / v).collect();
    let hess = SymMatrix::from_diag(&x.iter().map(|v| 1.0 / (v * v)).collect::<Vec<_>>());
    (value, grad, hess)
}

pub(super) fn margin(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}
