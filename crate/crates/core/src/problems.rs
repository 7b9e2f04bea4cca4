//! Small standard problems used by the tests, the self-test and the CLI examples.

use crate::cones::ConeSpec;
use crate::hsd::ConicProblem;
use crate::linalg::DenseMatrix;

fn build(rows: &[Vec<f64>], b: Vec<f64>, c: Vec<f64>, cone: ConeSpec) -> ConicProblem {
    let a = DenseMatrix::from_rows(rows).expect("static problem data");
    ConicProblem::new(a, b, c, cone).expect("static problem data")
}

/// `min x₁ + 2x₂` s.t. `x₁ + x₂ = 1`, `x ≥ 0`. Optimum 1 at `(1, 0)`.
pub fn tiny_lp() -> ConicProblem {
    build(
        &[vec![1.0, 1.0]],
        vec![1.0],
        vec![1.0, 2.0],
        ConeSpec::NonnegOrthant(2),
    )
}

/// `x₁ = -1`, `x₁ ≥ 0`: primal infeasible.
pub fn infeasible_lp() -> ConicProblem {
    build(
        &[vec![1.0]],
        vec![-1.0],
        vec![1.0],
        ConeSpec::NonnegOrthant(1),
    )
}

/// `max x₃` over the exponential cone with `x₁ = x₂ = 1`, posed as
/// `min -x₃`. Optimum 0 at `x₃ = log(x₁/x₂) = 0`.
pub fn exp_problem() -> ConicProblem {
    build(
        &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![1.0, 1.0],
        vec![0.0, 0.0, -1.0],
        ConeSpec::Exponential,
    )
}

/// `min x₃` over the same set, which is unbounded below.
pub fn exp_unbounded() -> ConicProblem {
    build(
        &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![1.0, 1.0],
        vec![0.0, 0.0, 1.0],
        ConeSpec::Exponential,
    )
}

/// `max x₃` over the power cone with exponent 0.6 and `x₁ = x₂ = 1`, posed as
/// `min -x₃`. Optimum -1.
pub fn power_problem() -> ConicProblem {
    build(
        &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        vec![1.0, 1.0],
        vec![0.0, 0.0, -1.0],
        ConeSpec::Power(0.6),
    )
}

/// The three problems the verifier audit runs on, with their file stems.
pub fn standard_problems() -> Vec<(&'static str, ConicProblem)> {
    vec![
        ("lp", tiny_lp()),
        ("exp", exp_problem()),
        ("pow", power_problem()),
    ]
}
