//! The primal-dual scaling matrix `W` with `Wx = s`, `Wx̃ = s̃`, and the
//! closed-form Loewner bounds that sandwich it between the scaled primal and
//! dual Hessians.

use serde::{Deserialize, Serialize};

use crate::cones::BarrierEval;
use crate::error::{Error, Result};
use crate::hsd::PathQuantities;
use crate::linalg::{
    cholesky, congruence_eigenvalues, dot, sym_eigenvalues, CholeskyFactor, SymMatrix,
};

/// Largest `‖δᴾ‖_x` for which the sandwich bounds are defined.
pub const ANALYSIS_LIMIT: f64 = 0.18226;

const EIGEN_SLACK: f64 = 1e-9;

/// Multiple of the first-order rounding estimates allowed on eigenvalue bounds.
pub const ROUNDING_SAFETY: f64 = 16.0;

#[derive(Debug, Clone)]
pub struct ScalingMatrix {
    pub w: SymMatrix,
    pub factor: CholeskyFactor,
    /// The rank-two correction was dropped, because a denominator vanished or
    /// because its rounding error would exceed the error of dropping it.
    pub degenerate_fallback: bool,
    /// First-order estimate of the rounding error of `W`, as a relative
    /// eigenvalue perturbation against `μF''(x)`.
    pub rounding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichBounds {
    pub eps1: f64,
    pub eps2: f64,
    pub l_p: f64,
    pub u_p: f64,
    pub l_d: f64,
    pub u_d: f64,
}

/// `H = μF''(x) + ssᵀ/(νμ) - μs̃s̃ᵀ/ν`, the part of `W` that is well defined on
/// the central path.
fn rank_two_base(s: &[f64], pq: &PathQuantities, be: &BarrierEval) -> SymMatrix {
    let (mu, nu) = (pq.mu, be.nu);
    let mut h = be.hessian.scaled(mu);
    h.add_outer(1.0 / (nu * mu), s);
    h.add_outer(-mu / nu, &pq.s_tilde);
    h
}

/// `‖x̃‖²_x - νμ̃²`
fn shadow_gram(pq: &PathQuantities, be: &BarrierEval) -> f64 {
    be.hessian.quad_form(&pq.x_tilde) - be.nu * pq.mu_tilde * pq.mu_tilde
}

fn is_degenerate(pq: &PathQuantities, be: &BarrierEval) -> bool {
    let d1 = dot(&pq.delta_p, &pq.delta_d);
    !(d1.abs() >= 1e-24 * pq.mu * pq.mu) || !(shadow_gram(pq, be) >= 1e-24)
}

/// Builds `W = H + δᴰδᴰᵀ/⟨δᴾ,δᴰ⟩ - μggᵀ/(‖x̃‖²_x - νμ̃²)` with
/// `g = F''(x)x̃ - μ̃s̃`.
///
/// Since `Hδᴾ = -μ²g` and `⟨δᴾ, Hδᴾ⟩ = μ³(‖x̃‖²_x - νμ̃²)`, the last term equals
/// `HδᴾδᴾᵀH/⟨δᴾ, Hδᴾ⟩`, which is how it is evaluated: the update then maps
/// `δᴾ` to `δᴰ` exactly and keeps `Wx = s` free of cancellation in `g`.
///
/// Both update vectors are orthogonal to `x` in exact arithmetic. Their
/// computed `x`-components are rounding of size `εμν`, which near the
/// central path the small denominators would amplify into `Wx ≠ s`, so they
/// are projected out along `s`.
pub fn build_scaling(
    x: &[f64],
    s: &[f64],
    pq: &PathQuantities,
    be: &BarrierEval,
) -> Result<ScalingMatrix> {
    if x.len() != s.len() || x.len() != be.hessian.dim() {
        return Err(Error::DimensionMismatch("scaling inputs".into()));
    }
    let mu = pq.mu;
    let mut w = rank_two_base(s, pq, be);
    let hess = cholesky(&be.hessian)?;
    let dual = |q: &[f64]| dot(q, &hess.solve(q)).max(0.0).sqrt();
    // Absolute errors of δᴾ and δᴰ in the local norms.
    let e_p = pq.delta_p_rounding;
    let e_d = pq.delta_d_rounding * mu;
    let base_rounding = f64::EPSILON
        * (dual(s).powi(2) / (be.nu * mu * mu) + dual(&pq.s_tilde).powi(2) / be.nu + 1.0);

    let mut rounding = base_rounding;
    let mut degenerate_fallback = is_degenerate(pq, be);
    if !degenerate_fallback {
        let xs = dot(x, s);
        let orthogonal = |v: &[f64]| -> Vec<f64> {
            let c = dot(v, x) / xs;
            v.iter().zip(s).map(|(a, b)| a - c * b).collect()
        };
        let u = orthogonal(&pq.delta_d);
        let v = orthogonal(&w.mul_vec(&pq.delta_p));
        let d1 = dot(&pq.delta_p, &u);
        let d2 = dot(&pq.delta_p, &v);
        let (nu_, nv, np) = (dual(&u), dual(&v), pq.delta_p_norm_x);
        let err_d1 = e_p * nu_ + np * e_d;
        let err_d2 = e_p * nv + np * mu * e_p;
        let correction = (2.0 * e_d * nu_ / d1.abs()
            + nu_ * nu_ * err_d1 / (d1 * d1)
            + 2.0 * mu * e_p * nv / d2.abs()
            + nv * nv * err_d2 / (d2 * d2))
            / mu;
        // Dropping the correction perturbs the eigenvalues by about d/√ν.
        if correction.is_finite() && correction < 0.5 * np / be.nu.sqrt() {
            w.add_outer(1.0 / d1, &u);
            w.add_outer(-1.0 / d2, &v);
            rounding += correction;
        } else {
            degenerate_fallback = true;
        }
    }
    let factor = cholesky(&w)?;
    Ok(ScalingMatrix {
        w,
        factor,
        degenerate_fallback,
        rounding,
    })
}

/// The five-term expression evaluated as written, without the update form.
pub fn scaling_matrix_direct(s: &[f64], pq: &PathQuantities, be: &BarrierEval) -> SymMatrix {
    let mu = pq.mu;
    let mut w = rank_two_base(s, pq, be);
    if is_degenerate(pq, be) {
        return w;
    }
    let hx = be.hessian.mul_vec(&pq.x_tilde);
    let g: Vec<f64> = hx
        .iter()
        .zip(&pq.s_tilde)
        .map(|(a, b)| a - pq.mu_tilde * b)
        .collect();
    w.add_outer(1.0 / dot(&pq.delta_p, &pq.delta_d), &pq.delta_d);
    w.add_outer(-mu / shadow_gram(pq, be), &g);
    w
}

/// `ε₁, ε₂` and the resulting `l/u` bounds at `d = ‖δᴾ‖_x`.
pub fn sandwich_bounds(d: f64, nu: f64) -> Result<SandwichBounds> {
    if !(0.0..=ANALYSIS_LIMIT).contains(&d) {
        return Err(Error::OutOfAnalysisRegion {
            delta: d,
            limit: ANALYSIS_LIMIT,
        });
    }
    let c = (1.0 - d).powi(3);
    let q = d * d / c;
    let eps1 = (d + q) * (d + q + 2.0 * nu.sqrt()) / nu;
    // (3q + d)² / (d (1 - 3d/c)) with the factor d cancelled
    let ratio = d * (3.0 * d / c + 1.0).powi(2) / (1.0 - 3.0 * d / c);
    let eps2 = 2.0 / (c - d) * (4.0 * q + 2.0 * d + ratio);
    let l_p = 1.0 - eps1 - eps2;
    let u_p = 1.0 + eps1 + eps2;
    let shrink = (1.0 - d) * (1.0 - d);
    Ok(SandwichBounds {
        eps1,
        eps2,
        l_p,
        u_p,
        l_d: l_p * shrink,
        u_d: u_p / shrink,
    })
}

/// Extreme generalized eigenvalues of `W` against `μF''(x)` and against
/// `F''_*(s)⁻¹/μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRanges {
    pub primal_min: f64,
    pub primal_max: f64,
    pub dual_min: f64,
    pub dual_max: f64,
    /// Rounding allowance of the congruence, `nε` times the larger condition
    /// number of the two reference matrices.
    pub rounding: f64,
}

fn condition_number(p: &SymMatrix) -> f64 {
    let ev = sym_eigenvalues(p);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

pub fn sandwich_ranges(
    w: &SymMatrix,
    be: &BarrierEval,
    dual_hessian_inverse: &SymMatrix,
    mu: f64,
) -> Result<SandwichRanges> {
    let p = congruence_eigenvalues(w, &be.hessian.scaled(mu))?;
    let d = congruence_eigenvalues(w, &dual_hessian_inverse.scaled(1.0 / mu))?;
    let cond = condition_number(&be.hessian).max(condition_number(dual_hessian_inverse));
    Ok(SandwichRanges {
        primal_min: p[0],
        primal_max: p[p.len() - 1],
        dual_min: d[0],
        dual_max: d[d.len() - 1],
        rounding: w.dim() as f64 * f64::EPSILON * cond,
    })
}

impl SandwichRanges {
    /// Whether all four ranges lie inside the bounds, up to `slack` plus the
    /// congruence rounding.
    pub fn within(&self, sb: &SandwichBounds, slack: f64) -> bool {
        let slack = EIGEN_SLACK + slack + ROUNDING_SAFETY * self.rounding;
        self.primal_min >= sb.l_p - slack
            && self.primal_max <= sb.u_p + slack
            && self.dual_min >= sb.l_d - slack
            && self.dual_max <= sb.u_d + slack
    }
}

/// `l^P μF''(x) ⪯ W ⪯ u^P μF''(x)` and `(l^D/μ) F''_*(s)⁻¹ ⪯ W ⪯ (u^D/μ) F''_*(s)⁻¹`.
pub fn verify_sandwich(
    w: &ScalingMatrix,
    be: &BarrierEval,
    dual_hessian_inverse: &SymMatrix,
    mu: f64,
    sb: &SandwichBounds,
) -> bool {
    sandwich_ranges(&w.w, be, dual_hessian_inverse, mu)
        .is_ok_and(|r| r.within(sb, ROUNDING_SAFETY * w.rounding))
}
