//! Numerical audit of the convergence analysis: every inequality and identity
//! the analysis relies on is re-evaluated from the raw iterates and reported
//! as a [`LemmaVerdict`].
//!
//! Quantities that scale with `μ` are divided by the matching `μ` first so that
//! the fixed tolerance means the same thing early and late in a run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cones::{self, barrier_eval, BarrierEval};
use crate::hsd::{
    direction_residual, neighborhood_report, path_quantities, residual, ConicProblem, Direction,
    HsdPoint, NeighborhoodReport, PathQuantities,
};
use crate::linalg::{dot, norm2, norm_dual, norm_induced, sub, SymMatrix};
use crate::scaling::{
    build_scaling, sandwich_bounds, sandwich_ranges, SandwichBounds, ScalingMatrix, ROUNDING_SAFETY,
};
use crate::solver::{IterationRecord, StepParameters};

/// Relative tolerance of the pass rule.
pub const VERDICT_TOLERANCE: f64 = 1e-8;

/// Residual-based identities are measured against
/// `‖G‖ + RESIDUAL_FLOOR·|G|`, where `|G|` is `G` evaluated on absolute
/// values; below that floor the residual is rounding noise.
const RESIDUAL_FLOOR: f64 = 1e-6;

/// Orthogonality identities are measured against their natural product scale
/// plus `PRODUCT_FLOOR·Σ|xᵢsᵢ|`; rounding in `⟨x, μs̃ - s⟩` alone is about
/// `ε Σ|xᵢsᵢ|`, which exceeds `εμν` away from the central ray.
const PRODUCT_FLOOR: f64 = 1e-6;

/// Relative rounding of `Wv` against the target `t`: `nε‖|W||v|‖/‖t‖`.
fn matvec_rounding(w: &SymMatrix, v: &[f64], t: &[f64]) -> f64 {
    let n = v.len();
    let abs: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| (w.get(i, j) * v[j]).abs()).sum())
        .collect();
    n as f64 * f64::EPSILON * norm2(&abs) / norm2(t)
}

/// `Σ|Δᵢ||eᵢ|` over `(Δy, Δx, Δτ)`, where `e` is how far the direction misses
/// `target` in the residual equations. Orthogonality holds only up to this.
fn linear_floor(problem: &ConicProblem, dir: &Direction, target: &[f64]) -> f64 {
    let Ok(gd) = direction_residual(problem, dir) else {
        return f64::INFINITY;
    };
    let delta = dir
        .dy
        .iter()
        .chain(&dir.dx)
        .chain(std::iter::once(&dir.dtau));
    delta
        .zip(gd.iter().zip(target))
        .map(|(d, (g, t))| (d * (g - t)).abs())
        .sum()
}

/// Term that makes an absolute rounding allowance `floor` pass an identity
/// measured relative to its scale.
fn allowance_scale(floor: f64) -> f64 {
    ROUNDING_SAFETY * floor / VERDICT_TOLERANCE
}

/// `Σ|xᵢsᵢ| + τκ`
fn abs_products(z: &HsdPoint) -> f64 {
    z.x.iter()
        .zip(&z.s)
        .map(|(a, b)| (a * b).abs())
        .sum::<f64>()
        + (z.tau * z.kappa).abs()
}

/// Outcome of one check. Inequalities read `lhs ≤ rhs`; identities store the
/// relative discrepancy in `lhs` with `rhs = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub applicable: bool,
    pub pass: bool,
    /// Reported for comparison only; never counted as a failure.
    #[serde(default)]
    pub informational: bool,
}

impl LemmaVerdict {
    /// `lhs ≤ rhs`
    pub fn le(id: &str, lhs: f64, rhs: f64, applicable: bool) -> Self {
        let slack = rhs - lhs;
        Self {
            id: id.to_string(),
            lhs,
            rhs,
            slack,
            applicable,
            pass: applicable && slack >= -VERDICT_TOLERANCE * (1.0 + rhs.abs()),
            informational: false,
        }
    }

    /// `lhs ≥ rhs`, stored as `rhs ≤ lhs`.
    pub fn ge(id: &str, lhs: f64, rhs: f64, applicable: bool) -> Self {
        Self::le(id, rhs, lhs, applicable)
    }

    /// Identity with the given relative discrepancy.
    pub fn identity(id: &str, discrepancy: f64, applicable: bool) -> Self {
        Self::le(id, discrepancy.abs(), 0.0, applicable)
    }

    pub fn inapplicable(id: &str) -> Self {
        Self::le(id, f64::NAN, f64::NAN, false)
    }

    pub fn as_informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn failed(&self) -> bool {
        self.applicable && !self.pass && !self.informational
    }

    /// An informational check whose inequality did not hold.
    pub fn violated_reading(&self) -> bool {
        self.applicable && !self.pass && self.informational
    }
}

/// Derived constants of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub theta: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// `ε₁` at `‖δᴾ₊‖_{x₊}`.
    pub eps3: f64,
    /// `ε₂` at `‖δᴾ₊‖_{x₊}`.
    pub eps4: f64,
    /// Bound on `‖x̃₊‖_{W₊}/ν` from `‖δᴾ₊‖_{W₊}` and `μ₊`.
    pub crude_xtilde_bound: f64,
}

/// Scalars of one step, NaN where a quantity could not be formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepScalars {
    /// `‖δᴾ‖_x` at `z`, `z₊`, `z₊₊`.
    pub d: f64,
    pub d_plus: f64,
    pub d_pp: f64,
    /// `‖δᴾ₊‖_{W₊}`
    pub dw_plus: f64,
    pub mu: f64,
    pub mu_e: f64,
    pub mu_plus: f64,
    /// `μ₊ μ̃₊₊`
    pub shadow_product_plus: f64,
    /// `α‖Δx^pred‖_x`, `α‖Δs^pred‖_s`
    pub predictor_primal_step: f64,
    pub predictor_dual_step: f64,
    /// `‖Δx^cor‖_{x₊}`, `‖Δs^cor‖_{s₊}`
    pub corrector_primal_step: f64,
    pub corrector_dual_step: f64,
    /// Closed-form bounds at `z`.
    pub l_p: f64,
    pub u_d: f64,
    /// Measured extreme generalized eigenvalues at `z`.
    pub primal_min: f64,
    pub dual_max: f64,
    /// Closed-form bounds at `z₊` with `ε₃ + ε₄`.
    pub l_p_plus: f64,
    pub u_p_plus: f64,
    pub l_d_plus: f64,
    pub u_d_plus: f64,
    /// `1 - ε₃ - ε₂`
    pub l_p_plus_printed: f64,
    /// `‖Wx - s‖/‖s‖` and `‖Wx̃ - s̃‖/‖s̃‖` at `z`.
    pub wx_error: f64,
    pub wxt_error: f64,
    pub fallback: bool,
    /// The same identities at `z₊`.
    pub wx_error_plus: f64,
    pub wxt_error_plus: f64,
    pub fallback_plus: bool,
    pub sandwich_applicable: bool,
    pub sandwich_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAudit {
    pub verdicts: Vec<LemmaVerdict>,
    pub scalars: StepScalars,
    pub bounds: BoundContext,
}

impl StepAudit {
    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| v.failed()).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTally {
    pub checked: usize,
    pub applicable: usize,
    pub passed: usize,
}

/// Aggregated verdicts over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub checked: usize,
    pub applicable: usize,
    pub passed: usize,
    pub failed: usize,
    /// Informational checks that did not hold.
    pub reading_violations: usize,
    pub per_lemma: BTreeMap<String, LemmaTally>,
    /// The first failures with their iteration index.
    pub first_failures: Vec<(usize, LemmaVerdict)>,
}

const KEPT_FAILURES: usize = 50;

impl VerdictSummary {
    pub fn add(&mut self, iter: usize, verdicts: &[LemmaVerdict]) {
        for v in verdicts {
            self.checked += 1;
            let t = self.per_lemma.entry(v.id.clone()).or_default();
            t.checked += 1;
            if v.applicable {
                self.applicable += 1;
                t.applicable += 1;
            }
            if v.pass {
                self.passed += 1;
                t.passed += 1;
            }
            if v.violated_reading() {
                self.reading_violations += 1;
            }
            if v.failed() {
                self.failed += 1;
                if self.first_failures.len() < KEPT_FAILURES {
                    self.first_failures.push((iter, v.clone()));
                }
            }
        }
    }
}

/// Everything recomputed at one point.
struct PointAnalysis {
    be: Option<BarrierEval>,
    pq: Option<PathQuantities>,
    w: Option<ScalingMatrix>,
    /// `F''(x̃) = F''_*(s)⁻¹`
    dual_hess: Option<SymMatrix>,
    report: NeighborhoodReport,
    g: Vec<f64>,
    g_magnitude: f64,
    nu: f64,
}

impl PointAnalysis {
    fn new(problem: &ConicProblem, z: &HsdPoint, beta: f64, eta: f64) -> Self {
        let cone = &problem.cone;
        let be = barrier_eval(cone, &z.x).ok();
        let pq = be
            .as_ref()
            .filter(|_| {
                cones::dual_membership_margin(cone, &z.s) > 0.0 && z.tau > 0.0 && z.kappa > 0.0
            })
            .and_then(|be| path_quantities(problem, z, be).ok());
        let w = match (&be, &pq) {
            (Some(be), Some(pq)) => build_scaling(&z.x, &z.s, pq, be).ok(),
            _ => None,
        };
        let dual_hess = pq
            .as_ref()
            .and_then(|pq| barrier_eval(cone, &pq.x_tilde).ok())
            .map(|e| e.hessian);
        let report = neighborhood_report(problem, z, pq.as_ref(), beta, eta);
        Self {
            be,
            pq,
            w,
            dual_hess,
            report,
            g: residual(problem, z).unwrap_or_default(),
            g_magnitude: residual_magnitude(problem, z),
            nu: cone.nu(),
        }
    }

    fn d(&self) -> f64 {
        self.pq.as_ref().map_or(f64::NAN, |pq| pq.delta_p_norm_x)
    }

    fn mu(&self) -> f64 {
        self.pq.as_ref().map_or(f64::NAN, |pq| pq.mu)
    }

    fn interior(&self) -> bool {
        self.report.a1 && self.report.a3
    }

    fn bounds(&self) -> Option<SandwichBounds> {
        sandwich_bounds(self.d(), self.nu).ok()
    }

    fn w_norm(&self, v: &[f64]) -> f64 {
        self.w
            .as_ref()
            .and_then(|w| norm_induced(v, &w.w).ok())
            .unwrap_or(f64::NAN)
    }

    /// Relative rounding allowance of `‖v‖_W`: the error of `W` itself plus
    /// that of evaluating the quadratic form.
    fn w_norm_rounding(&self, v: &[f64]) -> f64 {
        let Some(w) = self.w.as_ref() else {
            return f64::NAN;
        };
        let n = v.len();
        let mut abs_form = 0.0;
        for i in 0..n {
            for j in 0..n {
                abs_form += (v[i] * w.w.get(i, j) * v[j]).abs();
            }
        }
        let form = w.w.quad_form(v);
        w.rounding + n as f64 * f64::EPSILON * abs_form / form.abs()
    }

    fn w_dual_norm(&self, v: &[f64]) -> f64 {
        self.w
            .as_ref()
            .map_or(f64::NAN, |w| norm2(&w.factor.forward(v)))
    }

    /// Measurement floor of `‖δᴾ‖_x`.
    fn d_floor(&self) -> f64 {
        self.pq
            .as_ref()
            .map_or(0.0, |pq| ROUNDING_SAFETY * pq.delta_p_rounding)
    }

    fn local_norm(&self, v: &[f64]) -> f64 {
        self.be
            .as_ref()
            .and_then(|be| norm_induced(v, &be.hessian).ok())
            .unwrap_or(f64::NAN)
    }

    fn dual_local_norm(&self, v: &[f64]) -> f64 {
        self.dual_hess
            .as_ref()
            .and_then(|h| norm_dual(v, h).ok())
            .unwrap_or(f64::NAN)
    }

    /// Relative discrepancy `‖G(other) - factor·G(self)‖` against this point's residual.
    fn residual_discrepancy(&self, other: &PointAnalysis, factor: f64) -> f64 {
        if self.g.is_empty() || other.g.is_empty() {
            return f64::NAN;
        }
        let diff: Vec<f64> = other
            .g
            .iter()
            .zip(&self.g)
            .map(|(a, b)| a - factor * b)
            .collect();
        norm2(&diff) / (norm2(&self.g) + RESIDUAL_FLOOR * self.g_magnitude + f64::MIN_POSITIVE)
    }
}

/// `‖G‖` evaluated with absolute values of all data and iterates.
fn residual_magnitude(problem: &ConicProblem, z: &HsdPoint) -> f64 {
    let (m, n) = (problem.m(), problem.n());
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let (ax, ay) = (abs(&z.x), abs(&z.y));
    let (bb, cc) = (abs(&problem.b), abs(&problem.c));
    let mut total = 0.0;
    for i in 0..m {
        let r: f64 = (0..n)
            .map(|j| problem.a.get(i, j).abs() * ax[j])
            .sum::<f64>()
            + bb[i] * z.tau;
        total += r * r;
    }
    for j in 0..n {
        let r: f64 = (0..m)
            .map(|i| problem.a.get(i, j).abs() * ay[i])
            .sum::<f64>()
            + cc[j] * z.tau
            + z.s[j].abs();
        total += r * r;
    }
    let last = dot(&bb, &ay) + dot(&cc, &ax) + z.kappa.abs();
    (total + last * last).sqrt()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Bound on `‖δᴾ₊‖_{x₊}` after a predictor step, with its applicability.
///
/// Applicability uses the stricter of the two readings of the step-size cap:
/// `α` must lie below both `√(β min(lᴾ, 1/uᴾ)/θ)` and `√(β min(lᴰ, 1/uᴰ)/θ)`.
pub fn prim_delta_one_bound(d: f64, params: &StepParameters, sb: &SandwichBounds) -> (f64, bool) {
    let (a, b, nu) = (params.alpha, params.beta, params.nu);
    let th = params.theta();
    let (lp, up, ld, ud) = (sb.l_p, sb.u_p, sb.l_d, sb.u_d);
    let cap = (b * lp.min(1.0 / up) / th)
        .sqrt()
        .min((b * ld.min(1.0 / ud) / th).sqrt());
    let den1 = 1.0 - a * (th / (b * lp)).sqrt();
    let den2 = 1.0 - a * (ud * th / b).sqrt();
    let applicable =
        th >= 0.0 && a >= 0.0 && a < cap && den1 > 0.0 && den2 > 0.0 && lp > 0.0 && d < 1.0;
    let w1 = params.omega1();
    let w2 = params.omega2();
    let inner = (1.0 - a) * d
        + a * a * th / (2.0 * b * nu.sqrt() * (1.0 - d))
        + a * th.sqrt() / (lp * b).sqrt() * (w1 * (ud / den2 - 1.0) + w2);
    (inner / den1, applicable)
}

/// Bound on `μ₊μ̃₊₊` given `‖δᴾ₊‖_{W₊}` and a value for `‖x̃₊‖_{W₊}/ν`.
pub fn shadow_inner_product_bound(
    dw: f64,
    mu: f64,
    nu: f64,
    xtilde_over_nu: f64,
    l_d: f64,
    u_d: f64,
) -> (f64, bool) {
    let a = 1.0 - dw / (l_d * mu).sqrt();
    let b = 1.0 - (u_d / mu).sqrt() * dw;
    let applicable = l_d > 0.0 && dw / mu.sqrt() < l_d.min(1.0 / u_d).sqrt() && a > 0.0 && b > 0.0;
    let bound = 1.0
        + dw * (xtilde_over_nu * (1.0 / (l_d * a) - 1.0)
            + u_d / (mu * nu).sqrt() * (1.0 / b - 1.0))
        + dw * dw * u_d / (mu * nu * l_d * a * b);
    (bound, applicable)
}

/// Bound on `‖δᴾ₊₊‖_{x₊₊}` after a corrector step.
pub fn prim_delta_two_bound(
    dw: f64,
    mu: f64,
    nu: f64,
    l_p: f64,
    u_p: f64,
    u_d: f64,
) -> (f64, bool) {
    let r = dw / (mu * l_p).sqrt();
    let b = 1.0 - (u_d / mu).sqrt() * dw;
    let q = r / (1.0 - r) * (u_d / b - 1.0);
    let applicable =
        l_p > 0.0 && dw / mu.sqrt() < l_p.min(1.0 / u_p).sqrt() && r < 1.0 && b > 0.0 && q < 1.0;
    (q + dw * dw / (2.0 * mu * nu.sqrt()) / (1.0 - q), applicable)
}

fn scaling_verdicts(
    prefix: &str,
    a: &PointAnalysis,
    x: &[f64],
    s: &[f64],
    w: Option<&ScalingMatrix>,
    sb: Option<SandwichBounds>,
    out: &mut Vec<LemmaVerdict>,
) -> (f64, f64) {
    let id = |name: &str| format!("{prefix}.{name}");
    let (Some(be), Some(pq), Some(w)) = (a.be.as_ref(), a.pq.as_ref(), w) else {
        for name in [
            "maps_x_to_s",
            "maps_shadow",
            "delta_d_to_delta_p",
            "primal_lower",
            "primal_upper",
            "dual_lower",
            "dual_upper",
        ] {
            out.push(LemmaVerdict::inapplicable(&id(name)));
        }
        return (f64::NAN, f64::NAN);
    };
    let wx_error = norm2(&sub(&w.w.mul_vec(x), s)) / norm2(s);
    let wxt_error = norm2(&sub(&w.w.mul_vec(&pq.x_tilde), &pq.s_tilde)) / norm2(&pq.s_tilde);
    out.push(LemmaVerdict::le(
        &id("maps_x_to_s"),
        wx_error,
        ROUNDING_SAFETY * matvec_rounding(&w.w, x, s),
        true,
    ));
    out.push(LemmaVerdict::le(
        &id("maps_shadow"),
        wxt_error,
        ROUNDING_SAFETY * matvec_rounding(&w.w, &pq.x_tilde, &pq.s_tilde),
        !w.degenerate_fallback,
    ));

    let d = pq.delta_p_norm_x;
    let mu = pq.mu;
    let mixed: Vec<f64> = be
        .hessian
        .mul_vec(&pq.delta_p)
        .iter()
        .zip(&pq.delta_d)
        .map(|(h, dd)| mu * h - dd)
        .collect();
    let lhs = norm_dual(&mixed, &be.hessian).unwrap_or(f64::NAN) / mu;
    let floor = ROUNDING_SAFETY * (pq.delta_p_rounding + pq.delta_d_rounding);
    out.push(LemmaVerdict::le(
        &id("delta_d_to_delta_p"),
        lhs,
        d * d / (1.0 - d).powi(3) + floor,
        d < 1.0,
    ));

    let ranges = a
        .dual_hess
        .as_ref()
        .and_then(|dh| sandwich_ranges(&w.w, be, dh, mu).ok());
    match (sb, ranges) {
        (Some(sb), Some(r)) => {
            let slack = ROUNDING_SAFETY * (w.rounding + r.rounding);
            out.push(LemmaVerdict::ge(
                &id("primal_lower"),
                r.primal_min,
                sb.l_p - slack,
                true,
            ));
            out.push(LemmaVerdict::le(
                &id("primal_upper"),
                r.primal_max,
                sb.u_p + slack,
                true,
            ));
            out.push(LemmaVerdict::ge(
                &id("dual_lower"),
                r.dual_min,
                sb.l_d - slack,
                true,
            ));
            out.push(LemmaVerdict::le(
                &id("dual_upper"),
                r.dual_max,
                sb.u_d + slack,
                true,
            ));
        }
        _ => {
            for name in ["primal_lower", "primal_upper", "dual_lower", "dual_upper"] {
                out.push(LemmaVerdict::inapplicable(&id(name)));
            }
        }
    }
    (wx_error, wxt_error)
}

/// Checks at `z` for the scaling matrix `w`: the mapping identities, the
/// `δᴰ`-versus-`δᴾ` bound, and the Loewner sandwich (applicable while
/// `‖δᴾ‖_x ≤ 0.18226`).
pub fn check_scaling(problem: &ConicProblem, z: &HsdPoint, w: &ScalingMatrix) -> Vec<LemmaVerdict> {
    let a = PointAnalysis::new(problem, z, 1.0, 1.0);
    let mut out = Vec::new();
    scaling_verdicts("scaling", &a, &z.x, &z.s, Some(w), a.bounds(), &mut out);
    out
}

/// Sandwich checks at `z₊` under both readings of the lower primal bound:
/// `1 - ε₃ - ε₄` (symmetric) and `1 - ε₃ - ε₂` with `ε₂` taken at `z`.
/// The second drops the first-order `ε₄` term and is violated at `O(d₊)`
/// whenever `z` is nearly central, so it is informational.
fn scaling_plus_verdicts(
    a0: &PointAnalysis,
    a1: &PointAnalysis,
    z_plus: &HsdPoint,
    out: &mut Vec<LemmaVerdict>,
) -> (f64, f64) {
    let sb_plus = a1.bounds();
    let errors = scaling_verdicts(
        "scaling_plus",
        a1,
        &z_plus.x,
        &z_plus.s,
        a1.w.as_ref(),
        sb_plus,
        out,
    );
    let printed = match (sb_plus, a0.bounds()) {
        (Some(p), Some(b0)) => Some(1.0 - p.eps1 - b0.eps2),
        _ => None,
    };
    let ranges = match (&a1.w, &a1.be, &a1.dual_hess) {
        (Some(w), Some(be), Some(dh)) => sandwich_ranges(&w.w, be, dh, a1.mu()).ok(),
        _ => None,
    };
    match (printed, ranges) {
        (Some(l), Some(r)) => out.push(
            LemmaVerdict::ge("scaling_plus.primal_lower_printed", r.primal_min, l, true)
                .as_informational(),
        ),
        _ => out.push(
            LemmaVerdict::inapplicable("scaling_plus.primal_lower_printed").as_informational(),
        ),
    }
    errors
}

#[allow(clippy::too_many_arguments)]
fn predictor_verdicts(
    lin_floor: f64,
    a0: &PointAnalysis,
    a1: &PointAnalysis,
    z: &HsdPoint,
    z_plus: &HsdPoint,
    dir: &Direction,
    params: &StepParameters,
    out: &mut Vec<LemmaVerdict>,
    scalars: &mut StepScalars,
) {
    let (alpha, beta, gamma, nu) = (params.alpha, params.beta, params.gamma, params.nu);
    let th = params.theta();
    let decay = params.decay();
    let assumed = a0.report.all();

    out.push(LemmaVerdict::identity(
        "predictor.residual_factor",
        a0.residual_discrepancy(a1, decay),
        !a0.g.is_empty(),
    ));
    let xs = dot(&dir.dx, &dir.ds);
    let tk = dir.dtau * dir.dkappa;
    let mu_e = z.mu_e(nu);
    let nx_w = a0.w_norm(&dir.dx);
    let ns_w = a0.w_dual_norm(&dir.ds);
    let scale =
        nx_w * ns_w + tk.abs() + PRODUCT_FLOOR * abs_products(z) + allowance_scale(lin_floor);
    out.push(LemmaVerdict::identity(
        "predictor.orthogonality",
        (xs + tk) / scale,
        a0.w.is_some(),
    ));
    let mu_e_plus = z_plus.mu_e(nu);
    out.push(LemmaVerdict::identity(
        "predictor.complementarity_factor",
        rel(mu_e_plus, decay * mu_e),
        true,
    ));

    let tau_kappa = z.tau * z.kappa;
    out.push(LemmaVerdict::le(
        "predictor.tau_kappa_product",
        tk / mu_e,
        (gamma * mu_e - tau_kappa).powi(2) / (4.0 * tau_kappa) / mu_e,
        tau_kappa > 0.0,
    ));
    out.push(LemmaVerdict::le(
        "predictor.norm_w",
        (nx_w * nx_w + ns_w * ns_w) / mu_e,
        th,
        assumed,
    ));

    let sb = a0.bounds();
    let nx = a0.local_norm(&dir.dx);
    let ns = a0.dual_local_norm(&dir.ds);
    scalars.predictor_primal_step = alpha * nx;
    scalars.predictor_dual_step = alpha * ns;
    match sb {
        Some(sb) => out.push(LemmaVerdict::le(
            "predictor.norm_local",
            sb.l_p * nx * nx + ns * ns / sb.u_d,
            th / beta,
            // the conjugate Hessian may be too ill-conditioned to factor
            assumed && nx.is_finite() && ns.is_finite(),
        )),
        None => out.push(LemmaVerdict::inapplicable("predictor.norm_local")),
    }
    out.push(LemmaVerdict::le(
        "predictor.inner_product",
        xs.abs() / mu_e,
        0.5 * th,
        assumed,
    ));

    let mu = a0.mu();
    let mu_plus = a1.mu();
    let ratio = mu_plus / mu;
    let predicted = 1.0 + alpha * alpha * xs / (mu * nu) + alpha * (gamma * mu_e / mu - 1.0);
    out.push(LemmaVerdict::identity(
        "predictor.mu_ratio",
        rel(ratio, predicted),
        a0.w.is_some() && a1.pq.is_some(),
    ));
    out.push(LemmaVerdict::le(
        "predictor.mu_ratio_bound",
        ratio,
        params.omega1(),
        assumed,
    ));

    let tk_bound = (beta * (1.0 - alpha) + alpha * gamma - 0.5 * alpha * alpha * th) / decay;
    out.push(LemmaVerdict::ge(
        "predictor.tau_kappa_lower",
        z_plus.tau * z_plus.kappa / mu_e_plus,
        tk_bound,
        assumed && alpha <= 1.0,
    ));
    let alpha_cap = (gamma - beta + ((beta - gamma).powi(2) + 2.0 * beta * th).sqrt()) / th;
    out.push(LemmaVerdict::ge(
        "predictor.tau_kappa_positive",
        z_plus.tau.min(z_plus.kappa),
        0.0,
        assumed && (beta < 1.0 || gamma < 1.0) && alpha >= 0.0 && alpha < alpha_cap,
    ));

    let bounds_hold = a0.report.a1 && a0.report.a2 && a0.report.a3 && a0.report.a4;
    out.push(LemmaVerdict::ge(
        "predictor.mu_mu_e_lower",
        mu_e / mu,
        1.0 / (2.0 - beta),
        bounds_hold,
    ));
    out.push(LemmaVerdict::le(
        "predictor.mu_mu_e_upper",
        mu_e / mu,
        1.0 / beta,
        bounds_hold,
    ));
    if let Some(pq) = &a0.pq {
        out.push(LemmaVerdict::ge(
            "predictor.shadow_product",
            pq.mu * pq.mu_tilde,
            1.0,
            true,
        ));
        out.push(LemmaVerdict::ge(
            "predictor.shadow_product_extended",
            pq.mu_e * pq.mu_tilde_e,
            1.0,
            true,
        ));
    } else {
        out.push(LemmaVerdict::inapplicable("predictor.shadow_product"));
        out.push(LemmaVerdict::inapplicable(
            "predictor.shadow_product_extended",
        ));
    }

    match sb {
        Some(sb) => {
            let (bound, ok) = prim_delta_one_bound(a0.d(), params, &sb);
            out.push(LemmaVerdict::le(
                "predictor.delta_p_plus",
                a1.d(),
                bound + a1.d_floor(),
                assumed && ok,
            ));
        }
        None => out.push(LemmaVerdict::inapplicable("predictor.delta_p_plus")),
    }
}

#[allow(clippy::too_many_arguments)]
fn corrector_verdicts(
    lin_floor: f64,
    a1: &PointAnalysis,
    a2: &PointAnalysis,
    z_plus: &HsdPoint,
    z_pp: &HsdPoint,
    dir: &Direction,
    params: &StepParameters,
    origin: Option<(&PointAnalysis, f64)>,
    out: &mut Vec<LemmaVerdict>,
    scalars: &mut StepScalars,
) -> f64 {
    let nu = params.nu;
    let pre = a1.interior();
    out.push(LemmaVerdict::identity(
        "corrector.residual_unchanged",
        a1.residual_discrepancy(a2, 1.0),
        !a1.g.is_empty(),
    ));
    let mu_plus = a1.mu();
    let nx_w = a1.w_norm(&dir.dx);
    let ns_w = a1.w_dual_norm(&dir.ds);
    let cross = dot(&z_plus.x, &dir.ds) + dot(&dir.dx, &z_plus.s);
    let cross_scale = (mu_plus * nu).sqrt() * (nx_w + ns_w) + PRODUCT_FLOOR * abs_products(z_plus);
    out.push(LemmaVerdict::identity(
        "corrector.cross_orthogonality",
        cross / cross_scale,
        a1.w.is_some(),
    ));
    let xs = dot(&dir.dx, &dir.ds);
    let tk = dir.dtau * dir.dkappa;
    let mu_e_plus = z_plus.mu_e(nu);
    let scale =
        nx_w * ns_w + tk.abs() + PRODUCT_FLOOR * abs_products(z_plus) + allowance_scale(lin_floor);
    out.push(LemmaVerdict::identity(
        "corrector.orthogonality",
        (xs + tk) / scale,
        a1.w.is_some(),
    ));
    let mu_e_pp = z_pp.mu_e(nu);
    out.push(LemmaVerdict::identity(
        "corrector.complementarity_unchanged",
        rel(mu_e_pp, mu_e_plus),
        true,
    ));

    let dw = a1.pq.as_ref().map_or(f64::NAN, |pq| a1.w_norm(&pq.delta_p));
    scalars.dw_plus = dw;
    out.push(LemmaVerdict::le(
        "corrector.norm_w",
        (nx_w * nx_w + ns_w * ns_w) / mu_plus,
        dw * dw / mu_plus,
        pre,
    ));
    out.push(LemmaVerdict::le(
        "corrector.inner_product",
        xs.abs() / mu_plus,
        0.5 * dw * dw / mu_plus,
        pre,
    ));
    let tk_plus = z_plus.tau * z_plus.kappa;
    let tk_floor = tk_plus - 0.5 * dw * dw;
    out.push(LemmaVerdict::ge(
        "corrector.tau_kappa_lower",
        z_pp.tau * z_pp.kappa / mu_plus,
        tk_floor / mu_plus,
        pre,
    ));
    out.push(LemmaVerdict::ge(
        "corrector.tau_kappa_positive",
        z_pp.tau.min(z_pp.kappa),
        0.0,
        pre && tk_floor > 0.0,
    ));
    scalars.corrector_primal_step = a1.local_norm(&dir.dx);
    scalars.corrector_dual_step = a1.dual_local_norm(&dir.ds);

    let crude = dw / (mu_plus * nu) + 1.0 / (mu_plus * nu).sqrt();
    let (xt_norm, xt_rounding) = a1.pq.as_ref().map_or((f64::NAN, f64::NAN), |pq| {
        (a1.w_norm(&pq.x_tilde) / nu, a1.w_norm_rounding(&pq.x_tilde))
    });
    out.push(LemmaVerdict::le(
        "corrector.shadow_norm_crude",
        xt_norm * mu_plus.sqrt(),
        crude * mu_plus.sqrt() * (1.0 + ROUNDING_SAFETY * xt_rounding),
        pre,
    ));

    let mu_tilde_pp = a2.pq.as_ref().map_or(f64::NAN, |pq| pq.mu_tilde);
    let product = mu_plus * mu_tilde_pp;
    scalars.shadow_product_plus = product;
    match a1.bounds() {
        Some(sb) => {
            let (b1, ok1) = shadow_inner_product_bound(dw, mu_plus, nu, xt_norm, sb.l_d, sb.u_d);
            out.push(LemmaVerdict::le(
                "corrector.shadow_product",
                product,
                b1,
                pre && ok1,
            ));
            let (b2, ok2) = shadow_inner_product_bound(dw, mu_plus, nu, crude, sb.l_d, sb.u_d);
            out.push(LemmaVerdict::le(
                "corrector.shadow_product_crude",
                product,
                b2,
                pre && ok2,
            ));
            let (b3, ok3) = prim_delta_two_bound(dw, mu_plus, nu, sb.l_p, sb.u_p, sb.u_d);
            out.push(LemmaVerdict::le(
                "corrector.delta_p_pp",
                a2.d(),
                b3 + a2.d_floor(),
                pre && ok3,
            ));
        }
        None => {
            out.push(LemmaVerdict::inapplicable("corrector.shadow_product"));
            out.push(LemmaVerdict::inapplicable("corrector.shadow_product_crude"));
            out.push(LemmaVerdict::inapplicable("corrector.delta_p_pp"));
        }
    }

    // Chain through μᵉ/μ₊ to the shadow condition at z₊₊; needs the
    // iterate the predictor started from.
    let (alpha, beta, gamma) = (params.alpha, params.beta, params.gamma);
    let (assumed, mu_e, linked) = match origin {
        Some((a0, mu_e)) => (a0.report.all(), mu_e, true),
        None => (false, f64::NAN, false),
    };
    let den = (1.0 - alpha) * beta + alpha * gamma - 0.5 * alpha * alpha * params.theta() / nu;
    out.push(LemmaVerdict::le(
        "corrector.mu_e_over_mu_plus",
        mu_e / mu_plus,
        1.0 / den,
        assumed && den > 0.0,
    ));
    out.push(LemmaVerdict::identity(
        "corrector.complementarity_chain",
        rel(mu_e_pp, params.decay() * mu_e),
        linked,
    ));
    let kept = assumed && params.is_fixed_set();
    let chained = beta * params.decay() * (mu_e / mu_plus) * product;
    out.push(LemmaVerdict::le(
        "corrector.shadow_condition_chain",
        chained,
        1.0,
        kept,
    ));
    let broken = a2.report.flags().iter().filter(|f| !**f).count() as f64;
    out.push(LemmaVerdict::le(
        "step.neighborhood_kept",
        broken,
        0.0,
        kept,
    ));
    if let Some(pq) = &a2.pq {
        out.push(LemmaVerdict::ge(
            "corrector.shadow_product_pp",
            pq.mu * pq.mu_tilde,
            1.0,
            true,
        ));
        out.push(LemmaVerdict::ge(
            "corrector.shadow_product_extended",
            pq.mu_e * pq.mu_tilde_e,
            1.0,
            true,
        ));
    } else {
        out.push(LemmaVerdict::inapplicable("corrector.shadow_product_pp"));
        out.push(LemmaVerdict::inapplicable(
            "corrector.shadow_product_extended",
        ));
    }
    crude
}

/// Raw data of one predictor-corrector step.
pub struct StepInput<'a> {
    pub problem: &'a ConicProblem,
    pub z: &'a HsdPoint,
    pub z_plus: &'a HsdPoint,
    pub z_pp: &'a HsdPoint,
    /// `Δz^pred = Δz^aff + γΔz^cen`
    pub predictor: &'a Direction,
    pub corrector: &'a Direction,
    /// The step actually taken (`alpha`, `gamma`) and the neighborhood (`beta`, `eta`).
    pub params: &'a StepParameters,
}

fn nan_scalars() -> StepScalars {
    StepScalars {
        d: f64::NAN,
        d_plus: f64::NAN,
        d_pp: f64::NAN,
        dw_plus: f64::NAN,
        mu: f64::NAN,
        mu_e: f64::NAN,
        mu_plus: f64::NAN,
        shadow_product_plus: f64::NAN,
        predictor_primal_step: f64::NAN,
        predictor_dual_step: f64::NAN,
        corrector_primal_step: f64::NAN,
        corrector_dual_step: f64::NAN,
        l_p: f64::NAN,
        u_d: f64::NAN,
        primal_min: f64::NAN,
        dual_max: f64::NAN,
        l_p_plus: f64::NAN,
        u_p_plus: f64::NAN,
        l_d_plus: f64::NAN,
        u_d_plus: f64::NAN,
        l_p_plus_printed: f64::NAN,
        wx_error: f64::NAN,
        wxt_error: f64::NAN,
        fallback: false,
        wx_error_plus: f64::NAN,
        wxt_error_plus: f64::NAN,
        fallback_plus: false,
        sandwich_applicable: false,
        sandwich_pass: false,
    }
}

/// Full audit of one step, recomputed from the raw vectors.
pub fn audit_step(input: &StepInput) -> StepAudit {
    let p = input.params;
    let a0 = PointAnalysis::new(input.problem, input.z, p.beta, p.eta);
    let a1 = PointAnalysis::new(input.problem, input.z_plus, p.beta, p.eta);
    let a2 = PointAnalysis::new(input.problem, input.z_pp, p.beta, p.eta);
    let mut out = Vec::with_capacity(64);
    let mut sc = nan_scalars();
    sc.d = a0.d();
    sc.d_plus = a1.d();
    sc.d_pp = a2.d();
    sc.mu = a0.mu();
    sc.mu_plus = a1.mu();
    sc.mu_e = input.z.mu_e(p.nu);

    let sb0 = a0.bounds();
    let (wx, wxt) = scaling_verdicts(
        "scaling",
        &a0,
        &input.z.x,
        &input.z.s,
        a0.w.as_ref(),
        sb0,
        &mut out,
    );
    sc.wx_error = wx;
    sc.wxt_error = wxt;
    sc.fallback = a0.w.as_ref().is_some_and(|w| w.degenerate_fallback);
    if let Some(sb) = sb0 {
        sc.l_p = sb.l_p;
        sc.u_d = sb.u_d;
        let sandwich: Vec<&LemmaVerdict> = out
            .iter()
            .filter(|v| {
                matches!(
                    v.id.as_str(),
                    "scaling.primal_lower"
                        | "scaling.primal_upper"
                        | "scaling.dual_lower"
                        | "scaling.dual_upper"
                )
            })
            .collect();
        sc.sandwich_applicable = sandwich.iter().all(|v| v.applicable);
        sc.sandwich_pass = sandwich.iter().all(|v| v.pass);
    }
    if let (Some(w), Some(be), Some(dh)) = (&a0.w, &a0.be, &a0.dual_hess) {
        if let Ok(r) = sandwich_ranges(&w.w, be, dh, sc.mu) {
            sc.primal_min = r.primal_min;
            sc.dual_max = r.dual_max;
        }
    }
    (sc.wx_error_plus, sc.wxt_error_plus) = scaling_plus_verdicts(&a0, &a1, input.z_plus, &mut out);
    sc.fallback_plus = a1.w.as_ref().is_some_and(|w| w.degenerate_fallback);
    let (mut eps3, mut eps4) = (f64::NAN, f64::NAN);
    if let Some(sb) = a1.bounds() {
        eps3 = sb.eps1;
        eps4 = sb.eps2;
        sc.l_p_plus = sb.l_p;
        sc.u_p_plus = sb.u_p;
        sc.l_d_plus = sb.l_d;
        sc.u_d_plus = sb.u_d;
        if let Some(b0) = sb0 {
            sc.l_p_plus_printed = 1.0 - sb.eps1 - b0.eps2;
        }
    }

    let pred_floor = predictor_linear_floor(input.problem, &a0, input.z, input.predictor, p);
    predictor_verdicts(
        pred_floor,
        &a0,
        &a1,
        input.z,
        input.z_plus,
        input.predictor,
        p,
        &mut out,
        &mut sc,
    );
    let cor_floor = linear_floor(
        input.problem,
        input.corrector,
        &vec![0.0; input.problem.m() + input.problem.n() + 1],
    );
    let crude = corrector_verdicts(
        cor_floor,
        &a1,
        &a2,
        input.z_plus,
        input.z_pp,
        input.corrector,
        p,
        Some((&a0, sc.mu_e)),
        &mut out,
        &mut sc,
    );
    StepAudit {
        verdicts: out,
        scalars: sc,
        bounds: BoundContext {
            theta: p.theta(),
            omega1: p.omega1(),
            omega2: p.omega2(),
            eps3,
            eps4,
            crude_xtilde_bound: crude,
        },
    }
}

/// The predictor direction targets `-(1-γ)G(z)`. Its orthogonality also
/// rests on `⟨z, G(z)⟩ = -(⟨x,s⟩ + τκ)`, which the computed `G(z)` meets only
/// to `ε|z|ᵀ|G|`, entering with weight `(1-γ)²`.
fn predictor_linear_floor(
    problem: &ConicProblem,
    a0: &PointAnalysis,
    z: &HsdPoint,
    dir: &Direction,
    params: &StepParameters,
) -> f64 {
    let target: Vec<f64> = a0.g.iter().map(|g| -(1.0 - params.gamma) * g).collect();
    if target.is_empty() {
        return f64::INFINITY;
    }
    let terms = (problem.m() + problem.n() + 1) as f64;
    let z_norm = (norm2(&z.y).powi(2) + norm2(&z.x).powi(2) + z.tau * z.tau).sqrt();
    let g_rounding = (1.0 - params.gamma).powi(2) * terms * f64::EPSILON * z_norm * a0.g_magnitude;
    linear_floor(problem, dir, &target) + g_rounding
}

/// Predictor checks alone; see [`audit_step`] for the full set.
pub fn check_predictor(
    problem: &ConicProblem,
    z: &HsdPoint,
    z_plus: &HsdPoint,
    dir: &Direction,
    params: &StepParameters,
) -> Vec<LemmaVerdict> {
    let a0 = PointAnalysis::new(problem, z, params.beta, params.eta);
    let a1 = PointAnalysis::new(problem, z_plus, params.beta, params.eta);
    let mut out = Vec::new();
    let mut sc = nan_scalars();
    let floor = predictor_linear_floor(problem, &a0, z, dir, params);
    predictor_verdicts(floor, &a0, &a1, z, z_plus, dir, params, &mut out, &mut sc);
    out
}

/// Corrector checks alone. `z` is the iterate the predictor started from;
/// without it the checks that chain back to `z` are inapplicable.
pub fn check_corrector(
    problem: &ConicProblem,
    z: Option<&HsdPoint>,
    z_plus: &HsdPoint,
    z_pp: &HsdPoint,
    dir: &Direction,
    params: &StepParameters,
) -> Vec<LemmaVerdict> {
    let a0 = z.map(|z| PointAnalysis::new(problem, z, params.beta, params.eta));
    let a1 = PointAnalysis::new(problem, z_plus, params.beta, params.eta);
    let a2 = PointAnalysis::new(problem, z_pp, params.beta, params.eta);
    let mut out = Vec::new();
    let mut sc = nan_scalars();
    let origin = a0.as_ref().zip(z).map(|(a, z)| (a, z.mu_e(params.nu)));
    let floor = linear_floor(problem, dir, &vec![0.0; problem.m() + problem.n() + 1]);
    corrector_verdicts(
        floor, &a1, &a2, z_plus, z_pp, dir, params, origin, &mut out, &mut sc,
    );
    out
}

/// Worst case of `f` over the steps: the maximum, ignoring NaN unless all are NaN.
fn worst(audits: &[&StepAudit], f: impl Fn(&StepScalars) -> f64, lower: bool) -> f64 {
    let vals = audits.iter().map(|a| f(&a.scalars)).filter(|v| !v.is_nan());
    let out = if lower {
        vals.fold(f64::INFINITY, f64::min)
    } else {
        vals.fold(f64::NEG_INFINITY, f64::max)
    };
    if out.is_infinite() {
        f64::NAN
    } else {
        out
    }
}

/// The numeric constants of the convergence proof for the fixed parameters
/// `α = 1/(100ν)`, `β = γ = 0.9`, `η = 1/(400√ν)`, each checked as the worst
/// case over the given steps. Inapplicable for any other parameter set.
pub fn check_fixed_parameter_constants(
    audits: &[&StepAudit],
    params: &StepParameters,
) -> Vec<LemmaVerdict> {
    let ok = params.is_fixed_set() && !audits.is_empty();
    let nu = params.nu;
    let (alpha, beta, gamma) = (params.alpha, params.beta, params.gamma);
    let th = params.theta();
    let w1 = params.omega1();
    let mut out = Vec::new();
    let rt = nu.sqrt();

    out.push(LemmaVerdict::identity(
        "fixed.theta",
        rel(th, 0.1 * (nu + 1.0)),
        ok,
    ));
    out.push(LemmaVerdict::identity(
        "fixed.omega1",
        rel(w1, 1.0 + (nu + 1.0) / (180000.0 * nu.powi(3))),
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.omega1_bound",
        w1,
        1.0 + 1.0 / 90000.0,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.tau_kappa_step_cap",
        alpha,
        (2.0 * beta / th).sqrt(),
        ok,
    ));

    out.push(LemmaVerdict::ge(
        "fixed.l_p",
        worst(audits, |s| s.l_p, true),
        0.97966,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.u_d",
        worst(audits, |s| s.u_d, false),
        1.02546,
        ok,
    ));
    out.push(LemmaVerdict::ge(
        "fixed.measured_primal_min",
        worst(audits, |s| s.primal_min, true),
        0.97966,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.measured_dual_max",
        worst(audits, |s| s.dual_max, false),
        1.02546,
        ok,
    ));

    out.push(LemmaVerdict::le(
        "fixed.delta_p_plus",
        worst(audits, |s| s.d_plus * rt, false),
        0.00747,
        ok,
    ));
    out.push(LemmaVerdict::ge(
        "fixed.l_p_plus",
        worst(audits, |s| s.l_p_plus, true),
        0.93719,
        ok,
    ));
    out.push(LemmaVerdict::ge(
        "fixed.l_p_plus_printed",
        worst(audits, |s| s.l_p_plus_printed, true),
        0.93719,
        ok,
    ));
    out.push(LemmaVerdict::ge(
        "fixed.l_d_plus",
        worst(audits, |s| s.l_d_plus, true),
        0.92326,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.u_p_plus",
        worst(audits, |s| s.u_p_plus, false),
        1.06281,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.u_d_plus",
        worst(audits, |s| s.u_d_plus, false),
        1.07885,
        ok,
    ));

    out.push(LemmaVerdict::le(
        "fixed.predictor_primal_step",
        worst(audits, |s| s.predictor_primal_step, false),
        0.00477,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.predictor_dual_step",
        worst(audits, |s| s.predictor_dual_step, false),
        0.00478,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.corrector_primal_step",
        worst(audits, |s| s.corrector_primal_step, false),
        0.00796,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.corrector_dual_step",
        worst(audits, |s| s.corrector_dual_step, false),
        0.00800,
        ok,
    ));

    // ½α²θ + ½u^P₊(2-β)ω₁‖δᴾ₊‖² ≤ (1-β)αγ, normalized by the right side.
    let target = (1.0 - beta) * alpha * gamma;
    out.push(LemmaVerdict::le(
        "fixed.tau_kappa_chain",
        worst(
            audits,
            |s| {
                (0.5 * alpha * alpha * th
                    + 0.5 * s.u_p_plus * (2.0 - beta) * w1 * s.d_plus * s.d_plus)
                    / target
            },
            false,
        ),
        1.0,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.scaled_shadow_distance",
        worst(audits, |s| s.dw_plus / (s.mu_plus / nu).sqrt(), false),
        0.00771,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.shadow_product_chain",
        worst(
            audits,
            |s| nu * beta * params.decay() * (s.shadow_product_plus - 1.0),
            false,
        ),
        0.00077,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.shadow_product_margin",
        0.00077,
        nu * (alpha * gamma * (1.0 - beta) - alpha * alpha * th / (2.0 * nu)),
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.delta_p_pp",
        worst(audits, |s| s.d_pp * rt, false),
        0.00074,
        ok,
    ));
    out.push(LemmaVerdict::le(
        "fixed.delta_p_pp_below_eta",
        0.00074 / rt,
        params.eta,
        ok,
    ));
    out
}

/// Fixed parameters implied by a trace, if its steps are the fixed ones:
/// constant `α` with `γ = 0.9` and `ν = 1/(100α)` an integer.
pub fn infer_fixed_parameters(records: &[IterationRecord]) -> Option<StepParameters> {
    let steps = records.get(1..).filter(|s| !s.is_empty())?;
    let alpha = steps[0].alpha;
    if !(alpha > 0.0) || steps.iter().any(|r| r.alpha != alpha || r.gamma != 0.9) {
        return None;
    }
    let nu = 1.0 / (100.0 * alpha);
    let rounded = nu.round();
    if rounded < 1.0 || (nu - rounded).abs() > 1e-9 * rounded {
        return None;
    }
    let p = StepParameters::fixed(rounded);
    (p.alpha == alpha).then_some(p)
}

/// Checks that use only the stored trace columns: the exact decay of `μᵉ` and
/// `‖G‖` per step, the neighborhood flags, the inline verdict count, and
/// (for fixed-parameter traces) the closed-form decay and the post-corrector
/// distance constant.
pub fn audit_trace(records: &[IterationRecord]) -> Vec<LemmaVerdict> {
    let mut out = Vec::new();
    let Some(first) = records.first() else {
        out.push(LemmaVerdict::ge("trace.nonempty", 0.0, 1.0, true));
        return out;
    };
    let numbered = records.iter().enumerate().all(|(k, r)| r.iter == k);
    out.push(LemmaVerdict::le(
        "trace.numbering",
        if numbered { 0.0 } else { 1.0 },
        0.0,
        true,
    ));
    out.push(LemmaVerdict::identity(
        "trace.initial_mu_e",
        first.mu_e - 1.0,
        true,
    ));
    out.push(LemmaVerdict::identity(
        "trace.initial_tau_kappa",
        (first.tau - 1.0).abs() + (first.kappa - 1.0).abs(),
        true,
    ));
    let res0 = first.res_norm;
    let mut mu_worst: f64 = 0.0;
    let mut res_worst: f64 = 0.0;
    for w in records.windows(2) {
        let f = 1.0 - w[1].alpha * (1.0 - w[1].gamma);
        mu_worst = mu_worst.max(rel(w[1].mu_e, f * w[0].mu_e));
        let r = (w[1].res_norm - f * w[0].res_norm).abs() / (w[0].res_norm + RESIDUAL_FLOOR * res0);
        res_worst = res_worst.max(if r.is_nan() { f64::INFINITY } else { r });
        if rel(w[1].mu_e, f * w[0].mu_e).is_nan() {
            mu_worst = f64::INFINITY;
        }
    }
    out.push(LemmaVerdict::identity(
        "trace.complementarity_decay",
        mu_worst,
        true,
    ));
    out.push(LemmaVerdict::identity(
        "trace.residual_decay",
        res_worst,
        true,
    ));
    let broken = records
        .iter()
        .map(|r| r.assumptions.iter().filter(|a| !**a).count())
        .sum::<usize>();
    out.push(LemmaVerdict::le(
        "trace.assumptions",
        broken as f64,
        0.0,
        true,
    ));
    let failures: usize = records.iter().map(|r| r.verdict_failures).sum();
    out.push(LemmaVerdict::le(
        "trace.inline_verdicts",
        failures as f64,
        0.0,
        true,
    ));
    let tk_min = records
        .iter()
        .map(|r| r.tau.min(r.kappa))
        .fold(f64::INFINITY, f64::min);
    out.push(LemmaVerdict::ge(
        "trace.tau_kappa_positive",
        tk_min,
        0.0,
        true,
    ));

    match infer_fixed_parameters(records) {
        Some(p) => {
            let f = p.decay();
            let mut mu_dev: f64 = 0.0;
            let mut res_dev: f64 = 0.0;
            let mut d_worst: f64 = 0.0;
            for r in &records[1..] {
                let expected = f.powi(r.iter as i32);
                mu_dev = mu_dev.max(rel(r.mu_e, expected * first.mu_e));
                res_dev = res_dev.max(rel(r.res_norm, expected * res0));
                d_worst = d_worst.max(r.delta_p_norm_x * p.nu.sqrt());
            }
            out.push(LemmaVerdict::identity(
                "trace.fixed_complementarity",
                mu_dev,
                true,
            ));
            out.push(LemmaVerdict::identity(
                "trace.fixed_residual",
                res_dev,
                true,
            ));
            out.push(LemmaVerdict::le(
                "trace.fixed_delta_p_pp",
                d_worst,
                0.00074,
                true,
            ));
        }
        None => {
            for id in [
                "trace.fixed_complementarity",
                "trace.fixed_residual",
                "trace.fixed_delta_p_pp",
            ] {
                out.push(LemmaVerdict::inapplicable(id));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConeSpec;
    use crate::linalg::DenseMatrix;
    use crate::scaling::ANALYSIS_LIMIT;
    use crate::solver::{corrector_step, predictor_step, solve, SolverConfig};

    fn tiny_lp() -> ConicProblem {
        ConicProblem::new(
            DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            vec![1.0],
            vec![1.0, 2.0],
            ConeSpec::NonnegOrthant(2),
        )
        .unwrap()
    }

    #[test]
    fn pass_rule() {
        assert!(LemmaVerdict::le("a", 1.0, 1.0, true).pass);
        assert!(LemmaVerdict::le("a", 1.0 + 1e-9, 1.0, true).pass);
        assert!(!LemmaVerdict::le("a", 1.0 + 1e-7, 1.0, true).pass);
        assert!(!LemmaVerdict::le("a", 0.0, 1.0, false).pass);
        assert!(!LemmaVerdict::le("a", f64::NAN, 1.0, true).pass);
        let v = LemmaVerdict::ge("b", 2.0, 3.0, true);
        assert!(!v.pass && v.failed());
        assert_eq!((v.lhs, v.rhs, v.slack), (3.0, 2.0, -1.0));
    }

    #[test]
    fn bounds_reduce_at_zero_distance() {
        let p = StepParameters::fixed(2.0);
        let sb = sandwich_bounds(0.0, 2.0).unwrap();
        let (b, ok) = prim_delta_one_bound(0.01, &StepParameters { alpha: 0.0, ..p }, &sb);
        assert!(ok && (b - 0.01).abs() <= 1e-15);
        let (b, ok) = shadow_inner_product_bound(0.0, 0.7, 2.0, 3.0, 0.95, 1.05);
        assert!(ok && b == 1.0);
        let (b, ok) = prim_delta_two_bound(0.0, 0.7, 2.0, 0.95, 1.05, 1.05);
        assert!(ok && b == 0.0);
        let (_, ok) = prim_delta_two_bound(0.9, 0.7, 2.0, 0.95, 1.05, 1.05);
        assert!(!ok);
    }

    #[test]
    fn central_point_with_full_centering_has_zero_bounds() {
        let problem = tiny_lp();
        let z = HsdPoint::initial(&problem).unwrap();
        let params = StepParameters {
            beta: 1.0,
            gamma: 1.0,
            ..StepParameters::fixed(problem.nu())
        };
        let step = predictor_step(&problem, &z, &params).unwrap();
        let v = check_predictor(&problem, &z, &step.z_plus, &step.direction, &params);
        let norm = v.iter().find(|v| v.id == "predictor.norm_w").unwrap();
        assert!(norm.pass && norm.lhs.abs() <= 1e-14 && norm.rhs.abs() <= 1e-15);
        assert!(v.iter().all(|v| !v.failed()), "{v:?}");
    }

    #[test]
    fn zero_corrector_passes() {
        let problem = tiny_lp();
        let z = HsdPoint::initial(&problem).unwrap();
        let params = StepParameters::fixed(problem.nu());
        let cor = corrector_step(&problem, &z).unwrap();
        let v = check_corrector(&problem, None, &z, &cor.z_pp, &cor.direction, &params);
        assert!(v.iter().all(|v| !v.failed()), "{v:?}");
    }

    #[test]
    fn inflated_predictor_is_caught() {
        let problem = tiny_lp();
        let z = HsdPoint::initial(&problem).unwrap();
        let params = StepParameters::fixed(problem.nu());
        let step = predictor_step(&problem, &z, &params).unwrap();
        let bad = step.direction.scaled(1.5);
        let z_plus = z.step(params.alpha, &bad);
        let v = check_predictor(&problem, &z, &z_plus, &bad, &params);
        assert!(v.iter().any(|v| v.failed()));
    }

    #[test]
    fn scaling_out_of_region_is_inapplicable() {
        let problem = ConicProblem::new(
            DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            vec![1.0],
            vec![1.0, 1.0],
            ConeSpec::NonnegOrthant(2),
        )
        .unwrap();
        // ‖δᴾ‖_x ≈ 0.189
        let z = HsdPoint {
            y: vec![0.0],
            x: vec![1.0, 1.0],
            tau: 1.0,
            s: vec![1.0, 1.3],
            kappa: 1.0,
        };
        let be = barrier_eval(&problem.cone, &z.x).unwrap();
        let pq = path_quantities(&problem, &z, &be).unwrap();
        assert!(pq.delta_p_norm_x > ANALYSIS_LIMIT);
        let w = build_scaling(&z.x, &z.s, &pq, &be).unwrap();
        let v = check_scaling(&problem, &z, &w);
        let lower = v.iter().find(|v| v.id == "scaling.primal_lower").unwrap();
        assert!(!lower.applicable);
        assert!(
            v.iter()
                .find(|v| v.id == "scaling.maps_x_to_s")
                .unwrap()
                .pass
        );
    }

    #[test]
    fn fixed_constants_guarded_by_parameters() {
        let problem = tiny_lp();
        let r = solve(&problem, &SolverConfig::theoretical(0.99).with_verify(true)).unwrap();
        assert!(!r.fixed_parameter_checks.is_empty());
        assert!(
            r.fixed_parameter_checks.iter().all(|v| v.pass),
            "{:?}",
            r.fixed_parameter_checks
        );
        let audits: Vec<&StepAudit> = r.trace.iter().filter_map(|t| t.audit.as_deref()).collect();
        let other = StepParameters {
            beta: 0.5,
            ..r.parameters
        };
        let v = check_fixed_parameter_constants(&audits, &other);
        assert!(v.iter().all(|v| !v.applicable));
    }

    #[test]
    fn trace_audit_detects_tampering() {
        let problem = tiny_lp();
        let r = solve(&problem, &SolverConfig::theoretical(0.99).with_verify(true)).unwrap();
        let clean = audit_trace(&r.trace);
        assert!(clean.iter().all(|v| !v.failed()), "{clean:?}");
        assert!(clean.iter().all(|v| v.applicable));
        let mut bad = r.trace.clone();
        bad[3].mu_e *= 1.0 + 1e-6;
        assert!(audit_trace(&bad).iter().any(|v| v.failed()));
        let mut bad = r.trace.clone();
        bad[2].assumptions[4] = false;
        assert!(audit_trace(&bad).iter().any(|v| v.failed()));
    }
}
