//! The homogeneous self-dual model: residual operator `G`, complementarity
//! measures, the neighborhood assumptions (A1)–(A5) and solution
//! classification from the `(τ, κ)` pair.

use serde::{Deserialize, Serialize};

use crate::cones::{self, barrier_eval, BarrierEval, ConeSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_dual, norm_induced, DenseMatrix};

/// `min ⟨c, x⟩ s.t. Ax = b, x ∈ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cone: ConeSpec,
}

impl ConicProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, c: Vec<f64>, cone: ConeSpec) -> Result<Self> {
        cone.validate()?;
        if a.rows() != b.len() || a.cols() != c.len() || cone.dim() != c.len() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, b has {}, c has {}, cone has dimension {}",
                a.rows(),
                a.cols(),
                b.len(),
                c.len(),
                cone.dim()
            )));
        }
        if a.rank(1e-12) < a.rows() {
            log::warn!("constraint matrix does not have full row rank");
        }
        Ok(Self { a, b, c, cone })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn nu(&self) -> f64 {
        self.cone.nu()
    }
}

/// Iterate `z = (y, x, τ, s, κ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsdPoint {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub tau: f64,
    pub s: Vec<f64>,
    pub kappa: f64,
}

/// A step in the space of [`HsdPoint`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub dy: Vec<f64>,
    pub dx: Vec<f64>,
    pub dtau: f64,
    pub ds: Vec<f64>,
    pub dkappa: f64,
}

impl Direction {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            dy: vec![0.0; m],
            dx: vec![0.0; n],
            dtau: 0.0,
            ds: vec![0.0; n],
            dkappa: 0.0,
        }
    }

    /// `self + t * other`
    pub fn plus_scaled(&self, t: f64, other: &Direction) -> Direction {
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u + t * v).collect();
        Direction {
            dy: comb(&self.dy, &other.dy),
            dx: comb(&self.dx, &other.dx),
            dtau: self.dtau + t * other.dtau,
            ds: comb(&self.ds, &other.ds),
            dkappa: self.dkappa + t * other.dkappa,
        }
    }

    pub fn scaled(&self, t: f64) -> Direction {
        Direction::zeros(self.dy.len(), self.dx.len()).plus_scaled(t, self)
    }
}

impl HsdPoint {
    /// `y = 0`, `x = s = x₀` with `x₀ = -F'(x₀)`, `τ = κ = 1`.
    pub fn initial(problem: &ConicProblem) -> Result<Self> {
        let x0 = cones::initial_point(&problem.cone)?;
        Ok(Self {
            y: vec![0.0; problem.m()],
            x: x0.clone(),
            tau: 1.0,
            s: x0,
            kappa: 1.0,
        })
    }

    /// `z + α Δz`
    pub fn step(&self, alpha: f64, d: &Direction) -> HsdPoint {
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u + alpha * v).collect();
        HsdPoint {
            y: comb(&self.y, &d.dy),
            x: comb(&self.x, &d.dx),
            tau: self.tau + alpha * d.dtau,
            s: comb(&self.s, &d.ds),
            kappa: self.kappa + alpha * d.dkappa,
        }
    }

    pub fn mu_e(&self, nu: f64) -> f64 {
        (dot(&self.x, &self.s) + self.tau * self.kappa) / (nu + 1.0)
    }
}

fn apply_g(
    p: &ConicProblem,
    y: &[f64],
    x: &[f64],
    tau: f64,
    s: &[f64],
    kappa: f64,
) -> Result<Vec<f64>> {
    let (m, n) = (p.m(), p.n());
    if y.len() != m || x.len() != n || s.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "point with |y|={}, |x|={}, |s|={} for a problem with m={m}, n={n}",
            y.len(),
            x.len(),
            s.len()
        )));
    }
    let mut out = Vec::with_capacity(m + n + 1);
    let ax = p.a.mul_vec(x);
    out.extend(ax.iter().zip(&p.b).map(|(a, b)| a - b * tau));
    let aty = p.a.tr_mul_vec(y);
    out.extend((0..n).map(|j| -aty[j] + p.c[j] * tau - s[j]));
    out.push(dot(&p.b, y) - dot(&p.c, x) - kappa);
    Ok(out)
}

/// `G(z) = [Ax - bτ; -Aᵀy + cτ - s; bᵀy - cᵀx - κ]`
pub fn residual(problem: &ConicProblem, z: &HsdPoint) -> Result<Vec<f64>> {
    apply_g(problem, &z.y, &z.x, z.tau, &z.s, z.kappa)
}

/// `G` applied to a direction (the operator is linear).
pub fn direction_residual(problem: &ConicProblem, d: &Direction) -> Result<Vec<f64>> {
    apply_g(problem, &d.dy, &d.dx, d.dtau, &d.ds, d.dkappa)
}

#[derive(Debug, Clone)]
pub struct PathQuantities {
    pub mu: f64,
    pub mu_tilde: f64,
    pub mu_e: f64,
    pub mu_tilde_e: f64,
    pub x_tilde: Vec<f64>,
    pub s_tilde: Vec<f64>,
    /// `δᴾ = x - μx̃`
    pub delta_p: Vec<f64>,
    /// `δᴰ = s - μs̃`
    pub delta_d: Vec<f64>,
    /// `‖δᴾ‖_x` under `F''(x)`
    pub delta_p_norm_x: f64,
    /// Rounding level of `δᴾ` in `‖·‖_x`, including that of `x̃`.
    pub delta_p_rounding: f64,
    /// Rounding level of `δᴰ` in `‖·‖*_x`, divided by `μ`.
    pub delta_d_rounding: f64,
}

pub fn path_quantities(
    problem: &ConicProblem,
    z: &HsdPoint,
    be: &BarrierEval,
) -> Result<PathQuantities> {
    let tk = z.tau * z.kappa;
    if !(tk > 0.0) {
        return Err(Error::NotInterior { margin: tk });
    }
    let sp = cones::shadow_pair(&problem.cone, &z.x, &z.s, be)?;
    let nu = be.nu;
    let mu = sp.mu;
    let delta_p: Vec<f64> =
        z.x.iter()
            .zip(&sp.x_tilde)
            .map(|(x, xt)| x - mu * xt)
            .collect();
    let delta_d: Vec<f64> =
        z.s.iter()
            .zip(&sp.s_tilde)
            .map(|(s, st)| s - mu * st)
            .collect();
    let delta_p_norm_x = norm_induced(&delta_p, &be.hessian)?;
    let abs_sum = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(p, q)| p.abs() + mu * q.abs())
            .collect()
    };
    let delta_p_rounding = f64::EPSILON * norm_induced(&abs_sum(&z.x, &sp.x_tilde), &be.hessian)?
        + cones::shadow_rounding(&problem.cone, &z.s, &sp.x_tilde);
    let delta_d_rounding = norm_dual(&abs_sum(&z.s, &sp.s_tilde), &be.hessian)
        .map_or(f64::INFINITY, |v| f64::EPSILON * v / mu);
    Ok(PathQuantities {
        mu,
        mu_tilde: sp.mu_tilde,
        mu_e: z.mu_e(nu),
        mu_tilde_e: (dot(&sp.x_tilde, &sp.s_tilde) + 1.0 / tk) / (nu + 1.0),
        x_tilde: sp.x_tilde,
        s_tilde: sp.s_tilde,
        delta_p,
        delta_d,
        delta_p_norm_x,
        delta_p_rounding,
        delta_d_rounding,
    })
}

/// Sign tests of (A1)–(A5) together with the measured slacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub a5: bool,
    pub primal_margin: f64,
    pub dual_margin: f64,
    /// `τκ - βμᵉ`
    pub tau_kappa_slack: f64,
    /// `min(τ, κ)`
    pub tau_kappa_min: f64,
    /// `1 - βμᵉμ̃`
    pub shadow_slack: f64,
    /// `η - ‖δᴾ‖_x`
    pub delta_slack: f64,
}

impl NeighborhoodReport {
    pub fn all(&self) -> bool {
        self.a1 && self.a2 && self.a3 && self.a4 && self.a5
    }

    pub fn flags(&self) -> [bool; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a5]
    }
}

/// Evaluates (A1)–(A5); quantities that cannot be formed are reported as NaN
/// and their flags as false.
pub fn check_assumptions(
    problem: &ConicProblem,
    z: &HsdPoint,
    beta: f64,
    eta: f64,
) -> NeighborhoodReport {
    let pq = barrier_eval(&problem.cone, &z.x)
        .ok()
        .filter(|_| {
            cones::dual_membership_margin(&problem.cone, &z.s) > 0.0 && z.tau.min(z.kappa) > 0.0
        })
        .and_then(|be| path_quantities(problem, z, &be).ok());
    neighborhood_report(problem, z, pq.as_ref(), beta, eta)
}

/// Same as [`check_assumptions`] with the path quantities already at hand.
pub fn neighborhood_report(
    problem: &ConicProblem,
    z: &HsdPoint,
    pq: Option<&PathQuantities>,
    beta: f64,
    eta: f64,
) -> NeighborhoodReport {
    let cone = &problem.cone;
    let nu = cone.nu();
    let primal_margin = cones::membership_margin(cone, &z.x);
    let dual_margin = cones::dual_membership_margin(cone, &z.s);
    let mu_e = z.mu_e(nu);
    let tau_kappa_slack = z.tau * z.kappa - beta * mu_e;
    let tau_kappa_min = z.tau.min(z.kappa);
    let (shadow_slack, delta_slack) = pq
        .filter(|_| primal_margin > 0.0 && dual_margin > 0.0 && tau_kappa_min > 0.0)
        .map_or((f64::NAN, f64::NAN), |pq| {
            (1.0 - beta * mu_e * pq.mu_tilde, eta - pq.delta_p_norm_x)
        });
    NeighborhoodReport {
        a1: primal_margin > 0.0 && dual_margin > 0.0,
        a2: tau_kappa_slack >= 0.0,
        a3: tau_kappa_min > 0.0,
        a4: shadow_slack >= 0.0,
        a5: delta_slack >= 0.0,
        primal_margin,
        dual_margin,
        tau_kappa_slack,
        tau_kappa_min,
        shadow_slack,
        delta_slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Unknown,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyTolerances {
    /// Dominance ratio between `τ` and `κ`.
    pub ratio: f64,
    /// Floor applied to the dominated quantity.
    pub guard: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            ratio: 1e3,
            guard: 1e-14,
        }
    }
}

/// Recovered solution or certificate.
///
/// For `Optimal` the vectors are `(x, y, s)/τ`. A primal infeasibility
/// certificate is scaled so that `bᵀy = 1`; a dual one so that `cᵀx = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub status: Status,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

pub fn classify_solution(
    problem: &ConicProblem,
    z: &HsdPoint,
    tol: ClassifyTolerances,
) -> Classification {
    let scaled = |status, t: f64| Classification {
        status,
        x: z.x.iter().map(|v| v / t).collect(),
        y: z.y.iter().map(|v| v / t).collect(),
        s: z.s.iter().map(|v| v / t).collect(),
    };
    if z.tau >= tol.ratio * z.kappa.max(tol.guard) {
        return scaled(Status::Optimal, z.tau);
    }
    if z.kappa >= tol.ratio * z.tau.max(tol.guard) {
        let by = dot(&problem.b, &z.y);
        if by > 0.0 {
            return scaled(Status::PrimalInfeasible, by);
        }
        let cx = dot(&problem.c, &z.x);
        if cx < 0.0 {
            return scaled(Status::DualInfeasible, -cx);
        }
    }
    scaled(Status::Unknown, 1.0)
}
