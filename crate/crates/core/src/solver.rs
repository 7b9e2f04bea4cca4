//! The predictor-corrector iteration on the homogeneous self-dual model.

use serde::{Deserialize, Serialize};

use crate::cones::{barrier_eval, BarrierEval};
use crate::error::{Error, Result};
use crate::hsd::{
    classify_solution, direction_residual, neighborhood_report, path_quantities, residual,
    Classification, ClassifyTolerances, ConicProblem, Direction, HsdPoint, NeighborhoodReport,
    PathQuantities, Status,
};
use crate::linalg::{dot, norm2, DenseMatrix, LuFactor, SymMatrix};
use crate::scaling::{build_scaling, ScalingMatrix};
use crate::verifier::{self, LemmaVerdict, StepAudit, StepInput, VerdictSummary};

/// Refinement sweeps applied to every reduced KKT solve.
const REFINEMENT_STEPS: usize = 2;
/// Step shrink factor of the adaptive search.
const ADAPTIVE_SHRINK: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Theoretical,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Target factor for `μᵉ` and `‖G(z)‖/‖G(z₀)‖`.
    pub epsilon: f64,
    /// Defaults to `ceil(2000 ν ln(1/ε)) + 100`.
    pub max_iterations: Option<usize>,
    /// Adaptive mode: largest step tried (default 1).
    pub alpha_override: Option<f64>,
    /// Adaptive mode: centering weight (default 0.9).
    pub gamma_override: Option<f64>,
    pub beta: f64,
    /// Audit every iteration with the verifier.
    pub verify: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Theoretical,
            epsilon: 1e-8,
            max_iterations: None,
            alpha_override: None,
            gamma_override: None,
            beta: 0.9,
            verify: false,
        }
    }
}

impl SolverConfig {
    pub fn theoretical(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn adaptive(epsilon: f64) -> Self {
        Self {
            mode: Mode::Adaptive,
            epsilon,
            ..Self::default()
        }
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} not in (0, 1)",
                self.epsilon
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "beta {} not in (0, 1]",
                self.beta
            )));
        }
        if self.mode == Mode::Theoretical
            && (self.alpha_override.is_some() || self.gamma_override.is_some())
        {
            return Err(Error::InvalidConfig(
                "theoretical mode fixes alpha = 1/(100 nu) and gamma = 0.9".into(),
            ));
        }
        if let Some(a) = self.alpha_override {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidConfig(format!("alpha {a} not in (0, 1]")));
            }
        }
        if let Some(g) = self.gamma_override {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::InvalidConfig(format!("gamma {g} not in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn iteration_limit(&self, nu: f64) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (2000.0 * nu * (1.0 / self.epsilon).ln()).ceil() as usize + 100)
    }

    /// The fixed-step parameters; in adaptive mode `alpha` is the fallback step.
    pub fn parameters(&self, nu: f64) -> StepParameters {
        let mut p = StepParameters::fixed(nu);
        p.beta = self.beta;
        if let Some(g) = self.gamma_override {
            p.gamma = g;
        }
        p
    }
}

/// `θ = ν(1 - 2γ + γ²/β) + 1 - β/2 + γ²/(2β) - γ`
pub fn theta(nu: f64, beta: f64, gamma: f64) -> f64 {
    nu * (1.0 - 2.0 * gamma + gamma * gamma / beta) + 1.0 - 0.5 * beta + 0.5 * gamma * gamma / beta
        - gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParameters {
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl StepParameters {
    /// `α = 1/(100ν)`, `β = γ = 0.9`, `η = 1/(400√ν)`.
    pub fn fixed(nu: f64) -> Self {
        Self {
            nu,
            alpha: 1.0 / (100.0 * nu),
            beta: 0.9,
            gamma: 0.9,
            eta: 1.0 / (400.0 * nu.sqrt()),
        }
    }

    pub fn with_step(self, alpha: f64, gamma: f64) -> Self {
        Self {
            alpha,
            gamma,
            ..self
        }
    }

    pub fn theta(&self) -> f64 {
        theta(self.nu, self.beta, self.gamma)
    }

    /// Upper bound on `μ₊/μ`.
    pub fn omega1(&self) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        1.0 + a * a * self.theta() / (2.0 * b * self.nu) + a * (g / b - 1.0)
    }

    pub fn omega2(&self) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        a * a * self.theta() / (2.0 * b * self.nu) + a * (g / b - 1.0).max(1.0 - g / (2.0 - b))
    }

    /// Whether these are exactly the fixed values for which the numeric
    /// constants of the convergence proof were derived.
    pub fn is_fixed_set(&self) -> bool {
        let f = Self::fixed(self.nu);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        self.nu >= 1.0
            && close(self.alpha, f.alpha)
            && close(self.beta, f.beta)
            && close(self.gamma, f.gamma)
            && close(self.eta, f.eta)
    }

    /// Per-iteration reduction factor `1 - α(1 - γ)` of `μᵉ` and `G`.
    pub fn decay(&self) -> f64 {
        1.0 - self.alpha * (1.0 - self.gamma)
    }
}

/// Right-hand side `(g, t, r)` of
/// `G(Δz) = g`, `τΔκ + κΔτ = t`, `WΔx + Δs = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionRhs {
    pub g: Vec<f64>,
    pub t: f64,
    pub r: Vec<f64>,
}

impl DirectionRhs {
    pub fn affine(z: &HsdPoint, g: &[f64]) -> Self {
        Self {
            g: g.iter().map(|v| -v).collect(),
            t: -z.tau * z.kappa,
            r: z.s.iter().map(|v| -v).collect(),
        }
    }

    pub fn centering(g: &[f64], pq: &PathQuantities) -> Self {
        Self {
            g: g.to_vec(),
            t: pq.mu_e,
            r: pq.s_tilde.iter().map(|v| pq.mu_e * v).collect(),
        }
    }

    /// `r = μ₊s̃₊ - s₊` with `g = 0`, `t = 0`.
    pub fn corrector(z_plus: &HsdPoint, pq_plus: &PathQuantities) -> Self {
        Self {
            g: vec![0.0; z_plus.y.len() + z_plus.x.len() + 1],
            t: 0.0,
            r: pq_plus
                .s_tilde
                .iter()
                .zip(&z_plus.s)
                .map(|(st, s)| pq_plus.mu * st - s)
                .collect(),
        }
    }
}

/// The reduced `(m+n+1)`-square system in `(Δy, Δx, Δτ)` after eliminating
/// `Δs = r - WΔx` and `Δκ = (t - κΔτ)/τ`, factored once per point.
pub struct KktSystem {
    k: DenseMatrix,
    lu: LuFactor,
    w: SymMatrix,
    tau: f64,
    kappa: f64,
    m: usize,
    n: usize,
}

impl KktSystem {
    pub fn new(problem: &ConicProblem, z: &HsdPoint, w: &SymMatrix) -> Result<Self> {
        let (m, n) = (problem.m(), problem.n());
        if w.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "W has dimension {}, expected {n}",
                w.dim()
            )));
        }
        if !(z.tau > 0.0 && z.kappa > 0.0) {
            return Err(Error::NotInterior {
                margin: z.tau.min(z.kappa),
            });
        }
        let dim = m + n + 1;
        let mut k = DenseMatrix::zeros(dim, dim);
        let a = &problem.a;
        for i in 0..m {
            for j in 0..n {
                let v = a.get(i, j);
                k.set(i, m + j, v);
                k.set(m + j, i, -v);
            }
            k.set(i, m + n, -problem.b[i]);
            k.set(m + n, i, problem.b[i]);
        }
        for i in 0..n {
            for j in 0..n {
                k.set(m + i, m + j, w.get(i, j));
            }
            k.set(m + i, m + n, problem.c[i]);
            k.set(m + n, m + i, -problem.c[i]);
        }
        k.set(m + n, m + n, z.kappa / z.tau);
        let lu = LuFactor::new(&k)?;
        Ok(Self {
            k,
            lu,
            w: w.clone(),
            tau: z.tau,
            kappa: z.kappa,
            m,
            n,
        })
    }

    pub fn solve(&self, rhs: &DirectionRhs) -> Result<Direction> {
        let (m, n) = (self.m, self.n);
        if rhs.g.len() != m + n + 1 || rhs.r.len() != n {
            return Err(Error::DimensionMismatch("direction right-hand side".into()));
        }
        let mut b = rhs.g.clone();
        for j in 0..n {
            b[m + j] += rhs.r[j];
        }
        b[m + n] += rhs.t / self.tau;
        let u = self.lu.solve_refined(&self.k, &b, REFINEMENT_STEPS);
        let dy = u[..m].to_vec();
        let dx = u[m..m + n].to_vec();
        let dtau = u[m + n];
        let wdx = self.w.mul_vec(&dx);
        let ds = rhs.r.iter().zip(&wdx).map(|(r, v)| r - v).collect();
        let dkappa = (rhs.t - self.kappa * dtau) / self.tau;
        Ok(Direction {
            dy,
            dx,
            dtau,
            ds,
            dkappa,
        })
    }
}

/// Solves a single right-hand side; see [`KktSystem`] to reuse the factorization.
pub fn solve_directions(
    problem: &ConicProblem,
    z: &HsdPoint,
    w: &SymMatrix,
    rhs: &DirectionRhs,
) -> Result<Direction> {
    KktSystem::new(problem, z, w)?.solve(rhs)
}

/// Largest violation of the three defining equations of a direction,
/// relative to `1 + ‖rhs‖`.
pub fn direction_equation_error(
    problem: &ConicProblem,
    z: &HsdPoint,
    w: &SymMatrix,
    rhs: &DirectionRhs,
    d: &Direction,
) -> Result<f64> {
    let gd = direction_residual(problem, d)?;
    let e_g = norm2(&crate::linalg::sub(&gd, &rhs.g));
    let e_t = (z.tau * d.dkappa + z.kappa * d.dtau - rhs.t).abs();
    let wdx = w.mul_vec(&d.dx);
    let e_r = norm2(
        &wdx.iter()
            .zip(&d.ds)
            .zip(&rhs.r)
            .map(|((a, b), r)| a + b - r)
            .collect::<Vec<_>>(),
    );
    let scale = 1.0 + (norm2(&rhs.g).powi(2) + rhs.t * rhs.t + norm2(&rhs.r).powi(2)).sqrt();
    Ok(e_g.max(e_t).max(e_r) / scale)
}

/// Everything the iteration needs at one point.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub z: HsdPoint,
    pub be: BarrierEval,
    pub pq: PathQuantities,
    pub scaling: ScalingMatrix,
    pub g: Vec<f64>,
}

impl IterateState {
    pub fn new(problem: &ConicProblem, z: HsdPoint) -> Result<Self> {
        let be = barrier_eval(&problem.cone, &z.x)?;
        let pq = path_quantities(problem, &z, &be)?;
        let scaling = build_scaling(&z.x, &z.s, &pq, &be)?;
        let g = residual(problem, &z)?;
        Ok(Self {
            z,
            be,
            pq,
            scaling,
            g,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PredictorStep {
    pub z_plus: HsdPoint,
    pub affine: Direction,
    pub centering: Direction,
    /// `Δz^aff + γΔz^cen`
    pub direction: Direction,
    /// `⟨Δx, Δs⟩ + ΔτΔκ` of the combined direction.
    pub orthogonality: f64,
    /// `‖G(z₊)‖/‖G(z)‖`
    pub residual_factor: f64,
}

fn interior_or_err(problem: &ConicProblem, z: &HsdPoint) -> Result<()> {
    let pm = crate::cones::membership_margin(&problem.cone, &z.x);
    let dm = crate::cones::dual_membership_margin(&problem.cone, &z.s);
    if !(pm > 0.0 && dm > 0.0 && z.tau > 0.0 && z.kappa > 0.0) {
        return Err(Error::StepLeftCone(format!(
            "primal margin {pm:e}, dual margin {dm:e}, tau {:e}, kappa {:e}",
            z.tau, z.kappa
        )));
    }
    Ok(())
}

fn predict(
    problem: &ConicProblem,
    st: &IterateState,
    alpha: f64,
    gamma: f64,
) -> Result<PredictorStep> {
    let kkt = KktSystem::new(problem, &st.z, &st.scaling.w)?;
    let affine = kkt.solve(&DirectionRhs::affine(&st.z, &st.g))?;
    let centering = kkt.solve(&DirectionRhs::centering(&st.g, &st.pq))?;
    let direction = affine.plus_scaled(gamma, &centering);
    let orthogonality = dot(&direction.dx, &direction.ds) + direction.dtau * direction.dkappa;
    let z_plus = st.z.step(alpha, &direction);
    interior_or_err(problem, &z_plus)?;
    let g_plus = residual(problem, &z_plus)?;
    let g_norm = norm2(&st.g);
    Ok(PredictorStep {
        z_plus,
        affine,
        centering,
        direction,
        orthogonality,
        residual_factor: if g_norm > 0.0 {
            norm2(&g_plus) / g_norm
        } else {
            0.0
        },
    })
}

/// `z₊ = z + α(Δz^aff + γΔz^cen)`.
pub fn predictor_step(
    problem: &ConicProblem,
    z: &HsdPoint,
    params: &StepParameters,
) -> Result<PredictorStep> {
    let st = IterateState::new(problem, z.clone())?;
    predict(problem, &st, params.alpha, params.gamma)
}

#[derive(Debug, Clone)]
pub struct CorrectorStep {
    pub z_pp: HsdPoint,
    pub direction: Direction,
}

fn correct(problem: &ConicProblem, plus: &IterateState) -> Result<CorrectorStep> {
    let kkt = KktSystem::new(problem, &plus.z, &plus.scaling.w)?;
    let direction = kkt.solve(&DirectionRhs::corrector(&plus.z, &plus.pq))?;
    Ok(CorrectorStep {
        z_pp: plus.z.step(1.0, &direction),
        direction,
    })
}

/// Full corrector step `z₊₊ = z₊ + Δz^cor`.
pub fn corrector_step(problem: &ConicProblem, z_plus: &HsdPoint) -> Result<CorrectorStep> {
    let plus = IterateState::new(problem, z_plus.clone())?;
    correct(problem, &plus)
}

/// One row of the iteration trace, describing the iterate `z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu_e: f64,
    pub res_norm: f64,
    pub tau: f64,
    pub kappa: f64,
    pub delta_p_norm_x: f64,
    /// Step used to reach this iterate (0 on the initial row).
    pub alpha: f64,
    pub gamma: f64,
    /// (A1)–(A5) at this iterate.
    pub assumptions: [bool; 5],
    pub verdict_failures: usize,
    pub scaling_fallback: bool,
    #[serde(skip)]
    pub report: Option<NeighborhoodReport>,
    /// Verifier output for the step that produced this iterate.
    #[serde(skip)]
    pub audit: Option<Box<StepAudit>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// `μᵉ ≤ ε` and `‖G(z)‖ ≤ ε‖G(z₀)‖`.
    TargetReached,
    /// Adaptive mode: an infeasibility certificate with residual below `ε`.
    CertificateFound,
    /// Adaptive mode: the scaling or KKT factorization broke down after progress.
    NumericalLimit,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub termination: Termination,
    pub iterations: usize,
    pub classification: Classification,
    /// `cᵀx` of the reported vectors.
    pub primal_objective: f64,
    /// `bᵀy` of the reported vectors.
    pub dual_objective: f64,
    /// `‖Ax - b‖` on `Optimal`, `‖Ax‖` on `DualInfeasible`.
    pub primal_residual: f64,
    /// `‖Aᵀy + s - c‖` on `Optimal`, `‖Aᵀy + s‖` on `PrimalInfeasible`.
    pub dual_residual: f64,
    pub mu_e: f64,
    pub final_point: HsdPoint,
    pub parameters: StepParameters,
    pub mode: Mode,
    pub trace: Vec<IterationRecord>,
    pub verdicts: VerdictSummary,
    /// Empty unless verification ran with the fixed parameter set.
    pub fixed_parameter_checks: Vec<LemmaVerdict>,
}

impl SolveResult {
    /// Failing verdicts, inline and fixed-parameter ones together.
    pub fn verdict_failures(&self) -> usize {
        self.verdicts.failed
            + self
                .fixed_parameter_checks
                .iter()
                .filter(|v| v.failed())
                .count()
    }
}

fn solution_residuals(problem: &ConicProblem, cl: &Classification) -> (f64, f64) {
    let ax = problem.a.mul_vec(&cl.x);
    let aty = problem.a.tr_mul_vec(&cl.y);
    match cl.status {
        Status::Optimal => {
            let p: Vec<f64> = ax.iter().zip(&problem.b).map(|(a, b)| a - b).collect();
            let d: Vec<f64> = (0..problem.n())
                .map(|j| aty[j] + cl.s[j] - problem.c[j])
                .collect();
            (norm2(&p), norm2(&d))
        }
        Status::PrimalInfeasible => {
            let d: Vec<f64> = (0..problem.n()).map(|j| aty[j] + cl.s[j]).collect();
            (f64::NAN, norm2(&d))
        }
        Status::DualInfeasible => (norm2(&ax), f64::NAN),
        Status::Unknown => (f64::NAN, f64::NAN),
    }
}

struct Trial {
    predictor: PredictorStep,
    corrector: CorrectorStep,
    next: IterateState,
    report: NeighborhoodReport,
}

/// Step-by-step driver; [`solve`] runs it to termination.
pub struct Solver<'a> {
    problem: &'a ConicProblem,
    config: SolverConfig,
    params: StepParameters,
    state: IterateState,
    res0: f64,
    trace: Vec<IterationRecord>,
    verdicts: VerdictSummary,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a ConicProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let params = config.parameters(problem.nu());
        let state = IterateState::new(problem, HsdPoint::initial(problem)?)?;
        let res0 = norm2(&state.g);
        let report =
            neighborhood_report(problem, &state.z, Some(&state.pq), params.beta, params.eta);
        let first = IterationRecord {
            iter: 0,
            mu_e: state.pq.mu_e,
            res_norm: res0,
            tau: state.z.tau,
            kappa: state.z.kappa,
            delta_p_norm_x: state.pq.delta_p_norm_x,
            alpha: 0.0,
            gamma: 0.0,
            assumptions: report.flags(),
            verdict_failures: 0,
            scaling_fallback: state.scaling.degenerate_fallback,
            report: Some(report),
            audit: None,
        };
        Ok(Self {
            problem,
            config,
            params,
            state,
            res0,
            trace: vec![first],
            verdicts: VerdictSummary::default(),
        })
    }

    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn point(&self) -> &HsdPoint {
        &self.state.z
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn parameters(&self) -> &StepParameters {
        &self.params
    }

    pub fn trace(&self) -> &[IterationRecord] {
        &self.trace
    }

    pub fn initial_residual_norm(&self) -> f64 {
        self.res0
    }

    fn trial(&self, alpha: f64, gamma: f64) -> Result<Trial> {
        let predictor = predict(self.problem, &self.state, alpha, gamma)?;
        let plus = IterateState::new(self.problem, predictor.z_plus.clone())?;
        let corrector = correct(self.problem, &plus)?;
        let next = IterateState::new(self.problem, corrector.z_pp.clone())?;
        let report = neighborhood_report(
            self.problem,
            &next.z,
            Some(&next.pq),
            self.params.beta,
            self.params.eta,
        );
        Ok(Trial {
            predictor,
            corrector,
            next,
            report,
        })
    }

    /// Largest `α = 0.9ᵏ α_max` whose predictor-corrector trial keeps
    /// (A1)–(A5); the fixed step otherwise.
    fn adaptive_trial(&self) -> Result<(f64, Trial)> {
        let gamma = self.params.gamma;
        let floor = self.params.alpha;
        let mut alpha = self.config.alpha_override.unwrap_or(1.0);
        while alpha > floor {
            if let Ok(t) = self.trial(alpha, gamma) {
                if t.report.all() {
                    return Ok((alpha, t));
                }
            }
            alpha *= ADAPTIVE_SHRINK;
        }
        log::debug!(
            "adaptive search fell back to the fixed step at iteration {}",
            self.iterations()
        );
        Ok((floor, self.trial(floor, gamma)?))
    }

    /// One predictor-corrector iteration.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        let (alpha, trial) = match self.config.mode {
            Mode::Theoretical => (
                self.params.alpha,
                self.trial(self.params.alpha, self.params.gamma)?,
            ),
            Mode::Adaptive => self.adaptive_trial()?,
        };
        let step_params = self.params.with_step(alpha, self.params.gamma);
        let iter = self.iterations() + 1;
        let audit = self.config.verify.then(|| {
            let audit = verifier::audit_step(&StepInput {
                problem: self.problem,
                z: &self.state.z,
                z_plus: &trial.predictor.z_plus,
                z_pp: &trial.corrector.z_pp,
                predictor: &trial.predictor.direction,
                corrector: &trial.corrector.direction,
                params: &step_params,
            });
            self.verdicts.add(iter, &audit.verdicts);
            Box::new(audit)
        });
        let next = trial.next;
        self.trace.push(IterationRecord {
            iter,
            mu_e: next.pq.mu_e,
            res_norm: norm2(&next.g),
            tau: next.z.tau,
            kappa: next.z.kappa,
            delta_p_norm_x: next.pq.delta_p_norm_x,
            alpha,
            gamma: step_params.gamma,
            assumptions: trial.report.flags(),
            verdict_failures: audit.as_ref().map_or(0, |a| a.failures()),
            scaling_fallback: next.scaling.degenerate_fallback,
            report: Some(trial.report),
            audit,
        });
        self.state = next;
        Ok(self.trace.last().expect("trace is never empty"))
    }

    fn certificate_found(&self) -> bool {
        let cl = classify_solution(self.problem, &self.state.z, ClassifyTolerances::default());
        let (p, d) = solution_residuals(self.problem, &cl);
        match cl.status {
            Status::PrimalInfeasible => d <= self.config.epsilon,
            Status::DualInfeasible => p <= self.config.epsilon,
            _ => false,
        }
    }

    /// The stopping rule, if it is met at the current iterate.
    pub fn termination(&self) -> Option<Termination> {
        let last = self.trace.last()?;
        let eps = self.config.epsilon;
        if last.mu_e <= eps && last.res_norm <= eps * self.res0 {
            return Some(Termination::TargetReached);
        }
        if self.config.mode == Mode::Adaptive && self.certificate_found() {
            return Some(Termination::CertificateFound);
        }
        None
    }

    pub fn finish(self, termination: Termination) -> SolveResult {
        let problem = self.problem;
        let z = self.state.z;
        let classification = classify_solution(problem, &z, ClassifyTolerances::default());
        let (primal_residual, dual_residual) = solution_residuals(problem, &classification);
        let fixed_parameter_checks = if self.config.verify && self.config.mode == Mode::Theoretical
        {
            let audits: Vec<&StepAudit> = self
                .trace
                .iter()
                .filter_map(|r| r.audit.as_deref())
                .collect();
            verifier::check_fixed_parameter_constants(&audits, &self.params)
        } else {
            Vec::new()
        };
        SolveResult {
            status: classification.status,
            termination,
            iterations: self.trace.len() - 1,
            primal_objective: dot(&problem.c, &classification.x),
            dual_objective: dot(&problem.b, &classification.y),
            primal_residual,
            dual_residual,
            classification,
            mu_e: self.state.pq.mu_e,
            final_point: z,
            parameters: self.params,
            mode: self.config.mode,
            trace: self.trace,
            verdicts: self.verdicts,
            fixed_parameter_checks,
        }
    }
}

fn is_numerical_breakdown(e: &Error) -> bool {
    matches!(
        e,
        Error::NotPositiveDefinite { .. }
            | Error::SingularSystem { .. }
            | Error::NegativeQuadratic { .. }
            | Error::NoConvergence { .. }
            | Error::NotInterior { .. }
            | Error::NotInteriorDual { .. }
            | Error::StepLeftCone(_)
    )
}

/// Runs the iteration from the standard initial point until the stopping rule
/// holds. Exceeding the iteration limit returns the partial result inside
/// [`Error::MaxIterationsExceeded`].
pub fn solve(problem: &ConicProblem, config: &SolverConfig) -> Result<SolveResult> {
    let limit = config.iteration_limit(problem.nu());
    let mut solver = Solver::new(problem, config.clone())?;
    loop {
        if let Some(t) = solver.termination() {
            return Ok(solver.finish(t));
        }
        if solver.iterations() >= limit {
            return Err(Error::MaxIterationsExceeded {
                limit,
                partial: Box::new(solver.finish(Termination::IterationLimit)),
            });
        }
        if let Err(e) = solver.step() {
            if config.mode == Mode::Adaptive
                && solver.iterations() > 0
                && is_numerical_breakdown(&e)
            {
                log::info!("stopping after numerical breakdown: {e}");
                return Ok(solver.finish(Termination::NumericalLimit));
            }
            return Err(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConeSpec;
    use crate::linalg::sub;

    fn tiny_lp() -> ConicProblem {
        ConicProblem::new(
            DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            vec![1.0],
            vec![1.0, 2.0],
            ConeSpec::NonnegOrthant(2),
        )
        .unwrap()
    }

    fn g_of(p: &ConicProblem, d: &Direction) -> Vec<f64> {
        direction_residual(p, d).unwrap()
    }

    #[test]
    fn affine_direction_cancels_residual() {
        let p = tiny_lp();
        let st = IterateState::new(&p, HsdPoint::initial(&p).unwrap()).unwrap();
        let rhs = DirectionRhs::affine(&st.z, &st.g);
        let d = solve_directions(&p, &st.z, &st.scaling.w, &rhs).unwrap();
        let gd = g_of(&p, &d);
        for (a, b) in gd.iter().zip(&st.g) {
            assert!((a + b).abs() <= 1e-12, "{a} vs {b}");
        }
        assert!(direction_equation_error(&p, &st.z, &st.scaling.w, &rhs, &d).unwrap() <= 1e-12);
    }

    #[test]
    fn centering_direction_equations() {
        let p = tiny_lp();
        let st = IterateState::new(&p, HsdPoint::initial(&p).unwrap()).unwrap();
        let rhs = DirectionRhs::centering(&st.g, &st.pq);
        let d = solve_directions(&p, &st.z, &st.scaling.w, &rhs).unwrap();
        let gd = g_of(&p, &d);
        assert!(norm2(&sub(&gd, &st.g)) <= 1e-12);
        let tk = st.z.tau * d.dkappa + st.z.kappa * d.dtau;
        assert!((tk - st.pq.mu_e).abs() <= 1e-12);
    }

    #[test]
    fn corrector_equations_off_center() {
        let p = tiny_lp();
        let z = HsdPoint {
            y: vec![0.3],
            x: vec![1.3, 0.6],
            tau: 1.1,
            s: vec![0.7, 1.4],
            kappa: 0.9,
        };
        let st = IterateState::new(&p, z.clone()).unwrap();
        let cor = corrector_step(&p, &z).unwrap();
        let d = &cor.direction;
        assert!(norm2(&g_of(&p, d)) <= 1e-12);
        let rhs = DirectionRhs::corrector(&z, &st.pq);
        assert!(direction_equation_error(&p, &z, &st.scaling.w, &rhs, d).unwrap() <= 1e-12);
        let nu = p.nu();
        let before = z.mu_e(nu);
        let after = cor.z_pp.mu_e(nu);
        assert!((after - before).abs() <= 1e-12 * before);
        let pp = IterateState::new(&p, cor.z_pp).unwrap();
        assert!(pp.pq.delta_p_norm_x < st.pq.delta_p_norm_x);
    }

    #[test]
    fn corrector_vanishes_at_central_point() {
        let p = tiny_lp();
        let z = HsdPoint::initial(&p).unwrap();
        let cor = corrector_step(&p, &z).unwrap();
        assert!(norm2(&cor.direction.dx) <= 1e-14);
        assert!(norm2(&cor.direction.ds) <= 1e-14);
    }

    #[test]
    fn predictor_decay_factors() {
        let p = tiny_lp();
        let z = HsdPoint::initial(&p).unwrap();
        let params = StepParameters::fixed(p.nu());
        let step = predictor_step(&p, &z, &params).unwrap();
        assert!((step.residual_factor - params.decay()).abs() <= 1e-12);
        let mu_plus = step.z_plus.mu_e(p.nu());
        assert!((mu_plus - params.decay()).abs() <= 1e-12);
        assert!(step.orthogonality.abs() <= 1e-12);
    }

    #[test]
    fn full_centering_from_center_is_stationary() {
        let p = tiny_lp();
        let z = HsdPoint::initial(&p).unwrap();
        let params = StepParameters {
            beta: 1.0,
            gamma: 1.0,
            ..StepParameters::fixed(p.nu())
        };
        let step = predictor_step(&p, &z, &params).unwrap();
        assert!(norm2(&step.direction.dx) <= 1e-14);
        assert!(norm2(&step.direction.ds) <= 1e-14);
        assert!(params.theta().abs() <= 1e-15);
    }

    #[test]
    fn fixed_parameters() {
        for nu in [1.0, 2.0, 3.0, 10.0] {
            let p = StepParameters::fixed(nu);
            assert!(p.is_fixed_set());
            assert!((p.theta() - 0.1 * (nu + 1.0)).abs() <= 1e-12);
            let w1 = 1.0 + (nu + 1.0) / (180000.0 * nu.powi(3));
            assert!((p.omega1() - w1).abs() <= 1e-15);
            assert!(p.omega1() <= 1.0 + 1.0 / 90000.0 + 1e-16);
        }
        assert!(!StepParameters {
            beta: 0.5,
            ..StepParameters::fixed(2.0)
        }
        .is_fixed_set());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::theoretical(0.0).validate().is_err());
        assert!(SolverConfig::theoretical(1.0).validate().is_err());
        let mut c = SolverConfig::theoretical(0.5);
        c.beta = 1.5;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::theoretical(0.5);
        c.alpha_override = Some(0.3);
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = SolverConfig::adaptive(1e-8);
        c.alpha_override = Some(0.3);
        assert!(c.validate().is_ok());
        assert_eq!(SolverConfig::theoretical(0.5).iteration_limit(2.0), 2873);
    }

    #[test]
    fn theoretical_lp_reaches_target() {
        let p = tiny_lp();
        let r = solve(&p, &SolverConfig::theoretical(0.5)).unwrap();
        assert_eq!(r.termination, Termination::TargetReached);
        let k = r.iterations as f64;
        let expected = (1.0 - 1.0 / (1000.0 * p.nu())).powf(k);
        assert!((r.mu_e - expected).abs() <= 1e-8 * expected);
        assert!(r.trace.iter().all(|rec| rec.assumptions.iter().all(|&a| a)));
    }

    #[test]
    fn iteration_limit_returns_partial() {
        let p = tiny_lp();
        let mut c = SolverConfig::theoretical(0.5);
        c.max_iterations = Some(3);
        match solve(&p, &c) {
            Err(Error::MaxIterationsExceeded { limit, partial }) => {
                assert_eq!(limit, 3);
                assert_eq!(partial.iterations, 3);
                assert_eq!(partial.termination, Termination::IterationLimit);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
