//! Logarithmically homogeneous self-concordant barriers for the nonnegative
//! orthant, the exponential cone, the 3-D power cone and their products,
//! together with conjugate shadows and the self-dual initial point.
//!
//! Dual-side quantities are obtained through the primal barrier at the shadow
//! point: `F'_*(s) = -x̃` and `F''_*(s) = F''(x̃)⁻¹`.

mod exponential;
mod orthant;
mod power;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky, dot, solve_general, SymMatrix};

const SHADOW_TOL: f64 = 1e-11;
/// Multiple of the componentwise rounding of `s + F'(x)` accepted as converged.
const SHADOW_ROUNDING: f64 = 64.0;
const SHADOW_MAX_STEPS: usize = 200;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConeSpec {
    NonnegOrthant(usize),
    Exponential,
    Power(f64),
    Product(Vec<ConeSpec>),
}

/// `F`, `F'`, `F''` at a point together with the barrier parameter.
#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymMatrix,
    pub nu: f64,
}

#[derive(Debug, Clone)]
pub struct ShadowPair {
    /// `x̃ = -F'_*(s)`
    pub x_tilde: Vec<f64>,
    /// `s̃ = -F'(x)`
    pub s_tilde: Vec<f64>,
    pub mu: f64,
    pub mu_tilde: f64,
}

impl ConeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConeSpec::NonnegOrthant(0) => Err(Error::InvalidCone("orthant of dimension 0".into())),
            ConeSpec::Power(a) if !(*a > 0.0 && *a < 1.0) => Err(Error::InvalidCone(format!(
                "power cone exponent {a} outside (0, 1)"
            ))),
            ConeSpec::Product(parts) if parts.is_empty() => {
                Err(Error::InvalidCone("empty product".into()))
            }
            ConeSpec::Product(parts) => parts.iter().try_for_each(ConeSpec::validate),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConeSpec::NonnegOrthant(n) => *n,
            ConeSpec::Exponential | ConeSpec::Power(_) => 3,
            ConeSpec::Product(parts) => parts.iter().map(ConeSpec::dim).sum(),
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            ConeSpec::NonnegOrthant(n) => *n as f64,
            ConeSpec::Exponential | ConeSpec::Power(_) => 3.0,
            ConeSpec::Product(parts) => parts.iter().map(ConeSpec::nu).sum(),
        }
    }

    /// Non-product blocks with their offsets, in declaration order.
    pub fn leaves(&self) -> Vec<(usize, &ConeSpec)> {
        fn walk<'a>(c: &'a ConeSpec, offset: &mut usize, out: &mut Vec<(usize, &'a ConeSpec)>) {
            match c {
                ConeSpec::Product(parts) => parts.iter().for_each(|p| walk(p, offset, out)),
                leaf => {
                    out.push((*offset, leaf));
                    *offset += leaf.dim();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut 0, &mut out);
        out
    }
}

fn check_len(cone: &ConeSpec, v: &[f64]) -> Result<()> {
    if v.len() != cone.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a cone of dimension {}",
            v.len(),
            cone.dim()
        )));
    }
    Ok(())
}

fn leaf_eval(leaf: &ConeSpec, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    match leaf {
        ConeSpec::NonnegOrthant(_) => orthant::eval(x),
        ConeSpec::Exponential => exponential::eval(x),
        ConeSpec::Power(a) => power::eval(*a, x),
        ConeSpec::Product(_) => unreachable!("products are flattened"),
    }
}

fn leaf_margin(leaf: &ConeSpec, x: &[f64]) -> f64 {
    match leaf {
        ConeSpec::NonnegOrthant(_) => orthant::margin(x),
        ConeSpec::Exponential => exponential::margin(x),
        ConeSpec::Power(a) => power::margin(*a, x),
        ConeSpec::Product(_) => unreachable!("products are flattened"),
    }
}

fn leaf_dual_margin(leaf: &ConeSpec, s: &[f64]) -> f64 {
    match leaf {
        ConeSpec::NonnegOrthant(_) => orthant::margin(s),
        ConeSpec::Exponential => exponential::dual_margin(s),
        ConeSpec::Power(a) => power::dual_margin(*a, s),
        ConeSpec::Product(_) => unreachable!("products are flattened"),
    }
}

/// Positive iff `x` is strictly interior.
pub fn membership_margin(cone: &ConeSpec, x: &[f64]) -> f64 {
    cone.leaves()
        .into_iter()
        .map(|(o, leaf)| leaf_margin(leaf, &x[o..o + leaf.dim()]))
        .fold(f64::INFINITY, f64::min)
}

/// Positive iff `s` is strictly interior to the dual cone.
pub fn dual_membership_margin(cone: &ConeSpec, s: &[f64]) -> f64 {
    cone.leaves()
        .into_iter()
        .map(|(o, leaf)| leaf_dual_margin(leaf, &s[o..o + leaf.dim()]))
        .fold(f64::INFINITY, f64::min)
}

pub fn barrier_eval(cone: &ConeSpec, x: &[f64]) -> Result<BarrierEval> {
    check_len(cone, x)?;
    let margin = membership_margin(cone, x);
    if !(margin > 0.0) {
        return Err(Error::NotInterior { margin });
    }
    let n = cone.dim();
    let mut value = 0.0;
    let mut gradient = vec![0.0; n];
    let mut hessian = SymMatrix::zeros(n);
    for (o, leaf) in cone.leaves() {
        let d = leaf.dim();
        let (f, g, h) = leaf_eval(leaf, &x[o..o + d]);
        value += f;
        gradient[o..o + d].copy_from_slice(&g);
        hessian.set_block(o, &h);
    }
    Ok(BarrierEval {
        value,
        gradient,
        hessian,
        nu: cone.nu(),
    })
}

/// Solves `H dx = -r`, falling back to LU when the Cholesky pivot test trips
/// on a badly conditioned but still positive definite Hessian.
fn newton_step(h: &SymMatrix, r: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = r.iter().map(|v| -v).collect();
    match cholesky(h) {
        Ok(l) => Ok(l.solve(&neg)),
        Err(_) => solve_general(&h.to_dense(), &neg),
    }
}

fn leaf_start(leaf: &ConeSpec, s: &[f64]) -> Vec<f64> {
    let x0 = leaf_initial_point(leaf).expect("initial point of a supported cone");
    let t = leaf.nu() / dot(s, &x0);
    x0.iter().map(|v| v * t).collect()
}

/// Damped Newton on `⟨s, x⟩ + F(x)`; its stationary point is `x̃ = -F'_*(s)`.
fn leaf_shadow(leaf: &ConeSpec, s: &[f64], start: Vec<f64>) -> Result<Vec<f64>> {
    let mut x = start;
    let mut lambda = f64::INFINITY;
    for _ in 0..SHADOW_MAX_STEPS {
        let (_, g, h) = leaf_eval(leaf, &x);
        let r: Vec<f64> = s.iter().zip(&g).map(|(a, b)| a + b).collect();
        let dx = newton_step(&h, &r)?;
        lambda = (-dot(&r, &dx)).max(0.0).sqrt();
        // The residual cannot drop below the rounding of `s + F'(x)` itself,
        // which exceeds the tolerance near the boundary.
        let abs: Vec<f64> = s.iter().zip(&g).map(|(a, b)| a.abs() + b.abs()).collect();
        let floor =
            SHADOW_ROUNDING * (-dot(&abs, &newton_step(&h, &abs)?)).max(0.0).sqrt() * f64::EPSILON;
        if lambda <= SHADOW_TOL.max(floor) {
            // one more full step takes the residual down to rounding level
            let polished: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            if leaf_margin(leaf, &polished) > 0.0 {
                x = polished;
            }
            return Ok(x);
        }
        let mut t = if lambda > 0.25 {
            1.0 / (1.0 + lambda)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            if leaf_margin(leaf, &trial) > 0.0 {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        x = accepted.ok_or(Error::NoConvergence {
            what: "conjugate shadow line search",
            iterations: MAX_BACKTRACKS,
            residual: lambda,
        })?;
    }
    Err(Error::NoConvergence {
        what: "conjugate shadow Newton",
        iterations: SHADOW_MAX_STEPS,
        residual: lambda,
    })
}

/// `x̃ = -F'_*(s)`, the unique interior point with `F'(x̃) = -s`.
pub fn conjugate_shadow(cone: &ConeSpec, s: &[f64]) -> Result<Vec<f64>> {
    conjugate_shadow_from(cone, s, None)
}

/// Like [`conjugate_shadow`] but warm-started from `hint` where it is interior.
pub fn conjugate_shadow_from(cone: &ConeSpec, s: &[f64], hint: Option<&[f64]>) -> Result<Vec<f64>> {
    check_len(cone, s)?;
    let margin = dual_membership_margin(cone, s);
    if !(margin > 0.0) {
        return Err(Error::NotInteriorDual { margin });
    }
    let mut out = vec![0.0; cone.dim()];
    for (o, leaf) in cone.leaves() {
        let d = leaf.dim();
        let sb = &s[o..o + d];
        let warm = hint
            .map(|h| h[o..o + d].to_vec())
            .filter(|h| leaf_margin(leaf, h) > 0.0);
        let xb = match warm {
            Some(h) => {
                leaf_shadow(leaf, sb, h).or_else(|_| leaf_shadow(leaf, sb, leaf_start(leaf, sb)))?
            }
            None => leaf_shadow(leaf, sb, leaf_start(leaf, sb))?,
        };
        out[o..o + d].copy_from_slice(&xb);
    }
    Ok(out)
}

/// Rounding level of `x̃ = -F'_*(s)` in the local norm at `x̃`: the dual
/// local norm of the componentwise rounding of `s + F'(x̃)`.
pub fn shadow_rounding(cone: &ConeSpec, s: &[f64], x_tilde: &[f64]) -> f64 {
    let mut sq = 0.0;
    for (o, leaf) in cone.leaves() {
        let d = leaf.dim();
        let (_, g, h) = leaf_eval(leaf, &x_tilde[o..o + d]);
        let abs: Vec<f64> = s[o..o + d]
            .iter()
            .zip(&g)
            .map(|(a, b)| a.abs() + b.abs())
            .collect();
        match newton_step(&h, &abs) {
            Ok(v) => sq += (-dot(&abs, &v)).max(0.0),
            Err(_) => return f64::INFINITY,
        }
    }
    f64::EPSILON * sq.sqrt()
}

/// Shadow iterates and the two complementarity measures at an interior pair.
pub fn shadow_pair(cone: &ConeSpec, x: &[f64], s: &[f64], be: &BarrierEval) -> Result<ShadowPair> {
    let nu = be.nu;
    let mu = dot(x, s) / nu;
    let hint = linalg::scaled(1.0 / mu, x);
    let x_tilde = conjugate_shadow_from(cone, s, Some(&hint))?;
    let s_tilde: Vec<f64> = be.gradient.iter().map(|g| -g).collect();
    let mu_tilde = dot(&x_tilde, &s_tilde) / nu;
    Ok(ShadowPair {
        x_tilde,
        s_tilde,
        mu,
        mu_tilde,
    })
}

/// Damped Newton on `½‖x‖² + F(x)`, whose minimizer satisfies `x = -F'(x)`.
fn fixed_point(leaf: &ConeSpec, seed: [f64; 3]) -> Result<[f64; 3]> {
    let psi = |x: &[f64]| 0.5 * dot(x, x) + leaf_eval(leaf, x).0;
    let mut x = seed.to_vec();
    let mut res = f64::INFINITY;
    for _ in 0..SHADOW_MAX_STEPS {
        let (_, g, mut h) = leaf_eval(leaf, &x);
        let r: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
        res = linalg::norm2(&r);
        for i in 0..3 {
            h.add_to(i, i, 1.0);
        }
        let dx = newton_step(&h, &r)?;
        if res <= 1e-14 {
            return Ok([x[0], x[1], x[2]]);
        }
        let f0 = psi(&x);
        let slope = dot(&r, &dx);
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            if leaf_margin(leaf, &trial) > 0.0 && psi(&trial) <= f0 + 1e-4 * t * slope {
                break;
            }
            t *= 0.5;
        }
        // near the solution the Armijo test is lost in rounding; take the step anyway
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += t * di;
        }
    }
    if res <= SHADOW_TOL {
        return Ok([x[0], x[1], x[2]]);
    }
    Err(Error::NoConvergence {
        what: "initial point Newton",
        iterations: SHADOW_MAX_STEPS,
        residual: res,
    })
}

fn leaf_initial_point(leaf: &ConeSpec) -> Result<Vec<f64>> {
    static EXP: OnceLock<[f64; 3]> = OnceLock::new();
    static POW: OnceLock<Mutex<HashMap<u64, [f64; 3]>>> = OnceLock::new();
    match leaf {
        ConeSpec::NonnegOrthant(n) => Ok(vec![1.0; *n]),
        ConeSpec::Exponential => {
            if let Some(x) = EXP.get() {
                return Ok(x.to_vec());
            }
            let x = fixed_point(leaf, [1.0, 1.0, -1.0])?;
            Ok(EXP.get_or_init(|| x).to_vec())
        }
        ConeSpec::Power(a) => {
            let cache = POW.get_or_init(|| Mutex::new(HashMap::new()));
            if let Some(x) = cache.lock().expect("power cache").get(&a.to_bits()) {
                return Ok(x.to_vec());
            }
            let x = fixed_point(leaf, [1.0, 1.0, 0.0])?;
            cache.lock().expect("power cache").insert(a.to_bits(), x);
            Ok(x.to_vec())
        }
        ConeSpec::Product(_) => unreachable!("products are flattened"),
    }
}

/// `x₀` with `x₀ = -F'(x₀)`, so that `x₀ = s₀` starts exactly on the central path.
pub fn initial_point(cone: &ConeSpec) -> Result<Vec<f64>> {
    cone.validate()?;
    let mut out = Vec::with_capacity(cone.dim());
    for (_, leaf) in cone.leaves() {
        out.extend(leaf_initial_point(leaf)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn orthant_at_ones() {
        let c = ConeSpec::NonnegOrthant(2);
        let be = barrier_eval(&c, &[1.0, 1.0]).unwrap();
        assert_eq!(be.value, 0.0);
        assert_eq!(be.gradient, vec![-1.0, -1.0]);
        assert_eq!(be.hessian, SymMatrix::identity(2));
        assert_eq!(be.nu, 2.0);
    }

    #[test]
    fn exponential_value_at_e_1_0() {
        // psi = 1*log(e) - 0 = 1, so F = -log 1 - log e - log 1 = -1
        let be = barrier_eval(&ConeSpec::Exponential, &[std::f64::consts::E, 1.0, 0.0]).unwrap();
        assert!(close(be.value, -1.0, 1e-15));
    }

    #[test]
    fn power_value_at_ones() {
        let be = barrier_eval(&ConeSpec::Power(0.5), &[1.0, 1.0, 0.0]).unwrap();
        assert!(close(be.value, 0.0, 1e-15));
    }

    #[test]
    fn margins() {
        assert_eq!(
            membership_margin(&ConeSpec::NonnegOrthant(2), &[1.0, -1.0]),
            -1.0
        );
        assert_eq!(
            membership_margin(&ConeSpec::Exponential, &[1.0, 1.0, 0.0]),
            0.0
        );
        assert!(close(
            membership_margin(&ConeSpec::Exponential, &[2.0, 1.0, 0.0]),
            2f64.ln(),
            1e-15
        ));
        assert_eq!(
            dual_membership_margin(&ConeSpec::NonnegOrthant(2), &[1.0, 1.0]),
            1.0
        );
        // (s1/a)^(2a) (s2/(1-a))^(2-2a) = 2 * 2 at a = 1/2
        assert!(close(
            dual_membership_margin(&ConeSpec::Power(0.5), &[1.0, 1.0, 0.0]),
            1.0,
            1e-15
        ));
        // 4^(1) * 1^(1) - 1 = 3, so the margin is min(4, 1, 3)
        assert!(close(
            membership_margin(&ConeSpec::Power(0.5), &[4.0, 1.0, 1.0]),
            1.0,
            1e-15
        ));
    }

    #[test]
    fn gradient_image_is_dual_interior() {
        let be = barrier_eval(&ConeSpec::Exponential, &[2.0, 1.0, 0.0]).unwrap();
        let s: Vec<f64> = be.gradient.iter().map(|g| -g).collect();
        assert!(dual_membership_margin(&ConeSpec::Exponential, &s) > 0.0);
    }

    #[test]
    fn not_interior_is_rejected() {
        assert!(matches!(
            barrier_eval(&ConeSpec::Exponential, &[1.0, 1.0, 0.0]),
            Err(Error::NotInterior { .. })
        ));
        assert!(matches!(
            conjugate_shadow(&ConeSpec::Exponential, &[1.0, 1.0, 1.0]),
            Err(Error::NotInteriorDual { .. })
        ));
    }

    #[test]
    fn orthant_shadow_is_reciprocal() {
        let x = conjugate_shadow(&ConeSpec::NonnegOrthant(2), &[2.0, 0.5]).unwrap();
        assert!(close(x[0], 0.5, 1e-14) && close(x[1], 2.0, 1e-14));
    }

    #[test]
    fn exponential_shadow_residual() {
        let s = [1.0, 1.0, -1.0];
        let x = conjugate_shadow(&ConeSpec::Exponential, &s).unwrap();
        let be = barrier_eval(&ConeSpec::Exponential, &x).unwrap();
        let r: Vec<f64> = be.gradient.iter().zip(&s).map(|(g, s)| g + s).collect();
        assert!(linalg::norm_dual(&r, &be.hessian).unwrap() <= 1e-11);
    }

    #[test]
    fn initial_points_are_fixed_points() {
        for cone in [
            ConeSpec::NonnegOrthant(4),
            ConeSpec::Exponential,
            ConeSpec::Power(0.5),
            ConeSpec::Power(0.6),
            ConeSpec::Product(vec![ConeSpec::Exponential, ConeSpec::NonnegOrthant(2)]),
        ] {
            let x0 = initial_point(&cone).unwrap();
            let be = barrier_eval(&cone, &x0).unwrap();
            let r: Vec<f64> = x0.iter().zip(&be.gradient).map(|(a, b)| a + b).collect();
            assert!(linalg::norm2(&r) <= 1e-11, "{cone:?}: {r:?}");
            assert!(close(dot(&x0, &x0), cone.nu(), 1e-12));
        }
        assert_eq!(
            initial_point(&ConeSpec::NonnegOrthant(3)).unwrap(),
            vec![1.0; 3]
        );
    }

    #[test]
    fn product_layout() {
        let c = ConeSpec::Product(vec![
            ConeSpec::NonnegOrthant(2),
            ConeSpec::Product(vec![ConeSpec::Exponential, ConeSpec::Power(0.3)]),
        ]);
        assert_eq!(c.dim(), 8);
        assert_eq!(c.nu(), 8.0);
        let offs: Vec<usize> = c.leaves().iter().map(|(o, _)| *o).collect();
        assert_eq!(offs, vec![0, 2, 5]);
        assert!(ConeSpec::Power(1.2).validate().is_err());
        assert!(ConeSpec::NonnegOrthant(0).validate().is_err());
    }
}
