use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nsconic::acceptance::{random_interior_point, random_spd};
use nsconic::cones::{barrier_eval, conjugate_shadow, membership_margin, shadow_pair, ConeSpec};
use nsconic::hsd::{path_quantities, ConicProblem, HsdPoint};
use nsconic::io::{self, parse_problem_str, problem_to_string};
use nsconic::linalg::{
    cholesky, congruence_eigenvalues, dot, loewner_sandwich, norm2, norm_dual, norm_induced,
    operator_norm, sub, DenseMatrix, SymMatrix,
};
use nsconic::problems;
use nsconic::scaling::build_scaling;
use nsconic::solver::{solve, theta, SolverConfig};
use nsconic::verifier::audit_trace;

fn leaf() -> impl Strategy<Value = ConeSpec> {
    prop_oneof![
        (1usize..4).prop_map(ConeSpec::NonnegOrthant),
        Just(ConeSpec::Exponential),
        (0.05f64..0.95).prop_map(ConeSpec::Power),
    ]
}

fn cone() -> impl Strategy<Value = ConeSpec> {
    prop_oneof![
        3 => leaf(),
        1 => prop::collection::vec(leaf(), 2..4).prop_map(ConeSpec::Product),
    ]
}

/// Interior `x` and dual-interior `s = -t F'(x')` for an independent `x'`.
fn primal_dual(cone: &ConeSpec, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_interior_point(cone, &mut rng);
    let x2 = random_interior_point(cone, &mut rng);
    let g = barrier_eval(cone, &x2).unwrap().gradient;
    let t = 0.5 + (seed % 7) as f64 * 0.3;
    (x, g.iter().map(|v| -t * v).collect())
}

fn unit_direction(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1e);
    let v: Vec<f64> = (0..n)
        .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
        .collect();
    let nv = norm2(&v);
    v.iter().map(|c| c / nv).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #[test]
    fn barrier_is_logarithmically_homogeneous(cone in cone(), seed: u64, t in 0.1f64..10.0) {
        let (x, _) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let ft = barrier_eval(&cone, &tx).unwrap();
        prop_assert!((ft.value - (f.value - f.nu * t.ln())).abs() <= 1e-10 * (1.0 + f.value.abs()));
    }

    #[test]
    fn gradient_identities(cone in cone(), seed: u64) {
        let (x, _) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        // ⟨F'(x), x⟩ = -ν and F''(x)x = -F'(x)
        prop_assert!(rel(dot(&f.gradient, &x), -f.nu) <= 1e-10);
        let hx = f.hessian.mul_vec(&x);
        let err = norm2(&hx.iter().zip(&f.gradient).map(|(a, b)| a + b).collect::<Vec<_>>());
        prop_assert!(err <= 1e-10 * norm2(&f.gradient));
    }

    #[test]
    fn unit_dikin_ellipsoid_is_interior(cone in cone(), seed: u64, r in 0.0f64..0.99) {
        let (x, _) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        let d = unit_direction(x.len(), seed);
        let scale = r / norm_induced(&d, &f.hessian).unwrap();
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
        prop_assert!(membership_margin(&cone, &y) > 0.0);
    }

    #[test]
    fn hessian_is_stable_inside_dikin_ellipsoid(cone in cone(), seed: u64, r in 0.0f64..0.9) {
        let (x, _) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        let d = unit_direction(x.len(), seed);
        let scale = r / norm_induced(&d, &f.hessian).unwrap();
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
        let fy = barrier_eval(&cone, &y).unwrap();
        let ev = congruence_eigenvalues(&fy.hessian, &f.hessian).unwrap();
        let (lo, hi) = ((1.0 - r).powi(2), (1.0 - r).powi(-2));
        prop_assert!(ev[0] >= lo * (1.0 - 1e-9), "{ev:?} vs [{lo}, {hi}]");
        prop_assert!(ev[ev.len() - 1] <= hi * (1.0 + 1e-9), "{ev:?} vs [{lo}, {hi}]");
    }

    #[test]
    fn conjugate_shadow_inverts_the_gradient(cone in cone(), seed: u64) {
        let (x, _) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        let s: Vec<f64> = f.gradient.iter().map(|g| -g).collect();
        let xt = conjugate_shadow(&cone, &s).unwrap();
        prop_assert!(norm2(&sub(&xt, &x)) <= 1e-8 * norm2(&x), "{xt:?} vs {x:?}");
    }

    #[test]
    fn conjugate_hessian_is_inverse_primal_hessian(cone in cone(), seed: u64) {
        // column i of dx̃/ds by central differences equals F''(x̃)⁻¹ eᵢ
        let (_, s) = primal_dual(&cone, seed);
        let xt = conjugate_shadow(&cone, &s).unwrap();
        let h_inv_cols: Vec<Vec<f64>> = {
            let fact = cholesky(&barrier_eval(&cone, &xt).unwrap().hessian).unwrap();
            (0..s.len()).map(|i| {
                let mut e = vec![0.0; s.len()];
                e[i] = 1.0;
                fact.solve(&e)
            }).collect()
        };
        let h = 1e-6 * norm2(&s);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..s.len() {
            let mut up = s.clone();
            let mut dn = s.clone();
            up[i] += h;
            dn[i] -= h;
            let d = sub(&conjugate_shadow(&cone, &up).unwrap(), &conjugate_shadow(&cone, &dn).unwrap());
            // x̃ = -F'_*(s) so dx̃/ds = -F''_*(s) = -F''(x̃)⁻¹
            let fd: Vec<f64> = d.iter().map(|v| -v / (2.0 * h)).collect();
            worst = worst.max(norm2(&sub(&fd, &h_inv_cols[i])));
            scale = scale.max(norm2(&h_inv_cols[i]));
        }
        prop_assert!(worst <= 1e-5 * scale, "{worst} vs {scale}");
    }

    #[test]
    fn shadow_product_is_at_least_one(cone in cone(), seed: u64) {
        let (x, s) = primal_dual(&cone, seed);
        let f = barrier_eval(&cone, &x).unwrap();
        let sp = shadow_pair(&cone, &x, &s, &f).unwrap();
        prop_assert!(sp.mu * sp.mu_tilde >= 1.0 - 1e-12, "{}", sp.mu * sp.mu_tilde);
    }

    #[test]
    fn operator_norm_matches_loewner_sandwich(seed: u64, n in 1usize..6, near in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_spd(n, &mut rng);
        let mut q = random_spd(n, &mut rng);
        if near {
            q.scale(0.05);
            q.axpy(0.95, &p);
        }
        let mut diff = p.clone();
        diff.axpy(-1.0, &q);
        let e = operator_norm(&diff, &p).unwrap();
        prop_assert!(loewner_sandwich(&p, &q, e * (1.0 + 1e-9) + 1e-12).unwrap());
        if e > 1e-4 {
            prop_assert!(!loewner_sandwich(&p, &q, e * (1.0 - 1e-6)).unwrap());
        }
    }

    #[test]
    fn operator_norm_scales_inversely(seed: u64, n in 1usize..6, t in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_spd(n, &mut rng);
        let q = random_spd(n, &mut rng);
        let base = operator_norm(&q, &p).unwrap();
        prop_assert!(rel(operator_norm(&q, &p.scaled(t)).unwrap(), base / t) <= 1e-10);
    }

    #[test]
    fn outer_product_norms(seed: u64, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_spd(n, &mut rng);
        let v = unit_direction(n, seed);
        let w = unit_direction(n, seed.wrapping_add(1));
        let outer = |a: &[f64]| SymMatrix::from_fn(n, |i, j| a[i] * a[j]);
        // ‖vvᵀ‖_P = (‖v‖*_P)² and ‖vvᵀ - wwᵀ‖_P ≤ ‖v+w‖*_P ‖v-w‖*_P
        let nv = norm_dual(&v, &p).unwrap();
        prop_assert!(rel(operator_norm(&outer(&v), &p).unwrap(), nv * nv) <= 1e-9);
        let mut d = outer(&v);
        d.axpy(-1.0, &outer(&w));
        let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        let bound = norm_dual(&sum, &p).unwrap() * norm_dual(&sub(&v, &w), &p).unwrap();
        prop_assert!(operator_norm(&d, &p).unwrap() <= bound * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn scaling_matrix_maps_iterates_to_duals(cone in cone(), seed: u64) {
        let (x, s) = primal_dual(&cone, seed);
        let n = x.len();
        let problem = ConicProblem::new(DenseMatrix::zeros(0, n), vec![], vec![0.0; n], cone.clone()).unwrap();
        let z = HsdPoint { y: vec![], x: x.clone(), tau: 1.0, s: s.clone(), kappa: 1.0 };
        let be = barrier_eval(&cone, &x).unwrap();
        let pq = path_quantities(&problem, &z, &be).unwrap();
        let w = build_scaling(&x, &s, &pq, &be).unwrap();
        prop_assert!(cholesky(&w.w).is_ok());
        if !w.degenerate_fallback {
            prop_assert!(norm2(&sub(&w.w.mul_vec(&x), &s)) <= 1e-8 * norm2(&s));
            prop_assert!(norm2(&sub(&w.w.mul_vec(&pq.x_tilde), &pq.s_tilde)) <= 1e-8 * norm2(&pq.s_tilde));
        }
    }

    #[test]
    fn problem_json_round_trip_is_bit_exact(
        cone in cone(),
        m in 0usize..4,
        seed: u64,
        entries in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 64),
    ) {
        let n = cone.dim();
        let mut k = seed as usize;
        let mut next = || { k = k.wrapping_mul(6364136223846793005).wrapping_add(1); entries[(k >> 33) % entries.len()] };
        let a = DenseMatrix::from_row_major(m, n, (0..m * n).map(|_| next()).collect()).unwrap();
        let b: Vec<f64> = (0..m).map(|_| next()).collect();
        let c: Vec<f64> = (0..n).map(|_| next()).collect();
        let problem = ConicProblem::new(a, b, c, cone).unwrap();
        let back = parse_problem_str(&problem_to_string(&problem)).unwrap();
        let bits = |p: &ConicProblem| -> Vec<u64> {
            p.a.data().iter().chain(&p.b).chain(&p.c).map(|v| v.to_bits()).collect()
        };
        // zero entries are dropped from the triplet list, so -0.0 comes back as 0.0
        let canon = |p: &ConicProblem| -> Vec<u64> {
            bits(p).into_iter().map(|b| if f64::from_bits(b) == 0.0 { 0 } else { b }).collect()
        };
        prop_assert_eq!(canon(&back), canon(&problem));
        prop_assert_eq!(&back.b.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), &problem.b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back.cone, problem.cone);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_replay_gives_identical_verdicts(which in 0usize..3, adaptive in any::<bool>(), eps in 1e-6f64..0.9) {
        let (_, problem) = problems::standard_problems().swap_remove(which);
        let config = if adaptive {
            SolverConfig::adaptive(eps)
        } else {
            SolverConfig::theoretical(eps.max(0.8))
        };
        let r = solve(&problem, &config).unwrap();
        let mut buf = Vec::new();
        io::write_trace_to(&mut buf, &r.trace).unwrap();
        let back = io::read_trace_from(buf.as_slice()).unwrap();
        let inline = format!("{:?}", audit_trace(&r.trace));
        let replay = format!("{:?}", audit_trace(&back));
        prop_assert_eq!(inline, replay);
    }
}

#[test]
fn theta_is_nonnegative_on_grid() {
    for nu in [1.0, 2.0, 3.0, 10.0, 1000.0] {
        for i in 0..=400 {
            let gamma = -2.0 + 4.0 * i as f64 / 400.0;
            for j in 1..=100 {
                let beta = j as f64 / 100.0;
                let coeff = 1.0 - 2.0 * gamma + gamma * gamma / beta;
                assert!(coeff >= 1.0 - 2.0 * gamma + gamma * gamma - 1e-12);
                assert!(1.0 - 2.0 * gamma + gamma * gamma >= 0.0);
                let constant = 1.0 - beta / 2.0 + gamma * gamma / (2.0 * beta) - gamma;
                assert!(constant >= -1e-12, "beta {beta} gamma {gamma}");
                assert!(theta(nu, beta, gamma) >= -1e-12 * nu);
            }
        }
    }
}

#[test]
fn problem_file_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    for (name, p) in problems::standard_problems() {
        let path = dir.path().join(format!("{name}.json"));
        io::write_problem(&path, &p).unwrap();
        assert_eq!(io::parse_problem(&path).unwrap(), p);
    }
}
