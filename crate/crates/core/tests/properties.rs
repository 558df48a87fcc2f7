//! Randomized invariants across the algebra, correlation, Bell and CP-map layers.

use nalgebra::DVector;
use proptest::prelude::*;
use sudbell::algebra::{GeneratorSet, ParameterMode, ParameterVector, StructureConstants, Subset};
use sudbell::bell::{bell_value, bell_value_unitaries, lhv_max_bruteforce, BellSpec};
use sudbell::correlation::{correlation_matrix, correlation_observable, joint_probabilities, BipartiteState, MeasurementConfig};
use sudbell::cv_map::{tmsv_mapped_pure, tmsv_state, ChoiBlockMap, CvRepr, CvState, Squeezing};
use sudbell::linalg::{expm_minus_i_hermitian, kron, max_abs_diff, min_eigenvalue_hermitian, CMatrix};
use sudbell::{adjoint_matrix_exp, bloch_decompose, unitary_from_params, Complex64};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

fn params(d: usize, mode: ParameterMode) -> impl Strategy<Value = ParameterVector> {
    prop::collection::vec(-3.2f64..3.2, mode.len(d)).prop_map(move |v| ParameterVector::new(d, mode, v).unwrap())
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
        .prop_filter("nonzero", |v: &Vec<Complex64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn pure_state(d: usize) -> impl Strategy<Value = BipartiteState> {
    complex_vec(d * d).prop_map(move |v| {
        let m = CMatrix::from_fn(d, d, |i, j| v[i * d + j]);
        let norm = m.norm();
        BipartiteState::pure(m / Complex64::new(norm, 0.0)).unwrap()
    })
}

/// `Σ_k w_k |v_k><v_k|` from a few random vectors: a random density operator.
fn density(n: usize, rank: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex_vec(n), rank).prop_map(move |vs| {
        let mut rho = CMatrix::zeros(n, n);
        for v in vs {
            let v = DVector::from_vec(v);
            rho += &v * v.adjoint();
        }
        let tr = rho.trace();
        rho / tr
    })
}

fn bell_config(d: usize) -> impl Strategy<Value = MeasurementConfig> {
    prop::collection::vec(-3.2f64..3.2, 4 * (d * d - 1))
        .prop_map(move |x| MeasurementConfig::from_flat(d, ParameterMode::Full, &x).unwrap())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn diagonal_generators_are_rotation_invariant(d in 2usize..6, theta in -6.0f64..6.0, j in 0usize..4, l in 0usize..4) {
        let gens = GeneratorSet::new(d).unwrap();
        let w = gens.subset_range(Subset::W);
        let (wj, wl) = (w.start + j % w.len(), w.start + l % w.len());
        let u = expm_minus_i_hermitian(&(gens.generator(wj) * Complex64::new(theta, 0.0)));
        let rotated = &u * gens.generator(wl) * u.adjoint();
        prop_assert!(max_abs_diff(&rotated, gens.generator(wl)) < 1e-10);
    }

    #[test]
    fn adjoint_preserves_bloch_norm(p in params(3, ParameterMode::Full), a in prop::collection::vec(-2.0f64..2.0, 8)) {
        let gens = GeneratorSet::new(3).unwrap();
        let f = StructureConstants::new(&gens);
        let t = adjoint_matrix_exp(&p, &f).unwrap();
        let h = sudbell::BlochDecomposition { a0: 0.4, a }.reconstruct(&gens);
        let b = bloch_decompose(&h, &gens).unwrap();
        prop_assert!((b.rotated(&t).norm() - b.norm()).abs() < 1e-10);
    }

    #[test]
    fn zero_marginals_on_product_states(d in 2usize..6, v in complex_vec(25)) {
        let mu = correlation_matrix(d).unwrap();
        let e = correlation_observable(&mu);
        let a = DVector::from_iterator(d, v.iter().take(d).copied());
        let a = &a / Complex64::new(a.norm(), 0.0);
        let rho = &a * a.adjoint();
        let id = CMatrix::identity(d, d);
        let left = (&e * kron(&rho, &id)).trace();
        let right = (&e * kron(&id, &rho)).trace();
        prop_assert!(left.norm() < 1e-10 && right.norm() < 1e-10);
    }

    #[test]
    fn transformed_observable_coefficients(d in 2usize..5, seed in 0u64..1000) {
        let gens = GeneratorSet::new(d).unwrap();
        let f = StructureConstants::new(&gens);
        let n = gens.len();
        let angle = |k: usize| ((seed as f64 + 1.0) * (k as f64 + 0.5) * 0.731).sin() * 2.5;
        let p = ParameterVector::new(d, ParameterMode::Full, (0..n).map(angle).collect()).unwrap();
        let q = ParameterVector::new(d, ParameterMode::Full, (0..n).map(|k| angle(k + n)).collect()).unwrap();
        let mu = correlation_matrix(d).unwrap();
        let e = correlation_observable(&mu);
        let k = kron(&unitary_from_params(&p, &gens).unwrap(), &unitary_from_params(&q, &gens).unwrap());
        let x = &k * e * k.adjoint();
        let expected = adjoint_matrix_exp(&p, &f).unwrap() * mu.mu_tilde_padded(&gens) * adjoint_matrix_exp(&q, &f).unwrap().transpose();
        for j in 0..n {
            for l in 0..n {
                let c = 0.25 * (&x * kron(gens.generator(j), gens.generator(l))).trace().re;
                prop_assert!((c - expected[(j, l)]).abs() < 1e-8, "({j},{l}): {c} vs {}", expected[(j, l)]);
            }
        }
    }

    #[test]
    fn probabilities_are_a_distribution(state in pure_state(3), p in params(3, ParameterMode::Full), q in params(3, ParameterMode::Reduced)) {
        let gens = GeneratorSet::new(3).unwrap();
        let probs = joint_probabilities(&state, &p, &q.to_full(), &gens).unwrap();
        prop_assert!(probs.iter().all(|&x| x >= -1e-15));
        prop_assert!((probs.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_reduction(state in pure_state(2), cfg in bell_config(2), mixed in any::<bool>()) {
        let gens = GeneratorSet::new(2).unwrap();
        let state = if mixed {
            let rho = state.density() * Complex64::new(0.7, 0.0) + CMatrix::identity(4, 4) * Complex64::new(0.075, 0.0);
            BipartiteState::mixed(rho, 2).unwrap()
        } else {
            state
        };
        let value = bell_value(&state, &cfg, &BellSpec::cglmp(2).unwrap(), &gens).unwrap();

        let z = CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]));
        let obs = |p: &ParameterVector| {
            let u = unitary_from_params(p, &gens).unwrap();
            &u * &z * u.adjoint()
        };
        let rho = state.density();
        let corr = |a: &CMatrix, b: &CMatrix| (&rho * kron(a, b)).trace().re;
        let (a1, a2, b1, b2) = (obs(&cfg.a1), obs(&cfg.a2), obs(&cfg.b1), obs(&cfg.b2));
        let chsh = corr(&a1, &b1) + corr(&a2, &b2) + corr(&a1, &b2) - corr(&a2, &b1);
        prop_assert!((value - chsh).abs() < 1e-10, "{value} vs {chsh}");
    }

    #[test]
    fn product_states_respect_classical_bound(d in 2usize..4, a in complex_vec(3), b in complex_vec(3), cfg_seed in prop::collection::vec(-3.2f64..3.2, 32)) {
        let gens = GeneratorSet::new(d).unwrap();
        let spec = BellSpec::cglmp(d).unwrap();
        let state = BipartiteState::product(&a[..d], &b[..d]).unwrap();
        let cfg = MeasurementConfig::from_flat(d, ParameterMode::Full, &cfg_seed[..4 * (d * d - 1)]).unwrap();
        let lhv = lhv_max_bruteforce(&spec).unwrap().value;
        prop_assert!(bell_value(&state, &cfg, &spec, &gens).unwrap() <= lhv + 1e-9);
    }

    #[test]
    fn bell_value_below_algebraic_max(state in pure_state(3), cfg in bell_config(3)) {
        let gens = GeneratorSet::new(3).unwrap();
        let spec = BellSpec::cglmp(3).unwrap();
        let v = bell_value(&state, &cfg, &spec, &gens).unwrap();
        prop_assert!(v.abs() <= spec.algebraic_max() + 1e-12);
    }

    #[test]
    fn swapped_state_with_swapped_parties(state in pure_state(3), cfg in bell_config(3)) {
        // relabelling the parties of a symmetric layout leaves the value unchanged
        let gens = GeneratorSet::new(3).unwrap();
        let spec = BellSpec::cglmp(3).unwrap();
        let u = |p: &ParameterVector| unitary_from_params(p, &gens).unwrap();
        let direct = bell_value_unitaries(&state, &[u(&cfg.a1), u(&cfg.a2), u(&cfg.b1), u(&cfg.b2)], &spec).unwrap();
        prop_assert!((direct - bell_value(&state, &cfg, &spec, &gens).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cp_map_preserves_trace_and_positivity(d in 2usize..5, blocks in 1usize..4, rho in density(12, 3)) {
        let n = d * blocks;
        let rho = rho.view((0, 0), (n, n)).into_owned();
        let tr = rho.trace();
        let rho = rho / tr;
        let map = ChoiBlockMap::new(d, n).unwrap();
        let out = map.apply_single(&rho).unwrap();
        prop_assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        prop_assert!(min_eigenvalue_hermitian(&out) > -1e-12);
    }

    #[test]
    fn cp_map_is_linear(lambda in 0.0f64..1.0, r1 in density(6, 2), r2 in density(6, 4)) {
        let map = ChoiBlockMap::new(3, 6).unwrap();
        let mixed = &r1 * Complex64::new(lambda, 0.0) + &r2 * Complex64::new(1.0 - lambda, 0.0);
        let lhs = map.apply_single(&mixed).unwrap();
        let rhs = map.apply_single(&r1).unwrap() * Complex64::new(lambda, 0.0)
            + map.apply_single(&r2).unwrap() * Complex64::new(1.0 - lambda, 0.0);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn two_mode_map_preserves_positivity(d in 2usize..4, rho in density(36, 2)) {
        let n = 2 * d;
        let size = n * n;
        let rho = rho.view((0, 0), (size.min(36), size.min(36))).into_owned();
        prop_assume!(size <= 36);
        let tr = rho.trace();
        let state = CvState::new(CvRepr::TwoModeDensity(rho / tr)).unwrap();
        let out = ChoiBlockMap::new(d, n).unwrap().apply(&state).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-13);
        prop_assert!(min_eigenvalue_hermitian(&out) > -1e-12);
    }

    #[test]
    fn tmsv_image_purity(d in 2usize..6, r in 0.0f64..1.5) {
        let state = tmsv_state(r, 60).unwrap();
        let out = ChoiBlockMap::new(d, 60).unwrap().apply(&state).unwrap();
        let purity = (&out * &out).trace().re;
        let kept = 1.0 - state.truncation_deficit();
        // the unnormalized image is a pure state of trace `kept`
        prop_assert!((purity - kept * kept).abs() < 1e-12);
        prop_assert!((purity / (kept * kept) - 1.0).abs() < 1e-12);
        let psi = tmsv_mapped_pure(Squeezing::Finite(r), d).unwrap().density();
        let renorm = ChoiBlockMap::new(d, 60).unwrap().apply(&state.renormalized()).unwrap();
        let fidelity = (&psi * renorm).trace().re;
        prop_assert!(fidelity >= 1.0 - 1e-6);
    }
}
