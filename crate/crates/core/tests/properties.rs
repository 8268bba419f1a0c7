use fragile_core::oracle::{brute_expectation, brute_sequential};
use fragile_core::prelude::*;
use fragile_core::random::{
    random_class_uniform_state, random_observable, random_permutation, random_state,
    random_symmetric, random_unitary, seeded_rng,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn kernel_rows(k: &MeasurementKernel) -> Vec<Vec<f64>> {
    k.matrix().row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn system(seed: u64, size: usize, max_outcomes: usize) -> (Observable, Observable, KnowledgeState) {
    let mut rng = seeded_rng(seed);
    let a = random_observable(&mut rng, "A", size, max_outcomes);
    let b = random_observable(&mut rng, "B", size, max_outcomes);
    let s = random_state(&mut rng, size);
    (a, b, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_states_are_normalized(seed in any::<u64>(), size in 2usize..40) {
        let s = random_state(&mut seeded_rng(seed), size);
        prop_assert!(s.probs().iter().all(|&p| p >= 0.0));
        prop_assert!((s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn total_expectation(seed in any::<u64>(), size in 2usize..32) {
        let (a, _, s) = system(seed, size, 8);
        let d = outcome_distribution(&a, &s).unwrap();
        let via_outcomes: f64 = d.outcomes().iter().zip(d.probs()).map(|(x, p)| x * p).sum();
        prop_assert!((classical_expectation(&a, &s).unwrap() - via_outcomes).abs() <= 1e-12);
        prop_assert!((classical_expectation(&a, &s).unwrap() - brute_expectation(&a, &s).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(a.multiplicities().iter().sum::<usize>(), size);
    }

    #[test]
    fn flat_prior_bayes_is_class_posterior(seed in any::<u64>(), size in 2usize..32) {
        let (a, _, _) = system(seed, size, 8);
        let flat = uniform_prior(&HiddenVariableSpace::new(size).unwrap());
        for &outcome in a.outcomes() {
            let g = class_posterior(&a, outcome).unwrap();
            prop_assert!(bayes_posterior(&a, outcome, &flat).unwrap().l1_distance(&g).unwrap() <= 1e-12);
            for (l, &p) in g.probs().iter().enumerate() {
                if a.values()[l] != outcome {
                    prop_assert_eq!(p, 0.0);
                }
            }
        }
    }

    #[test]
    fn kernels_preserve_probability(seed in any::<u64>(), size in 2usize..32, perms in 1usize..5) {
        let (a, _, s) = system(seed, size, 6);
        for k in [build_scrambling_kernel(&a), build_birkhoff_kernel(&a, seed, perms).unwrap()] {
            for col in k.matrix().column_iter() {
                prop_assert!((col.sum() - 1.0).abs() <= 1e-12);
            }
            let out = apply_kernel(&s, &k).unwrap();
            prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
            prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(check_fixed_points(&k, &a, 1e-12).unwrap().all_pass());
        }
    }

    #[test]
    fn repeated_measurement_is_diagonal(seed in any::<u64>(), size in 2usize..24) {
        let (a, _, s) = system(seed, size, 6);
        let k = build_birkhoff_kernel(&a, seed ^ 0xA5, 3).unwrap();
        let joint = sequential_joint((&a, &k), (&a, &k), &s).unwrap();
        prop_assert!(joint.max_off_diagonal() <= 1e-12);
    }

    #[test]
    fn non_fragile_measurements_commute(seed in any::<u64>(), size in 2usize..24) {
        let (a, b, s) = system(seed, size, 6);
        let id = identity_kernel(&HiddenVariableSpace::new(size).unwrap());
        let ab = sequential_joint((&a, &id), (&b, &id), &s).unwrap();
        let ba = sequential_joint((&b, &id), (&a, &id), &s).unwrap();
        prop_assert!(ab.total_variation(&ba.transpose()).unwrap() <= 1e-12);
        let oracle = brute_sequential(&a, &kernel_rows(&id), &b, &s, false).unwrap();
        for (row, orow) in ab.probs.iter().zip(&oracle) {
            for (x, y) in row.iter().zip(orow) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fragile_joint_matches_oracle(seed in any::<u64>(), size in 2usize..24) {
        let (a, b, s) = system(seed, size, 6);
        let (ka, kb) = (build_birkhoff_kernel(&a, seed, 2).unwrap(), build_scrambling_kernel(&b));
        let joint = sequential_joint((&a, &ka), (&b, &kb), &s).unwrap();
        let fragile = joint.protocol == Protocol::Fragile;
        let oracle = brute_sequential(&a, &kernel_rows(&ka), &b, &s, fragile).unwrap();
        for (row, orow) in joint.probs.iter().zip(&oracle) {
            for (x, y) in row.iter().zip(orow) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
        let marginal = outcome_distribution(&a, &s).unwrap();
        for (x, y) in joint.first_marginal().iter().zip(marginal.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn basis_round_trips(seed in any::<u64>(), size in 2usize..32) {
        let mut rng = seeded_rng(seed);
        let a = random_observable(&mut rng, "A", size, 10);
        let basis = build_basis(&a, BasisMode::Outcome);
        prop_assert!(basis.orthonormality_defect() <= 1e-12);
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if i != j {
                    for l in 0..size {
                        prop_assert_eq!(basis.phi()[(i, l)] * basis.phi()[(j, l)], 0.0);
                    }
                }
            }
        }
        let s = random_class_uniform_state(&mut rng, &a);
        let c = project_state(&s, &basis).unwrap();
        prop_assert!(c.residual <= 1e-12);
        let lifted = lift_coefficients(&c.coeffs, &basis).unwrap();
        prop_assert!(lifted.l1_distance(&s).unwrap() <= 1e-12);
        let again = project_state(&lifted, &basis).unwrap();
        for (x, y) in again.coeffs.iter().zip(&c.coeffs) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn own_basis_operators(seed in any::<u64>(), size in 2usize..32) {
        let mut rng = seeded_rng(seed);
        let a = random_observable(&mut rng, "A", size, 10);
        let basis = build_basis(&a, BasisMode::Outcome);
        let k = build_birkhoff_kernel(&a, seed, 3).unwrap();
        prop_assert!(build_transfer(&k, &basis).unwrap().identity_defect() <= 1e-12);
        let op = build_observable_operator(&a, &k, &basis).unwrap();
        let n = a.num_outcomes();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { a.outcomes()[i] } else { 0.0 };
                prop_assert!((op.entries[(i, j)] - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cross_operators_are_symmetric(seed in any::<u64>(), size in 2usize..24) {
        let (a, b, _) = system(seed, size, 6);
        let basis = build_basis(&a, BasisMode::Outcome);
        let op = build_observable_operator(&b, &build_scrambling_kernel(&b), &basis).unwrap();
        prop_assert!((&op.entries - op.entries.transpose()).norm() <= 1e-12);
        let eig = eigensolve(&op).unwrap();
        prop_assert!(eig.residuals(&op).iter().all(|&r| r <= 1e-10));
        let c1 = commutator(&op, &op).unwrap();
        prop_assert_eq!(c1.frobenius_norm, 0.0);
    }

    #[test]
    fn commutator_is_antisymmetric(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = seeded_rng(seed);
        let tag = BasisTag::new("b");
        let x = OperatorMatrix::new(random_symmetric(&mut rng, n), tag.clone(), fragile_core::operator::OperatorRole::Observable);
        let y = OperatorMatrix::new(random_symmetric(&mut rng, n), tag, fragile_core::operator::OperatorRole::Observable);
        let xy = commutator(&x, &y).unwrap();
        let yx = commutator(&y, &x).unwrap();
        prop_assert_eq!(xy.matrix, -yx.matrix);
    }

    #[test]
    fn similarity_preserves_spectrum(seed in any::<u64>(), n in 2usize..16) {
        let mut rng = seeded_rng(seed);
        let op = OperatorMatrix::new(random_symmetric(&mut rng, n), BasisTag::new("b"), fragile_core::operator::OperatorRole::Observable);
        let psi = ComplexBasisChange::new(random_unitary(&mut rng, n), "haar").unwrap();
        let x = to_complex(&op, &psi).unwrap();
        prop_assert!(x.hermiticity_defect() <= 1e-12);
        let before = eigensolve(&op).unwrap().eigenvalues;
        let after = eigensolve(&x).unwrap().eigenvalues;
        for (p, q) in before.iter().zip(&after) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn permutation_generators_round_trip(seed in any::<u64>(), size in 2usize..33, dt in 0.1f64..3.0) {
        let mut rng = seeded_rng(seed);
        let dynamics = DynamicsKernel::permutation(random_permutation(&mut rng, size)).unwrap();
        let full = build_basis(&HiddenVariableSpace::new(size).unwrap().maximal_observable(), BasisMode::Full);
        let u = build_propagator(&dynamics, &full).unwrap();
        prop_assert!(u.operator.orthogonality_defect() <= 1e-12);
        let g = extract_generator(&u.operator, dt).unwrap();
        prop_assert!(g.hermiticity_defect() <= 1e-12);
        prop_assert!(g.round_trip_error(&u.operator) <= 1e-10);
    }

    #[test]
    fn trace_rule_matches_classical(seed in any::<u64>(), size in 2usize..32) {
        let mut rng = seeded_rng(seed);
        let a = random_observable(&mut rng, "A", size, 10);
        let basis = build_basis(&a, BasisMode::Outcome);
        let op = build_observable_operator(&a, &build_scrambling_kernel(&a), &basis).unwrap();
        let s = random_class_uniform_state(&mut rng, &a);
        let rho = build_density(&eigensolve(&op).unwrap(), outcome_distribution(&a, &s).unwrap().probs()).unwrap();
        prop_assert!(rho.checks().unwrap().valid(1e-12));
        let tr = trace_expectation(&rho, &op).unwrap();
        prop_assert!((tr - brute_expectation(&a, &s).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn von_neumann_evolution(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = seeded_rng(seed);
        let op = OperatorMatrix::new(random_symmetric(&mut rng, n), BasisTag::new("b"), fragile_core::operator::OperatorRole::Observable);
        let eig = eigensolve(&op).unwrap();
        let p = random_state(&mut rng, n);
        let rho = build_density(&eig, p.probs()).unwrap();
        let u = ComplexOperator { entries: random_unitary(&mut rng, n), basis: BasisTag::new("b"), origin: None };
        let evolved = evolve_density(&rho, &u).unwrap();
        let checks = evolved.checks().unwrap();
        prop_assert!(checks.valid(1e-12));
        prop_assert!((evolved.purity() - rho.purity()).abs() <= 1e-12);
        let before = rho.spectrum().unwrap();
        let after = evolved.spectrum().unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn diagonal_transport(seed in any::<u64>(), size in 2usize..33) {
        let mut rng = seeded_rng(seed);
        let space = HiddenVariableSpace::new(size).unwrap();
        let lambda = space.maximal_observable();
        let full = build_basis(&lambda, BasisMode::Full);
        let op = build_observable_operator(&lambda, &identity_kernel(&space), &full).unwrap();
        let s = random_state(&mut rng, size);
        let rho = build_density(&eigensolve(&op).unwrap(), s.probs()).unwrap();
        let dynamics = DynamicsKernel::permutation(random_permutation(&mut rng, size)).unwrap();
        let u = build_propagator(&dynamics, &full).unwrap();
        let evolved = evolve_density(&rho, &u.operator).unwrap();
        let moved = apply_kernel(&s, &dynamics).unwrap();
        for (x, y) in evolved.diagonal().iter().zip(moved.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn correlations_are_bounded(seed in any::<u64>(), a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let m = LocalModel::random(&mut seeded_rng(seed), 5);
        prop_assert!(correlation(&m, a, b).abs() <= 1.0 + 1e-15);
        let singlet = singlet_model();
        prop_assert!((correlation(&singlet, a, b) + (a - b).cos()).abs() <= 1e-12);
        let d = singlet.distribution(a, b);
        prop_assert!(d.probs().iter().all(|&p| (0.0..=0.5).contains(&p)));
        let r = chsh(&m, ChshSettings::new(a, b, a + b, a - b));
        prop_assert!(r.s.abs() <= 4.0);
    }
}

#[test]
fn identity_kernel_fixes_everything() {
    let mut rng = seeded_rng(77);
    let a = random_observable(&mut rng, "A", 9, 4);
    let id = identity_kernel(&HiddenVariableSpace::new(9).unwrap());
    let report = check_fixed_points(&id, &a, 1e-12).unwrap();
    assert!(report.residuals.iter().all(|&r| r == 0.0));
    assert_eq!(id.matrix(), &DMatrix::<f64>::identity(9, 9));
}
