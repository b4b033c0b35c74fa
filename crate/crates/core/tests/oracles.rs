//! Reference values and cross-checks between independent routes.

use std::f64::consts::{FRAC_PI_2, LN_2};

use coherence_engine::charging::*;
use coherence_engine::coherence::*;
use coherence_engine::collective::*;
use coherence_engine::engine::*;
use coherence_engine::operator::*;
use coherence_engine::Error;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn binary_entropy(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}

fn plus() -> DensityOperator {
    maximally_coherent_qubit(0.0).unwrap()
}

fn charge(beta: f64, gt: f64) -> ChargeResult {
    charged_qubit_state(
        &BathSpec::new(beta, DEFAULT_ACC).unwrap(),
        gt,
        SeriesConvention::WithPrefactor,
    )
    .unwrap()
}

// operator substrate

#[test]
fn scalar_is_tensor_identity() {
    let one = DensityOperator::diagonal(&[1.0], EnergyBasis::scalar()).unwrap();
    let rho = gibbs_qubit(0.7);
    let out = tensor_product(&one, &rho);
    assert_eq!(out.matrix(), rho.matrix());
    assert_eq!(out.basis().labels(), rho.basis().labels());
}

#[test]
fn gibbs_pair_diagonal_and_labels() {
    let b = 1.3;
    let g = gibbs_qubit(b);
    let pair = tensor_product(&g, &g);
    let z = 1.0 + (-b).exp();
    let expect = [1.0, (-b).exp(), (-b).exp(), (-2.0 * b).exp()].map(|x| x / (z * z));
    for (i, e) in expect.iter().enumerate() {
        assert!((pair.populations()[i] - e).abs() < 1e-15);
    }
    assert_eq!(pair.basis().labels(), &[-2, 0, 0, 2]);
}

#[test]
fn plus_pair_is_uniform() {
    let pair = tensor_product(&plus(), &plus());
    assert!(pair
        .matrix()
        .iter()
        .all(|z| (z - c(0.25, 0.0)).norm() < 1e-15));
}

#[test]
fn bell_state_reduces_to_mixed() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityOperator::pure(
        &[c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)],
        EnergyBasis::qubits(2),
    )
    .unwrap();
    let a = partial_trace(&bell, 2, 2, Keep::A).unwrap();
    let mixed = DensityOperator::maximally_mixed(EnergyBasis::qubit());
    assert!(max_abs_diff(a.matrix(), mixed.matrix()) < 1e-15);
    assert_eq!(a.basis().labels(), &[-1, 1]);
    assert!(matches!(
        partial_trace(&bell, 3, 2, Keep::A),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn product_trace_recovers_factors() {
    let a = charge(1.0, 5.0).rho_s;
    let b = coherent_bath_state(&BathSpec::new(2.0, DEFAULT_ACC).unwrap());
    let ab = tensor_product(&a, &b);
    let ra = partial_trace(&ab, 2, b.dim(), Keep::A).unwrap();
    let rb = partial_trace(&ab, 2, b.dim(), Keep::B).unwrap();
    assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-14);
    assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-14);
    assert_eq!(rb.basis().labels(), b.basis().labels());
}

#[test]
fn small_eigensystems() {
    let d =
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
    let e = hermitian_eigensystem(&d).unwrap();
    assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
    assert!(
        max_abs_diff(
            &e.eigenvectors.map(|z| c(z.norm(), 0.0)),
            &ComplexMatrix::identity(2, 2)
        ) < 1e-15
    );

    let sx =
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let e = hermitian_eigensystem(&sx).unwrap();
    assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15 && (e.eigenvalues[1] - 1.0).abs() < 1e-15);

    let skew =
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(
        hermitian_eigensystem(&skew),
        Err(Error::NotHermitian { .. })
    ));
}

#[test]
fn gibbs_qubit_entropy_value() {
    let p1 = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
    assert!((p1 - 0.268_941_4).abs() < 1e-7);
    let s = von_neumann_entropy(&gibbs_qubit(1.0));
    assert!((s - binary_entropy(p1)).abs() < 1e-14);
    assert!((s - 0.582_203_1).abs() < 1e-7);
    assert!((gibbs_qubit_entropy(1.0) - s).abs() < 1e-14);
}

#[test]
fn entropy_extremes() {
    assert!(von_neumann_entropy(&plus()).abs() < 1e-12);
    let mixed = DensityOperator::maximally_mixed(EnergyBasis::qubit());
    assert!((von_neumann_entropy(&mixed) - LN_2).abs() < 1e-15);
}

#[test]
fn relative_entropy_values() {
    let mixed = DensityOperator::maximally_mixed(EnergyBasis::qubit());
    assert!((relative_entropy(&plus(), &mixed).unwrap() - LN_2).abs() < 1e-12);
    let r = charge(1.3, 4.0).rho_s;
    assert!(relative_entropy(&r, &r).unwrap().abs() < 1e-12);
    let ground = DensityOperator::diagonal(&[1.0, 0.0], EnergyBasis::qubit()).unwrap();
    assert_eq!(
        relative_entropy(&mixed, &ground),
        Err(Error::InfiniteRelativeEntropy)
    );
}

#[test]
fn relative_entropy_to_gibbs_is_total_coherence_for_charged_state() {
    let r = charge(1.0, 5.0).rho_s;
    let to_gibbs = relative_entropy(&r, &gibbs_qubit(1.0)).unwrap();
    let c_tot = coherence_report(&r).unwrap().c_tot;
    assert!((to_gibbs - c_tot).abs() < 1e-8);
}

#[test]
fn trace_distance_values() {
    let g = DensityOperator::diagonal(&[1.0, 0.0], EnergyBasis::qubit()).unwrap();
    let e = DensityOperator::diagonal(&[0.0, 1.0], EnergyBasis::qubit()).unwrap();
    assert!((trace_distance(&g, &e).unwrap() - 1.0).abs() < 1e-15);
    assert!(trace_distance(&g, &g).unwrap().abs() < 1e-15);
    let pair = tensor_product(&g, &g);
    assert!(matches!(
        trace_distance(&g, &pair),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn analytic_and_evolved_charge_agree() {
    let ch = charge(1.0, 5.0);
    assert!(trace_distance(&ch.rho_s, &ch.evolved_system()).unwrap() <= 1e-8);
    assert!(ch.route_discrepancy <= 1e-8);
    let full = jc_joint_evolution(&gibbs_qubit(1.0), &ch.spec, 5.0).unwrap();
    let reduced = partial_trace(&full, 2, ch.spec.levels() + 1, Keep::A).unwrap();
    assert!(trace_distance(&reduced, &ch.rho_s).unwrap() <= 1e-8);
}

// coherence measures

#[test]
fn charged_state_dephases_to_gibbs() {
    let ch = charge(1.0, 5.0);
    assert!(max_abs_diff(fully_dephase(&ch.rho_s).matrix(), gibbs_qubit(1.0).matrix()) < 1e-8);
}

#[test]
fn charged_qubit_coherence_matches_closed_form() {
    let ch = charge(1.0, 5.0);
    let (p0, p1) = (ch.rho_s.populations()[0], ch.rho_s.populations()[1]);
    let off = ch.rho_s.element(0, 1).norm();
    let lam = 0.5 + ((p0 - p1).powi(2) / 4.0 + off * off).sqrt();
    let expect = binary_entropy(p1) - binary_entropy(lam);
    let r = coherence_report(&ch.rho_s).unwrap();
    assert_eq!(r.c_int, 0.0);
    assert!(r.c_ext > 0.0);
    assert!((r.c_ext - expect).abs() < 1e-12);
    assert!(r.decomposition_residual() < 1e-9);
}

#[test]
fn maximally_coherent_pair_split() {
    let pair = tensor_product(&plus(), &plus());
    let r = coherence_report(&pair).unwrap();
    assert!((r.c_int - 0.34657).abs() < 1e-5);
    assert!((r.c_ext - 1.5 * LN_2).abs() < 1e-12);
    assert!((r.c_tot - 2.0 * LN_2).abs() < 1e-12);
}

#[test]
fn block_dephase_leaves_gibbs_pair() {
    let g = tensor_product(&gibbs_qubit(0.9), &gibbs_qubit(0.9));
    assert!(max_abs_diff(block_dephase(&g).matrix(), g.matrix()) < 1e-16);
}

#[test]
fn correlated_coherence_of_initial_joint_state_is_zero() {
    let spec = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let rho = jc_joint_evolution(&gibbs_qubit(1.0), &spec, 0.0).unwrap();
    assert!(
        correlated_external_coherence(&rho, 2, spec.levels() + 1)
            .unwrap()
            .abs()
            < 1e-10
    );
}

// charging

#[test]
fn effective_dimensions() {
    assert_eq!(effective_bath_dimension(1.0, 1e-8).unwrap(), 17);
    assert_eq!(effective_bath_dimension(0.5, 1e-8).unwrap(), 35);
    assert!(effective_bath_dimension(10.0, 1e-8).unwrap() <= 2);
}

#[test]
fn remainder_bound_holds_against_long_sum() {
    for b in [0.5, 1.0, 2.0] {
        for gt in [1.0, 10.0, 30.0] {
            let d = effective_bath_dimension(b, 1e-8).unwrap();
            let far = coherence_amplitude(b, gt, d + 200, SeriesConvention::WithPrefactor);
            // Terms p = 0..=d.
            let near = coherence_amplitude(b, gt, d + 1, SeriesConvention::WithPrefactor);
            let bound = series_remainder_bound(b, d, gt);
            assert!((far - near).norm() <= bound, "b={b} gt={gt}");
            assert!((far - near).norm() <= 1e-8, "b={b} gt={gt}");
            for n in [d / 2, d - 1, d + 3] {
                let partial = coherence_amplitude(b, gt, n + 1, SeriesConvention::WithPrefactor);
                assert!((far - partial).norm() <= series_remainder_bound(b, n, gt) * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn coherent_bath_ground_weight() {
    let spec = BathSpec::with_levels(1.0, DEFAULT_ACC, 17).unwrap();
    let psi = coherent_bath_state(&spec);
    assert!((psi.populations()[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-7);
    assert!((psi.purity() - 1.0).abs() < 1e-12);
    assert!(
        max_abs_diff(
            fully_dephase(&psi).matrix(),
            &ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                17,
                truncated_gibbs_bath(&spec).into_iter().map(|p| c(p, 0.0))
            ))
        ) < 1e-15
    );
}

#[test]
fn rabi_swap_in_first_sector() {
    let mut state = vec![c(0.0, 0.0); 8];
    state[4] = c(1.0, 0.0); // |1, 0⟩ with 4 bath levels
    apply_jc_unitary(&mut state, 4, FRAC_PI_2);
    assert!((state[1] - c(0.0, -1.0)).norm() < 1e-15);
    assert!(state
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != 1)
        .all(|(_, z)| z.norm() < 1e-15));
}

#[test]
fn cold_bath_charges_nothing() {
    let d = BathSpec::new(20.0, DEFAULT_ACC).unwrap().levels();
    for k in 0..=60 {
        let delta = coherence_amplitude(20.0, 0.5 * k as f64, d, SeriesConvention::WithPrefactor);
        assert!(delta.norm() / qubit_partition(20.0) < 0.01);
    }
}

#[test]
fn prefactor_conventions_separate_in_cold_limit() {
    let on = coherence_amplitude(30.0, FRAC_PI_2, 5, SeriesConvention::WithPrefactor).norm();
    let off = coherence_amplitude(30.0, FRAC_PI_2, 5, SeriesConvention::Literal).norm();
    assert!((on - (-15.0f64).exp()).abs() < 1e-12);
    assert!((on - 3.059e-7).abs() < 1e-9);
    assert!((off - 1.0).abs() < 1e-12);
}

#[test]
fn amplitude_is_the_upper_off_diagonal_of_the_evolved_qubit() {
    let spec = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let evolved = evolve_joint(&gibbs_qubit(1.0), &spec, 1.0)
        .unwrap()
        .reduced_system();
    let delta = coherence_amplitude(1.0, 1.0, spec.levels(), SeriesConvention::WithPrefactor);
    assert!((evolved.element(0, 1) - delta / qubit_partition(1.0)).norm() < 1e-8);
    assert!(delta.norm() <= 1.0);
}

#[test]
fn series_components_match_evolution() {
    let spec = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let ground = DensityOperator::diagonal(&[1.0, 0.0], EnergyBasis::qubit()).unwrap();
    let kappa = kappa_initial_state(1.0, 0.3).unwrap();
    let mut moved = [0.0f64; 2];
    for k in 0..=100 {
        let gt = 0.1 * k as f64;
        for (i, init) in [&ground, &kappa].into_iter().enumerate() {
            let ev = evolve_joint(init, &spec, gt).unwrap().reduced_system();
            let series = final_state_components(init, &spec, gt).unwrap();
            assert!((series.rho00 - ev.element(0, 0).re).abs() < 1e-8);
            assert!((series.rho01 - ev.element(0, 1)).norm() < 1e-8);
            moved[i] = moved[i].max((ev.element(0, 0).re - init.element(0, 0).re).abs());
        }
        let closed_ground = ground_population_from_ground(&spec, gt);
        let closed_kappa = ground_population_with_kappa(&spec, gt, 0.3);
        assert!(
            (closed_ground - final_state_components(&ground, &spec, gt).unwrap().rho00).abs()
                < 1e-8
        );
        assert!(
            (closed_kappa - final_state_components(&kappa, &spec, gt).unwrap().rho00).abs() < 1e-8
        );
    }
    assert!(moved.iter().all(|&m| m > 0.05), "{moved:?}");
}

// engine

#[test]
fn idle_cycle_is_all_zero() {
    let p =
        cycle_performance(&EngineOperatingPoint::new(4, 1.0, 0.0, DEFAULT_ACC).unwrap()).unwrap();
    assert_eq!((p.c_int_total, p.w_coh, p.eta), (0.0, 0.0, 0.0));
    assert!(p.c_ext_per_qubit.abs() < 1e-12 && p.s_bath.abs() < 1e-12 && p.q_in.abs() < 1e-12);
}

#[test]
fn input_flow_routes_agree() {
    let (via_entropy, via_change) = input_flow_routes(&charge(1.0, 5.0), 4);
    assert!((via_entropy - via_change).abs() < 1e-8);
    assert!(via_entropy > 0.0);
}

#[test]
fn benchmark_pair_value_and_dense_route() {
    assert!((maximally_coherent_benchmark(0.0, 2).unwrap() - 0.17329).abs() < 1e-5);
    assert_eq!(maximally_coherent_benchmark(1.0, 1).unwrap(), 0.0);
    for b in [0.0, 1.0, 2.0] {
        for n in 1..=8 {
            let block = maximally_coherent_benchmark(b, n).unwrap();
            let dense = maximally_coherent_benchmark_dense(b, n).unwrap();
            assert!((block - dense).abs() < 1e-9, "b={b} n={n}");
        }
    }
}

#[test]
fn rate_identities() {
    let r = rate_checks(1.0, 5.0, DEFAULT_RATE_STEP).unwrap();
    assert!(r.heat_rate.abs() <= 1e-6);
    let r = rate_checks(1.0, 3.0, DEFAULT_RATE_STEP).unwrap();
    assert!(r.identity_residual() <= 1e-3, "{r:?}");
    let early = rate_checks(1.0, 2e-3, 1e-3).unwrap();
    assert!(early.coherence_change_rate.abs() < 1e-2 && early.heat_rate.abs() < 1e-6);
}

#[test]
fn external_coherence_conservation() {
    assert!(conservation_check(1.0, 0.0).unwrap().residual < 1e-10);
    assert!(conservation_check(1.0, 5.0).unwrap().residual <= 1e-8);
    assert!(conservation_check(0.5, 20.0).unwrap().residual <= 1e-7);
}

// collective charging

fn jc_generator(levels: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(2 * levels, 2 * levels);
    for m in 1..levels {
        h[(levels + m - 1, m)] = c((m as f64).sqrt(), 0.0);
        h[(m, levels + m - 1)] = c((m as f64).sqrt(), 0.0);
    }
    h
}

#[test]
fn single_qubit_collective_is_jaynes_cummings() {
    let bath = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let spec = TcSpec::uniform(1, bath, 5.0).unwrap();
    let h = tc_interaction_hamiltonian(&spec, DEFAULT_DIM_CAP).unwrap();
    assert_eq!(h, jc_generator(spec.bath_levels()));
    let tc = tc_reduced_system(&spec).unwrap();
    let jc = charged_qubit_state(&bath, 5.0, SeriesConvention::WithPrefactor).unwrap();
    assert!(max_abs_diff(tc.matrix(), jc.evolved_system().matrix()) < 1e-9);
}

#[test]
fn collective_hamiltonian_conserves_excitations() {
    let bath = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let spec = TcSpec::new(vec![c(1.0, 0.0), c(0.0, 1.0)], bath, 1.0).unwrap();
    let h = tc_interaction_hamiltonian(&spec, DEFAULT_DIM_CAP).unwrap();
    let levels = spec.bath_levels();
    let excitations = |i: usize| (i / levels).count_ones() as usize + i % levels;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            if h[(i, j)].norm() > 0.0 {
                assert_eq!(excitations(i), excitations(j));
            }
        }
    }
    assert!(hermiticity_deviation(&h) <= 1e-12);
    assert!(energy_commutator_norm(&h, &spec.basis()) <= 1e-10);
}

#[test]
fn collective_start_is_unchanged() {
    let bath = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let spec = TcSpec::new(random_couplings(2, 3), bath, 0.0).unwrap();
    let rho = tc_evolve(&spec).unwrap();
    let mut psi = coherent_bath_state(&bath).into_matrix();
    psi = psi.resize(spec.bath_levels(), spec.bath_levels(), c(0.0, 0.0));
    let g = gibbs_qubit(1.0).into_matrix();
    let initial = kron(&kron(&g, &g), &psi);
    assert!(max_abs_diff(rho.matrix(), &initial) < 1e-12);
}

#[test]
fn collective_charging_keeps_register_populations_thermal() {
    let bath = BathSpec::new(1.0, DEFAULT_ACC).unwrap();
    let spec = TcSpec::new(random_couplings(2, 11), bath, 5.0).unwrap();
    let r = collective_coherence_check(&spec).unwrap();
    assert!(r.diagonal_residual <= 1e-8);
    assert!(r.c_int <= 1e-8 && r.block_residual <= 1e-8);
    let unit = collective_coherence_check(&TcSpec::uniform(2, bath, 5.0).unwrap()).unwrap();
    assert!(unit.c_int <= 1e-8);
}

#[test]
fn sequential_beats_collective() {
    let rows = sequential_vs_collective(2, 1.0, &[0.0, 2.5, 5.0, 11.0], DEFAULT_ACC).unwrap();
    assert_eq!((rows[0].sequential, rows[0].collective), (0.0, 0.0));
    for r in &rows {
        assert!(r.collective <= 1e-8);
        assert!(r.sequential >= r.collective - 1e-9);
    }
    assert!(rows[3].sequential > 0.01);
}
