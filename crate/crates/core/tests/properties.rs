use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use ctherm::asymmetry::evaluate_skew_report;
use ctherm::io::{parse_model, ModelFile, Sci};
use ctherm::linalg::{fidelity, trace_norm};
use ctherm::metrology::{qfi_analytic, qubit_delta_qfi, ThermometryModel};
use ctherm::random::{gue, haar_unitary, random_density, InstanceRng};
use ctherm::states::{cts, energy_moments, log_partition, relative_entropy, separable_cts};
use ctherm::sweep::BetaGrid;
use ctherm::thermo::{evaluate, ProcessSpec};
use ctherm::{HermitianOperator, PointerBasis};

fn instance(seed: u64, d: usize) -> (HermitianOperator, PointerBasis, InstanceRng) {
    let mut rng = InstanceRng::new(seed, 0);
    let h = gue(&mut rng, d);
    let basis = PointerBasis::new(haar_unitary(&mut rng, d)).unwrap();
    (h, basis, rng)
}

fn energies() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_partition_matches_direct_sum(e in energies(), beta in -2.0..2.0f64) {
        let direct: f64 = e.iter().map(|x| (-beta * x).exp()).sum::<f64>().ln();
        assert_relative_eq!(log_partition(beta, &e), direct, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn log_partition_shift(e in energies(), beta in -3.0..3.0f64, c in -10.0..10.0f64) {
        let shifted: Vec<f64> = e.iter().map(|x| x + c).collect();
        assert_abs_diff_eq!(log_partition(beta, &shifted), log_partition(beta, &e) - beta * c, epsilon = 1e-10);
    }

    #[test]
    fn log_partition_survives_extreme_beta(e in energies(), beta in 1e3..1e6f64) {
        let lz = log_partition(beta, &e);
        prop_assert!(lz.is_finite());
        let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        // -β·min ≤ ln Z ≤ -β·min + ln d
        prop_assert!(lz >= -beta * min - 1e-9 * beta);
        prop_assert!(lz <= -beta * min + (e.len() as f64).ln() + 1e-9 * beta);
    }

    #[test]
    fn variance_is_second_derivative_of_log_partition(e in energies(), beta in -1.0..1.0f64) {
        let h = 1e-3;
        let fd = (log_partition(beta + h, &e) - 2.0 * log_partition(beta, &e) + log_partition(beta - h, &e)) / (h * h);
        let (_, var) = energy_moments(beta, &e);
        prop_assert!(var >= 0.0);
        prop_assert!((fd - var).abs() < 1e-4 * (1.0 + var));
    }

    #[test]
    fn cts_probabilities_are_a_distribution(seed in any::<u64>(), d in 1usize..7, beta in -5.0..5.0f64) {
        let (h, basis, _) = instance(seed, d);
        let state = cts(&h, &basis, beta).unwrap();
        prop_assert!(state.probs.iter().all(|&p| p > 0.0));
        assert_abs_diff_eq!(state.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state.operator().trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pointer_partition_never_exceeds_gibbs(seed in any::<u64>(), d in 1usize..7, beta in -5.0..5.0f64) {
        let (h, basis, _) = instance(seed, d);
        let model = ThermometryModel::new(h, basis).unwrap();
        prop_assert!(model.log_partition_ratio(beta) <= 1e-12);
        prop_assert!(model.relative_entropy_to_gibbs(beta) >= -1e-12);
    }

    #[test]
    fn separable_extension_reduces_to_cts(seed in any::<u64>(), d in 1usize..5, beta in -2.0..2.0f64) {
        let (h, basis, mut rng) = instance(seed, d);
        let ancilla = PointerBasis::new(haar_unitary(&mut rng, d)).unwrap();
        let ext = separable_cts(&h, &basis, &ancilla, beta).unwrap();
        let reduced = ext.reduced().unwrap();
        let direct = cts(&h, &basis, beta).unwrap().operator();
        prop_assert!(reduced.matrix().max_abs_diff(direct.matrix()) < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = InstanceRng::new(seed, 1);
        let rho = random_density(&mut rng, d);
        let sigma = random_density(&mut rng, d);
        let f = fidelity(&rho, &sigma).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        assert_abs_diff_eq!(f, fidelity(&sigma, &rho).unwrap(), epsilon = 1e-10);
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn trace_norm_triangle_inequality(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = InstanceRng::new(seed, 2);
        let a = random_density(&mut rng, d).into_matrix();
        let b = gue(&mut rng, d).into_matrix();
        let sum = &a + &b;
        prop_assert!(trace_norm(&sum) <= trace_norm(&a) + trace_norm(&b) + 1e-10);
        assert_abs_diff_eq!(trace_norm(&a), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn relative_entropy_is_nonnegative(seed in any::<u64>(), d in 1usize..6, beta in 0.1..3.0f64) {
        let (h, basis, _) = instance(seed, d);
        let state = cts(&h, &basis, beta).unwrap().density();
        let gibbs = ctherm::states::gibbs(&h, beta).unwrap();
        prop_assert!(relative_entropy(&state, &gibbs).unwrap() >= 0.0);
        assert_abs_diff_eq!(relative_entropy(&gibbs, &gibbs).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn skew_chain(seed in any::<u64>(), d in 2usize..5, beta in 0.1..3.0f64, alpha in 0.05..0.95f64) {
        let (h, basis, _) = instance(seed, d);
        let r = evaluate_skew_report(&h, &basis, beta, alpha, 4).unwrap();
        prop_assert!(r.skew_local >= -1e-12);
        prop_assert!(r.skew_local <= r.skew_extended + 1e-9);
        prop_assert!(r.identity_residual() < 1e-9);
        prop_assert!(r.bound_violation() < 1e-9);
        prop_assert!(r.route_discrepancy.unwrap() < 1e-9);
        assert_abs_diff_eq!(r.qfi, qfi_analytic(&cts(&h, &basis, beta).unwrap()).value, epsilon = 1e-12);
    }

    #[test]
    fn thermodynamic_identities(seed in any::<u64>(), d in 1usize..6, beta in 0.05..6.0f64) {
        let mut rng = InstanceRng::new(seed, 3);
        let spec = ProcessSpec::new(gue(&mut rng, d), gue(&mut rng, d), haar_unitary(&mut rng, d), beta).unwrap();
        let r = evaluate(&spec).unwrap();
        prop_assert!(r.check().is_ok(), "{:?}", r.residuals);
        prop_assert!(r.work_dissipative >= -1e-12);
        prop_assert!(r.j_divergence >= -1e-12);
    }

    #[test]
    fn qubit_closed_form_matches_matrix_pipeline(omega in 0.1..3.0f64, theta in -3.2..3.2f64, beta in 0.0..10.0f64) {
        let model = ThermometryModel::qubit(omega, theta);
        let tol = 1e-10 * omega * omega;
        prop_assert!((qubit_delta_qfi(omega, theta, beta) - model.delta_qfi(beta)).abs() < tol);
    }

    #[test]
    fn grid_endpoints_are_inclusive(start in -10.0..10.0f64, n in 0usize..500, step in 1e-3..1.0f64) {
        let stop = start + n as f64 * step;
        let grid = BetaGrid::new(start, stop, step).unwrap();
        prop_assert_eq!(grid.len(), n + 1);
        prop_assert_eq!(grid.point(0), start);
        prop_assert!((grid.point(n) - stop).abs() <= 1e-12 * (1.0 + stop.abs()));
    }

    #[test]
    fn scientific_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = Sci(x).to_string();
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn model_file_round_trips(seed in any::<u64>(), d in 1usize..5) {
        let (h, basis, _) = instance(seed, d);
        let text = serde_json::to_string(&ModelFile::from_model(&h, &basis, Some(0.5))).unwrap();
        let model = parse_model(&text).unwrap();
        prop_assert_eq!(model.hamiltonian.matrix(), h.matrix());
        prop_assert_eq!(model.basis.matrix(), basis.matrix());
        prop_assert_eq!(model.beta, Some(0.5));
    }
}
