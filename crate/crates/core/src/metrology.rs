//! Quantum Fisher information of conditional thermal states for estimating `β`.
//!
//! The Fisher information of a CTS is the curvature of its log-partition function,
//! `I = ∂²_β ln Z_β`, which equals the variance of the pointer energies under the
//! CTS weights. That variance is the primary route. Two finite-difference routes
//! through the fidelity `F(ρ_β, ρ_{β+ε})` are kept as independent checks: one uses
//! the closed form `Z²_{β+ε/2} / (Z_β Z_{β+ε})`, the other builds the density
//! matrices and runs the full matrix fidelity pipeline.

use serde::Serialize;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{eig_hermitian, fidelity, HermitianOperator};
use crate::states::{
    cts, diag_energies, energy_moments, log_partition, weighted_moments, ConditionalThermalState,
    PointerBasis,
};

/// Smallest step accepted by the closed-form fidelity route; below it the
/// `O(ε⁻²)` cancellation dominates.
pub const MIN_CLOSED_FORM_STEP: f64 = 1e-6;
/// Accepted step range for the matrix fidelity route.
pub const MATRIX_STEP_RANGE: (f64, f64) = (1e-4, 1e-2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiRoute {
    Analytic,
    FidelityClosedForm,
    FidelityMatrixFd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiResult {
    pub value: f64,
    pub route: QfiRoute,
    pub beta: f64,
}

/// Central second-difference settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
    /// Combine steps `ε` and `ε/2` as `(4 D(ε/2) - D(ε)) / 3`.
    pub richardson: bool,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            step: 1e-3,
            richardson: false,
        }
    }
}

impl FiniteDifference {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            richardson: false,
        }
    }

    fn evaluate(&self, mut d: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let coarse = d(self.step)?;
        if self.richardson {
            let fine = d(self.step / 2.0)?;
            Ok((4.0 * fine - coarse) / 3.0)
        } else {
            Ok(coarse)
        }
    }
}

/// `I(ρ_β; β) = Σ p_k ε_k² - (Σ p_k ε_k)²`.
pub fn qfi_analytic(state: &ConditionalThermalState) -> QfiResult {
    QfiResult {
        value: weighted_moments(&state.probs, &state.diag_energies).1,
        route: QfiRoute::Analytic,
        beta: state.beta,
    }
}

/// `F(ρ_β, ρ_{β+ε}) = Z²_{β+ε/2} / (Z_β Z_{β+ε})`, returned as `F - 1` to keep
/// the digits that the second difference needs.
pub fn fidelity_closed_form_minus_one(state: &ConditionalThermalState, eps: f64) -> f64 {
    let e = &state.diag_energies;
    let b = state.beta;
    let log_f = 2.0 * log_partition(b + eps / 2.0, e) - state.log_z - log_partition(b + eps, e);
    log_f.exp_m1()
}

/// `-2 ∂²_ε F(ρ_β, ρ_{β+ε})` by central differences on the closed-form fidelity.
pub fn qfi_fidelity_closed(
    state: &ConditionalThermalState,
    fd: FiniteDifference,
) -> Result<QfiResult> {
    if !(fd.step >= MIN_CLOSED_FORM_STEP) {
        return Err(Error::Precondition(format!(
            "finite-difference step {} is below {MIN_CLOSED_FORM_STEP:e}",
            fd.step
        )));
    }
    let value = fd.evaluate(|eps| {
        let plus = fidelity_closed_form_minus_one(state, eps);
        let minus = fidelity_closed_form_minus_one(state, -eps);
        Ok(-2.0 * (plus + minus) / (eps * eps))
    })?;
    Ok(QfiResult {
        value,
        route: QfiRoute::FidelityClosedForm,
        beta: state.beta,
    })
}

/// `-2 (F(β+ε) - 2 + F(β-ε)) / ε²` with `F` evaluated on explicit density matrices.
pub fn qfi_fidelity_matrix(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta: f64,
    fd: FiniteDifference,
) -> Result<QfiResult> {
    let (lo, hi) = MATRIX_STEP_RANGE;
    if !(lo..=hi).contains(&fd.step) {
        return Err(Error::Precondition(format!(
            "finite-difference step {} outside [{lo:e}, {hi:e}]",
            fd.step
        )));
    }
    let center = cts(h, basis, beta)?.operator();
    let value = fd.evaluate(|eps| {
        let plus = fidelity(&center, &cts(h, basis, beta + eps)?.operator())?;
        let minus = fidelity(&center, &cts(h, basis, beta - eps)?.operator())?;
        Ok(-2.0 * ((plus - 1.0) + (minus - 1.0)) / (eps * eps))
    })?;
    Ok(QfiResult {
        value,
        route: QfiRoute::FidelityMatrixFd,
        beta,
    })
}

/// `M_opt = Σ_k ε_k |ψ_k⟩⟨ψ_k|`, the measurement that saturates the Cramér-Rao bound.
pub fn optimal_measurement(state: &ConditionalThermalState) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(
        &state
            .basis()
            .matrix()
            .conjugate_diagonal(&state.diag_energies),
    )
}

/// Fisher information of the Gibbs state: variance of the spectrum under Gibbs weights.
pub fn qfi_gibbs(h: &HermitianOperator, beta: f64) -> f64 {
    energy_moments(beta, &eig_hermitian(h).eigenvalues).1
}

/// A Hamiltonian with a pointer basis, with the spectrum and pointer energies
/// precomputed for temperature sweeps.
#[derive(Clone, Debug)]
pub struct ThermometryModel {
    pub hamiltonian: HermitianOperator,
    pub basis: PointerBasis,
    pub pointer_energies: Vec<f64>,
    pub spectrum: Vec<f64>,
}

impl ThermometryModel {
    pub fn new(hamiltonian: HermitianOperator, basis: PointerBasis) -> Result<Self> {
        ensure_dim(hamiltonian.dim(), basis.dim())?;
        let pointer_energies = diag_energies(&hamiltonian, &basis)?;
        let spectrum = eig_hermitian(&hamiltonian).eigenvalues;
        Ok(Self {
            hamiltonian,
            basis,
            pointer_energies,
            spectrum,
        })
    }

    /// The qubit `H = ω σ_z` measured in `{e^{iθσ_x/2}|0⟩, e^{iθσ_x/2}|1⟩}`.
    pub fn qubit(omega: f64, theta: f64) -> Self {
        Self::new(
            HermitianOperator::pauli_z().scale(omega),
            PointerBasis::qubit_rotated(theta),
        )
        .expect("2x2 instance")
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn cts(&self, beta: f64) -> Result<ConditionalThermalState> {
        ConditionalThermalState::from_energies(
            self.basis.clone(),
            self.pointer_energies.clone(),
            beta,
        )
    }

    pub fn qfi_cts(&self, beta: f64) -> f64 {
        energy_moments(beta, &self.pointer_energies).1
    }

    pub fn qfi_gibbs(&self, beta: f64) -> f64 {
        energy_moments(beta, &self.spectrum).1
    }

    /// `ΔI_β = I(ρ_β; β) - I(ρ_β^eq; β)`.
    pub fn delta_qfi(&self, beta: f64) -> f64 {
        self.qfi_cts(beta) - self.qfi_gibbs(beta)
    }

    /// `ln(Z_β / Z_β^eq)`.
    pub fn log_partition_ratio(&self, beta: f64) -> f64 {
        log_partition(beta, &self.pointer_energies) - log_partition(beta, &self.spectrum)
    }

    /// `S(ρ_β ‖ ρ_β^eq) = -ln(Z_β / Z_β^eq)`.
    pub fn relative_entropy_to_gibbs(&self, beta: f64) -> f64 {
        -self.log_partition_ratio(beta)
    }

    /// `∂²_β ln(Z_β / Z_β^eq)` by a central second difference; equals `ΔI_β`.
    pub fn delta_qfi_curvature(&self, beta: f64, step: f64) -> f64 {
        second_difference(|b| self.log_partition_ratio(b), beta, step)
    }

    /// Sign test of `∂²_β S(ρ_β‖ρ_β^eq)` at `beta0`.
    pub fn outperformance(&self, beta0: f64, step: f64) -> Result<Outperformance> {
        let scale = 1.0 + beta0.abs();
        if !(1e-4 * scale..=1e-2 * scale).contains(&step) {
            return Err(Error::Precondition(format!(
                "step {step:e} outside [1e-4, 1e-2]·(1 + |β₀|) = [{:e}, {:e}]",
                1e-4 * scale,
                1e-2 * scale
            )));
        }
        let s = |b: f64| self.relative_entropy_to_gibbs(b);
        let curvature = second_difference(s, beta0, step);
        let coarse = second_difference(s, beta0, 2.0 * step);
        // Richardson-style error estimate of the h-step difference plus roundoff of
        // the four log-partition values entering it.
        let magnitude = 1.0
            + log_partition(beta0, &self.pointer_energies).abs()
            + log_partition(beta0, &self.spectrum).abs();
        let roundoff = 16.0 * f64::EPSILON * magnitude / (step * step);
        let truncation_estimate = (curvature - coarse).abs() / 3.0 + roundoff;
        Ok(Outperformance {
            outperforms: curvature < -truncation_estimate,
            curvature,
            truncation_estimate,
        })
    }
}

fn second_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// `ΔI_β` for `H` measured in `basis`.
pub fn qfi_difference(h: &HermitianOperator, basis: &PointerBasis, beta: f64) -> Result<f64> {
    Ok(ThermometryModel::new(h.clone(), basis.clone())?.delta_qfi(beta))
}

/// Result of the curvature test `∂²_β S(ρ_β‖ρ_β^eq) < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Outperformance {
    /// The CTS beats the Gibbs state at this temperature. Only reported when the
    /// curvature is negative by more than its error estimate.
    pub outperforms: bool,
    pub curvature: f64,
    pub truncation_estimate: f64,
}

pub fn outperformance_criterion(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta0: f64,
    step: f64,
) -> Result<Outperformance> {
    ThermometryModel::new(h.clone(), basis.clone())?.outperformance(beta0, step)
}

/// `ΔI_β(θ) = ω²(-1 + cos²θ / cosh²(βω cos θ) + tanh²(βω))` for the qubit
/// `H = ω σ_z` with pointer states rotated by `e^{iθσ_x/2}`.
///
/// Evaluated as `ω²(cos²θ sech²(βω cos θ) - sech²(βω))`, which avoids the
/// cancellation of `-1 + tanh²` at low temperature.
pub fn qubit_delta_qfi(omega: f64, theta: f64, beta: f64) -> f64 {
    let c = theta.cos();
    let sech2 = |x: f64| {
        let s = 1.0 / x.cosh();
        s * s
    };
    omega * omega * (c * c * sech2(beta * omega * c) - sech2(beta * omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gue, haar_unitary, InstanceRng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn sech2(x: f64) -> f64 {
        1.0 / x.cosh().powi(2)
    }

    fn random_model(rng: &mut InstanceRng, d: usize) -> ThermometryModel {
        let h = gue(rng, d);
        let basis = PointerBasis::new(haar_unitary(rng, d)).unwrap();
        ThermometryModel::new(h, basis).unwrap()
    }

    #[test]
    fn analytic_qubit_eigenbasis() {
        let m = ThermometryModel::qubit(1.0, 0.0);
        for beta in [0.0, 0.5, 1.0, 3.0] {
            let q = qfi_analytic(&m.cts(beta).unwrap());
            assert!((q.value - sech2(beta)).abs() < 1e-14);
            assert_eq!(q.route, QfiRoute::Analytic);
        }
    }

    #[test]
    fn analytic_infinite_temperature_and_flat() {
        let mut rng = InstanceRng::new(1, 0);
        let m = random_model(&mut rng, 4);
        let e = &m.pointer_energies;
        let mean = e.iter().sum::<f64>() / 4.0;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((qfi_analytic(&m.cts(0.0).unwrap()).value - var).abs() < 1e-14);

        let flat = ConditionalThermalState::from_energies(
            PointerBasis::computational(3),
            vec![0.3; 3],
            2.0,
        )
        .unwrap();
        assert_eq!(qfi_analytic(&flat).value, 0.0);
    }

    #[test]
    fn closed_form_fidelity_route() {
        let m = ThermometryModel::qubit(1.0, FRAC_PI_4);
        let state = m.cts(1.0).unwrap();
        assert_eq!(fidelity_closed_form_minus_one(&state, 0.0), 0.0);
        let c = FRAC_PI_4.cos();
        let expect = c * c * sech2(c);
        let got = qfi_fidelity_closed(&state, FiniteDifference::default()).unwrap();
        assert!((got.value - expect).abs() < 1e-6);
        let rich = qfi_fidelity_closed(
            &state,
            FiniteDifference {
                step: 1e-2,
                richardson: true,
            },
        )
        .unwrap();
        assert!((rich.value - expect).abs() < 1e-8);
        assert!(qfi_fidelity_closed(&state, FiniteDifference::with_step(1e-7)).is_err());
    }

    #[test]
    fn closed_form_error_is_second_order() {
        let mut rng = InstanceRng::new(2, 0);
        let m = random_model(&mut rng, 5);
        let state = m.cts(1.0).unwrap();
        let exact = qfi_analytic(&state).value;
        let e1 = (qfi_fidelity_closed(&state, FiniteDifference::with_step(2e-2))
            .unwrap()
            .value
            - exact)
            .abs();
        let e2 = (qfi_fidelity_closed(&state, FiniteDifference::with_step(1e-2))
            .unwrap()
            .value
            - exact)
            .abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn matrix_route_agrees() {
        let mut rng = InstanceRng::new(3, 0);
        for d in [2, 3, 4, 6] {
            let m = random_model(&mut rng, d);
            for beta in [0.0, 0.2, 1.0, 5.0] {
                let exact = m.qfi_cts(beta);
                let got = qfi_fidelity_matrix(
                    &m.hamiltonian,
                    &m.basis,
                    beta,
                    FiniteDifference::default(),
                )
                .unwrap();
                assert!(
                    (got.value - exact).abs() < 1e-4,
                    "d={d} β={beta}: {} vs {exact}",
                    got.value
                );
            }
        }
    }

    #[test]
    fn matrix_route_gibbs_case() {
        let mut rng = InstanceRng::new(4, 0);
        let h = gue(&mut rng, 4);
        let basis = PointerBasis::eigenbasis(&h);
        let spectrum = eig_hermitian(&h).eigenvalues;
        let beta = 0.8;
        // ∂²_β ln Z^eq, by its own second difference with a wide step.
        let step = 1e-4;
        let lz = |b: f64| log_partition(b, &spectrum);
        let curvature = (lz(beta + step) - 2.0 * lz(beta) + lz(beta - step)) / (step * step);
        let got = qfi_fidelity_matrix(&h, &basis, beta, FiniteDifference::default()).unwrap();
        assert!((got.value - curvature).abs() < 1e-4);
    }

    #[test]
    fn matrix_route_step_range() {
        let m = ThermometryModel::qubit(1.0, 0.3);
        for bad in [1e-5, 0.05] {
            assert!(qfi_fidelity_matrix(
                &m.hamiltonian,
                &m.basis,
                1.0,
                FiniteDifference::with_step(bad)
            )
            .is_err());
        }
    }

    #[test]
    fn optimal_measurement_properties() {
        let mut rng = InstanceRng::new(5, 0);
        let h = gue(&mut rng, 5);
        let gibbs_basis = PointerBasis::eigenbasis(&h);
        let m = optimal_measurement(&cts(&h, &gibbs_basis, 1.0).unwrap());
        assert!(m.matrix().max_abs_diff(h.matrix()) < 1e-12);

        let model = random_model(&mut rng, 5);
        let state = model.cts(1.3).unwrap();
        let m = optimal_measurement(&state);
        let rho = state.operator();
        let (a, b) = (rho.matrix(), m.matrix());
        assert!((&(a * b) - &(b * a)).max_abs() < 1e-10);
        // Tr[ρ M] = -∂_β ln Z_β
        let step = 1e-5;
        let e = &state.diag_energies;
        let dlnz = (log_partition(1.3 + step, e) - log_partition(1.3 - step, e)) / (2.0 * step);
        assert!((rho.trace_product(&m) + dlnz).abs() < 1e-9);
        assert!((rho.trace_product(&m) - state.mean_energy()).abs() < 1e-12);
        // Var_ρ{M} = I
        let m2 = HermitianOperator::from_hermitian_part(&(b * b));
        let var = rho.trace_product(&m2) - rho.trace_product(&m).powi(2);
        assert!((var - qfi_analytic(&state).value).abs() < 1e-10);
    }

    #[test]
    fn optimal_measurement_rotated_qubit() {
        let m = ThermometryModel::qubit(1.0, FRAC_PI_4);
        let op = optimal_measurement(&m.cts(0.7).unwrap());
        let u = PointerBasis::qubit_rotated(FRAC_PI_4);
        let rotated_z = HermitianOperator::pauli_z().conjugate_by(u.matrix());
        let expect = rotated_z.scale(FRAC_PI_4.cos());
        assert!(op.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn delta_qfi_examples() {
        let mut rng = InstanceRng::new(6, 0);
        let h = gue(&mut rng, 4);
        let eig = PointerBasis::eigenbasis(&h);
        for beta in [0.0, 0.5, 3.0, 20.0] {
            assert!(qfi_difference(&h, &eig, beta).unwrap().abs() < 1e-10);
        }
        let m = ThermometryModel::qubit(1.0, FRAC_PI_4);
        let d3 = m.delta_qfi(3.0);
        assert!((d3 - qubit_delta_qfi(1.0, FRAC_PI_4, 3.0)).abs() < 1e-12);
        assert!(d3 > 0.0);
        assert!((m.delta_qfi(0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn qubit_closed_form_limits() {
        for beta in [0.0, 0.4, 2.0, 9.0] {
            for omega in [0.5, 1.0, 2.0] {
                assert!(qubit_delta_qfi(omega, 0.0, beta).abs() < 1e-15);
                let perp = qubit_delta_qfi(omega, FRAC_PI_2, beta);
                let expect = omega * omega * (-1.0 + (beta * omega).tanh().powi(2));
                assert!((perp - expect).abs() < 1e-12);
                assert!(perp <= 1e-15);
            }
        }
        // Literal form at moderate β.
        for (theta, beta) in [(0.4, 0.3), (1.0, 2.0), (2.5, 1.1)] {
            let c: f64 = f64::cos(theta);
            let literal = -1.0 + c * c / (beta * c).cosh().powi(2) + f64::tanh(beta).powi(2);
            assert!((qubit_delta_qfi(1.0, theta, beta) - literal).abs() < 1e-14);
        }
        // Low-temperature form.
        let (omega, theta, beta): (f64, f64, f64) = (1.0, 0.7, 30.0);
        let x = omega * theta.cos();
        let approx = (x / (beta * x).cosh()).powi(2);
        let exact = qubit_delta_qfi(omega, theta, beta);
        assert!(exact >= 0.0);
        assert!(exact > 0.0 && (exact - approx).abs() < 1e-5 * approx);
    }

    #[test]
    fn closed_form_matches_matrix_pipeline() {
        for theta in [0.0, 0.3, FRAC_PI_4, 1.1, 2.0, 3.5] {
            let m = ThermometryModel::qubit(1.3, theta);
            for beta in [0.0, 0.25, 1.0, 4.0] {
                assert!((m.delta_qfi(beta) - qubit_delta_qfi(1.3, theta, beta)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn curvature_matches_delta_qfi() {
        let mut rng = InstanceRng::new(7, 0);
        for d in [2, 3, 5] {
            let m = random_model(&mut rng, d);
            for beta in [0.2, 1.0, 5.0] {
                let fd = m.delta_qfi_curvature(beta, 1e-3);
                assert!((fd - m.delta_qfi(beta)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn criterion_examples() {
        let m = ThermometryModel::qubit(1.0, FRAC_PI_4);
        let hot = m.outperformance(0.1, 1e-3).unwrap();
        assert!(!hot.outperforms && hot.curvature > 0.0);
        let cold = m.outperformance(3.0, 1e-3).unwrap();
        assert!(cold.outperforms);
        assert!((cold.curvature + m.delta_qfi(3.0)).abs() < 1e-5);

        let flat = ThermometryModel::qubit(1.0, 0.0)
            .outperformance(1.0, 1e-3)
            .unwrap();
        assert_eq!(flat.curvature, 0.0);
        assert!(!flat.outperforms);

        assert!(m.outperformance(1.0, 1e-6).is_err());
    }

    #[test]
    fn criterion_sign_agrees_with_delta_qfi() {
        let mut rng = InstanceRng::new(8, 0);
        for _ in 0..20 {
            let m = random_model(&mut rng, 3);
            for beta in [0.2, 1.0, 2.5, 5.0] {
                let out = m.outperformance(beta, 1e-3 * (1.0 + beta)).unwrap();
                let delta = m.delta_qfi(beta);
                if delta.abs() > 10.0 * out.truncation_estimate {
                    assert_eq!(out.outperforms, delta > 0.0);
                }
            }
        }
    }
}
