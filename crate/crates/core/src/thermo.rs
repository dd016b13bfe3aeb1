//! Work, dissipation and quantum heat for a unitary protocol started in a Gibbs state.
//!
//! The protocol drives `ρ_β^eq(0) = e^{-βH₀}/Z` with `U_τ` to `ρ(τ) = U_τ ρ_β^eq(0) U_τ†`.
//! Its CTS counterpart `ρ_β(τ)` lives on the evolved eigenbasis `U_τ|E_k⟩` with
//! weights set by `ε_k = ⟨E_k|U_τ† H_τ U_τ|E_k⟩`. Relative entropies among
//! `ρ(τ)`, `ρ_β(τ)` and `ρ_β^eq(τ)` reproduce the dissipated work, split it into
//! a triangle, and measure the quantum heat `β⁻¹ J`.
//!
//! The labeling `k ↔ E_k` comes from an [`EnergyFrame`], by default the ascending
//! eigenvalue order of `H₀`. Within a degenerate eigenspace any permutation of
//! labels gives the same report.

use serde::Serialize;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{eig_hermitian, trace_norm, ComplexMatrix, HermitianOperator, UNITARY_TOL};
use crate::states::{
    diag_energies, gibbs, log_partition, log_weights, relative_entropy, weighted_moments,
    ConditionalThermalState, Density, PointerBasis,
};

/// Tolerance for the relative-entropy identities checked by [`analyze`].
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for identities that hold by construction.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// Initial Hamiltonian, final Hamiltonian, protocol unitary and inverse temperature.
#[derive(Clone, Debug)]
pub struct ProcessSpec {
    h0: HermitianOperator,
    htau: HermitianOperator,
    utau: ComplexMatrix,
    beta: f64,
}

impl ProcessSpec {
    pub fn new(
        h0: HermitianOperator,
        htau: HermitianOperator,
        utau: ComplexMatrix,
        beta: f64,
    ) -> Result<Self> {
        ensure_dim(h0.dim(), htau.dim())?;
        ensure_dim(h0.dim(), utau.dim())?;
        let defect = utau.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Precondition(format!(
                "U_τ is not unitary (defect {defect:.3e})"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::Precondition(format!(
                "inverse temperature {beta} is not finite"
            )));
        }
        Ok(Self {
            h0,
            htau,
            utau,
            beta,
        })
    }

    /// `(H₀, V H₀ V†, V)`: the final Hamiltonian is the initial one carried along by
    /// the protocol, so no heat is produced.
    pub fn adiabatic(h0: HermitianOperator, v: ComplexMatrix, beta: f64) -> Result<Self> {
        let htau = h0.conjugate_by(&v);
        Self::new(h0, htau, v, beta)
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn htau(&self) -> &HermitianOperator {
        &self.htau
    }

    pub fn utau(&self) -> &ComplexMatrix {
        &self.utau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Labeled eigenbasis `{(E_k, |E_k⟩)}` of `H₀`.
#[derive(Clone, Debug)]
pub struct EnergyFrame {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
}

impl EnergyFrame {
    /// Ascending eigenvalues; ties keep the eigensolver's order.
    pub fn of(h0: &HermitianOperator) -> Self {
        let e = eig_hermitian(h0);
        Self {
            energies: e.eigenvalues,
            vectors: e.eigenvectors,
        }
    }

    /// A caller-supplied labeling. Each column must be an eigenvector of `h0`
    /// with the matching energy.
    pub fn new(h0: &HermitianOperator, energies: Vec<f64>, vectors: ComplexMatrix) -> Result<Self> {
        ensure_dim(h0.dim(), energies.len())?;
        ensure_dim(h0.dim(), vectors.dim())?;
        let defect = vectors.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Precondition(format!(
                "frame vectors are not orthonormal ({defect:.3e})"
            )));
        }
        let tol = 1e-9 * (1.0 + h0.matrix().frobenius_norm());
        for (k, &e) in energies.iter().enumerate() {
            let v = vectors.column(k);
            let hv = h0.matrix().apply(&v);
            let residual = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if residual > tol {
                return Err(Error::Precondition(format!(
                    "frame vector {k} is not an eigenvector with energy {e} (residual {residual:.3e})"
                )));
            }
        }
        Ok(Self { energies, vectors })
    }

    /// Reorders labels: new label `k` is old label `order[k]`.
    pub fn relabeled(&self, order: &[usize]) -> Result<Self> {
        let n = self.energies.len();
        ensure_dim(n, order.len())?;
        let mut seen = vec![false; n];
        for &i in order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Precondition(format!(
                    "{order:?} is not a permutation"
                )));
            }
        }
        Ok(Self {
            energies: order.iter().map(|&i| self.energies[i]).collect(),
            vectors: ComplexMatrix::from_fn(n, |r, c| self.vectors[(r, order[c])]),
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }
}

fn initial_gibbs(frame: &EnergyFrame, beta: f64) -> Result<Density> {
    let (logw, _) = log_weights(beta, &frame.energies);
    Density::from_spectral(frame.vectors.clone(), logw)
}

/// `ρ(τ) = U_τ ρ_β^eq(0) U_τ†`, kept in spectral form with the initial Gibbs weights.
pub fn evolve_exact(spec: &ProcessSpec) -> Result<Density> {
    evolve_in_frame(spec, &EnergyFrame::of(&spec.h0))
}

fn evolve_in_frame(spec: &ProcessSpec, frame: &EnergyFrame) -> Result<Density> {
    let (logw, _) = log_weights(spec.beta, &frame.energies);
    Density::from_spectral(&spec.utau * &frame.vectors, logw)
}

/// `ρ_β(τ)`: the CTS of `H_τ` in the basis `{U_τ|E_k⟩}`.
pub fn final_cts(spec: &ProcessSpec) -> Result<ConditionalThermalState> {
    final_cts_in_frame(spec, &EnergyFrame::of(&spec.h0))
}

pub fn final_cts_in_frame(
    spec: &ProcessSpec,
    frame: &EnergyFrame,
) -> Result<ConditionalThermalState> {
    ensure_dim(spec.dim(), frame.energies.len())?;
    let basis = PointerBasis::new(&spec.utau * &frame.vectors)?;
    let energies = diag_energies(&spec.htau, &basis)?;
    ConditionalThermalState::from_energies(basis, energies, spec.beta)
}

/// `⟨W⟩ = Tr ρ(τ) H_τ - Tr ρ_β^eq(0) H₀`.
pub fn work_exact(spec: &ProcessSpec) -> Result<f64> {
    let frame = EnergyFrame::of(&spec.h0);
    let rho_tau = evolve_in_frame(spec, &frame)?;
    let initial = initial_gibbs(&frame, spec.beta)?.weights();
    Ok(rho_tau.expectation(&spec.htau) - weighted_moments(&initial, &frame.energies).0)
}

/// `ΔF^eq = -β⁻¹ ln(Z_β^eq(τ) / Z_β^eq(0))`; needs `β > 0`.
pub fn equilibrium_free_energy_difference(spec: &ProcessSpec) -> Result<f64> {
    if !(spec.beta > 0.0) {
        return Err(Error::Domain(format!(
            "free energy difference needs β > 0, got {}",
            spec.beta
        )));
    }
    let spectrum_0 = eig_hermitian(&spec.h0).eigenvalues;
    let spectrum_tau = eig_hermitian(&spec.htau).eigenvalues;
    Ok(
        -(log_partition(spec.beta, &spectrum_tau) - log_partition(spec.beta, &spectrum_0))
            / spec.beta,
    )
}

/// Ergotropy `𝒲₀(ρ) = Tr ρ H₀ - Tr Γ ρ Γ† H₀` with the ergotropic transformation
/// `Γ = Σ_k |E_k⟩⟨E_k| U_τ†`.
#[derive(Clone, Debug)]
pub struct Ergotropy {
    pub value: f64,
    pub gamma: ComplexMatrix,
}

pub fn ergotropy(
    rho: &HermitianOperator,
    h0: &HermitianOperator,
    utau: &ComplexMatrix,
) -> Result<Ergotropy> {
    ergotropy_in_frame(rho, h0, &EnergyFrame::of(h0), utau)
}

pub fn ergotropy_in_frame(
    rho: &HermitianOperator,
    h0: &HermitianOperator,
    frame: &EnergyFrame,
    utau: &ComplexMatrix,
) -> Result<Ergotropy> {
    ensure_dim(h0.dim(), rho.dim())?;
    ensure_dim(h0.dim(), utau.dim())?;
    let n = h0.dim();
    let mut gamma = ComplexMatrix::zeros(n);
    let u_dag = utau.adjoint();
    for k in 0..n {
        let e = frame.vectors.column(k);
        let projector = ComplexMatrix::outer(&e, &e);
        gamma = &gamma + &(&projector * &u_dag);
    }
    let transformed =
        HermitianOperator::from_hermitian_part(&(&(&gamma * rho.matrix()) * &gamma.adjoint()));
    Ok(Ergotropy {
        value: rho.trace_product(h0) - transformed.trace_product(h0),
        gamma,
    })
}

/// Scalars of one protocol. Relative entropies are in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoReport {
    pub beta: f64,
    pub work: f64,
    pub delta_f_eq: f64,
    pub work_dissipative: f64,
    /// `S(ρ(τ) ‖ ρ_β^eq(τ))`.
    pub s_exact_vs_gibbs: f64,
    /// `S(ρ_β(τ) ‖ ρ_β^eq(τ))`.
    pub s_cts_vs_gibbs: f64,
    /// `S(ρ(τ) ‖ ρ_β(τ))`.
    pub s_exact_vs_cts: f64,
    /// `S(ρ_β(τ) ‖ ρ(τ))`.
    pub s_cts_vs_exact: f64,
    pub j_divergence: f64,
    pub ergotropy_w0: f64,
    pub delta_e_cts: f64,
    pub quantum_heat: f64,
    /// `‖ρ(τ) - ρ_β(τ)‖₁`.
    pub exact_cts_trace_distance: f64,
    #[serde(flatten)]
    pub residuals: ThermoResiduals,
}

/// Absolute residuals of the identities checked by [`analyze`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoResiduals {
    /// `|β⟨W_dis⟩ - S(ρ(τ)‖ρ_β^eq(τ))|`.
    pub residual_dissipation: f64,
    /// `S(ρ(τ)‖ρ_β^eq(τ)) - S(ρ_β(τ)‖ρ_β^eq(τ))`; nonnegative up to roundoff.
    pub bound_gap: f64,
    /// `|S(ρ‖ρ_β) + S(ρ_β‖ρ^eq) - S(ρ‖ρ^eq)|`.
    pub residual_triangle: f64,
    /// `|J - β(⟨W⟩ - 𝒲₀ - ΔE)|`.
    pub residual_heat: f64,
    /// `|S(ρ(τ)‖ρ_β(τ)) - β⟨W⟩ - ln(Z_β(τ)/Z_β^eq(0))|`.
    pub residual_exact_work: f64,
    /// `|Tr[Γ ρ_β(τ) Γ† H₀] - Σ_k E_k p_k(τ)|`.
    pub residual_ergotropic: f64,
}

impl ThermoReport {
    /// Field names and values in serialization order, for tabular output.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        let r = &self.residuals;
        vec![
            ("beta", self.beta),
            ("work", self.work),
            ("delta_f_eq", self.delta_f_eq),
            ("work_dissipative", self.work_dissipative),
            ("s_exact_vs_gibbs", self.s_exact_vs_gibbs),
            ("s_cts_vs_gibbs", self.s_cts_vs_gibbs),
            ("s_exact_vs_cts", self.s_exact_vs_cts),
            ("s_cts_vs_exact", self.s_cts_vs_exact),
            ("j_divergence", self.j_divergence),
            ("ergotropy_w0", self.ergotropy_w0),
            ("delta_e_cts", self.delta_e_cts),
            ("quantum_heat", self.quantum_heat),
            ("exact_cts_trace_distance", self.exact_cts_trace_distance),
            ("residual_dissipation", r.residual_dissipation),
            ("bound_gap", r.bound_gap),
            ("residual_triangle", r.residual_triangle),
            ("residual_heat", r.residual_heat),
            ("residual_exact_work", r.residual_exact_work),
            ("residual_ergotropic", r.residual_ergotropic),
        ]
    }
}

/// Full thermodynamic accounting of `spec` in the default frame of `H₀`.
pub fn analyze(spec: &ProcessSpec) -> Result<ThermoReport> {
    analyze_in_frame(spec, &EnergyFrame::of(&spec.h0))
}

/// As [`analyze`], with an explicit labeling of the `H₀` eigenbasis.
pub fn analyze_in_frame(spec: &ProcessSpec, frame: &EnergyFrame) -> Result<ThermoReport> {
    let report = evaluate_in_frame(spec, frame)?;
    report.check()?;
    Ok(report)
}

/// As [`analyze`], without enforcing the tolerances.
pub fn evaluate(spec: &ProcessSpec) -> Result<ThermoReport> {
    evaluate_in_frame(spec, &EnergyFrame::of(&spec.h0))
}

/// Computes every report field and residual without enforcing the tolerances.
pub fn evaluate_in_frame(spec: &ProcessSpec, frame: &EnergyFrame) -> Result<ThermoReport> {
    let beta = spec.beta;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "process analysis needs β > 0, got {beta}"
        )));
    }
    ensure_dim(spec.dim(), frame.energies.len())?;

    let rho0 = initial_gibbs(frame, beta)?;
    let p0 = rho0.weights();
    let rho_tau = evolve_in_frame(spec, frame)?;
    let cts_tau = final_cts_in_frame(spec, frame)?;
    let rho_cts = cts_tau.density();
    let rho_eq_tau = gibbs(&spec.htau, beta)?;

    let work = rho_tau.expectation(&spec.htau) - weighted_moments(&p0, &frame.energies).0;
    let delta_f_eq = equilibrium_free_energy_difference(spec)?;
    let work_dissipative = work - delta_f_eq;

    let s_exact_vs_gibbs = relative_entropy(&rho_tau, &rho_eq_tau)?;
    let s_cts_vs_gibbs = relative_entropy(&rho_cts, &rho_eq_tau)?;
    let s_exact_vs_cts = relative_entropy(&rho_tau, &rho_cts)?;
    let s_cts_vs_exact = relative_entropy(&rho_cts, &rho_tau)?;
    let j_divergence = s_exact_vs_cts + s_cts_vs_exact;

    let erg = ergotropy_in_frame(rho_cts.operator(), &spec.h0, frame, &spec.utau)?;
    let delta_e_cts = rho_cts.expectation(&spec.htau) - rho_cts.expectation(&spec.h0);

    let transformed = HermitianOperator::from_hermitian_part(
        &(&(&erg.gamma * rho_cts.operator().matrix()) * &erg.gamma.adjoint()),
    );
    let passive_energy = weighted_moments(&cts_tau.probs, &frame.energies).0;
    let log_z0 = log_partition(beta, &frame.energies);

    let residuals = ThermoResiduals {
        residual_dissipation: (beta * work_dissipative - s_exact_vs_gibbs).abs(),
        bound_gap: s_exact_vs_gibbs - s_cts_vs_gibbs,
        residual_triangle: (s_exact_vs_cts + s_cts_vs_gibbs - s_exact_vs_gibbs).abs(),
        residual_heat: (j_divergence - beta * (work - erg.value - delta_e_cts)).abs(),
        residual_exact_work: (s_exact_vs_cts - beta * work - (cts_tau.log_z - log_z0)).abs(),
        residual_ergotropic: (transformed.trace_product(&spec.h0) - passive_energy).abs(),
    };

    let report = ThermoReport {
        beta,
        work,
        delta_f_eq,
        work_dissipative,
        s_exact_vs_gibbs,
        s_cts_vs_gibbs,
        s_exact_vs_cts,
        s_cts_vs_exact,
        j_divergence,
        ergotropy_w0: erg.value,
        delta_e_cts,
        quantum_heat: j_divergence / beta,
        exact_cts_trace_distance: trace_norm(
            &(rho_tau.operator().matrix() - rho_cts.operator().matrix()),
        ),
        residuals,
    };
    Ok(report)
}

impl ThermoReport {
    /// Fails with a consistency error naming the first identity whose residual
    /// exceeds its tolerance.
    pub fn check(&self) -> Result<()> {
        let res = &self.residuals;
        let checks = [
            (
                "dissipated work vs relative entropy",
                res.residual_dissipation,
                IDENTITY_TOL,
            ),
            (
                "CTS lower bound on dissipation",
                (-res.bound_gap).max(0.0),
                IDENTITY_TOL,
            ),
            (
                "thermodynamic triangle",
                res.residual_triangle,
                IDENTITY_TOL,
            ),
            ("quantum heat accounting", res.residual_heat, IDENTITY_TOL),
            (
                "exact work vs relative entropy to CTS",
                res.residual_exact_work,
                IDENTITY_TOL,
            ),
            (
                "ergotropic transformation energy",
                res.residual_ergotropic,
                CONSTRUCTION_TOL,
            ),
        ];
        for (check, residual, tolerance) in checks {
            if !(residual <= tolerance) {
                return Err(Error::Consistency {
                    check,
                    residual,
                    tolerance,
                });
            }
        }
        Ok(())
    }
}
