//! Gibbs states, conditional thermal states and their entropy functionals.
//!
//! A conditional thermal state (CTS) is the Gibbs-weighted mixture of the projectors
//! of a pointer basis `{|ψ_k⟩}`, with weights `e^{-β ε_k} / Z_β` built from the
//! diagonal energies `ε_k = ⟨ψ_k|H|ψ_k⟩`. When the pointer basis diagonalizes `H`
//! it is the ordinary Gibbs state.
//!
//! All partition sums go through log-sum-exp shifted by the dominant exponent, and
//! probabilities are formed in log space, so `β‖H‖` far beyond 700 is fine.

use num_complex::Complex64;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{density_eig, eig_hermitian, ComplexMatrix, HermitianOperator, UNITARY_TOL};

/// Relative eigenvalue level below which an eigenvalue of a density matrix built
/// from raw entries is indistinguishable from zero.
const KERNEL_EPS: f64 = 1e-15;
/// A relative entropy diverges when `ρ` puts more than this weight outside `supp σ`.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Orthonormal measurement basis; the k-th column is `|ψ_k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointerBasis(ComplexMatrix);

impl PointerBasis {
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        let defect = columns.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Precondition(format!(
                "pointer basis is not orthonormal (max |U†U - 1| = {defect:.3e})"
            )));
        }
        Ok(Self(columns))
    }

    pub fn computational(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    /// Eigenvectors of `h`, ascending eigenvalue order.
    pub fn eigenbasis(h: &HermitianOperator) -> Self {
        Self(eig_hermitian(h).eigenvectors)
    }

    /// Qubit basis `{e^{iθσ_x/2}|0⟩, e^{iθσ_x/2}|1⟩}`.
    pub fn qubit_rotated(theta: f64) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, (theta / 2.0).sin());
        Self(ComplexMatrix::from_row_major(vec![c, s, s, c]).expect("2x2"))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.0.column(k)
    }

    /// `{|ψ_k⟩ ⊗ |φ_l⟩}` with column index `k·d_φ + l`.
    pub fn tensor(&self, other: &PointerBasis) -> PointerBasis {
        PointerBasis(self.0.kron(&other.0))
    }

    /// Basis `{U|ψ_k⟩}`.
    pub fn transformed(&self, u: &ComplexMatrix) -> Result<PointerBasis> {
        ensure_dim(self.dim(), u.dim())?;
        PointerBasis::new(u * &self.0)
    }
}

/// Diagonal energies `ε_k = ⟨ψ_k|H|ψ_k⟩`.
pub fn diag_energies(h: &HermitianOperator, basis: &PointerBasis) -> Result<Vec<f64>> {
    ensure_dim(h.dim(), basis.dim())?;
    let hv = h.matrix() * basis.matrix();
    let b = basis.matrix();
    Ok((0..basis.dim())
        .map(|k| {
            (0..h.dim())
                .map(|i| b[(i, k)].conj() * hv[(i, k)])
                .sum::<Complex64>()
                .re
        })
        .collect())
}

/// `ln Σ_k e^{-β ε_k}`, overflow-safe. Exactly `ln d` at `β = 0`.
pub fn log_partition(beta: f64, energies: &[f64]) -> f64 {
    let shift = energies
        .iter()
        .map(|&e| -beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    if beta == 0.0 {
        return (energies.len() as f64).ln();
    }
    shift
        + energies
            .iter()
            .map(|&e| (-beta * e - shift).exp())
            .sum::<f64>()
            .ln()
}

/// Canonical-ensemble log-weights `ln p_k = -β ε_k - ln Z` and `ln Z`.
pub fn log_weights(beta: f64, energies: &[f64]) -> (Vec<f64>, f64) {
    let log_z = log_partition(beta, energies);
    (energies.iter().map(|&e| -beta * e - log_z).collect(), log_z)
}

/// Mean and variance of `energies` under the Gibbs weights at `beta`.
pub fn energy_moments(beta: f64, energies: &[f64]) -> (f64, f64) {
    let (logp, _) = log_weights(beta, energies);
    let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
    weighted_moments(&probs, energies)
}

pub(crate) fn weighted_moments(probs: &[f64], values: &[f64]) -> (f64, f64) {
    let mean: f64 = probs.iter().zip(values).map(|(p, e)| p * e).sum();
    let var: f64 = probs
        .iter()
        .zip(values)
        .map(|(p, e)| p * (e - mean).powi(2))
        .sum();
    (mean, var)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "inverse temperature {beta} is not finite"
        )))
    }
}

/// Density matrix held together with its spectral decomposition.
///
/// Thermal states are constructed directly from eigenvectors and log-weights, so
/// `ln ρ` and `ρ^α` never have to be recovered from roundoff-level eigenvalues.
#[derive(Clone, Debug)]
pub struct Density {
    operator: HermitianOperator,
    eigenvectors: ComplexMatrix,
    log_weights: Vec<f64>,
}

impl Density {
    /// `Σ_k e^{ℓ_k} |v_k⟩⟨v_k|` for orthonormal columns `v_k`. A log-weight of `-∞`
    /// marks a kernel vector.
    pub fn from_spectral(eigenvectors: ComplexMatrix, log_weights: Vec<f64>) -> Result<Self> {
        ensure_dim(eigenvectors.dim(), log_weights.len())?;
        let defect = eigenvectors.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Precondition(format!(
                "eigenvector matrix is not unitary ({defect:.3e})"
            )));
        }
        let total: f64 = log_weights.iter().map(|l| l.exp()).sum();
        if (total - 1.0).abs() > 1e-10 || log_weights.iter().any(|l| l.is_nan() || *l > 1e-12) {
            return Err(Error::Precondition(format!(
                "weights sum to {total} (expected 1)"
            )));
        }
        let weights: Vec<f64> = log_weights.iter().map(|l| l.exp()).collect();
        let operator =
            HermitianOperator::from_hermitian_part(&eigenvectors.conjugate_diagonal(&weights));
        Ok(Self {
            operator,
            eigenvectors,
            log_weights,
        })
    }

    /// Validates a density matrix (trace 1, PSD up to the clamp tolerance) and
    /// diagonalizes it. Eigenvalues below `d · 1e-15` are treated as exact zeros.
    pub fn from_operator(operator: HermitianOperator) -> Result<Self> {
        let e = density_eig(&operator)?;
        let floor = KERNEL_EPS * operator.dim() as f64;
        let log_weights = e
            .eigenvalues
            .iter()
            .map(|&l| {
                if l <= floor {
                    f64::NEG_INFINITY
                } else {
                    l.ln()
                }
            })
            .collect();
        Ok(Self {
            operator,
            eigenvectors: e.eigenvectors,
            log_weights,
        })
    }

    /// `|v⟩⟨v|` for a normalized `v`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!("state vector has norm {norm}")));
        }
        let n = v.len();
        // Complete v to a basis: Gram-Schmidt on v followed by the unit vectors,
        // leaving out the one v overlaps most.
        let drop = (0..n)
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .unwrap_or(0);
        let mut cols = vec![v.to_vec()];
        for i in 0..n {
            if i != drop {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[i] = Complex64::new(1.0, 0.0);
                cols.push(e);
            }
        }
        let basis = crate::random::orthonormalize_columns(&ComplexMatrix::from_columns(&cols)?);
        let mut logw = vec![f64::NEG_INFINITY; n];
        logw[0] = 0.0;
        Self::from_spectral(basis, logw)
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    /// `ρ^α` with `0^α := 0`.
    pub fn power(&self, alpha: f64) -> HermitianOperator {
        let w: Vec<f64> = self.log_weights.iter().map(|l| (alpha * l).exp()).collect();
        HermitianOperator::from_hermitian_part(&self.eigenvectors.conjugate_diagonal(&w))
    }

    /// `ln ρ` restricted to the support.
    pub fn log_operator(&self) -> HermitianOperator {
        let w: Vec<f64> = self
            .log_weights
            .iter()
            .map(|&l| if l.is_finite() { l } else { 0.0 })
            .collect();
        HermitianOperator::from_hermitian_part(&self.eigenvectors.conjugate_diagonal(&w))
    }

    /// `Tr(ρ A)`.
    pub fn expectation(&self, a: &HermitianOperator) -> f64 {
        self.operator.trace_product(a)
    }
}

/// `-Tr ρ ln ρ` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &Density) -> f64 {
    -rho.log_weights
        .iter()
        .filter(|l| l.is_finite())
        .map(|&l| l.exp() * l)
        .sum::<f64>()
}

/// Quantum relative entropy `S(ρ‖σ) = Tr ρ ln ρ - Tr ρ ln σ`.
///
/// Fails with a domain error when `ρ` has weight outside the support of `σ`
/// (the divergence is infinite).
pub fn relative_entropy(rho: &Density, sigma: &Density) -> Result<f64> {
    ensure_dim(rho.dim(), sigma.dim())?;
    let n = rho.dim();
    let overlap = &rho.eigenvectors.adjoint() * &sigma.eigenvectors;
    let p = rho.weights();
    let mut cross = 0.0;
    for j in 0..n {
        // ⟨b_j|ρ|b_j⟩
        let w: f64 = (0..n).map(|i| p[i] * overlap[(i, j)].norm_sqr()).sum();
        let lq = sigma.log_weights[j];
        if lq.is_finite() {
            cross += w * lq;
        } else if w > SUPPORT_TOL {
            return Err(Error::Domain(format!(
                "relative entropy diverges: weight {w:.3e} outside the support of sigma"
            )));
        }
    }
    Ok((-von_neumann_entropy(rho) - cross).max(0.0))
}

/// Gibbs state `e^{-βH} / Tr e^{-βH}`.
pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<Density> {
    check_beta(beta)?;
    let e = eig_hermitian(h);
    let (logw, _) = log_weights(beta, &e.eigenvalues);
    Density::from_spectral(e.eigenvectors, logw)
}

/// Conditional thermal state of `H` in a pointer basis.
#[derive(Clone, Debug)]
pub struct ConditionalThermalState {
    pub beta: f64,
    pub basis: PointerBasis,
    pub diag_energies: Vec<f64>,
    pub probs: Vec<f64>,
    pub log_z: f64,
}

impl ConditionalThermalState {
    /// Builds the state from pointer energies directly (no Hamiltonian required).
    pub fn from_energies(basis: PointerBasis, energies: Vec<f64>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        ensure_dim(basis.dim(), energies.len())?;
        let (logp, log_z) = log_weights(beta, &energies);
        Ok(Self {
            beta,
            basis,
            diag_energies: energies,
            probs: logp.iter().map(|l| l.exp()).collect(),
            log_z,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag_energies.len()
    }

    pub fn basis(&self) -> &PointerBasis {
        &self.basis
    }

    pub fn log_probs(&self) -> Vec<f64> {
        self.diag_energies
            .iter()
            .map(|&e| -self.beta * e - self.log_z)
            .collect()
    }

    /// `Σ_k p_k ε_k = -∂_β ln Z_β`.
    pub fn mean_energy(&self) -> f64 {
        weighted_moments(&self.probs, &self.diag_energies).0
    }

    pub fn density(&self) -> Density {
        Density::from_spectral(self.basis().matrix().clone(), self.log_probs())
            .expect("pointer basis is unitary and weights are normalized")
    }

    pub fn operator(&self) -> HermitianOperator {
        self.density().operator().clone()
    }

    /// `S(ρ_β) = β Tr[ρ_β H] + ln Z_β`, from the classical weights.
    pub fn entropy(&self) -> f64 {
        self.beta * self.mean_energy() + self.log_z
    }
}

/// CTS `Σ_k e^{-β⟨ψ_k|H|ψ_k⟩}/Z_β |ψ_k⟩⟨ψ_k|`.
pub fn cts(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta: f64,
) -> Result<ConditionalThermalState> {
    let energies = diag_energies(h, basis)?;
    ConditionalThermalState::from_energies(basis.clone(), energies, beta)
}

/// `Σ_k p_k |ψ_k⟩⟨ψ_k| ⊗ |φ_k⟩⟨φ_k|` on a `d²`-dimensional space.
#[derive(Clone, Debug)]
pub struct SeparableCts {
    pub state: ConditionalThermalState,
    pub ancilla_basis: PointerBasis,
}

impl SeparableCts {
    pub fn dim(&self) -> usize {
        self.state.dim() * self.ancilla_basis.dim()
    }

    pub fn density(&self) -> Density {
        let d = self.state.dim();
        let vectors = self.state.basis().tensor(&self.ancilla_basis);
        let lp = self.state.log_probs();
        let mut logw = vec![f64::NEG_INFINITY; d * d];
        for k in 0..d {
            logw[k * d + k] = lp[k];
        }
        Density::from_spectral(vectors.matrix().clone(), logw)
            .expect("tensor product of unitaries is unitary")
    }

    /// `tr_2` of the joint density.
    pub fn reduced(&self) -> Result<HermitianOperator> {
        let joint = self.density();
        Ok(HermitianOperator::from_hermitian_part(
            &joint
                .operator()
                .matrix()
                .partial_trace_second(self.ancilla_basis.dim())?,
        ))
    }
}

pub fn separable_cts(
    h: &HermitianOperator,
    basis: &PointerBasis,
    ancilla_basis: &PointerBasis,
    beta: f64,
) -> Result<SeparableCts> {
    ensure_dim(basis.dim(), ancilla_basis.dim())?;
    Ok(SeparableCts {
        state: cts(h, basis, beta)?,
        ancilla_basis: ancilla_basis.clone(),
    })
}
