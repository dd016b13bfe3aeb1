//! Wigner-Yanase-Dyson skew information and the covariance bound on the CTS
//! Fisher information.
//!
//! For the separable extension `ρ̃_β` and `H₁₂ = H ⊗ 𝟙` the extended skew term
//! `Tr[ρ̃^α H₁₂ ρ̃^{1-α} H₁₂]` collapses to `Σ p_k ε_k²` for every `α`, which gives
//! `I(ρ_β; β) = Var_ρβ{H} - I_α(ρ̃_β, H₁₂) ≤ Var_ρβ{H} - I_α(ρ_β, H)`.

use serde::Serialize;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::HermitianOperator;
use crate::metrology::qfi_analytic;
use crate::states::{cts, weighted_moments, Density, PointerBasis, SeparableCts};

/// Largest `d` for which the `d²`-dimensional extended state is built explicitly.
pub const DEFAULT_MAX_EXPLICIT_DIM: usize = 6;
/// Agreement required between the explicit and reduced routes, and for the bound chain.
pub const REPORT_TOL: f64 = 1e-9;
/// Skew information below `-SKEW_FLOOR` is not roundoff.
pub const SKEW_FLOOR: f64 = 1e-10;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "skew exponent α = {alpha} outside (0, 1)"
        )))
    }
}

/// `I_α(ρ, H) = Tr ρH² - Tr ρ^α H ρ^{1-α} H`.
pub fn skew_information(rho: &Density, h: &HermitianOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure_dim(rho.dim(), h.dim())?;
    let hm = h.matrix();
    let h2 = HermitianOperator::from_hermitian_part(&(hm * hm));
    let a = rho.power(alpha).matrix() * hm;
    let b = rho.power(1.0 - alpha).matrix() * hm;
    Ok(rho.expectation(&h2) - a.trace_product(&b).re)
}

/// `Var_ρ{H} = Tr ρH² - (Tr ρH)²`.
pub fn variance(rho: &HermitianOperator, h: &HermitianOperator) -> Result<f64> {
    ensure_dim(rho.dim(), h.dim())?;
    let hm = h.matrix();
    let h2 = HermitianOperator::from_hermitian_part(&(hm * hm));
    Ok(rho.trace_product(&h2) - rho.trace_product(h).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedRoute {
    /// The `d²`-dimensional state was built and checked against the reduced formula.
    ExplicitAndReduced,
    /// `d` exceeded the explicit-route cap; only `Σ p_k ε_k²` was used.
    ReducedOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SkewReport {
    pub alpha: f64,
    /// `I_α(ρ_β, H)`.
    pub skew_local: f64,
    /// `I_α(ρ̃_β, H₁₂)`.
    pub skew_extended: f64,
    /// `Var_ρβ{H}`.
    pub variance: f64,
    /// `Var_ρβ{H} - I_α(ρ_β, H)`.
    pub cov_local: f64,
    pub qfi: f64,
    pub route: ExtendedRoute,
    /// `|explicit - reduced|` for the extended skew term, when both were computed.
    pub route_discrepancy: Option<f64>,
}

/// Evaluates the chain `I = Var - I_α(ρ̃, H₁₂) ≤ Var - I_α(ρ, H)` for the CTS of
/// `h` in `basis` and fails with a consistency error if any link is off by more
/// than [`REPORT_TOL`].
pub fn skew_bound_report(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta: f64,
    alpha: f64,
    max_explicit_dim: usize,
) -> Result<SkewReport> {
    let report = evaluate_skew_report(h, basis, beta, alpha, max_explicit_dim)?;
    report.check()?;
    Ok(report)
}

/// Computes every [`SkewReport`] field without enforcing the tolerances.
pub fn evaluate_skew_report(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta: f64,
    alpha: f64,
    max_explicit_dim: usize,
) -> Result<SkewReport> {
    check_alpha(alpha)?;
    let state = cts(h, basis, beta)?;
    let rho = state.density();
    let variance = variance(rho.operator(), h)?;
    let skew_local = skew_information(&rho, h, alpha)?;
    let qfi = qfi_analytic(&state).value;

    // Tr ρ̃ H₁₂² = Tr ρ H², and the α-dependent term reduces to Σ p_k ε_k².
    let hm = h.matrix();
    let h2 = HermitianOperator::from_hermitian_part(&(hm * hm));
    let second_moment = rho.expectation(&h2);
    let (mean, var_eps) = weighted_moments(&state.probs, &state.diag_energies);
    let reduced = second_moment - (var_eps + mean * mean);

    let d = state.dim();
    let (skew_extended, route, route_discrepancy) = if d <= max_explicit_dim {
        let joint = SeparableCts {
            state: state.clone(),
            ancilla_basis: PointerBasis::computational(d),
        };
        let h12 = h.kron(&HermitianOperator::identity(d));
        let explicit = skew_information(&joint.density(), &h12, alpha)?;
        (
            explicit,
            ExtendedRoute::ExplicitAndReduced,
            Some((explicit - reduced).abs()),
        )
    } else {
        (reduced, ExtendedRoute::ReducedOnly, None)
    };

    Ok(SkewReport {
        alpha,
        skew_local,
        skew_extended,
        variance,
        cov_local: variance - skew_local,
        qfi,
        route,
        route_discrepancy,
    })
}

impl SkewReport {
    /// `|I - (Var - I_α(ρ̃, H₁₂))|`.
    pub fn identity_residual(&self) -> f64 {
        (self.qfi - (self.variance - self.skew_extended)).abs()
    }

    /// `max(0, I - Cov)`: how far the covariance bound is violated.
    pub fn bound_violation(&self) -> f64 {
        (self.qfi - self.cov_local).max(0.0)
    }

    pub fn check(&self) -> Result<()> {
        let checks = [
            (
                "extended skew information: explicit vs reduced",
                self.route_discrepancy.unwrap_or(0.0),
                REPORT_TOL,
            ),
            (
                "local skew information",
                (-self.skew_local).max(0.0),
                SKEW_FLOOR,
            ),
            (
                "extended skew information",
                (-self.skew_extended).max(0.0),
                SKEW_FLOOR,
            ),
            (
                "Fisher information = variance - extended skew",
                self.identity_residual(),
                REPORT_TOL,
            ),
            (
                "Fisher information <= local covariance",
                self.bound_violation(),
                REPORT_TOL,
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
