use num_complex::Complex64;

use super::eig::{eig_hermitian, EigenDecomposition};
use super::matrix::{ComplexMatrix, HermitianOperator};
use crate::error::{ensure_dim, Error, Result};

/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are roundoff and are treated as zero;
/// anything more negative makes the operator non-physical.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Scalar map applied through the spectral decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFunction {
    Exp,
    /// Natural logarithm restricted to the support: clamped (zero) eigenvalues
    /// contribute nothing.
    Log,
    Sqrt,
    /// `λ ↦ λ^α` for `α > 0`, with `0^α := 0`.
    Power(f64),
}

impl MatrixFunction {
    fn eval(self, lambda: f64) -> Result<f64> {
        if self == MatrixFunction::Exp {
            return Ok(lambda.exp());
        }
        if lambda < -PSD_CLAMP_TOL {
            return Err(Error::Domain(format!(
                "{self:?} of an operator with eigenvalue {lambda:.3e}"
            )));
        }
        let lambda = lambda.max(0.0);
        Ok(match self {
            MatrixFunction::Exp => unreachable!(),
            MatrixFunction::Log if lambda == 0.0 => 0.0,
            MatrixFunction::Log => lambda.ln(),
            MatrixFunction::Sqrt => lambda.sqrt(),
            MatrixFunction::Power(_) if lambda == 0.0 => 0.0,
            MatrixFunction::Power(alpha) => lambda.powf(alpha),
        })
    }
}

/// `V f(Λ) V†`.
pub fn matrix_function(a: &HermitianOperator, f: MatrixFunction) -> Result<HermitianOperator> {
    apply_spectral(&eig_hermitian(a), f)
}

pub(crate) fn apply_spectral(
    e: &EigenDecomposition,
    f: MatrixFunction,
) -> Result<HermitianOperator> {
    if let MatrixFunction::Power(alpha) = f {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Precondition(format!(
                "power exponent {alpha} must be positive"
            )));
        }
    }
    let mapped = e
        .eigenvalues
        .iter()
        .map(|&l| f.eval(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(HermitianOperator::from_hermitian_part(
        &e.eigenvectors.conjugate_diagonal(&mapped),
    ))
}

/// Singular values by one-sided (Hestenes) Jacobi, in no particular order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    // Work on columns.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let gpp: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let gqq: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gpq: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gpq.norm();
                if g == 0.0 || g <= f64::EPSILON * (gpp * gqq).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gpq / g;
                let theta = (gqq - gpp) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let s_phase = phase * s;
                let s_phase_conj = phase.conj() * s;
                let (left, right) = cols.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (vp, vq) = (*xp, *xq);
                    *xp = vp * c - vq * s_phase_conj;
                    *xq = vp * s_phase + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// `‖A‖₁ = Tr √(A†A)`, the sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// Eigendecomposition of a density matrix, after checking trace and positivity.
pub fn density_eig(rho: &HermitianOperator) -> Result<EigenDecomposition> {
    let trace = rho.matrix().trace();
    if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
        return Err(Error::Precondition(format!(
            "density matrix has trace {:.12} (expected 1)",
            trace.re
        )));
    }
    let e = eig_hermitian(rho);
    if let Some(&min) = e.eigenvalues.first() {
        if min < -PSD_CLAMP_TOL {
            return Err(Error::Precondition(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
    }
    Ok(e)
}

/// Uhlmann fidelity `F(ρ, σ) = ‖√ρ √σ‖₁² = (Tr √(√ρ σ √ρ))²`, in `[0, 1]`.
pub fn fidelity(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    ensure_dim(rho.dim(), sigma.dim())?;
    let sqrt_rho = apply_spectral(&density_eig(rho)?, MatrixFunction::Sqrt)?;
    let sqrt_sigma = apply_spectral(&density_eig(sigma)?, MatrixFunction::Sqrt)?;
    let root = trace_norm(&(sqrt_rho.matrix() * sqrt_sigma.matrix()));
    Ok((root * root).clamp(0.0, 1.0))
}
