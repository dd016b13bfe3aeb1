//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Dimensions in this crate stay below a few dozen, so the O(d³) per sweep cost of
//! Jacobi is irrelevant next to its robustness: it converges for any Hermitian
//! input, handles degenerate spectra without special cases, and produces eigenvectors
//! that are unitary to working precision.
//!
//! Eigenvectors inside a degenerate eigenspace are not unique. Every downstream
//! quantity is a spectral function `V f(Λ) V†` and is invariant under that choice.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianOperator};

const MAX_SWEEPS: usize = 100;

/// `A = V diag(λ) V†` with `λ` ascending and `V` unitary (eigenvectors as columns).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.eigenvectors.conjugate_diagonal(&mapped)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Eigendecomposition of a Hermitian operator. Deterministic for a fixed input.
pub fn eig_hermitian(op: &HermitianOperator) -> EigenDecomposition {
    let n = op.dim();
    let mut a = op.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    // Force an exactly real diagonal; the imaginary parts are within the Hermiticity tolerance.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }

    let scale = a.frobenius_norm();
    if scale > 0.0 {
        let target = 1e-14 * scale;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= target {
                break;
            }
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    rotated |= rotate(&mut a, &mut v, p, q);
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: ties keep encounter order.
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with `A ← J† A J`, `V ← V J`, where
/// `J = [[c, s e^{iφ}], [-s e^{-iφ}, c]]` on the (p, q) plane and `a_pq = g e^{iφ}`.
/// Returns `false` when the element was already negligible.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) -> bool {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return false;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Below the resolution of both diagonal entries: drop it.
    if app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs() {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return false;
    }
    let phase = apq / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.dim();

    let s_phase = phase * s; // s e^{iφ}
    let s_phase_conj = phase.conj() * s; // s e^{-iφ}

    // Columns: A ← A J.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s_phase_conj;
        a[(k, q)] = akp * s_phase + akq * c;
    }
    // Rows: A ← J† A.
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s_phase;
        a[(q, k)] = apk * s_phase_conj + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s_phase_conj;
        v[(k, q)] = vkp * s_phase + vkq * c;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gue, InstanceRng};

    fn check_contract(op: &HermitianOperator) -> EigenDecomposition {
        let e = eig_hermitian(op);
        let a = op.matrix();
        let residual = (&e.reconstruct() - a).frobenius_norm();
        assert!(
            residual <= 1e-10 * (1.0 + a.frobenius_norm()),
            "residual {residual:e}"
        );
        assert!(e.eigenvectors.unitarity_defect() <= 1e-10);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        e
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = check_contract(&HermitianOperator::identity(2));
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_z_sorted() {
        let e = check_contract(&HermitianOperator::pauli_z());
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_x_roots_of_characteristic_polynomial() {
        // λ² - 1 = 0
        let e = check_contract(&HermitianOperator::pauli_x());
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_complex_offdiagonal() {
        let e = check_contract(&HermitianOperator::pauli_y());
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let e = check_contract(&HermitianOperator::from_real_diagonal(&[0.0; 3]));
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn random_gue_contract() {
        let mut rng = InstanceRng::new(7, 0);
        for d in 1..=12 {
            let h = gue(&mut rng, d);
            let e = check_contract(&h);
            let trace: f64 = e.eigenvalues.iter().sum();
            assert!((trace - h.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut rng = InstanceRng::new(3, 1);
        let u = crate::random::haar_unitary(&mut rng, 5);
        let h = HermitianOperator::from_real_diagonal(&[1.0, 1.0, -2.0, 1.0, 0.5]).conjugate_by(&u);
        let e = check_contract(&h);
        let expected = [-2.0, 0.5, 1.0, 1.0, 1.0];
        for (a, b) in e.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = InstanceRng::new(11, 0);
        let h = gue(&mut rng, 6);
        let a = eig_hermitian(&h);
        let b = eig_hermitian(&h);
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }
}
