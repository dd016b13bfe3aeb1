//! Seeded random instances for property suites.
//!
//! Every instance is drawn from a ChaCha8 stream selected by `(seed, stream)`, so a
//! trial index maps to the same instance regardless of how trials are scheduled
//! across threads.
//!
//! * Hamiltonians: Gaussian unitary ensemble, `H = (G + G†) / (2√d)` for a complex
//!   Ginibre `G` with `E|G_ij|² = 1`. The `1/√d` keeps the spectrum inside roughly
//!   `[-√2, √2]` for every dimension.
//! * Unitaries: Haar measure via QR of a Ginibre matrix with the diagonal of `R`
//!   made real positive (Gram-Schmidt produces exactly that normalization).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, HermitianOperator};

/// PRNG for one instance: ChaCha8 seeded with `seed`, on stream `stream`.
pub struct InstanceRng(ChaCha8Rng);

impl InstanceRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Complex normal with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.normal() * s, self.normal() * s)
    }
}

/// Complex Ginibre matrix.
pub fn ginibre(rng: &mut InstanceRng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal())
}

/// GUE Hamiltonian, scaled by `1/(2√d)`.
pub fn gue(rng: &mut InstanceRng, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim);
    let h = (&g + &g.adjoint()).scale_real(0.5 / (dim as f64).sqrt());
    HermitianOperator::from_hermitian_part(&h)
}

/// Haar-random unitary.
pub fn haar_unitary(rng: &mut InstanceRng, dim: usize) -> ComplexMatrix {
    orthonormalize_columns(&ginibre(rng, dim))
}

/// Random full-rank density matrix `W W† / Tr(W W†)`.
pub fn random_density(rng: &mut InstanceRng, dim: usize) -> HermitianOperator {
    let w = ginibre(rng, dim);
    let p = &w * &w.adjoint();
    let tr = p.trace().re;
    HermitianOperator::from_hermitian_part(&p.scale_real(1.0 / tr))
}

/// Q factor of a thin QR (modified Gram-Schmidt, two passes), R diagonal real positive.
pub fn orthonormalize_columns(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(q, v)| q.conj() * v)
                    .sum();
                let qi = cols[i].clone();
                for (v, q) in cols[j].iter_mut().zip(&qi) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    ComplexMatrix::from_columns(&cols).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let mut rng = InstanceRng::new(1, 0);
        for d in 1..=10 {
            assert!(haar_unitary(&mut rng, d).unitarity_defect() < 1e-13);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gue(&mut InstanceRng::new(42, 3), 4);
        let b = gue(&mut InstanceRng::new(42, 3), 4);
        let c = gue(&mut InstanceRng::new(42, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gue_is_hermitian() {
        let mut rng = InstanceRng::new(2, 0);
        let h = gue(&mut rng, 6);
        assert!(h.matrix().hermiticity_defect() == 0.0);
    }

    #[test]
    fn random_density_is_density() {
        let mut rng = InstanceRng::new(3, 0);
        let rho = random_density(&mut rng, 5);
        assert!(crate::linalg::density_eig(&rho).is_ok());
    }
}
