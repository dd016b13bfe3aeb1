//! Monte Carlo check of the Cramér-Rao bound for the optimal measurement.
//!
//! Measuring `M_opt = Σ ε_k |ψ_k⟩⟨ψ_k|` on a CTS yields outcome `k` with probability
//! `p_k(β)`. The sample mean energy is sufficient for this exponential family, so
//! matching it to `⟨ε⟩_β` is the maximum-likelihood estimate of `β`. Its
//! mean-squared error over many repeats should approach `1/(N·I)`.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; repeat `r` draws from stream `r`,
//! so results do not depend on how repeats are scheduled across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;
use crate::metrology::qfi_analytic;
use crate::random::InstanceRng;
use crate::states::{cts, energy_moments, ConditionalThermalState, PointerBasis};

/// Bisection stops once the bracket is narrower than this.
pub const BETA_TOL: f64 = 1e-10;
/// Half-width of the default search interval, in units of `1/spread(ε)`.
pub const DEFAULT_BOUND_SCALE: f64 = 50.0;
/// Smallest Fisher information accepted by [`crb_experiment`].
pub const MIN_QFI: f64 = 1e-12;

fn sampler(probs: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(probs).map_err(|e| Error::Precondition(format!("outcome weights: {e}")))
}

/// `n` i.i.d. outcome indices drawn from the CTS weights.
pub fn sample_outcomes(state: &ConditionalThermalState, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1".into()));
    }
    let dist = sampler(&state.probs)?;
    let mut rng = InstanceRng::new(seed, 0);
    Ok(dist.sample_iter(rng.inner()).take(n).collect())
}

/// `[-50, 50] / (max ε - min ε)`.
pub fn default_beta_bounds(energies: &[f64]) -> Result<(f64, f64)> {
    let spread = energy_spread(energies)?;
    Ok((-DEFAULT_BOUND_SCALE / spread, DEFAULT_BOUND_SCALE / spread))
}

fn energy_spread(energies: &[f64]) -> Result<f64> {
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    if !(spread > f64::EPSILON * (max.abs().max(min.abs()) + f64::MIN_POSITIVE)) {
        return Err(Error::ZeroInformation);
    }
    Ok(spread)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub beta: f64,
    /// The sample mean fell outside `(⟨ε⟩_hi, ⟨ε⟩_lo)` and the estimate sits on a bound.
    pub clamped: bool,
}

/// Moment-matching estimate: solves `⟨ε⟩_β = (1/N) Σ_i ε_{k_i}` on `bounds`.
pub fn estimate_beta(
    energies: &[f64],
    outcomes: &[usize],
    bounds: (f64, f64),
) -> Result<BetaEstimate> {
    if outcomes.is_empty() {
        return Err(Error::Precondition("no outcomes to estimate from".into()));
    }
    let mut total = 0.0;
    for &k in outcomes {
        total += *energies.get(k).ok_or_else(|| {
            Error::Precondition(format!(
                "outcome {k} out of range for {} levels",
                energies.len()
            ))
        })?;
    }
    estimate_from_mean(energies, total / outcomes.len() as f64, bounds)
}

/// As [`estimate_beta`], from the sample mean energy directly.
pub fn estimate_from_mean(energies: &[f64], mean: f64, bounds: (f64, f64)) -> Result<BetaEstimate> {
    energy_spread(energies)?;
    let (mut lo, mut hi) = bounds;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Precondition(format!(
            "invalid β bounds [{lo}, {hi}]"
        )));
    }
    let mean_at = |b: f64| energy_moments(b, energies).0;
    let (mut f_lo, mut f_hi) = (mean_at(lo) - mean, mean_at(hi) - mean);
    if f_lo <= 0.0 {
        return Ok(BetaEstimate {
            beta: lo,
            clamped: true,
        });
    }
    if f_hi >= 0.0 {
        return Ok(BetaEstimate {
            beta: hi,
            clamped: true,
        });
    }
    for _ in 0..200 {
        if hi - lo <= BETA_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = mean_at(mid) - mean;
        // ⟨ε⟩_β decreases strictly; a midpoint outside the bracket values means it did not.
        if !(f_mid <= f_lo && f_mid >= f_hi) {
            return Err(Error::Consistency {
                check: "mean energy decreasing in β",
                residual: (f_mid - f_lo).max(f_hi - f_mid),
                tolerance: 0.0,
            });
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(BetaEstimate {
        beta: 0.5 * (lo + hi),
        clamped: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimationRun {
    pub seed: u64,
    pub n_samples: usize,
    pub n_repeats: usize,
    pub true_beta: f64,
    pub qfi: f64,
    pub beta_hat_mean: f64,
    pub mse: f64,
    /// `1 / (N · I)`.
    pub crb: f64,
    /// `mse / crb`.
    pub ratio: f64,
    /// Repeats whose estimate hit a search bound.
    pub clamped: usize,
}

/// Repeats sample-and-estimate `n_repeats` times and compares the MSE with `1/(N·I)`.
pub fn crb_experiment(
    h: &HermitianOperator,
    basis: &PointerBasis,
    beta: f64,
    n_samples: usize,
    n_repeats: usize,
    seed: u64,
) -> Result<EstimationRun> {
    if n_samples == 0 || n_repeats == 0 {
        return Err(Error::Precondition(
            "samples and repeats must be at least 1".into(),
        ));
    }
    let state = cts(h, basis, beta)?;
    let qfi = qfi_analytic(&state).value;
    if !(qfi > MIN_QFI) {
        return Err(Error::ZeroInformation);
    }
    let energies = &state.diag_energies;
    let bounds = default_beta_bounds(energies)?;
    let dist = sampler(&state.probs)?;

    let estimates = (0..n_repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = InstanceRng::new(seed, r as u64);
            let mut counts = vec![0usize; energies.len()];
            for k in (&dist).sample_iter(rng.inner()).take(n_samples) {
                counts[k] += 1;
            }
            let mean = counts
                .iter()
                .zip(energies)
                .map(|(&c, e)| c as f64 * e)
                .sum::<f64>()
                / n_samples as f64;
            estimate_from_mean(energies, mean, bounds)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = n_repeats as f64;
    let beta_hat_mean = estimates.iter().map(|e| e.beta).sum::<f64>() / n;
    let mse = estimates
        .iter()
        .map(|e| (e.beta - beta).powi(2))
        .sum::<f64>()
        / n;
    let crb = 1.0 / (n_samples as f64 * qfi);
    Ok(EstimationRun {
        seed,
        n_samples,
        n_repeats,
        true_beta: beta,
        qfi,
        beta_hat_mean,
        mse,
        crb,
        ratio: mse / crb,
        clamped: estimates.iter().filter(|e| e.clamped).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gue, haar_unitary};

    fn qubit(theta: f64) -> (HermitianOperator, PointerBasis) {
        (
            HermitianOperator::pauli_z(),
            PointerBasis::qubit_rotated(theta),
        )
    }

    fn frequencies(outcomes: &[usize], d: usize) -> Vec<f64> {
        let mut f = vec![0.0; d];
        for &k in outcomes {
            f[k] += 1.0;
        }
        f.iter().map(|c| c / outcomes.len() as f64).collect()
    }

    #[test]
    fn uniform_sampling() {
        let (h, b) = qubit(0.0);
        let state = cts(&h, &b, 0.0).unwrap();
        let f = frequencies(&sample_outcomes(&state, 100_000, 1).unwrap(), 2);
        assert!((f[0] - 0.5).abs() < 0.01);
        assert!(sample_outcomes(&state, 0, 1).is_err());
    }

    #[test]
    fn qubit_sampling_frequencies() {
        let (h, b) = qubit(0.0);
        let state = cts(&h, &b, 1.0).unwrap();
        let f = frequencies(&sample_outcomes(&state, 100_000, 2).unwrap(), 2);
        let c = 2.0 * 1.0_f64.cosh();
        assert!((f[0] - (-1.0_f64).exp() / c).abs() < 0.01);
        assert!((f[1] - 1.0_f64.exp() / c).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let (h, b) = qubit(0.4);
        let state = cts(&h, &b, 0.5).unwrap();
        assert_eq!(
            sample_outcomes(&state, 1000, 9).unwrap(),
            sample_outcomes(&state, 1000, 9).unwrap()
        );
        assert_ne!(
            sample_outcomes(&state, 1000, 9).unwrap(),
            sample_outcomes(&state, 1000, 10).unwrap()
        );
    }

    #[test]
    fn exact_frequencies_recover_beta() {
        let energies = [-1.3, 0.2, 0.9, 2.0];
        let beta0 = 0.8;
        let (mean, _) = energy_moments(beta0, &energies);
        let bounds = default_beta_bounds(&energies).unwrap();
        let est = estimate_from_mean(&energies, mean, bounds).unwrap();
        assert!(!est.clamped);
        assert!((est.beta - beta0).abs() < 1e-8);

        // Synthetic outcome vector with frequencies 1:2:3:4 has a known moment.
        let outcomes: Vec<usize> = (0..4).flat_map(|k| std::iter::repeat_n(k, k + 1)).collect();
        let mean = (0..4).map(|k| (k + 1) as f64 * energies[k]).sum::<f64>() / 10.0;
        let est = estimate_beta(&energies, &outcomes, bounds).unwrap();
        assert!((energy_moments(est.beta, &energies).0 - mean).abs() < 1e-9);
    }

    #[test]
    fn uniform_mean_gives_zero() {
        let energies = [-1.0, 0.5, 3.0];
        let mean = energies.iter().sum::<f64>() / 3.0;
        let est =
            estimate_from_mean(&energies, mean, default_beta_bounds(&energies).unwrap()).unwrap();
        assert!(est.beta.abs() < 1e-9);
    }

    #[test]
    fn qubit_closed_form_inverse() {
        // ⟨ε⟩_β = -tanh β for energies ±1.
        for m in [-0.9, -0.2, 0.0, 0.35, 0.8] {
            let est = estimate_from_mean(&[1.0, -1.0], m, (-50.0, 50.0)).unwrap();
            assert!((est.beta - f64::atanh(-m)).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_means_clamp() {
        let energies = [1.0, -1.0];
        let est = estimate_beta(&energies, &[1, 1, 1], (-50.0, 50.0)).unwrap();
        assert_eq!(
            est,
            BetaEstimate {
                beta: 50.0,
                clamped: true
            }
        );
        let est = estimate_beta(&energies, &[0, 0], (-50.0, 50.0)).unwrap();
        assert_eq!(
            est,
            BetaEstimate {
                beta: -50.0,
                clamped: true
            }
        );
    }

    #[test]
    fn estimator_errors() {
        assert_eq!(
            estimate_beta(&[0.5, 0.5], &[0, 1], (-1.0, 1.0)),
            Err(Error::ZeroInformation)
        );
        assert!(estimate_beta(&[0.0, 1.0], &[], (-1.0, 1.0)).is_err());
        assert!(estimate_beta(&[0.0, 1.0], &[2], (-1.0, 1.0)).is_err());
        assert!(estimate_beta(&[0.0, 1.0], &[0], (1.0, -1.0)).is_err());
    }

    #[test]
    fn single_run_within_crb() {
        let (h, b) = qubit(0.0);
        let state = cts(&h, &b, 1.0).unwrap();
        let outcomes = sample_outcomes(&state, 100_000, 5).unwrap();
        let est = estimate_beta(&state.diag_energies, &outcomes, (-50.0, 50.0)).unwrap();
        let crb = 1.0 / (1e5 * qfi_analytic(&state).value);
        assert!((est.beta - 1.0).abs() < 3.0 * crb.sqrt());
    }

    #[test]
    fn experiment_is_deterministic_and_consistent() {
        let (h, b) = qubit(0.0);
        let a = crb_experiment(&h, &b, 1.0, 2_000, 64, 3).unwrap();
        let again = crb_experiment(&h, &b, 1.0, 2_000, 64, 3).unwrap();
        assert_eq!(a, again);
        assert!(a.mse >= 0.0 && a.crb > 0.0);
        assert!((a.ratio - a.mse / a.crb).abs() < 1e-15);
        assert!((0.5..2.0).contains(&a.ratio), "ratio {}", a.ratio);
    }

    #[test]
    fn mse_scales_inversely_with_samples() {
        let mut rng = InstanceRng::new(61, 0);
        let h = gue(&mut rng, 3);
        let b = PointerBasis::new(haar_unitary(&mut rng, 3)).unwrap();
        let small = crb_experiment(&h, &b, 0.7, 2_000, 400, 8).unwrap();
        let large = crb_experiment(&h, &b, 0.7, 4_000, 400, 9).unwrap();
        let halving = small.mse / large.mse;
        assert!((1.4..2.8).contains(&halving), "{halving}");
    }

    #[test]
    fn zero_information_instance() {
        let (h, b) = qubit(std::f64::consts::FRAC_PI_2);
        assert_eq!(
            crb_experiment(&h, &b, 1.0, 10, 2, 0),
            Err(Error::ZeroInformation)
        );
    }
}
