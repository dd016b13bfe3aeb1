//! Temperature sweeps of the Fisher-information comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrology::{qubit_delta_qfi, ThermometryModel};

/// Largest number of points a grid may hold.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Inclusive grid `start, start + step, …, stop`, generated by index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl BetaGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::Precondition(
                "grid bounds and step must be finite".into(),
            ));
        }
        if !(step > 0.0) {
            return Err(Error::Precondition(format!(
                "grid step {step} must be positive"
            )));
        }
        if start > stop {
            return Err(Error::Precondition(format!(
                "grid start {start} exceeds stop {stop}"
            )));
        }
        let grid = Self { start, stop, step };
        if (stop - start) / step >= MAX_GRID_POINTS as f64 {
            return Err(Error::Precondition(format!(
                "grid has more than {MAX_GRID_POINTS} points"
            )));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        // The slack admits a stop value that is a multiple of step up to roundoff.
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitSweepRow {
    pub beta: f64,
    /// Closed-form `ΔI_β(θ)`.
    pub delta_qfi_closed: f64,
    /// `ΔI_β` from the matrix pipeline (pointer energies and spectrum of the 2×2 model).
    pub delta_qfi_matrix: f64,
    pub qfi_cts: f64,
    pub qfi_gibbs: f64,
}

/// `ΔI_β` for `H = ω σ_z` with pointer states rotated by `θ`, along `grid`.
pub fn qubit_sweep(omega: f64, theta: f64, grid: &BetaGrid) -> Vec<QubitSweepRow> {
    let model = ThermometryModel::qubit(omega, theta);
    grid.points()
        .into_par_iter()
        .map(|beta| QubitSweepRow {
            beta,
            delta_qfi_closed: qubit_delta_qfi(omega, theta, beta),
            delta_qfi_matrix: model.delta_qfi(beta),
            qfi_cts: model.qfi_cts(beta),
            qfi_gibbs: model.qfi_gibbs(beta),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiRow {
    pub beta: f64,
    pub qfi_cts: f64,
    pub qfi_gibbs: f64,
    pub delta_qfi: f64,
    /// `S(ρ_β ‖ ρ_β^eq)`.
    pub relative_entropy: f64,
    /// Outcome of the curvature criterion at this `β`.
    pub outperforms: bool,
}

/// Relative step of the curvature criterion used by [`qfi_sweep`].
pub const CRITERION_STEP: f64 = 1e-3;

pub fn qfi_sweep(model: &ThermometryModel, grid: &BetaGrid) -> Result<Vec<QfiRow>> {
    grid.points()
        .into_par_iter()
        .map(|beta| {
            let criterion = model.outperformance(beta, CRITERION_STEP * (1.0 + beta.abs()))?;
            Ok(QfiRow {
                beta,
                qfi_cts: model.qfi_cts(beta),
                qfi_gibbs: model.qfi_gibbs(beta),
                delta_qfi: model.delta_qfi(beta),
                relative_entropy: model.relative_entropy_to_gibbs(beta),
                outperforms: criterion.outperforms,
            })
        })
        .collect()
}
