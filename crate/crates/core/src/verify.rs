//! Randomized property suite over every identity and inequality the crate relies on.
//!
//! Trial `t` draws its instance from stream `t` of the seeded generator, so a
//! failure is reproduced by rerunning with the same seed and at least `t + 1`
//! trials, regardless of thread scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymmetry::{evaluate_skew_report, skew_information, DEFAULT_MAX_EXPLICIT_DIM};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, HermitianOperator};
use crate::metrology::{
    optimal_measurement, qfi_fidelity_closed, qfi_fidelity_matrix, FiniteDifference,
    ThermometryModel,
};
use crate::random::{gue, haar_unitary, InstanceRng};
use crate::states::{gibbs, separable_cts, PointerBasis};
use crate::thermo::{evaluate, ProcessSpec};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_DIMS: [usize; 5] = [2, 3, 4, 5, 6];
pub const BETAS: [f64; 3] = [0.2, 1.0, 5.0];
pub const ALPHAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
/// Constrained perturbations drawn per instance and temperature.
pub const PERTURBATIONS: usize = 10;
/// Largest dimension accepted by the suite.
pub const MAX_DIM: usize = 32;

/// Every checked property, with its tolerance on the reported residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    EigenReconstruction,
    PartitionBound,
    EigenbasisCtsIsGibbs,
    SeparablePartialTrace,
    MaxEntropy,
    QfiClosedFormFd,
    QfiMatrixFd,
    CrbIdentity,
    DeltaQfiCurvature,
    EigenbasisNoAdvantage,
    SkewNonnegative,
    GibbsNoSkew,
    SkewRoutes,
    SkewAlphaIndependence,
    SkewMonotone,
    SkewQfiIdentity,
    CovarianceBound,
    Dissipation,
    DissipationBound,
    Triangle,
    QuantumHeat,
    ExactWork,
    ErgotropicEnergy,
    AdiabaticNoHeat,
    AdiabaticStatesCoincide,
}

impl Property {
    pub const ALL: [Property; 25] = [
        Property::EigenReconstruction,
        Property::PartitionBound,
        Property::EigenbasisCtsIsGibbs,
        Property::SeparablePartialTrace,
        Property::MaxEntropy,
        Property::QfiClosedFormFd,
        Property::QfiMatrixFd,
        Property::CrbIdentity,
        Property::DeltaQfiCurvature,
        Property::EigenbasisNoAdvantage,
        Property::SkewNonnegative,
        Property::GibbsNoSkew,
        Property::SkewRoutes,
        Property::SkewAlphaIndependence,
        Property::SkewMonotone,
        Property::SkewQfiIdentity,
        Property::CovarianceBound,
        Property::Dissipation,
        Property::DissipationBound,
        Property::Triangle,
        Property::QuantumHeat,
        Property::ExactWork,
        Property::ErgotropicEnergy,
        Property::AdiabaticNoHeat,
        Property::AdiabaticStatesCoincide,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::EigenReconstruction => "eigen_reconstruction",
            Property::PartitionBound => "partition_bound",
            Property::EigenbasisCtsIsGibbs => "eigenbasis_cts_is_gibbs",
            Property::SeparablePartialTrace => "separable_partial_trace",
            Property::MaxEntropy => "max_entropy",
            Property::QfiClosedFormFd => "qfi_closed_form_fd",
            Property::QfiMatrixFd => "qfi_matrix_fd",
            Property::CrbIdentity => "crb_identity",
            Property::DeltaQfiCurvature => "delta_qfi_curvature",
            Property::EigenbasisNoAdvantage => "eigenbasis_no_advantage",
            Property::SkewNonnegative => "skew_nonnegative",
            Property::GibbsNoSkew => "gibbs_no_skew",
            Property::SkewRoutes => "skew_routes",
            Property::SkewAlphaIndependence => "skew_alpha_independence",
            Property::SkewMonotone => "skew_monotone",
            Property::SkewQfiIdentity => "skew_qfi_identity",
            Property::CovarianceBound => "covariance_bound",
            Property::Dissipation => "dissipation",
            Property::DissipationBound => "dissipation_bound",
            Property::Triangle => "triangle",
            Property::QuantumHeat => "quantum_heat",
            Property::ExactWork => "exact_work",
            Property::ErgotropicEnergy => "ergotropic_energy",
            Property::AdiabaticNoHeat => "adiabatic_no_heat",
            Property::AdiabaticStatesCoincide => "adiabatic_states_coincide",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Property::EigenReconstruction => "‖V Λ V† - H‖_F / (1 + ‖H‖_F)",
            Property::PartitionBound => "max(0, ln Z_β - ln Z_β^eq)",
            Property::EigenbasisCtsIsGibbs => "CTS in the eigenbasis vs Gibbs, max entry",
            Property::SeparablePartialTrace => "tr₂ of the separable CTS vs CTS, max entry",
            Property::MaxEntropy => "entropy gain under constrained perturbation",
            Property::QfiClosedFormFd => "analytic vs closed-form fidelity FD (ε = 1e-3)",
            Property::QfiMatrixFd => "analytic vs matrix fidelity FD (ε = 1e-3)",
            Property::CrbIdentity => "Var{M_opt} vs Fisher information",
            Property::DeltaQfiCurvature => "∂²_β ln(Z/Z^eq) by FD vs ΔI",
            Property::EigenbasisNoAdvantage => "|ΔI| with the eigenbasis as pointer basis",
            Property::SkewNonnegative => "max(0, -I_α) over local and extended skew",
            Property::GibbsNoSkew => "|I_α(Gibbs, H)|",
            Property::SkewRoutes => "extended skew: explicit d² matrices vs reduced formula",
            Property::SkewAlphaIndependence => "spread of the extended skew over α",
            Property::SkewMonotone => "max(0, I_α(ρ, H) - I_α(ρ̃, H₁₂))",
            Property::SkewQfiIdentity => "|I - (Var - I_α(ρ̃, H₁₂))|",
            Property::CovarianceBound => "max(0, I - Cov)",
            Property::Dissipation => "|β W_dis - S(ρ(τ)‖ρ^eq(τ))|",
            Property::DissipationBound => "max(0, S(ρ_β(τ)‖ρ^eq) - S(ρ(τ)‖ρ^eq))",
            Property::Triangle => "thermodynamic triangle residual",
            Property::QuantumHeat => "|J - β(W - W₀ - ΔE)|",
            Property::ExactWork => "|S(ρ(τ)‖ρ_β(τ)) - βW - ln(Z_β(τ)/Z^eq(0))|",
            Property::ErgotropicEnergy => "|Tr Γρ_βΓ†H₀ - Σ E_k p_k(τ)|",
            Property::AdiabaticNoHeat => "max(J, |W_dis|, |bound gap|) for adiabatic protocols",
            Property::AdiabaticStatesCoincide => "‖ρ(τ) - ρ_β(τ)‖₁ for adiabatic protocols",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Property::EigenReconstruction => 1e-10,
            Property::PartitionBound => 1e-12,
            Property::EigenbasisCtsIsGibbs => 1e-10,
            Property::SeparablePartialTrace => 1e-10,
            Property::MaxEntropy => 1e-12,
            Property::QfiClosedFormFd => 1e-5,
            Property::QfiMatrixFd => 1e-4,
            Property::CrbIdentity => 1e-10,
            Property::DeltaQfiCurvature => 1e-5,
            Property::EigenbasisNoAdvantage => 1e-10,
            Property::SkewNonnegative => 1e-10,
            Property::GibbsNoSkew => 1e-9,
            Property::SkewRoutes => 1e-9,
            Property::SkewAlphaIndependence => 1e-9,
            Property::SkewMonotone => 1e-9,
            Property::SkewQfiIdentity => 1e-9,
            Property::CovarianceBound => 1e-9,
            Property::Dissipation => 1e-9,
            Property::DissipationBound => 1e-9,
            Property::Triangle => 1e-9,
            Property::QuantumHeat => 1e-9,
            Property::ExactWork => 1e-9,
            Property::ErgotropicEnergy => 1e-10,
            Property::AdiabaticNoHeat => 1e-9,
            Property::AdiabaticStatesCoincide => 1e-7,
        }
    }

    fn index(self) -> usize {
        Property::ALL
            .iter()
            .position(|&p| p == self)
            .expect("listed")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    /// Cap on `d` for the explicit `d²`-dimensional skew route.
    pub max_explicit_dim: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            dims: DEFAULT_DIMS.to_vec(),
            max_explicit_dim: DEFAULT_MAX_EXPLICIT_DIM,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Precondition("at least one trial is required".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Precondition("dimension list is empty".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > MAX_DIM) {
            return Err(Error::Precondition(format!(
                "dimension {d} outside 1..={MAX_DIM}"
            )));
        }
        Ok(())
    }

    /// Dimension used by trial `t`.
    pub fn dim_of(&self, trial: usize) -> usize {
        self.dims[trial % self.dims.len()]
    }
}

/// One failing check, with what is needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub beta: Option<f64>,
    pub residual: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub property: Property,
    pub name: &'static str,
    pub tolerance: f64,
    pub checked: usize,
    pub passed: usize,
    pub max_residual: f64,
    pub first_failure: Option<Failure>,
}

impl PropertyOutcome {
    pub fn all_passed(&self) -> bool {
        self.passed == self.checked
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub properties: Vec<PropertyOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::all_passed)
    }

    pub fn outcome(&self, property: Property) -> &PropertyOutcome {
        &self.properties[property.index()]
    }
}

#[derive(Clone, Debug)]
struct Observation {
    property: Property,
    beta: Option<f64>,
    residual: f64,
    detail: String,
}

#[derive(Default)]
struct Recorder {
    observations: Vec<Observation>,
}

impl Recorder {
    fn record(&mut self, property: Property, beta: Option<f64>, residual: Result<f64>) {
        let (residual, detail) = match residual {
            Ok(r) => (r, String::new()),
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        self.observations.push(Observation {
            property,
            beta,
            residual,
            detail,
        });
    }
}

/// Random perturbation of `probs` that keeps `Σ p_k` and `Σ p_k ε_k` fixed and
/// every entry positive.
pub fn constrained_perturbation(
    rng: &mut InstanceRng,
    probs: &[f64],
    energies: &[f64],
) -> Vec<f64> {
    let n = probs.len();
    let mut delta: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let raw = delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    // Orthonormal basis of span{1, ε}.
    let u1 = vec![1.0 / (n as f64).sqrt(); n];
    let mean = energies.iter().sum::<f64>() / n as f64;
    let mut u2: Vec<f64> = energies.iter().map(|e| e - mean).collect();
    let norm = u2.iter().map(|x| x * x).sum::<f64>().sqrt();
    let constraints: Vec<&[f64]> = if norm > 0.0 {
        u2.iter_mut().for_each(|x| *x /= norm);
        vec![&u1, &u2]
    } else {
        vec![&u1]
    };
    for u in constraints {
        let c: f64 = delta.iter().zip(u).map(|(d, x)| d * x).sum();
        delta.iter_mut().zip(u).for_each(|(d, x)| *d -= c * x);
    }
    let largest = delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    // Nothing left once the constraints remove every direction (d ≤ 2).
    if largest <= 1e-12 * raw {
        return probs.to_vec();
    }
    let floor = probs.iter().copied().fold(f64::INFINITY, f64::min);
    let t = (0.05 + 0.95 * rng.uniform()) * floor / largest;
    probs.iter().zip(&delta).map(|(p, d)| p + t * d).collect()
}

/// `-Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

fn max_entry_diff(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    a.matrix().max_abs_diff(b.matrix())
}

/// Checks that involve one Hamiltonian and pointer basis.
fn instance_checks(
    rec: &mut Recorder,
    rng: &mut InstanceRng,
    h: &HermitianOperator,
    basis: &PointerBasis,
    betas: &[f64],
    max_explicit_dim: usize,
) -> Result<()> {
    let d = h.dim();
    let e = eig_hermitian(h);
    let scale = 1.0 + h.matrix().frobenius_norm();
    rec.record(
        Property::EigenReconstruction,
        None,
        Ok((&e.reconstruct() - h.matrix()).frobenius_norm() / scale),
    );
    let model = ThermometryModel::new(h.clone(), basis.clone())?;
    let eigen_model = ThermometryModel::new(h.clone(), PointerBasis::eigenbasis(h))?;
    let ancilla = PointerBasis::new(haar_unitary(rng, d))?;

    for &beta in betas {
        let b = Some(beta);
        rec.record(
            Property::PartitionBound,
            b,
            Ok(model.log_partition_ratio(beta).max(0.0)),
        );
        rec.record(
            Property::EigenbasisCtsIsGibbs,
            b,
            (|| {
                Ok(max_entry_diff(
                    &eigen_model.cts(beta)?.operator(),
                    gibbs(h, beta)?.operator(),
                ))
            })(),
        );
        let state = model.cts(beta)?;
        let rho = state.operator();
        rec.record(
            Property::SeparablePartialTrace,
            b,
            (|| {
                Ok(max_entry_diff(
                    &separable_cts(h, basis, &ancilla, beta)?.reduced()?,
                    &rho,
                ))
            })(),
        );

        let entropy = shannon_entropy(&state.probs);
        let mut gain = 0.0_f64;
        for _ in 0..PERTURBATIONS {
            let p = constrained_perturbation(rng, &state.probs, &state.diag_energies);
            gain = gain.max(shannon_entropy(&p) - entropy);
        }
        rec.record(Property::MaxEntropy, b, Ok(gain.max(0.0)));

        let qfi = model.qfi_cts(beta);
        rec.record(
            Property::QfiClosedFormFd,
            b,
            qfi_fidelity_closed(&state, FiniteDifference::default()).map(|r| (r.value - qfi).abs()),
        );
        rec.record(
            Property::QfiMatrixFd,
            b,
            qfi_fidelity_matrix(h, basis, beta, FiniteDifference::default())
                .map(|r| (r.value - qfi).abs()),
        );
        let m = optimal_measurement(&state);
        let m2 = HermitianOperator::from_hermitian_part(&(m.matrix() * m.matrix()));
        let var_m = rho.trace_product(&m2) - rho.trace_product(&m).powi(2);
        rec.record(Property::CrbIdentity, b, Ok((var_m - qfi).abs()));
        rec.record(
            Property::DeltaQfiCurvature,
            b,
            Ok((model.delta_qfi_curvature(beta, 1e-3) - model.delta_qfi(beta)).abs()),
        );
        rec.record(
            Property::EigenbasisNoAdvantage,
            b,
            Ok(eigen_model.delta_qfi(beta).abs()),
        );

        let gibbs_state = gibbs(h, beta)?;
        let mut reports = Vec::with_capacity(ALPHAS.len());
        for alpha in ALPHAS {
            rec.record(
                Property::GibbsNoSkew,
                b,
                skew_information(&gibbs_state, h, alpha).map(f64::abs),
            );
            match evaluate_skew_report(h, basis, beta, alpha, max_explicit_dim) {
                Ok(r) => reports.push(r),
                Err(err) => rec.record(Property::SkewQfiIdentity, b, Err(err)),
            }
        }
        for r in &reports {
            rec.record(
                Property::SkewNonnegative,
                b,
                Ok((-r.skew_local).max(-r.skew_extended).max(0.0)),
            );
            if let Some(gap) = r.route_discrepancy {
                rec.record(Property::SkewRoutes, b, Ok(gap));
            }
            rec.record(
                Property::SkewMonotone,
                b,
                Ok((r.skew_local - r.skew_extended).max(0.0)),
            );
            rec.record(Property::SkewQfiIdentity, b, Ok(r.identity_residual()));
            rec.record(Property::CovarianceBound, b, Ok(r.bound_violation()));
        }
        if let Some(first) = reports.first() {
            let spread = reports
                .iter()
                .map(|r| (r.skew_extended - first.skew_extended).abs())
                .fold(0.0, f64::max);
            rec.record(Property::SkewAlphaIndependence, b, Ok(spread));
        }
    }
    Ok(())
}

/// Checks on one random protocol and one adiabatic protocol of dimension `d`.
fn process_checks(rec: &mut Recorder, rng: &mut InstanceRng, d: usize) -> Result<()> {
    let h0 = gue(rng, d);
    let htau = gue(rng, d);
    let u = haar_unitary(rng, d);
    let v = haar_unitary(rng, d);
    for beta in BETAS {
        let b = Some(beta);
        let spec = ProcessSpec::new(h0.clone(), htau.clone(), u.clone(), beta)?;
        match evaluate(&spec) {
            Ok(r) => {
                let res = r.residuals;
                rec.record(Property::Dissipation, b, Ok(res.residual_dissipation));
                rec.record(Property::DissipationBound, b, Ok((-res.bound_gap).max(0.0)));
                rec.record(Property::Triangle, b, Ok(res.residual_triangle));
                rec.record(Property::QuantumHeat, b, Ok(res.residual_heat));
                rec.record(Property::ExactWork, b, Ok(res.residual_exact_work));
                rec.record(Property::ErgotropicEnergy, b, Ok(res.residual_ergotropic));
            }
            Err(err) => rec.record(Property::Dissipation, b, Err(err)),
        }
        let adiabatic = ProcessSpec::adiabatic(h0.clone(), v.clone(), beta)?;
        match evaluate(&adiabatic) {
            Ok(r) => {
                let worst = r
                    .j_divergence
                    .abs()
                    .max(r.work_dissipative.abs())
                    .max(r.residuals.bound_gap.abs());
                rec.record(Property::AdiabaticNoHeat, b, Ok(worst));
                rec.record(
                    Property::AdiabaticStatesCoincide,
                    b,
                    Ok(r.exact_cts_trace_distance),
                );
            }
            Err(err) => rec.record(Property::AdiabaticNoHeat, b, Err(err)),
        }
    }
    Ok(())
}

fn run_trial(config: &VerifyConfig, trial: usize) -> Vec<Observation> {
    let mut rec = Recorder::default();
    let mut rng = InstanceRng::new(config.seed, trial as u64);
    let d = config.dim_of(trial);
    let h = gue(&mut rng, d);
    let outcome = PointerBasis::new(haar_unitary(&mut rng, d)).and_then(|basis| {
        instance_checks(
            &mut rec,
            &mut rng,
            &h,
            &basis,
            &BETAS,
            config.max_explicit_dim,
        )?;
        process_checks(&mut rec, &mut rng, d)
    });
    if let Err(err) = outcome {
        rec.record(Property::EigenReconstruction, None, Err(err));
    }
    rec.observations
}

fn summarize(
    config: &VerifyConfig,
    per_trial: Vec<(usize, usize, Vec<Observation>)>,
) -> VerifySummary {
    let mut properties: Vec<PropertyOutcome> = Property::ALL
        .iter()
        .map(|&p| PropertyOutcome {
            property: p,
            name: p.name(),
            tolerance: p.tolerance(),
            checked: 0,
            passed: 0,
            max_residual: 0.0,
            first_failure: None,
        })
        .collect();
    for (trial, dim, observations) in per_trial {
        for o in observations {
            let out = &mut properties[o.property.index()];
            out.checked += 1;
            out.max_residual = out.max_residual.max(o.residual);
            if o.residual <= o.property.tolerance() {
                out.passed += 1;
            } else if out.first_failure.is_none() {
                out.first_failure = Some(Failure {
                    trial,
                    seed: config.seed,
                    dim,
                    beta: o.beta,
                    residual: o.residual,
                    detail: o.detail,
                });
            }
        }
    }
    VerifySummary {
        config: config.clone(),
        properties,
    }
}

/// Runs every property on `config.trials` random instances.
pub fn run(config: &VerifyConfig) -> Result<VerifySummary> {
    config.validate()?;
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| (t, config.dim_of(t), run_trial(config, t)))
        .collect();
    Ok(summarize(config, per_trial))
}

/// Runs the single-instance properties on a given model. Temperatures are
/// `betas`, or the default set when empty.
pub fn run_model(
    config: &VerifyConfig,
    h: &HermitianOperator,
    basis: &PointerBasis,
    betas: &[f64],
) -> Result<VerifySummary> {
    let betas = if betas.is_empty() { &BETAS[..] } else { betas };
    let mut rec = Recorder::default();
    let mut rng = InstanceRng::new(config.seed, 0);
    if let Err(err) = instance_checks(&mut rec, &mut rng, h, basis, betas, config.max_explicit_dim)
    {
        rec.record(Property::EigenReconstruction, None, Err(err));
    }
    let mut summary = summarize(config, vec![(0, h.dim(), rec.observations)]);
    // Process properties need random protocols and are not part of a model check.
    summary.properties.retain(|p| p.checked > 0);
    Ok(summary)
}
