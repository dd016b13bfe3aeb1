use std::fmt::Write as _;
use std::io::Write;

use ctherm::estimation::crb_experiment;
use ctherm::io::{load_model, load_process, Sci};
use ctherm::linalg::eig_hermitian;
use ctherm::metrology::ThermometryModel;
use ctherm::sweep::{qfi_sweep, qubit_sweep, BetaGrid};
use ctherm::thermo::evaluate;
use ctherm::verify::{self, VerifyConfig, VerifySummary};
use ctherm::HermitianOperator;

use crate::args::{
    EstimateArgs, Format, GridArgs, ProcessArgs, QfiArgs, QubitSweepArgs, VerifyArgs,
};
use crate::failure::Failure;
use crate::output::{sink, write_csv, write_json};

fn spectral_radius(h: &HermitianOperator) -> f64 {
    eig_hermitian(h)
        .eigenvalues
        .iter()
        .fold(0.0, |m, &e| m.max(e.abs()))
}

fn check_beta(beta: f64, scale: f64, beta_max: f64) -> Result<(), Failure> {
    if !beta.is_finite() {
        return Err(Failure::Usage(format!("beta must be finite, got {beta}")));
    }
    if beta.abs() * scale > beta_max {
        return Err(Failure::Usage(format!(
            "|beta| = {beta} exceeds {beta_max} / ||H|| = {}",
            beta_max / scale
        )));
    }
    Ok(())
}

/// Builds the grid and rejects points past `beta_max / ‖H‖`.
fn grid(args: &GridArgs, scale: f64) -> Result<BetaGrid, Failure> {
    if !(args.beta_max > 0.0) {
        return Err(Failure::Usage("--beta-max must be positive".into()));
    }
    let grid = BetaGrid::new(args.beta_start, args.beta_stop, args.beta_step)
        .map_err(|e| Failure::Usage(format!("bad grid: {e}")))?;
    check_beta(args.beta_start, scale, args.beta_max)?;
    check_beta(grid.point(grid.len() - 1), scale, args.beta_max)?;
    Ok(grid)
}

pub fn qubit_sweep_cmd(args: &QubitSweepArgs) -> Result<(), Failure> {
    if !args.omega.is_finite() || !args.theta.is_finite() {
        return Err(Failure::Usage("--omega and --theta must be finite".into()));
    }
    let grid = grid(&args.grid, args.omega.abs())?;
    let rows = qubit_sweep(args.omega, args.theta, &grid);
    let out = sink(args.output.out.as_deref())?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(out, &rows),
        Format::Json => write_json(out, &rows),
    }
}

pub fn qfi_cmd(args: &QfiArgs) -> Result<(), Failure> {
    let model = load_model(&args.model)?;
    let grid = grid(&args.grid, spectral_radius(&model.hamiltonian))?;
    let model = ThermometryModel::new(model.hamiltonian, model.basis)?;
    let rows = qfi_sweep(&model, &grid)?;
    let out = sink(args.output.out.as_deref())?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(out, &rows),
        Format::Json => write_json(out, &rows),
    }
}

/// Writes the report first, then fails with exit 3 if an identity is violated.
pub fn process_cmd(args: &ProcessArgs) -> Result<(), Failure> {
    let spec = load_process(&args.spec)?;
    let report = evaluate(&spec)?;
    let out = sink(args.output.out.as_deref())?;
    match args.output.format.unwrap_or(Format::Json) {
        Format::Csv => write_csv(out, std::slice::from_ref(&report))?,
        Format::Json => write_json(out, &report)?,
    }
    report.check()?;
    Ok(())
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<(), Failure> {
    let config = VerifyConfig {
        seed: args.seed,
        trials: args.trials,
        dims: args.dims.clone(),
        max_explicit_dim: args.max_dim,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let summary = match &args.model {
        Some(path) => {
            let model = load_model(path)?;
            let betas: Vec<f64> = model.beta.into_iter().collect();
            verify::run_model(&config, &model.hamiltonian, &model.basis, &betas)?
        }
        None => verify::run(&config)?,
    };

    let mut out = sink(args.output.out.as_deref())?;
    match args.output.format {
        None => {
            out.write_all(summary_table(&summary).as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Input(format!("write failed: {e}")))?;
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(out);
            let fail = |e: csv::Error| Failure::Input(format!("write failed: {e}"));
            w.write_record(["property", "checked", "passed", "max_residual", "tolerance"])
                .map_err(fail)?;
            for p in &summary.properties {
                w.write_record([
                    p.name.to_string(),
                    p.checked.to_string(),
                    p.passed.to_string(),
                    Sci(p.max_residual).to_string(),
                    Sci(p.tolerance).to_string(),
                ])
                .map_err(fail)?;
            }
            w.flush()
                .map_err(|e| Failure::Input(format!("write failed: {e}")))?;
        }
        Some(Format::Json) => write_json(out, &summary)?,
    }

    if summary.all_passed() {
        return Ok(());
    }
    let mut msg = String::from("property checks failed");
    for p in summary.properties.iter().filter(|p| !p.all_passed()) {
        let _ = write!(msg, "\n  {}: {}/{} passed", p.name, p.passed, p.checked);
        if let Some(f) = &p.first_failure {
            let _ = write!(
                msg,
                "; first failure trial {} seed {} dim {}",
                f.trial, f.seed, f.dim
            );
            if let Some(b) = f.beta {
                let _ = write!(msg, " beta {b}");
            }
            let _ = write!(msg, " residual {:.3e}", f.residual);
            if !f.detail.is_empty() {
                let _ = write!(msg, " ({})", f.detail);
            }
        }
    }
    let _ = write!(msg, "\nreproduce with: {}", reproduce_command(args));
    Err(Failure::Consistency(msg))
}

fn reproduce_command(args: &VerifyArgs) -> String {
    let dims: Vec<String> = args.dims.iter().map(usize::to_string).collect();
    let mut cmd = format!(
        "CTS_MAX_DIM={} ctherm verify --seed {} --trials {} --dims {}",
        args.max_dim,
        args.seed,
        args.trials,
        dims.join(",")
    );
    if let Some(path) = &args.model {
        let _ = write!(cmd, " --model {}", path.display());
    }
    cmd
}

fn summary_table(summary: &VerifySummary) -> String {
    let width = summary
        .properties
        .iter()
        .map(|p| p.name.len())
        .max()
        .unwrap_or(8)
        .max(8);
    let mut s = format!(
        "seed {} trials {} dims {:?}\n{:<width$}  {:>9}  {:>12}  {:>9}  status\n",
        summary.config.seed,
        summary.config.trials,
        summary.config.dims,
        "property",
        "passed",
        "max_resid",
        "tol",
    );
    for p in &summary.properties {
        let _ = writeln!(
            s,
            "{:<width$}  {:>9}  {:>12.3e}  {:>9.1e}  {}",
            p.name,
            format!("{}/{}", p.passed, p.checked),
            p.max_residual,
            p.tolerance,
            if p.all_passed() { "ok" } else { "FAIL" }
        );
    }
    s
}

pub fn estimate_cmd(args: &EstimateArgs) -> Result<(), Failure> {
    let model = load_model(&args.model)?;
    let beta = args.beta.or(model.beta).ok_or_else(|| {
        Failure::Usage("no temperature: pass --beta or set `beta` in the model".into())
    })?;
    check_beta(beta, spectral_radius(&model.hamiltonian), 50.0)?;
    if args.samples == 0 || args.repeats == 0 {
        return Err(Failure::Usage(
            "--samples and --repeats must be at least 1".into(),
        ));
    }
    let run = crb_experiment(
        &model.hamiltonian,
        &model.basis,
        beta,
        args.samples,
        args.repeats,
        args.seed,
    )?;
    eprintln!(
        "beta {beta}: mse {:.4e}, bound 1/(N I) {:.4e}, ratio {:.4}, mean estimate {:.6}, clamped {}/{}",
        run.mse, run.crb, run.ratio, run.beta_hat_mean, run.clamped, run.n_repeats
    );
    let out = sink(args.output.out.as_deref())?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(out, &[run]),
        Format::Json => write_json(out, &run),
    }
}
