//! File formats: model and process JSON, and the fixed-precision CSV encoding.
//!
//! Matrices are arrays of rows of `[re, im]` pairs. The pointer basis is the one
//! exception: its outer index runs over basis vectors (columns).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::EstimationRun;
use crate::linalg::{Complex64, ComplexMatrix, HermitianOperator};
use crate::states::PointerBasis;
use crate::sweep::{QfiRow, QubitSweepRow};
use crate::thermo::{ProcessSpec, ThermoReport};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid contents: {0}")]
    Invalid(#[from] crate::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub hamiltonian: JsonMatrix,
    /// Outer index is the basis vector.
    pub pointer_basis: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// A validated model: Hermitian `H`, unitary pointer basis, optional default `β`.
#[derive(Clone, Debug)]
pub struct Model {
    pub hamiltonian: HermitianOperator,
    pub basis: PointerBasis,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFile {
    pub dim: usize,
    pub beta: f64,
    pub h0: JsonMatrix,
    pub htau: JsonMatrix,
    pub utau: JsonMatrix,
}

fn decode(name: &str, dim: usize, m: &JsonMatrix) -> Result<Vec<Vec<Complex64>>, LoadError> {
    if m.len() != dim {
        return Err(LoadError::Schema(format!(
            "`{name}` has {} rows, expected {dim}",
            m.len()
        )));
    }
    m.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != dim {
                return Err(LoadError::Schema(format!(
                    "`{name}` row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            row.iter()
                .map(|&[re, im]| {
                    if re.is_finite() && im.is_finite() {
                        Ok(Complex64::new(re, im))
                    } else {
                        Err(LoadError::Schema(format!(
                            "`{name}` row {i} has a non-finite entry"
                        )))
                    }
                })
                .collect()
        })
        .collect()
}

fn encode_rows(rows: Vec<Vec<Complex64>>) -> JsonMatrix {
    rows.into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn check_dim(dim: usize) -> Result<(), LoadError> {
    if dim == 0 {
        Err(LoadError::Schema("`dim` must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<(), LoadError> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(LoadError::Schema(format!("`beta` = {beta} is not finite")))
    }
}

fn hermitian(name: &str, dim: usize, m: &JsonMatrix) -> Result<HermitianOperator, LoadError> {
    let matrix = ComplexMatrix::from_rows(&decode(name, dim, m)?)?;
    HermitianOperator::new(matrix).map_err(|e| LoadError::Schema(format!("`{name}`: {e}")))
}

impl ModelFile {
    pub fn validate(&self) -> Result<Model, LoadError> {
        check_dim(self.dim)?;
        if let Some(b) = self.beta {
            check_beta(b)?;
        }
        let hamiltonian = hermitian("hamiltonian", self.dim, &self.hamiltonian)?;
        let columns = decode("pointer_basis", self.dim, &self.pointer_basis)?;
        let basis = PointerBasis::new(ComplexMatrix::from_columns(&columns)?)
            .map_err(|e| LoadError::Schema(format!("`pointer_basis`: {e}")))?;
        Ok(Model {
            hamiltonian,
            basis,
            beta: self.beta,
        })
    }

    pub fn from_model(h: &HermitianOperator, basis: &PointerBasis, beta: Option<f64>) -> Self {
        let columns = (0..basis.dim()).map(|k| basis.vector(k)).collect();
        Self {
            dim: h.dim(),
            hamiltonian: encode_rows(h.matrix().rows()),
            pointer_basis: encode_rows(columns),
            beta,
        }
    }
}

impl ProcessFile {
    pub fn validate(&self) -> Result<ProcessSpec, LoadError> {
        check_dim(self.dim)?;
        check_beta(self.beta)?;
        if !(self.beta > 0.0) {
            return Err(LoadError::Schema(format!(
                "`beta` must be positive, got {}",
                self.beta
            )));
        }
        let h0 = hermitian("h0", self.dim, &self.h0)?;
        let htau = hermitian("htau", self.dim, &self.htau)?;
        let utau = ComplexMatrix::from_rows(&decode("utau", self.dim, &self.utau)?)?;
        ProcessSpec::new(h0, htau, utau, self.beta).map_err(|e| LoadError::Schema(e.to_string()))
    }

    pub fn from_spec(spec: &ProcessSpec) -> Self {
        Self {
            dim: spec.dim(),
            beta: spec.beta(),
            h0: encode_rows(spec.h0().matrix().rows()),
            htau: encode_rows(spec.htau().matrix().rows()),
            utau: encode_rows(spec.utau().rows()),
        }
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn parse_model(text: &str) -> Result<Model, LoadError> {
    serde_json::from_str::<ModelFile>(text)?.validate()
}

pub fn load_model(path: &Path) -> Result<Model, LoadError> {
    parse_model(&read(path)?)
}

pub fn parse_process(text: &str) -> Result<ProcessSpec, LoadError> {
    serde_json::from_str::<ProcessFile>(text)?.validate()
}

pub fn load_process(path: &Path) -> Result<ProcessSpec, LoadError> {
    parse_process(&read(path)?)
}

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub struct Sci(pub f64);

impl fmt::Display for Sci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

/// A record with a fixed column layout.
pub trait CsvRow {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

fn sci(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| Sci(v).to_string()).collect()
}

impl CsvRow for QubitSweepRow {
    const COLUMNS: &'static [&'static str] = &[
        "beta",
        "delta_qfi_closed",
        "delta_qfi_matrix",
        "qfi_cts",
        "qfi_gibbs",
    ];

    fn cells(&self) -> Vec<String> {
        sci(&[
            self.beta,
            self.delta_qfi_closed,
            self.delta_qfi_matrix,
            self.qfi_cts,
            self.qfi_gibbs,
        ])
    }
}

impl CsvRow for QfiRow {
    const COLUMNS: &'static [&'static str] = &[
        "beta",
        "qfi_cts",
        "qfi_gibbs",
        "delta_qfi",
        "relative_entropy",
        "outperforms",
    ];

    fn cells(&self) -> Vec<String> {
        let mut cells = sci(&[
            self.beta,
            self.qfi_cts,
            self.qfi_gibbs,
            self.delta_qfi,
            self.relative_entropy,
        ]);
        cells.push(u8::from(self.outperforms).to_string());
        cells
    }
}

impl CsvRow for EstimationRun {
    const COLUMNS: &'static [&'static str] =
        &["seed", "n_samples", "beta", "qfi", "mse", "crb", "ratio"];

    fn cells(&self) -> Vec<String> {
        let mut cells = vec![self.seed.to_string(), self.n_samples.to_string()];
        cells.extend(sci(&[
            self.true_beta,
            self.qfi,
            self.mse,
            self.crb,
            self.ratio,
        ]));
        cells
    }
}

impl CsvRow for ThermoReport {
    const COLUMNS: &'static [&'static str] = &[
        "beta",
        "work",
        "delta_f_eq",
        "work_dissipative",
        "s_exact_vs_gibbs",
        "s_cts_vs_gibbs",
        "s_exact_vs_cts",
        "s_cts_vs_exact",
        "j_divergence",
        "ergotropy_w0",
        "delta_e_cts",
        "quantum_heat",
        "exact_cts_trace_distance",
        "residual_dissipation",
        "bound_gap",
        "residual_triangle",
        "residual_heat",
        "residual_exact_work",
        "residual_ergotropic",
    ];

    fn cells(&self) -> Vec<String> {
        self.fields()
            .into_iter()
            .map(|(_, v)| Sci(v).to_string())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gue, haar_unitary, InstanceRng};

    fn qubit_json(h01: [f64; 2], h10: [f64; 2]) -> String {
        let h = serde_json::json!([[[1.0, 0.0], h01], [h10, [-1.0, 0.0]]]);
        let b = serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]);
        serde_json::json!({"dim": 2, "hamiltonian": h, "pointer_basis": b, "beta": 0.5}).to_string()
    }

    #[test]
    fn parse_valid_model() {
        let m = parse_model(&qubit_json([0.2, 0.3], [0.2, -0.3])).unwrap();
        assert_eq!(m.beta, Some(0.5));
        assert_eq!(m.hamiltonian.matrix()[(0, 1)], Complex64::new(0.2, 0.3));
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = parse_model(&qubit_json([0.2, 0.3], [0.2, 0.3])).unwrap_err();
        assert!(matches!(err, LoadError::Schema(_)), "{err}");
    }

    #[test]
    fn rejects_shape_and_unknown_fields() {
        let bad = r#"{"dim": 2, "hamiltonian": [[[1,0]]], "pointer_basis": [[[1,0]]]}"#;
        assert!(matches!(parse_model(bad), Err(LoadError::Schema(_))));
        let extra = r#"{"dim": 1, "hamiltonian": [[[1,0]]], "pointer_basis": [[[1,0]]], "x": 1}"#;
        assert!(matches!(parse_model(extra), Err(LoadError::Json(_))));
        let zero = r#"{"dim": 0, "hamiltonian": [], "pointer_basis": []}"#;
        assert!(matches!(parse_model(zero), Err(LoadError::Schema(_))));
    }

    #[test]
    fn rejects_non_unitary_basis() {
        let text = r#"{"dim": 2, "hamiltonian": [[[1,0],[0,0]],[[0,0],[-1,0]]],
            "pointer_basis": [[[1,0],[0,0]],[[1,0],[0,0]]]}"#;
        assert!(matches!(parse_model(text), Err(LoadError::Schema(_))));
    }

    #[test]
    fn basis_is_column_major() {
        let theta = 0.8_f64;
        let b = PointerBasis::qubit_rotated(theta);
        let file = ModelFile::from_model(&HermitianOperator::pauli_z(), &b, None);
        // First entry of the second vector: i sin(θ/2).
        assert_eq!(file.pointer_basis[1][0], [0.0, (theta / 2.0).sin()]);
        let text = serde_json::to_string(&file).unwrap();
        assert!(!text.contains("beta"));
        let m = parse_model(&text).unwrap();
        assert_eq!(m.basis.matrix(), b.matrix());
    }

    #[test]
    fn model_round_trip() {
        let mut rng = InstanceRng::new(71, 0);
        let h = gue(&mut rng, 4);
        let b = PointerBasis::new(haar_unitary(&mut rng, 4)).unwrap();
        let text = serde_json::to_string(&ModelFile::from_model(&h, &b, Some(1.25))).unwrap();
        let m = parse_model(&text).unwrap();
        assert_eq!(m.hamiltonian.matrix(), h.matrix());
        assert_eq!(m.basis.matrix(), b.matrix());
        assert_eq!(m.beta, Some(1.25));
    }

    #[test]
    fn process_round_trip_and_validation() {
        let mut rng = InstanceRng::new(72, 0);
        let spec = ProcessSpec::new(
            gue(&mut rng, 3),
            gue(&mut rng, 3),
            haar_unitary(&mut rng, 3),
            0.9,
        )
        .unwrap();
        let file = ProcessFile::from_spec(&spec);
        let back = parse_process(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(back.utau(), spec.utau());

        let mut cold = file.clone();
        cold.beta = 0.0;
        assert!(matches!(cold.validate(), Err(LoadError::Schema(_))));
        let mut bad = file;
        bad.utau[0][0] = [3.0, 0.0];
        assert!(matches!(bad.validate(), Err(LoadError::Schema(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_model(Path::new("/nonexistent/model.json")),
            Err(LoadError::Io { .. })
        ));
    }

    #[test]
    fn sci_round_trips() {
        for x in [
            0.0,
            -0.5,
            1.0 / 3.0,
            std::f64::consts::PI * 1e-300,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let s = Sci(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(Sci(-0.5).to_string(), "-5.0000000000000000e-1");
    }

    #[test]
    fn thermo_columns_match_fields() {
        let h = HermitianOperator::pauli_z();
        let spec = ProcessSpec::new(h.clone(), h, ComplexMatrix::identity(2), 1.0).unwrap();
        let report = crate::thermo::analyze(&spec).unwrap();
        let names: Vec<&str> = report.fields().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ThermoReport::COLUMNS);
        let json = serde_json::to_value(report).unwrap();
        for name in ThermoReport::COLUMNS {
            assert!(json.get(name).is_some(), "{name}");
        }
    }
}
