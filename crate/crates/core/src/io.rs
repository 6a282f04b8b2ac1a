//! JSON file formats.
//!
//! Hamiltonian:
//!
//! ```json
//! {"n": 2, "terms": [
//!   {"qubits": [0, 1], "weight": 0.5, "pauli": "ZZ"},
//!   {"qubits": [1], "weight": 1.0, "block": [[[0,0],[1,0]], [[1,0],[0,0]]]}
//! ]}
//! ```
//!
//! `block` is a row-major list of rows of `[re, im]` pairs, indexed with
//! `qubits[0]` as the least-significant bit. `pauli` is shorthand whose
//! `j`-th character acts on `qubits[j]`; it is expanded on load, so a
//! Hamiltonian is always written back in block form. `weight` defaults to 1.

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::ham::{LocalHamiltonian, LocalTerm};
use crate::linalg::{Matrix, C64};

pub type BlockRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub qubits: Vec<usize>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub n: usize,
    pub terms: Vec<TermFile>,
}

pub fn matrix_to_rows(m: &Matrix) -> BlockRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &BlockRows) -> Result<Matrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(HamError::Schema(format!(
            "matrix row has {} entries, expected {n}",
            bad.len()
        )));
    }
    Ok(Matrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

impl TryFrom<HamiltonianFile> for LocalHamiltonian {
    type Error = HamError;

    fn try_from(file: HamiltonianFile) -> Result<Self> {
        let mut h = LocalHamiltonian::new(file.n);
        for t in file.terms {
            let term = match (t.block, t.pauli) {
                (Some(rows), None) => LocalTerm::new(t.qubits, rows_to_matrix(&rows)?, t.weight)?,
                (None, Some(label)) => LocalTerm::pauli(t.qubits, &label, t.weight)?,
                _ => return Err(HamError::Schema("each term needs exactly one of `block` or `pauli`".into())),
            };
            h.push(term)?;
        }
        Ok(h)
    }
}

impl From<LocalHamiltonian> for HamiltonianFile {
    fn from(h: LocalHamiltonian) -> Self {
        HamiltonianFile::from(&h)
    }
}

impl From<&LocalHamiltonian> for HamiltonianFile {
    fn from(h: &LocalHamiltonian) -> Self {
        HamiltonianFile {
            n: h.n(),
            terms: h
                .terms()
                .iter()
                .map(|t| TermFile {
                    qubits: t.qubits().to_vec(),
                    weight: t.weight(),
                    block: Some(matrix_to_rows(t.block())),
                    pauli: None,
                })
                .collect(),
        }
    }
}

pub fn hamiltonian_from_json(text: &str) -> Result<LocalHamiltonian> {
    let file: HamiltonianFile = serde_json::from_str(text)?;
    LocalHamiltonian::try_from(file)
}

pub fn hamiltonian_to_json(h: &LocalHamiltonian) -> String {
    serde_json::to_string(&HamiltonianFile::from(h)).expect("hamiltonian serializes")
}

pub fn read_hamiltonian(path: &std::path::Path) -> Result<LocalHamiltonian> {
    hamiltonian_from_json(&std::fs::read_to_string(path)?)
}

/// Dense matrix as written for operators that are not qubit Hamiltonians
/// (for example the abstract clock Hamiltonian on `2^w * (T + 1)` states).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseMatrixFile {
    pub dim: usize,
    pub matrix: BlockRows,
}

impl From<&Matrix> for DenseMatrixFile {
    fn from(m: &Matrix) -> Self {
        Self {
            dim: m.nrows(),
            matrix: matrix_to_rows(m),
        }
    }
}

/// State vector as a list of `[re, im]` amplitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn to_vector(&self) -> crate::linalg::Vector {
        crate::linalg::Vector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes.iter().map(|a| C64::new(a[0], a[1])),
        )
    }

    pub fn from_vector(v: &crate::linalg::Vector) -> Self {
        Self {
            amplitudes: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}
