//! k-local Hamiltonians: weighted sums of small Hermitian blocks acting on
//! named qubits, and their embedding into the full 2^n-dimensional space.
//!
//! Within a block, `qubits[j]` is bit `j` of the block index, matching the
//! global convention that qubit 0 is the least-significant bit.

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::linalg::{self, CsrMatrix, Matrix, Operator, C64, ZERO};

/// Input Hermiticity tolerance for term blocks.
pub const BLOCK_HERMITIAN_TOL: f64 = 1e-12;
/// Hermiticity tolerance for assembled operators.
pub const ASSEMBLED_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    qubits: Vec<usize>,
    block: Matrix,
    weight: f64,
}

impl LocalTerm {
    pub fn new(qubits: Vec<usize>, block: Matrix, weight: f64) -> Result<Self> {
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(HamError::DuplicateQubit(*q));
            }
        }
        if qubits.len() >= 16 {
            return Err(HamError::InvalidParameter(format!(
                "term acts on {} qubits",
                qubits.len()
            )));
        }
        let expected = 1usize << qubits.len();
        if block.nrows() != expected || block.ncols() != expected {
            return Err(HamError::BlockShape {
                rows: block.nrows(),
                cols: block.ncols(),
                expected,
            });
        }
        let deviation = linalg::hermitian_deviation(&block);
        if deviation > BLOCK_HERMITIAN_TOL {
            return Err(HamError::NonHermitian { deviation });
        }
        if !weight.is_finite() || block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HamError::InvalidParameter("non-finite term entry".into()));
        }
        Ok(Self {
            qubits,
            block,
            weight,
        })
    }

    /// `weight * I` on the whole space.
    pub fn identity(weight: f64) -> Self {
        Self {
            qubits: Vec::new(),
            block: Matrix::identity(1, 1),
            weight,
        }
    }

    /// Term built from a Pauli string; character `j` acts on `qubits[j]`.
    pub fn pauli(qubits: Vec<usize>, label: &str, weight: f64) -> Result<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() != qubits.len() {
            return Err(HamError::Schema(format!(
                "pauli string {label:?} has {} factors for {} qubits",
                chars.len(),
                qubits.len()
            )));
        }
        let mut block = Matrix::identity(1, 1);
        for ch in chars {
            let p = linalg::pauli(ch.to_ascii_uppercase())
                .ok_or_else(|| HamError::Schema(format!("unknown pauli factor {ch:?}")))?;
            block = linalg::kron(&p, &block);
        }
        Self::new(qubits, block, weight)
    }

    /// `|bit><bit|` on a single qubit.
    pub fn projector(qubit: usize, bit: u8, weight: f64) -> Self {
        Self {
            qubits: vec![qubit],
            block: linalg::bit_projector(bit),
            weight,
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn block(&self) -> &Matrix {
        &self.block
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn locality(&self) -> usize {
        self.qubits.len()
    }

    /// `|bit><bit|_qubit (x) self`, one qubit more local.
    pub fn with_control(&self, qubit: usize, bit: u8) -> Result<Self> {
        if self.qubits.contains(&qubit) {
            return Err(HamError::DuplicateQubit(qubit));
        }
        let mut qubits = Vec::with_capacity(self.qubits.len() + 1);
        qubits.push(qubit);
        qubits.extend_from_slice(&self.qubits);
        // control qubit is bit 0 of the new block
        let block = linalg::kron(&self.block, &linalg::bit_projector(bit));
        Ok(Self {
            qubits,
            block,
            weight: self.weight,
        })
    }

    fn validate_for(&self, n: usize) -> Result<()> {
        match self.qubits.iter().find(|&&q| q >= n) {
            Some(&index) => Err(HamError::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    fn relabeled(&self, map: &[usize]) -> Self {
        Self {
            qubits: self.qubits.iter().map(|&q| map[q]).collect(),
            block: self.block.clone(),
            weight: self.weight,
        }
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            weight: self.weight * c,
            ..self.clone()
        }
    }

    /// (min, max) eigenvalue of `weight * block`.
    pub fn spectral_range(&self) -> (f64, f64) {
        let vals = linalg::eigvalsh(&self.block);
        let lo = vals.first().copied().unwrap_or(0.0) * self.weight;
        let hi = vals.last().copied().unwrap_or(0.0) * self.weight;
        (lo.min(hi), lo.max(hi))
    }
}

/// Where existing qubits land when ancillas are added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    /// Ancillas take indices `0..count`; old qubit `i` becomes `i + count`.
    Prepend,
    /// Ancillas take the top indices; old qubits keep their index.
    Append,
    /// Old qubit `i` becomes `map[i]`.
    Map(Vec<usize>),
}

/// Representation choice for [`LocalHamiltonian::assemble_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representation {
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::HamiltonianFile", into = "crate::io::HamiltonianFile")]
pub struct LocalHamiltonian {
    n: usize,
    terms: Vec<LocalTerm>,
}

/// Observables share the Hamiltonian representation.
pub type Observable = LocalHamiltonian;

impl LocalHamiltonian {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        let mut h = Self::new(n);
        for t in terms {
            h.push(t)?;
        }
        Ok(h)
    }

    /// Single term acting on all `n` qubits.
    pub fn from_dense(n: usize, matrix: Matrix, weight: f64) -> Result<Self> {
        Self::from_terms(n, vec![LocalTerm::new((0..n).collect(), matrix, weight)?])
    }

    pub fn push(&mut self, term: LocalTerm) -> Result<()> {
        term.validate_for(self.n)?;
        self.terms.push(term);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn locality(&self) -> usize {
        self.terms.iter().map(LocalTerm::locality).max().unwrap_or(0)
    }

    pub fn dim(&self) -> Result<usize> {
        linalg::checked_dim(self.n)
    }

    /// Sum of |weight| * ||block||_2; bounds the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight.abs() * linalg::hermitian_norm(&t.block))
            .sum()
    }

    /// Interval guaranteed to contain the spectrum, from per-term eigenvalue ranges.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(lo, hi), t| {
            let (a, b) = t.spectral_range();
            (lo + a, hi + b)
        })
    }

    pub fn add(&self, other: &LocalHamiltonian) -> Result<LocalHamiltonian> {
        if self.n != other.n {
            return Err(HamError::QubitCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { n: self.n, terms })
    }

    pub fn scale(&self, c: f64) -> LocalHamiltonian {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    /// `self + c * I`.
    pub fn shifted(&self, c: f64) -> LocalHamiltonian {
        let mut h = self.clone();
        h.terms.push(LocalTerm::identity(c));
        h
    }

    /// Re-indexes onto `n + ancilla_count` qubits; ancillas carry no terms.
    pub fn tensor_with_ancilla(&self, ancilla_count: usize, placement: &Placement) -> Result<LocalHamiltonian> {
        let new_n = self.n + ancilla_count;
        let map: Vec<usize> = match placement {
            Placement::Prepend => (0..self.n).map(|q| q + ancilla_count).collect(),
            Placement::Append => (0..self.n).collect(),
            Placement::Map(map) => {
                if map.len() != self.n {
                    return Err(HamError::QubitCountMismatch {
                        left: map.len(),
                        right: self.n,
                    });
                }
                for (i, &q) in map.iter().enumerate() {
                    if q >= new_n {
                        return Err(HamError::IndexOutOfRange { index: q, n: new_n });
                    }
                    if map[..i].contains(&q) {
                        return Err(HamError::PlacementCollision(q));
                    }
                }
                map.clone()
            }
        };
        Ok(self.relabel(new_n, &map))
    }

    fn relabel(&self, new_n: usize, map: &[usize]) -> LocalHamiltonian {
        Self {
            n: new_n,
            terms: self.terms.iter().map(|t| t.relabeled(map)).collect(),
        }
    }

    /// `|bit><bit|_qubit (x) self` for a qubit not touched by any term.
    pub fn controlled(&self, qubit: usize, bit: u8) -> Result<LocalHamiltonian> {
        if qubit >= self.n {
            return Err(HamError::IndexOutOfRange { index: qubit, n: self.n });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| t.with_control(qubit, bit))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, terms })
    }

    pub fn assemble(&self) -> Result<Operator> {
        self.assemble_with(Representation::Auto)
    }

    pub fn assemble_with(&self, repr: Representation) -> Result<Operator> {
        let dim = self.dim()?;
        let dense = match repr {
            Representation::Auto => dim <= linalg::DENSE_LIMIT,
            Representation::Dense => true,
            Representation::Sparse => false,
        };
        if dense {
            let mut m = Matrix::zeros(dim, dim);
            for t in &self.terms {
                embed_into_dense(&mut m, t.block(), t.qubits(), self.n, t.weight());
            }
            let deviation = linalg::hermitian_deviation(&m);
            if deviation > ASSEMBLED_HERMITIAN_TOL {
                return Err(HamError::NonHermitian { deviation });
            }
            Ok(Operator::Dense(m))
        } else {
            let mut triplets = Vec::new();
            for t in &self.terms {
                embed_triplets(&mut triplets, t.block(), t.qubits(), self.n, t.weight());
            }
            Ok(Operator::Sparse(CsrMatrix::from_triplets(dim, triplets)))
        }
    }

    pub fn assemble_dense(&self) -> Result<Matrix> {
        Ok(self.assemble_with(Representation::Dense)?.to_dense())
    }
}

/// Embeds a single term as a full operator of dimension `2^n`.
pub fn embed_term(term: &LocalTerm, n: usize) -> Result<Operator> {
    term.validate_for(n)?;
    let deviation = linalg::hermitian_deviation(term.block());
    if deviation > BLOCK_HERMITIAN_TOL {
        return Err(HamError::NonHermitian { deviation });
    }
    LocalHamiltonian::from_terms(n, vec![term.clone()])?.assemble()
}

/// Embeds an arbitrary (not necessarily Hermitian) block acting on `qubits`
/// into a dense `2^n` operator.
pub fn embed_operator(block: &Matrix, qubits: &[usize], n: usize) -> Result<Matrix> {
    let dim = linalg::checked_dim(n)?;
    if let Some(&index) = qubits.iter().find(|&&q| q >= n) {
        return Err(HamError::IndexOutOfRange { index, n });
    }
    let expected = 1usize << qubits.len();
    if block.nrows() != expected || block.ncols() != expected {
        return Err(HamError::BlockShape {
            rows: block.nrows(),
            cols: block.ncols(),
            expected,
        });
    }
    let mut m = Matrix::zeros(dim, dim);
    embed_into_dense(&mut m, block, qubits, n, 1.0);
    Ok(m)
}

fn scatter_offsets(qubits: &[usize]) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|s| {
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| s >> j & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect()
}

fn for_each_entry(block: &Matrix, qubits: &[usize], n: usize, weight: f64, mut f: impl FnMut(usize, usize, C64)) {
    if weight == 0.0 {
        return;
    }
    let offsets = scatter_offsets(qubits);
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let nonzero: Vec<(usize, usize, C64)> = (0..block.nrows())
        .flat_map(|r| (0..block.ncols()).map(move |c| (r, c)))
        .filter(|&(r, c)| block[(r, c)] != ZERO)
        .map(|(r, c)| (offsets[r], offsets[c], block[(r, c)] * weight))
        .collect();
    for base in (0..1usize << n).filter(|b| b & mask == 0) {
        for &(ro, co, v) in &nonzero {
            f(base | ro, base | co, v);
        }
    }
}

fn embed_into_dense(m: &mut Matrix, block: &Matrix, qubits: &[usize], n: usize, weight: f64) {
    for_each_entry(block, qubits, n, weight, |r, c, v| m[(r, c)] += v);
}

fn embed_triplets(out: &mut Vec<(usize, usize, C64)>, block: &Matrix, qubits: &[usize], n: usize, weight: f64) {
    for_each_entry(block, qubits, n, weight, |r, c, v| out.push((r, c, v)));
}

/// Projector onto computational-basis states whose bits at `qubits` equal `bits`.
pub fn basis_projector_term(qubits: &[usize], bits: &[u8], weight: f64) -> Result<LocalTerm> {
    let mut block = Matrix::identity(1, 1);
    for &b in bits {
        block = linalg::kron(&linalg::bit_projector(b), &block);
    }
    LocalTerm::new(qubits.to_vec(), block, weight)
}
