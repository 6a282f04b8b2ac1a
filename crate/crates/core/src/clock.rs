//! Circuit-to-Hamiltonian compiler.
//!
//! The work register holds the witness qubits at `0..w` and the ancillas at
//! `w..w+m`. The abstract clock Hamiltonian acts on `2^W (T + 1)` states,
//! basis index `work + 2^W t`. The unary variant appends `T` clock qubits
//! `c_1..c_T` at `W..W+T`, clock value `t` being `c_1..c_t = 1`, the rest `0`.
//!
//! Propagation terms run over `t = 1..T`; `H_prop,t` couples clock values
//! `t - 1` and `t` through gate `U_t`.

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::ham::{embed_operator, LocalHamiltonian, LocalTerm};
use crate::io::{matrix_to_rows, rows_to_matrix, BlockRows};
use crate::linalg::{self, c, Matrix, Vector, ONE, ZERO};
use crate::spectral;

pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub qubits: Vec<usize>,
    pub unitary: Matrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    t: usize,
    qubits: Vec<usize>,
    unitary: BlockRows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    witness_qubits: usize,
    ancilla_qubits: usize,
    output_qubit: usize,
    gates: Vec<GateFile>,
}

/// A verifier: gates `U_1..U_T` on 1 or 2 work qubits, accepting when the
/// output qubit reads `1` at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifierCircuit {
    witness_qubits: usize,
    ancilla_qubits: usize,
    output_qubit: usize,
    gates: Vec<Gate>,
}

impl VerifierCircuit {
    pub fn new(witness_qubits: usize, ancilla_qubits: usize, output_qubit: usize, gates: Vec<Gate>) -> Result<Self> {
        let w = witness_qubits + ancilla_qubits;
        if w == 0 {
            return Err(HamError::InvalidParameter("circuit needs at least one work qubit".into()));
        }
        if output_qubit >= w {
            return Err(HamError::IndexOutOfRange { index: output_qubit, n: w });
        }
        if gates.is_empty() {
            return Err(HamError::InvalidParameter("circuit needs at least one gate".into()));
        }
        for (i, g) in gates.iter().enumerate() {
            let k = g.qubits.len();
            if !(1..=2).contains(&k) {
                return Err(HamError::InvalidParameter(format!("gate {} acts on {k} qubits", i + 1)));
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= w) {
                return Err(HamError::IndexOutOfRange { index: q, n: w });
            }
            if k == 2 && g.qubits[0] == g.qubits[1] {
                return Err(HamError::DuplicateQubit(g.qubits[0]));
            }
            if g.unitary.nrows() != 1 << k || g.unitary.ncols() != 1 << k {
                return Err(HamError::BlockShape {
                    rows: g.unitary.nrows(),
                    cols: g.unitary.ncols(),
                    expected: 1 << k,
                });
            }
            let deviation = linalg::unitary_deviation(&g.unitary);
            if deviation > UNITARY_TOL {
                return Err(HamError::NotUnitary { index: i + 1, deviation });
            }
        }
        Ok(Self {
            witness_qubits,
            ancilla_qubits,
            output_qubit,
            gates,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: CircuitFile = serde_json::from_str(text)?;
        let mut gates = Vec::with_capacity(f.gates.len());
        for (i, g) in f.gates.into_iter().enumerate() {
            if g.t != i + 1 {
                return Err(HamError::Schema(format!("gate {} has t = {}, expected {}", i + 1, g.t, i + 1)));
            }
            gates.push(Gate {
                qubits: g.qubits,
                unitary: rows_to_matrix(&g.unitary)?,
            });
        }
        Self::new(f.witness_qubits, f.ancilla_qubits, f.output_qubit, gates)
    }

    pub fn to_json(&self) -> String {
        let f = CircuitFile {
            witness_qubits: self.witness_qubits,
            ancilla_qubits: self.ancilla_qubits,
            output_qubit: self.output_qubit,
            gates: self
                .gates
                .iter()
                .enumerate()
                .map(|(i, g)| GateFile {
                    t: i + 1,
                    qubits: g.qubits.clone(),
                    unitary: matrix_to_rows(&g.unitary),
                })
                .collect(),
        };
        serde_json::to_string(&f).expect("circuit serializes")
    }

    pub fn witness_qubits(&self) -> usize {
        self.witness_qubits
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn work_qubits(&self) -> usize {
        self.witness_qubits + self.ancilla_qubits
    }

    pub fn output_qubit(&self) -> usize {
        self.output_qubit
    }

    pub fn steps(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// `U_t` (1-based) on the whole work register.
    pub fn step_unitary(&self, t: usize) -> Matrix {
        let g = &self.gates[t - 1];
        embed_operator(&g.unitary, &g.qubits, self.work_qubits()).expect("gate validated at construction")
    }

    /// `U_T .. U_1`.
    pub fn unitary(&self) -> Matrix {
        (1..=self.steps()).fold(Matrix::identity(1 << self.work_qubits(), 1 << self.work_qubits()), |acc, t| {
            self.step_unitary(t) * acc
        })
    }

    /// `witness (x) |0^m>` on the work register.
    pub fn initial_state(&self, witness: &Vector) -> Result<Vector> {
        if witness.len() != 1 << self.witness_qubits {
            return Err(HamError::InvalidParameter(format!(
                "witness has dimension {}, expected {}",
                witness.len(),
                1usize << self.witness_qubits
            )));
        }
        let mut v = Vector::zeros(1 << self.work_qubits());
        v.rows_mut(0, witness.len()).copy_from(witness);
        Ok(v)
    }

    /// `psi_0 .. psi_T` with `psi_t = U_t psi_(t-1)`.
    pub fn trajectory(&self, witness: &Vector) -> Result<Vec<Vector>> {
        let mut states = vec![self.initial_state(witness)?];
        for t in 1..=self.steps() {
            let next = self.step_unitary(t) * states.last().expect("nonempty");
            states.push(next);
        }
        Ok(states)
    }

    /// `|| (|1><1|_O (x) I) U_T..U_1 (witness (x) |0^m>) ||^2`.
    pub fn acceptance_probability(&self, witness: &Vector) -> Result<f64> {
        let end = self.trajectory(witness)?.pop().expect("nonempty");
        let norm = witness.norm_squared();
        Ok(end
            .iter()
            .enumerate()
            .filter(|(x, _)| (x >> self.output_qubit) & 1 == 1)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            / norm)
    }

    /// The operator `Q` on the witness space with `<psi|Q|psi>` the acceptance
    /// probability of `psi`.
    pub fn acceptance_operator(&self) -> Matrix {
        let u = self.unitary();
        let dw = 1 << self.witness_qubits;
        let p1 = embed_operator(&linalg::bit_projector(1), &[self.output_qubit], self.work_qubits())
            .expect("output qubit validated");
        let full = u.adjoint() * p1 * &u;
        full.view((0, 0), (dw, dw)).into_owned()
    }

    /// Largest acceptance probability over witnesses and a witness attaining it.
    pub fn max_acceptance(&self) -> (f64, Vector) {
        let (vals, vecs) = linalg::eigh(&self.acceptance_operator());
        let k = vals.len() - 1;
        (vals[k], vecs.column(k).into_owned())
    }
}

pub fn gate(qubits: Vec<usize>, unitary: Matrix) -> Gate {
    Gate { qubits, unitary }
}

/// `|1><1|_(A_i) (x) |0><0|_C` and friends on `2^W (T+1)` states.
#[derive(Debug, Clone)]
pub struct AbstractClock {
    pub work_qubits: usize,
    pub steps: usize,
    pub h_in: Matrix,
    pub h_out: Matrix,
    pub h_prop: Matrix,
}

impl AbstractClock {
    pub fn dim(&self) -> usize {
        self.h_in.nrows()
    }

    pub fn total(&self) -> Matrix {
        &self.h_in + &self.h_out + &self.h_prop
    }

    pub fn index(&self, work: usize, t: usize) -> usize {
        work + (t << self.work_qubits)
    }
}

fn check_cap(dim: usize) -> Result<()> {
    let cap = linalg::dim_cap();
    if dim > cap {
        return Err(HamError::DimensionCap { dim, cap });
    }
    Ok(())
}

fn clock_block(dw: usize, steps: usize, place: impl Fn(&mut Matrix, usize)) -> Matrix {
    let mut m = Matrix::zeros(dw * (steps + 1), dw * (steps + 1));
    for w in 0..dw {
        place(&mut m, w);
    }
    m
}

pub fn compile_abstract(circuit: &VerifierCircuit) -> Result<AbstractClock> {
    let wq = circuit.work_qubits();
    let dw = 1usize << wq;
    let steps = circuit.steps();
    check_cap(dw * (steps + 1))?;
    let at = |w: usize, t: usize| w + t * dw;

    let h_in = clock_block(dw, steps, |m, w| {
        let ancillas_set = (circuit.witness_qubits..wq).filter(|&q| (w >> q) & 1 == 1).count();
        m[(at(w, 0), at(w, 0))] = c(ancillas_set as f64);
    });
    let h_out = clock_block(dw, steps, |m, w| {
        if (w >> circuit.output_qubit) & 1 == 0 {
            m[(at(w, steps), at(w, steps))] = ONE;
        }
    });
    let mut h_prop = Matrix::zeros(dw * (steps + 1), dw * (steps + 1));
    for t in 1..=steps {
        let u = circuit.step_unitary(t);
        for w in 0..dw {
            h_prop[(at(w, t), at(w, t))] += c(0.5);
            h_prop[(at(w, t - 1), at(w, t - 1))] += c(0.5);
        }
        for r in 0..dw {
            for col in 0..dw {
                let z = u[(r, col)] * 0.5;
                h_prop[(at(r, t), at(col, t - 1))] -= z;
                h_prop[(at(col, t - 1), at(r, t))] -= z.conj();
            }
        }
    }
    Ok(AbstractClock {
        work_qubits: wq,
        steps,
        h_in,
        h_out,
        h_prop,
    })
}

/// `1/sqrt(T+1) sum_t psi_t (x) |t>` in the abstract basis.
pub fn history_state(circuit: &VerifierCircuit, witness: &Vector) -> Result<Vector> {
    let states = circuit.trajectory(witness)?;
    let dw = 1usize << circuit.work_qubits();
    let mut v = Vector::zeros(dw * states.len());
    for (t, psi) in states.iter().enumerate() {
        v.rows_mut(t * dw, dw).copy_from(psi);
    }
    let norm = v.norm();
    Ok(v / c(norm))
}

/// The unary clock: parts on `W + T` qubits, clock qubit `c_t` at index `W + t - 1`.
#[derive(Debug, Clone)]
pub struct UnaryClock {
    pub work_qubits: usize,
    pub steps: usize,
    pub penalty: f64,
    pub h_in: LocalHamiltonian,
    pub h_out: LocalHamiltonian,
    pub h_prop: LocalHamiltonian,
    pub h_clock: LocalHamiltonian,
}

impl UnaryClock {
    pub fn n(&self) -> usize {
        self.work_qubits + self.steps
    }

    /// Everything except the clock penalty.
    pub fn logical(&self) -> Result<LocalHamiltonian> {
        self.h_in.add(&self.h_out)?.add(&self.h_prop)
    }

    pub fn total(&self) -> Result<LocalHamiltonian> {
        self.logical()?.add(&self.h_clock)
    }

    pub fn clock_qubit(&self, t: usize) -> usize {
        self.work_qubits + t - 1
    }

    /// Basis index of `|work> (x) |unary(t)>`.
    pub fn index(&self, work: usize, t: usize) -> usize {
        work + (((1usize << t) - 1) << self.work_qubits)
    }

    /// Isometry from the abstract basis onto the legal clock subspace.
    pub fn isometry(&self) -> Matrix {
        let dw = 1usize << self.work_qubits;
        let mut v = Matrix::zeros(1 << self.n(), dw * (self.steps + 1));
        for t in 0..=self.steps {
            for w in 0..dw {
                v[(self.index(w, t), w + t * dw)] = ONE;
            }
        }
        v
    }

    /// Projector onto the legal clock subspace.
    pub fn legal_projector(&self) -> Matrix {
        let v = self.isometry();
        &v * v.adjoint()
    }
}

/// Clock projector `|t><t|` in the unary encoding, as qubits and a block over them.
fn unary_projector(w: usize, steps: usize, t: usize) -> (Vec<usize>, Matrix) {
    let cq = |i: usize| w + i - 1;
    if t == 0 {
        (vec![cq(1)], linalg::bit_projector(0))
    } else if t == steps {
        (vec![cq(steps)], linalg::bit_projector(1))
    } else {
        (
            vec![cq(t), cq(t + 1)],
            linalg::kron(&linalg::bit_projector(0), &linalg::bit_projector(1)),
        )
    }
}

/// `|t><t-1|` in the unary encoding: raise `c_t`, guarded by `c_(t-1) = 1` and `c_(t+1) = 0`.
fn unary_transition(w: usize, steps: usize, t: usize) -> (Vec<usize>, Matrix) {
    let cq = |i: usize| w + i - 1;
    let mut raise = Matrix::zeros(2, 2);
    raise[(1, 0)] = ONE;
    let mut qubits = vec![cq(t)];
    let mut block = raise;
    if t >= 2 {
        qubits.insert(0, cq(t - 1));
        block = linalg::kron(&block, &linalg::bit_projector(1));
    }
    if t < steps {
        qubits.push(cq(t + 1));
        block = linalg::kron(&linalg::bit_projector(0), &block);
    }
    (qubits, block)
}

/// Unary clock with penalty `multiplier * T^6` on each `|0><0|_(c_i) (x) |1><1|_(c_(i+1))`.
pub fn compile_unary(circuit: &VerifierCircuit, penalty_multiplier: f64) -> Result<UnaryClock> {
    let w = circuit.work_qubits();
    let steps = circuit.steps();
    let n = w + steps;
    linalg::checked_dim(n)?;
    let cq = |i: usize| w + i - 1;

    let mut h_in = LocalHamiltonian::new(n);
    for a in circuit.witness_qubits..w {
        h_in.push(LocalTerm::new(
            vec![a, cq(1)],
            linalg::kron(&linalg::bit_projector(0), &linalg::bit_projector(1)),
            1.0,
        )?)?;
    }
    let mut h_out = LocalHamiltonian::new(n);
    h_out.push(LocalTerm::new(
        vec![circuit.output_qubit, cq(steps)],
        linalg::kron(&linalg::bit_projector(1), &linalg::bit_projector(0)),
        1.0,
    )?)?;

    let mut h_prop = LocalHamiltonian::new(n);
    for t in 1..=steps {
        for s in [t, t - 1] {
            let (qubits, block) = unary_projector(w, steps, s);
            h_prop.push(LocalTerm::new(qubits, block, 0.5)?)?;
        }
        let g = &circuit.gates[t - 1];
        let (clock_qubits, hop) = unary_transition(w, steps, t);
        let forward = linalg::kron(&hop, &g.unitary);
        let mut qubits = g.qubits.clone();
        qubits.extend(clock_qubits);
        h_prop.push(LocalTerm::new(qubits, &forward + forward.adjoint(), -0.5)?)?;
    }

    let penalty = penalty_multiplier * (steps as f64).powi(6);
    let mut h_clock = LocalHamiltonian::new(n);
    for i in 1..steps {
        h_clock.push(LocalTerm::new(
            vec![cq(i), cq(i + 1)],
            linalg::kron(&linalg::bit_projector(1), &linalg::bit_projector(0)),
            penalty,
        )?)?;
    }
    Ok(UnaryClock {
        work_qubits: w,
        steps,
        penalty,
        h_in,
        h_out,
        h_prop,
        h_clock,
    })
}

/// `|| Pi H' Pi - V H1 V^dagger ||` for the legal-subspace isometry `V`,
/// with `H'` the unary Hamiltonian without its clock penalty.
pub fn unary_abstract_deviation(abs: &AbstractClock, unary: &UnaryClock) -> Result<f64> {
    let v = unary.isometry();
    let p = &v * v.adjoint();
    let logical = unary.logical()?.assemble_dense()?;
    let diff = &p * logical * &p - &v * abs.total() * v.adjoint();
    Ok(linalg::hermitian_norm(&diff))
}

/// `|| H_prop v ||`.
pub fn prop_residual(abs: &AbstractClock, v: &Vector) -> f64 {
    (&abs.h_prop * v).norm()
}

/// Dimension of the numerical null space of `H_prop`.
pub fn prop_null_dimension(abs: &AbstractClock, tol: f64) -> usize {
    linalg::eigvalsh(&abs.h_prop).iter().filter(|&&x| x.abs() <= tol).count()
}

/// The part of the acceptance statement about unique witnesses.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WitnessBounds {
    /// The unique witness must be accepted with at least this probability.
    pub accept_at_least: f64,
    /// Every witness orthogonal to it must be accepted with at most this probability.
    pub reject_at_most: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UqmaGapReport {
    pub steps: usize,
    pub witness_acceptance: f64,
    /// Largest acceptance over witnesses orthogonal to the given one.
    pub orthogonal_acceptance: f64,
    pub abstract_lambda1: f64,
    pub abstract_lambda2: f64,
    pub unary_lambda1: f64,
    pub unary_lambda2: f64,
    /// `lambda2(H1) T^3`.
    pub abstract_ratio: f64,
    /// `lambda2(H2) T^3`.
    pub unary_ratio: f64,
}

/// Checks the unique-witness property exactly (the orthogonal complement is
/// searched by diagonalization, not sampling) and reports the low spectra of
/// both clock Hamiltonians.
pub fn certify_uqma_gap(
    circuit: &VerifierCircuit,
    witness: &Vector,
    bounds: WitnessBounds,
    penalty_multiplier: f64,
) -> Result<UqmaGapReport> {
    let witness_acceptance = circuit.acceptance_probability(witness)?;
    let q = circuit.acceptance_operator();
    let psi = witness / c(witness.norm());
    let complement = Matrix::identity(q.nrows(), q.nrows()) - &psi * psi.adjoint();
    let restricted = &complement * q * &complement;
    let orthogonal_acceptance = *linalg::eigvalsh(&restricted).last().expect("nonempty");
    if witness_acceptance < bounds.accept_at_least || orthogonal_acceptance > bounds.reject_at_most {
        return Err(HamError::PromiseViolation(format!(
            "witness accepted with {witness_acceptance}, orthogonal complement up to {orthogonal_acceptance}"
        )));
    }
    let steps = circuit.steps();
    let a = linalg::eigvalsh(&compile_abstract(circuit)?.total());
    let u = spectral::lowest_k(&compile_unary(circuit, penalty_multiplier)?.total()?, 2, None)?;
    let cube = (steps as f64).powi(3);
    Ok(UqmaGapReport {
        steps,
        witness_acceptance,
        orthogonal_acceptance,
        abstract_lambda1: a[0],
        abstract_lambda2: a[1],
        unary_lambda1: u.eigenvalues[0],
        unary_lambda2: u.eigenvalues[1],
        abstract_ratio: a[1] * cube,
        unary_ratio: u.eigenvalues[1] * cube,
    })
}

pub fn pauli_x() -> Matrix {
    linalg::pauli('X').expect("X is a Pauli label")
}

pub fn identity_gate(k: usize) -> Matrix {
    Matrix::identity(1 << k, 1 << k)
}

/// `|0><0| (x) I + |1><1| (x) U` with the control on the gate's first qubit.
pub fn controlled(u: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(2, 2)] = ONE;
    for r in 0..2 {
        for col in 0..2 {
            m[(2 * r + 1, 2 * col + 1)] = u[(r, col)];
        }
    }
    m
}

/// `exp(-i theta Y / 2)`.
pub fn ry(theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

pub fn basis_state(dim: usize, index: usize) -> Vector {
    let mut v = Vector::from_element(dim, ZERO);
    v[index] = ONE;
    v
}
