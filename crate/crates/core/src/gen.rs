//! Seeded random instances for tests and the `verify` suites.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clock::{self, Gate, VerifierCircuit};
use crate::error::Result;
use crate::ham::{LocalHamiltonian, LocalTerm};
use crate::linalg::{self, c, Matrix, Vector, C64};
use crate::reductions::{tree_prefixes, QueryTree, TreeMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(dim: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(dim, dim, |_, _| normal_c64(rng))
}

pub fn random_state(dim: usize, rng: &mut impl Rng) -> Vector {
    let v = Vector::from_fn(dim, |_, _| normal_c64(rng));
    let norm = v.norm();
    v / c(norm)
}

/// Haar-distributed unitary (QR of a Gaussian matrix with the phases of `R` divided out).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Matrix {
    let qr = gaussian_matrix(dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// GUE-like Hermitian block scaled to entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Matrix {
    let g = gaussian_matrix(dim, rng);
    (&g + g.adjoint()) * c(0.5 / (dim as f64).sqrt())
}

/// `terms` random Hermitian terms on 1..=`max_locality` distinct qubits each.
pub fn random_local_hamiltonian(n: usize, terms: usize, max_locality: usize, rng: &mut impl Rng) -> LocalHamiltonian {
    let mut h = LocalHamiltonian::new(n);
    for _ in 0..terms {
        let k = rng.random_range(1..=max_locality.min(n));
        let mut qubits: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            qubits.swap(i, j);
        }
        qubits.truncate(k);
        let block = random_hermitian(1 << k, rng);
        let weight = rng.random_range(0.2..1.0);
        h.push(LocalTerm::new(qubits, block, weight).expect("random block is Hermitian"))
            .expect("qubits in range");
    }
    h
}

/// `U diag(spectrum) U^dagger` for a Haar-random `U`, as a single `n`-qubit term.
pub fn hamiltonian_with_spectrum(n: usize, spectrum: &[f64], rng: &mut impl Rng) -> LocalHamiltonian {
    assert_eq!(spectrum.len(), 1 << n, "spectrum length must be 2^n");
    let u = random_unitary(1 << n, rng);
    let d = Matrix::from_diagonal(&Vector::from_iterator(spectrum.len(), spectrum.iter().map(|&x| c(x))));
    let m = &u * d * u.adjoint();
    let m = (&m + m.adjoint()) * c(0.5);
    LocalHamiltonian::from_dense(n, m, 1.0).expect("symmetrized matrix is Hermitian")
}

/// Random local Hamiltonian shifted by an identity term so that its ground energy is `ground`.
pub fn local_with_ground(n: usize, ground: f64, rng: &mut impl Rng) -> Result<LocalHamiltonian> {
    let mut h = random_local_hamiltonian(n, 2 * n, 2, rng);
    let lowest = linalg::eigvalsh(&h.assemble_dense()?)[0];
    h.push(LocalTerm::identity(ground - lowest))?;
    Ok(h)
}

/// Orthogonal projector of rank `rank` onto a Haar-random subspace.
pub fn random_projector(dim: usize, rank: usize, rng: &mut impl Rng) -> Matrix {
    let u = random_unitary(dim, rng);
    let v = u.columns(0, rank);
    &v * v.adjoint()
}

/// Projector onto `shared` directions of `p`'s range plus `fresh` random directions.
pub fn overlapping_projector(p: &Matrix, shared: usize, fresh: usize, rng: &mut impl Rng) -> Matrix {
    let dim = p.nrows();
    let range = linalg::range_basis(p, 1e-9);
    let mut cols: Vec<Vector> = (0..shared.min(range.ncols())).map(|j| range.column(j).into_owned()).collect();
    for _ in 0..fresh {
        cols.push(random_state(dim, rng));
    }
    if cols.is_empty() {
        return Matrix::zeros(dim, dim);
    }
    let basis = linalg::range_basis(&{
        let m = Matrix::from_columns(&cols);
        &m * m.adjoint()
    }, 1e-9);
    &basis * basis.adjoint()
}

/// Random 1- or 2-qubit Haar gate on a `work`-qubit register.
pub fn random_gate(work: usize, rng: &mut impl Rng) -> Gate {
    let k = if work >= 2 && rng.random_bool(0.6) { 2 } else { 1 };
    let a = rng.random_range(0..work);
    let mut qubits = vec![a];
    if k == 2 {
        let mut b = rng.random_range(0..work - 1);
        if b >= a {
            b += 1;
        }
        qubits.push(b);
    }
    clock::gate(qubits, random_unitary(1 << k, rng))
}

pub fn random_circuit(witness: usize, ancilla: usize, steps: usize, rng: &mut impl Rng) -> VerifierCircuit {
    let work = witness + ancilla;
    let gates = (0..steps).map(|_| random_gate(work, rng)).collect();
    let output = rng.random_range(0..work);
    VerifierCircuit::new(witness, ancilla, output, gates).expect("random circuit is valid")
}

/// Gates that never change the output qubit's computational-basis populations:
/// Haar gates elsewhere and Haar unitaries controlled by the output qubit.
fn output_preserving_gate(work: usize, output: usize, rng: &mut impl Rng) -> Gate {
    let others: Vec<usize> = (0..work).filter(|&q| q != output).collect();
    if others.is_empty() {
        return clock::gate(vec![output], clock::identity_gate(1));
    }
    let target = others[rng.random_range(0..others.len())];
    if rng.random_bool(0.5) {
        clock::gate(vec![output, target], clock::controlled(&random_unitary(2, rng)))
    } else {
        clock::gate(vec![target], random_unitary(2, rng))
    }
}

/// A circuit accepting witnesses with output bit `1` with probability
/// `cos^2(theta / 2)`, so its best witness does at least that well: the
/// output is witness qubit 0, tilted by `ry(theta)` at a random step.
pub fn tilted_acceptor(witness: usize, ancilla: usize, steps: usize, theta: f64, rng: &mut impl Rng) -> VerifierCircuit {
    assert!(witness >= 1);
    tilted(witness, ancilla, 0, steps, theta, rng)
}

/// A circuit accepting every witness with probability `sin^2(theta / 2)`:
/// the output is an ancilla, tilted by `ry(theta)` at a random step.
pub fn tilted_rejector(witness: usize, ancilla: usize, steps: usize, theta: f64, rng: &mut impl Rng) -> VerifierCircuit {
    assert!(ancilla >= 1);
    tilted(witness, ancilla, witness, steps, theta, rng)
}

fn tilted(witness: usize, ancilla: usize, output: usize, steps: usize, theta: f64, rng: &mut impl Rng) -> VerifierCircuit {
    let work = witness + ancilla;
    let tilt_at = rng.random_range(0..steps);
    let gates = (0..steps)
        .map(|i| {
            if i == tilt_at {
                clock::gate(vec![output], clock::ry(theta))
            } else {
                output_preserving_gate(work, output, rng)
            }
        })
        .collect();
    VerifierCircuit::new(witness, ancilla, output, gates).expect("constructed circuit is valid")
}

/// Spectrum with ground `ground`, second level `ground + gap` and the rest above that.
pub fn spectrum_with_gap(dim: usize, ground: f64, gap: f64, spread: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut s = vec![ground];
    if dim > 1 {
        s.push(ground + gap);
    }
    for _ in 2..dim {
        s.push(ground + gap + rng.random_range(0.0..spread));
    }
    s
}

/// PSD query Hamiltonian on `q` qubits: ground energy in `[0, 0.9 eps]` (YES)
/// or `[3.1 eps, 4 eps]` (NO), spectral gap at least `1.2 eps`.
pub fn query_hamiltonian(q: usize, yes: bool, epsilon: f64, rng: &mut impl Rng) -> LocalHamiltonian {
    let ground = if yes {
        rng.random_range(0.0..0.9) * epsilon
    } else {
        rng.random_range(3.1..4.0) * epsilon
    };
    let gap = rng.random_range(1.2..3.0) * epsilon;
    hamiltonian_with_spectrum(q, &spectrum_with_gap(1 << q, ground, gap, 2.0 * epsilon, rng), rng)
}

/// Query Hamiltonian sitting exactly on the promise boundary: ground `eps` or `3 eps`, gap `eps`.
pub fn boundary_query(q: usize, yes: bool, epsilon: f64, rng: &mut impl Rng) -> LocalHamiltonian {
    let ground = if yes { epsilon } else { 3.0 * epsilon };
    hamiltonian_with_spectrum(q, &spectrum_with_gap(1 << q, ground, epsilon, epsilon, rng), rng)
}

/// One tree per YES/NO assignment to every query node. Node `k` of
/// [`tree_prefixes`] answers YES when bit `k` of the assignment is set.
/// `accept_for` picks the accept set from the assignment's correct answers.
pub fn exhaustive_trees(
    depth: usize,
    q: usize,
    epsilon: f64,
    boundary: bool,
    rng: &mut impl Rng,
    mut accept_for: impl FnMut(&str, &mut ChaCha8Rng) -> Vec<BTreeSet<String>>,
) -> Result<Vec<QueryTree>> {
    let prefixes = tree_prefixes(depth);
    let mut sub = ChaCha8Rng::seed_from_u64(rng.random());
    let mut trees = Vec::new();
    for assignment in 0u64..1 << prefixes.len() {
        let queries: BTreeMap<String, LocalHamiltonian> = prefixes
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let yes = (assignment >> k) & 1 == 1;
                let h = if boundary {
                    boundary_query(q, yes, epsilon, rng)
                } else {
                    query_hamiltonian(q, yes, epsilon, rng)
                };
                (p.clone(), h)
            })
            .collect();
        let probe = QueryTree::new(epsilon, depth, q, queries.clone(), BTreeSet::new(), TreeMode::Strict)?;
        let correct = probe.correct_answers()?;
        for accept in accept_for(&correct, &mut sub) {
            trees.push(QueryTree::new(epsilon, depth, q, queries.clone(), accept, TreeMode::Strict)?);
        }
    }
    Ok(trees)
}

/// Two accept sets per assignment: a random set containing the correct answers
/// and its complement, so both machine outputs occur.
pub fn both_outputs(correct: &str, rng: &mut ChaCha8Rng) -> Vec<BTreeSet<String>> {
    let strings = crate::reductions::binary_strings(correct.len());
    let mut accept: BTreeSet<String> = strings.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    accept.insert(correct.to_string());
    let reject: BTreeSet<String> = strings.into_iter().filter(|s| !accept.contains(s)).collect();
    vec![accept, reject]
}

/// Every subset of answer strings.
pub fn all_accept_sets(correct: &str, _rng: &mut ChaCha8Rng) -> Vec<BTreeSet<String>> {
    let strings = crate::reductions::binary_strings(correct.len());
    (0u64..1 << strings.len())
        .map(|mask| {
            strings
                .iter()
                .enumerate()
                .filter(|(i, _)| (mask >> i) & 1 == 1)
                .map(|(_, s)| s.clone())
                .collect()
        })
        .collect()
}
