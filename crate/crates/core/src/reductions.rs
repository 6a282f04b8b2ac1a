//! Hardness constructions: the two-instance combiner, query-tree
//! Hamiltonians with their observables, the `H0` gadget and the
//! spectral-gap Hamiltonian `H_final`.
//!
//! Query-tree register layout is level-major. Level `i` (1-based) owns answer
//! qubit `(i - 1)(1 + q)` followed by its `q` query qubits; the extra qubit `B`
//! of `H_final` comes last.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::ham::{basis_projector_term, LocalHamiltonian, LocalTerm, Observable, Placement};
use crate::linalg::{self, Matrix};

/// `|0><0| (x) H1 + 3 |1><1| (x) H2 + 4 eps |0><0| (x) I` with the new qubit at index 0.
pub fn dqma_combine(h1: &LocalHamiltonian, h2: &LocalHamiltonian, epsilon: f64) -> Result<LocalHamiltonian> {
    if h1.n() != h2.n() {
        return Err(HamError::QubitCountMismatch {
            left: h1.n(),
            right: h2.n(),
        });
    }
    let zero = h1.tensor_with_ancilla(1, &Placement::Prepend)?.controlled(0, 0)?;
    let one = h2.scale(3.0).tensor_with_ancilla(1, &Placement::Prepend)?.controlled(0, 1)?;
    let mut h = zero.add(&one)?;
    h.push(LocalTerm::projector(0, 0, 4.0 * epsilon))?;
    Ok(h)
}

/// Lowest energies of the control-`|0>` and control-`|1>` sectors of a combined Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqmaCertificate {
    pub sector0_min: f64,
    pub sector1_min: f64,
    pub ground_energy: f64,
}

pub fn dqma_certificate(combined: &LocalHamiltonian) -> Result<DqmaCertificate> {
    let m = combined.assemble_dense()?;
    let sector = |bit: u8| -> f64 {
        let idx = sector_indices(m.nrows(), &[0], &[bit]);
        linalg::eigvalsh(&linalg::principal_submatrix(&m, &idx))[0]
    };
    let (s0, s1) = (sector(0), sector(1));
    Ok(DqmaCertificate {
        sector0_min: s0,
        sector1_min: s1,
        ground_energy: s0.min(s1),
    })
}

/// Basis indices (of a `dim`-dimensional register) whose `qubits` read `bits`.
pub fn sector_indices(dim: usize, qubits: &[usize], bits: &[u8]) -> Vec<usize> {
    (0..dim)
        .filter(|&x| qubits.iter().zip(bits).all(|(&q, &b)| ((x >> q) & 1) as u8 == b))
        .collect()
}

/// How strictly a query tree's promise is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeMode {
    #[default]
    Strict,
    /// Structure only; promise-violating trees are built as given.
    Permissive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryTreeFile {
    epsilon: f64,
    depth: usize,
    query_space_qubits: usize,
    queries: BTreeMap<String, LocalHamiltonian>,
    accept: BTreeSet<String>,
}

/// The Hamiltonians an oracle machine may ask, keyed by the answer prefix that
/// leads to each query, plus the set of full answer strings it accepts on.
#[derive(Debug, Clone, Serialize)]
pub struct QueryTree {
    epsilon: f64,
    depth: usize,
    query_space_qubits: usize,
    queries: BTreeMap<String, LocalHamiltonian>,
    accept: BTreeSet<String>,
    #[serde(skip)]
    mode: TreeMode,
}

/// All binary strings of length `len`, in counting order with the first character most significant.
pub fn binary_strings(len: usize) -> Vec<String> {
    (0..1usize << len)
        .map(|x| (0..len).map(|j| if (x >> (len - 1 - j)) & 1 == 1 { '1' } else { '0' }).collect())
        .collect()
}

/// Every prefix a depth-`depth` tree needs a query for.
pub fn tree_prefixes(depth: usize) -> Vec<String> {
    (0..depth).flat_map(binary_strings).collect()
}

fn string_bits(s: &str) -> Vec<u8> {
    s.bytes().map(|b| b - b'0').collect()
}

fn promise_tol(epsilon: f64) -> f64 {
    1e-10 * epsilon.max(1.0)
}

fn lowest_two_dense(h: &LocalHamiltonian) -> Result<(f64, Option<f64>)> {
    let vals = linalg::eigvalsh(&h.assemble_dense()?);
    Ok((vals[0], vals.get(1).copied()))
}

impl QueryTree {
    pub fn new(
        epsilon: f64,
        depth: usize,
        query_space_qubits: usize,
        queries: BTreeMap<String, LocalHamiltonian>,
        accept: BTreeSet<String>,
        mode: TreeMode,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(HamError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if depth == 0 {
            return Err(HamError::InvalidParameter("depth must be at least 1".into()));
        }
        let expected: BTreeSet<String> = tree_prefixes(depth).into_iter().collect();
        if let Some(extra) = queries.keys().find(|k| !expected.contains(*k)) {
            return Err(HamError::Schema(format!("unexpected query prefix {extra:?}")));
        }
        if let Some(missing) = expected.iter().find(|p| !queries.contains_key(*p)) {
            return Err(HamError::Schema(format!("missing query for prefix {missing:?}")));
        }
        for (prefix, h) in &queries {
            if h.n() != query_space_qubits {
                return Err(HamError::Schema(format!(
                    "query {prefix:?} acts on {} qubits, expected {query_space_qubits}",
                    h.n()
                )));
            }
        }
        if let Some(bad) = accept
            .iter()
            .find(|s| s.len() != depth || !s.bytes().all(|b| b == b'0' || b == b'1'))
        {
            return Err(HamError::Schema(format!("accept entry {bad:?} is not a {depth}-bit string")));
        }
        let tree = Self {
            epsilon,
            depth,
            query_space_qubits,
            queries,
            accept,
            mode,
        };
        if mode == TreeMode::Strict {
            tree.check_lh_promise()?;
        }
        Ok(tree)
    }

    pub fn from_json(text: &str, mode: TreeMode) -> Result<Self> {
        let f: QueryTreeFile = serde_json::from_str(text)?;
        Self::new(f.epsilon, f.depth, f.query_space_qubits, f.queries, f.accept, mode)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("query tree serializes")
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn query_space_qubits(&self) -> usize {
        self.query_space_qubits
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    pub fn query(&self, prefix: &str) -> &LocalHamiltonian {
        &self.queries[prefix]
    }

    pub fn accepts(&self, answers: &str) -> bool {
        self.accept.contains(answers)
    }

    pub fn accept_set(&self) -> &BTreeSet<String> {
        &self.accept
    }

    /// Every query is PSD with ground energy at most `eps` or at least `3 eps`.
    pub fn check_lh_promise(&self) -> Result<()> {
        let tol = promise_tol(self.epsilon);
        for (prefix, h) in &self.queries {
            let (l1, _) = lowest_two_dense(h)?;
            if l1 < -tol {
                return Err(HamError::PromiseViolation(format!(
                    "query {prefix:?} has negative ground energy {l1}"
                )));
            }
            if l1 > self.epsilon + tol && l1 < 3.0 * self.epsilon - tol {
                return Err(HamError::PromiseViolation(format!(
                    "query {prefix:?} ground energy {l1} lies strictly between eps and 3 eps"
                )));
            }
        }
        Ok(())
    }

    /// The LH promise plus a spectral gap of at least `eps` for every query.
    pub fn check_unique_promise(&self) -> Result<()> {
        self.check_lh_promise()?;
        let tol = promise_tol(self.epsilon);
        for (prefix, h) in &self.queries {
            if let (l1, Some(l2)) = lowest_two_dense(h)? {
                if l2 - l1 < self.epsilon - tol {
                    return Err(HamError::PromiseViolation(format!(
                        "query {prefix:?} has spectral gap {} below eps",
                        l2 - l1
                    )));
                }
            }
        }
        Ok(())
    }

    /// The answers an exact oracle gives along the path the machine actually takes.
    pub fn correct_answers(&self) -> Result<String> {
        let mut prefix = String::new();
        for _ in 0..self.depth {
            let (l1, _) = lowest_two_dense(&self.queries[&prefix])?;
            prefix.push(if l1 <= self.epsilon + promise_tol(self.epsilon) { '1' } else { '0' });
        }
        Ok(prefix)
    }

    /// `M(x)`: whether the machine accepts on the correct answers.
    pub fn machine_output(&self) -> Result<bool> {
        Ok(self.accepts(&self.correct_answers()?))
    }

    pub fn answer_qubit(&self, level: usize) -> usize {
        (level - 1) * (1 + self.query_space_qubits)
    }

    pub fn query_qubits(&self, level: usize) -> Vec<usize> {
        let a = self.answer_qubit(level);
        (a + 1..=a + self.query_space_qubits).collect()
    }

    pub fn answer_qubits(&self, levels: usize) -> Vec<usize> {
        (1..=levels).map(|i| self.answer_qubit(i)).collect()
    }

    pub fn total_qubits(&self, levels: usize) -> usize {
        levels * (1 + self.query_space_qubits)
    }
}

/// What the `y_i = 0` branch of each level contributes.
#[derive(Debug, Clone, Copy)]
enum ZeroBranch<'a> {
    Constant,
    Gadget(&'a LocalHamiltonian),
}

fn controlled_terms(
    h: &LocalHamiltonian,
    target: &[usize],
    controls: &[(usize, u8)],
    weight: f64,
) -> Result<Vec<LocalTerm>> {
    h.terms()
        .iter()
        .map(|t| {
            let qubits = t.qubits().iter().map(|&q| target[q]).collect();
            let mut term = LocalTerm::new(qubits, t.block().clone(), t.weight() * weight)?;
            for &(q, b) in controls.iter().rev() {
                term = term.with_control(q, b)?;
            }
            Ok(term)
        })
        .collect()
}

fn level_hamiltonian(tree: &QueryTree, t: usize, zero: ZeroBranch, n: usize) -> Result<LocalHamiltonian> {
    if t == 0 || t > tree.depth {
        return Err(HamError::InvalidParameter(format!(
            "level {t} outside 1..={}",
            tree.depth
        )));
    }
    linalg::checked_dim(n)?;
    let eps = tree.epsilon;
    let mut h = LocalHamiltonian::new(n);
    for i in 1..=t {
        let w = 0.25f64.powi(i as i32 - 1);
        let answers = tree.answer_qubits(i);
        let target = tree.query_qubits(i);
        for prefix in binary_strings(i - 1) {
            let prefix_bits = string_bits(&prefix);
            let controls: Vec<(usize, u8)> = answers[..i - 1].iter().copied().zip(prefix_bits.iter().copied()).collect();
            match zero {
                ZeroBranch::Constant => {
                    let mut bits = prefix_bits.clone();
                    bits.push(0);
                    h.push(basis_projector_term(&answers, &bits, 2.0 * eps * w)?)?;
                }
                ZeroBranch::Gadget(h0) => {
                    let mut c = controls.clone();
                    c.push((answers[i - 1], 0));
                    for term in controlled_terms(h0, &target, &c, w)? {
                        h.push(term)?;
                    }
                }
            }
            let mut c = controls;
            c.push((answers[i - 1], 1));
            for term in controlled_terms(tree.query(&prefix), &target, &c, w)? {
                h.push(term)?;
            }
        }
    }
    Ok(h)
}

/// `H_t` on `t (1 + q)` qubits.
pub fn query_tree_hamiltonian(tree: &QueryTree, t: usize) -> Result<LocalHamiltonian> {
    level_hamiltonian(tree, t, ZeroBranch::Constant, tree.total_qubits(t))
}

fn answer_string_projector(tree: &QueryTree, n: usize, accepted: bool) -> Result<Observable> {
    let answers = tree.answer_qubits(tree.depth);
    let mut a = LocalHamiltonian::new(n);
    for s in binary_strings(tree.depth) {
        if tree.accepts(&s) == accepted {
            a.push(basis_projector_term(&answers, &string_bits(&s), 1.0)?)?;
        }
    }
    Ok(a)
}

/// Projector onto the answer strings the machine rejects on, on the qubits of `H_d`.
///
/// With this orientation `APPROX-SIMULATION(H_d, A, 0, 1, eps / 4^(d-1))` is
/// YES exactly when `M(x) = 1`: an accepting ground sector gives `<A> = 0`.
pub fn query_tree_observable(tree: &QueryTree) -> Result<Observable> {
    answer_string_projector(tree, tree.total_qubits(tree.depth), false)
}

/// Projector onto the answer strings the machine accepts on.
pub fn acceptance_projector(tree: &QueryTree) -> Result<Observable> {
    answer_string_projector(tree, tree.total_qubits(tree.depth), true)
}

/// Query-register Hamiltonian with unique ground energy `2 eps` and all other eigenvalues `3 eps`.
#[derive(Debug, Clone)]
pub struct GadgetH0 {
    pub hamiltonian: LocalHamiltonian,
}

/// `2 eps |0..0><0..0| + 3 eps (I - |0..0><0..0|)`.
pub fn make_h0(epsilon: f64, q: usize) -> Result<GadgetH0> {
    if q == 0 {
        return Err(HamError::InvalidParameter("gadget needs at least one qubit".into()));
    }
    let qubits: Vec<usize> = (0..q).collect();
    let hamiltonian = LocalHamiltonian::from_terms(
        q,
        vec![
            LocalTerm::identity(3.0 * epsilon),
            basis_projector_term(&qubits, &vec![0; q], -epsilon)?,
        ],
    )?;
    Ok(GadgetH0 { hamiltonian })
}

/// `I_B (x) H_d + eps |0><0|_B (x) H'` with `H'` the rejecting-string projector
/// and `H0` in every `y = 0` branch of `H_d`.
pub fn gap_hardness_hamiltonian(tree: &QueryTree) -> Result<LocalHamiltonian> {
    if tree.mode == TreeMode::Strict {
        tree.check_unique_promise()?;
    }
    let d = tree.depth;
    let n = tree.total_qubits(d) + 1;
    let h0 = make_h0(tree.epsilon, tree.query_space_qubits)?;
    let mut h = level_hamiltonian(tree, d, ZeroBranch::Gadget(&h0.hamiltonian), n)?;
    let mut qubits = tree.answer_qubits(d);
    qubits.push(n - 1);
    for s in binary_strings(d) {
        if !tree.accepts(&s) {
            let mut bits = string_bits(&s);
            bits.push(0);
            h.push(basis_projector_term(&qubits, &bits, tree.epsilon)?)?;
        }
    }
    Ok(h)
}

/// `H_d` of the gap construction (without `B`).
pub fn gap_hardness_level_hamiltonian(tree: &QueryTree, t: usize) -> Result<LocalHamiltonian> {
    let h0 = make_h0(tree.epsilon, tree.query_space_qubits)?;
    level_hamiltonian(tree, t, ZeroBranch::Gadget(&h0.hamiltonian), tree.total_qubits(t))
}

/// Sector energies of `H_t` split by answer strings `y_1..y_t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorCertificate {
    pub level: usize,
    pub correct_sector: String,
    pub ground_sector: String,
    pub ground_energy: f64,
    pub sector_minima: BTreeMap<String, f64>,
    /// Lowest energy outside the correct sector minus the correct sector's minimum.
    pub margin: f64,
    pub required_margin: f64,
    /// Smallest weight that a ground-space basis vector puts on the correct sector.
    pub ground_overlap: f64,
}

impl SectorCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.ground_sector == self.correct_sector
            && self.margin >= self.required_margin - tol
            && self.ground_overlap >= 1.0 - tol
    }
}

/// Block-diagonal analysis of `H_t` against the correct answer prefix.
pub fn sector_certificate(tree: &QueryTree, t: usize) -> Result<SectorCertificate> {
    let h = query_tree_hamiltonian(tree, t)?;
    let correct: String = tree.correct_answers()?.chars().take(t).collect();
    sector_analysis(tree, &h.assemble_dense()?, t, &correct, tree.epsilon / 4f64.powi(t as i32 - 1))
}

fn sector_analysis(tree: &QueryTree, m: &Matrix, t: usize, correct: &str, required: f64) -> Result<SectorCertificate> {
    let answers = tree.answer_qubits(t);
    let mut minima = BTreeMap::new();
    for s in binary_strings(t) {
        let idx = sector_indices(m.nrows(), &answers, &string_bits(&s));
        minima.insert(s, linalg::eigvalsh(&linalg::principal_submatrix(m, &idx))[0]);
    }
    let (ground_sector, &ground_energy) = minima
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one sector");
    let correct_min = minima[correct];
    let margin = minima
        .iter()
        .filter(|(s, _)| s.as_str() != correct)
        .map(|(_, &e)| e - correct_min)
        .fold(f64::INFINITY, f64::min);

    let (vals, vecs) = linalg::eigh(m);
    let tol = crate::spectral::default_degeneracy_tol(linalg::hermitian_norm(m));
    let inside = sector_indices(m.nrows(), &answers, &string_bits(correct));
    let ground_overlap = (0..vals.len())
        .take_while(|&k| vals[k] <= vals[0] + tol)
        .map(|k| inside.iter().map(|&i| vecs[(i, k)].norm_sqr()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(SectorCertificate {
        level: t,
        correct_sector: correct.to_string(),
        ground_sector: ground_sector.clone(),
        ground_energy,
        sector_minima: minima,
        margin,
        required_margin: required,
        ground_overlap,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapHardnessCertificate {
    pub machine_output: bool,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    /// `eps / 4^d`, the SPECTRAL GAP threshold that decides `M(x)`.
    pub threshold: f64,
    /// `|<1_B (x) ground(H_d) | ground(H_final)>|^2`, meaningful when the ground is unique.
    pub ground_overlap: f64,
}

pub fn gap_hardness_certificate(tree: &QueryTree) -> Result<GapHardnessCertificate> {
    let d = tree.depth;
    let hf = gap_hardness_hamiltonian(tree)?.assemble_dense()?;
    let hd = gap_hardness_level_hamiltonian(tree, d)?.assemble_dense()?;
    let (vf, wf) = linalg::eigh(&hf);
    let (_, wd) = linalg::eigh(&hd);
    let offset = hd.nrows();
    let overlap = (0..offset)
        .map(|i| wd[(i, 0)].conj() * wf[(offset + i, 0)])
        .sum::<linalg::C64>()
        .norm_sqr();
    Ok(GapHardnessCertificate {
        machine_output: tree.machine_output()?,
        lambda1: vf[0],
        lambda2: vf[1],
        gap: vf[1] - vf[0],
        threshold: tree.epsilon / 4f64.powi(d as i32),
        ground_overlap: overlap,
    })
}
