//! Promise-problem oracles backed by exact diagonalization.
//!
//! Every decision is a function of the exact spectrum. In strict mode an
//! instance whose spectrum satisfies neither case of its definition comes
//! back as [`Verdict::PromiseViolated`]. Adversarial mode replaces that
//! verdict with a bit chosen by a fixed policy or a seeded RNG, which is how
//! a real promise oracle is allowed to behave.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HamError, Result};
use crate::ham::{LocalHamiltonian, Observable};
use crate::linalg::{self, Matrix};
use crate::spectral::{self, DoublingOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Yes,
    No,
    PromiseViolated,
}

impl Verdict {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Verdict::Yes => Some(true),
            Verdict::No => Some(false),
            Verdict::PromiseViolated => None,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::PromiseViolated => "PROMISE_VIOLATED",
        })
    }
}

/// Spectral facts behind a verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessInfo {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromiseDecision {
    pub value: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_info: Option<WitnessInfo>,
}

impl PromiseDecision {
    pub fn new(value: Verdict, info: WitnessInfo) -> Self {
        Self {
            value,
            witness_info: Some(info),
        }
    }
}

/// Answer policy when the promise fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    Strict,
    Adversarial(bool),
}

impl OracleMode {
    fn resolve(self, value: Verdict) -> Verdict {
        match (self, value) {
            (OracleMode::Adversarial(bit), Verdict::PromiseViolated) => Verdict::from_bit(bit),
            _ => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PromiseInstance {
    /// Ground energy at most `a` (YES) or at least `b` (NO).
    Lh { hamiltonian: LocalHamiltonian, a: f64, b: f64 },
    /// As `Lh`, and in the YES case every other eigenvalue is at least `b`.
    UniqueLh { hamiltonian: LocalHamiltonian, a: f64, b: f64 },
    /// Ground energy inside `[a - epsilon, a + epsilon]` (YES) or outside
    /// `[a - epsilon - delta, a + epsilon + delta]` (NO).
    ExactLh {
        hamiltonian: LocalHamiltonian,
        a: f64,
        epsilon: f64,
        delta: f64,
    },
    /// Gap at most `epsilon` (YES) or at least `2 epsilon` (NO).
    Gap { hamiltonian: LocalHamiltonian, epsilon: f64 },
    /// Some ground state has `<A> <= alpha1` (YES), or every state with
    /// energy at most `lambda1 + epsilon` has `<A> >= alpha2` (NO).
    ApproxSim {
        hamiltonian: LocalHamiltonian,
        observable: Observable,
        alpha1: f64,
        alpha2: f64,
        epsilon: f64,
    },
    /// Some state in the span of eigenvectors with eigenvalue at most
    /// `energy_threshold` has `<A> <= alpha1` (YES), or all have `<A> >= alpha2` (NO).
    SubspaceExpectation {
        hamiltonian: LocalHamiltonian,
        observable: Observable,
        energy_threshold: f64,
        alpha1: f64,
        alpha2: f64,
    },
    /// Some antisymmetric state of the doubled system has energy at most `threshold`.
    AntisymmetricEnergy {
        hamiltonian: LocalHamiltonian,
        operator: DoublingOperator,
        threshold: f64,
    },
}

impl PromiseInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            PromiseInstance::Lh { .. } => "LH",
            PromiseInstance::UniqueLh { .. } => "UNIQUE_LH",
            PromiseInstance::ExactLh { .. } => "EXACT_LH",
            PromiseInstance::Gap { .. } => "GAP",
            PromiseInstance::ApproxSim { .. } => "APPROX_SIM",
            PromiseInstance::SubspaceExpectation { .. } => "SUBSPACE_EXPECTATION",
            PromiseInstance::AntisymmetricEnergy { .. } => "ANTISYMMETRIC_ENERGY",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HamError::InvalidParameter(msg));
        match self {
            PromiseInstance::Lh { a, b, .. } | PromiseInstance::UniqueLh { a, b, .. } if !(b > a) => {
                bad(format!("need b > a, got a = {a}, b = {b}"))
            }
            PromiseInstance::ExactLh { epsilon, delta, .. } if !(*epsilon > 0.0 && *delta > 0.0) => {
                bad(format!("need epsilon, delta > 0, got {epsilon}, {delta}"))
            }
            PromiseInstance::Gap { epsilon, .. } if !(*epsilon > 0.0) => bad(format!("need epsilon > 0, got {epsilon}")),
            PromiseInstance::ApproxSim {
                hamiltonian,
                observable,
                alpha1,
                alpha2,
                epsilon,
            } => {
                if !(alpha2 > alpha1) {
                    return bad(format!("need alpha2 > alpha1, got {alpha1}, {alpha2}"));
                }
                if !(*epsilon > 0.0) {
                    return bad(format!("need epsilon > 0, got {epsilon}"));
                }
                same_space(hamiltonian, observable)
            }
            PromiseInstance::SubspaceExpectation {
                hamiltonian,
                observable,
                alpha1,
                alpha2,
                ..
            } => {
                if !(alpha2 > alpha1) {
                    return bad(format!("need alpha2 > alpha1, got {alpha1}, {alpha2}"));
                }
                same_space(hamiltonian, observable)
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

fn same_space(h: &LocalHamiltonian, a: &Observable) -> Result<()> {
    if h.n() != a.n() {
        return Err(HamError::QubitCountMismatch {
            left: h.n(),
            right: a.n(),
        });
    }
    Ok(())
}

fn lowest_two(h: &LocalHamiltonian) -> Result<(f64, Option<f64>)> {
    let dim = h.dim()?;
    let report = spectral::lowest_k(h, 2.min(dim), None)?;
    Ok((report.eigenvalues[0], report.eigenvalues.get(1).copied()))
}

/// LOCAL HAMILTONIAN(H, a, b); `lambda1 == a` counts as YES.
pub fn decide_lh(h: &LocalHamiltonian, a: f64, b: f64, mode: OracleMode) -> Result<PromiseDecision> {
    if !(b > a) {
        return Err(HamError::InvalidParameter(format!("need b > a, got a = {a}, b = {b}")));
    }
    let (lambda1, lambda2) = lowest_two(h)?;
    let value = if lambda1 <= a {
        Verdict::Yes
    } else if lambda1 >= b {
        Verdict::No
    } else {
        Verdict::PromiseViolated
    };
    Ok(PromiseDecision::new(
        mode.resolve(value),
        WitnessInfo {
            lambda1: Some(lambda1),
            lambda2,
            expectation: None,
        },
    ))
}

/// UNIQUE LOCAL HAMILTONIAN(H, a, b).
pub fn decide_unique_lh(h: &LocalHamiltonian, a: f64, b: f64, mode: OracleMode) -> Result<PromiseDecision> {
    if !(b > a) {
        return Err(HamError::InvalidParameter(format!("need b > a, got a = {a}, b = {b}")));
    }
    let (lambda1, lambda2) = lowest_two(h)?;
    let second = lambda2.unwrap_or(f64::INFINITY);
    let value = if lambda1 <= a && second >= b {
        Verdict::Yes
    } else if lambda1 >= b {
        Verdict::No
    } else {
        Verdict::PromiseViolated
    };
    Ok(PromiseDecision::new(
        mode.resolve(value),
        WitnessInfo {
            lambda1: Some(lambda1),
            lambda2,
            expectation: None,
        },
    ))
}

/// Checks each definition directly against the dense spectrum.
pub fn decide_instance(instance: &PromiseInstance, mode: OracleMode) -> Result<PromiseDecision> {
    instance.validate()?;
    match instance {
        PromiseInstance::Lh { hamiltonian, a, b } => decide_lh(hamiltonian, *a, *b, mode),
        PromiseInstance::UniqueLh { hamiltonian, a, b } => decide_unique_lh(hamiltonian, *a, *b, mode),
        PromiseInstance::ExactLh {
            hamiltonian,
            a,
            epsilon,
            delta,
        } => {
            let (lambda1, lambda2) = lowest_two(hamiltonian)?;
            let value = if (a - epsilon..=a + epsilon).contains(&lambda1) {
                Verdict::Yes
            } else if lambda1 < a - epsilon - delta || lambda1 > a + epsilon + delta {
                Verdict::No
            } else {
                Verdict::PromiseViolated
            };
            Ok(PromiseDecision::new(
                mode.resolve(value),
                WitnessInfo {
                    lambda1: Some(lambda1),
                    lambda2,
                    expectation: None,
                },
            ))
        }
        PromiseInstance::Gap { hamiltonian, epsilon } => {
            let gap = spectral::spectral_gap(hamiltonian)?;
            let value = if gap.gap <= *epsilon {
                Verdict::Yes
            } else if gap.gap >= 2.0 * epsilon {
                Verdict::No
            } else {
                Verdict::PromiseViolated
            };
            Ok(PromiseDecision::new(
                mode.resolve(value),
                WitnessInfo {
                    lambda1: Some(gap.lambda1),
                    lambda2: Some(gap.lambda2),
                    expectation: None,
                },
            ))
        }
        PromiseInstance::ApproxSim {
            hamiltonian,
            observable,
            alpha1,
            alpha2,
            epsilon,
        } => {
            let check = approx_sim_reference(hamiltonian, observable, *epsilon)?;
            let tol = expectation_tol(observable);
            let value = if check.ground_min <= alpha1 + tol {
                Verdict::Yes
            } else if check.window_min >= alpha2 - tol {
                Verdict::No
            } else {
                Verdict::PromiseViolated
            };
            Ok(PromiseDecision::new(
                mode.resolve(value),
                WitnessInfo {
                    lambda1: Some(check.lambda1),
                    lambda2: None,
                    expectation: Some(check.ground_min),
                },
            ))
        }
        PromiseInstance::SubspaceExpectation {
            hamiltonian,
            observable,
            energy_threshold,
            alpha1,
            alpha2,
        } => {
            let value_min = spectral::min_expectation_in_subspace(hamiltonian, observable, *energy_threshold)?;
            let tol = expectation_tol(observable);
            let value = if value_min <= alpha1 + tol {
                Verdict::Yes
            } else if value_min >= alpha2 - tol {
                Verdict::No
            } else {
                Verdict::PromiseViolated
            };
            Ok(PromiseDecision::new(
                mode.resolve(value),
                WitnessInfo {
                    lambda1: None,
                    lambda2: None,
                    expectation: Some(value_min),
                },
            ))
        }
        PromiseInstance::AntisymmetricEnergy {
            hamiltonian,
            operator,
            threshold,
        } => {
            let restricted = spectral::antisymmetric_restriction(&hamiltonian.assemble_dense()?, *operator);
            let min = linalg::eigvalsh(&restricted)
                .first()
                .copied()
                .ok_or_else(|| HamError::InvalidParameter("antisymmetric sector is empty".into()))?;
            Ok(PromiseDecision::new(
                Verdict::from_bit(min <= *threshold),
                WitnessInfo {
                    lambda1: Some(min),
                    lambda2: None,
                    expectation: None,
                },
            ))
        }
    }
}

/// Slack on `<A>` comparisons; eigensolver noise is far below it.
pub fn expectation_tol(a: &Observable) -> f64 {
    1e-9 * a.norm_bound().max(1.0)
}

/// Brute-force quantities behind the APPROX-SIMULATION definition.
#[derive(Debug, Clone, Copy)]
pub struct ApproxSimCheck {
    pub lambda1: f64,
    /// min `<A>` over the (possibly degenerate) ground eigenspace.
    pub ground_min: f64,
    /// min `<A>` over all unit states with `<H> <= lambda1 + epsilon`.
    pub window_min: f64,
}

/// Evaluates both sides of the APPROX-SIMULATION definition.
///
/// The window minimum is a minimization over the joint numerical range of
/// `(H, A)`, which is convex, so it equals the Lagrangian dual
/// `max_{mu >= 0} lambda_min(A + mu (H - (lambda1 + epsilon) I))`. The dual is
/// concave in `mu` and is maximized by golden-section search.
pub fn approx_sim_reference(h: &LocalHamiltonian, a: &Observable, epsilon: f64) -> Result<ApproxSimCheck> {
    same_space(h, a)?;
    let hm = h.assemble_dense()?;
    let am = a.assemble_dense()?;
    let (vals, vecs) = linalg::eigh(&hm);
    let lambda1 = vals[0];
    let tol = spectral::default_degeneracy_tol(h.norm_bound());
    let ground: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] - lambda1 <= tol).collect();
    let g = Matrix::from_columns(&ground.iter().map(|&j| vecs.column(j).into_owned()).collect::<Vec<_>>());
    let ground_min = linalg::eigvalsh(&(g.adjoint() * &am * &g))[0];

    let dim = hm.nrows();
    let shifted = &hm - Matrix::identity(dim, dim).scale(lambda1 + epsilon);
    let dual = |mu: f64| linalg::eigvalsh(&(&am + shifted.scale(mu)))[0];
    let a_min = linalg::eigvalsh(&am)[0];
    let mut lo = 0.0;
    let mut hi = ((ground_min - a_min).max(0.0) / epsilon) * 1.01 + 1e-12;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (dual(x1), dual(x2));
    for _ in 0..120 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = dual(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = dual(x1);
        }
    }
    let window_min = f1.max(f2).max(dual(0.0)).min(ground_min);
    Ok(ApproxSimCheck {
        lambda1,
        ground_min,
        window_min,
    })
}

/// EXACT-SIMULATION checker: YES if some ground state has `<A> <= alpha1`,
/// NO if no ground state has `<A> <= alpha2`.
pub fn exact_simulation_reference(h: &LocalHamiltonian, a: &Observable, alpha1: f64, alpha2: f64) -> Result<Verdict> {
    let check = approx_sim_reference(h, a, 1.0)?;
    let tol = expectation_tol(a);
    Ok(if check.ground_min <= alpha1 + tol {
        Verdict::Yes
    } else if check.ground_min > alpha2 + tol {
        Verdict::No
    } else {
        Verdict::PromiseViolated
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub kind: String,
    pub digest: String,
    pub verdict: Verdict,
    /// The answer bit the caller received; absent for a strict-mode violation.
    pub bit: Option<u8>,
}

/// Append-only record of oracle queries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleTranscript {
    entries: Vec<TranscriptEntry>,
}

impl OracleTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Re-indexes `entries` from zero.
    pub fn from_entries(entries: Vec<TranscriptEntry>) -> Self {
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(index, e)| TranscriptEntry { index, ..e })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn query_count(&self) -> usize {
        self.entries.len()
    }

    pub fn bits(&self) -> Vec<Option<u8>> {
        self.entries.iter().map(|e| e.bit).collect()
    }

    fn append(&mut self, instance: &PromiseInstance, verdict: Verdict, bit: Option<bool>) {
        self.entries.push(TranscriptEntry {
            index: self.entries.len(),
            kind: instance.kind().to_string(),
            digest: instance.digest(),
            verdict,
            bit: bit.map(u8::from),
        });
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("entry serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<TranscriptEntry>, _>>()?;
        Ok(Self { entries })
    }
}

/// What the oracle does when an instance violates its promise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdversarialPolicy {
    #[default]
    Strict,
    Fixed(bool),
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    pub decision: PromiseDecision,
    pub bit: Option<bool>,
}

/// Anything a solver can send promise instances to.
pub trait Oracle {
    fn record(&mut self, instance: &PromiseInstance) -> Result<QueryOutcome>;
    fn transcript(&self) -> &OracleTranscript;
}

/// Exact spectral oracle that records every query it answers.
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    policy: AdversarialPolicy,
    rng: Option<ChaCha8Rng>,
    transcript: OracleTranscript,
}

impl Default for SpectralOracle {
    fn default() -> Self {
        Self::new(AdversarialPolicy::Strict)
    }
}

impl SpectralOracle {
    pub fn new(policy: AdversarialPolicy) -> Self {
        let rng = match policy {
            AdversarialPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self {
            policy,
            rng,
            transcript: OracleTranscript::new(),
        }
    }

    pub fn strict() -> Self {
        Self::default()
    }

    pub fn policy(&self) -> AdversarialPolicy {
        self.policy
    }

    pub fn into_transcript(self) -> OracleTranscript {
        self.transcript
    }
}

impl Oracle for SpectralOracle {
    fn transcript(&self) -> &OracleTranscript {
        &self.transcript
    }

    /// Answers `instance` and appends it to the transcript.
    fn record(&mut self, instance: &PromiseInstance) -> Result<QueryOutcome> {
        let exact = decide_instance(instance, OracleMode::Strict)?;
        let decision = match (exact.value, self.policy) {
            (Verdict::PromiseViolated, AdversarialPolicy::Fixed(bit)) => PromiseDecision {
                value: Verdict::from_bit(bit),
                ..exact
            },
            (Verdict::PromiseViolated, AdversarialPolicy::Seeded(_)) => {
                let bit = self.rng.as_mut().expect("seeded policy owns an rng").random::<bool>();
                PromiseDecision {
                    value: Verdict::from_bit(bit),
                    ..exact
                }
            }
            _ => exact,
        };
        let bit = decision.value.bit();
        self.transcript.append(instance, decision.value, bit);
        Ok(QueryOutcome { decision, bit })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::LocalTerm;
    use crate::linalg::{c, Vector};

    fn z0() -> LocalHamiltonian {
        LocalHamiltonian::from_terms(1, vec![LocalTerm::pauli(vec![0], "Z", 1.0).unwrap()]).unwrap()
    }

    fn diag(values: &[f64]) -> LocalHamiltonian {
        let n = values.len().trailing_zeros() as usize;
        let m = Matrix::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&v| c(v))));
        LocalHamiltonian::from_dense(n, m, 1.0).unwrap()
    }

    #[test]
    fn lh_cases() {
        assert_eq!(decide_lh(&z0(), 0.0, 1.0, OracleMode::Strict).unwrap().value, Verdict::Yes);
        let shifted = z0().shifted(2.0);
        assert_eq!(decide_lh(&shifted, 0.0, 0.5, OracleMode::Strict).unwrap().value, Verdict::No);
        assert_eq!(
            decide_lh(&z0(), -1.5, -0.5, OracleMode::Strict).unwrap().value,
            Verdict::PromiseViolated
        );
        assert_eq!(
            decide_lh(&z0(), -1.5, -0.5, OracleMode::Adversarial(false)).unwrap().value,
            Verdict::No
        );
        // threshold equality is inclusive
        assert_eq!(decide_lh(&z0(), -1.0, 0.0, OracleMode::Strict).unwrap().value, Verdict::Yes);
        assert!(decide_lh(&z0(), 1.0, 1.0, OracleMode::Strict).is_err());
    }

    #[test]
    fn unique_lh_cases() {
        let h = diag(&[0.0, 1.0, 1.0, 1.0]);
        assert_eq!(decide_unique_lh(&h, 0.1, 0.9, OracleMode::Strict).unwrap().value, Verdict::Yes);
        let degenerate = diag(&[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(
            decide_unique_lh(&degenerate, 0.1, 0.9, OracleMode::Strict).unwrap().value,
            Verdict::PromiseViolated
        );
        // rank-one well 2e|0><0| + 3e(I - |0><0|) at e = 0.1: lambda1 = 0.2 >= b
        let gadget = diag(&[0.2, 0.3, 0.3, 0.3]);
        let d = decide_unique_lh(&gadget, 0.1, 0.15, OracleMode::Strict).unwrap();
        assert_eq!(d.value, Verdict::No);
        assert!((d.witness_info.unwrap().lambda1.unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn transcript_growth_and_replay() {
        let inst = PromiseInstance::Lh {
            hamiltonian: z0(),
            a: 0.0,
            b: 1.0,
        };
        let mut oracle = SpectralOracle::strict();
        assert_eq!(oracle.transcript().query_count(), 0);
        oracle.record(&inst).unwrap();
        assert_eq!(oracle.transcript().query_count(), 1);
        oracle.record(&inst).unwrap();
        assert_eq!(oracle.transcript().query_count(), 2);
        let e = &oracle.transcript().entries()[1];
        assert_eq!((e.index, e.bit), (1, Some(1)));

        let mut replay = SpectralOracle::strict();
        replay.record(&inst).unwrap();
        replay.record(&inst).unwrap();
        assert_eq!(replay.transcript(), oracle.transcript());
        let text = oracle.transcript().to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(&OracleTranscript::from_jsonl(&text).unwrap(), oracle.transcript());
    }

    #[test]
    fn digest_is_stable_under_reserialization() {
        let inst = PromiseInstance::Gap {
            hamiltonian: z0().scale(0.1).shifted(1.0 / 3.0),
            epsilon: 0.07,
        };
        let back: PromiseInstance = serde_json::from_str(&inst.to_json()).unwrap();
        assert_eq!(back.digest(), inst.digest());
        assert_eq!(inst.digest().len(), 64);
    }

    #[test]
    fn seeded_adversary_is_reproducible() {
        let inst = PromiseInstance::Lh {
            hamiltonian: z0(),
            a: -1.5,
            b: -0.5,
        };
        let run = |seed| {
            let mut o = SpectralOracle::new(AdversarialPolicy::Seeded(seed));
            (0..16).map(|_| o.record(&inst).unwrap().bit.unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        let mut strict = SpectralOracle::strict();
        let out = strict.record(&inst).unwrap();
        assert_eq!((out.decision.value, out.bit), (Verdict::PromiseViolated, None));
    }

    #[test]
    fn approx_sim_reference_window_includes_mixtures() {
        // H = diag(0, 1), A = diag(1, 0): states with <H> <= 0.25 reach <A> = 0.75
        let h = diag(&[0.0, 1.0]);
        let a = diag(&[1.0, 0.0]);
        let check = approx_sim_reference(&h, &a, 0.25).unwrap();
        assert!((check.ground_min - 1.0).abs() < 1e-12);
        assert!((check.window_min - 0.75).abs() < 1e-9, "{}", check.window_min);
    }

    #[test]
    fn exact_simulation_checker() {
        let h = diag(&[0.0, 0.0, 1.0, 1.0]);
        let a = diag(&[0.5, -0.5, 0.0, 0.0]);
        assert_eq!(exact_simulation_reference(&h, &a, -0.4, 0.0).unwrap(), Verdict::Yes);
        assert_eq!(exact_simulation_reference(&h, &a, -0.8, -0.6).unwrap(), Verdict::No);
    }

    #[test]
    fn invalid_instances_rejected() {
        let inst = PromiseInstance::ApproxSim {
            hamiltonian: z0(),
            observable: z0(),
            alpha1: 1.0,
            alpha2: 0.0,
            epsilon: 0.1,
        };
        assert!(decide_instance(&inst, OracleMode::Strict).is_err());
    }
}
