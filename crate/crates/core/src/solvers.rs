//! Oracle-query decision procedures.
//!
//! * EXACT-LH through two LOCAL HAMILTONIAN queries.
//! * Ground-energy localization by binary search over `[0, 1]`.
//! * APPROX-SIMULATION: binary search plus one subspace-expectation query.
//! * SPECTRAL GAP, directly from the spectrum and through the antisymmetric
//!   sector of the doubled system.
//!
//! Binary search and the procedures built on it first map the spectrum into
//! `[0, 1]` with [`Normalized`]; all returned energies are in the caller's units.

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::ham::{LocalHamiltonian, Observable};
use crate::oracle::{Oracle, OracleTranscript, PromiseDecision, PromiseInstance, Verdict, WitnessInfo};
use crate::spectral::{self, DoublingOperator};

/// Affine image `(H - offset) / scale` of a Hamiltonian with spectrum in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub hamiltonian: LocalHamiltonian,
    pub offset: f64,
    pub scale: f64,
}

impl Normalized {
    /// Uses the per-term spectral bounds, which contain the whole spectrum.
    pub fn new(h: &LocalHamiltonian) -> Self {
        let (lo, hi) = h.spectral_bounds();
        let scale = if hi - lo > 0.0 { hi - lo } else { 1.0 };
        Self {
            hamiltonian: h.shifted(-lo).scale(1.0 / scale),
            offset: lo,
            scale,
        }
    }

    pub fn to_original(&self, energy: f64) -> f64 {
        self.offset + self.scale * energy
    }

    pub fn to_normalized(&self, energy: f64) -> f64 {
        (energy - self.offset) / self.scale
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinarySearchResult {
    /// Lower end of the final bracket.
    pub a: f64,
    pub width: f64,
    pub transcript: OracleTranscript,
}

impl BinarySearchResult {
    pub fn query_count(&self) -> usize {
        self.transcript.query_count()
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.a <= energy && energy <= self.a + self.width
    }
}

/// Upper bound on the number of queries [`binary_search_ground_energy`] makes.
pub fn binary_search_query_bound(epsilon: f64) -> usize {
    (2.0 / epsilon).log2().ceil() as usize + 1
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(HamError::InvalidParameter(format!("{name} must be positive, got {value}")))
    }
}

fn lh_bit(oracle: &mut impl Oracle, h: &LocalHamiltonian, a: f64, b: f64) -> Result<(Verdict, Option<bool>)> {
    let out = oracle.record(&PromiseInstance::Lh {
        hamiltonian: h.clone(),
        a,
        b,
    })?;
    Ok((out.decision.value, out.bit))
}

/// EXACT LOCAL HAMILTONIAN(H, a, epsilon, delta) from two oracle queries:
/// `E1 = LH(H, a + eps, a + eps + delta)` and `E2 = LH(H, a - eps - delta, a - eps)`.
/// YES iff `E1 = YES` and `E2 = NO`. Both queries are always made.
pub fn decide_exact_lh(
    h: &LocalHamiltonian,
    a: f64,
    epsilon: f64,
    delta: f64,
    oracle: &mut impl Oracle,
) -> Result<PromiseDecision> {
    check_positive("epsilon", epsilon)?;
    check_positive("delta", delta)?;
    let (v1, e1) = lh_bit(oracle, h, a + epsilon, a + epsilon + delta)?;
    let (v2, e2) = lh_bit(oracle, h, a - epsilon - delta, a - epsilon)?;
    let value = match (e1, e2) {
        (Some(e1), Some(e2)) => Verdict::from_bit(e1 && !e2),
        _ => {
            debug_assert!(v1 == Verdict::PromiseViolated || v2 == Verdict::PromiseViolated);
            Verdict::PromiseViolated
        }
    };
    Ok(PromiseDecision {
        value,
        witness_info: None,
    })
}

/// Localizes the ground energy of a Hamiltonian whose spectrum lies in `[0, 1]`
/// to a bracket of width at most `epsilon / 2`.
///
/// Each round queries `LH(H, m - delta/4, m + delta/4)` at the midpoint `m`,
/// `delta = epsilon / 2`, and keeps `[a, m + delta/4]` on YES or
/// `[m - delta/4, b]` on NO. Either update contains the ground energy
/// whenever the answer is consistent with it, including arbitrary answers
/// when the ground energy falls inside the query gap; a strict-mode
/// violation is therefore taken as YES.
pub fn binary_search_ground_energy(
    h: &LocalHamiltonian,
    epsilon: f64,
    oracle: &mut impl Oracle,
) -> Result<BinarySearchResult> {
    check_positive("epsilon", epsilon)?;
    let delta = epsilon / 2.0;
    let start = oracle.transcript().query_count();
    let (mut a, mut b) = (0.0f64, 1.0f64);
    while b - a > epsilon / 2.0 {
        let mid = (a + b) / 2.0;
        let (_, bit) = lh_bit(oracle, h, mid - delta / 4.0, mid + delta / 4.0)?;
        if bit.unwrap_or(true) {
            b = mid + delta / 4.0;
        } else {
            a = mid - delta / 4.0;
        }
    }
    let transcript = OracleTranscript::from_entries(oracle.transcript().entries()[start..].to_vec());
    Ok(BinarySearchResult {
        a,
        width: b - a,
        transcript,
    })
}

/// Binary search on the normalized Hamiltonian, bracket mapped back to `h`'s units.
pub fn localize_ground_energy(
    h: &LocalHamiltonian,
    epsilon: f64,
    oracle: &mut impl Oracle,
) -> Result<(Normalized, BinarySearchResult)> {
    check_positive("epsilon", epsilon)?;
    let norm = Normalized::new(h);
    let mut result = binary_search_ground_energy(&norm.hamiltonian, epsilon / norm.scale, oracle)?;
    result.a = norm.to_original(result.a);
    result.width *= norm.scale;
    Ok((norm, result))
}

// absorbs round-off from mapping bracket ends between units
fn slack(scale: f64) -> f64 {
    1e-12 * scale.max(1.0)
}

/// APPROX-SIMULATION(H, A, alpha1, alpha2, epsilon).
///
/// After the bracket `[a, a + eps/2]` is found, one more query asks for the
/// minimum of `<A>` over the span of eigenvectors with eigenvalue at most
/// `a + eps/2`: at most `alpha1` is YES, at least `alpha2` is NO, anything in
/// between violates the promise.
pub fn decide_approx_simulation(
    h: &LocalHamiltonian,
    a_obs: &Observable,
    alpha1: f64,
    alpha2: f64,
    epsilon: f64,
    oracle: &mut impl Oracle,
) -> Result<PromiseDecision> {
    if !(alpha2 > alpha1) {
        return Err(HamError::InvalidParameter(format!(
            "need alpha2 > alpha1, got {alpha1}, {alpha2}"
        )));
    }
    if h.n() != a_obs.n() {
        return Err(HamError::QubitCountMismatch {
            left: h.n(),
            right: a_obs.n(),
        });
    }
    let (norm, bracket) = localize_ground_energy(h, epsilon, oracle)?;
    let threshold = bracket.a + epsilon / 2.0 + slack(norm.scale);
    let out = oracle.record(&PromiseInstance::SubspaceExpectation {
        hamiltonian: h.clone(),
        observable: a_obs.clone(),
        energy_threshold: threshold,
        alpha1,
        alpha2,
    })?;
    Ok(PromiseDecision {
        value: out.decision.value,
        witness_info: Some(WitnessInfo {
            lambda1: None,
            lambda2: None,
            expectation: out.decision.witness_info.and_then(|w| w.expectation),
        }),
    })
}

/// SPECTRAL GAP(H, epsilon) straight from the two lowest eigenvalues.
pub fn decide_spectral_gap_direct(h: &LocalHamiltonian, epsilon: f64) -> Result<PromiseDecision> {
    check_positive("epsilon", epsilon)?;
    let gap = spectral::spectral_gap(h)?;
    let value = if gap.gap <= epsilon {
        Verdict::Yes
    } else if gap.gap >= 2.0 * epsilon {
        Verdict::No
    } else {
        Verdict::PromiseViolated
    };
    Ok(PromiseDecision::new(
        value,
        WitnessInfo {
            lambda1: Some(gap.lambda1),
            lambda2: Some(gap.lambda2),
            expectation: None,
        },
    ))
}

/// SPECTRAL GAP(H, epsilon) through the doubled system.
///
/// Binary search brackets the normalized ground energy in `[a, a + eps/4]`;
/// one more query asks whether the antisymmetric sector of the doubled
/// operator has an eigenvalue at most `2a + 7 eps / 4`. With the sum operator
/// that sector's spectrum is `{lambda_i + lambda_j : i < j}`, so a gap of at
/// most `eps` lands at or below `2a + 3 eps / 2` and a gap of at least `2 eps`
/// at or above `2a + 2 eps`.
pub fn decide_spectral_gap_doubled(
    h: &LocalHamiltonian,
    epsilon: f64,
    operator: DoublingOperator,
    oracle: &mut impl Oracle,
) -> Result<PromiseDecision> {
    check_positive("epsilon", epsilon)?;
    let norm = Normalized::new(h);
    let eps = epsilon / norm.scale;
    let bracket = binary_search_ground_energy(&norm.hamiltonian, eps / 2.0, oracle)?;
    let threshold = 2.0 * bracket.a + 7.0 * eps / 4.0;
    let out = oracle.record(&PromiseInstance::AntisymmetricEnergy {
        hamiltonian: norm.hamiltonian.clone(),
        operator,
        threshold,
    })?;
    // the sector minimum, mapped back: (l_i + l_j) in original units
    let minimum = out.decision.witness_info.and_then(|w| w.lambda1);
    Ok(PromiseDecision {
        value: out.decision.value,
        witness_info: Some(WitnessInfo {
            lambda1: minimum.map(|m| match operator {
                DoublingOperator::Sum => 2.0 * norm.offset + norm.scale * m,
                DoublingOperator::Product => m,
            }),
            lambda2: None,
            expectation: None,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::LocalTerm;
    use crate::linalg::{c, Matrix, Vector};
    use crate::oracle::{AdversarialPolicy, SpectralOracle};

    fn diag(values: &[f64]) -> LocalHamiltonian {
        let n = values.len().trailing_zeros() as usize;
        let m = Matrix::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&v| c(v))));
        LocalHamiltonian::from_dense(n, m, 1.0).unwrap()
    }

    fn z0() -> LocalHamiltonian {
        LocalHamiltonian::from_terms(1, vec![LocalTerm::pauli(vec![0], "Z", 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn exact_lh_center_and_outside() {
        let (eps, delta) = (0.1, 0.05);
        let h = diag(&[0.4, 0.9]);
        let mut oracle = SpectralOracle::strict();
        let d = decide_exact_lh(&h, 0.4, eps, delta, &mut oracle).unwrap();
        assert_eq!(d.value, Verdict::Yes);
        assert_eq!(oracle.transcript().query_count(), 2);
        let far = diag(&[0.4 + eps + 2.0 * delta, 0.9]);
        let mut oracle = SpectralOracle::strict();
        assert_eq!(decide_exact_lh(&far, 0.4, eps, delta, &mut oracle).unwrap().value, Verdict::No);
        let below = diag(&[0.4 - eps - 2.0 * delta, 0.9]);
        assert_eq!(
            decide_exact_lh(&below, 0.4, eps, delta, &mut SpectralOracle::strict()).unwrap().value,
            Verdict::No
        );
        let edge = diag(&[0.4 + eps + delta / 2.0, 0.9]);
        let mut oracle = SpectralOracle::strict();
        assert_eq!(
            decide_exact_lh(&edge, 0.4, eps, delta, &mut oracle).unwrap().value,
            Verdict::PromiseViolated
        );
        assert_eq!(oracle.transcript().query_count(), 2);
    }

    #[test]
    fn binary_search_brackets_zero() {
        let h = diag(&[0.0, 0.6]);
        let mut oracle = SpectralOracle::strict();
        let r = binary_search_ground_energy(&h, 0.05, &mut oracle).unwrap();
        assert!(r.contains(0.0));
        assert!(r.width <= 0.025);
    }

    #[test]
    fn binary_search_single_qubit() {
        // lambda1 = 0.3, eps = 0.1: width <= 0.05, at most ceil(log2 20) + 1 = 6 queries
        let h = diag(&[0.3, 0.8]);
        let mut oracle = SpectralOracle::strict();
        let r = binary_search_ground_energy(&h, 0.1, &mut oracle).unwrap();
        assert!(r.contains(0.3), "{r:?}");
        assert!(r.width <= 0.05);
        assert!(r.query_count() <= 6);
        assert_eq!(binary_search_query_bound(0.1), 6);
    }

    #[test]
    fn binary_search_query_count_grows_linearly() {
        let h = diag(&[0.37, 0.9]);
        let counts: Vec<usize> = (2..=8)
            .map(|k| {
                let eps = 0.5f64.powi(k);
                let mut oracle = SpectralOracle::strict();
                let r = binary_search_ground_energy(&h, eps, &mut oracle).unwrap();
                assert!(r.contains(0.37));
                assert!(r.query_count() <= binary_search_query_bound(eps));
                r.query_count()
            })
            .collect();
        for w in counts.windows(2) {
            assert!(w[1] >= w[0] && w[1] <= w[0] + 2, "{counts:?}");
        }
        assert!(counts[6] >= counts[0] + 5, "{counts:?}");
    }

    #[test]
    fn binary_search_survives_adversarial_answers() {
        let h = diag(&[0.5, 0.75]);
        for policy in [AdversarialPolicy::Fixed(true), AdversarialPolicy::Fixed(false), AdversarialPolicy::Seeded(9)] {
            let mut oracle = SpectralOracle::new(policy);
            let r = binary_search_ground_energy(&h, 1.0 / 64.0, &mut oracle).unwrap();
            assert!(r.contains(0.5), "{policy:?}: {r:?}");
        }
    }

    #[test]
    fn approx_sim_one_qubit() {
        let h = z0();
        let mut oracle = SpectralOracle::strict();
        let d = decide_approx_simulation(&h, &z0(), -0.5, 0.5, 0.1, &mut oracle).unwrap();
        assert_eq!(d.value, Verdict::Yes);
        let bs = binary_search_query_bound(0.1 / 2.0);
        assert!(oracle.transcript().query_count() <= bs + 1);
        assert_eq!(oracle.transcript().entries().last().unwrap().kind, "SUBSPACE_EXPECTATION");
        let d = decide_approx_simulation(&h, &z0().scale(-1.0), -0.5, 0.5, 0.1, &mut SpectralOracle::strict()).unwrap();
        assert_eq!(d.value, Verdict::No);
    }

    #[test]
    fn gap_direct_cases() {
        let eps = 0.1;
        assert_eq!(decide_spectral_gap_direct(&diag(&[0.2, 0.2, 0.5, 0.9]), eps).unwrap().value, Verdict::Yes);
        assert_eq!(decide_spectral_gap_direct(&diag(&[0.2, 0.5]), eps).unwrap().value, Verdict::No);
        assert_eq!(
            decide_spectral_gap_direct(&diag(&[0.2, 0.35]), eps).unwrap().value,
            Verdict::PromiseViolated
        );
    }

    #[test]
    fn gap_doubled_matches_direct() {
        let eps = 0.05;
        for values in [[0.1, 0.12, 0.6, 0.9], [0.1, 0.3, 0.6, 0.9], [0.0, 0.0, 0.0, 1.0], [0.7, 0.95, 0.96, 1.0]] {
            let h = diag(&values);
            let direct = decide_spectral_gap_direct(&h, eps).unwrap().value;
            let mut oracle = SpectralOracle::strict();
            let doubled = decide_spectral_gap_doubled(&h, eps, DoublingOperator::Sum, &mut oracle)
                .unwrap()
                .value;
            assert_eq!(direct, doubled, "{values:?}");
            assert_eq!(oracle.transcript().entries().last().unwrap().kind, "ANTISYMMETRIC_ENERGY");
        }
    }

    #[test]
    fn two_level_antisymmetric_sector() {
        let e = 0.3;
        let r = spectral::antisymmetric_restriction(&diag(&[0.0, e]).assemble_dense().unwrap(), DoublingOperator::Sum);
        assert_eq!(r.nrows(), 1);
        assert!((r[(0, 0)].re - e).abs() < 1e-15);
    }

    #[test]
    fn normalization_round_trip() {
        let h = z0().scale(3.0).shifted(-1.0);
        let norm = Normalized::new(&h);
        let vals = crate::linalg::eigvalsh(&norm.hamiltonian.assemble_dense().unwrap());
        assert!(vals[0] >= -1e-12 && vals[1] <= 1.0 + 1e-12);
        assert!((norm.to_original(norm.to_normalized(0.25)) - 0.25).abs() < 1e-15);
    }
}
