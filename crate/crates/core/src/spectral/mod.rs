//! Exact spectral computations: lowest eigenpairs, gaps, ground-state
//! expectations, low-energy subspaces and the two-projector decomposition.
//!
//! Operators at or below [`DENSE_LIMIT`](crate::linalg::DENSE_LIMIT) are
//! diagonalized densely. Larger ones go through the block Krylov solver in
//! [`lanczos`], which is deterministic for a fixed seed.

pub mod lanczos;

use serde::{Deserialize, Serialize};

use crate::error::{HamError, Result};
use crate::ham::{LocalHamiltonian, Observable, Representation};
use crate::linalg::{self, Matrix, Operator, Vector};

pub use lanczos::KrylovParams;

#[derive(Debug, Clone)]
pub struct SpectralConfig {
    pub representation: Representation,
    pub seed: u64,
    /// Overrides the default `1e-7 * max(1, norm_bound)`.
    pub degeneracy_tol: Option<f64>,
    pub max_basis: usize,
    pub max_iterations: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            representation: Representation::Auto,
            seed: 0x5eed,
            degeneracy_tol: None,
            max_basis: 96,
            max_iterations: 5000,
        }
    }
}

pub fn default_degeneracy_tol(norm_bound: f64) -> f64 {
    1e-7 * norm_bound.max(1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub degeneracy_tol: f64,
    pub ground_degeneracy: usize,
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub basis: Vec<Vector>,
}

impl SpectrumReport {
    fn build(eigenvalues: Vec<f64>, basis: Vec<Vector>, residuals: Vec<f64>, degeneracy_tol: f64) -> Self {
        let ground = eigenvalues[0];
        let ground_degeneracy = eigenvalues
            .iter()
            .take_while(|&&v| v - ground <= degeneracy_tol)
            .count();
        Self {
            eigenvalues,
            degeneracy_tol,
            ground_degeneracy,
            residuals,
            basis,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvectors as little-endian `(re, im)` f64 pairs, one vector after another.
    pub fn basis_sidecar(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for v in &self.basis {
            for z in v.iter() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
}

/// Orthonormal basis of all eigenvectors with eigenvalue at most `threshold`.
#[derive(Debug, Clone)]
pub struct LowEnergySubspace {
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
    /// Columns are the basis vectors.
    pub basis: Matrix,
}

impl LowEnergySubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.adjoint()
    }
}

pub fn lowest_k(h: &LocalHamiltonian, k: usize, tol: Option<f64>) -> Result<SpectrumReport> {
    let cfg = SpectralConfig {
        degeneracy_tol: tol,
        ..SpectralConfig::default()
    };
    lowest_k_with(h, k, &cfg)
}

pub fn lowest_k_with(h: &LocalHamiltonian, k: usize, cfg: &SpectralConfig) -> Result<SpectrumReport> {
    let op = h.assemble_with(cfg.representation)?;
    lowest_k_operator(&op, k, h.norm_bound(), cfg)
}

/// Lowest `k` eigenpairs of an assembled operator; `scale` is a bound on its norm.
pub fn lowest_k_operator(op: &Operator, k: usize, scale: f64, cfg: &SpectralConfig) -> Result<SpectrumReport> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(HamError::InvalidParameter(format!("k = {k} for dimension {dim}")));
    }
    let degeneracy_tol = cfg.degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(scale));
    match op {
        Operator::Dense(m) => {
            let (vals, vecs) = linalg::eigh(m);
            let basis: Vec<Vector> = (0..k).map(|j| vecs.column(j).into_owned()).collect();
            let residuals = basis
                .iter()
                .zip(&vals)
                .map(|(v, &lam)| (m * v - v.scale(lam)).norm())
                .collect();
            Ok(SpectrumReport::build(vals[..k].to_vec(), basis, residuals, degeneracy_tol))
        }
        Operator::Sparse(_) => {
            let params = KrylovParams {
                seed: cfg.seed,
                residual_tol: 1e-10 * scale.max(1.0),
                max_basis: cfg.max_basis,
                max_iterations: cfg.max_iterations,
            };
            let res = lanczos::lowest_eigenpairs(op, k, &params)?;
            Ok(SpectrumReport::build(res.eigenvalues, res.vectors, res.residuals, degeneracy_tol))
        }
    }
}

pub fn spectral_gap(h: &LocalHamiltonian) -> Result<GapReport> {
    let report = lowest_k(h, 2, None)?;
    Ok(gap_from(&report.eigenvalues))
}

pub fn spectral_gap_operator(op: &Operator, scale: f64) -> Result<GapReport> {
    let report = lowest_k_operator(op, 2, scale, &SpectralConfig::default())?;
    Ok(gap_from(&report.eigenvalues))
}

fn gap_from(vals: &[f64]) -> GapReport {
    let (lambda1, lambda2) = (vals[0], vals[1]);
    GapReport {
        lambda1,
        lambda2,
        gap: (lambda2 - lambda1).max(0.0),
    }
}

fn check_same_space(h: &LocalHamiltonian, a: &Observable) -> Result<()> {
    if h.n() != a.n() {
        return Err(HamError::QubitCountMismatch {
            left: h.n(),
            right: a.n(),
        });
    }
    Ok(())
}

/// `<psi|A|psi>` for the unique ground state `psi` of `h`.
pub fn ground_expectation(h: &LocalHamiltonian, a: &Observable) -> Result<f64> {
    check_same_space(h, a)?;
    let report = lowest_k(h, 2.min(1 << h.n()), None)?;
    if report.ground_degeneracy > 1 {
        return Err(HamError::DegenerateGround {
            gap: report.eigenvalues[1] - report.eigenvalues[0],
            tol: report.degeneracy_tol,
        });
    }
    let a_op = a.assemble()?;
    Ok(a_op.expectation(&report.basis[0]))
}

pub fn low_energy_subspace(h: &LocalHamiltonian, threshold: f64) -> Result<LowEnergySubspace> {
    let op = h.assemble()?;
    low_energy_subspace_operator(&op, threshold, h.norm_bound(), &SpectralConfig::default())
}

pub fn low_energy_subspace_operator(
    op: &Operator,
    threshold: f64,
    scale: f64,
    cfg: &SpectralConfig,
) -> Result<LowEnergySubspace> {
    let dim = op.dim();
    let (vals, vecs): (Vec<f64>, Vec<Vector>) = match op {
        Operator::Dense(m) => {
            let (vals, vecs) = linalg::eigh(m);
            let count = vals.iter().take_while(|&&v| v <= threshold).count();
            (vals[..count].to_vec(), (0..count).map(|j| vecs.column(j).into_owned()).collect())
        }
        Operator::Sparse(_) => {
            let mut k = 4.min(dim);
            loop {
                let report = lowest_k_operator(op, k, scale, cfg)?;
                let count = report.eigenvalues.iter().take_while(|&&v| v <= threshold).count();
                if count < k || k == dim {
                    let basis = report.basis.into_iter().take(count).collect();
                    break (report.eigenvalues[..count].to_vec(), basis);
                }
                k = (2 * k).min(dim);
            }
        }
    };
    if vals.is_empty() {
        return Err(HamError::EmptySubspace { threshold });
    }
    Ok(LowEnergySubspace {
        threshold,
        eigenvalues: vals,
        basis: Matrix::from_columns(&vecs),
    })
}

/// Minimum of `<psi|A|psi>` over unit vectors in the low-energy subspace of `h`.
pub fn min_expectation_in_subspace(h: &LocalHamiltonian, a: &Observable, threshold: f64) -> Result<f64> {
    check_same_space(h, a)?;
    let subspace = low_energy_subspace(h, threshold)?;
    let a_op = a.assemble()?;
    Ok(min_expectation_on(&subspace, &a_op))
}

pub fn min_expectation_on(subspace: &LowEnergySubspace, a: &Operator) -> f64 {
    let v = &subspace.basis;
    let av = Matrix::from_columns(&(0..v.ncols()).map(|j| a.matvec(&v.column(j).into_owned())).collect::<Vec<_>>());
    let restricted = v.adjoint() * av;
    linalg::eigvalsh(&restricted)[0]
}

/// One invariant block of `p1 + p2` in the Jordan decomposition of two projectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorBlock {
    pub dim: usize,
    /// Descending within a block.
    pub eigenvalues: Vec<f64>,
    /// Principal angle between the two ranges; present for 2-dimensional blocks.
    pub angle: Option<f64>,
}

pub const PROJECTOR_TOL: f64 = 1e-10;
const ANGLE_TOL: f64 = 1e-11;

fn projector_deviation(p: &Matrix) -> f64 {
    let herm = linalg::hermitian_deviation(p);
    let idem = linalg::max_abs_diff(&(p * p), p);
    herm.max(idem)
}

/// Decomposes `p1 + p2` into 1- and 2-dimensional invariant blocks.
///
/// Each principal angle `alpha` strictly between 0 and pi/2 gives a
/// 2-dimensional block with eigenvalues `2cos^2(alpha/2)` and `2sin^2(alpha/2)`.
/// Intersections of the ranges contribute eigenvalue 2, the parts of one range
/// orthogonal to the other contribute 1, and the joint kernel contributes 0.
pub fn two_projector_spectrum(p1: &Matrix, p2: &Matrix) -> Result<Vec<ProjectorBlock>> {
    if p1.shape() != p2.shape() || p1.nrows() != p1.ncols() {
        return Err(HamError::InvalidParameter("projectors must be square and equal-sized".into()));
    }
    for p in [p1, p2] {
        let deviation = projector_deviation(p);
        if deviation > PROJECTOR_TOL {
            return Err(HamError::NotProjector { deviation });
        }
    }
    let dim = p1.nrows();
    let q1 = linalg::range_basis(p1, 0.5);
    let q2 = linalg::range_basis(p2, 0.5);
    let (r1, r2) = (q1.ncols(), q2.ncols());
    let cosines: Vec<f64> = if r1 == 0 || r2 == 0 {
        Vec::new()
    } else {
        let overlap = q1.adjoint() * &q2;
        overlap
            .singular_values()
            .iter()
            .map(|&s| s.clamp(0.0, 1.0))
            .collect()
    };

    let mut blocks = Vec::new();
    let mut paired = 0usize;
    for &s in &cosines {
        if s >= 1.0 - ANGLE_TOL {
            blocks.push(ProjectorBlock {
                dim: 1,
                eigenvalues: vec![2.0],
                angle: None,
            });
            paired += 1;
        } else if s > ANGLE_TOL {
            let alpha = s.acos();
            blocks.push(ProjectorBlock {
                dim: 2,
                eigenvalues: vec![1.0 + s, 1.0 - s],
                angle: Some(alpha),
            });
            paired += 1;
        }
    }
    let intersections = blocks.iter().filter(|b| b.dim == 1).count();
    let two_dim = paired - intersections;
    let lone = (r1 - paired) + (r2 - paired);
    for _ in 0..lone {
        blocks.push(ProjectorBlock {
            dim: 1,
            eigenvalues: vec![1.0],
            angle: None,
        });
    }
    let used = intersections + 2 * two_dim + lone;
    for _ in used..dim {
        blocks.push(ProjectorBlock {
            dim: 1,
            eigenvalues: vec![0.0],
            angle: None,
        });
    }
    Ok(blocks)
}

/// All eigenvalues carried by the blocks, ascending.
pub fn block_eigenvalues(blocks: &[ProjectorBlock]) -> Vec<f64> {
    let mut vals: Vec<f64> = blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Operator on the doubled space `H (x) H` whose antisymmetric sector is inspected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublingOperator {
    /// `H (x) I + I (x) H`; antisymmetric eigenvalues are `lambda_i + lambda_j`, `i < j`.
    #[default]
    Sum,
    /// `H (x) H`; antisymmetric eigenvalues are `lambda_i * lambda_j`, `i < j`.
    Product,
}

/// Pairs `(i, j)`, `i < j`, indexing the antisymmetric basis
/// `(|i>|j> - |j>|i>)/sqrt(2)` in the order used by [`antisymmetric_restriction`].
pub fn antisymmetric_pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect()
}

/// Matrix of the doubled operator in the orthonormal antisymmetric basis.
pub fn antisymmetric_restriction(h: &Matrix, kind: DoublingOperator) -> Matrix {
    let dim = h.nrows();
    let pairs = antisymmetric_pairs(dim);
    let delta = |a: usize, b: usize| if a == b { linalg::ONE } else { linalg::ZERO };
    // <i j| D |k l>, first factor written first
    let doubled = |i: usize, j: usize, k: usize, l: usize| match kind {
        DoublingOperator::Sum => h[(i, k)] * delta(j, l) + delta(i, k) * h[(j, l)],
        DoublingOperator::Product => h[(i, k)] * h[(j, l)],
    };
    Matrix::from_fn(pairs.len(), pairs.len(), |r, c| {
        let (i, j) = pairs[r];
        let (k, l) = pairs[c];
        (doubled(i, j, k, l) - doubled(i, j, l, k) - doubled(j, i, k, l) + doubled(j, i, l, k)).scale(0.5)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::LocalTerm;
    use crate::linalg::{c, ONE, ZERO};

    fn z(q: usize) -> LocalTerm {
        LocalTerm::pauli(vec![q], "Z", 1.0).unwrap()
    }

    #[test]
    fn z0_two_lowest() {
        let h = LocalHamiltonian::from_terms(1, vec![z(0)]).unwrap();
        let r = lowest_k(&h, 2, None).unwrap();
        assert_eq!(r.eigenvalues, vec![-1.0, 1.0]);
        assert_eq!(r.ground_degeneracy, 1);
    }

    #[test]
    fn z0_z1_three_lowest() {
        let h = LocalHamiltonian::from_terms(2, vec![z(0), z(1)]).unwrap();
        let r = lowest_k(&h, 3, None).unwrap();
        for (got, want) in r.eigenvalues.iter().zip([-2.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(r.ground_degeneracy, 1);
        let g = spectral_gap(&h).unwrap();
        assert!((g.gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gap_of_diag_0_3() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![c(0.0), c(3.0)]));
        let h = LocalHamiltonian::from_dense(1, m, 1.0).unwrap();
        assert!((spectral_gap(&h).unwrap().gap - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_path_matches_dense() {
        let h = LocalHamiltonian::from_terms(
            6,
            (0..6)
                .map(|q| LocalTerm::pauli(vec![q, (q + 1) % 6], "XX", 0.3 + 0.1 * q as f64).unwrap())
                .chain((0..6).map(|q| LocalTerm::pauli(vec![q], "Z", -0.5).unwrap()))
                .collect(),
        )
        .unwrap();
        let dense = lowest_k(&h, 4, None).unwrap();
        let cfg = SpectralConfig {
            representation: Representation::Sparse,
            max_basis: 20,
            ..SpectralConfig::default()
        };
        let sparse = lowest_k_with(&h, 4, &cfg).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        let again = lowest_k_with(&h, 4, &cfg).unwrap();
        assert_eq!(sparse.eigenvalues, again.eigenvalues);
    }

    #[test]
    fn ground_expectation_cases() {
        let h = LocalHamiltonian::from_terms(1, vec![z(0)]).unwrap();
        let a_z = LocalHamiltonian::from_terms(1, vec![z(0)]).unwrap();
        let a_x = LocalHamiltonian::from_terms(1, vec![LocalTerm::pauli(vec![0], "X", 1.0).unwrap()]).unwrap();
        assert!((ground_expectation(&h, &a_z).unwrap() + 1.0).abs() < 1e-12);
        assert!(ground_expectation(&h, &a_x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ground_expectation_refuses_degenerate() {
        let h = LocalHamiltonian::from_terms(2, vec![z(0)]).unwrap();
        let a = LocalHamiltonian::from_terms(2, vec![z(1)]).unwrap();
        assert!(matches!(ground_expectation(&h, &a), Err(HamError::DegenerateGround { .. })));
    }

    #[test]
    fn min_expectation_cases() {
        let h = LocalHamiltonian::from_terms(1, vec![z(0)]).unwrap();
        let a = LocalHamiltonian::from_terms(1, vec![LocalTerm::projector(0, 1, 1.0)]).unwrap();
        // ground of Z is |1>
        assert!((min_expectation_in_subspace(&h, &a, -0.5).unwrap() - 1.0).abs() < 1e-12);
        let a_x = LocalHamiltonian::from_terms(1, vec![LocalTerm::pauli(vec![0], "X", 1.0).unwrap()]).unwrap();
        assert!((min_expectation_in_subspace(&h, &a_x, 10.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(
            min_expectation_in_subspace(&h, &a, -2.0),
            Err(HamError::EmptySubspace { .. })
        ));
    }

    #[test]
    fn low_energy_projector_commutes() {
        let h = LocalHamiltonian::from_terms(
            3,
            vec![
                LocalTerm::pauli(vec![0, 1], "XX", 0.4).unwrap(),
                LocalTerm::pauli(vec![1, 2], "ZY", -0.7).unwrap(),
                z(2),
            ],
        )
        .unwrap();
        let sub = low_energy_subspace(&h, 0.0).unwrap();
        let p = sub.projector();
        let m = h.assemble_dense().unwrap();
        let comm = &p * &m - &m * &p;
        assert!(linalg::hermitian_norm(&(&comm * comm.adjoint())).sqrt() < 1e-7);
    }

    #[test]
    fn two_projector_identical() {
        let p = linalg::bit_projector(0);
        let blocks = two_projector_spectrum(&p, &p).unwrap();
        assert_eq!(block_eigenvalues(&blocks), vec![0.0, 2.0]);
        assert!(blocks.iter().all(|b| b.dim == 1));
    }

    #[test]
    fn two_projector_zero_and_plus() {
        let p1 = linalg::bit_projector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Vector::from_vec(vec![c(s), c(s)]);
        let p2 = &plus * plus.adjoint();
        let blocks = two_projector_spectrum(&p1, &p2).unwrap();
        assert_eq!(blocks.len(), 1);
        let b = &blocks[0];
        let alpha = b.angle.unwrap();
        assert!((alpha - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let dense = linalg::eigvalsh(&(&p1 + &p2));
        assert!((b.eigenvalues[0] - dense[1]).abs() < 1e-12);
        assert!((b.eigenvalues[1] - dense[0]).abs() < 1e-12);
        assert!((b.eigenvalues[0] - 2.0 * (alpha / 2.0).cos().powi(2)).abs() < 1e-12);
        assert!((b.eigenvalues[0] - 1.707_106_781_186_547_5).abs() < 1e-12);
    }

    #[test]
    fn commuting_projectors_give_integer_spectrum() {
        let p1 = Matrix::from_diagonal(&Vector::from_vec(vec![ONE, ONE, ZERO, ZERO]));
        let p2 = Matrix::from_diagonal(&Vector::from_vec(vec![ONE, ZERO, ONE, ZERO]));
        let vals = block_eigenvalues(&two_projector_spectrum(&p1, &p2).unwrap());
        assert_eq!(vals, vec![0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn non_projector_rejected() {
        let bad = Matrix::from_diagonal(&Vector::from_vec(vec![c(0.5), ZERO]));
        let p = linalg::bit_projector(0);
        assert!(matches!(two_projector_spectrum(&bad, &p), Err(HamError::NotProjector { .. })));
    }
}
