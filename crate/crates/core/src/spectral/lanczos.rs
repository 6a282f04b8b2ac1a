//! Block Krylov eigensolver for the lowest eigenpairs of a Hermitian operator.
//!
//! Block size 2, full reorthogonalization (two Gram-Schmidt passes), and a
//! thick restart that keeps the lowest Ritz vectors together with their
//! images, so no matvec is repeated across restarts. The basis grows by the
//! residuals of the lowest unconverged Ritz pairs, which spans the same space
//! as the next Krylov block. Start vectors come from a seeded ChaCha stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HamError, Result};
use crate::linalg::{self, Matrix, Operator, Vector, C64, ONE};

pub const BLOCK_SIZE: usize = 2;

#[derive(Debug, Clone)]
pub struct KrylovParams {
    pub seed: u64,
    /// Absolute residual target ||A x - theta x||.
    pub residual_tol: f64,
    pub max_basis: usize,
    pub max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct KrylovResult {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vector>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

type Apply<'a> = dyn Fn(&Vector) -> Vector + 'a;

struct Basis {
    v: Vec<Vector>,
    w: Vec<Vector>,
    projected: Matrix,
}

impl Basis {
    fn new() -> Self {
        Self {
            v: Vec::new(),
            w: Vec::new(),
            projected: Matrix::zeros(0, 0),
        }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// Orthogonalizes `x` against the basis twice; returns it with its norm.
    fn orthogonalize(&self, mut x: Vector) -> (Vector, f64) {
        for _ in 0..2 {
            for q in &self.v {
                let coeff = q.dotc(&x);
                x.axpy(-coeff, q, ONE);
            }
        }
        let norm = x.norm();
        (x, norm)
    }

    fn push(&mut self, apply: &Apply, q: Vector) {
        let aq = apply(&q);
        let m = self.len();
        let mut next = Matrix::zeros(m + 1, m + 1);
        next.view_mut((0, 0), (m, m)).copy_from(&self.projected);
        for i in 0..m {
            let entry = self.v[i].dotc(&aq);
            next[(i, m)] = entry;
            next[(m, i)] = entry.conj();
        }
        next[(m, m)] = C64::new(q.dotc(&aq).re, 0.0);
        self.projected = next;
        self.v.push(q);
        self.w.push(aq);
    }

    fn combine<'a>(vectors: &[Vector], coeffs: impl IntoIterator<Item = &'a C64>) -> Vector {
        let mut out = Vector::zeros(vectors[0].len());
        for (vec, &c) in vectors.iter().zip(coeffs) {
            out.axpy(c, vec, ONE);
        }
        out
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Lowest `k` eigenpairs of a Hermitian operator.
///
/// A block Krylov space only sees as many copies of an eigenvalue as its
/// block size, so every converged answer is checked: the found vectors are
/// shifted out of the way and the lowest eigenvalue of what remains is
/// computed. Anything below the `k`-th value is fed back in and the solve
/// repeats.
pub fn lowest_eigenpairs(op: &Operator, k: usize, params: &KrylovParams) -> Result<KrylovResult> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(HamError::InvalidParameter(format!("k = {k} for dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let apply = |x: &Vector| op.matvec(x);
    let mut seeds = Vec::new();
    let mut iterations = 0;
    for _ in 0..dim {
        let mut res = solve(&apply, dim, k, params, &mut rng, &seeds)?;
        iterations += res.iterations;
        res.iterations = iterations;
        if k == dim {
            return Ok(res);
        }
        let lowest = res.eigenvalues[0];
        let top = res.eigenvalues[k - 1];
        let shift = (top - lowest) + top.abs().max(1.0);
        let locked = &res.vectors;
        let deflated = |x: &Vector| {
            let mut y = op.matvec(x);
            for q in locked {
                let coeff = q.dotc(x) * shift;
                y.axpy(coeff, q, ONE);
            }
            y
        };
        let probe = solve(&deflated, dim, 1, params, &mut rng, &[])?;
        iterations += probe.iterations;
        if probe.eigenvalues[0] >= top - 100.0 * params.residual_tol {
            return Ok(res);
        }
        seeds = res.vectors;
        seeds.extend(probe.vectors);
    }
    Err(HamError::NonConvergence {
        iterations,
        residuals: Vec::new(),
    })
}

fn solve(
    apply: &Apply,
    dim: usize,
    k: usize,
    params: &KrylovParams,
    rng: &mut ChaCha8Rng,
    seeds: &[Vector],
) -> Result<KrylovResult> {
    let max_basis = params.max_basis.max(k + 2 * BLOCK_SIZE + seeds.len()).min(dim);
    let keep_on_restart = (k + BLOCK_SIZE).min(max_basis.saturating_sub(BLOCK_SIZE)).max(k);
    let mut basis = Basis::new();

    let add_random = |basis: &mut Basis, rng: &mut ChaCha8Rng| -> bool {
        for _ in 0..8 {
            let (x, norm) = basis.orthogonalize(random_vector(rng, dim));
            if norm > 1e-8 {
                basis.push(apply, x.unscale(norm));
                return true;
            }
        }
        false
    };

    for s in seeds {
        let (x, norm) = basis.orthogonalize(s.clone());
        if norm > 1e-8 {
            basis.push(apply, x.unscale(norm));
        }
    }
    for _ in 0..BLOCK_SIZE.min(dim - basis.len()) {
        add_random(&mut basis, rng);
    }

    let mut last_residuals = Vec::new();
    for iteration in 1..=params.max_iterations {
        let (theta, y) = linalg::eigh(&basis.projected);
        let take = k.min(theta.len());
        let mut ritz = Vec::with_capacity(take);
        let mut residual_vectors = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        for j in 0..take {
            let x = Basis::combine(&basis.v, y.column(j).iter());
            let ax = Basis::combine(&basis.w, y.column(j).iter());
            let r = ax - x.scale(theta[j]);
            residuals.push(r.norm());
            residual_vectors.push(r);
            ritz.push(x);
        }
        last_residuals = residuals.clone();

        let converged = take == k && residuals.iter().all(|&r| r <= params.residual_tol);
        if converged || basis.len() >= dim {
            return Ok(KrylovResult {
                eigenvalues: theta[..take].to_vec(),
                vectors: ritz,
                residuals,
                iterations: iteration,
            });
        }

        if basis.len() + BLOCK_SIZE > max_basis {
            let keep = keep_on_restart.min(theta.len());
            let mut restarted = Basis::new();
            let yk = y.columns(0, keep);
            for j in 0..keep {
                restarted.v.push(Basis::combine(&basis.v, yk.column(j).iter()));
                restarted.w.push(Basis::combine(&basis.w, yk.column(j).iter()));
            }
            restarted.projected = yk.adjoint() * &basis.projected * yk;
            basis = restarted;
        }

        let mut added = 0;
        for (j, r) in residual_vectors.into_iter().enumerate() {
            if added == BLOCK_SIZE {
                break;
            }
            if residuals[j] <= params.residual_tol {
                continue;
            }
            let (x, norm) = basis.orthogonalize(r);
            if norm > 1e-10 * residuals[j].max(1e-300) && norm > 1e-14 {
                basis.push(apply, x.unscale(norm));
                added += 1;
            }
        }
        while added < BLOCK_SIZE && basis.len() < dim {
            if !add_random(&mut basis, rng) {
                break;
            }
            added += 1;
        }
        if added == 0 && basis.len() < dim {
            break;
        }
    }
    Err(HamError::NonConvergence {
        iterations: params.max_iterations,
        residuals: last_residuals,
    })
}
