//! Complex dense/sparse matrix plumbing shared by every other module.
//!
//! Qubit 0 is the least-significant bit of a computational-basis index, so
//! `kron(a, b)` places `b` on the low-order qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{HamError, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Full-space dimension at or below which operators are assembled densely.
pub const DENSE_LIMIT: usize = 1 << 12;

/// Hard cap on the full-space dimension unless `HAMLAB_DIM_CAP` overrides it.
pub const DEFAULT_DIM_CAP: usize = 1 << 16;

pub fn dim_cap() -> usize {
    std::env::var("HAMLAB_DIM_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// Checks `2^n` against the dimension cap and returns it.
pub fn checked_dim(n: usize) -> Result<usize> {
    let cap = dim_cap();
    if n >= usize::BITS as usize - 1 {
        return Err(HamError::DimensionCap { dim: usize::MAX, cap });
    }
    let dim = 1usize << n;
    if dim > cap {
        return Err(HamError::DimensionCap { dim, cap });
    }
    Ok(dim)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Max elementwise |M - M^dagger|.
pub fn hermitian_deviation(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Max elementwise |a - b|.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max elementwise |U U^dagger - I|.
pub fn unitary_deviation(u: &Matrix) -> f64 {
    let prod = u * u.adjoint();
    max_abs_diff(&prod, &Matrix::identity(u.nrows(), u.ncols()))
}

/// Projector |b><b| on one qubit.
pub fn bit_projector(bit: u8) -> Matrix {
    let mut p = Matrix::zeros(2, 2);
    let k = usize::from(bit != 0);
    p[(k, k)] = ONE;
    p
}

pub fn pauli(label: char) -> Option<Matrix> {
    let i = C64::new(0.0, 1.0);
    let m = match label {
        'I' => Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        'X' => Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        'Y' => Matrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        'Z' => Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => return None,
    };
    Some(m)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
/// Column `j` of the returned matrix is the eigenvector for eigenvalue `j`.
pub fn eigh(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    // symmetrize so round-off in the input cannot leak into the solver
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &Matrix) -> Vec<f64> {
    eigh(m).0
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn hermitian_norm(m: &Matrix) -> f64 {
    eigvalsh(m).into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Compressed sparse row matrix over complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from coordinate triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                rows.push(r);
                cols.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(values) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: keep_cols,
            values: keep_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        let mut y = Vector::zeros(self.dim);
        for r in 0..self.dim {
            let mut acc = ZERO;
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[idx] * x[self.cols[idx]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[idx])] += self.values[idx];
            }
        }
        m
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |idx| (r, self.cols[idx], self.values[idx]))
        })
    }
}

/// Full-space operator in whichever representation assembly chose.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Dense(Matrix),
    Sparse(CsrMatrix),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(m) => m.nrows(),
            Operator::Sparse(s) => s.dim(),
        }
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        match self {
            Operator::Dense(m) => m * x,
            Operator::Sparse(s) => s.matvec(x),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Sparse(s) => s.to_dense(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Operator::Dense(_))
    }

    /// <x|A|x> for a normalized x.
    pub fn expectation(&self, x: &Vector) -> f64 {
        x.dotc(&self.matvec(x)).re
    }
}

/// Matrix with orthonormal columns spanning the range of the columns of `m`,
/// computed from the eigenvectors of `m m^dagger` above `tol`.
pub fn range_basis(m: &Matrix, tol: f64) -> Matrix {
    let gram = m * m.adjoint();
    let (vals, vecs) = eigh(&gram);
    let keep: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > tol).collect();
    let mut out = Matrix::zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &vecs.column(src));
    }
    out
}

/// Submatrix on the given index set (rows and columns).
pub fn principal_submatrix(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}
