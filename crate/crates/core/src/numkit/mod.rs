//! Dense complex linear algebra kernel.
//!
//! Everything in this crate that carries an operator, a density matrix, or a
//! superoperator is a [`ComplexMatrix`]: a dense, row-major, square-or-not
//! complex matrix. The kernel stays deliberately small — matrix algebra,
//! Kronecker products, column-stacking vectorization, LU solves, and a general
//! (non-Hermitian) eigendecomposition good for dimensions up to a few hundred.

use num_complex::Complex64;
use thiserror::Error;

mod eig;

pub use eig::{eig_general, matrix_function_via_spectrum, SpectralDecomposition};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Convenience constructor for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Errors from the linear algebra kernel.
#[derive(Debug, Error)]
pub enum NumError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigensolver did not converge (max subdiagonal residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error(
        "spectrum is defective (eigenvector condition {condition:.3e}); \
         use the dense integrator fallback instead of spectral propagation"
    )]
    DefectiveSpectrum { condition: f64 },
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    /// Build from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows in ComplexMatrix::from_rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Build from real-valued nested rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let converted: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Elementary matrix |i⟩⟨j| on a `dim`-dimensional space.
    pub fn ketbra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(i, j)] = C64::ONE;
        m
    }

    /// Outer product |v⟩⟨w| of two vectors.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in add"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in sub"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "shape mismatch in apply");
        let mut out = vec![C64::ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = C64::ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Symmetrized (self + self†)/2.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square(), "hermitize of a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Solve `self · x = b` for several right-hand sides (columns of `b`)
    /// by LU decomposition with partial pivoting.
    pub fn solve(&self, b: &Self) -> Result<Self, NumError> {
        if !self.is_square() {
            return Err(NumError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if b.rows != self.rows {
            return Err(NumError::DimensionMismatch {
                expected: self.rows,
                got: b.rows,
            });
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = b.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            // partial pivot
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-14 * scale {
                return Err(NumError::Singular);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                for j in 0..x.cols {
                    let t = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = t;
                }
            }
            let piv = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / piv;
                lu[(i, k)] = factor;
                if factor == C64::ZERO {
                    continue;
                }
                for j in (k + 1)..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= factor * v;
                }
                for j in 0..x.cols {
                    let v = x[(k, j)];
                    x[(i, j)] -= factor * v;
                }
            }
        }
        // back substitution
        for j in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k2 in (i + 1)..n {
                    acc -= lu[(i, k2)] * x[(k2, j)];
                }
                x[(i, j)] = acc / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self, NumError> {
        self.solve(&Self::identity(self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product: `out[(i·rb + k, j·cb + l)] = a[(i,j)] · b[(k,l)]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == C64::ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization: `v[i + dim·j] = m[(i, j)]`.
///
/// With this convention `vec(A·X·B) = kron(Bᵀ, A)·vec(X)`, which is what the
/// superoperator assembly in `master` relies on.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    assert!(m.is_square(), "vectorize expects a square matrix");
    let d = m.rows();
    let mut v = vec![C64::ZERO; d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = m[(i, j)];
        }
    }
    v
}

/// Exact inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], dim: usize) -> Result<ComplexMatrix, NumError> {
    if v.len() != dim * dim {
        return Err(NumError::DimensionMismatch {
            expected: dim * dim,
            got: v.len(),
        });
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            m[(i, j)] = v[i + dim * j];
        }
    }
    Ok(m)
}

/// Pauli σx.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ZERO, C64::ONE], vec![C64::ONE, C64::ZERO]])
}

/// Pauli σy.
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), C64::ZERO]])
}

/// Pauli σz (diag(1, −1)).
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![C64::ONE, C64::ZERO], vec![C64::ZERO, -C64::ONE]])
}
