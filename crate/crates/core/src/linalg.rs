//! Dense complex linear algebra for small dimensions.
//!
//! Row vectors of the system model (channels `h_k`, codewords) are stored as
//! `DVector`s holding the row entries; `h w` is then `h.dot(&w)` (no
//! conjugation) and `h^H h` is [`gram_of_row`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative tolerance used when validating Hermitian symmetry.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A Hermitian matrix. Construction validates symmetry and then stores the
/// exact Hermitian part, so the diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian: entry ({i},{j}) differs from conj of ({j},{i}) by {d:e}"
                    )));
                }
            }
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(A + A^H)/2` without validation.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        HermitianMatrix(h)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermitianMatrix(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `v v^H` for a column vector `v`.
    pub fn outer(v: &ComplexVector) -> Self {
        HermitianMatrix(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn diag_real(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `Re tr(self · other)` for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.0[(i, j)];
                let b = other.0[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `w^H A w` (real for Hermitian `A`).
    pub fn quad_form(&self, w: &ComplexVector) -> f64 {
        let aw = &self.0 * w;
        w.dotc(&aw).re
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(&self.0 * C64::new(s, 0.0))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn add_scaled(&mut self, other: &HermitianMatrix, s: f64) {
        self.0 += &other.0 * C64::new(s, 0.0);
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Eigenvalues in descending order and the matching unit eigenvectors as
/// columns.
pub fn hermitian_eig(a: &HermitianMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.dim();
    let eig = SymmetricEigen::new(a.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Validating wrapper over [`hermitian_eig`] for raw matrices.
pub fn hermitian_eig_checked(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    Ok(hermitian_eig(&HermitianMatrix::new(a.clone())?))
}

/// Largest eigenvalue and a unit eigenvector.
pub fn top_eigenpair(a: &HermitianMatrix) -> (f64, ComplexVector) {
    let (vals, vecs) = hermitian_eig(a);
    (vals[0], vecs.column(0).into_owned())
}

pub fn min_eigenvalue(a: &HermitianMatrix) -> f64 {
    let (vals, _) = hermitian_eig(a);
    *vals.last().unwrap()
}

/// Right pseudo-inverse `A^H (A A^H)^{-1}` of a full-row-rank `K x N`
/// matrix, `K <= N`.
pub fn pseudo_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (k, n) = a.shape();
    if k == 0 || k > n {
        return Err(Error::Singular(format!(
            "pseudo-inverse needs K <= N with K >= 1, got {k}x{n}"
        )));
    }
    let gram = a * a.adjoint();
    let (vals, _) = hermitian_eig(&HermitianMatrix::hermitian_part(&gram));
    let top = vals[0];
    let bottom = vals[k - 1];
    if !(top > 0.0) || bottom <= 1e-13 * top {
        return Err(Error::Singular(format!(
            "Gram matrix eigenvalues span [{bottom:e}, {top:e}]"
        )));
    }
    let linv = cholesky_lower(&gram)
        .and_then(|l| l.try_inverse())
        .ok_or_else(|| Error::Singular("Cholesky factorization of A A^H failed".into()))?;
    let inv = linv.adjoint() * linv;
    Ok(a.adjoint() * inv)
}

/// `h^H h` for a row vector `h` stored as a `DVector`: entry `(i, j)` is
/// `conj(h_i) h_j`.
pub fn gram_of_row(h: &ComplexVector) -> HermitianMatrix {
    let c = h.map(|z| z.conj());
    HermitianMatrix::outer(&c)
}

/// Largest generalized eigenvalue of `A v = λ B v` and a unit-norm `v`,
/// for Hermitian `A` and Hermitian positive-definite `B`.
pub fn generalized_top_eigvec(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<(f64, ComplexVector)> {
    let l = cholesky_lower(b.matrix())
        .ok_or_else(|| Error::Singular("generalized eigenproblem: B not positive definite".into()))?;
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Cholesky factor not invertible".into()))?;
    let c = &linv * a.matrix() * linv.adjoint();
    let (lambda, y) = top_eigenpair(&HermitianMatrix::hermitian_part(&c));
    let mut v = linv.adjoint() * y;
    let nrm = v.norm();
    if !(nrm > 0.0) {
        return Err(Error::Singular("degenerate generalized eigenvector".into()));
    }
    v.unscale_mut(nrm);
    Ok((lambda, v))
}

/// Lower Cholesky factor `L` with `L L^H = m` and a real positive
/// diagonal, or `None` unless `m` is (numerically) positive definite.
/// Only the lower triangle of `m` is read.
pub fn cholesky_lower(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.nrows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Orthonormal basis (columns) of the null space of a full-row-rank
/// `r x n` matrix, `r < n`. The result is `n x (n - r)`.
pub fn nullspace_basis(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (r, n) = a.shape();
    if r >= n {
        return Err(Error::Singular(format!(
            "null space of a {r}x{n} matrix is trivial"
        )));
    }
    if r == 0 {
        return Ok(ComplexMatrix::identity(n, n));
    }
    let gram = HermitianMatrix::hermitian_part(&(a.adjoint() * a));
    let (vals, vecs) = hermitian_eig(&gram);
    let top = vals[0];
    if !(top > 0.0) || vals[r - 1] <= 1e-13 * top {
        return Err(Error::Singular("matrix is not of full row rank".into()));
    }
    Ok(vecs.columns(r, n - r).into_owned())
}

/// Column `c` of a matrix as an owned vector.
pub fn column(m: &ComplexMatrix, c: usize) -> ComplexVector {
    m.column(c).into_owned()
}

/// Row `r` of a matrix as a `DVector` of its entries.
pub fn row(m: &ComplexMatrix, r: usize) -> ComplexVector {
    DVector::from_iterator(m.ncols(), m.row(r).iter().copied())
}

/// Stack row vectors into a matrix.
pub fn from_rows(rows: &[ComplexVector]) -> ComplexMatrix {
    let k = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(k, n, |i, j| rows[i][j])
}

/// Place vectors as columns of a matrix.
pub fn from_columns(cols: &[ComplexVector]) -> ComplexMatrix {
    let n = cols.first().map_or(0, |c| c.len());
    let mut m = ComplexMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}
