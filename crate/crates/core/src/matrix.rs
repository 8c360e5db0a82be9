//! Dense complex matrices over [`Scalar`] with tolerance-aware rank, null
//! space, inverse, determinant, and characteristic polynomial.
//!
//! Exact mode runs Gaussian elimination over Gaussian rationals. Float mode
//! delegates rank/null-space decisions to a singular value decomposition
//! (threshold `rank_eps` relative to the largest singular value) and uses
//! partial-pivot elimination for inverse/determinant.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{Scalar, ScalarMode, Tolerance};

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("scalar mode mismatch: {0} vs {1}")]
    ModeMismatch(ScalarMode, ScalarMode),
    #[error("matrix is singular{0}")]
    Singular(&'static str),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrices must be nonempty")]
    Empty,
    #[error("entries do not share a single scalar mode")]
    MixedEntries,
}

/// Row-major dense complex matrix. All entries share one scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixC {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl MatrixC {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let mode = data[0].mode();
        if data.iter().any(|s| s.mode() != mode) {
            return Err(MatrixError::MixedEntries);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Result<Self, MatrixError> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self, MatrixError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(MatrixError::Empty);
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::DimensionMismatch(
                "ragged row lengths".to_string(),
            ));
        }
        let nrows = rows.len();
        Self::new(nrows, cols, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize, mode: ScalarMode) -> Self {
        Self {
            rows,
            cols,
            data: vec![Scalar::zero(mode); rows * cols],
        }
    }

    pub fn identity(n: usize, mode: ScalarMode) -> Self {
        let mut m = Self::zeros(n, n, mode);
        for i in 0..n {
            m[(i, i)] = Scalar::one(mode);
        }
        m
    }

    /// Float matrix from rows of (re, im) pairs.
    pub fn float_from_rows(rows: &[Vec<(f64, f64)>]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(re, im)| Scalar::float(re, im)).collect())
                .collect(),
        )
    }

    /// Float matrix from real entries.
    pub fn float_from_real(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&re| Scalar::float(re, 0.0)).collect())
                .collect(),
        )
    }

    /// Exact matrix from integer entries.
    pub fn exact_from_int(rows: &[&[i64]]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::exact_int(v, 0)).collect())
                .collect(),
        )
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

    pub fn mode(&self) -> ScalarMode {
        self.data[0].mode()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    fn require_square(&self) -> Result<(), MatrixError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_mode(&self, other: &MatrixC) -> Result<(), MatrixError> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(MatrixError::ModeMismatch(self.mode(), other.mode()))
        }
    }

    /// Standard matrix product.
    pub fn mat_mul(&self, rhs: &MatrixC) -> Result<MatrixC, MatrixError> {
        self.require_same_mode(rhs)?;
        if self.cols != rhs.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mode = self.mode();
        let mut out = MatrixC::zeros(self.rows, rhs.cols, mode);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    out.data[idx] = &out.data[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &MatrixC) -> Result<MatrixC, MatrixError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &MatrixC) -> Result<MatrixC, MatrixError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &MatrixC,
        f: impl Fn(&Scalar, &Scalar) -> Scalar,
    ) -> Result<MatrixC, MatrixError> {
        self.require_same_mode(rhs)?;
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(MatrixC {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: &Scalar) -> MatrixC {
        MatrixC {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn neg(&self) -> MatrixC {
        MatrixC {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn trace(&self) -> Result<Scalar, MatrixError> {
        self.require_square()?;
        let mut acc = Scalar::zero(self.mode());
        for i in 0..self.rows {
            acc = &acc + self.get(i, i);
        }
        Ok(acc)
    }

    /// Entrywise max-norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    /// `self^n` by repeated multiplication (n = 0 gives I).
    pub fn pow(&self, n: usize) -> Result<MatrixC, MatrixError> {
        self.require_square()?;
        let mut acc = MatrixC::identity(self.rows, self.mode());
        for _ in 0..n {
            acc = acc.mat_mul(self)?;
        }
        Ok(acc)
    }

    pub fn is_zero_to(&self, eps: f64) -> bool {
        match self.mode() {
            ScalarMode::Exact => self.data.iter().all(|s| s.is_zero()),
            ScalarMode::Float => self.max_abs() <= eps,
        }
    }

    /// Lossy conversion to float mode (identity on float matrices).
    pub fn to_float_mode(&self) -> MatrixC {
        MatrixC {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|s| s.to_float_mode()).collect(),
        }
    }

    /// Inverse via Gauss-Jordan elimination with partial pivoting.
    ///
    /// Float mode treats pivots below `rank_eps * max|entry|` as zero and
    /// verifies `a * inv = I` within `recon_eps`.
    pub fn inverse(&self, tol: &Tolerance) -> Result<MatrixC, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        let mode = self.mode();
        let mut work = self.clone();
        let mut inv = MatrixC::identity(n, mode);
        let pivot_floor = match mode {
            ScalarMode::Exact => 0.0,
            ScalarMode::Float => tol.rank_eps * self.max_abs().max(f64::MIN_POSITIVE),
        };
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&a, &b| {
                    work.get(a, col)
                        .abs()
                        .partial_cmp(&work.get(b, col).abs())
                        .unwrap()
                })
                .unwrap();
            let pivot_ok = match mode {
                ScalarMode::Exact => !work.get(pivot_row, col).is_zero(),
                ScalarMode::Float => work.get(pivot_row, col).abs() > pivot_floor,
            };
            if !pivot_ok {
                return Err(MatrixError::Singular(match mode {
                    ScalarMode::Exact => "",
                    ScalarMode::Float => " to tolerance",
                }));
            }
            work.swap_rows(col, pivot_row);
            inv.swap_rows(col, pivot_row);
            let pivot_inv = work.get(col, col).try_inv().unwrap();
            work.scale_row(col, &pivot_inv);
            inv.scale_row(col, &pivot_inv);
            for r in 0..n {
                if r == col || work.get(r, col).is_zero() {
                    continue;
                }
                let factor = work.get(r, col).clone();
                work.row_axpy(r, col, &factor);
                inv.row_axpy(r, col, &factor);
            }
        }
        if mode == ScalarMode::Float {
            let residual = self
                .mat_mul(&inv)?
                .sub(&MatrixC::identity(n, mode))?
                .max_abs();
            if residual > tol.recon_eps {
                return Err(MatrixError::Singular(" to tolerance"));
            }
        }
        Ok(inv)
    }

    /// Determinant via elimination with partial pivoting.
    pub fn determinant(&self) -> Result<Scalar, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        let mode = self.mode();
        let mut work = self.clone();
        let mut det = Scalar::one(mode);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&a, &b| {
                    work.get(a, col)
                        .abs()
                        .partial_cmp(&work.get(b, col).abs())
                        .unwrap()
                })
                .unwrap();
            if work.get(pivot_row, col).is_zero() {
                return Ok(Scalar::zero(mode));
            }
            if pivot_row != col {
                work.swap_rows(col, pivot_row);
                det = -det;
            }
            det = &det * work.get(col, col);
            let pivot_inv = work.get(col, col).try_inv().unwrap();
            for r in (col + 1)..n {
                if work.get(r, col).is_zero() {
                    continue;
                }
                let factor = &(work.get(r, col) * &pivot_inv);
                for c in col..n {
                    let sub = &(factor * work.get(col, c));
                    let idx = r * n + c;
                    work.data[idx] = &work.data[idx] - sub;
                }
            }
        }
        Ok(det)
    }

    /// Numerical rank: exact elimination rank in exact mode, singular values
    /// thresholded at `rank_eps * sigma_max` in float mode.
    pub fn rank_with_tol(&self, tol: &Tolerance) -> usize {
        match self.mode() {
            ScalarMode::Exact => self.rank_exact(),
            ScalarMode::Float => {
                let sv = self.singular_values();
                let smax = sv.first().copied().unwrap_or(0.0);
                if smax == 0.0 {
                    return 0;
                }
                sv.iter().filter(|&&s| s > tol.rank_eps * smax).count()
            }
        }
    }

    fn rank_exact(&self) -> usize {
        let mut work = self.clone();
        let (rows, cols) = (work.rows, work.cols);
        let mut rank = 0;
        for col in 0..cols {
            let pivot = (rank..rows).find(|&r| !work.get(r, col).is_zero());
            let Some(pivot) = pivot else { continue };
            work.swap_rows(rank, pivot);
            let pivot_inv = work.get(rank, col).try_inv().unwrap();
            for r in (rank + 1)..rows {
                if work.get(r, col).is_zero() {
                    continue;
                }
                let factor = &(work.get(r, col) * &pivot_inv);
                for c in col..cols {
                    let sub = &(factor * work.get(rank, c));
                    let idx = r * cols + c;
                    work.data[idx] = &work.data[idx] - sub;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Basis of the null space as column vectors.
    ///
    /// Float mode returns the orthonormal right singular vectors whose
    /// singular values fall below the rank threshold. Exact mode returns an
    /// exactly orthogonal (not normalized) basis from reduced row echelon
    /// form followed by Gram-Schmidt.
    pub fn null_space_basis(&self, tol: &Tolerance) -> Vec<MatrixC> {
        match self.mode() {
            ScalarMode::Float => self.null_space_float(tol),
            ScalarMode::Exact => self.null_space_exact(),
        }
    }

    fn null_space_float(&self, tol: &Tolerance) -> Vec<MatrixC> {
        // Pad with zero rows so the thin SVD still spans the full column
        // space; appended zero rows do not change the null space.
        let square = if self.rows >= self.cols {
            self.clone()
        } else {
            let mut m = MatrixC::zeros(self.cols, self.cols, ScalarMode::Float);
            m.data[..self.rows * self.cols].clone_from_slice(&self.data);
            m
        };
        let dm = square.to_dmatrix();
        let svd = dm.svd(false, true);
        let vt = svd.v_t.expect("svd requested v_t");
        let sv = &svd.singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let threshold = tol.rank_eps * smax;
        let mut basis = Vec::new();
        for (i, &s) in sv.iter().enumerate() {
            if smax == 0.0 || s <= threshold {
                let col: Vec<Scalar> = (0..self.cols)
                    .map(|j| Scalar::from_complex(vt[(i, j)].conj()))
                    .collect();
                basis.push(MatrixC::new(self.cols, 1, col).unwrap());
            }
        }
        basis
    }

    fn null_space_exact(&self) -> Vec<MatrixC> {
        let (rref, pivot_cols) = self.rref_exact();
        let free_cols: Vec<usize> = (0..self.cols)
            .filter(|c| !pivot_cols.contains(c))
            .collect();
        let mut basis = Vec::new();
        for &fc in &free_cols {
            let mut v = vec![Scalar::zero(ScalarMode::Exact); self.cols];
            v[fc] = Scalar::one(ScalarMode::Exact);
            for (pi, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -rref.get(pi, fc);
            }
            basis.push(MatrixC::new(self.cols, 1, v).unwrap());
        }
        gram_schmidt_exact(basis)
    }

    fn rref_exact(&self) -> (MatrixC, Vec<usize>) {
        let mut work = self.clone();
        let (rows, cols) = (work.rows, work.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows).find(|&i| !work.get(i, c).is_zero()) else {
                continue;
            };
            work.swap_rows(r, p);
            let inv = work.get(r, c).try_inv().unwrap();
            work.scale_row(r, &inv);
            for i in 0..rows {
                if i != r && !work.get(i, c).is_zero() {
                    let factor = work.get(i, c).clone();
                    work.row_axpy(i, r, &factor);
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        (work, pivots)
    }

    /// Rank and null-space basis of a square float matrix with an absolute
    /// singular-value threshold. Used for powers of a normalized matrix,
    /// where a threshold relative to the power's own largest singular value
    /// would mistake pure rounding noise for full rank.
    pub(crate) fn svd_rank_null_abs(&self, threshold: f64) -> (usize, Vec<MatrixC>) {
        let dm = self.to_dmatrix();
        let svd = dm.svd(false, true);
        let vt = svd.v_t.expect("svd requested v_t");
        let mut rank = 0;
        let mut basis = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > threshold {
                rank += 1;
            } else {
                let col: Vec<Scalar> = (0..self.cols)
                    .map(|j| Scalar::from_complex(vt[(i, j)].conj()))
                    .collect();
                basis.push(MatrixC::new(self.cols, 1, col).unwrap());
            }
        }
        (rank, basis)
    }

    /// Singular values in nonincreasing order (float mode only).
    pub fn singular_values(&self) -> Vec<f64> {
        let dm = self.to_dmatrix();
        let svd = dm.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Coefficients of det(xI - A), ascending degree, leading coefficient 1.
    ///
    /// Faddeev-LeVerrier, so exact mode yields exact coefficients.
    pub fn char_poly(&self) -> Result<Vec<Scalar>, MatrixError> {
        self.require_square()?;
        let n = self.rows;
        let mode = self.mode();
        let mut coeffs = vec![Scalar::zero(mode); n + 1];
        coeffs[n] = Scalar::one(mode);
        let mut m_prev = MatrixC::zeros(n, n, mode);
        for k in 1..=n {
            // M_k = A * M_{k-1} + c_{n-k+1} * I
            let mut m_k = self.mat_mul(&m_prev)?;
            for i in 0..n {
                let idx = i * n + i;
                m_k.data[idx] = &m_k.data[idx] + &coeffs[n - k + 1];
            }
            let am = self.mat_mul(&m_k)?;
            let tr = am.trace()?;
            coeffs[n - k] = -(&tr / &Scalar::from_usize(mode, k));
            m_prev = m_k;
        }
        Ok(coeffs)
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_complex64())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Scalar) {
        for c in 0..self.cols {
            let idx = r * self.cols + c;
            self.data[idx] = &self.data[idx] * s;
        }
    }

    /// row[r] -= factor * row[src]
    fn row_axpy(&mut self, r: usize, src: usize, factor: &Scalar) {
        for c in 0..self.cols {
            let sub = &(factor * self.get(src, c));
            let idx = r * self.cols + c;
            self.data[idx] = &self.data[idx] - sub;
        }
    }
}

impl std::ops::Index<(usize, usize)> for MatrixC {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        self.get(i, j)
    }
}

impl std::ops::IndexMut<(usize, usize)> for MatrixC {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthogonalize exactly (no normalization, so entries stay rational).
fn gram_schmidt_exact(vectors: Vec<MatrixC>) -> Vec<MatrixC> {
    let mut out: Vec<MatrixC> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v;
        for u in &out {
            // w -= <w, u>/<u, u> * u  with the conjugate-linear inner product
            let mut dot = Scalar::zero(ScalarMode::Exact);
            let mut uu = Scalar::zero(ScalarMode::Exact);
            for i in 0..w.rows() {
                dot = &dot + &(&u.get(i, 0).conj() * w.get(i, 0));
                uu = &uu + &(&u.get(i, 0).conj() * u.get(i, 0));
            }
            let coef = &dot / &uu;
            for i in 0..w.rows() {
                let sub = &(&coef * u.get(i, 0));
                w[(i, 0)] = &w[(i, 0)] - sub;
            }
        }
        out.push(w);
    }
    out
}

/// Eigenvalues of a square float-mode matrix via a complex Schur
/// decomposition, unordered, with algebraic multiplicity.
pub(crate) fn float_eigenvalues(m: &MatrixC) -> Result<Vec<Complex64>, MatrixError> {
    m.require_square()?;
    let dm = m.to_dmatrix();
    let schur = dm
        .try_schur(f64::EPSILON, 0)
        .ok_or(MatrixError::Singular(": eigensolver did not converge"))?;
    let (_, t) = schur.unpack();
    Ok((0..m.rows()).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn identity_multiplication() {
        let a = MatrixC::float_from_rows(&[
            vec![(1.0, 2.0), (3.0, -1.0)],
            vec![(0.5, 0.0), (2.0, 2.0)],
        ])
        .unwrap();
        let i2 = MatrixC::identity(2, ScalarMode::Float);
        assert_eq!(i2.mat_mul(&a).unwrap(), a);
    }

    #[test]
    fn nilpotent_square_is_zero() {
        // J_2(0) * J_2(0) = 0
        let j = MatrixC::float_from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let sq = j.mat_mul(&j).unwrap();
        assert!(sq.is_zero_to(0.0));
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let a = MatrixC::identity(2, ScalarMode::Float);
        let b = MatrixC::identity(2, ScalarMode::Exact);
        assert!(matches!(
            a.mat_mul(&b),
            Err(MatrixError::ModeMismatch(_, _))
        ));
    }

    #[test]
    fn diag_inverse() {
        let a = MatrixC::exact_from_int(&[&[2, 0], &[0, 4]]).unwrap();
        let inv = a.inverse(&tol()).unwrap();
        assert_eq!(inv.get(0, 0), &Scalar::exact_ratio(1, 2, 0, 1));
        assert_eq!(inv.get(1, 1), &Scalar::exact_ratio(1, 4, 0, 1));
        let i = MatrixC::identity(2, ScalarMode::Exact);
        assert_eq!(i.inverse(&tol()).unwrap(), i);
    }

    #[test]
    fn random_float_inverse_residual() {
        // Fixed well-conditioned 5x5.
        let mut a = MatrixC::identity(5, ScalarMode::Float);
        let mut x = 0.37;
        for i in 0..5 {
            for j in 0..5 {
                x = (x * 97.31 + 0.17) % 1.0;
                a[(i, j)] = &a[(i, j)] + &Scalar::float(0.3 * (x - 0.5), 0.2 * x);
            }
        }
        let inv = a.inverse(&tol()).unwrap();
        let residual = a
            .mat_mul(&inv)
            .unwrap()
            .sub(&MatrixC::identity(5, ScalarMode::Float))
            .unwrap()
            .max_abs();
        assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = MatrixC::float_from_real(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(a.inverse(&tol()), Err(MatrixError::Singular(_))));
    }

    #[test]
    fn null_space_sizes() {
        let z = MatrixC::zeros(3, 3, ScalarMode::Float);
        assert_eq!(z.null_space_basis(&tol()).len(), 3);
        let i3 = MatrixC::identity(3, ScalarMode::Float);
        assert!(i3.null_space_basis(&tol()).is_empty());
        // J_2(5) - 5I has a one-dimensional kernel spanned by e1.
        let m = MatrixC::float_from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let basis = m.null_space_basis(&tol());
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert!(v.get(1, 0).abs() < 1e-12);
        assert!((v.get(0, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(
            MatrixC::identity(4, ScalarMode::Float).rank_with_tol(&tol()),
            4
        );
        assert_eq!(
            MatrixC::zeros(3, 3, ScalarMode::Float).rank_with_tol(&tol()),
            0
        );
        assert_eq!(
            MatrixC::zeros(3, 3, ScalarMode::Exact).rank_with_tol(&tol()),
            0
        );
    }

    #[test]
    fn rank_nullity_sum() {
        let m = MatrixC::exact_from_int(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]).unwrap();
        let r = m.rank_with_tol(&tol());
        let n = m.null_space_basis(&tol()).len();
        assert_eq!(r + n, 3);
        let mf = m.to_float_mode();
        assert_eq!(mf.rank_with_tol(&tol()), r);
        assert_eq!(mf.null_space_basis(&tol()).len(), n);
    }

    #[test]
    fn exact_null_space_is_orthogonal_and_annihilated() {
        let m = MatrixC::exact_from_int(&[&[1, 2, 3], &[2, 4, 6], &[3, 6, 9]]).unwrap();
        let basis = m.null_space_basis(&tol());
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(m.mat_mul(v).unwrap().is_zero_to(0.0));
        }
        let mut dot = Scalar::zero(ScalarMode::Exact);
        for i in 0..3 {
            dot = &dot + &(&basis[0].get(i, 0).conj() * basis[1].get(i, 0));
        }
        assert!(dot.is_zero());
    }

    #[test]
    fn determinant_and_char_poly() {
        let a = MatrixC::exact_from_int(&[&[2, 1], &[0, 3]]).unwrap();
        assert_eq!(a.determinant().unwrap(), Scalar::exact_int(6, 0));
        // det(xI - A) = (x-2)(x-3) = x^2 - 5x + 6
        let cp = a.char_poly().unwrap();
        assert_eq!(cp[0], Scalar::exact_int(6, 0));
        assert_eq!(cp[1], Scalar::exact_int(-5, 0));
        assert_eq!(cp[2], Scalar::exact_int(1, 0));
    }

    #[test]
    fn float_eigenvalues_of_triangular() {
        let a = MatrixC::float_from_real(&[&[1.0, 5.0], &[0.0, 2.0]]).unwrap();
        let mut ev = float_eigenvalues(&a).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0].re - 1.0).abs() < 1e-12);
        assert!((ev[1].re - 2.0).abs() < 1e-12);
    }
}
