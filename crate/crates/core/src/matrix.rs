//! Dense complex matrix substrate shared by every other module.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. Hermitian matrices
//! get a newtype so that PSD certification, square roots and spectra are only
//! ever requested on inputs that are Hermitian by construction.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const IMAG: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical tolerances used throughout the crate.
///
/// `psd_slack` is relative: an eigenvalue floor of `psd_slack * ‖M‖`.
/// `residual_tol` bounds identity residuals, normalised by `1 + ‖value‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub psd_slack: f64,
    pub residual_tol: f64,
    pub commutator_tol: f64,
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_slack: 1e-10,
            residual_tol: 1e-9,
            commutator_tol: 1e-10,
            margin: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn new(psd_slack: f64, residual_tol: f64, commutator_tol: f64, margin: f64) -> Result<Self> {
        let t = Self {
            psd_slack,
            residual_tol,
            commutator_tol,
            margin,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.psd_slack, self.residual_tol, self.commutator_tol, self.margin];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("tolerances must be finite and nonnegative: {self:?}")))
        }
    }

    /// Eigenvalue floor for a matrix of the given norm.
    pub fn psd_floor(&self, norm: f64) -> f64 {
        self.psd_slack * norm
    }

    /// Largest condition number accepted before an inversion is refused.
    pub fn max_condition(&self) -> f64 {
        if self.psd_slack > 0.0 {
            1.0 / self.psd_slack
        } else {
            f64::INFINITY
        }
    }
}

/// A Hermitian matrix. The stored entries satisfy `M = M*` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Accepts `m` if it is Hermitian up to `residual_tol * (1 + ‖m‖)`, then
    /// symmetrizes it.
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let deviation = fro(&(&m - m.adjoint()));
        if deviation > tol.residual_tol * (1.0 + fro(&m)) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        Hermitian(h)
    }

    pub fn identity(n: usize) -> Self {
        Hermitian(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.dim();
        if n == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailure);
        }
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.0.first().copied().unwrap_or(0.0))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigen()?.0.last().copied().unwrap_or(0.0))
    }
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> Result<Hermitian> {
    check_square(m)?;
    Ok(Hermitian::symmetrized(m.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub floor: f64,
    pub psd: bool,
}

/// PSD certification by Hermitian eigendecomposition, with eigenvalue floor
/// `-psd_slack * ‖M‖`.
pub fn is_psd(m: &Hermitian, tol: &Tolerances) -> Result<PsdReport> {
    is_psd_scaled(m, 0.0, tol)
}

/// [`is_psd`] with floor `-psd_slack * max(‖M‖, scale)`.
pub fn is_psd_scaled(m: &Hermitian, scale: f64, tol: &Tolerances) -> Result<PsdReport> {
    let min_eigenvalue = m.min_eigenvalue()?;
    let floor = tol.psd_floor(fro(m.as_matrix()).max(scale));
    Ok(PsdReport {
        min_eigenvalue,
        floor,
        psd: min_eigenvalue >= -floor,
    })
}

fn checked_spectrum(m: &Hermitian, scale: f64, tol: &Tolerances) -> Result<(Vec<f64>, CMatrix, f64)> {
    let (values, vectors) = m.eigen()?;
    let floor = tol.psd_floor(fro(m.as_matrix()).max(scale));
    let min = values.first().copied().unwrap_or(0.0);
    if min < -floor {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            slack: floor,
        });
    }
    Ok((values, vectors, floor))
}

/// Principal square root `S = S*` with `S*S = M`. Eigenvalues in
/// `[-floor, floor]` are clamped to zero, so the rank of `S` counts the
/// eigenvalues above the floor.
pub fn psd_sqrt(m: &Hermitian, tol: &Tolerances) -> Result<CMatrix> {
    let (values, vectors, floor) = checked_spectrum(m, 0.0, tol)?;
    let n = m.dim();
    let mut s = CMatrix::zeros(n, n);
    for (j, &lambda) in values.iter().enumerate() {
        if lambda > floor {
            let v = vectors.column(j);
            s += (v * v.adjoint()).scale(lambda.sqrt());
        }
    }
    Ok(s)
}

/// Minimal-rank factor `V` (`r x dim`) with `V*V = M`, where `r` is the number
/// of eigenvalues above the floor.
pub fn psd_factor(m: &Hermitian, tol: &Tolerances) -> Result<CMatrix> {
    psd_factor_scaled(m, 0.0, tol)
}

/// [`psd_factor`] with the floor taken relative to `max(‖M‖, scale)`, for
/// matrices assembled from data of size `scale` that may cancel to rounding.
pub fn psd_factor_scaled(m: &Hermitian, scale: f64, tol: &Tolerances) -> Result<CMatrix> {
    let (values, vectors, floor) = checked_spectrum(m, scale, tol)?;
    let n = m.dim();
    let kept: Vec<usize> = (0..values.len()).rev().filter(|&j| values[j] > floor).collect();
    let mut f = CMatrix::zeros(kept.len(), n);
    for (row, &j) in kept.iter().enumerate() {
        let scale = values[j].sqrt();
        for c in 0..n {
            f[(row, c)] = vectors[(c, j)].conj() * scale;
        }
    }
    Ok(f)
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match SVD::try_new(m.clone(), false, false, f64::EPSILON, 10_000) {
        Some(svd) => svd.singular_values.iter().cloned().fold(0.0, f64::max),
        // Frobenius norm bounds the spectral norm from above.
        None => fro(m),
    }
}

/// Frobenius norm; used for residuals since it bounds the operator norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Inverse by LU with partial pivoting; refused when the 1-norm condition
/// estimate exceeds `max_condition`.
pub fn inverse_checked(m: &CMatrix, max_condition: f64, what: &'static str) -> Result<CMatrix> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let inv = m.clone().lu().try_inverse().ok_or(Error::Singular {
        what,
        condition: f64::INFINITY,
    })?;
    let condition = norm1(m) * norm1(&inv);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::Singular { what, condition });
    }
    Ok(inv)
}

/// Orthonormal basis (as columns) of the column space of `m`, by QR with
/// column pivoting. Columns are kept while `|R_ii| > rel_tol * |R_00|`.
pub fn range_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    range_basis_scaled(m, rel_tol, 0.0)
}

/// [`range_basis`] keeping columns while `|R_ii| > rel_tol * max(|R_00|, scale)`,
/// so that a matrix of pure rounding against data of size `scale` has rank zero.
pub fn range_basis_scaled(m: &CMatrix, rel_tol: f64, scale: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].norm()).collect();
    let lead = diag.first().copied().unwrap_or(0.0).max(scale);
    if lead == 0.0 {
        return CMatrix::zeros(rows, 0);
    }
    let rank = diag.iter().take_while(|d| **d > rel_tol * lead).count();
    qr.q().columns(0, rank).into_owned()
}

/// Orthonormal basis of the column space by SVD, keeping singular values above
/// `rel_tol * σ_max`. More robust than [`range_basis`] for nearly dependent data.
pub fn range_basis_svd(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(CMatrix::zeros(rows, 0));
    }
    let svd = SVD::try_new(m.clone(), true, false, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let u = svd.u.ok_or(Error::EigenFailure)?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(CMatrix::zeros(rows, 0));
    }
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .collect();
    Ok(CMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])]))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `[a b; c d]`.
pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let (n, p) = (a.nrows(), d.nrows());
    let mut m = CMatrix::zeros(n + p, a.ncols() + d.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m.view_mut((n, 0), c.shape()).copy_from(c);
    m.view_mut((n, a.ncols()), d.shape()).copy_from(d);
    m
}

pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = CMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        m.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    m
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// `‖a - b‖_F / (1 + ‖b‖_F)`.
pub fn relative_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    fro(&(a - b)) / (1.0 + fro(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_part_examples() {
        let m = CMatrix::from_element(1, 1, IMAG);
        assert_eq!(hermitian_part(&m).unwrap().as_matrix()[(0, 0)], ZERO);

        let m = real_matrix(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert_eq!(hermitian_part(&m).unwrap().into_matrix(), real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]));

        let m = CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, 2.0), ZERO, ZERO]);
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, 1.0), c(0.0, -1.0), ZERO]);
        assert_eq!(hermitian_part(&m).unwrap().into_matrix(), expected);

        assert!(matches!(hermitian_part(&CMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn psd_examples() {
        let tol = Tolerances::default();
        let ones = Hermitian::new(real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]), &tol).unwrap();
        let r = is_psd(&ones, &tol).unwrap();
        assert!(r.psd);
        assert!(r.min_eigenvalue.abs() < 1e-14);

        let zero = Hermitian::new(CMatrix::zeros(1, 1), &tol).unwrap();
        assert!(is_psd(&zero, &tol).unwrap().psd);

        let indefinite = Hermitian::new(real_matrix(2, 2, &[1.0, 2.0, 2.0, 1.0]), &tol).unwrap();
        let r = is_psd(&indefinite, &tol).unwrap();
        assert!(!r.psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_examples() {
        let tol = Tolerances::default();
        let id = Hermitian::identity(3);
        assert!(fro(&(psd_sqrt(&id, &tol).unwrap() - CMatrix::identity(3, 3))) < 1e-14);

        let four = Hermitian::new(real_matrix(1, 1, &[4.0]), &tol).unwrap();
        assert!((psd_sqrt(&four, &tol).unwrap()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);

        let ones = Hermitian::new(real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]), &tol).unwrap();
        let s = psd_sqrt(&ones, &tol).unwrap();
        assert!(fro(&(s.adjoint() * &s - ones.as_matrix())) < 1e-12);
        let f = psd_factor(&ones, &tol).unwrap();
        assert_eq!(f.nrows(), 1);
        assert!(fro(&(f.adjoint() * &f - ones.as_matrix())) < 1e-12);

        let bad = Hermitian::new(real_matrix(2, 2, &[1.0, 2.0, 2.0, 1.0]), &tol).unwrap();
        assert!(matches!(psd_sqrt(&bad, &tol), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&CMatrix::zeros(3, 3)), 0.0);
        assert!((operator_norm(&real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0])) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_refuses_singular() {
        let m = real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(inverse_checked(&m, 1e10, "m"), Err(Error::Singular { .. })));
        let m = real_matrix(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let inv = inverse_checked(&m, 1e10, "m").unwrap();
        assert!((inv[(1, 1)] - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn range_basis_rank() {
        let m = real_matrix(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]);
        let q = range_basis(&m, 1e-10);
        assert_eq!(q.ncols(), 2);
        assert!(fro(&(q.adjoint() * &q - CMatrix::identity(2, 2))) < 1e-12);
        assert_eq!(range_basis_svd(&m, 1e-10).unwrap().ncols(), 2);
    }
}
