//! Kernel decompositions `f(z) = Σ z_k Φ_k(z, ζ)` of realized functions, their
//! verification on grids, Gram factorization of sampled kernels, and the
//! reconstruction of a pencil from factored kernel samples.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{self, fro, inverse_checked, CMatrix, Hermitian, Tolerances, ONE};
use crate::pencil::{PsdPencil, RealizedFunction};

/// `ψ(z) = [I_U; -d(z)⁻¹ c(z)]`.
pub fn psi(f: &RealizedFunction, z: &[Complex64]) -> Result<CMatrix> {
    let (n, p) = (f.dim_u(), f.dim_h());
    let blocks = f.pencil().eval_blocks(z)?;
    let mut out = CMatrix::zeros(n + p, n);
    out.view_mut((0, 0), (n, n)).fill_with_identity();
    if p > 0 {
        let dinv = inverse_checked(&blocks.d, f.tolerances().max_condition(), "d(z)")?;
        out.view_mut((n, 0), (p, n)).copy_from(&(-(dinv * blocks.c)));
    }
    Ok(out)
}

/// `Φ_k(z, ζ) = ψ(ζ)* A_k ψ(z)` with `k` zero-based.
pub fn phi(f: &RealizedFunction, k: usize, z: &[Complex64], zeta: &[Complex64]) -> Result<CMatrix> {
    if k >= f.num_vars() {
        return Err(Error::Dimension(format!("variable index {k} out of range")));
    }
    let (pz, pw) = (psi(f, z)?, psi(f, zeta)?);
    Ok(pw.adjoint() * &f.pencil().coeffs()[k] * pz)
}

/// Caches `ψ` on a grid so that all-pairs kernel evaluation costs one solve
/// per point.
pub struct KernelEvaluator<'a> {
    f: &'a RealizedFunction,
    psis: Vec<CMatrix>,
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(f: &'a RealizedFunction, grid: &[Vec<Complex64>]) -> Result<Self> {
        let psis = grid.iter().map(|z| psi(f, z)).collect::<Result<_>>()?;
        Ok(Self { f, psis })
    }

    pub fn len(&self) -> usize {
        self.psis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psis.is_empty()
    }

    /// `Φ_k(z_i, z_j)`.
    pub fn phi(&self, k: usize, i: usize, j: usize) -> CMatrix {
        self.psis[j].adjoint() * &self.f.pencil().coeffs()[k] * &self.psis[i]
    }

    /// `‖A_k‖ max_j ‖ψ(z_j)‖²`, the size of the data behind [`KernelEvaluator::gram`].
    pub fn gram_scale(&self, k: usize) -> f64 {
        let psi_sq = self.psis.iter().map(|p| fro(p).powi(2)).fold(0.0, f64::max);
        fro(&self.f.pencil().coeffs()[k]) * psi_sq
    }

    /// Block Gram `[Φ_k(z_μ, z_ν)]_{ν, μ}`.
    pub fn gram(&self, k: usize) -> CMatrix {
        block_gram(self.f.dim_u(), self.len(), |mu, nu| Ok(self.phi(k, mu, nu))).expect("infallible")
    }
}

/// Assembles the block Gram matrix whose `(ν, μ)` block is `kernel(μ, ν)`.
pub fn block_gram<K>(n: usize, count: usize, kernel: K) -> Result<CMatrix>
where
    K: Fn(usize, usize) -> Result<CMatrix>,
{
    let mut g = CMatrix::zeros(n * count, n * count);
    for nu in 0..count {
        for mu in 0..count {
            let block = kernel(mu, nu)?;
            if block.shape() != (n, n) {
                return Err(Error::Dimension(format!("kernel block has shape {:?}, expected {n}x{n}", block.shape())));
            }
            g.view_mut((nu * n, mu * n), (n, n)).copy_from(&block);
        }
    }
    Ok(g)
}

/// Maximum over grid pairs of `‖f(z) - Σ z_k Φ_k(z, ζ)‖ / (1 + ‖f(z)‖)`, for
/// arbitrary (possibly corrupted) kernel values `kernel(k, i, j) = Φ_k(z_i, z_j)`.
pub fn identity_residual_with<K>(grid: &[Vec<Complex64>], values: &[CMatrix], kernel: K) -> f64
where
    K: Fn(usize, usize, usize) -> CMatrix,
{
    let mut worst: f64 = 0.0;
    for (i, z) in grid.iter().enumerate() {
        for j in 0..grid.len() {
            let mut sum = CMatrix::zeros(values[i].nrows(), values[i].ncols());
            for (k, zk) in z.iter().enumerate() {
                sum += kernel(k, i, j) * *zk;
            }
            worst = worst.max(matrix::relative_residual(&sum, &values[i]));
        }
    }
    worst
}

pub fn kernel_identity_residual(f: &RealizedFunction, grid: &[Vec<Complex64>]) -> Result<f64> {
    let ev = KernelEvaluator::new(f, grid)?;
    let values = grid.iter().map(|z| f.eval_schur(z)).collect::<Result<Vec<_>>>()?;
    Ok(identity_residual_with(grid, &values, |k, i, j| ev.phi(k, i, j)))
}

/// Residuals of `f(z) + f(ζ)* = Σ (z_k + ζ̄_k) Φ_k(z, ζ)` and
/// `f(z) - f(ζ)* = Σ (z_k - ζ̄_k) Φ_k(z, ζ)` for arbitrary kernel values.
pub fn plus_minus_residuals_with<K>(grid: &[Vec<Complex64>], values: &[CMatrix], kernel: K) -> (f64, f64)
where
    K: Fn(usize, usize, usize) -> CMatrix,
{
    let (mut plus, mut minus): (f64, f64) = (0.0, 0.0);
    for (i, z) in grid.iter().enumerate() {
        for (j, zeta) in grid.iter().enumerate() {
            let n = values[i].nrows();
            let (mut sp, mut sm) = (CMatrix::zeros(n, n), CMatrix::zeros(n, n));
            for k in 0..z.len() {
                let phi = kernel(k, i, j);
                sp += &phi * (z[k] + zeta[k].conj());
                sm += phi * (z[k] - zeta[k].conj());
            }
            let lhs_p = &values[i] + values[j].adjoint();
            let lhs_m = &values[i] - values[j].adjoint();
            let scale = 1.0 + fro(&values[i]) + fro(&values[j]);
            plus = plus.max(fro(&(lhs_p - sp)) / scale);
            minus = minus.max(fro(&(lhs_m - sm)) / scale);
        }
    }
    (plus, minus)
}

pub fn plus_minus_residuals(f: &RealizedFunction, grid: &[Vec<Complex64>]) -> Result<(f64, f64)> {
    let ev = KernelEvaluator::new(f, grid)?;
    let values = grid.iter().map(|z| f.eval_schur(z)).collect::<Result<Vec<_>>>()?;
    Ok(plus_minus_residuals_with(grid, &values, |k, i, j| ev.phi(k, i, j)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelCheck {
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// PSD test of a block Gram matrix. A Gram that is not Hermitian within
/// `residual_tol` is reported as not PSD.
pub fn check_psd_kernel(gram: &CMatrix, tol: &Tolerances) -> Result<KernelCheck> {
    check_psd_kernel_scaled(gram, 0.0, tol)
}

/// [`check_psd_kernel`] with the eigenvalue floor relative to `max(‖Γ‖, size)`.
pub fn check_psd_kernel_scaled(gram: &CMatrix, size: f64, tol: &Tolerances) -> Result<KernelCheck> {
    matrix::check_square(gram)?;
    let scale = 1.0 + fro(gram);
    let hermitian_deviation = fro(&(gram - gram.adjoint())) / scale;
    let h = matrix::hermitian_part(gram)?;
    let report = matrix::is_psd_scaled(&h, size, tol)?;
    Ok(KernelCheck {
        hermitian_deviation,
        min_eigenvalue: report.min_eigenvalue,
        psd: hermitian_deviation <= tol.residual_tol && report.psd,
    })
}

/// Splits a minimal-rank factor `V` with `V*V = Γ` into per-point blocks
/// `φ(z_j) = V[:, j·n .. (j+1)·n]`.
pub fn factor_kernel_samples(gram: &CMatrix, n: usize, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    factor_scaled(gram, n, 0.0, tol)
}

fn factor_scaled(gram: &CMatrix, n: usize, scale: f64, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    if n == 0 || !gram.nrows().is_multiple_of(n) {
        return Err(Error::Dimension(format!("Gram of size {} is not a multiple of n = {n}", gram.nrows())));
    }
    let h = Hermitian::new(gram.clone(), tol)?;
    let v = matrix::psd_factor_scaled(&h, scale, tol)?;
    let count = gram.nrows() / n;
    Ok((0..count).map(|j| v.columns(j * n, n).into_owned()).collect())
}

/// Grid samples of factored kernels `Φ_k(z, ζ) = φ_k(ζ)* φ_k(z)` and of `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSampleSet {
    pub grid: Vec<Vec<Complex64>>,
    /// `factors[k][j] = φ_k(z_j)`, each `m_k x n`.
    pub factors: Vec<Vec<CMatrix>>,
    pub f_samples: Vec<CMatrix>,
}

pub fn base_point(num_vars: usize) -> Vec<Complex64> {
    vec![ONE; num_vars]
}

impl KernelSampleSet {
    pub fn num_vars(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.f_samples.first().map(|m| m.nrows()).unwrap_or(0)
    }

    /// Index of the base point `e = (1, …, 1)`.
    pub fn base_index(&self) -> Option<usize> {
        let e = base_point(self.num_vars());
        self.grid.iter().position(|z| z == &e)
    }

    pub fn validate(&self) -> Result<()> {
        let (g, n, nv) = (self.grid.len(), self.dim(), self.num_vars());
        if g == 0 || nv == 0 || n == 0 {
            return Err(Error::Invalid("empty kernel sample set".into()));
        }
        if self.f_samples.len() != g || self.grid.iter().any(|z| z.len() != nv) {
            return Err(Error::Dimension("grid, factors and samples disagree in size".into()));
        }
        for (k, fk) in self.factors.iter().enumerate() {
            if fk.len() != g {
                return Err(Error::Dimension(format!("factor {} has {} samples, expected {g}", k + 1, fk.len())));
            }
            let m = fk[0].nrows();
            if fk.iter().any(|x| x.shape() != (m, n)) {
                return Err(Error::Dimension(format!("factor {} has inconsistent shapes", k + 1)));
            }
        }
        if self.f_samples.iter().any(|x| x.shape() != (n, n)) {
            return Err(Error::Dimension("function samples must be n x n".into()));
        }
        for i in 0..g {
            for j in 0..i {
                if self.grid[i] == self.grid[j] {
                    return Err(Error::Invalid(format!("grid points {j} and {i} coincide")));
                }
            }
        }
        if self.base_index().is_none() {
            return Err(Error::Invalid("grid must contain the base point e = (1, …, 1)".into()));
        }
        Ok(())
    }

    /// Stacked factor `φ(z_j) = col(φ_1(z_j), …, φ_N(z_j))`.
    pub fn stacked(&self, j: usize) -> CMatrix {
        let rows: usize = self.factors.iter().map(|fk| fk[j].nrows()).sum();
        let mut out = CMatrix::zeros(rows, self.dim());
        let mut r = 0;
        for fk in &self.factors {
            out.view_mut((r, 0), fk[j].shape()).copy_from(&fk[j]);
            r += fk[j].nrows();
        }
        out
    }

    /// Kernel identity residual of the samples themselves.
    pub fn identity_residual(&self) -> f64 {
        identity_residual_with(&self.grid, &self.f_samples, |k, i, j| {
            self.factors[k][j].adjoint() * &self.factors[k][i]
        })
    }

    /// `max_j ‖Σ_k (φ_k(z_j) - φ_k(e))* φ_k(e)‖`, normalised by `1 + ‖f(e)‖`.
    pub fn orthogonality_residual(&self) -> f64 {
        let Some(e) = self.base_index() else { return f64::INFINITY };
        let base = self.stacked(e);
        let scale = 1.0 + fro(&self.f_samples[e]);
        (0..self.grid.len())
            .map(|j| fro(&((self.stacked(j) - &base).adjoint() * &base)) / scale)
            .fold(0.0, f64::max)
    }
}

/// Samples `f` on `grid` and factors each block Gram `[Φ_k(z_μ, z_ν)]`.
/// The base point is prepended when the grid lacks it.
pub fn sample_kernels(f: &RealizedFunction, grid: &[Vec<Complex64>]) -> Result<KernelSampleSet> {
    let e = base_point(f.num_vars());
    let mut points = grid.to_vec();
    if !points.contains(&e) {
        points.insert(0, e);
    }
    let ev = KernelEvaluator::new(f, &points)?;
    // Gram entries cancel to rounding relative to ‖A_k‖ ‖ψ‖², not to their own size.
    let factors = (0..f.num_vars())
        .map(|k| factor_scaled(&ev.gram(k), f.dim_u(), ev.gram_scale(k), f.tolerances()))
        .collect::<Result<Vec<_>>>()?;
    let f_samples = points.iter().map(|z| f.eval_schur(z)).collect::<Result<Vec<_>>>()?;
    Ok(KernelSampleSet {
        grid: points,
        factors,
        f_samples,
    })
}

/// A pencil rebuilt from kernel samples, with the `H` basis used for it.
#[derive(Clone, Debug)]
pub struct KernelReconstruction {
    pub function: RealizedFunction,
    /// Orthonormal basis of `H = span_j (φ(z_j) - φ(e)) U` inside the stacked
    /// factor space.
    pub h_basis: CMatrix,
    pub orthogonality_residual: f64,
    pub interpolation_residual: f64,
}

impl KernelReconstruction {
    /// `max_j ‖c(z_j) + d(z_j) (φ(z_j) - φ(e))‖` in `H` coordinates.
    pub fn f2_residual(&self, ks: &KernelSampleSet) -> Result<f64> {
        let e = ks.base_index().ok_or_else(|| Error::Invalid("no base point".into()))?;
        let base = ks.stacked(e);
        let n = ks.dim();
        let mut worst: f64 = 0.0;
        for (j, z) in ks.grid.iter().enumerate() {
            let blocks = self.function.pencil().eval_blocks(z)?;
            let coords = self.h_basis.adjoint() * (ks.stacked(j) - &base);
            let f2 = &blocks.c + &blocks.d * coords;
            worst = worst.max(fro(&f2) / (1.0 + fro(&ks.f_samples[j])));
            debug_assert_eq!(f2.ncols(), n);
        }
        Ok(worst)
    }
}

/// Rebuilds a PSD pencil from factored kernel samples through the natural
/// embedding of `X ⊕ H` into the stacked factor space:
/// `A_k = G* P_k G` with `G = [φ(e)  Q_H]`.
pub fn pencil_from_kernel_samples(ks: &KernelSampleSet, tol: &Tolerances) -> Result<KernelReconstruction> {
    ks.validate()?;
    let residual = ks.identity_residual();
    if residual > tol.residual_tol {
        return Err(Error::KernelIdentity { residual });
    }
    let orthogonality_residual = ks.orthogonality_residual();
    if orthogonality_residual > tol.residual_tol {
        return Err(Error::RankCollapse(format!(
            "φ(e)U is not orthogonal to the difference span (residual {orthogonality_residual:.3e})"
        )));
    }
    let e = ks.base_index().expect("validated");
    let n = ks.dim();
    let base = ks.stacked(e);
    let m = base.nrows();

    let others: Vec<usize> = (0..ks.grid.len()).filter(|&j| j != e).collect();
    let mut diffs = CMatrix::zeros(m, n * others.len());
    for (c, &j) in others.iter().enumerate() {
        diffs.view_mut((0, c * n), (m, n)).copy_from(&(ks.stacked(j) - &base));
    }
    let size = (0..ks.grid.len()).map(|j| fro(&ks.stacked(j))).fold(0.0, f64::max);
    let q_h = matrix::range_basis_scaled(&diffs, tol.psd_slack, size);
    let p = q_h.ncols();

    let mut g = CMatrix::zeros(m, n + p);
    g.view_mut((0, 0), (m, n)).copy_from(&base);
    g.view_mut((0, n), (m, p)).copy_from(&q_h);

    let mut coeffs = Vec::with_capacity(ks.num_vars());
    let mut row = 0;
    for fk in &ks.factors {
        let mk = fk[0].nrows();
        let gk = g.rows(row, mk);
        coeffs.push(gk.adjoint() * gk);
        row += mk;
    }
    let function = RealizedFunction::new(PsdPencil::from_coeffs(n, p, coeffs, tol)?, *tol)?;
    let interpolation_residual = ks
        .grid
        .iter()
        .zip(&ks.f_samples)
        .map(|(z, fz)| Ok(matrix::relative_residual(&function.eval_schur(z)?, fz)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(KernelReconstruction {
        function,
        h_basis: q_h,
        orthogonality_residual,
        interpolation_residual,
    })
}
