//! Cayley-type maps between the right half-plane and the unit disk: over the
//! variables, over matrix values, over operator tuples, and the double Cayley
//! transform `𝓒(f)(w) = (F(w) - I)(F(w) + I)⁻¹` with `F(w) = f((1+w)/(1-w))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::{check_arity, MatrixFunction};
use crate::kernel::psi;
use crate::matrix::{self, fro, inverse_checked, operator_norm, CMatrix, Hermitian, Tolerances, ONE};
use crate::pencil::RealizedFunction;

/// Points with `1 - |w_k| < GUARD_BAND` are rejected by the disk-side maps.
pub const GUARD_BAND: f64 = 1e-8;

/// `z_k = (1 + w_k) / (1 - w_k)`, mapping `D^N` onto `Π^N`.
pub fn disk_to_halfplane(w: &[Complex64]) -> Result<Vec<Complex64>> {
    check_disk(w)?;
    Ok(w.iter().map(|&wk| (ONE + wk) / (ONE - wk)).collect())
}

/// `w_k = (z_k - 1) / (z_k + 1)`, mapping `Π^N` onto `D^N`.
pub fn halfplane_to_disk(z: &[Complex64]) -> Result<Vec<Complex64>> {
    if let Some(zk) = z.iter().find(|zk| !(zk.re > 0.0) || !zk.norm().is_finite()) {
        return Err(Error::OutsideDomain(format!("Re z_k = {} is not positive", zk.re)));
    }
    Ok(z.iter().map(|&zk| (zk - ONE) / (zk + ONE)).collect())
}

pub fn check_disk(w: &[Complex64]) -> Result<()> {
    match w.iter().find(|wk| !(1.0 - wk.norm() >= GUARD_BAND)) {
        Some(wk) => Err(Error::OutsideDomain(format!("|w_k| = {} is within the boundary guard band", wk.norm()))),
        None => Ok(()),
    }
}

/// `(F - I)(F + I)⁻¹`.
pub fn value_cayley(f: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let id = CMatrix::identity(f.nrows(), f.ncols());
    let inv = inverse_checked(&(f + &id), tol.max_condition(), "F(w) + I")?;
    Ok((f - id) * inv)
}

/// `(I + S)(I - S)⁻¹`.
pub fn inverse_value_cayley(s: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let id = CMatrix::identity(s.nrows(), s.ncols());
    let inv = inverse_checked(&(&id - s), tol.max_condition(), "I - 𝓕(w)")?;
    Ok((id + s) * inv)
}

/// Which side of the double Cayley transform a [`CayleyView`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `F(w) = f(z(w))`, positive real part.
    Herglotz,
    /// `𝓕(w) = (F(w) - I)(F(w) + I)⁻¹`, contractive.
    Schur,
}

/// Disk-side view of a half-plane function.
#[derive(Clone, Debug)]
pub struct CayleyView<F> {
    f: F,
    side: Side,
    tol: Tolerances,
}

impl<F: MatrixFunction> CayleyView<F> {
    pub fn new(f: F, side: Side, tol: Tolerances) -> Self {
        Self { f, side, tol }
    }

    pub fn herglotz(f: F, tol: Tolerances) -> Self {
        Self::new(f, Side::Herglotz, tol)
    }

    pub fn schur(f: F, tol: Tolerances) -> Self {
        Self::new(f, Side::Schur, tol)
    }

    pub fn inner(&self) -> &F {
        &self.f
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn eval_herglotz(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_arity(w, self.f.num_vars())?;
        self.f.eval(&disk_to_halfplane(w)?)
    }

    pub fn eval_double_cayley(&self, w: &[Complex64]) -> Result<CMatrix> {
        value_cayley(&self.eval_herglotz(w)?, &self.tol)
    }
}

impl<F: MatrixFunction> MatrixFunction for CayleyView<F> {
    fn num_vars(&self) -> usize {
        self.f.num_vars()
    }
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        match self.side {
            Side::Herglotz => self.eval_herglotz(w),
            Side::Schur => self.eval_double_cayley(w),
        }
    }
}

/// `F(w) = (I + 𝓕(w))(I - 𝓕(w))⁻¹` for any Schur-side evaluator.
#[derive(Clone, Debug)]
pub struct InverseDoubleCayley<S> {
    schur: S,
    tol: Tolerances,
}

impl<S: MatrixFunction> InverseDoubleCayley<S> {
    pub fn new(schur: S, tol: Tolerances) -> Self {
        Self { schur, tol }
    }
}

impl<S: MatrixFunction> MatrixFunction for InverseDoubleCayley<S> {
    fn num_vars(&self) -> usize {
        self.schur.num_vars()
    }
    fn dim(&self) -> usize {
        self.schur.dim()
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        inverse_value_cayley(&self.schur.eval(w)?, &self.tol)
    }
}

/// `R_k = (I + T_k)(I - T_k)⁻¹` for `‖T_k‖ ≤ 1 - margin`.
pub fn operator_cayley(ts: &[CMatrix], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    ts.iter()
        .map(|t| {
            let norm = operator_norm(t);
            if norm > 1.0 - tol.margin {
                return Err(Error::Margin(format!("‖T_k‖ = {norm} exceeds 1 - margin")));
            }
            inverse_value_cayley(t, tol)
        })
        .collect()
}

/// `T_k = (R_k - I)(R_k + I)⁻¹` for `R_k + R_k* ⪰ margin · I`.
pub fn inverse_operator_cayley(rs: &[CMatrix], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    rs.iter()
        .map(|r| {
            let s = Hermitian::new(r + r.adjoint(), &Tolerances::default())?.min_eigenvalue()?;
            if s < tol.margin {
                return Err(Error::Margin(format!("min eigenvalue of R_k + R_k* is {s}, below margin")));
            }
            value_cayley(r, tol)
        })
        .collect()
}

/// Disk-side kernels of a realized function on a grid of disk points:
/// `Ξ_k(w, ω) = 2 / ((1 - w_k)(1 - ω̄_k)) Φ_k(z(w), z(ω))`,
/// `Θ_k(w, ω) = 2 (F(ω)* + I)⁻¹ Ξ_k(w, ω) (F(w) + I)⁻¹`,
/// and their factors `ξ_k(w) = √2 / (1 - w_k) S_k ψ(z(w))` with `S_k² = A_k`,
/// `θ_k(w) = √2 ξ_k(w) (F(w) + I)⁻¹`.
pub struct DiskKernels<'a> {
    f: &'a RealizedFunction,
    grid: Vec<Vec<Complex64>>,
    psis: Vec<CMatrix>,
    herglotz: Vec<CMatrix>,
    schur: Vec<CMatrix>,
    resolvents: Vec<CMatrix>,
    roots: Vec<CMatrix>,
}

impl<'a> DiskKernels<'a> {
    pub fn new(f: &'a RealizedFunction, grid: &[Vec<Complex64>]) -> Result<Self> {
        let tol = f.tolerances();
        let mut psis = Vec::with_capacity(grid.len());
        let mut herglotz = Vec::with_capacity(grid.len());
        let mut schur = Vec::with_capacity(grid.len());
        let mut resolvents = Vec::with_capacity(grid.len());
        for w in grid {
            check_arity(w, f.num_vars())?;
            let z = disk_to_halfplane(w)?;
            psis.push(psi(f, &z)?);
            let fw = f.eval_schur(&z)?;
            let id = CMatrix::identity(fw.nrows(), fw.ncols());
            let res = inverse_checked(&(&fw + &id), tol.max_condition(), "F(w) + I")?;
            schur.push((&fw - id) * &res);
            herglotz.push(fw);
            resolvents.push(res);
        }
        let roots = f
            .pencil()
            .coeffs()
            .iter()
            .map(|a| matrix::psd_sqrt(&Hermitian::new(a.clone(), tol)?, tol))
            .collect::<Result<_>>()?;
        Ok(Self {
            f,
            grid: grid.to_vec(),
            psis,
            herglotz,
            schur,
            resolvents,
            roots,
        })
    }

    pub fn grid(&self) -> &[Vec<Complex64>] {
        &self.grid
    }

    pub fn herglotz(&self, i: usize) -> &CMatrix {
        &self.herglotz[i]
    }

    pub fn schur(&self, i: usize) -> &CMatrix {
        &self.schur[i]
    }

    pub fn schur_values(&self) -> &[CMatrix] {
        &self.schur
    }

    /// `Ξ_k(w_i, w_j)`.
    pub fn xi(&self, k: usize, i: usize, j: usize) -> CMatrix {
        let (wi, wj) = (self.grid[i][k], self.grid[j][k]);
        let scale = Complex64::new(2.0, 0.0) / ((ONE - wi) * (ONE - wj.conj()));
        self.psis[j].adjoint() * &self.f.pencil().coeffs()[k] * &self.psis[i] * scale
    }

    /// `Θ_k(w_i, w_j)`.
    pub fn theta(&self, k: usize, i: usize, j: usize) -> CMatrix {
        self.resolvents[j].adjoint() * self.xi(k, i, j) * &self.resolvents[i] * Complex64::new(2.0, 0.0)
    }

    /// `ξ_k(w_i)`.
    pub fn xi_factor(&self, k: usize, i: usize) -> CMatrix {
        let scale = Complex64::new(2f64.sqrt(), 0.0) / (ONE - self.grid[i][k]);
        &self.roots[k] * &self.psis[i] * scale
    }

    /// `θ_k(w_i)`.
    pub fn theta_factor(&self, k: usize, i: usize) -> CMatrix {
        theta_transform(&self.xi_factor(k, i), &self.resolvents[i])
    }

    /// `theta_factors()[k][i] = θ_k(w_i)`.
    pub fn theta_factors(&self) -> Vec<Vec<CMatrix>> {
        (0..self.f.num_vars())
            .map(|k| (0..self.grid.len()).map(|i| self.theta_factor(k, i)).collect())
            .collect()
    }

    /// Residuals of `F(w) + F(ω)* = Σ (1 - ω̄_k w_k) Ξ_k(w, ω)` and
    /// `F(w) - F(ω)* = Σ (w_k - ω̄_k) Ξ_k(w, ω)`.
    pub fn agler_herglotz_residuals(&self) -> (f64, f64) {
        pair_residuals(&self.grid, |i, j| {
            let (fi, fj) = (&self.herglotz[i], &self.herglotz[j]);
            (fi + fj.adjoint(), fi - fj.adjoint(), 1.0 + fro(fi) + fro(fj))
        }, |k, i, j| self.xi(k, i, j))
    }

    /// Residuals of `I - 𝓕(ω)*𝓕(w) = Σ (1 - ω̄_k w_k) Θ_k(w, ω)` and
    /// `𝓕(w) - 𝓕(ω)* = Σ (w_k - ω̄_k) Θ_k(w, ω)`.
    pub fn agler_residuals(&self) -> (f64, f64) {
        pair_residuals(&self.grid, |i, j| {
            let (si, sj) = (&self.schur[i], &self.schur[j]);
            let id = CMatrix::identity(si.nrows(), si.ncols());
            (id - sj.adjoint() * si, si - sj.adjoint(), 1.0)
        }, |k, i, j| self.theta(k, i, j))
    }
}

/// `θ = √2 ξ (F + I)⁻¹`, given `ξ(w)` and the resolvent `(F(w) + I)⁻¹`.
pub fn theta_transform(xi: &CMatrix, resolvent: &CMatrix) -> CMatrix {
    xi * resolvent * Complex64::new(2f64.sqrt(), 0.0)
}

/// Shared loop for the plus/minus identity pairs over grid pairs. `lhs(i, j)`
/// returns the plus left side, the minus left side, and a normalising scale.
pub(crate) fn pair_residuals<L, K>(grid: &[Vec<Complex64>], lhs: L, kernel: K) -> (f64, f64)
where
    L: Fn(usize, usize) -> (CMatrix, CMatrix, f64),
    K: Fn(usize, usize, usize) -> CMatrix,
{
    let (mut plus, mut minus): (f64, f64) = (0.0, 0.0);
    for (i, w) in grid.iter().enumerate() {
        for (j, om) in grid.iter().enumerate() {
            let (lp, lm, scale) = lhs(i, j);
            let mut sp = CMatrix::zeros(lp.nrows(), lp.ncols());
            let mut sm = sp.clone();
            for k in 0..w.len() {
                let kern = kernel(k, i, j);
                sp += &kern * (ONE - om[k].conj() * w[k]);
                sm += kern * (w[k] - om[k].conj());
            }
            plus = plus.max(fro(&(lp - sp)) / scale);
            minus = minus.max(fro(&(lm - sm)) / scale);
        }
    }
    (plus, minus)
}
