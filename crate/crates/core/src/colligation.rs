//! Agler unitary colligations `U = [A B; C D]` on `X ⊕ U` with
//! `X = X_1 ⊕ … ⊕ X_N`, their transfer functions
//! `𝓕(w) = D + C P(w) (I - A P(w))⁻¹ B`, and synthesis of a selfadjoint
//! unitary colligation from sampled Agler data.
//!
//! Synthesis: with `x_w = [P(w)θ(w); I]` and `y_w = [θ(w); 𝓕(w)]`, the plus
//! identity makes `x_w ↦ y_w` isometric and the minus identity makes
//! `⟨x_w, y_ω⟩ = ⟨y_w, x_ω⟩`. Hence `x_w ↦ y_w, y_w ↦ x_w` is a well defined
//! isometric involution of `span{x_w, y_w}`: it fixes `x_w + y_w`, negates
//! `x_w - y_w`, and the two spans are orthogonal. Extending by the identity
//! gives `U = I - 2 Q Q*`, `Q` an orthonormal basis of `span{x_w - y_w}`.

use num_complex::Complex64;

use crate::cayley::{check_disk, pair_residuals, DiskKernels};
use crate::error::{Error, Result};
use crate::function::{check_arity, MatrixFunction};
use crate::matrix::{self, fro, inverse_checked, CMatrix, Hermitian, Tolerances, ONE};
use crate::pencil::RealizedFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct AglerColligation {
    dims: Vec<usize>,
    n: usize,
    u: CMatrix,
    selfadjoint: bool,
}

impl AglerColligation {
    /// Validates unitarity, and selfadjointness when claimed.
    pub fn new(dims: Vec<usize>, n: usize, u: CMatrix, selfadjoint: bool, tol: &Tolerances) -> Result<Self> {
        let c = Self::new_unchecked(dims, n, u, selfadjoint)?;
        let unitarity = c.unitarity_residual();
        if unitarity > tol.residual_tol {
            return Err(Error::Invalid(format!("U is not unitary (‖U*U - I‖ = {unitarity:.3e})")));
        }
        if selfadjoint {
            let sa = c.selfadjoint_residual();
            if sa > tol.residual_tol {
                return Err(Error::Invalid(format!("U is not selfadjoint (‖U - U*‖ = {sa:.3e})")));
            }
        }
        Ok(c)
    }

    /// Shape checks only, for negative controls.
    pub fn new_unchecked(dims: Vec<usize>, n: usize, u: CMatrix, selfadjoint: bool) -> Result<Self> {
        if dims.is_empty() || n == 0 {
            return Err(Error::Invalid("a colligation needs at least one variable and n > 0".into()));
        }
        let total: usize = dims.iter().sum::<usize>() + n;
        if u.shape() != (total, total) {
            return Err(Error::Dimension(format!("U is {:?}, expected {total}x{total}", u.shape())));
        }
        matrix::check_finite(&u)?;
        Ok(Self { dims, n, u, selfadjoint })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_vars(&self) -> usize {
        self.dims.len()
    }

    pub fn io_dim(&self) -> usize {
        self.n
    }

    pub fn state_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn a(&self) -> CMatrix {
        let x = self.state_dim();
        self.u.view((0, 0), (x, x)).into_owned()
    }

    pub fn b(&self) -> CMatrix {
        let x = self.state_dim();
        self.u.view((0, x), (x, self.n)).into_owned()
    }

    pub fn c(&self) -> CMatrix {
        let x = self.state_dim();
        self.u.view((x, 0), (self.n, x)).into_owned()
    }

    pub fn d(&self) -> CMatrix {
        let x = self.state_dim();
        self.u.view((x, x), (self.n, self.n)).into_owned()
    }

    /// Index range of `X_k` inside `X`.
    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.dims[..k].iter().sum();
        start..start + self.dims[k]
    }

    /// Diagonal of `P(w) = Σ w_k P_{X_k}`.
    pub fn weights(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.dims
            .iter()
            .zip(w)
            .flat_map(|(&d, &wk)| std::iter::repeat_n(wk, d))
            .collect()
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.u.nrows(), self.u.ncols());
        fro(&(self.u.adjoint() * &self.u - id))
    }

    pub fn selfadjoint_residual(&self) -> f64 {
        fro(&(&self.u - self.u.adjoint()))
    }

    /// `(I - A P(w))⁻¹ B`.
    pub fn state_response(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_arity(w, self.num_vars())?;
        let weights = self.weights(w);
        let mut ap = self.a();
        for (j, wj) in weights.iter().enumerate() {
            let mut col = ap.column_mut(j);
            col *= *wj;
        }
        let x = self.state_dim();
        let inv = inverse_checked(&(CMatrix::identity(x, x) - ap), 1e12, "I - A P(w)")?;
        Ok(inv * self.b())
    }

    pub fn transfer_eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_disk(w)?;
        let resp = self.state_response(w)?;
        let weights = self.weights(w);
        let mut pr = resp;
        for (i, wi) in weights.iter().enumerate() {
            let mut row = pr.row_mut(i);
            row *= *wi;
        }
        Ok(self.d() + self.c() * pr)
    }
}

impl MatrixFunction for AglerColligation {
    fn num_vars(&self) -> usize {
        self.dims.len()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        self.transfer_eval(w)
    }
}

/// Residuals over grid pairs of
/// `I - 𝓕(ω)*𝓕(w) = Σ (1 - ω̄_k w_k) H_k(ω)* H_k(w)` and
/// `𝓕(w) - 𝓕(ω)* = Σ (w_k - ω̄_k) H_k(ω)* H_k(w)`, where
/// `H_k(w) = P_{X_k} (I - A P(w))⁻¹ B`.
pub fn agler_identity_residual(c: &AglerColligation, grid: &[Vec<Complex64>]) -> Result<(f64, f64)> {
    let values = grid.iter().map(|w| c.transfer_eval(w)).collect::<Result<Vec<_>>>()?;
    let resp = grid.iter().map(|w| c.state_response(w)).collect::<Result<Vec<_>>>()?;
    let ranges: Vec<_> = (0..c.num_vars()).map(|k| c.block_range(k)).collect();
    Ok(pair_residuals(
        grid,
        |i, j| {
            let id = CMatrix::identity(c.n, c.n);
            (id - values[j].adjoint() * &values[i], &values[i] - values[j].adjoint(), 1.0)
        },
        |k, i, j| {
            let r = &ranges[k];
            resp[j].rows(r.start, r.len()).adjoint() * resp[i].rows(r.start, r.len())
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumCondition {
    /// Distance from 1 to the spectrum of `𝓕(0) = D`.
    pub distance: f64,
    pub holds: bool,
}

/// `1 ∉ σ(𝓕(0))`, with the distance required to be at least `margin`.
pub fn spectrum_condition(c: &AglerColligation, tol: &Tolerances) -> Result<SpectrumCondition> {
    let d = c.d();
    let distance = if fro(&(&d - d.adjoint())) <= tol.residual_tol * (1.0 + fro(&d)) {
        let (values, _) = Hermitian::new(d, &Tolerances::default())?.eigen()?;
        values.iter().map(|l| (1.0 - l).abs()).fold(f64::INFINITY, f64::min)
    } else {
        matrix::eigenvalues(&d)?
            .iter()
            .map(|l| (ONE - l).norm())
            .fold(f64::INFINITY, f64::min)
    };
    Ok(SpectrumCondition {
        distance,
        holds: distance >= tol.margin,
    })
}

/// Outcome of [`build_colligation`], with the achieved residuals.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub colligation: AglerColligation,
    /// Plus and minus Agler identity residuals of the input samples.
    pub sample_residuals: (f64, f64),
    /// `max_j ‖𝓕_α(w_j) - 𝓕(w_j)‖` over the grid.
    pub interpolation_residual: f64,
    pub unitarity_residual: f64,
    pub selfadjoint_residual: f64,
    /// Dimension of `span{x_w - y_w}`, the `-1` eigenspace of `U`.
    pub reflected_rank: usize,
}

/// Largest sample identity residual accepted by [`build_colligation`].
pub const MAX_SAMPLE_RESIDUAL: f64 = 1e-6;

/// Builds a selfadjoint unitary colligation whose transfer function
/// interpolates `schur_samples[j] = 𝓕(w_j)`, from factors
/// `thetas[k][j] = θ_k(w_j)` with `Θ_k(w, ω) = θ_k(ω)* θ_k(w)`.
pub fn build_colligation(
    grid: &[Vec<Complex64>],
    thetas: &[Vec<CMatrix>],
    schur_samples: &[CMatrix],
    tol: &Tolerances,
) -> Result<Synthesis> {
    let num_vars = thetas.len();
    let g = grid.len();
    if num_vars == 0 || g == 0 || schur_samples.len() != g {
        return Err(Error::Dimension("grid, factors and samples disagree in size".into()));
    }
    let n = schur_samples[0].nrows();
    let dims: Vec<usize> = thetas.iter().map(|t| t.first().map(|m| m.nrows()).unwrap_or(0)).collect();
    for (k, tk) in thetas.iter().enumerate() {
        if tk.len() != g || tk.iter().any(|m| m.shape() != (dims[k], n)) {
            return Err(Error::Dimension(format!("factor samples of variable {} are inconsistent", k + 1)));
        }
    }
    for w in grid {
        check_arity(w, num_vars)?;
        check_disk(w)?;
    }
    let sample_residuals = pair_residuals(
        grid,
        |i, j| {
            let (si, sj) = (&schur_samples[i], &schur_samples[j]);
            (CMatrix::identity(n, n) - sj.adjoint() * si, si - sj.adjoint(), 1.0)
        },
        |k, i, j| thetas[k][j].adjoint() * &thetas[k][i],
    );
    let worst = sample_residuals.0.max(sample_residuals.1);
    if !(worst <= MAX_SAMPLE_RESIDUAL) {
        return Err(Error::AglerIdentity { residual: worst });
    }

    let x: usize = dims.iter().sum();
    let mut diffs = CMatrix::zeros(x + n, g * n);
    for (j, w) in grid.iter().enumerate() {
        let mut row = 0;
        for (k, tk) in thetas.iter().enumerate() {
            let theta = &tk[j];
            let block = theta * (w[k] - ONE);
            diffs.view_mut((row, j * n), theta.shape()).copy_from(&block);
            row += dims[k];
        }
        let bottom = CMatrix::identity(n, n) - &schur_samples[j];
        diffs.view_mut((x, j * n), (n, n)).copy_from(&bottom);
    }
    let q = matrix::range_basis(&diffs, tol.psd_slack);
    let reflected_rank = q.ncols();
    let u = CMatrix::identity(x + n, x + n) - (&q * q.adjoint()).scale(2.0);
    let u = (&u + u.adjoint()).scale(0.5);
    let colligation = AglerColligation::new_unchecked(dims, n, u, true)?;

    let mut interpolation_residual: f64 = 0.0;
    for (w, s) in grid.iter().zip(schur_samples) {
        interpolation_residual = interpolation_residual.max(fro(&(colligation.transfer_eval(w)? - s)));
    }
    Ok(Synthesis {
        unitarity_residual: colligation.unitarity_residual(),
        selfadjoint_residual: colligation.selfadjoint_residual(),
        colligation,
        sample_residuals,
        interpolation_residual,
        reflected_rank,
    })
}

/// Samples the double Cayley transform of `f` and its `θ_k` factors on `grid`
/// and synthesizes a selfadjoint unitary colligation for it.
pub fn colligate(f: &RealizedFunction, grid: &[Vec<Complex64>]) -> Result<Synthesis> {
    let dk = DiskKernels::new(f, grid)?;
    build_colligation(grid, &dk.theta_factors(), dk.schur_values(), f.tolerances())
}

/// Grid size past which `span{x_w - y_w}` stops growing for a generic pencil
/// with principal-root factors.
pub fn synthesis_grid_size(f: &RealizedFunction) -> usize {
    let n = f.dim_u();
    let state = f.num_vars() * (n + f.dim_h());
    (state + n).div_ceil(n) + 4
}

/// [`colligate`] on a seeded conjugate-closed grid of [`synthesis_grid_size`] points.
pub fn colligate_auto(f: &RealizedFunction, seed: u64) -> Result<Synthesis> {
    let grid = crate::sampling::halton_disk_grid(f.num_vars(), synthesis_grid_size(f), 0.7, seed, true);
    colligate(f, &grid)
}

/// The flip colligation `U = [[0, 1], [1, 0]]` with transfer function `w`.
pub fn flip() -> AglerColligation {
    let u = matrix::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    AglerColligation::new(vec![1], 1, u, true, &Tolerances::default()).expect("valid fixture")
}
