//! Functional calculus on commuting matrix tuples.
//!
//! Values live on `U ⊗ C^m`: a coefficient `F̂_t` acts as `F̂_t ⊗ T^t` and a
//! pencil coefficient `A_k` as `A_k ⊗ R_k`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::colligation::{colligate_auto, AglerColligation, Synthesis};
use crate::error::{Error, Result};
use crate::function::{check_arity, MatrixFunction};
use crate::matrix::{self, fro, inverse_checked, kron, operator_norm, CMatrix, Hermitian, PsdReport, Tolerances, ONE};
use crate::pencil::{split, Pencil, RealizedFunction};

/// A simultaneous diagonalization `R_k = V diag(λ_k) V⁻¹`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub v: CMatrix,
    pub v_inv: CMatrix,
    /// `joint[j][k]` is the eigenvalue of `R_k` on column `j` of `V`.
    pub joint: Vec<Vec<Complex64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleClass {
    /// `max_k ‖T_k‖ ≤ 1 - margin`.
    Contraction,
    /// `min_k λ_min(R_k + R_k*) ≥ margin`.
    Accretive,
}

/// How to build a [`CommutingTuple`].
#[derive(Clone, Debug)]
pub enum TupleRecipe {
    /// `V diag(d_k) V⁻¹`, one diagonal per variable.
    Similarity { v: CMatrix, diagonals: Vec<Vec<Complex64>> },
    /// `p_k(S)` with `coeffs[k]` the coefficients of `p_k` in increasing degree.
    Polynomial { seed: CMatrix, coeffs: Vec<Vec<Complex64>> },
    Explicit(Vec<CMatrix>),
}

#[derive(Clone, Debug)]
pub struct CommutingTuple {
    ops: Vec<CMatrix>,
    commutator: f64,
    contraction_bound: f64,
    accretivity: f64,
    diagonalization: Option<Diagonalization>,
}

fn polynomial(seed: &CMatrix, coeffs: &[Complex64]) -> CMatrix {
    let m = seed.nrows();
    let mut acc = CMatrix::zeros(m, m);
    for c in coeffs.iter().rev() {
        acc = &acc * seed + CMatrix::identity(m, m) * *c;
    }
    acc
}

/// Builds and certifies a commuting tuple; with `class`, also requires that
/// classification to hold.
pub fn make_tuple(recipe: TupleRecipe, class: Option<TupleClass>, tol: &Tolerances) -> Result<CommutingTuple> {
    let (ops, diagonalization) = match recipe {
        TupleRecipe::Similarity { v, diagonals } => {
            matrix::check_square(&v)?;
            let m = v.nrows();
            if diagonals.is_empty() || diagonals.iter().any(|d| d.len() != m) {
                return Err(Error::Dimension(format!("each diagonal needs {m} entries")));
            }
            let v_inv = inverse_checked(&v, tol.max_condition(), "V")?;
            let ops = diagonals
                .iter()
                .map(|d| &v * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())) * &v_inv)
                .collect();
            let joint = (0..m).map(|j| diagonals.iter().map(|d| d[j]).collect()).collect();
            (ops, Some(Diagonalization { v, v_inv, joint }))
        }
        TupleRecipe::Polynomial { seed, coeffs } => {
            matrix::check_square(&seed)?;
            (coeffs.iter().map(|c| polynomial(&seed, c)).collect(), None)
        }
        TupleRecipe::Explicit(ops) => (ops, None),
    };
    let tuple = CommutingTuple::certify(ops, diagonalization, tol)?;
    if let Some(class) = class {
        tuple.require(class, tol)?;
    }
    Ok(tuple)
}

impl CommutingTuple {
    fn certify(ops: Vec<CMatrix>, diagonalization: Option<Diagonalization>, tol: &Tolerances) -> Result<Self> {
        let m = ops.first().ok_or_else(|| Error::Invalid("empty tuple".into()))?.nrows();
        for op in &ops {
            if op.shape() != (m, m) {
                return Err(Error::Dimension("tuple members differ in size".into()));
            }
            matrix::check_finite(op)?;
        }
        let mut commutator: f64 = 0.0;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                let c = fro(&(&ops[i] * &ops[j] - &ops[j] * &ops[i]));
                let scale = (fro(&ops[i]) * fro(&ops[j])).max(1.0);
                if c > tol.commutator_tol * scale {
                    return Err(Error::NotCommuting { commutator: c });
                }
                commutator = commutator.max(c);
            }
        }
        let contraction_bound = ops.iter().map(operator_norm).fold(0.0, f64::max);
        let mut accretivity = f64::INFINITY;
        for op in &ops {
            let s = Hermitian::new(op + op.adjoint(), &Tolerances::default())?.min_eigenvalue()?;
            accretivity = accretivity.min(s);
        }
        Ok(Self {
            ops,
            commutator,
            contraction_bound,
            accretivity,
            diagonalization,
        })
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn num_vars(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Largest pairwise commutator norm.
    pub fn commutator(&self) -> f64 {
        self.commutator
    }

    /// `max_k ‖T_k‖`.
    pub fn contraction_bound(&self) -> f64 {
        self.contraction_bound
    }

    /// `1 - max_k ‖T_k‖`.
    pub fn contraction_margin(&self) -> f64 {
        1.0 - self.contraction_bound
    }

    /// The largest `s` with `R_k + R_k* ⪰ s I` for all `k`.
    pub fn accretivity(&self) -> f64 {
        self.accretivity
    }

    pub fn diagonalization(&self) -> Option<&Diagonalization> {
        self.diagonalization.as_ref()
    }

    pub fn is(&self, class: TupleClass, tol: &Tolerances) -> bool {
        match class {
            TupleClass::Contraction => self.contraction_bound <= 1.0 - tol.margin,
            TupleClass::Accretive => self.accretivity >= tol.margin,
        }
    }

    pub fn require(&self, class: TupleClass, tol: &Tolerances) -> Result<()> {
        if self.is(class, tol) {
            return Ok(());
        }
        Err(Error::Margin(match class {
            TupleClass::Contraction => format!("max ‖T_k‖ = {} exceeds 1 - margin", self.contraction_bound),
            TupleClass::Accretive => format!("min λ_min(R_k + R_k*) = {} is below margin", self.accretivity),
        }))
    }

    /// `R_k = (I + T_k)(I - T_k)⁻¹` of a contraction tuple; similarity data is kept.
    pub fn to_accretive(&self, tol: &Tolerances) -> Result<CommutingTuple> {
        self.require(TupleClass::Contraction, tol)?;
        let ops = crate::cayley::operator_cayley(&self.ops, tol)?;
        let diag = self.diagonalization.as_ref().map(|d| Diagonalization {
            v: d.v.clone(),
            v_inv: d.v_inv.clone(),
            joint: d.joint.iter().map(|l| l.iter().map(|t| (ONE + t) / (ONE - t)).collect()).collect(),
        });
        CommutingTuple::certify(ops, diag, &relaxed(tol))
    }

    /// `T_k = (R_k - I)(R_k + I)⁻¹` of an accretive tuple.
    pub fn to_contraction(&self, tol: &Tolerances) -> Result<CommutingTuple> {
        self.require(TupleClass::Accretive, tol)?;
        let ops = crate::cayley::inverse_operator_cayley(&self.ops, tol)?;
        let diag = self.diagonalization.as_ref().map(|d| Diagonalization {
            v: d.v.clone(),
            v_inv: d.v_inv.clone(),
            joint: d.joint.iter().map(|l| l.iter().map(|r| (r - ONE) / (r + ONE)).collect()).collect(),
        });
        CommutingTuple::certify(ops, diag, &relaxed(tol))
    }
}

/// Rational images of a commuting tuple commute only up to rounding.
fn relaxed(tol: &Tolerances) -> Tolerances {
    Tolerances {
        commutator_tol: tol.commutator_tol.max(1e-9),
        ..*tol
    }
}

/// All multi-indices of `num_vars` entries with `|t| ≤ degree`, graded, then
/// lexicographically decreasing within a degree.
pub fn graded_indices(num_vars: usize, degree: usize) -> Vec<Vec<usize>> {
    fn fill(rest: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == cur.len() {
            cur[k] = rest;
            out.push(cur.clone());
            return;
        }
        for v in (0..=rest).rev() {
            cur[k] = v;
            fill(rest - v, k + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; num_vars];
    for d in 0..=degree {
        fill(d, 0, &mut cur, &mut out);
    }
    out
}

/// Truncated Taylor series `Σ_{|t| ≤ degree} F̂_t w^t`.
#[derive(Clone, Debug)]
pub struct TaylorSeries {
    num_vars: usize,
    dim: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
    coeffs: Vec<CMatrix>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl TaylorSeries {
    pub fn from_fn<C>(num_vars: usize, dim: usize, degree: usize, mut coeff: C) -> Self
    where
        C: FnMut(&[usize]) -> CMatrix,
    {
        let indices = graded_indices(num_vars, degree);
        let coeffs = indices.iter().map(|t| coeff(t)).collect();
        Self::assemble(num_vars, dim, degree, indices, coeffs)
    }

    /// A polynomial from its nonzero terms.
    pub fn polynomial(num_vars: usize, dim: usize, terms: &[(Vec<usize>, CMatrix)]) -> Self {
        let degree = terms.iter().map(|(t, _)| t.iter().sum()).max().unwrap_or(0);
        Self::from_fn(num_vars, dim, degree, |t| {
            terms
                .iter()
                .filter(|(s, _)| s.as_slice() == t)
                .fold(CMatrix::zeros(dim, dim), |acc, (_, c)| acc + c)
        })
    }

    fn assemble(num_vars: usize, dim: usize, degree: usize, indices: Vec<Vec<usize>>, coeffs: Vec<CMatrix>) -> Self {
        let lookup = indices.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Self {
            num_vars,
            dim,
            degree,
            indices,
            coeffs,
            lookup,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// `F̂_t`, zero beyond the stored degree.
    pub fn coefficient(&self, t: &[usize]) -> CMatrix {
        self.lookup
            .get(t)
            .map(|&i| self.coeffs[i].clone())
            .unwrap_or_else(|| CMatrix::zeros(self.dim, self.dim))
    }

    /// Restriction to degree `≤ degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        Self::from_fn(self.num_vars, self.dim, degree, |t| self.coefficient(t))
    }

    /// Largest `‖F̂_t - Ĝ_t‖` over the common indices.
    pub fn max_difference(&self, other: &TaylorSeries) -> f64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .filter(|(t, _)| other.lookup.contains_key(*t))
            .map(|(t, c)| fro(&(c - other.coefficient(t))))
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_arity(w, self.num_vars)?;
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (t, c) in self.indices.iter().zip(&self.coeffs) {
            let mono = t.iter().zip(w).fold(ONE, |p, (&e, z)| p * z.powu(e as u32));
            acc += c * mono;
        }
        Ok(acc)
    }
}

/// A disk function with computable Taylor coefficients.
pub trait SeriesSource {
    fn num_vars(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix>;
    fn coefficients(&self, degree: usize) -> Result<TaylorSeries>;
    /// Degree of a polynomial source, for which the tail vanishes beyond it.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

impl SeriesSource for TaylorSeries {
    fn num_vars(&self) -> usize {
        self.num_vars
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        TaylorSeries::eval(self, w)
    }
    fn coefficients(&self, degree: usize) -> Result<TaylorSeries> {
        Ok(self.truncate(degree))
    }
    fn polynomial_degree(&self) -> Option<usize> {
        Some(self.degree)
    }
}

/// A source given by an evaluator and a coefficient formula.
pub struct FnSeries<E, C> {
    num_vars: usize,
    dim: usize,
    eval: E,
    coeff: C,
}

impl<E, C> FnSeries<E, C>
where
    E: Fn(&[Complex64]) -> Result<CMatrix>,
    C: Fn(&[usize]) -> CMatrix,
{
    pub fn new(num_vars: usize, dim: usize, eval: E, coeff: C) -> Self {
        Self { num_vars, dim, eval, coeff }
    }
}

impl<E, C> SeriesSource for FnSeries<E, C>
where
    E: Fn(&[Complex64]) -> Result<CMatrix>,
    C: Fn(&[usize]) -> CMatrix,
{
    fn num_vars(&self) -> usize {
        self.num_vars
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_arity(w, self.num_vars)?;
        (self.eval)(w)
    }
    fn coefficients(&self, degree: usize) -> Result<TaylorSeries> {
        Ok(TaylorSeries::from_fn(self.num_vars, self.dim, degree, &self.coeff))
    }
}

/// `D + C P(w) (I - A P(w))⁻¹ B` with `P(w)` weighting the state blocks.
#[derive(Clone, Debug)]
pub struct StateSpaceSeries {
    dims: Vec<usize>,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl StateSpaceSeries {
    /// The transfer function `𝓕` of a colligation.
    pub fn schur(col: &AglerColligation) -> Self {
        Self {
            dims: col.dims().to_vec(),
            a: col.a(),
            b: col.b(),
            c: col.c(),
            d: col.d(),
        }
    }

    /// `F = (I + 𝓕)(I - 𝓕)⁻¹ = 2 (I - 𝓕)⁻¹ - I`, realized by
    /// `A + B (I - D)⁻¹ C`, `B (I - D)⁻¹`, `2 (I - D)⁻¹ C`, `2 (I - D)⁻¹ - I`.
    pub fn herglotz(col: &AglerColligation, tol: &Tolerances) -> Result<Self> {
        let n = col.io_dim();
        let id = CMatrix::identity(n, n);
        let inv = inverse_checked(&(&id - col.d()), tol.max_condition(), "I - D")?;
        Ok(Self {
            dims: col.dims().to_vec(),
            a: col.a() + col.b() * &inv * col.c(),
            b: col.b() * &inv,
            c: (&inv * col.c()).scale(2.0),
            d: inv.scale(2.0) - id,
        })
    }

    fn block_start(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }
}

impl SeriesSource for StateSpaceSeries {
    fn num_vars(&self) -> usize {
        self.dims.len()
    }
    fn dim(&self) -> usize {
        self.d.nrows()
    }
    fn eval(&self, w: &[Complex64]) -> Result<CMatrix> {
        check_arity(w, self.dims.len())?;
        let x = self.a.nrows();
        let weights: Vec<Complex64> = self
            .dims
            .iter()
            .zip(w)
            .flat_map(|(&d, &wk)| std::iter::repeat_n(wk, d))
            .collect();
        let mut ap = self.a.clone();
        for (j, wj) in weights.iter().enumerate() {
            let mut col = ap.column_mut(j);
            col *= *wj;
        }
        let inv = inverse_checked(&(CMatrix::identity(x, x) - ap), 1e12, "I - A P(w)")?;
        let mut resp = inv * &self.b;
        for (i, wi) in weights.iter().enumerate() {
            let mut row = resp.row_mut(i);
            row *= *wi;
        }
        Ok(&self.d + &self.c * resp)
    }

    /// `g_{e_k} = P_k B`, `g_t = Σ_k P_k A g_{t - e_k}`, `F̂_t = C g_t`, `F̂_0 = D`.
    fn coefficients(&self, degree: usize) -> Result<TaylorSeries> {
        let num_vars = self.dims.len();
        let n = self.d.nrows();
        let x = self.a.nrows();
        let indices = graded_indices(num_vars, degree);
        let lookup: HashMap<Vec<usize>, usize> = indices.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let mut states: Vec<CMatrix> = Vec::with_capacity(indices.len());
        let mut coeffs = Vec::with_capacity(indices.len());
        for t in &indices {
            let mut g = CMatrix::zeros(x, n);
            if t.iter().sum::<usize>() > 0 {
                for k in 0..num_vars {
                    if t[k] == 0 || self.dims[k] == 0 {
                        continue;
                    }
                    let (start, len) = (self.block_start(k), self.dims[k]);
                    let mut prev = t.clone();
                    prev[k] -= 1;
                    let rows = if prev.iter().all(|&e| e == 0) {
                        self.b.rows(start, len).into_owned()
                    } else {
                        self.a.rows(start, len) * &states[lookup[&prev]]
                    };
                    g.rows_mut(start, len).copy_from(&rows);
                }
                coeffs.push(&self.c * &g);
            } else {
                coeffs.push(self.d.clone());
            }
            states.push(g);
        }
        Ok(TaylorSeries::assemble(num_vars, n, degree, indices, coeffs))
    }
}

/// Taylor coefficients by the Cauchy formula on the torus of radius `radius`,
/// with `M` and `2M` nodes per axis; returns the finer estimate and the
/// largest difference between the two.
pub fn cauchy_coefficients<F: MatrixFunction + ?Sized>(f: &F, degree: usize, radius: f64) -> Result<(TaylorSeries, f64)> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::Invalid(format!("Cauchy radius {radius} must lie in (0, 1)")));
    }
    // Aliasing from degree t + M is damped by radius^M.
    let nodes = (degree + 1).max((1e-11f64.ln() / radius.ln()).ceil() as usize);
    let coarse = cauchy_at(f, degree, radius, nodes)?;
    let fine = cauchy_at(f, degree, radius, 2 * nodes)?;
    let diff = fine.max_difference(&coarse);
    Ok((fine, diff))
}

fn cauchy_at<F: MatrixFunction + ?Sized>(f: &F, degree: usize, radius: f64, nodes: usize) -> Result<TaylorSeries> {
    let num_vars = f.num_vars();
    let n = f.dim();
    let roots: Vec<Complex64> = (0..nodes).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64)).collect();
    let total = nodes.pow(num_vars as u32);
    let mut samples = Vec::with_capacity(total);
    let mut node_idx = vec![0usize; num_vars];
    for flat in 0..total {
        let mut r = flat;
        for slot in node_idx.iter_mut() {
            *slot = r % nodes;
            r /= nodes;
        }
        let w: Vec<Complex64> = node_idx.iter().map(|&j| roots[j] * radius).collect();
        samples.push((node_idx.clone(), f.eval(&w)?));
    }
    let scale = 1.0 / total as f64;
    Ok(TaylorSeries::from_fn(num_vars, n, degree, |t| {
        let mut acc = CMatrix::zeros(n, n);
        for (js, value) in &samples {
            let phase: usize = js.iter().zip(t).map(|(j, e)| j * e).sum::<usize>() % nodes;
            acc += value * roots[phase].conj();
        }
        let deg: usize = t.iter().sum();
        acc * Complex64::new(scale / radius.powi(deg as i32), 0.0)
    }))
}

/// Sampled `sup ‖F‖` on the torus `|w_k| = radius`.
pub fn torus_sup<S: SeriesSource + ?Sized>(source: &S, radius: f64) -> Result<f64> {
    let num_vars = source.num_vars();
    let per_axis = ((4096f64).powf(1.0 / num_vars as f64).ceil() as usize).clamp(4, 32);
    let total = per_axis.pow(num_vars as u32);
    let mut sup: f64 = 0.0;
    for flat in 0..total {
        let mut r = flat;
        let w: Vec<Complex64> = (0..num_vars)
            .map(|k| {
                let j = r % per_axis;
                r /= per_axis;
                // Stagger the axes so the nodes do not line up with symmetry axes.
                let angle = 2.0 * PI * (j as f64 + 0.5 * k as f64 / num_vars as f64) / per_axis as f64;
                Complex64::from_polar(radius, angle)
            })
            .collect();
        sup = sup.max(operator_norm(&source.eval(&w)?));
    }
    Ok(sup)
}

/// Inflation applied to the sampled torus sup before the Cauchy estimate.
pub const SUP_SAFETY: f64 = 1.25;

/// `bound · Σ_{d > degree} C(d + N - 1, N - 1) r^d`, with the geometric
/// majorant once the terms decrease.
pub fn tail_bound(bound: f64, ratio: f64, num_vars: usize, degree: usize) -> f64 {
    if ratio == 0.0 || bound == 0.0 {
        return 0.0;
    }
    let nv = num_vars as f64;
    let mut d = degree + 1;
    // log of C(d + N - 1, N - 1) r^d
    let mut log_term = (1..num_vars).map(|j| ((d + j) as f64 / j as f64).ln()).sum::<f64>() + d as f64 * ratio.ln();
    let mut sum = 0.0;
    loop {
        let term = log_term.exp();
        sum += term;
        let next_ratio = (d as f64 + nv) / (d as f64 + 1.0) * ratio;
        if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) <= 1e-3 * sum.max(f64::MIN_POSITIVE) {
            sum += term * next_ratio / (1.0 - next_ratio);
            break;
        }
        if d > 1_000_000 {
            return f64::INFINITY;
        }
        log_term += next_ratio.ln();
        d += 1;
    }
    bound * sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    Fixed(usize),
    /// Smallest degree whose tail bound is at most `target`.
    Adaptive { target: f64, max_degree: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    pub truncation: Truncation,
    /// Radius `ρ'` of the Cauchy estimate; default `(1 + ρ) / 2`.
    pub coefficient_radius: Option<f64>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            truncation: Truncation::Adaptive {
                target: 1e-10,
                max_degree: 400,
            },
            coefficient_radius: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: CMatrix,
    /// Bound on `‖Σ_{|t| > degree} F̂_t ⊗ T^t‖`.
    pub tail: f64,
    pub degree: usize,
    /// `max_k ‖T_k‖`.
    pub rho: f64,
    /// Inflated sup of `‖F‖` on the coefficient torus.
    pub coefficient_bound: f64,
}

/// `F(T) = Σ_t F̂_t ⊗ T^t` with a Cauchy tail bound.
pub fn calc_series<S: SeriesSource + ?Sized>(source: &S, t: &CommutingTuple, opts: &SeriesOptions) -> Result<SeriesValue> {
    let num_vars = source.num_vars();
    if t.num_vars() != num_vars {
        return Err(Error::Dimension(format!("tuple has {} members, function has {num_vars} variables", t.num_vars())));
    }
    let rho = t.contraction_bound();
    if rho >= 1.0 {
        return Err(Error::Margin(format!("max ‖T_k‖ = {rho} is not below 1")));
    }
    let radius = opts.coefficient_radius.unwrap_or((1.0 + rho) / 2.0);
    if !(radius > rho && radius < 1.0) {
        return Err(Error::Invalid(format!("coefficient radius {radius} must lie in (ρ, 1) with ρ = {rho}")));
    }
    let bound = SUP_SAFETY * torus_sup(source, radius)?;
    let ratio = rho / radius;
    let (degree, tail) = match opts.truncation {
        Truncation::Fixed(d) => (d, tail_bound(bound, ratio, num_vars, d)),
        Truncation::Adaptive { target, max_degree } => {
            let mut found = None;
            for d in 0..=max_degree {
                let tail = tail_bound(bound, ratio, num_vars, d);
                if tail <= target {
                    found = Some((d, tail));
                    break;
                }
            }
            match found {
                Some(f) => f,
                None => {
                    return Err(Error::TailTooLarge {
                        tail: tail_bound(bound, ratio, num_vars, max_degree),
                    })
                }
            }
        }
    };
    let (degree, tail) = match source.polynomial_degree() {
        Some(p) if p <= degree => (p, 0.0),
        _ => (degree, tail),
    };
    let series = source.coefficients(degree)?;
    let m = t.dim();
    let mut powers: Vec<CMatrix> = Vec::with_capacity(series.indices.len());
    let mut value = CMatrix::zeros(series.dim * m, series.dim * m);
    for (idx, (ti, c)) in series.indices.iter().zip(&series.coeffs).enumerate() {
        let power = match ti.iter().position(|&e| e > 0) {
            None => CMatrix::identity(m, m),
            Some(k) => {
                let mut prev = ti.clone();
                prev[k] -= 1;
                &t.ops()[k] * &powers[series.lookup[&prev]]
            }
        };
        if fro(c) > 0.0 {
            value += kron(c, &power);
        }
        powers.push(power);
        debug_assert_eq!(powers.len(), idx + 1);
    }
    Ok(SeriesValue {
        value,
        tail,
        degree,
        rho,
        coefficient_bound: bound,
    })
}

/// `a(R) - b(R) d(R)⁻¹ c(R)` with `A(R) = Σ A_k ⊗ R_k`; no PSD requirement.
pub fn calc_pencil(p: &Pencil, ops: &[CMatrix], tol: &Tolerances) -> Result<CMatrix> {
    if ops.len() != p.num_vars() {
        return Err(Error::Dimension(format!("tuple has {} members, pencil has {} variables", ops.len(), p.num_vars())));
    }
    let m = ops[0].nrows();
    let size = (p.dim_u() + p.dim_h()) * m;
    let mut full = CMatrix::zeros(size, size);
    for (a, r) in p.coeffs().iter().zip(ops) {
        full += kron(a, r);
    }
    let blocks = split(&full, p.dim_u() * m);
    if p.dim_h() == 0 {
        return Ok(blocks.a);
    }
    let dinv = inverse_checked(&blocks.d, tol.max_condition(), "d(R)")?;
    Ok(blocks.a - blocks.b * dinv * blocks.c)
}

/// `f(R)` in closed form for a strictly accretive tuple.
pub fn calc_realized(f: &RealizedFunction, r: &CommutingTuple) -> Result<CMatrix> {
    r.require(TupleClass::Accretive, f.tolerances())?;
    calc_pencil(f.pencil(), r.ops(), f.tolerances())
}

/// `Σ_j f(λ_j) ⊗ v_j u_j` for a diagonalized tuple, `u_j` the rows of `V⁻¹`.
pub fn pointwise_calculus<F: MatrixFunction + ?Sized>(f: &F, diag: &Diagonalization) -> Result<CMatrix> {
    let n = f.dim();
    let m = diag.v.nrows();
    let mut out = CMatrix::zeros(n * m, n * m);
    for (j, lambda) in diag.joint.iter().enumerate() {
        let proj = diag.v.column(j) * diag.v_inv.row(j);
        out += kron(&f.eval(lambda)?, &proj);
    }
    Ok(out)
}

/// `λ_min(X + X*)` against the floor `psd_slack · max(‖X + X*‖, scale)`.
/// `scale` is the size of the data `X` was computed from, so that a value
/// that cancels down to rounding is not judged against its own noise.
pub fn positivity_report(x: &CMatrix, scale: f64, tol: &Tolerances) -> Result<PsdReport> {
    let h = Hermitian::new(x + x.adjoint(), &Tolerances::default())?;
    let min_eigenvalue = h.min_eigenvalue()?;
    let floor = tol.psd_floor(fro(h.as_matrix()).max(scale));
    Ok(PsdReport {
        min_eigenvalue,
        floor,
        psd: min_eigenvalue >= -floor,
    })
}

/// `Σ_k ‖A_k‖ ‖R_k‖`, the size of `A(R)`.
pub fn pencil_scale(p: &Pencil, ops: &[CMatrix]) -> f64 {
    p.coeffs().iter().zip(ops).map(|(a, r)| fro(a) * fro(r)).sum()
}

/// `f(R) + f(R)* ⪰ 0` for an accretive tuple, for any pencil (checked or not).
pub fn accretive_positivity_check(p: &Pencil, r: &CommutingTuple, tol: &Tolerances) -> Result<PsdReport> {
    r.require(TupleClass::Accretive, tol)?;
    positivity_report(&calc_pencil(p, r.ops(), tol)?, pencil_scale(p, r.ops()), tol)
}

#[derive(Clone, Debug)]
pub struct DehomogenizedCalculus {
    /// `(I ⊗ R_N) g(R_N⁻¹ R_1, …, R_N⁻¹ R_{N-1})`.
    pub value: CMatrix,
    pub positivity: PsdReport,
    /// Relative distance to `f(R)`.
    pub homogeneity_residual: f64,
}

pub fn dehomogenized_calculus(p: &Pencil, r: &CommutingTuple, tol: &Tolerances) -> Result<DehomogenizedCalculus> {
    r.require(TupleClass::Accretive, tol)?;
    let num_vars = r.num_vars();
    if num_vars < 2 {
        return Err(Error::Invalid("de-homogenization needs at least two variables".into()));
    }
    let m = r.dim();
    let last = &r.ops()[num_vars - 1];
    let last_inv = inverse_checked(last, tol.max_condition(), "R_N")?;
    let mut args: Vec<CMatrix> = r.ops()[..num_vars - 1].iter().map(|rk| &last_inv * rk).collect();
    args.push(CMatrix::identity(m, m));
    let g = calc_pencil(p, &args, tol)?;
    let value = kron(&CMatrix::identity(p.dim_u(), p.dim_u()), last) * g;
    let direct = calc_pencil(p, r.ops(), tol)?;
    Ok(DehomogenizedCalculus {
        positivity: positivity_report(&value, pencil_scale(p, r.ops()), tol)?,
        homogeneity_residual: matrix::relative_residual(&value, &direct),
        value,
    })
}

/// Largest tail for which [`von_neumann_check`] still decides.
pub const MAX_DECIDABLE_TAIL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct VonNeumannReport {
    pub norm: f64,
    pub tail: f64,
    pub degree: usize,
    /// `norm > 1 + tail + psd_slack`.
    pub violation: bool,
}

pub fn von_neumann_check<S: SeriesSource + ?Sized>(
    source: &S,
    t: &CommutingTuple,
    opts: &SeriesOptions,
    tol: &Tolerances,
) -> Result<VonNeumannReport> {
    t.require(TupleClass::Contraction, tol)?;
    let sv = calc_series(source, t, opts)?;
    if sv.tail > MAX_DECIDABLE_TAIL {
        return Err(Error::TailTooLarge { tail: sv.tail });
    }
    let norm = operator_norm(&sv.value);
    Ok(VonNeumannReport {
        norm,
        tail: sv.tail,
        degree: sv.degree,
        violation: norm > 1.0 + sv.tail + tol.psd_slack,
    })
}

/// Schur and Herglotz series of a realized function through a synthesized colligation.
pub struct PencilSeries {
    pub synthesis: Synthesis,
    pub schur: StateSpaceSeries,
    pub herglotz: StateSpaceSeries,
}

pub fn pencil_series(f: &RealizedFunction, seed: u64) -> Result<PencilSeries> {
    let synthesis = colligate_auto(f, seed)?;
    let schur = StateSpaceSeries::schur(&synthesis.colligation);
    let herglotz = StateSpaceSeries::herglotz(&synthesis.colligation, f.tolerances())?;
    Ok(PencilSeries {
        synthesis,
        schur,
        herglotz,
    })
}
