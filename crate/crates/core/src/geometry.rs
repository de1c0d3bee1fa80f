//! The domains `Ω_N = ⋃_{|λ|=1} (λΠ)^N` and `Ω⁺_{N-1}`, the four-quadrant
//! sign conditions, and de-homogenization.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::function::{check_arity, MatrixFunction};
use crate::matrix::{is_psd_scaled, CMatrix, Hermitian, Tolerances, IMAG, ONE};
use crate::sampling::{random_halfplane_point, seeded};

/// Largest gap between consecutive arguments around the circle, or `None`
/// if some coordinate vanishes.
pub fn largest_angular_gap(z: &[Complex64]) -> Option<f64> {
    if z.is_empty() || z.iter().any(|c| c.norm() == 0.0 || !c.is_finite()) {
        return None;
    }
    let mut args: Vec<f64> = z.iter().map(|c| c.arg().rem_euclid(TAU)).collect();
    args.sort_by(|a, b| a.total_cmp(b));
    let mut gap = TAU - (args[args.len() - 1] - args[0]);
    for w in args.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    Some(gap)
}

/// `z ∈ Ω_N`: the open half-planes `{Re(e^{-iθ} z_k) > 0}` share a direction
/// `θ`, i.e. the arguments lie in an open arc shorter than `π`, i.e. the
/// largest circular gap between them exceeds `π`.
pub fn in_omega(z: &[Complex64]) -> bool {
    largest_angular_gap(z).is_some_and(|g| g > PI)
}

/// Distance of the largest gap from `π`; points closer than a margin to the
/// boundary are excluded from oracle comparisons.
pub fn boundary_margin(z: &[Complex64]) -> f64 {
    largest_angular_gap(z).map(|g| (g - PI).abs()).unwrap_or(0.0)
}

/// `z' ∈ Ω⁺_{N-1}`: a common direction with `|θ| < π/2`, i.e. `(z', 1) ∈ Ω_N`.
pub fn in_omega_plus(z: &[Complex64]) -> bool {
    let mut ext = z.to_vec();
    ext.push(ONE);
    in_omega(&ext)
}

/// Sampled directions `θ_j = 2π (j + 1/2) / resolution`.
#[derive(Clone, Debug)]
pub struct ThetaGrid {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ThetaGrid {
    pub fn new(resolution: usize) -> Self {
        let (cos, sin) = (0..resolution)
            .map(|j| {
                let t = TAU * (j as f64 + 0.5) / resolution as f64;
                (t.cos(), t.sin())
            })
            .unzip();
        Self { cos, sin }
    }

    pub fn resolution(&self) -> usize {
        self.cos.len()
    }

    fn admits(&self, j: usize, z: &[Complex64]) -> bool {
        let (c, s) = (self.cos[j], self.sin[j]);
        z.iter().all(|w| c * w.re + s * w.im > 0.0)
    }

    /// Brute-force search for a sampled `θ` with `Re(e^{-iθ} z_k) > 0` for
    /// all `k`. Only directions admissible for `z_1` are scanned.
    pub fn search(&self, z: &[Complex64]) -> bool {
        let Some(first) = z.first() else {
            return false;
        };
        if z.iter().any(|c| c.norm() == 0.0) {
            return false;
        }
        let res = self.resolution();
        let step = TAU / res as f64;
        let center = first.arg().rem_euclid(TAU) / step;
        let half = res / 4 + 1;
        let start = center as isize - half as isize;
        (0..=2 * half).any(|o| {
            let j = (start + o as isize).rem_euclid(res as isize) as usize;
            self.admits(j, z)
        })
    }

    /// As [`ThetaGrid::search`], restricted to `|θ| < π/2`.
    pub fn search_plus(&self, z: &[Complex64]) -> bool {
        let mut ext = z.to_vec();
        ext.push(ONE);
        self.search(&ext)
    }
}

pub fn in_omega_oracle(z: &[Complex64], resolution: usize) -> bool {
    ThetaGrid::new(resolution).search(z)
}

pub fn in_omega_plus_oracle(z: &[Complex64], resolution: usize) -> bool {
    ThetaGrid::new(resolution).search_plus(z)
}

/// The four rotations `λ ∈ {1, -1, i, -i}` of `Π^N`.
pub const QUADRANTS: [(&str, Complex64); 4] = [
    ("Π", ONE),
    ("-Π", Complex64::new(-1.0, 0.0)),
    ("iΠ", IMAG),
    ("-iΠ", Complex64::new(0.0, -1.0)),
];

#[derive(Clone, Debug)]
pub struct QuadrantResult {
    pub name: &'static str,
    /// Smallest eigenvalue of `λ̄ f(λz) + λ f(λz)*` over the samples,
    /// relative to `‖f(λz)‖`.
    pub min_eigenvalue: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct FourQuadrantReport {
    pub quadrants: Vec<QuadrantResult>,
    pub pass: bool,
}

/// On `(λΠ)^N`, `λ̄ f + λ f* ⪰ 0`: `f + f* ⪰ 0` on `Π^N`, `⪯ 0` on `(-Π)^N`,
/// `i(f* - f) ⪰ 0` on `(iΠ)^N` and `⪯ 0` on `(-iΠ)^N`.
pub fn four_quadrant_check<F: MatrixFunction + ?Sized>(
    f: &F,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<FourQuadrantReport> {
    let mut rng = seeded(seed);
    let points: Vec<Vec<Complex64>> = (0..samples).map(|_| random_halfplane_point(&mut rng, f.num_vars(), 0.9)).collect();
    four_quadrant_on(f, &points, tol)
}

/// [`four_quadrant_check`] on given points of `Π^N`, each rotated four ways.
pub fn four_quadrant_on<F: MatrixFunction + ?Sized>(f: &F, points: &[Vec<Complex64>], tol: &Tolerances) -> Result<FourQuadrantReport> {
    let mut quadrants = Vec::with_capacity(4);
    for (name, lambda) in QUADRANTS {
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for z in points {
            let rotated: Vec<Complex64> = z.iter().map(|c| c * lambda).collect();
            let v = f.eval(&rotated)?;
            let h = &v * lambda.conj() + v.adjoint() * lambda;
            let size = f.magnitude(&rotated);
            let rep = is_psd_scaled(&Hermitian::new(h, &Tolerances::default())?, 2.0 * size, tol)?;
            let scale = crate::matrix::fro(&v).max(size).max(f64::MIN_POSITIVE);
            worst = worst.min(rep.min_eigenvalue / scale);
            pass &= rep.psd;
        }
        quadrants.push(QuadrantResult {
            name,
            min_eigenvalue: worst,
            pass,
        });
    }
    let pass = quadrants.iter().all(|q| q.pass);
    Ok(FourQuadrantReport { quadrants, pass })
}

/// `g(z') = f(z', 1)` on `Ω⁺_{N-1}`.
#[derive(Clone, Debug)]
pub struct Dehomogenized<F> {
    f: F,
}

pub fn dehomogenize<F: MatrixFunction>(f: F) -> Result<Dehomogenized<F>> {
    if f.num_vars() < 2 {
        return Err(Error::Invalid("de-homogenization needs at least two variables".into()));
    }
    Ok(Dehomogenized { f })
}

impl<F> Dehomogenized<F> {
    pub fn inner(&self) -> &F {
        &self.f
    }
}

impl<F: MatrixFunction> MatrixFunction for Dehomogenized<F> {
    fn num_vars(&self) -> usize {
        self.f.num_vars() - 1
    }
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        check_arity(z, self.num_vars())?;
        if !in_omega_plus(z) {
            return Err(Error::OutsideDomain(format!("{z:?} is not in Ω⁺")));
        }
        let mut ext = z.to_vec();
        ext.push(ONE);
        self.f.eval(&ext)
    }
}

/// `f(z) = z_N g(z_1/z_N, …, z_{N-1}/z_N)`.
#[derive(Clone, Debug)]
pub struct Homogenized<G> {
    g: G,
}

pub fn homogenize<G: MatrixFunction>(g: G) -> Homogenized<G> {
    Homogenized { g }
}

impl<G: MatrixFunction> MatrixFunction for Homogenized<G> {
    fn num_vars(&self) -> usize {
        self.g.num_vars() + 1
    }
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        check_arity(z, self.num_vars())?;
        let last = z[z.len() - 1];
        if last.norm() == 0.0 {
            return Err(Error::OutsideDomain("z_N vanishes".into()));
        }
        let quotient: Vec<Complex64> = z[..z.len() - 1].iter().map(|c| c / last).collect();
        if !in_omega_plus(&quotient) {
            return Err(Error::OutsideDomain(format!("quotient point {quotient:?} is not in Ω⁺")));
        }
        Ok(self.g.eval(&quotient)? * last)
    }
}

/// Uniform random arguments on `T^N` times radii in `[0.2, 5]`.
pub fn random_circle_point<R: Rng + ?Sized>(rng: &mut R, num_vars: usize) -> Vec<Complex64> {
    (0..num_vars)
        .map(|_| {
            let r = 0.2 + 4.8 * rng.random::<f64>();
            Complex64::from_polar(r, TAU * rng.random::<f64>())
        })
        .collect()
}
