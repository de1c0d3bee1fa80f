//! Seeded generators for pencils, domain points, grids, and unitaries.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cayley::disk_to_halfplane;
use crate::error::Result;
use crate::matrix::{CMatrix, Tolerances};
use crate::pencil::{PsdPencil, RealizedFunction};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0))
}

/// `G G*` with `G` a `dim x rank` Gaussian matrix.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize, real: bool) -> CMatrix {
    let g = if real {
        random_real_matrix(rng, dim, rank)
    } else {
        random_matrix(rng, dim, rank)
    };
    let m = &g * g.adjoint();
    (&m + m.adjoint()).scale(0.5)
}

/// Haar-like unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PencilShape {
    pub num_vars: usize,
    pub n: usize,
    pub p: usize,
}

/// Random PSD pencil with coefficients of random rank in `1..=n+p`.
pub fn random_pencil<R: Rng + ?Sized>(rng: &mut R, shape: PencilShape, real: bool, tol: Tolerances) -> Result<RealizedFunction> {
    let dim = shape.n + shape.p;
    let coeffs = (0..shape.num_vars)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            random_psd(rng, dim, rank, real)
        })
        .collect();
    RealizedFunction::new(PsdPencil::from_coeffs(shape.n, shape.p, coeffs, &tol)?, tol)
}

/// Shape with `N ∈ 1..=max_vars`, `n ∈ 1..=max_n`, `p ∈ 0..=max_p`.
pub fn random_shape<R: Rng + ?Sized>(rng: &mut R, max_vars: usize, max_n: usize, max_p: usize) -> PencilShape {
    PencilShape {
        num_vars: rng.random_range(1..=max_vars),
        n: rng.random_range(1..=max_n),
        p: rng.random_range(0..=max_p),
    }
}

/// Uniform point of the disk of radius `r_max`.
pub fn disk_scalar<R: Rng + ?Sized>(rng: &mut R, r_max: f64) -> Complex64 {
    let r = r_max * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

pub fn random_disk_point<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, r_max: f64) -> Vec<Complex64> {
    (0..num_vars).map(|_| disk_scalar(rng, r_max)).collect()
}

/// Point of `Π^N`, the Cayley image of a disk point of radius at most `r_max`.
pub fn random_halfplane_point<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, r_max: f64) -> Vec<Complex64> {
    disk_to_halfplane(&random_disk_point(rng, num_vars, r_max)).expect("inside the disk")
}

/// Point of `Ω_N`: a rotated half-plane point `λ z` with `|λ| = 1`.
pub fn random_omega_point<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, r_max: f64) -> Vec<Complex64> {
    let lambda = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    random_halfplane_point(rng, num_vars, r_max).into_iter().map(|z| z * lambda).collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut out = 0.0;
    while i > 0 {
        f /= base as f64;
        out += f * (i % base) as f64;
        i /= base;
    }
    out
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Halton points of the polydisk of radius `r_max`, scrambled by a seeded
/// offset. With `conjugate_closed`, the grid starts at `w = 0` and contains the
/// conjugate of every other point; `count` is rounded up to odd.
pub fn halton_disk_grid(num_vars: usize, count: usize, r_max: f64, seed: u64, conjugate_closed: bool) -> Vec<Vec<Complex64>> {
    assert!(2 * num_vars <= PRIMES.len(), "too many variables for the Halton bases");
    let mut rng = seeded(seed);
    let shift: Vec<f64> = (0..2 * num_vars).map(|_| rng.random::<f64>()).collect();
    let point = |i: u64| -> Vec<Complex64> {
        (0..num_vars)
            .map(|k| {
                let u = (radical_inverse(i, PRIMES[2 * k]) + shift[2 * k]).fract();
                let v = (radical_inverse(i, PRIMES[2 * k + 1]) + shift[2 * k + 1]).fract();
                Complex64::from_polar(r_max * u.sqrt(), 2.0 * PI * v)
            })
            .collect()
    };
    if !conjugate_closed {
        return (1..=count as u64).map(point).collect();
    }
    let mut grid = vec![vec![Complex64::new(0.0, 0.0); num_vars]];
    let mut i = 1;
    while grid.len() < count {
        let w = point(i);
        grid.push(w.iter().map(|c| c.conj()).collect());
        grid.push(w);
        i += 1;
    }
    grid
}

/// Conjugate-closed Halton grid mapped into `Π^N`; the first point is `e`.
pub fn halton_halfplane_grid(num_vars: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    halton_disk_grid(num_vars, count, 0.85, seed, true)
        .iter()
        .map(|w| disk_to_halfplane(w).expect("inside the disk"))
        .collect()
}
