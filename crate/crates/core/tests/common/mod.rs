// Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use bessmertnyi::colligation::AglerColligation;
use bessmertnyi::{CMatrix, Pencil};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    DMatrix::identity(n, n)
}

pub fn inv(m: &CMatrix) -> CMatrix {
    m.clone().lu().try_inverse().expect("invertible")
}

pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a - b‖ / (1 + ‖b‖)`.
pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    fro(&(a - b)) / (1.0 + fro(b))
}

pub fn op_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Smallest eigenvalue of the Hermitian part of `m + m*`.
pub fn min_eig_real_part(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    let h = (&h + h.adjoint()).scale(0.5);
    h.symmetric_eigen().eigenvalues.min()
}

pub fn min_eig(h: &CMatrix) -> f64 {
    let h = (h + h.adjoint()).scale(0.5);
    h.symmetric_eigen().eigenvalues.min()
}

pub fn pencil_at(p: &Pencil, z: &[Complex64]) -> CMatrix {
    let size = p.dim_u() + p.dim_h();
    let mut a = CMatrix::zeros(size, size);
    for (ak, zk) in p.coeffs().iter().zip(z) {
        a += ak * *zk;
    }
    a
}

/// `Σ |z_k| ‖A_k‖`.
pub fn data_size(p: &Pencil, z: &[Complex64]) -> f64 {
    p.coeffs().iter().zip(z).map(|(a, zk)| zk.norm() * fro(a)).sum()
}

/// `a(z) - b(z) d(z)⁻¹ c(z)` by block elimination of the full pencil.
pub fn schur_value(p: &Pencil, z: &[Complex64]) -> CMatrix {
    let (n, h) = (p.dim_u(), p.dim_h());
    let a = pencil_at(p, z);
    let top = a.view((0, 0), (n, n)).into_owned();
    if h == 0 {
        return top;
    }
    let b = a.view((0, n), (n, h)).into_owned();
    top + b * psi(p, z).view((n, 0), (h, n))
}

/// `[I; -d(z)⁻¹ c(z)]`.
pub fn psi(p: &Pencil, z: &[Complex64]) -> CMatrix {
    let (n, h) = (p.dim_u(), p.dim_h());
    let a = pencil_at(p, z);
    let mut out = CMatrix::zeros(n + h, n);
    out.view_mut((0, 0), (n, n)).copy_from(&identity(n));
    if h > 0 {
        let d = a.view((n, n), (h, h)).into_owned();
        let cz = a.view((n, 0), (h, n)).into_owned();
        let x = d.lu().solve(&cz).expect("d(z) invertible");
        out.view_mut((n, 0), (h, n)).copy_from(&(-x));
    }
    out
}

/// Largest `‖f(z) - f(ζ)* - Σ (z_k - ζ̄_k) ψ(ζ)* A_k ψ(z)‖` over pairs, relative.
pub fn kernel_identity(p: &Pencil, points: &[Vec<Complex64>]) -> f64 {
    let values: Vec<CMatrix> = points.iter().map(|z| schur_value(p, z)).collect();
    let psis: Vec<CMatrix> = points.iter().map(|z| psi(p, z)).collect();
    let mut worst: f64 = 0.0;
    for (i, z) in points.iter().enumerate() {
        for (j, zeta) in points.iter().enumerate() {
            let lhs = &values[i] - values[j].adjoint();
            let mut rhs = CMatrix::zeros(p.dim_u(), p.dim_u());
            for (k, ak) in p.coeffs().iter().enumerate() {
                rhs += psis[j].adjoint() * ak * &psis[i] * (z[k] - zeta[k].conj());
            }
            let scale = 1.0 + fro(&values[i]) + fro(&values[j]);
            worst = worst.max(fro(&(lhs - rhs)) / scale);
        }
    }
    worst
}

pub fn disk_to_halfplane(w: &[Complex64]) -> Vec<Complex64> {
    w.iter().map(|x| (1.0 + x) / (1.0 - x)).collect()
}

/// `(F - I)(F + I)⁻¹` with `F(w) = f((1 + w)/(1 - w))`.
pub fn double_cayley(p: &Pencil, w: &[Complex64]) -> CMatrix {
    let n = p.dim_u();
    let f = schur_value(p, &disk_to_halfplane(w));
    (&f - identity(n)) * inv(&(&f + identity(n)))
}

/// `D + C P(w) (I - A P(w))⁻¹ B` from the blocks of `U`.
pub fn transfer(col: &AglerColligation, w: &[Complex64]) -> CMatrix {
    let u = col.u();
    let x = col.state_dim();
    let n = col.io_dim();
    let mut pw = CMatrix::zeros(x, x);
    let mut i = 0;
    for (k, &d) in col.dims().iter().enumerate() {
        for _ in 0..d {
            pw[(i, i)] = w[k];
            i += 1;
        }
    }
    let a = u.view((0, 0), (x, x)).into_owned();
    let b = u.view((0, x), (x, n)).into_owned();
    let cc = u.view((x, 0), (n, x)).into_owned();
    let d = u.view((x, x), (n, n)).into_owned();
    d + cc * &pw * inv(&(identity(x) - a * &pw)) * b
}

/// `Σ_j f(λ_j) ⊗ v_j ŵ_j` for `R_k = V diag V⁻¹`, where `ŵ_j` is row `j` of `V⁻¹`.
pub fn joint_spectrum_value(
    f: impl Fn(&[Complex64]) -> CMatrix,
    v: &CMatrix,
    diagonals: &[Vec<Complex64>],
) -> CMatrix {
    let m = v.nrows();
    let vinv = inv(v);
    let mut out: Option<CMatrix> = None;
    for j in 0..m {
        let lambda: Vec<Complex64> = diagonals.iter().map(|d| d[j]).collect();
        let fj = f(&lambda);
        let proj = v.column(j) * vinv.row(j);
        let term = fj.kronecker(&proj);
        out = Some(match out {
            Some(acc) => acc + term,
            None => term,
        });
    }
    out.expect("nonempty")
}
