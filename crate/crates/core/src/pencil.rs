//! Linear pencils `A(z) = Σ z_k A_k` on `U ⊕ H` and the functions they realize
//! as Schur complements `f(z) = a(z) - b(z) d(z)⁻¹ c(z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function::{check_arity, MatrixFunction};
use crate::matrix::{self, block2, fro, inverse_checked, CMatrix, Hermitian, Tolerances};

/// Pencil coefficients with shape checks only. Coefficients need not be
/// Hermitian or PSD; this form exists for negative controls and search
/// harnesses. Use [`PsdPencil`] for the validated object.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    n: usize,
    p: usize,
    coeffs: Vec<CMatrix>,
}

/// The four blocks of a matrix partitioned at index `n`.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

pub fn split(m: &CMatrix, n: usize) -> Blocks {
    let p = m.nrows() - n;
    Blocks {
        a: m.view((0, 0), (n, n)).into_owned(),
        b: m.view((0, n), (n, p)).into_owned(),
        c: m.view((n, 0), (p, n)).into_owned(),
        d: m.view((n, n), (p, p)).into_owned(),
    }
}

impl Pencil {
    pub fn new(n: usize, p: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("a pencil needs at least one variable".into()));
        }
        if n == 0 {
            return Err(Error::Invalid("the U block must be nonempty".into()));
        }
        for (k, a) in coeffs.iter().enumerate() {
            if a.nrows() != n + p || a.ncols() != n + p {
                return Err(Error::Dimension(format!(
                    "coefficient {} is {}x{}, expected {}x{}",
                    k + 1,
                    a.nrows(),
                    a.ncols(),
                    n + p,
                    n + p
                )));
            }
            matrix::check_finite(a)?;
        }
        Ok(Self { n, p, coeffs })
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim_u(&self) -> usize {
        self.n
    }

    pub fn dim_h(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn coeff_blocks(&self, k: usize) -> Blocks {
        split(&self.coeffs[k], self.n)
    }

    /// `Σ z_k A_k`.
    pub fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        check_arity(z, self.num_vars())?;
        let dim = self.n + self.p;
        let mut m = CMatrix::zeros(dim, dim);
        for (zk, ak) in z.iter().zip(&self.coeffs) {
            m += ak * *zk;
        }
        Ok(m)
    }

    pub fn eval_blocks(&self, z: &[Complex64]) -> Result<Blocks> {
        Ok(split(&self.eval(z)?, self.n))
    }

    /// Schur complement of the `H` block, refusing when `d(z)` is
    /// ill-conditioned beyond `1/psd_slack`.
    pub fn schur(&self, z: &[Complex64], tol: &Tolerances) -> Result<CMatrix> {
        let Blocks { a, b, c, d } = self.eval_blocks(z)?;
        if self.p == 0 {
            return Ok(a);
        }
        let dinv = inverse_checked(&d, tol.max_condition(), "d(z)")?;
        Ok(a - b * dinv * c)
    }

    /// `(P_U A(z)⁻¹ |U)⁻¹`.
    pub fn long_resolvent(&self, z: &[Complex64], tol: &Tolerances) -> Result<CMatrix> {
        let full = self.eval(z)?;
        let inv = inverse_checked(&full, tol.max_condition(), "A(z)")?;
        let corner = inv.view((0, 0), (self.n, self.n)).into_owned();
        inverse_checked(&corner, tol.max_condition(), "U-corner of A(z)⁻¹")
    }

    pub fn is_hermitian(&self, tol: &Tolerances) -> bool {
        self.coeffs
            .iter()
            .all(|a| fro(&(a - a.adjoint())) <= tol.residual_tol * (1.0 + fro(a)))
    }

    /// Minimum eigenvalue of each coefficient (of its Hermitian part).
    pub fn coefficient_spectra(&self) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .map(|a| matrix::hermitian_part(a)?.min_eigenvalue())
            .collect()
    }
}

/// A pencil whose coefficients are certified Hermitian PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdPencil(Pencil);

impl PsdPencil {
    pub fn new(pencil: Pencil, tol: &Tolerances) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(pencil.coeffs.len());
        for a in pencil.coeffs {
            let h = Hermitian::new(a, tol)?;
            let report = matrix::is_psd(&h, tol)?;
            if !report.psd {
                return Err(Error::NotPsd {
                    min_eigenvalue: report.min_eigenvalue,
                    slack: report.floor,
                });
            }
            coeffs.push(h.into_matrix());
        }
        Ok(PsdPencil(Pencil { coeffs, ..pencil }))
    }

    pub fn from_coeffs(n: usize, p: usize, coeffs: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        Self::new(Pencil::new(n, p, coeffs)?, tol)
    }

    pub fn as_pencil(&self) -> &Pencil {
        &self.0
    }

    pub fn into_pencil(self) -> Pencil {
        self.0
    }
}

impl std::ops::Deref for PsdPencil {
    type Target = Pencil;
    fn deref(&self) -> &Pencil {
        &self.0
    }
}

/// Removes the common kernel of the `d_k` blocks. For PSD `A_k`,
/// `ker d_k ⊆ ker b_k`, so the Schur complement is unchanged.
pub fn compress(pencil: &PsdPencil, tol: &Tolerances) -> Result<PsdPencil> {
    let (n, p) = (pencil.dim_u(), pencil.dim_h());
    if p == 0 {
        return Ok(pencil.clone());
    }
    let mut dsum = CMatrix::zeros(p, p);
    for k in 0..pencil.num_vars() {
        dsum += pencil.coeff_blocks(k).d;
    }
    let dsum = Hermitian::new(dsum, tol)?;
    let (values, vectors) = dsum.eigen()?;
    let floor = tol.psd_floor(fro(dsum.as_matrix()));
    let keep: Vec<usize> = (0..p).filter(|&j| values[j] > floor).collect();
    if keep.len() == p {
        return Ok(pencil.clone());
    }
    let v = CMatrix::from_fn(p, keep.len(), |r, c| vectors[(r, keep[c])]);
    let embed = block2(
        &CMatrix::identity(n, n),
        &CMatrix::zeros(n, keep.len()),
        &CMatrix::zeros(p, n),
        &v,
    );
    let coeffs = pencil
        .coeffs()
        .iter()
        .map(|a| embed.adjoint() * a * &embed)
        .collect();
    PsdPencil::from_coeffs(n, keep.len(), coeffs, tol)
}

/// A compressed PSD pencil, evaluated as its Schur complement.
#[derive(Clone, Debug)]
pub struct RealizedFunction {
    pencil: PsdPencil,
    tol: Tolerances,
    compressed: bool,
}

impl RealizedFunction {
    pub fn new(pencil: PsdPencil, tol: Tolerances) -> Result<Self> {
        let pencil = compress(&pencil, &tol)?;
        Ok(Self {
            pencil,
            tol,
            compressed: true,
        })
    }

    /// Shorthand for validating and compressing raw coefficients.
    pub fn from_coeffs(n: usize, p: usize, coeffs: Vec<CMatrix>, tol: Tolerances) -> Result<Self> {
        Self::new(PsdPencil::from_coeffs(n, p, coeffs, &tol)?, tol)
    }

    /// `f(z) = Σ z_k E_k` with no `H` block.
    pub fn diagonal(es: Vec<CMatrix>, tol: Tolerances) -> Result<Self> {
        let n = es.first().map(|e| e.nrows()).ok_or_else(|| Error::Invalid("no coefficients".into()))?;
        Self::from_coeffs(n, 0, es, tol)
    }

    pub fn pencil(&self) -> &PsdPencil {
        &self.pencil
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn is_compressed(&self) -> bool {
        self.compressed
    }

    pub fn num_vars(&self) -> usize {
        self.pencil.num_vars()
    }

    pub fn dim_u(&self) -> usize {
        self.pencil.dim_u()
    }

    pub fn dim_h(&self) -> usize {
        self.pencil.dim_h()
    }

    pub fn eval_schur(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.pencil.schur(z, &self.tol)
    }

    pub fn eval_long_resolvent(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.pencil.long_resolvent(z, &self.tol)
    }

    /// Residual of the block LDU identity
    /// `[I -b d⁻¹; 0 I] A(z) [I 0; -d⁻¹c I] = diag(f(z), d(z))`.
    pub fn ldu_residual(&self, z: &[Complex64]) -> Result<f64> {
        let (n, p) = (self.dim_u(), self.dim_h());
        let full = self.pencil.eval(z)?;
        let Blocks { a, b, c, d } = split(&full, n);
        let dinv = inverse_checked(&d, self.tol.max_condition(), "d(z)")?;
        let left = block2(&CMatrix::identity(n, n), &(-(&b * &dinv)), &CMatrix::zeros(p, n), &CMatrix::identity(p, p));
        let right = block2(&CMatrix::identity(n, n), &CMatrix::zeros(n, p), &(-(&dinv * &c)), &CMatrix::identity(p, p));
        let f = &a - &b * &dinv * &c;
        let target = matrix::block_diag(&[&f, &d]);
        Ok(matrix::relative_residual(&(left * full * right), &target))
    }

    /// Realization of `f + g` on `U ⊕ (H_f ⊕ H_g)`.
    pub fn sum(&self, other: &RealizedFunction) -> Result<RealizedFunction> {
        if self.num_vars() != other.num_vars() || self.dim_u() != other.dim_u() {
            return Err(Error::Dimension(format!(
                "cannot add functions with (N, n) = ({}, {}) and ({}, {})",
                self.num_vars(),
                self.dim_u(),
                other.num_vars(),
                other.dim_u()
            )));
        }
        let n = self.dim_u();
        let (p1, p2) = (self.dim_h(), other.dim_h());
        let coeffs = (0..self.num_vars())
            .map(|k| {
                let x = self.pencil.coeff_blocks(k);
                let y = other.pencil.coeff_blocks(k);
                let mut m = CMatrix::zeros(n + p1 + p2, n + p1 + p2);
                m.view_mut((0, 0), (n, n)).copy_from(&(&x.a + &y.a));
                m.view_mut((0, n), (n, p1)).copy_from(&x.b);
                m.view_mut((0, n + p1), (n, p2)).copy_from(&y.b);
                m.view_mut((n, 0), (p1, n)).copy_from(&x.c);
                m.view_mut((n + p1, 0), (p2, n)).copy_from(&y.c);
                m.view_mut((n, n), (p1, p1)).copy_from(&x.d);
                m.view_mut((n + p1, n + p1), (p2, p2)).copy_from(&y.d);
                m
            })
            .collect();
        RealizedFunction::from_coeffs(n, p1 + p2, coeffs, self.tol)
    }
}

impl MatrixFunction for RealizedFunction {
    fn num_vars(&self) -> usize {
        self.pencil.num_vars()
    }
    fn dim(&self) -> usize {
        self.pencil.dim_u()
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.eval_schur(z)
    }
    /// `Σ |z_k| ‖A_k‖`.
    fn magnitude(&self, z: &[Complex64]) -> f64 {
        self.pencil.coeffs().iter().zip(z).map(|(a, zk)| zk.norm() * fro(a)).sum()
    }
}

/// `A_1 = [[1,1],[1,1]]`, `A_2 = [[0,0],[0,1]]`: the two-conductance ladder
/// with `f(z) = z_1 z_2 / (z_1 + z_2)`.
pub fn two_element_ladder() -> RealizedFunction {
    let a1 = matrix::real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let a2 = matrix::real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    RealizedFunction::from_coeffs(1, 1, vec![a1, a2], Tolerances::default()).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real_matrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn eval_pencil_examples() {
        let f = two_element_ladder();
        let m = f.pencil().eval(&pt(&[1.0, 1.0])).unwrap();
        assert_eq!(m, real_matrix(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        assert_eq!(f.pencil().eval(&pt(&[0.0, 0.0])).unwrap(), CMatrix::zeros(2, 2));
        let single = Pencil::new(1, 0, vec![real_matrix(1, 1, &[2.0])]).unwrap();
        assert_eq!(single.eval(&pt(&[3.0])).unwrap()[(0, 0)], c(6.0, 0.0));
        assert!(single.eval(&pt(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn schur_examples() {
        let f = two_element_ladder();
        assert!((f.eval_schur(&pt(&[1.0, 1.0])).unwrap()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.eval_schur(&pt(&[2.0, 2.0])).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        let e = real_matrix(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let g = RealizedFunction::diagonal(vec![e.clone()], Tolerances::default()).unwrap();
        let z = c(0.3, -1.2);
        assert!(fro(&(g.eval_schur(&[z]).unwrap() - e * z)) < 1e-15);
    }

    #[test]
    fn schur_refuses_singular_d() {
        let f = two_element_ladder();
        // d(z) = z_1 + z_2 vanishes on the boundary point (1, -1).
        let err = f.eval_schur(&pt(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn long_resolvent_examples() {
        let f = two_element_ladder();
        assert!((f.eval_long_resolvent(&pt(&[1.0, 1.0])).unwrap()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        let g = RealizedFunction::diagonal(vec![real_matrix(1, 1, &[2.0])], Tolerances::default()).unwrap();
        assert!((g.eval_long_resolvent(&pt(&[1.0])).unwrap()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        let h = RealizedFunction::from_coeffs(1, 1, vec![CMatrix::identity(2, 2)], Tolerances::default()).unwrap();
        assert!((h.eval_schur(&pt(&[1.0])).unwrap()[(0, 0)] - ONE_C).norm() < 1e-15);
        assert!((h.eval_long_resolvent(&pt(&[1.0])).unwrap()[(0, 0)] - ONE_C).norm() < 1e-15);
    }

    const ONE_C: Complex64 = Complex64::new(1.0, 0.0);

    #[test]
    fn compress_drops_dead_h_block() {
        // d_1 = d_2 = 0 forces b = 0 for PSD coefficients.
        let a1 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a2 = real_matrix(2, 2, &[3.0, 0.0, 0.0, 0.0]);
        let f = RealizedFunction::from_coeffs(1, 1, vec![a1, a2], Tolerances::default()).unwrap();
        assert_eq!(f.dim_h(), 0);
        let v = f.eval_schur(&[c(1.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert!((v[(0, 0)] - c(7.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn compress_is_noop_on_ladder() {
        let f = two_element_ladder();
        let again = compress(f.pencil(), f.tolerances()).unwrap();
        assert_eq!(&again, f.pencil());
    }

    #[test]
    fn compress_removes_padding() {
        let f = two_element_ladder();
        let padded: Vec<CMatrix> = f
            .pencil()
            .coeffs()
            .iter()
            .map(|a| {
                let mut m = CMatrix::zeros(3, 3);
                m.view_mut((0, 0), (2, 2)).copy_from(a);
                m
            })
            .collect();
        let g = RealizedFunction::from_coeffs(1, 2, padded, Tolerances::default()).unwrap();
        assert_eq!(g.dim_h(), 1);
        for z in [[c(1.0, 2.0), c(0.5, -1.0)], [c(3.0, 0.1), c(0.2, 0.2)], [c(1.0, 0.0), c(1.0, 0.0)]] {
            assert!(fro(&(g.eval_schur(&z).unwrap() - f.eval_schur(&z).unwrap())) < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite_and_misshaped() {
        let tol = Tolerances::default();
        let bad = real_matrix(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(PsdPencil::from_coeffs(1, 1, vec![bad], &tol), Err(Error::NotPsd { .. })));
        assert!(Pencil::new(1, 1, vec![CMatrix::zeros(3, 3)]).is_err());
        let skew = CMatrix::from_row_slice(1, 1, &[c(0.0, 1.0)]);
        assert!(matches!(PsdPencil::from_coeffs(1, 0, vec![skew], &tol), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sum_examples() {
        let tol = Tolerances::default();
        let one = real_matrix(1, 1, &[1.0]);
        let zero = real_matrix(1, 1, &[0.0]);
        let z1 = RealizedFunction::diagonal(vec![one.clone(), zero.clone()], tol).unwrap();
        let z2 = RealizedFunction::diagonal(vec![zero, one], tol).unwrap();
        let s = z1.sum(&z2).unwrap();
        let z = [c(0.4, 1.0), c(2.0, -0.5)];
        assert!((s.eval_schur(&z).unwrap()[(0, 0)] - (z[0] + z[1])).norm() < 1e-14);

        let f = two_element_ladder();
        let ff = f.sum(&f).unwrap();
        assert!((ff.eval_schur(&pt(&[1.0, 1.0])).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        let fz = f.sum(&z1).unwrap();
        assert!((fz.eval_schur(&pt(&[1.0, 1.0])).unwrap()[(0, 0)] - c(1.5, 0.0)).norm() < 1e-14);

        let wide = RealizedFunction::diagonal(vec![CMatrix::identity(2, 2), CMatrix::identity(2, 2)], tol).unwrap();
        assert!(f.sum(&wide).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let tol = Tolerances::default();
        let f = RealizedFunction::diagonal(vec![real_matrix(1, 1, &[1.0])], tol).unwrap();
        assert_eq!(f.eval_schur(&[c(0.7, 0.2)]).unwrap()[(0, 0)], c(0.7, 0.2));
        let e1 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e2 = real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let g = RealizedFunction::diagonal(vec![e1, e2], tol).unwrap();
        let v = g.eval_schur(&[c(2.0, 1.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(v[(0, 0)], c(2.0, 1.0));
        assert_eq!(v[(1, 1)], c(3.0, 0.0));
        assert_eq!(v[(0, 1)], c(0.0, 0.0));
        assert!(RealizedFunction::diagonal(vec![real_matrix(1, 1, &[-1.0])], tol).is_err());
    }

    #[test]
    fn ldu_identity_on_ladder() {
        let f = two_element_ladder();
        assert!(f.ldu_residual(&[c(1.0, 2.0), c(0.3, -0.4)]).unwrap() < 1e-14);
    }
}
