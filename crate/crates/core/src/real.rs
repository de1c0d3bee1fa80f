//! Anti-unitary involutions `ι = J ∘ conj` and ι-real structure of
//! operators, functions, pencils and colligations.

use num_complex::Complex64;

use crate::colligation::AglerColligation;
use crate::error::{Error, Result};
use crate::function::{conj_point, MatrixFunction};
use crate::matrix::{block_diag, conj, fro, CMatrix, Tolerances};
use crate::pencil::RealizedFunction;

/// `ι(u) = J ū` with `J` unitary and `J J̄ = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiUnitary {
    j: CMatrix,
}

impl AntiUnitary {
    pub fn new(j: CMatrix, tol: &Tolerances) -> Result<Self> {
        crate::matrix::check_square(&j)?;
        let n = j.nrows();
        let id = CMatrix::identity(n, n);
        let unitarity = fro(&(j.adjoint() * &j - &id));
        let involution = fro(&(&j * conj(&j) - &id));
        let residual = unitarity.max(involution);
        if residual > tol.residual_tol {
            return Err(Error::InvalidInvolution { residual });
        }
        Ok(Self { j })
    }

    /// Entrywise conjugation.
    pub fn conjugation(n: usize) -> Self {
        Self {
            j: CMatrix::identity(n, n),
        }
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn apply(&self, u: &CMatrix) -> CMatrix {
        &self.j * conj(u)
    }

    /// `ι_1 ⊕ ι_2`.
    pub fn direct_sum(&self, other: &AntiUnitary) -> AntiUnitary {
        AntiUnitary {
            j: block_diag(&[&self.j, &other.j]),
        }
    }

    /// `ι A ι` as a linear map: `J Ā J̄`.
    pub fn conjugate(&self, a: &CMatrix) -> CMatrix {
        &self.j * conj(a) * conj(&self.j)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealnessCheck {
    /// Relative residual, normalised by `1 + ‖A‖`.
    pub residual: f64,
    pub holds: bool,
}

fn square_for(a: &CMatrix, iota: &AntiUnitary) -> Result<()> {
    if a.shape() != (iota.dim(), iota.dim()) {
        return Err(Error::Dimension(format!("operator is {:?}, involution acts on dimension {}", a.shape(), iota.dim())));
    }
    Ok(())
}

fn verdict(residual: f64, scale: f64, tol: &Tolerances) -> RealnessCheck {
    let residual = residual / (1.0 + scale);
    RealnessCheck {
        residual,
        holds: residual <= tol.residual_tol,
    }
}

/// `ι A = A ι`, i.e. `J Ā = A J`.
pub fn is_iota_real_operator(a: &CMatrix, iota: &AntiUnitary, tol: &Tolerances) -> Result<RealnessCheck> {
    square_for(a, iota)?;
    Ok(verdict(fro(&(iota.j() * conj(a) - a * iota.j())), fro(a), tol))
}

/// `ι A = A* ι`, i.e. `J Ā = A* J`.
pub fn is_iota_symmetric(a: &CMatrix, iota: &AntiUnitary, tol: &Tolerances) -> Result<RealnessCheck> {
    square_for(a, iota)?;
    Ok(verdict(fro(&(iota.j() * conj(a) - a.adjoint() * iota.j())), fro(a), tol))
}

/// `f♯(z) = ι f(z̄) ι` equals `f(z)` at every sample.
pub fn is_iota_real_function<F: MatrixFunction + ?Sized>(
    f: &F,
    iota: &AntiUnitary,
    samples: &[Vec<Complex64>],
    tol: &Tolerances,
) -> Result<RealnessCheck> {
    if f.dim() != iota.dim() {
        return Err(Error::Dimension(format!("function has dimension {}, involution {}", f.dim(), iota.dim())));
    }
    let mut worst: f64 = 0.0;
    for z in samples {
        let v = f.eval(z)?;
        let sharp = iota.conjugate(&f.eval(&conj_point(z))?);
        worst = worst.max(fro(&(sharp - &v)) / (1.0 + fro(&v)));
    }
    Ok(RealnessCheck {
        residual: worst,
        holds: worst <= tol.residual_tol,
    })
}

/// Every coefficient `A_k` is `(ι_U ⊕ ι_H)`-real. `iota_h` may be omitted
/// when `H = {0}`.
pub fn check_real_pencil(
    f: &RealizedFunction,
    iota_u: &AntiUnitary,
    iota_h: Option<&AntiUnitary>,
    tol: &Tolerances,
) -> Result<RealnessCheck> {
    let p = f.pencil().dim_h();
    let h = match iota_h {
        Some(h) => h.clone(),
        None if p == 0 => AntiUnitary::conjugation(0),
        None => return Err(Error::Invalid("an involution on H is required when p > 0".into())),
    };
    let iota = iota_u.direct_sum(&h);
    let mut worst: f64 = 0.0;
    for a in f.pencil().coeffs() {
        worst = worst.max(is_iota_real_operator(a, &iota, tol)?.residual);
    }
    Ok(RealnessCheck {
        residual: worst,
        holds: worst <= tol.residual_tol,
    })
}

/// `ι_X` commutes with every `P_k` and `U` is `(ι_X ⊕ ι_U)`-real.
pub fn check_real_colligation(
    c: &AglerColligation,
    iota_x: &AntiUnitary,
    iota_u: &AntiUnitary,
    tol: &Tolerances,
) -> Result<RealnessCheck> {
    let x = c.state_dim();
    if iota_x.dim() != x || iota_u.dim() != c.io_dim() {
        return Err(Error::Dimension("involutions do not match the colligation spaces".into()));
    }
    for k in 0..c.num_vars() {
        let r = c.block_range(k);
        let mut p = CMatrix::zeros(x, x);
        for i in r {
            p[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let comm = fro(&(iota_x.j() * &p - &p * iota_x.j()));
        if comm > tol.residual_tol {
            return Err(Error::Invalid(format!(
                "ι_X does not respect the splitting of X (commutator with P_{} is {comm:.3e})",
                k + 1
            )));
        }
    }
    is_iota_real_operator(c.u(), &iota_x.direct_sum(iota_u), tol)
}

/// Step of the central differences in [`taylor_order2`].
pub const TAYLOR_STEP: f64 = 1e-3;

/// Value, gradient and Hessian coefficients of `f` at `e = (1, …, 1)`.
#[derive(Clone, Debug)]
pub struct TaylorOrder2 {
    pub value: CMatrix,
    /// `first[k] = ∂_k f(e)`.
    pub first: Vec<CMatrix>,
    /// `second[k][l] = ∂_k ∂_l f(e)`.
    pub second: Vec<Vec<CMatrix>>,
}

impl TaylorOrder2 {
    /// Largest `‖Im M‖ + ‖M - Mᵀ‖` over all coefficients, relative to `1 + ‖M‖`.
    pub fn realness_residual(&self) -> f64 {
        std::iter::once(&self.value)
            .chain(&self.first)
            .chain(self.second.iter().flatten())
            .map(|m| {
                let imag = fro(&m.map(|z| Complex64::new(z.im, 0.0)));
                (imag + fro(&(m - m.transpose()))) / (1.0 + fro(m))
            })
            .fold(0.0, f64::max)
    }
}

/// Central differences of step `h` at `e`.
pub fn taylor_order2<F: MatrixFunction + ?Sized>(f: &F, h: f64) -> Result<TaylorOrder2> {
    let num_vars = f.num_vars();
    let e = vec![Complex64::new(1.0, 0.0); num_vars];
    let at = |shifts: &[(usize, f64)]| {
        let mut z = e.clone();
        for &(k, d) in shifts {
            z[k] += d;
        }
        f.eval(&z)
    };
    let value = at(&[])?;
    let mut first = Vec::with_capacity(num_vars);
    let mut second = vec![Vec::with_capacity(num_vars); num_vars];
    for k in 0..num_vars {
        let (plus, minus) = (at(&[(k, h)])?, at(&[(k, -h)])?);
        first.push((&plus - &minus) / Complex64::new(2.0 * h, 0.0));
        for l in 0..num_vars {
            let d = if k == l {
                (&plus - value.scale(2.0) + &minus) / Complex64::new(h * h, 0.0)
            } else {
                (at(&[(k, h), (l, h)])? - at(&[(k, h), (l, -h)])? - at(&[(k, -h), (l, h)])? + at(&[(k, -h), (l, -h)])?)
                    / Complex64::new(4.0 * h * h, 0.0)
            };
            second[k].push(d);
        }
    }
    Ok(TaylorOrder2 { value, first, second })
}
