//! Black-box matrix-valued functions of several complex variables.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// An `n x n` matrix-valued function of `num_vars` complex variables.
pub trait MatrixFunction {
    fn num_vars(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix>;

    /// Size of the data entering `eval(z)`; PSD floors use it when the value
    /// itself cancels to rounding. Zero when unknown.
    fn magnitude(&self, _z: &[Complex64]) -> f64 {
        0.0
    }
}

impl<T: MatrixFunction + ?Sized> MatrixFunction for &T {
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        (**self).eval(z)
    }
    fn magnitude(&self, z: &[Complex64]) -> f64 {
        (**self).magnitude(z)
    }
}

impl<T: MatrixFunction + ?Sized> MatrixFunction for Box<T> {
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        (**self).eval(z)
    }
    fn magnitude(&self, z: &[Complex64]) -> f64 {
        (**self).magnitude(z)
    }
}

/// Wraps a closure as a [`MatrixFunction`].
pub struct FnFunction<F> {
    num_vars: usize,
    dim: usize,
    f: F,
}

impl<F> FnFunction<F>
where
    F: Fn(&[Complex64]) -> Result<CMatrix>,
{
    pub fn new(num_vars: usize, dim: usize, f: F) -> Self {
        Self { num_vars, dim, f }
    }
}

impl<F> MatrixFunction for FnFunction<F>
where
    F: Fn(&[Complex64]) -> Result<CMatrix>,
{
    fn num_vars(&self) -> usize {
        self.num_vars
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: &[Complex64]) -> Result<CMatrix> {
        check_arity(z, self.num_vars)?;
        (self.f)(z)
    }
}

/// Scalar function lifted to a `1 x 1` matrix function.
pub fn scalar_fn<F>(num_vars: usize, f: F) -> FnFunction<impl Fn(&[Complex64]) -> Result<CMatrix>>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    FnFunction::new(num_vars, 1, move |z| Ok(CMatrix::from_element(1, 1, f(z))))
}

pub fn check_arity(z: &[Complex64], num_vars: usize) -> Result<()> {
    if z.len() != num_vars {
        return Err(Error::Dimension(format!("point has {} coordinates, expected {num_vars}", z.len())));
    }
    Ok(())
}

pub fn conj_point(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().map(|c| c.conj()).collect()
}
