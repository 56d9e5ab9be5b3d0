use num_complex::Complex;

use super::{GridFunction, MeasureRef};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;

/// Integral kernel on atom pairs: `values[(i, j)] = k(ξ = x_j, z = x_i)`.
///
/// Column index is the integration variable `ξ`, row index the output point `z`.
#[derive(Debug, Clone)]
pub struct Kernel<T: Real> {
    measure: MeasureRef<T>,
    values: CMatrix<T>,
}

impl<T: Real> Kernel<T> {
    pub fn new(measure: MeasureRef<T>, values: CMatrix<T>) -> Result<Self> {
        let m = measure.len();
        if values.rows() != m || values.cols() != m {
            return Err(Error::Shape {
                expected: m,
                got: values.rows().max(values.cols()),
            });
        }
        Ok(Self { measure, values })
    }

    pub(crate) fn from_parts(measure: MeasureRef<T>, values: CMatrix<T>) -> Self {
        Self { measure, values }
    }

    pub fn zeros(measure: &MeasureRef<T>) -> Self {
        let m = measure.len();
        Self::from_parts(measure.clone(), CMatrix::zeros(m, m))
    }

    /// `f(i, j)` gives `k(x_j, x_i)`.
    pub fn from_indexed(measure: &MeasureRef<T>, f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let m = measure.len();
        Self::from_parts(measure.clone(), CMatrix::from_fn(m, m, f))
    }

    /// Samples `k(ξ, z)` at atom points.
    pub fn from_points(measure: &MeasureRef<T>, k: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        let pts = measure.points();
        Self::from_indexed(measure, |i, j| k(pts[j], pts[i]))
    }

    /// `u(ξ)·v(z)`.
    pub fn rank_one(u: &GridFunction<T>, v: &GridFunction<T>) -> Result<Self> {
        u.measure().ensure_same(v.measure())?;
        let (uv, vv) = (u.values(), v.values());
        Ok(Self::from_indexed(u.measure(), |i, j| uv[j] * vv[i]))
    }

    pub fn measure(&self) -> &MeasureRef<T> {
        &self.measure
    }

    pub fn values(&self) -> &CMatrix<T> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    /// `k(x_j, x_i)`.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.values[(i, j)]
    }

    pub fn max_abs(&self) -> T {
        self.values.max_abs()
    }

    pub fn hs_norm(&self) -> T {
        hs_norm(self)
    }

    /// The kernel `(ξ, z) ↦ k(z, ξ)`.
    pub fn swapped(&self) -> Self {
        Self::from_parts(self.measure.clone(), self.values.transpose())
    }

    /// `(ξ, z) ↦ φ₂(z)·k(ξ, z)·φ₁(ξ)`, the kernel of `φ₂(U) K φ₁(U)`.
    pub fn bordered(&self, phi2: &GridFunction<T>, phi1: &GridFunction<T>) -> Result<Self> {
        self.measure.ensure_same(phi1.measure())?;
        self.measure.ensure_same(phi2.measure())?;
        Ok(Self::from_parts(
            self.measure.clone(),
            self.values.scale_rows_cols(phi2.values(), phi1.values()),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self::from_parts(self.measure.clone(), &self.values + &other.values))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self::from_parts(self.measure.clone(), &self.values - &other.values))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_parts(self.measure.clone(), self.values.scale(s))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.values - &other.values).max_abs()
    }
}

/// `sqrt(Σ_{i,j} |k[i][j]|² w_i w_j)`.
pub fn hs_norm<T: Real>(k: &Kernel<T>) -> T {
    let w = k.measure.weights();
    let scale = k.values.max_abs();
    if scale == T::zero() {
        return T::zero();
    }
    let mut s = T::zero();
    for i in 0..k.dim() {
        for j in 0..k.dim() {
            s = s + (k.values[(i, j)] / scale).norm_sqr() * w[i] * w[j];
        }
    }
    scale * s.sqrt()
}
