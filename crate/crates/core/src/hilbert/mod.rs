//! `L²(μ)` for an atomic measure `μ`.
//!
//! Functions are stored by their values at the atoms. Operators are stored in
//! orthonormalized coordinates `f ↦ (f_j √w_j)`, where the adjoint is the
//! conjugate transpose and the Hilbert–Schmidt norm is the Frobenius norm.
//! Kernels are stored in function coordinates, `k[i][j] = k(ξ = x_j, z = x_i)`.

mod conjugation;
mod io;
mod kernel;
mod operator;

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{CompensatedSum, Real};

pub use conjugation::Conjugation;
pub use kernel::{hs_norm, Kernel};
pub use operator::{adjoint, integral_operator, multiplication_by, multiplication_unitary, OperatorMatrix, Role};

/// Shared handle to the measure a function or operator lives on.
pub type MeasureRef<T> = Arc<DiscreteMeasure<T>>;

/// Element of `L²(μ)`: one complex value per atom.
#[derive(Debug, Clone)]
pub struct GridFunction<T: Real> {
    measure: MeasureRef<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(measure: MeasureRef<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != measure.len() {
            return Err(Error::Shape {
                expected: measure.len(),
                got: values.len(),
            });
        }
        Ok(Self { measure, values })
    }

    /// Samples `f(λ_j)` at every atom point.
    pub fn from_points(measure: &MeasureRef<T>, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let values = measure.points().into_iter().map(f).collect();
        Self {
            measure: measure.clone(),
            values,
        }
    }

    pub fn constant(measure: &MeasureRef<T>, c: Complex<T>) -> Self {
        Self {
            measure: measure.clone(),
            values: vec![c; measure.len()],
        }
    }

    pub fn one(measure: &MeasureRef<T>) -> Self {
        Self::constant(measure, Complex::new(T::one(), T::zero()))
    }

    /// The monomial `z^k`.
    pub fn monomial(measure: &MeasureRef<T>, k: i64) -> Self {
        Self {
            measure: measure.clone(),
            values: measure.power_points(k),
        }
    }

    pub fn measure(&self) -> &MeasureRef<T> {
        &self.measure
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates in the orthonormal basis `f_j √w_j`.
    pub fn to_orthonormal(&self) -> Vec<Complex<T>> {
        self.values
            .iter()
            .zip(self.measure.atoms())
            .map(|(f, a)| f.scale(a.weight.sqrt()))
            .collect()
    }

    pub fn from_orthonormal(measure: &MeasureRef<T>, coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.len() != measure.len() {
            return Err(Error::Shape {
                expected: measure.len(),
                got: coords.len(),
            });
        }
        let values = coords
            .into_iter()
            .zip(measure.atoms())
            .map(|(c, a)| c.unscale(a.weight.sqrt()))
            .collect();
        Ok(Self {
            measure: measure.clone(),
            values,
        })
    }

    pub fn norm(&self) -> T {
        self.values
            .iter()
            .zip(self.measure.atoms())
            .fold(T::zero(), |s, (f, a)| s + f.norm_sqr() * a.weight)
            .sqrt()
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            measure: self.measure.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self {
            measure: self.measure.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient.
    pub fn div(&self, other: &Self) -> Result<Self> {
        if let Some(index) = other.values.iter().position(|v| v.is_zero()) {
            return Err(Error::VanishingGamma { index });
        }
        self.zip_with(other, |a, b| a / b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|v| v * s)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }
}

/// `(f, g) = Σ_j f_j conj(g_j) w_j`, linear in the first slot.
pub fn inner<T: Real>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<Complex<T>> {
    f.measure.ensure_same(&g.measure)?;
    let mut acc = CompensatedSum::new();
    for ((a, b), atom) in f.values.iter().zip(&g.values).zip(f.measure.atoms()) {
        acc.add((a * b.conj()).scale(atom.weight));
    }
    Ok(acc.value())
}
