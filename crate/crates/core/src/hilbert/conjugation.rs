use num_complex::Complex;
use num_traits::Zero;

use super::{GridFunction, MeasureRef, OperatorMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The anti-linear map `C_γ f = conj(γ)·conj(f)`.
#[derive(Debug, Clone)]
pub struct Conjugation<T: Real> {
    gamma: GridFunction<T>,
}

impl<T: Real> Conjugation<T> {
    /// Requires `γ_j ≠ 0` at every atom.
    pub fn new(gamma: GridFunction<T>) -> Result<Self> {
        if let Some(index) = gamma.values().iter().position(|g| g.is_zero()) {
            return Err(Error::VanishingGamma { index });
        }
        Ok(Self { gamma })
    }

    /// Plain complex conjugation `f ↦ conj(f)`.
    pub fn canonical(measure: &MeasureRef<T>) -> Self {
        Self {
            gamma: GridFunction::one(measure),
        }
    }

    pub fn gamma(&self) -> &GridFunction<T> {
        &self.gamma
    }

    pub fn measure(&self) -> &MeasureRef<T> {
        self.gamma.measure()
    }

    /// First atom where `||γ| − 1|` exceeds a few ulps, if any.
    pub fn non_unimodular_atom(&self) -> Option<(usize, T)> {
        let tol = T::epsilon() * T::lit(64.0);
        self.gamma
            .values()
            .iter()
            .enumerate()
            .find(|(_, g)| (g.norm() - T::one()).abs() > tol)
            .map(|(i, g)| (i, g.norm()))
    }

    pub fn is_unimodular(&self) -> bool {
        self.non_unimodular_atom().is_none()
    }

    fn require_unimodular(&self) -> Result<()> {
        match self.non_unimodular_atom() {
            None => Ok(()),
            Some((index, modulus)) => Err(Error::NotUnimodular {
                index,
                modulus: modulus.to_f64().unwrap_or(f64::NAN),
            }),
        }
    }

    pub fn apply(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        conjugate(self, f)
    }

    pub fn c_transform(&self, t: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
        c_transform(self, t)
    }
}

/// `C_γ f`.
pub fn conjugate<T: Real>(c: &Conjugation<T>, f: &GridFunction<T>) -> Result<GridFunction<T>> {
    c.gamma.zip_with(f, |g, v| g.conj() * v.conj())
}

/// `h ↦ C(T*(C h))`, available for unimodular `γ`.
///
/// In orthonormal coordinates the matrix is `conj(γ_i)·T_{ji}·γ_j`.
pub fn c_transform<T: Real>(c: &Conjugation<T>, t: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    c.require_unimodular()?;
    c.measure().ensure_same(t.measure())?;
    let g = c.gamma.values();
    let src = t.entries();
    let entries = src.map(|i, j, _| g[i].conj() * src[(j, i)] * g[j]);
    Ok(OperatorMatrix::from_parts(t.measure().clone(), entries, t.role()))
}

impl<T: Real> Conjugation<T> {
    /// `‖C T* C − σ T‖_HS` with `σ = ±1`.
    pub fn symmetry_defect(&self, t: &OperatorMatrix<T>, sign: T) -> Result<T> {
        let ct = self.c_transform(t)?;
        Ok(ct.hs_distance(&t.scale(Complex::new(sign, T::zero()))))
    }
}
