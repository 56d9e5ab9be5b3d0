use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, MeasureRef, OperatorMatrix, Role};
use crate::matrix::CMatrix;
use crate::scalar::{cis_turns, frac_mul, Real};

/// A diagonal unitary `U = diag(λ)` with a way to form `λⁿ` without
/// repeated multiplication.
///
/// When `λ` is exactly the atom list of the measure (the multiplication
/// unitary), powers come from the measure's own phase reduction, which is exact
/// for rational atom positions.
#[derive(Debug, Clone)]
pub struct DiagonalUnitary<T: Real> {
    measure: MeasureRef<T>,
    lambda: Vec<Complex<T>>,
    turns: Option<Vec<f64>>,
}

impl<T: Real> DiagonalUnitary<T> {
    pub fn new(u: &OperatorMatrix<T>) -> Result<Self> {
        let lambda = u.diagonal_entries().ok_or(Error::NotDiagonalUnitary)?;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if lambda.iter().any(|l| (l.norm() - T::one()).abs() > tol) {
            return Err(Error::NotDiagonalUnitary);
        }
        let measure = u.measure().clone();
        let turns = if lambda == measure.points() {
            None
        } else {
            let two_pi = std::f64::consts::TAU;
            Some(
                lambda
                    .iter()
                    .map(|l| l.arg().to_f64().unwrap_or(f64::NAN) / two_pi)
                    .collect(),
            )
        };
        Ok(Self { measure, lambda, turns })
    }

    pub fn of_measure(mu: &MeasureRef<T>) -> Self {
        Self {
            measure: mu.clone(),
            lambda: mu.points(),
            turns: None,
        }
    }

    pub fn measure(&self) -> &MeasureRef<T> {
        &self.measure
    }

    pub fn lambda(&self) -> &[Complex<T>] {
        &self.lambda
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `λ_jⁿ` for every atom.
    pub fn power(&self, n: i64) -> Vec<Complex<T>> {
        match &self.turns {
            None => self.measure.power_points(n),
            Some(t) => t.iter().map(|&t| cis_turns(frac_mul(n, t))).collect(),
        }
    }

    /// `Uⁿ f`.
    pub fn apply_power(&self, f: &GridFunction<T>, n: i64) -> Result<GridFunction<T>> {
        self.measure.ensure_same(f.measure())?;
        let p = self.power(n);
        let values = f.values().iter().zip(&p).map(|(a, b)| a * b).collect();
        GridFunction::new(self.measure.clone(), values)
    }

    pub fn as_operator(&self) -> OperatorMatrix<T> {
        OperatorMatrix::new(
            self.measure.clone(),
            CMatrix::from_diagonal(&self.lambda),
            Role::Unitary,
        )
        .expect("square")
    }
}

/// `UⁿTU⁻ⁿ`, entries `T_ij λ_iⁿ conj(λ_j)ⁿ`.
pub fn propagate<T: Real>(u: &OperatorMatrix<T>, t: &OperatorMatrix<T>, n: i64) -> Result<OperatorMatrix<T>> {
    let du = DiagonalUnitary::new(u)?;
    du.measure().ensure_same(t.measure())?;
    Ok(propagate_with(&du, t, n))
}

pub fn propagate_with<T: Real>(u: &DiagonalUnitary<T>, t: &OperatorMatrix<T>, n: i64) -> OperatorMatrix<T> {
    if n == 0 {
        return t.clone();
    }
    let p = u.power(n);
    let q: Vec<Complex<T>> = p.iter().map(|x| x.conj()).collect();
    let entries = t.entries().scale_rows_cols(&p, &q);
    OperatorMatrix::new(t.measure().clone(), entries, t.role()).expect("square")
}

/// `(UⁿTU⁻ⁿ h₁, h₂) = (T U⁻ⁿh₁, U⁻ⁿh₂)` without forming the propagated matrix.
pub(crate) fn propagated_pairing<T: Real>(
    u: &DiagonalUnitary<T>,
    t: &OperatorMatrix<T>,
    h1: &[Complex<T>],
    h2: &[Complex<T>],
    n: i64,
) -> Complex<T> {
    let p = u.power(-n);
    let a: Vec<Complex<T>> = h1.iter().zip(&p).map(|(x, y)| x * y).collect();
    let b: Vec<Complex<T>> = h2.iter().zip(&p).map(|(x, y)| x * y).collect();
    t.entries().pairing(&a, &b)
}

fn pairing_pair<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    h1: &GridFunction<T>,
    h2: &GridFunction<T>,
    n: i64,
) -> Result<(Complex<T>, Complex<T>)> {
    let du = DiagonalUnitary::new(u)?;
    for m in [x.measure(), h1.measure(), h2.measure()] {
        du.measure().ensure_same(m)?;
    }
    let (a, b) = (h1.to_orthonormal(), h2.to_orthonormal());
    Ok((
        propagated_pairing(&du, x, &a, &b, n),
        propagated_pairing(&du, x, &a, &b, -n),
    ))
}

/// `((UⁿXU⁻ⁿ − U⁻ⁿXUⁿ)h₁, h₂)`.
pub fn difference_pairing<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    h1: &GridFunction<T>,
    h2: &GridFunction<T>,
    n: i64,
) -> Result<Complex<T>> {
    if n == 0 {
        x.measure().ensure_same(h1.measure())?;
        x.measure().ensure_same(h2.measure())?;
        return Ok(Complex::zero());
    }
    let (p, m) = pairing_pair(x, u, h1, h2, n)?;
    Ok(p - m)
}

/// `((UⁿXU⁻ⁿ + U⁻ⁿXUⁿ)h₁, h₂)`.
pub fn sum_pairing<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    h1: &GridFunction<T>,
    h2: &GridFunction<T>,
    n: i64,
) -> Result<Complex<T>> {
    let (p, m) = pairing_pair(x, u, h1, h2, n)?;
    Ok(p + m)
}

/// Matrix of phase averages `(1/N) Σ_{n<N} (λ_i conj(λ_j))ⁿ`.
pub fn phase_average<T: Real>(u: &DiagonalUnitary<T>, n_terms: u64) -> CMatrix<T> {
    assert!(n_terms >= 1, "Cesàro mean needs at least one term");
    let m = u.dim();
    let mut acc = CMatrix::zeros(m, m);
    for n in 0..n_terms as i64 {
        let p = u.power(n);
        for i in 0..m {
            let pi = p[i];
            for j in 0..m {
                acc[(i, j)] = acc[(i, j)] + pi * p[j].conj();
            }
        }
    }
    let inv = T::one() / T::lit(n_terms as f64);
    acc.map(|_, _, x| x.scale(inv))
}

/// `(1/N) Σ_{n<N} UⁿTU⁻ⁿ`.
pub fn cesaro_propagate<T: Real>(
    u: &OperatorMatrix<T>,
    t: &OperatorMatrix<T>,
    n_terms: u64,
) -> Result<OperatorMatrix<T>> {
    let du = DiagonalUnitary::new(u)?;
    du.measure().ensure_same(t.measure())?;
    let avg = phase_average(&du, n_terms);
    let entries = t.entries().map(|i, j, x| x * avg[(i, j)]);
    OperatorMatrix::new(t.measure().clone(), entries, t.role())
}

/// `|(1/N) Σ_{n<N} ωⁿ| ≤ 2 / (N |1 − ω|)` for `ω ≠ 1`; `1` for `ω = 1`.
pub fn geometric_mean_bound<T: Real>(omega: Complex<T>, n_terms: u64) -> T {
    let d = (Complex::<T>::one() - omega).norm();
    if d.is_zero() {
        T::one()
    } else {
        (T::lit(2.0) / (T::lit(n_terms as f64) * d)).min(T::one())
    }
}
