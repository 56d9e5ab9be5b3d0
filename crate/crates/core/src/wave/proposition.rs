use num_complex::Complex;
use serde::Serialize;

use super::propagate::{phase_average, DiagonalUnitary};
use crate::error::Result;
use crate::hilbert::{multiplication_unitary, Conjugation, GridFunction, OperatorMatrix, Role};
use crate::scalar::Real;

/// Defects reported by [`construct_y`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YDiagnostics {
    pub n_terms: u64,
    pub x_norm: f64,
    /// `‖YU − UY − K‖_HS`.
    pub d1: f64,
    /// `4‖X‖/N`.
    pub d1_bound: f64,
    /// `‖CY*C − Y‖_HS`.
    pub d2: f64,
}

/// Cesàro mean over `n < N` of `Yₙ = X − ½(UⁿXU⁻ⁿ + U⁻ⁿXUⁿ)`.
///
/// `Yₙ` has the same commutator with `U` as `X` up to the telescoping error,
/// and inherits `C`-symmetry from `X`.
pub fn construct_y<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    gamma: &GridFunction<T>,
    n_terms: u64,
) -> Result<(OperatorMatrix<T>, YDiagnostics)> {
    let du = DiagonalUnitary::new(u)?;
    du.measure().ensure_same(x.measure())?;
    let c = Conjugation::new(gamma.clone())?;
    let avg = phase_average(&du, n_terms);
    let one = T::one();
    let entries = x.entries().map(|i, j, v| v.scale(one - avg[(i, j)].re));
    let y = OperatorMatrix::new(x.measure().clone(), entries, Role::Symmetrized)?;

    let k = x.commutator_with_diagonal(du.lambda());
    let ky = y.commutator_with_diagonal(du.lambda());
    let f = |t: T| t.to_f64().unwrap_or(f64::NAN);
    let x_norm = x.hs_norm();
    let d1 = ky.hs_distance(&k);
    let d2 = c.symmetry_defect(&y, one)?;
    Ok((
        y,
        YDiagnostics {
            n_terms,
            x_norm: f(x_norm),
            d1: f(d1),
            d1_bound: 4.0 * f(x_norm) / n_terms as f64,
            d2: f(d2),
        },
    ))
}

/// `½(X + CX*C)`, the `C`-symmetric part of `X`.
pub fn symmetrize<T: Real>(x: &OperatorMatrix<T>, gamma: &GridFunction<T>) -> Result<OperatorMatrix<T>> {
    let c = Conjugation::new(gamma.clone())?;
    let half = Complex::new(T::lit(0.5), T::zero());
    Ok(x.add(&c.c_transform(x)?)?.scale(half).with_role(x.role()))
}

/// `‖CK*C + K‖_HS` for `K = XU − UX`, `U` the multiplication unitary of the
/// measure; vanishes whenever `CX*C = X`.
pub fn check_proposition_forward<T: Real>(x: &OperatorMatrix<T>, gamma: &GridFunction<T>) -> Result<T> {
    x.measure().ensure_same(gamma.measure())?;
    let u = multiplication_unitary(x.measure());
    let lambda = u.diagonal_entries().expect("diagonal");
    let k = x.commutator_with_diagonal(&lambda);
    Conjugation::new(gamma.clone())?.symmetry_defect(&k, -T::one())
}
