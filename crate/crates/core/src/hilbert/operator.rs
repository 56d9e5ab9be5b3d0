use std::fmt;

use num_complex::Complex;
use num_traits::Zero;

use super::{GridFunction, Kernel, MeasureRef};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;

/// What an operator stands for in the wave-operator setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Multiplication by the independent variable.
    Unitary,
    /// The identification operator `X`.
    Identification,
    /// The commutator `K = XU − UX`.
    Commutator,
    /// The symmetrized identification `Y`.
    Symmetrized,
    /// An operator commuting with `U`.
    Intertwiner,
    Multiplication,
    General,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Unitary => "U",
            Role::Identification => "X",
            Role::Commutator => "K",
            Role::Symmetrized => "Y",
            Role::Intertwiner => "Z",
            Role::Multiplication => "M",
            Role::General => "T",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "U" => Role::Unitary,
            "X" => Role::Identification,
            "K" => Role::Commutator,
            "Y" => Role::Symmetrized,
            "Z" => Role::Intertwiner,
            "M" => Role::Multiplication,
            "T" => Role::General,
            _ => return Err(Error::InvalidArgument(format!("unknown operator role {s:?}"))),
        })
    }
}

/// Linear map on `L²(μ)` in orthonormalized coordinates.
#[derive(Debug, Clone)]
pub struct OperatorMatrix<T: Real> {
    measure: MeasureRef<T>,
    entries: CMatrix<T>,
    role: Role,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn new(measure: MeasureRef<T>, entries: CMatrix<T>, role: Role) -> Result<Self> {
        let m = measure.len();
        if entries.rows() != m || entries.cols() != m {
            return Err(Error::Shape {
                expected: m,
                got: entries.rows().max(entries.cols()),
            });
        }
        Ok(Self { measure, entries, role })
    }

    pub(crate) fn from_parts(measure: MeasureRef<T>, entries: CMatrix<T>, role: Role) -> Self {
        debug_assert_eq!(entries.rows(), measure.len());
        Self { measure, entries, role }
    }

    pub fn identity(measure: &MeasureRef<T>) -> Self {
        Self::from_parts(measure.clone(), CMatrix::identity(measure.len()), Role::General)
    }

    pub fn zero(measure: &MeasureRef<T>) -> Self {
        let m = measure.len();
        Self::from_parts(measure.clone(), CMatrix::zeros(m, m), Role::General)
    }

    pub fn measure(&self) -> &MeasureRef<T> {
        &self.measure
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn apply(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.measure.ensure_same(f.measure())?;
        let out = self.entries.matvec(&f.to_orthonormal());
        GridFunction::from_orthonormal(&self.measure, out)
    }

    /// `(T f, g)` without materializing `T f` as a function.
    pub fn pairing(&self, f: &GridFunction<T>, g: &GridFunction<T>) -> Result<Complex<T>> {
        self.measure.ensure_same(f.measure())?;
        self.measure.ensure_same(g.measure())?;
        Ok(self.entries.pairing(&f.to_orthonormal(), &g.to_orthonormal()))
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self::from_parts(
            self.measure.clone(),
            self.entries.matmul(&other.entries),
            Role::General,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self::from_parts(
            self.measure.clone(),
            &self.entries + &other.entries,
            Role::General,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.measure.ensure_same(&other.measure)?;
        Ok(Self::from_parts(
            self.measure.clone(),
            &self.entries - &other.entries,
            Role::General,
        ))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_parts(self.measure.clone(), self.entries.scale(s), self.role)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.measure.clone(), self.entries.adjoint(), self.role)
    }

    /// Hilbert–Schmidt (Frobenius) norm; the operator norm used by every bound in this crate.
    pub fn hs_norm(&self) -> T {
        self.entries.frobenius()
    }

    pub fn max_abs(&self) -> T {
        self.entries.max_abs()
    }

    /// Recovers the integral kernel (every operator on a finite atomic space is one).
    pub fn to_kernel(&self) -> Kernel<T> {
        let s = self.measure.sqrt_weights();
        let values = self.entries.map(|i, j, x| x.unscale(s[i] * s[j]));
        Kernel::from_parts(self.measure.clone(), values)
    }

    /// Diagonal entries if the matrix is exactly diagonal.
    pub fn diagonal_entries(&self) -> Option<Vec<Complex<T>>> {
        self.entries.is_diagonal().then(|| self.entries.diagonal())
    }

    /// Commutator `self·U − U·self` with a diagonal `U = diag(λ)`.
    pub fn commutator_with_diagonal(&self, lambda: &[Complex<T>]) -> Self {
        let entries = self.entries.map(|i, j, x| x * (lambda[j] - lambda[i]));
        Self::from_parts(self.measure.clone(), entries, Role::Commutator)
    }
}

/// Multiplication by `z`: `diag(e^{2πiθ_j})`.
pub fn multiplication_unitary<T: Real>(mu: &MeasureRef<T>) -> OperatorMatrix<T> {
    OperatorMatrix::from_parts(mu.clone(), CMatrix::from_diagonal(&mu.points()), Role::Unitary)
}

/// Multiplication by a bounded function `φ`.
pub fn multiplication_by<T: Real>(phi: &GridFunction<T>) -> Result<OperatorMatrix<T>> {
    if let Some(j) = phi
        .values()
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::InvalidArgument(format!("multiplier is not finite at atom {j}")));
    }
    Ok(OperatorMatrix::from_parts(
        phi.measure().clone(),
        CMatrix::from_diagonal(phi.values()),
        Role::Multiplication,
    ))
}

/// `(Kf)(z) = ∫ k(ξ, z) f(ξ) dμ(ξ)`; entry `(i, j)` is `k[i][j]·√(w_i w_j)`.
pub fn integral_operator<T: Real>(k: &Kernel<T>) -> OperatorMatrix<T> {
    let s = k.measure().sqrt_weights();
    let entries = k.values().map(|i, j, x| x.scale(s[i] * s[j]));
    OperatorMatrix::from_parts(k.measure().clone(), entries, Role::General)
}

pub fn adjoint<T: Real>(t: &OperatorMatrix<T>) -> OperatorMatrix<T> {
    t.adjoint()
}

impl<T: Real> OperatorMatrix<T> {
    /// Max-entry distance between two operators on the same measure.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.entries - &other.entries).max_abs()
    }

    /// `‖self − other‖_HS`.
    pub fn hs_distance(&self, other: &Self) -> T {
        (&self.entries - &other.entries).frobenius()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.as_slice().iter().all(|x| x.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::inner;
    use crate::measure::{make_cantor, make_uniform};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn unitary_examples() {
        let mu = Arc::new(make_uniform::<f64>(1).unwrap());
        assert_eq!(multiplication_unitary(&mu).entries()[(0, 0)], c(1.0, 0.0));

        let mu = Arc::new(make_uniform::<f64>(4).unwrap());
        let u = multiplication_unitary(&mu);
        let want = [c(1., 0.), c(0., 1.), c(-1., 0.), c(0., -1.)];
        for (i, w) in want.iter().enumerate() {
            assert!((u.entries()[(i, i)] - w).norm() < 1e-15);
        }
        assert!(u.entries().is_diagonal());
    }

    #[test]
    fn unitary_times_adjoint_is_identity() {
        let mu = Arc::new(make_cantor::<f64>(6).unwrap());
        let u = multiplication_unitary(&mu);
        let p = u.compose(&u.adjoint()).unwrap();
        assert!(p.max_abs_diff(&OperatorMatrix::identity(&mu)) < 1e-14);
    }

    #[test]
    fn multiplication_by_examples() {
        let mu = Arc::new(make_cantor::<f64>(3).unwrap());
        let id = multiplication_by(&GridFunction::one(&mu)).unwrap();
        assert_eq!(id.entries(), OperatorMatrix::identity(&mu).entries());
        let z = multiplication_by(&GridFunction::monomial(&mu, 1)).unwrap();
        assert_eq!(z.entries(), multiplication_unitary(&mu).entries());
        let u = multiplication_unitary(&mu);
        assert!(z.compose(&u).unwrap().max_abs_diff(&u.compose(&z).unwrap()) == 0.0);
    }

    #[test]
    fn zero_and_rank_one_kernels() {
        let mu = Arc::new(make_uniform::<f64>(5).unwrap());
        let zero = integral_operator(&Kernel::zeros(&mu));
        assert!(zero.is_zero());

        let u = GridFunction::new(mu.clone(), (0..5).map(|j| c(1.0 + j as f64, 0.5)).collect()).unwrap();
        let v = GridFunction::new(mu.clone(), (0..5).map(|j| c(-0.2, j as f64)).collect()).unwrap();
        let k = Kernel::from_indexed(&mu, |i, j| u.values()[j] * v.values()[i]);
        let op = integral_operator(&k);
        let f = GridFunction::new(mu.clone(), (0..5).map(|j| c(0.1 * j as f64, -1.0)).collect()).unwrap();
        let got = op.apply(&f).unwrap();
        let want = v.scale(inner(&f, &u.conj()).unwrap());
        assert!(got.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn role_parses_back() {
        for r in [Role::Unitary, Role::Identification, Role::Commutator, Role::Symmetrized] {
            assert_eq!(r.to_string().parse::<Role>().unwrap(), r);
        }
    }
}
