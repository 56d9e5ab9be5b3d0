//! The exact finite identities behind the averaged wave operators: telescoping
//! of the propagated sequence, the two pairing identities for `C`-antisymmetric
//! and `C`-symmetric commutators, and the `η` sequence they reduce to.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex;
use num_traits::Zero;

use super::propagate::{propagate_with, propagated_pairing, DiagonalUnitary};
use crate::error::{Error, Result};
use crate::hilbert::{Conjugation, GridFunction, OperatorMatrix};
use crate::matrix::CMatrix;
use crate::scalar::{CompensatedSum, Real};
use crate::symmetry::Sign;

/// Precondition tolerance on `‖CK*C ∓ K‖ / max(1, ‖K‖)`.
pub const PRECONDITION_TOL: f64 = 1e-10;

/// `K = XU − UX` for a diagonal unitary `U`.
pub fn commutator<T: Real>(x: &OperatorMatrix<T>, u: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    let du = DiagonalUnitary::new(u)?;
    du.measure().ensure_same(x.measure())?;
    Ok(x.commutator_with_diagonal(du.lambda()))
}

/// `Σ_{m=p}^{q} f(m)` with `Σ_{m=p}^{p−1} = 0` and `Σ_{m=p}^{q} = −Σ_{m=q+1}^{p−1}` for `q < p − 1`.
pub fn formal_sum<T: Real>(p: i64, q: i64, mut f: impl FnMut(i64) -> Complex<T>) -> Complex<T> {
    let mut acc = CompensatedSum::new();
    if q >= p {
        for m in p..=q {
            acc.add(f(m));
        }
        acc.value()
    } else {
        for m in q + 1..p {
            acc.add(f(m));
        }
        -acc.value()
    }
}

/// Memoized pairings `(T Uᵖe, U^q ē)`.
///
/// Rows `conj(U^q ē)ᵀ T` and powers `λᵖ` are cached, so each value after the
/// first in a row costs `O(m)`.
pub struct PairingTable<T: Real> {
    op: CMatrix<T>,
    u: DiagonalUnitary<T>,
    e: Vec<Complex<T>>,
    ebar: Vec<Complex<T>>,
    rows: RefCell<HashMap<i64, Rc<Vec<Complex<T>>>>>,
    powers: RefCell<HashMap<i64, Rc<Vec<Complex<T>>>>>,
}

impl<T: Real> PairingTable<T> {
    pub fn new(
        t: &OperatorMatrix<T>,
        u: &OperatorMatrix<T>,
        e: &GridFunction<T>,
        ebar: &GridFunction<T>,
    ) -> Result<Self> {
        let du = DiagonalUnitary::new(u)?;
        for m in [t.measure(), e.measure(), ebar.measure()] {
            du.measure().ensure_same(m)?;
        }
        Ok(Self::with_unitary(t, du, e, ebar))
    }

    pub fn with_unitary(
        t: &OperatorMatrix<T>,
        u: DiagonalUnitary<T>,
        e: &GridFunction<T>,
        ebar: &GridFunction<T>,
    ) -> Self {
        Self {
            op: t.entries().clone(),
            u,
            e: e.to_orthonormal(),
            ebar: ebar.to_orthonormal(),
            rows: RefCell::new(HashMap::new()),
            powers: RefCell::new(HashMap::new()),
        }
    }

    fn power(&self, n: i64) -> Rc<Vec<Complex<T>>> {
        if let Some(p) = self.powers.borrow().get(&n) {
            return p.clone();
        }
        let p = Rc::new(self.u.power(n));
        self.powers.borrow_mut().insert(n, p.clone());
        p
    }

    fn row(&self, q: i64) -> Rc<Vec<Complex<T>>> {
        if let Some(r) = self.rows.borrow().get(&q) {
            return r.clone();
        }
        let p = self.power(q);
        let m = self.e.len();
        let mut row = vec![Complex::zero(); m];
        for i in 0..m {
            let b = (self.ebar[i] * p[i]).conj();
            if b.is_zero() {
                continue;
            }
            for (r, &t) in row.iter_mut().zip(self.op.row(i)) {
                *r = *r + b * t;
            }
        }
        let row = Rc::new(row);
        self.rows.borrow_mut().insert(q, row.clone());
        row
    }

    /// `(T Uᵖe, U^q ē)`.
    pub fn value(&self, p: i64, q: i64) -> Complex<T> {
        let row = self.row(q);
        let pw = self.power(p);
        let mut acc = CompensatedSum::new();
        for ((r, e), l) in row.iter().zip(&self.e).zip(pw.iter()) {
            acc.add(r * e * l);
        }
        acc.value()
    }

    /// `η_m = (T U^{k−m−1}e, U^{l−m}ē)` for `lo ≤ m ≤ hi` (empty when `hi < lo`).
    pub fn eta_range(&self, k: i64, l: i64, lo: i64, hi: i64) -> EtaSequence<T> {
        let values = (lo..=hi).map(|m| self.value(k - m - 1, l - m)).collect();
        EtaSequence::new(k, l, lo, values)
    }
}

/// A contiguous block `η_lo, …, η_hi` with compensated prefix sums.
#[derive(Debug, Clone)]
pub struct EtaSequence<T: Real> {
    pub k: i64,
    pub l: i64,
    lo: i64,
    values: Vec<Complex<T>>,
    prefix: Vec<Complex<T>>,
}

impl<T: Real> EtaSequence<T> {
    pub fn new(k: i64, l: i64, lo: i64, values: Vec<Complex<T>>) -> Self {
        let mut acc = CompensatedSum::new();
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(Complex::zero());
        for &v in &values {
            acc.add(v);
            prefix.push(acc.value());
        }
        Self {
            k,
            l,
            lo,
            values,
            prefix,
        }
    }

    /// Inclusive index range `(lo, hi)`.
    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn get(&self, m: i64) -> Option<Complex<T>> {
        let idx = m.checked_sub(self.lo)?;
        usize::try_from(idx).ok().and_then(|i| self.values.get(i).copied())
    }

    /// `Σ_{j=lo}^{x−1} η_j`, valid for `lo ≤ x ≤ hi + 1`.
    fn partial(&self, x: i64) -> Result<Complex<T>> {
        let idx = x - self.lo;
        if idx < 0 || idx as usize >= self.prefix.len() {
            let (lo, hi) = self.range();
            return Err(Error::InvalidArgument(format!(
                "formal sum needs eta outside the materialized range [{lo}, {hi}]"
            )));
        }
        Ok(self.prefix[idx as usize])
    }

    /// `Σ_{m=p}^{q} η_m` under the formal convention.
    pub fn formal_sum(&self, p: i64, q: i64) -> Result<Complex<T>> {
        Ok(self.partial(q + 1)? - self.partial(p)?)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `max |η_m − σ η_{k+l−1−m}|` over the pairs inside the range,
    /// with `σ = −1` for [`Sign::Antisymmetric`].
    pub fn reflection_defect(&self, sign: Sign) -> T {
        let s = T::lit(sign.sigma());
        let c = self.k + self.l - 1;
        let (lo, hi) = self.range();
        (lo..=hi)
            .filter_map(|m| Some((self.get(m)?, self.get(c - m)?)))
            .fold(T::zero(), |acc, (a, b)| acc.max((a - b.scale(s)).norm()))
    }

    /// `Σ_{m=−n}^{n+k+l−1} η_m`, which vanishes in the antisymmetric case.
    pub fn aggregate(&self, n: i64) -> Result<Complex<T>> {
        self.formal_sum(-n, n + self.k + self.l - 1)
    }

    /// `Σ_{m=−n}^{−1} η_m − Σ_{m=k+l}^{n−1} η_m − Σ_{m=1}^{k+l} η_{m+n−1}`.
    pub fn symmetric_defect(&self, n: i64) -> Result<Complex<T>> {
        let kl = self.k + self.l;
        Ok(self.formal_sum(-n, -1)? - self.formal_sum(kl, n - 1)? - self.formal_sum(n, n + kl - 1)?)
    }
}

/// Smallest block of `η` needed by [`EtaSequence::aggregate`] and
/// [`EtaSequence::symmetric_defect`] for every `|n'| ≤ n`.
pub fn eta_block(k: i64, l: i64, n: i64) -> (i64, i64) {
    let n = n.abs();
    let kl = k + l;
    let pts = [0, -n, n, kl, n + kl, -n + kl];
    let lo = *pts.iter().min().expect("nonempty");
    let hi = *pts.iter().max().expect("nonempty");
    (lo, hi - 1)
}

/// `η_m = (K U^{k−m−1}e, U^{l−m}ē)`.
#[allow(clippy::too_many_arguments)]
pub fn eta<T: Real>(
    k_op: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    e: &GridFunction<T>,
    ebar: &GridFunction<T>,
    k: i64,
    l: i64,
    m: i64,
) -> Result<Complex<T>> {
    let du = DiagonalUnitary::new(u)?;
    let a = du.apply_power(e, k - m - 1)?;
    let b = du.apply_power(ebar, l - m)?;
    k_op.pairing(&a, &b)
}

#[allow(clippy::too_many_arguments)]
pub fn eta_range<T: Real>(
    k_op: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    e: &GridFunction<T>,
    ebar: &GridFunction<T>,
    k: i64,
    l: i64,
    lo: i64,
    hi: i64,
) -> Result<EtaSequence<T>> {
    Ok(PairingTable::new(k_op, u, e, ebar)?.eta_range(k, l, lo, hi))
}

/// Max-entry residual of `UᵖXU⁻ᵖ − U^qXU^{−q} − Σ_{m=p}^{q−1} UᵐKU^{−m−1}`.
pub fn verify_telescoping<T: Real>(x: &OperatorMatrix<T>, u: &OperatorMatrix<T>, p: i64, q: i64) -> Result<T> {
    let du = DiagonalUnitary::new(u)?;
    du.measure().ensure_same(x.measure())?;
    let k = x.commutator_with_diagonal(du.lambda());
    let uinv: Vec<Complex<T>> = du.lambda().iter().map(|l| l.conj()).collect();
    let ones = vec![Complex::new(T::one(), T::zero()); du.dim()];
    let step = |m: i64| propagate_with(&du, &k, m).entries().scale_rows_cols(&ones, &uinv);
    let dim = du.dim();
    let mut sum = CMatrix::zeros(dim, dim);
    if q >= p {
        for m in p..q {
            sum = &sum + &step(m);
        }
    } else {
        for m in q..p {
            sum = &sum - &step(m);
        }
    }
    let lhs = propagate_with(&du, x, p).sub(&propagate_with(&du, x, q))?;
    Ok((lhs.entries() - &sum).max_abs())
}

/// Everything the pairing identities need, with the `CK*C = ±K` check done once.
pub struct LemmaSetup<T: Real> {
    pub u: DiagonalUnitary<T>,
    pub x: OperatorMatrix<T>,
    pub k: OperatorMatrix<T>,
    pub e: GridFunction<T>,
    pub ebar: GridFunction<T>,
    pub sign: Sign,
    /// `‖CK*C − σK‖_HS`.
    pub defect: T,
}

impl<T: Real> LemmaSetup<T> {
    /// Fails with [`Error::Precondition`] when `‖CK*C − σK‖ > 10⁻¹⁰·max(1, ‖K‖)`.
    pub fn new(
        x: &OperatorMatrix<T>,
        u: &OperatorMatrix<T>,
        gamma: &GridFunction<T>,
        e: &GridFunction<T>,
        sign: Sign,
    ) -> Result<Self> {
        let du = DiagonalUnitary::new(u)?;
        for m in [x.measure(), gamma.measure(), e.measure()] {
            du.measure().ensure_same(m)?;
        }
        let k = x.commutator_with_diagonal(du.lambda());
        let c = Conjugation::new(gamma.clone())?;
        let defect = c.symmetry_defect(&k, T::lit(sign.sigma()))?;
        let allowed = T::lit(PRECONDITION_TOL) * T::one().max(k.hs_norm());
        if defect > allowed {
            let what = match sign {
                Sign::Antisymmetric => "C K* C = -K",
                Sign::Symmetric => "C K* C = K",
            };
            return Err(Error::Precondition {
                what: what.into(),
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        let ebar = c.apply(e)?;
        Ok(Self {
            u: du,
            x: x.clone(),
            k,
            e: e.clone(),
            ebar,
            sign,
            defect,
        })
    }

    /// `‖X‖·‖e‖²`, the scale residuals are measured against.
    pub fn scale(&self) -> T {
        self.x.hs_norm() * self.e.norm().powi(2)
    }

    fn vectors(&self, k: i64, l: i64) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let h1 = self.u.apply_power(&self.e, k).expect("same measure");
        let h2 = self.u.apply_power(&self.ebar, l).expect("same measure");
        (h1.to_orthonormal(), h2.to_orthonormal())
    }

    /// `Σ_{m=1}^{k+l} (UⁿKU⁻ⁿ U^{k−m}e, U^{l−m+1}ē)`.
    pub fn commutator_sum(&self, k: i64, l: i64, n: i64) -> Complex<T> {
        let e = self.e.to_orthonormal();
        let ebar = self.ebar.to_orthonormal();
        formal_sum(1, k + l, |m| {
            let a = self.u.power(k - m);
            let b = self.u.power(l - m + 1);
            let h1: Vec<Complex<T>> = e.iter().zip(&a).map(|(x, y)| x * y).collect();
            let h2: Vec<Complex<T>> = ebar.iter().zip(&b).map(|(x, y)| x * y).collect();
            propagated_pairing(&self.u, &self.k, &h1, &h2, n)
        })
    }

    /// `((UⁿXU⁻ⁿ ∓ U⁻ⁿXUⁿ) Uᵏe, Uˡē)` with `−` in the antisymmetric case.
    pub fn lhs(&self, k: i64, l: i64, n: i64) -> Complex<T> {
        let (h1, h2) = self.vectors(k, l);
        let plus = propagated_pairing(&self.u, &self.x, &h1, &h2, n);
        let minus = propagated_pairing(&self.u, &self.x, &h1, &h2, -n);
        match self.sign {
            Sign::Antisymmetric => plus - minus,
            Sign::Symmetric => plus + minus,
        }
    }

    /// Right-hand side; the symmetric case carries the boundary term
    /// `((X + U^{k+l}XU^{−(k+l)}) Uᵏe, Uˡē)`.
    pub fn rhs(&self, k: i64, l: i64, n: i64) -> Complex<T> {
        let sum = self.commutator_sum(k, l, n);
        match self.sign {
            Sign::Antisymmetric => sum,
            Sign::Symmetric => {
                let (h1, h2) = self.vectors(k, l);
                let boundary =
                    self.x.entries().pairing(&h1, &h2) + propagated_pairing(&self.u, &self.x, &h1, &h2, k + l);
                boundary + sum
            }
        }
    }

    /// `|LHS − RHS|`.
    pub fn residual(&self, k: i64, l: i64, n: i64) -> T {
        (self.lhs(k, l, n) - self.rhs(k, l, n)).norm()
    }

    /// Pairing table for `η` built on this setup's `K`, `e`, `ē`.
    pub fn eta_table(&self) -> PairingTable<T> {
        PairingTable::with_unitary(&self.k, self.u.clone(), &self.e, &self.ebar)
    }
}

/// Residual of the antisymmetric pairing identity; rejects inputs with `CK*C ≠ −K`.
#[allow(clippy::too_many_arguments)]
pub fn verify_lemma_1<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    gamma: &GridFunction<T>,
    e: &GridFunction<T>,
    k: i64,
    l: i64,
    n: i64,
) -> Result<T> {
    Ok(LemmaSetup::new(x, u, gamma, e, Sign::Antisymmetric)?.residual(k, l, n))
}

/// Residual of the symmetric pairing identity; rejects inputs with `CK*C ≠ K`.
#[allow(clippy::too_many_arguments)]
pub fn verify_lemma_2<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    gamma: &GridFunction<T>,
    e: &GridFunction<T>,
    k: i64,
    l: i64,
    n: i64,
) -> Result<T> {
    Ok(LemmaSetup::new(x, u, gamma, e, Sign::Symmetric)?.residual(k, l, n))
}

/// `|Σ_{−n}^{−1}η − Σ_{k+l}^{n−1}η − Σ_{m=1}^{k+l}η_{m+n−1}|` under `CK*C = K`.
#[allow(clippy::too_many_arguments)]
pub fn verify_symmetric_reformulation<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    gamma: &GridFunction<T>,
    e: &GridFunction<T>,
    k: i64,
    l: i64,
    n: i64,
) -> Result<T> {
    let setup = LemmaSetup::new(x, u, gamma, e, Sign::Symmetric)?;
    let (lo, hi) = eta_block(k, l, n);
    let seq = setup.eta_table().eta_range(k, l, lo, hi);
    Ok(seq.symmetric_defect(n)?.norm())
}

/// `max_m |η_m − σ η_{k+l−1−m}|` over `|m| ≤ m_max` under the matching precondition.
#[allow(clippy::too_many_arguments)]
pub fn verify_eta_reflection<T: Real>(
    x: &OperatorMatrix<T>,
    u: &OperatorMatrix<T>,
    gamma: &GridFunction<T>,
    e: &GridFunction<T>,
    sign: Sign,
    k: i64,
    l: i64,
    m_max: i64,
) -> Result<T> {
    let setup = LemmaSetup::new(x, u, gamma, e, sign)?;
    let c = k + l - 1;
    let lo = (-m_max).min(c - m_max);
    let hi = m_max.max(c + m_max);
    Ok(setup.eta_table().eta_range(k, l, lo, hi).reflection_defect(sign))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::{integral_operator, multiplication_unitary, MeasureRef};
    use crate::measure::{make_cantor, make_uniform};
    use crate::random::{random_function, random_kernel, random_operator, random_unimodular, rng};
    use crate::symmetry::solve_identification;

    fn setup(
        mu: &MeasureRef<f64>,
        sign: Sign,
        seed: u64,
    ) -> (OperatorMatrix<f64>, GridFunction<f64>, GridFunction<f64>) {
        let mut r = rng(seed);
        let g = random_unimodular(mu, &mut r);
        let k = random_kernel(mu, Some(sign), Some(&g), &mut r);
        let x = solve_identification(&k).unwrap().operator();
        let e = random_function(mu, &mut r);
        (x, g, e)
    }

    #[test]
    fn formal_sum_conventions() {
        let f = |m: i64| Complex::new(m as f64, 0.0);
        assert_eq!(formal_sum(3, 2, f), Complex::zero());
        assert_eq!(formal_sum(1, 3, f), Complex::new(6.0, 0.0));
        // Σ_{5}^{2} = −Σ_{3}^{4}
        assert_eq!(formal_sum(5, 2, f), Complex::new(-7.0, 0.0));
        let seq = EtaSequence::new(0, 0, -3, (-3..=3).map(f).collect());
        assert_eq!(seq.formal_sum(2, 1).unwrap(), Complex::zero());
        assert_eq!(seq.formal_sum(3, 0).unwrap(), Complex::new(-3.0, 0.0));
        assert!(seq.formal_sum(-5, 0).is_err());
    }

    #[test]
    fn telescoping_examples() {
        let mu = Arc::new(make_cantor::<f64>(5).unwrap());
        let u = multiplication_unitary(&mu);
        let x = random_operator(&mu, &mut rng(1));
        assert_eq!(verify_telescoping(&x, &u, 4, 4).unwrap(), 0.0);
        let tol = 1e-10 * x.hs_norm();
        assert!(verify_telescoping(&x, &u, -8, 11).unwrap() <= tol);
        assert!(verify_telescoping(&x, &u, 11, -8).unwrap() <= tol);
        // p = 0, q = 1: X − UXU⁻¹ = KU⁻¹
        let k = commutator(&x, &u).unwrap();
        let uinv = u.adjoint();
        let lhs = x.sub(&u.compose(&x).unwrap().compose(&uinv).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&k.compose(&uinv).unwrap()) < 1e-14);
        assert!(verify_telescoping(&x, &u, 0, 1).unwrap() < 1e-14);
    }

    #[test]
    fn eta_zero_for_zero_commutator() {
        let mu = Arc::new(make_uniform::<f64>(6).unwrap());
        let u = multiplication_unitary(&mu);
        let e = random_function(&mu, &mut rng(2));
        let zero = OperatorMatrix::zero(&mu);
        for m in -3..3 {
            assert_eq!(eta(&zero, &u, &e, &e, 1, 2, m).unwrap(), Complex::zero());
        }
    }

    #[test]
    fn table_matches_direct_eta() {
        let mu = Arc::new(make_cantor::<f64>(4).unwrap());
        let u = multiplication_unitary(&mu);
        let mut r = rng(3);
        let k = integral_operator(&random_kernel(&mu, None, None, &mut r));
        let (e, eb) = (random_function(&mu, &mut r), random_function(&mu, &mut r));
        let seq = eta_range(&k, &u, &e, &eb, 2, -1, -6, 6).unwrap();
        for m in -6..=6 {
            let d = eta(&k, &u, &e, &eb, 2, -1, m).unwrap();
            assert!((seq.get(m).unwrap() - d).norm() < 1e-13);
        }
    }

    #[test]
    fn antisymmetric_identity_and_eta() {
        let mu = Arc::new(make_cantor::<f64>(6).unwrap());
        let u = multiplication_unitary(&mu);
        let (x, g, e) = setup(&mu, Sign::Antisymmetric, 4);
        let s = LemmaSetup::new(&x, &u, &g, &e, Sign::Antisymmetric).unwrap();
        let scale = s.scale();
        assert!(s.residual(3, 2, 25) <= 1e-10 * scale);
        for (k, l) in [(0, 0), (2, -2), (-3, 1)] {
            assert!(s.residual(k, l, 7) <= 1e-10 * scale);
        }
        // n = 0: LHS vanishes, so Σ_{m=1}^{k+l} η_{m−1} = 0
        assert_eq!(s.lhs(3, 2, 0), Complex::zero());
        let seq = s.eta_table().eta_range(3, 2, -30, 35);
        assert!(seq.formal_sum(0, 4).unwrap().norm() <= 1e-12 * scale);
        assert!(seq.reflection_defect(Sign::Antisymmetric) <= 1e-12 * scale);
        assert!(seq.aggregate(25).unwrap().norm() <= 1e-12 * scale);
    }

    #[test]
    fn symmetric_identity_and_eta() {
        let mu = Arc::new(make_cantor::<f64>(4).unwrap());
        let u = multiplication_unitary(&mu);
        let (x, g, e) = setup(&mu, Sign::Symmetric, 5);
        let s = LemmaSetup::new(&x, &u, &g, &e, Sign::Symmetric).unwrap();
        for (k, l, n) in [(1, 1, 10), (0, 0, 3), (-2, 3, 7), (4, -4, 64)] {
            assert!(s.residual(k, l, n) <= 1e-10 * s.scale(), "({k},{l},{n})");
        }
        assert!(verify_symmetric_reformulation(&x, &u, &g, &e, 2, 1, 9).unwrap() <= 1e-12 * s.scale());
        assert!(verify_eta_reflection(&x, &u, &g, &e, Sign::Symmetric, 2, 1, 20).unwrap() <= 1e-12 * s.scale());
    }

    #[test]
    fn zero_commutator_symmetric_case() {
        let mu = Arc::new(make_uniform::<f64>(5).unwrap());
        let u = multiplication_unitary(&mu);
        let mut r = rng(6);
        let d = crate::hilbert::multiplication_by(&random_function(&mu, &mut r)).unwrap();
        let e = random_function(&mu, &mut r);
        let one = GridFunction::one(&mu);
        let s = LemmaSetup::new(&d, &u, &one, &e, Sign::Symmetric).unwrap();
        let want = d
            .pairing(&e, &Conjugation::canonical(&mu).apply(&e).unwrap())
            .unwrap()
            .scale(2.0);
        assert!((s.lhs(0, 0, 5) - want).norm() < 1e-13);
        assert!((s.rhs(0, 0, 5) - want).norm() < 1e-13);
    }

    #[test]
    fn wrong_sign_is_rejected_with_defect() {
        let mu = Arc::new(make_cantor::<f64>(3).unwrap());
        let u = multiplication_unitary(&mu);
        let (x, g, e) = setup(&mu, Sign::Symmetric, 7);
        match verify_lemma_1(&x, &u, &g, &e, 1, 1, 1).unwrap_err() {
            Error::Precondition { defect, .. } => assert!(defect > 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eta_block_covers_sums() {
        for (k, l, n) in [(3, 2, 25), (-4, -4, 7), (0, 0, 0), (4, -1, 64)] {
            let (lo, hi) = eta_block(k, l, n);
            let seq = EtaSequence::<f64>::new(k, l, lo, vec![Complex::zero(); (hi - lo + 1).max(0) as usize]);
            assert!(seq.aggregate(n).is_ok());
            assert!(seq.symmetric_defect(n).is_ok());
        }
    }
}
