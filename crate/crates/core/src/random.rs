//! Seeded random test objects: functions, unimodular multipliers, kernels in a
//! prescribed symmetry class, and dense operators.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{integral_operator, GridFunction, Kernel, MeasureRef, OperatorMatrix, Role};
use crate::matrix::CMatrix;
use crate::scalar::Real;
use crate::symmetry::Sign;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian (independent `N(0, 1/2)` real and imaginary parts).
pub fn complex_gaussian<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(re * s), T::lit(im * s))
}

pub fn random_function<T: Real>(mu: &MeasureRef<T>, rng: &mut impl Rng) -> GridFunction<T> {
    let values = (0..mu.len()).map(|_| complex_gaussian(rng)).collect();
    GridFunction::new(mu.clone(), values).expect("length matches")
}

/// Values `e^{iφ}` with uniform phases.
pub fn random_unimodular<T: Real>(mu: &MeasureRef<T>, rng: &mut impl Rng) -> GridFunction<T> {
    let values = (0..mu.len())
        .map(|_| {
            let t: f64 = rng.random();
            crate::scalar::cis_turns(t)
        })
        .collect();
    GridFunction::new(mu.clone(), values).expect("length matches")
}

/// Bounded, nonvanishing multiplier with modulus in `[0.5, 1.5]`.
pub fn random_nonvanishing<T: Real>(mu: &MeasureRef<T>, rng: &mut impl Rng) -> GridFunction<T> {
    let values = (0..mu.len())
        .map(|_| {
            let r: f64 = rng.random_range(0.5..1.5);
            let t: f64 = rng.random();
            crate::scalar::cis_turns::<T>(t).scale(T::lit(r))
        })
        .collect();
    GridFunction::new(mu.clone(), values).expect("length matches")
}

/// Entry-wise complex Gaussian kernel projected onto the class
/// `γ(z)k(ξ,z) = σ γ(ξ)k(z,ξ)` (or left unconstrained for `class = None`),
/// then given a zero diagonal. `gamma = None` means `γ ≡ 1`.
pub fn random_kernel<T: Real>(
    mu: &MeasureRef<T>,
    class: Option<Sign>,
    gamma: Option<&GridFunction<T>>,
    rng: &mut impl Rng,
) -> Kernel<T> {
    let m = mu.len();
    let raw = CMatrix::from_fn(m, m, |_, _| complex_gaussian::<T>(rng));
    let one = Complex::new(T::one(), T::zero());
    let g: Vec<Complex<T>> = match gamma {
        Some(f) => f.values().to_vec(),
        None => vec![one; m],
    };
    let half = T::lit(0.5);
    let values = match class {
        None => raw,
        Some(sign) => {
            let s = T::lit(sign.sigma());
            // a_ij = γ_i k_ij is projected onto a = σ aᵀ
            let a = raw.map(|i, _, x| g[i] * x);
            let p = a.map(|i, j, x| (x + a[(j, i)].scale(s)).scale(half));
            p.map(|i, _, x| x / g[i])
        }
    };
    let values = values.map(|i, j, x| if i == j { Complex::new(T::zero(), T::zero()) } else { x });
    Kernel::new(mu.clone(), values).expect("square")
}

/// Dense operator with complex Gaussian entries scaled by `1/√m`.
pub fn random_operator<T: Real>(mu: &MeasureRef<T>, rng: &mut impl Rng) -> OperatorMatrix<T> {
    let m = mu.len();
    let s = T::one() / T::lit(m as f64).sqrt();
    let entries = CMatrix::from_fn(m, m, |_, _| complex_gaussian::<T>(rng).scale(s));
    OperatorMatrix::new(mu.clone(), entries, Role::Identification).expect("square")
}

/// A random kernel wrapped as an operator.
pub fn random_kernel_operator<T: Real>(
    mu: &MeasureRef<T>,
    class: Option<Sign>,
    rng: &mut impl Rng,
) -> OperatorMatrix<T> {
    integral_operator(&random_kernel(mu, class, None, rng))
}
