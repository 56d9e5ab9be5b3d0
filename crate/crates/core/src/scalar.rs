//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`] so the same code runs in
//! `f32` and `f64`. Complex values are `num_complex::Complex<T>`.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Machine epsilon as an `f64`, for tolerance scaling.
    fn eps64() -> f64 {
        Self::epsilon().to_f64().unwrap_or(f64::EPSILON)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

/// `e^{2πi t}` for an angle measured in turns.
pub fn cis_turns<T: Real>(t: f64) -> Complex<T> {
    // reduce to [-1/2, 1/2) before scaling by 2π
    let r = t - t.round();
    let a = T::lit(r) * T::TAU();
    Complex::new(a.cos(), a.sin())
}

/// Fractional part of `n·theta` in turns, using an exact two-product so that
/// large `n` does not lose the low bits of the phase.
pub fn frac_mul(n: i64, theta: f64) -> f64 {
    let nf = n as f64;
    let p = nf * theta;
    let err = nf.mul_add(theta, -p);
    let fp = p - p.floor();
    let r = fp + err;
    r - r.floor()
}

/// Neumaier-compensated running sum of complex values.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T: Real> {
    sum: Complex<T>,
    comp: Complex<T>,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: Complex::new(T::zero(), T::zero()),
            comp: Complex::new(T::zero(), T::zero()),
        }
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex<T>) {
        let (re, cre) = neumaier(self.sum.re, self.comp.re, x.re);
        let (im, cim) = neumaier(self.sum.im, self.comp.im, x.im);
        self.sum = Complex::new(re, im);
        self.comp = Complex::new(cre, cim);
    }

    pub fn value(&self) -> Complex<T> {
        self.sum + self.comp
    }
}

fn neumaier<T: Real>(sum: T, comp: T, x: T) -> (T, T) {
    let t = sum + x;
    let c = if sum.abs() >= x.abs() {
        comp + ((sum - t) + x)
    } else {
        comp + ((x - t) + sum)
    };
    (t, c)
}

/// Format with 17 significant digits, the precision used by every text export.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}
