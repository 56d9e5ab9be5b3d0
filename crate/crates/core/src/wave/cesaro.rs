use num_complex::Complex;

use crate::scalar::{CompensatedSum, Real};

/// `(1/N) Σ_{n<N} x_n` over the first `N` entries of `seq`.
///
/// Panics if `N == 0` or `seq` is shorter than `N`.
pub fn cesaro<T: Real>(seq: &[Complex<T>], n_terms: usize) -> Complex<T> {
    assert!(n_terms >= 1, "Cesàro mean needs at least one term");
    assert!(
        seq.len() >= n_terms,
        "sequence has {} terms, {} requested",
        seq.len(),
        n_terms
    );
    let mut acc = CesaroAccumulator::new();
    for &x in &seq[..n_terms] {
        acc.push(x);
    }
    acc.mean()
}

/// All running means `(1/N) Σ_{n<N} x_n` for `N = 1..=len`.
pub fn cesaro_means<T: Real>(seq: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut acc = CesaroAccumulator::new();
    seq.iter()
        .map(|&x| {
            acc.push(x);
            acc.mean()
        })
        .collect()
}

/// Sequential prefix-sum accumulator for Cesàro means.
#[derive(Debug, Clone, Default)]
pub struct CesaroAccumulator<T: Real> {
    sum: CompensatedSum<T>,
    count: u64,
}

impl<T: Real> CesaroAccumulator<T> {
    pub fn new() -> Self {
        Self {
            sum: CompensatedSum::new(),
            count: 0,
        }
    }

    pub fn push(&mut self, x: Complex<T>) {
        self.sum.add(x);
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> Complex<T> {
        self.sum.value()
    }

    /// Mean of everything pushed so far; zero when empty.
    pub fn mean(&self) -> Complex<T> {
        if self.count == 0 {
            return Complex::new(T::zero(), T::zero());
        }
        self.sum.value().unscale(T::lit(self.count as f64))
    }
}
