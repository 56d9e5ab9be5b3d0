use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use super::DiscreteMeasure;
use crate::error::Result;
use crate::hilbert::GridFunction;
use crate::scalar::{cis_turns, fmt17, CompensatedSum, Real};

/// `μ̂(n)` for `n = 0..=n_max` together with running Cesàro means of `|μ̂(n)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierProfile<T: Real> {
    pub start: i64,
    pub values: Vec<Complex<T>>,
    /// `cesaro_abs[i] = (1/(i+1)) Σ_{j≤i} |values[j]|`.
    pub cesaro_abs: Vec<T>,
}

impl<T: Real> FourierProfile<T> {
    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len() as i64).map(move |i| self.start + i)
    }

    /// `sup |μ̂(n)|` over `n > after`.
    pub fn tail_sup(&self, after: i64) -> T {
        self.frequencies()
            .zip(&self.values)
            .filter(|(n, _)| *n > after)
            .fold(T::zero(), |m, (_, v)| m.max(v.norm()))
    }

    /// Max of `|μ̂(n)|` over `[lo, hi)`.
    pub fn block_max(&self, lo: i64, hi: i64) -> T {
        self.frequencies()
            .zip(&self.values)
            .filter(|(n, _)| *n >= lo && *n < hi)
            .fold(T::zero(), |m, (_, v)| m.max(v.norm()))
    }

    /// CSV with columns `n,re,im,abs,cesaro_abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im,abs,cesaro_abs\n");
        for ((n, v), c) in self.frequencies().zip(&self.values).zip(&self.cesaro_abs) {
            out.push_str(&format!(
                "{n},{},{},{},{}\n",
                fmt17(v.re),
                fmt17(v.im),
                fmt17(v.norm()),
                fmt17(*c)
            ));
        }
        out
    }
}

/// `Σ_j w_j f_j e^{−2πinθ_j}` with `f ≡ 1` when no weight function is given.
///
/// Unweighted coefficients of measures with exact rational atoms are exactly
/// zero when a rotation symmetry forces it (uniform grids at `n ≢ 0 mod m`).
pub fn fourier_coefficient<T: Real>(
    mu: &DiscreteMeasure<T>,
    n: i64,
    weight: Option<&GridFunction<T>>,
) -> Result<Complex<T>> {
    match weight {
        Some(f) => mu.ensure_same(f.measure())?,
        None if vanishes_exactly(mu, n) => return Ok(Complex::new(T::zero(), T::zero())),
        None => {}
    }
    let mut acc = CompensatedSum::new();
    for (j, atom) in mu.atoms().iter().enumerate() {
        let e: Complex<T> = cis_turns(-atom.phase_turns(n));
        let term = match weight {
            Some(f) => f.values()[j] * e,
            None => e,
        };
        acc.add(term.scale(atom.weight));
    }
    Ok(acc.value())
}

/// Whether the weighted phase set `{(nθ_j mod 1, w_j)}` is invariant under a
/// rotation by `1/p` for some prime `p`. The rotation multiplies `μ̂(n)` by a
/// nontrivial root of unity, so such coefficients vanish exactly.
fn vanishes_exactly<T: Real>(mu: &DiscreteMeasure<T>, n: i64) -> bool {
    let Some(ex) = mu.exact_structure() else {
        return false;
    };
    let nr = (n as i128).rem_euclid(ex.lcm);
    let mut mass: BTreeMap<i128, T> = BTreeMap::new();
    for a in mu.atoms() {
        let r = a.exact_theta().expect("exact structure implies exact atoms");
        let num = *r.numer() as i128 * (ex.lcm / *r.denom() as i128);
        let m = mass.entry((nr * num).rem_euclid(ex.lcm)).or_insert_with(T::zero);
        *m = *m + a.weight;
    }
    ex.primes.iter().any(|&p| {
        let shift = ex.lcm / p;
        mass.len().is_multiple_of(p as usize) && mass.iter().all(|(r, w)| mass.get(&((r + shift) % ex.lcm)) == Some(w))
    })
}

fn coefficient<T: Real>(mu: &DiscreteMeasure<T>, n: i64) -> Complex<T> {
    fourier_coefficient(mu, n, None).expect("unweighted coefficient cannot fail")
}

/// `(1/N) Σ_{n=1..N} |μ̂(n)|²`; tends to `Σ_j w_j²` as `N → ∞`.
pub fn wiener_average<T: Real>(mu: &DiscreteMeasure<T>, n_terms: u64) -> T {
    let n_terms = n_terms.max(1);
    let squares: Vec<T> = (1..=n_terms as i64)
        .into_par_iter()
        .map(|n| coefficient(mu, n).norm_sqr())
        .collect();
    let mut acc = CompensatedSum::new();
    for s in squares {
        acc.add(Complex::new(s, T::zero()));
    }
    acc.value().re / T::lit(n_terms as f64)
}

/// `μ̂(n)` for `0 ≤ n ≤ n_max` and the Cesàro means of `|μ̂(n)|`.
pub fn decay_profile<T: Real>(mu: &DiscreteMeasure<T>, n_max: u64) -> FourierProfile<T> {
    let values: Vec<Complex<T>> = (0..=n_max as i64).into_par_iter().map(|n| coefficient(mu, n)).collect();
    let mut running = T::zero();
    let cesaro_abs = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            running = running + v.norm();
            running / T::lit((i + 1) as f64)
        })
        .collect();
    FourierProfile {
        start: 0,
        values,
        cesaro_abs,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::measure::{make_cantor, make_riesz, make_uniform, RieszProduct};

    #[test]
    fn dirac_coefficients_are_one() {
        let mu = make_uniform::<f64>(1).unwrap();
        for n in [-7, 0, 3, 1_000_000] {
            assert!((fourier_coefficient(&mu, n, None).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn uniform_coefficients_vanish_below_m() {
        let mu = make_uniform::<f64>(9).unwrap();
        for n in 1..9 {
            assert_eq!(fourier_coefficient(&mu, n, None).unwrap().norm(), 0.0);
            assert_eq!(fourier_coefficient(&mu, -n, None).unwrap().norm(), 0.0);
        }
        assert!((fourier_coefficient(&mu, 9, None).unwrap().re - 1.0).abs() < 1e-14);
        assert_eq!(wiener_average(&mu, 8), 0.0);
        assert!(wiener_average(&mu, 9) > 0.0);
    }

    #[test]
    fn cantor_coefficients_are_not_forced_to_zero() {
        let mu = make_cantor::<f64>(4).unwrap();
        assert!((1..200).all(|n| !vanishes_exactly(&mu, n)));
    }

    #[test]
    fn negative_frequency_is_conjugate() {
        let mu = make_cantor::<f64>(5).unwrap();
        for n in [1, 2, 17, 12345] {
            let a = fourier_coefficient(&mu, n, None).unwrap();
            let b = fourier_coefficient(&mu, -n, None).unwrap();
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn weighted_coefficient_uses_weight_values() {
        let mu = Arc::new(make_uniform::<f64>(8).unwrap());
        let z = GridFunction::monomial(&mu, 1);
        // ∫ z·e^{-2πi θ} dμ = 1
        let v = fourier_coefficient(&mu, 1, Some(&z)).unwrap();
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-14);
        let other = Arc::new(make_uniform::<f64>(4).unwrap());
        assert!(fourier_coefficient(&other, 1, Some(&z)).is_err());
    }

    #[test]
    fn wiener_examples() {
        let mu = make_uniform::<f64>(1).unwrap();
        for n in [1, 5, 100] {
            assert!((wiener_average(&mu, n) - 1.0).abs() < 1e-14);
        }
        let mu = make_uniform::<f64>(16).unwrap();
        assert!(wiener_average(&mu, 15) < 1e-30);
    }

    #[test]
    fn riesz_single_factor_coefficient() {
        let mu = make_riesz::<f64>(&RieszProduct::new(vec![0.9], vec![4], 64)).unwrap();
        assert!((fourier_coefficient(&mu, 4, None).unwrap() - Complex::new(0.45, 0.0)).norm() < 1e-14);
        let mu = make_riesz::<f64>(&RieszProduct::new(vec![0.9, 0.9], vec![4, 16], 256)).unwrap();
        // cross term a1·a2/4
        assert!((fourier_coefficient(&mu, 20, None).unwrap() - Complex::new(0.2025, 0.0)).norm() < 1e-14);
        assert!((fourier_coefficient(&mu, 12, None).unwrap() - Complex::new(0.2025, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn uniform_profile() {
        let p = decay_profile(&make_uniform::<f64>(8).unwrap(), 7);
        assert_eq!(p.values.len(), 8);
        assert!((p.values[0].re - 1.0).abs() < 1e-15);
        assert!(p.values[1..].iter().all(|v| v.norm() < 1e-15));
        assert!((p.cesaro_abs[7] - 1.0 / 8.0).abs() < 1e-15);
        let csv = p.to_csv();
        assert!(csv.starts_with("n,re,im,abs,cesaro_abs\n0,"));
        assert_eq!(csv.lines().count(), 9);
    }
}
