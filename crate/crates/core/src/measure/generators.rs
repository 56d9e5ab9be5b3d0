use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::scalar::{frac_mul, Real};

/// `m` equal atoms at `j/m`: the Lebesgue stand-in.
pub fn make_uniform<T: Real>(m: usize) -> Result<DiscreteMeasure<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("uniform measure needs m >= 1".into()));
    }
    let thetas = (0..m).map(|j| Ratio::new(j as i64, m as i64)).collect();
    let w = T::one() / T::lit(m as f64);
    DiscreteMeasure::from_exact_atoms(thetas, vec![w; m], format!("uniform(m={m})"))
}

/// Level-`L` approximation of the middle-thirds Cantor measure:
/// `2^L` atoms at `Σ ε_k·2/3^k`, each of mass `2^{-L}`.
pub fn make_cantor<T: Real>(level: u32) -> Result<DiscreteMeasure<T>> {
    if !(1..=20).contains(&level) {
        return Err(Error::InvalidArgument(format!(
            "cantor level must be in [1, 20], got {level}"
        )));
    }
    let den = 3i64.pow(level);
    let count = 1usize << level;
    // the most significant bit of b is ε_1, so increasing b gives increasing atoms
    let thetas = (0..count)
        .map(|b| {
            let num = (0..level).fold(0i64, |acc, k| {
                let eps = (b >> (level - 1 - k)) & 1;
                acc + eps as i64 * 2 * 3i64.pow(level - 1 - k)
            });
            Ratio::new(num, den)
        })
        .collect();
    let w = T::lit((-(level as f64)).exp2());
    DiscreteMeasure::from_exact_atoms(thetas, vec![w; count], format!("cantor(L={level})"))
}

/// Finite Riesz product `∏_q (1 + a_q cos(2π n_q θ))` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszProduct {
    pub coeffs: Vec<f64>,
    pub freqs: Vec<u64>,
    pub grid: usize,
    /// Rescale to total mass one (the default); otherwise weights are `density/m`.
    pub normalize: bool,
}

impl RieszProduct {
    pub fn new(coeffs: Vec<f64>, freqs: Vec<u64>, grid: usize) -> Self {
        Self {
            coeffs,
            freqs,
            grid,
            normalize: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coeffs.len() != self.freqs.len() {
            return Err(Error::InvalidArgument(format!(
                "riesz: {} coefficients but {} frequencies",
                self.coeffs.len(),
                self.freqs.len()
            )));
        }
        if let Some(a) = self.coeffs.iter().find(|a| a.is_nan() || a.abs() >= 1.0) {
            return Err(Error::InvalidArgument(format!("riesz: coefficient {a} not in (-1, 1)")));
        }
        if self.freqs.first() == Some(&0) {
            return Err(Error::InvalidArgument("riesz: frequencies must be positive".into()));
        }
        if let Some(w) = self.freqs.windows(2).find(|w| w[1] < 3 * w[0]) {
            return Err(Error::InvalidArgument(format!(
                "riesz: frequencies not lacunary ({} < 3*{})",
                w[1], w[0]
            )));
        }
        let max = self.freqs.last().copied().unwrap_or(0) as usize;
        if self.grid == 0 || self.grid <= 2 * max {
            return Err(Error::InvalidArgument(format!(
                "riesz: grid {} must exceed twice the largest frequency {max}",
                self.grid
            )));
        }
        Ok(())
    }

    pub fn density(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.freqs)
            .map(|(a, &n)| 1.0 + a * (std::f64::consts::TAU * frac_mul(n as i64, theta)).cos())
            .product()
    }
}

pub fn make_riesz<T: Real>(spec: &RieszProduct) -> Result<DiscreteMeasure<T>> {
    spec.validate()?;
    let m = spec.grid;
    let thetas: Vec<Ratio<i64>> = (0..m).map(|j| Ratio::new(j as i64, m as i64)).collect();
    let mut weights: Vec<f64> = (0..m).map(|j| spec.density(j as f64 / m as f64) / m as f64).collect();
    if spec.normalize {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let label = format!("riesz(coeffs={:?},freqs={:?},grid={m})", spec.coeffs, spec.freqs);
    DiscreteMeasure::from_exact_atoms(thetas, weights.into_iter().map(T::lit).collect(), label)
}

/// The demonstration Riesz product: coefficients `[0.5, 0.4, 0.3, 0.2]` at
/// frequencies `4^q`, on a 192-point grid (no aliasing of any product term).
pub fn riesz_demo() -> RieszProduct {
    RieszProduct::new(vec![0.5, 0.4, 0.3, 0.2], vec![1, 4, 16, 64], 192)
}

/// `m` atoms at independent uniform positions with random masses in `[0.1, 1)`,
/// normalized. Positions closer than `1e-9` turns are redrawn.
pub fn make_random<T: Real>(m: usize, seed: u64) -> Result<DiscreteMeasure<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("random measure needs m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thetas: Vec<f64> = Vec::with_capacity(m);
    while thetas.len() < m {
        let t: f64 = rng.random();
        if thetas.iter().all(|s| (s - t).abs() > 1e-9) {
            thetas.push(t);
        }
    }
    thetas.sort_by(|a, b| a.total_cmp(b));
    let weights: Vec<T> = (0..m).map(|_| T::lit(rng.random_range(0.1..1.0))).collect();
    let label = format!("random(m={m},seed={seed})");
    Ok(DiscreteMeasure::from_atoms(thetas.into_iter().map(T::lit).collect(), weights, label)?.normalized())
}
