//! Atomic discretizations of finite Borel measures on the unit circle.
//!
//! Atom positions are stored in turns (`θ ∈ [0, 1)` stands for `e^{2πiθ}`).
//! Generators whose atoms are rational (uniform grids, Cantor points, Riesz
//! grids) also keep the exact fraction, so phases `nθ mod 1` are reduced in
//! integer arithmetic and stay accurate for very large frequencies.

mod fourier;
mod generators;

use std::sync::OnceLock;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cis_turns, fmt17, frac_mul, Real};

pub use fourier::{decay_profile, fourier_coefficient, wiener_average, FourierProfile};
pub use generators::{make_cantor, make_random, make_riesz, make_uniform, riesz_demo, RieszProduct};

/// Header prefix of the measure text format.
pub const MEASURE_HEADER: &str = "# waveops-measure v1 label=";

/// A single atom: position in turns and its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T: Real> {
    pub theta: T,
    pub weight: T,
    exact: Option<Ratio<i64>>,
}

impl<T: Real> Atom<T> {
    /// The exact rational position, when the generator produced one.
    pub fn exact_theta(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    /// `nθ mod 1`, in turns.
    pub fn phase_turns(&self, n: i64) -> f64 {
        match self.exact {
            Some(r) => {
                let den = *r.denom() as i128;
                let num = *r.numer() as i128;
                let red = ((n as i128).rem_euclid(den) * num).rem_euclid(den);
                red as f64 / den as f64
            }
            None => frac_mul(n, self.theta.to_f64().unwrap_or(f64::NAN)),
        }
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn prime_factors(mut n: i128) -> Vec<i128> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Positive atomic measure on the circle with strictly increasing atom positions.
#[derive(Debug)]
pub struct DiscreteMeasure<T: Real> {
    atoms: Vec<Atom<T>>,
    label: String,
    total_mass: T,
    min_gap: f64,
    id: OnceLock<String>,
    exact: OnceLock<Option<ExactStructure>>,
}

/// Common denominator of all exact positions and its prime factors.
#[derive(Debug, Clone)]
pub(crate) struct ExactStructure {
    pub lcm: i128,
    pub primes: Vec<i128>,
}

/// Denominators above this are not factored.
const MAX_EXACT_LCM: i128 = 1 << 50;

impl<T: Real> Clone for DiscreteMeasure<T> {
    fn clone(&self) -> Self {
        Self {
            atoms: self.atoms.clone(),
            label: self.label.clone(),
            total_mass: self.total_mass,
            min_gap: self.min_gap,
            id: OnceLock::new(),
            exact: OnceLock::new(),
        }
    }
}

impl<T: Real> PartialEq for DiscreteMeasure<T> {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.atoms == other.atoms
    }
}

impl<T: Real> DiscreteMeasure<T> {
    /// Builds a measure from float positions and weights (not normalized).
    pub fn from_atoms(thetas: Vec<T>, weights: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if thetas.len() != weights.len() {
            return Err(Error::Shape {
                expected: thetas.len(),
                got: weights.len(),
            });
        }
        let atoms = thetas
            .into_iter()
            .zip(weights)
            .map(|(theta, weight)| Atom {
                theta,
                weight,
                exact: None,
            })
            .collect();
        Self::validated(atoms, label.into())
    }

    /// Builds a measure whose positions are exact fractions of a turn.
    pub fn from_exact_atoms(thetas: Vec<Ratio<i64>>, weights: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if thetas.len() != weights.len() {
            return Err(Error::Shape {
                expected: thetas.len(),
                got: weights.len(),
            });
        }
        let atoms = thetas
            .into_iter()
            .zip(weights)
            .map(|(r, weight)| Atom {
                theta: T::lit(r.to_f64().unwrap_or(f64::NAN)),
                weight,
                exact: Some(r),
            })
            .collect();
        Self::validated(atoms, label.into())
    }

    fn validated(atoms: Vec<Atom<T>>, label: String) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("a measure needs at least one atom".into()));
        }
        if label.contains('\n') {
            return Err(Error::InvalidMeasure("label must be a single line".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if let Some(r) = a.exact {
                if *r.numer() < 0 || r >= Ratio::from_integer(1) {
                    return Err(Error::InvalidMeasure(format!("atom {i}: theta {r} outside [0,1)")));
                }
            }
            if !(a.theta >= T::zero() && a.theta < T::one()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i}: theta {} outside [0,1)",
                    a.theta
                )));
            }
            if !(a.weight > T::zero() && a.weight.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i}: weight {} must be positive",
                    a.weight
                )));
            }
        }
        for (i, w) in atoms.windows(2).enumerate() {
            let increasing = match (w[0].exact, w[1].exact) {
                (Some(a), Some(b)) => a < b && w[0].theta < w[1].theta,
                _ => w[0].theta < w[1].theta,
            };
            if !increasing {
                return Err(Error::InvalidMeasure(format!(
                    "atoms {i} and {} are not strictly increasing",
                    i + 1
                )));
            }
        }
        let total_mass = atoms.iter().fold(T::zero(), |s, a| s + a.weight);
        if !total_mass.is_finite() {
            return Err(Error::InvalidMeasure("total mass is not finite".into()));
        }
        let min_gap = cyclic_min_gap(&atoms);
        Ok(Self {
            atoms,
            label,
            total_mass,
            min_gap,
            id: OnceLock::new(),
            exact: OnceLock::new(),
        })
    }

    /// `None` unless every atom has an exact position and the common
    /// denominator is small enough to factor.
    pub(crate) fn exact_structure(&self) -> Option<&ExactStructure> {
        self.exact
            .get_or_init(|| {
                let mut lcm: i128 = 1;
                for a in &self.atoms {
                    let d = *a.exact?.denom() as i128;
                    lcm = lcm / gcd(lcm, d) * d;
                    if lcm > MAX_EXACT_LCM {
                        return None;
                    }
                }
                Some(ExactStructure {
                    lcm,
                    primes: prime_factors(lcm),
                })
            })
            .as_ref()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn thetas(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.theta).collect()
    }

    pub fn weights(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn sqrt_weights(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.weight.sqrt()).collect()
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    /// `Σ w_j²`, the limit of the Wiener averages.
    pub fn atomic_energy(&self) -> T {
        self.atoms.iter().fold(T::zero(), |s, a| s + a.weight * a.weight)
    }

    /// Smallest cyclic distance between neighbouring atoms, in turns.
    /// A single atom has gap 1 (the full turn back to itself).
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// `min_{i≠j} |1 − e^{2πi(θ_i−θ_j)}|`; equals 2 for a single atom.
    pub fn min_gap_phase(&self) -> f64 {
        if self.atoms.len() == 1 {
            return 2.0;
        }
        2.0 * (std::f64::consts::PI * self.min_gap.min(0.5)).sin()
    }

    /// Effective horizon `ceil(10 / min_gap_phase)`: beyond this many iterations
    /// the atomic structure dominates averaging behaviour.
    pub fn horizon(&self) -> u64 {
        (10.0 / self.min_gap_phase()).ceil() as u64
    }

    /// The atom points `λ_j = e^{2πiθ_j}`.
    pub fn points(&self) -> Vec<Complex<T>> {
        self.power_points(1)
    }

    /// `λ_j^n` for every atom, with the phase reduced before exponentiation.
    pub fn power_points(&self, n: i64) -> Vec<Complex<T>> {
        self.atoms.iter().map(|a| cis_turns(a.phase_turns(n))).collect()
    }

    /// Rescales the weights to total mass one.
    pub fn normalized(mut self) -> Self {
        let m = self.total_mass;
        for a in &mut self.atoms {
            a.weight = a.weight / m;
        }
        self.total_mass = self.atoms.iter().fold(T::zero(), |s, a| s + a.weight);
        self.id = OnceLock::new();
        self
    }

    /// Content hash (hex SHA-256 of the text serialization).
    pub fn id(&self) -> &str {
        self.id.get_or_init(|| crate::content_hash(self.to_text().as_bytes()))
    }

    /// Text table: header line then `theta<TAB>weight` per atom, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(48 * (self.atoms.len() + 1));
        out.push_str(MEASURE_HEADER);
        out.push_str(&self.label);
        out.push('\n');
        for a in &self.atoms {
            out.push_str(&fmt17(a.theta));
            out.push('\t');
            out.push_str(&fmt17(a.weight));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty measure file".into(),
        })?;
        let label = header.strip_prefix(MEASURE_HEADER).ok_or(Error::Parse {
            line: 1,
            msg: format!("expected header starting with {MEASURE_HEADER:?}"),
        })?;
        let mut thetas = Vec::new();
        let mut weights = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(t), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected theta<TAB>weight".into(),
                });
            };
            let parse = |s: &str| -> Result<T> {
                let v: f64 = s.trim().parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("{s:?}: {e}"),
                })?;
                Ok(T::lit(v))
            };
            thetas.push(parse(t)?);
            weights.push(parse(w)?);
        }
        Self::from_atoms(thetas, weights, label)
    }

    /// Fails with [`Error::MeasureMismatch`] unless both measures are the same.
    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if std::ptr::eq(self, other) || self.id() == other.id() {
            Ok(())
        } else {
            Err(Error::MeasureMismatch {
                left: self.id()[..12].to_string(),
                right: other.id()[..12].to_string(),
            })
        }
    }
}

fn cyclic_min_gap<T: Real>(atoms: &[Atom<T>]) -> f64 {
    if atoms.len() == 1 {
        return 1.0;
    }
    let gap = |a: &Atom<T>, b: &Atom<T>, wrap: bool| -> f64 {
        match (a.exact, b.exact) {
            (Some(x), Some(y)) => {
                let d = if wrap { x + Ratio::from_integer(1) - y } else { y - x };
                d.to_f64().unwrap_or(f64::NAN)
            }
            _ => {
                let (x, y) = (a.theta.to_f64().unwrap(), b.theta.to_f64().unwrap());
                if wrap {
                    x + 1.0 - y
                } else {
                    y - x
                }
            }
        }
    };
    let inner = atoms
        .windows(2)
        .map(|w| gap(&w[0], &w[1], false))
        .fold(f64::INFINITY, f64::min);
    let wrap = gap(&atoms[0], &atoms[atoms.len() - 1], true);
    let g = inner.min(wrap);
    if g.is_zero() {
        f64::MIN_POSITIVE
    } else {
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_duplicate_atoms() {
        assert!(DiscreteMeasure::<f64>::from_atoms(vec![0.5, 0.25], vec![1.0, 1.0], "x").is_err());
        assert!(DiscreteMeasure::<f64>::from_atoms(vec![0.25, 0.25], vec![1.0, 1.0], "x").is_err());
        assert!(DiscreteMeasure::<f64>::from_atoms(vec![1.0], vec![1.0], "x").is_err());
        assert!(DiscreteMeasure::<f64>::from_atoms(vec![0.0], vec![0.0], "x").is_err());
        assert!(DiscreteMeasure::<f64>::from_atoms(vec![], vec![], "x").is_err());
    }

    #[test]
    fn cyclic_gap_includes_wraparound() {
        let mu = DiscreteMeasure::<f64>::from_atoms(vec![0.05, 0.5, 0.98], vec![1.0; 3], "x").unwrap();
        assert!((mu.min_gap() - 0.07).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_preserves_atoms() {
        let mu = make_cantor::<f64>(3).unwrap();
        let back = DiscreteMeasure::<f64>::from_text(&mu.to_text()).unwrap();
        assert_eq!(back.len(), mu.len());
        for (a, b) in mu.atoms().iter().zip(back.atoms()) {
            assert_eq!(a.theta, b.theta);
            assert_eq!(a.weight, b.weight);
        }
        assert_eq!(back.to_text(), mu.to_text());
        assert_eq!(back.id(), mu.id());
    }

    #[test]
    fn header_is_required() {
        let err = DiscreteMeasure::<f64>::from_text("0.0\t1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn exact_phase_reduction() {
        let mu = make_uniform::<f64>(3).unwrap();
        assert_eq!(mu.atoms()[1].phase_turns(4), 1.0 / 3.0);
        assert_eq!(mu.atoms()[2].phase_turns(-1), 1.0 / 3.0);
        assert_eq!(mu.atoms()[1].phase_turns(3_000_000_000), 0.0);
    }

    #[test]
    fn horizon_from_phase_gap() {
        let mu = make_uniform::<f64>(4).unwrap();
        // |1 - i| = sqrt(2)
        assert!((mu.min_gap_phase() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mu.horizon(), 8);
    }
}
