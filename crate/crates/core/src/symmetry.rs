//! Kernel symmetry conditions `γ(z)k(ξ,z) = ∓γ(ξ)k(z,ξ)`, the search for a
//! suitable `γ`, and the explicit commutator constructions built on them.

use std::collections::VecDeque;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hilbert::{integral_operator, GridFunction, Kernel, MeasureRef, OperatorMatrix, Role};
use crate::scalar::Real;

/// Default tolerance on the normalized residual of a kernel condition.
pub const CONDITION_TOL: f64 = 1e-10;
/// Entries below this fraction of `max|k|` count as zero in [`find_gamma`].
pub const ZERO_TOL: f64 = 1e-12;
/// Diagonal-vanishing tolerance (relative) in [`solve_identification`].
pub const DIAGONAL_TOL: f64 = 1e-10;
/// [`solve_identification`] refuses problems conditioned worse than this.
pub const MAX_COND: f64 = 1e8;

/// Which of the two kernel relations is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `γ(z)k(ξ,z) = −γ(ξ)k(z,ξ)`
    Antisymmetric,
    /// `γ(z)k(ξ,z) = γ(ξ)k(z,ξ)`
    Symmetric,
}

impl Sign {
    /// `σ` in `γ_i k_ij = σ γ_j k_ji`.
    pub fn sigma(self) -> f64 {
        match self {
            Sign::Antisymmetric => -1.0,
            Sign::Symmetric => 1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Antisymmetric => "antisymmetric",
            Sign::Symmetric => "symmetric",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "antisymmetric" => Ok(Sign::Antisymmetric),
            "symmetric" => Ok(Sign::Symmetric),
            _ => Err(Error::InvalidArgument(format!("unknown sign {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    /// `k[i][j]` nonzero while `k[j][i]` is zero.
    Pattern,
    /// Ratios around a cycle of atoms do not multiply to one.
    Cycle,
    /// Nonzero diagonal entry under the antisymmetric relation.
    Diagonal,
    /// The pair where a given `γ` has the largest residual.
    Residual,
}

/// Why a kernel fails a condition, as atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SymmetryReport<T: Real> {
    pub sign: Sign,
    pub residual: T,
    pub gamma: Option<Vec<Complex<T>>>,
    pub witness: Option<Witness>,
    pub zero_tol: T,
    pub tol: T,
    pub passed: bool,
}

impl<T: Real> SymmetryReport<T> {
    /// JSON export: `{sign, residual, gamma, witness, zero_tol, tol}`.
    pub fn to_json(&self) -> Value {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        json!({
            "sign": self.sign,
            "residual": f(self.residual),
            "gamma": self.gamma.as_ref().map(|g| g.iter().map(|z| [f(z.re), f(z.im)]).collect::<Vec<_>>()),
            "witness": self.witness,
            "zero_tol": f(self.zero_tol),
            "tol": f(self.tol),
            "passed": self.passed,
        })
    }

    /// `γ` as a function on the measure, when one was found.
    pub fn gamma_function(&self, mu: &MeasureRef<T>) -> Option<GridFunction<T>> {
        self.gamma
            .as_ref()
            .and_then(|g| GridFunction::new(mu.clone(), g.clone()).ok())
    }
}

/// Atoms whose kernel row and column are entirely below `thresh`.
fn isolated_atoms<T: Real>(k: &Kernel<T>, thresh: T) -> Vec<bool> {
    let m = k.dim();
    (0..m)
        .map(|i| (0..m).all(|j| k.get(i, j).norm() <= thresh && k.get(j, i).norm() <= thresh))
        .collect()
}

/// Normalized residual `max |γ_i k_ij − σ γ_j k_ji| / max(1, max|k|)` and its argmax.
fn condition_residual<T: Real>(k: &Kernel<T>, gamma: &[Complex<T>], sign: Sign) -> (T, Option<(usize, usize)>) {
    let m = k.dim();
    let maxk = k.max_abs();
    let isolated = isolated_atoms(k, T::lit(ZERO_TOL) * maxk);
    let s = T::lit(sign.sigma());
    let mut worst = T::zero();
    let mut at = None;
    for i in (0..m).filter(|&i| !isolated[i]) {
        for j in (i..m).filter(|&j| !isolated[j]) {
            let r = (gamma[i] * k.get(i, j) - (gamma[j] * k.get(j, i)).scale(s)).norm();
            if r > worst {
                worst = r;
                at = Some((i, j));
            }
        }
    }
    (worst / maxk.max(T::one()), at)
}

pub fn check_kernel_condition<T: Real>(
    k: &Kernel<T>,
    gamma: &GridFunction<T>,
    sign: Sign,
) -> Result<SymmetryReport<T>> {
    check_kernel_condition_with(k, gamma, sign, T::lit(CONDITION_TOL))
}

/// Evaluates the relation for a given `γ` (which must not vanish).
pub fn check_kernel_condition_with<T: Real>(
    k: &Kernel<T>,
    gamma: &GridFunction<T>,
    sign: Sign,
    tol: T,
) -> Result<SymmetryReport<T>> {
    k.measure().ensure_same(gamma.measure())?;
    if let Some(index) = gamma.values().iter().position(|g| g.is_zero()) {
        return Err(Error::VanishingGamma { index });
    }
    let (residual, at) = condition_residual(k, gamma.values(), sign);
    let passed = residual <= tol;
    Ok(SymmetryReport {
        sign,
        residual,
        gamma: Some(gamma.values().to_vec()),
        witness: (!passed).then(|| Witness {
            kind: WitnessKind::Residual,
            indices: at.map(|(i, j)| vec![i, j]).unwrap_or_default(),
        }),
        zero_tol: T::lit(ZERO_TOL) * k.max_abs(),
        tol,
        passed,
    })
}

/// Searches for `γ` with the given relation by propagating ratios along a
/// spanning forest of the graph of nonzero kernel entries.
///
/// Traversal is breadth-first in atom order; each component's first atom gets
/// `γ = 1`, as do isolated atoms. Returns the failure witness instead of `γ` when
/// the zero pattern is asymmetric, a diagonal entry forbids the antisymmetric
/// relation, or a non-tree edge closes an inconsistent cycle.
pub fn find_gamma<T: Real>(k: &Kernel<T>, sign: Sign) -> SymmetryReport<T> {
    find_gamma_with(k, sign, T::lit(CONDITION_TOL))
}

pub fn find_gamma_with<T: Real>(k: &Kernel<T>, sign: Sign, tol: T) -> SymmetryReport<T> {
    let m = k.dim();
    let maxk = k.max_abs();
    let zero_tol = T::lit(ZERO_TOL) * maxk;
    let fail = |witness: Witness, residual: T| SymmetryReport {
        sign,
        residual,
        gamma: None,
        witness: Some(witness),
        zero_tol,
        tol,
        passed: false,
    };
    let nz = |i: usize, j: usize| k.get(i, j).norm() > zero_tol;

    if sign == Sign::Antisymmetric {
        if let Some(i) = (0..m).find(|&i| nz(i, i)) {
            let r = (k.get(i, i).scale(T::lit(2.0))).norm() / maxk.max(T::one());
            return fail(
                Witness {
                    kind: WitnessKind::Diagonal,
                    indices: vec![i],
                },
                r,
            );
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if nz(i, j) != nz(j, i) {
                let r = k.get(i, j).norm().max(k.get(j, i).norm()) / maxk.max(T::one());
                return fail(
                    Witness {
                        kind: WitnessKind::Pattern,
                        indices: vec![i, j],
                    },
                    r,
                );
            }
        }
    }

    let s = T::lit(sign.sigma());
    let one = Complex::<T>::one();
    let mut gamma: Vec<Option<Complex<T>>> = vec![None; m];
    let mut parent: Vec<Option<usize>> = vec![None; m];
    let mut depth = vec![0usize; m];
    for root in 0..m {
        if gamma[root].is_some() {
            continue;
        }
        gamma[root] = Some(one);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let gu = gamma[u].expect("visited");
            for v in 0..m {
                if v == u || gamma[v].is_some() || !nz(u, v) {
                    continue;
                }
                // γ_u k_uv = σ γ_v k_vu
                gamma[v] = Some(gu * k.get(u, v) / k.get(v, u).scale(s));
                parent[v] = Some(u);
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let gamma: Vec<Complex<T>> = gamma.into_iter().map(|g| g.expect("every atom visited")).collect();

    for i in 0..m {
        for j in i + 1..m {
            if !nz(i, j) || parent[j] == Some(i) || parent[i] == Some(j) {
                continue;
            }
            let a = gamma[i] * k.get(i, j);
            let b = (gamma[j] * k.get(j, i)).scale(s);
            if (a - b).norm() > tol * a.norm().max(b.norm()) {
                let (residual, _) = condition_residual(k, &gamma, sign);
                return fail(
                    Witness {
                        kind: WitnessKind::Cycle,
                        indices: tree_cycle(&parent, &depth, i, j),
                    },
                    residual,
                );
            }
        }
    }

    let (residual, at) = condition_residual(k, &gamma, sign);
    let passed = residual <= tol;
    SymmetryReport {
        sign,
        residual,
        gamma: Some(gamma),
        witness: (!passed).then(|| Witness {
            kind: WitnessKind::Residual,
            indices: at.map(|(i, j)| vec![i, j]).unwrap_or_default(),
        }),
        zero_tol,
        tol,
        passed,
    }
}

/// Tree path `i → … → j`; together with the edge `(j, i)` it is a cycle.
fn tree_cycle(parent: &[Option<usize>], depth: &[usize], i: usize, j: usize) -> Vec<usize> {
    let (mut a, mut b) = (i, j);
    let mut left = vec![a];
    let mut right = vec![b];
    while a != b {
        if depth[a] >= depth[b] {
            a = parent[a].expect("same component");
            left.push(a);
        } else {
            b = parent[b].expect("same component");
            right.push(b);
        }
    }
    right.pop();
    left.extend(right.into_iter().rev());
    left
}

/// Solution `x` of `XU − UX = K` together with `cond = max|k| / min_{i≠j}|λ_i − λ_j|`.
#[derive(Debug, Clone)]
pub struct Identification<T: Real> {
    pub x: Kernel<T>,
    pub cond: T,
}

impl<T: Real> Identification<T> {
    pub fn operator(&self) -> OperatorMatrix<T> {
        integral_operator(&self.x).with_role(Role::Identification)
    }
}

/// Kernel `x(ξ,z) = k(ξ,z)/(ξ − z)` off the diagonal and `0` on it, so that the
/// integral operator `X` satisfies `XU − UX = K`.
pub fn solve_identification<T: Real>(k: &Kernel<T>) -> Result<Identification<T>> {
    let m = k.dim();
    let maxk = k.max_abs();
    for i in 0..m {
        let d = k.get(i, i).norm();
        if d > T::lit(DIAGONAL_TOL) * maxk {
            return Err(Error::NonzeroDiagonal {
                index: i,
                value: d.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let mu = k.measure();
    let cond = if maxk.is_zero() {
        T::zero()
    } else {
        maxk / T::lit(mu.min_gap_phase())
    };
    if cond > T::lit(MAX_COND) {
        return Err(Error::IllConditioned {
            cond: cond.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let pts = mu.points();
    let x = Kernel::from_indexed(mu, |i, j| {
        if i == j {
            Complex::zero()
        } else {
            k.get(i, j) / (pts[j] - pts[i])
        }
    });
    Ok(Identification { x, cond })
}

/// Tolerance for `u₁v₁ = u₂v₂` in [`make_rank_two`].
pub const RANK_TWO_TOL: f64 = 1e-12;

/// Rank-two commutator kernel `u₁(ξ)v₁(z) − u₂(ξ)v₂(z)` and `γ = u₁/v₂`.
pub fn make_rank_two<T: Real>(
    u1: &GridFunction<T>,
    v1: &GridFunction<T>,
    u2: &GridFunction<T>,
    v2: &GridFunction<T>,
) -> Result<(Kernel<T>, GridFunction<T>)> {
    let mu = u1.measure();
    for f in [v1, u2, v2] {
        mu.ensure_same(f.measure())?;
    }
    for (index, (((a, b), c), d)) in u1
        .values()
        .iter()
        .zip(v1.values())
        .zip(u2.values())
        .zip(v2.values())
        .enumerate()
    {
        let (p, q) = (a * b, c * d);
        let defect = (p - q).norm();
        if defect > T::lit(RANK_TWO_TOL) * T::one().max(p.norm()).max(q.norm()) {
            return Err(Error::RankTwoCondition {
                index,
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    for (name, f) in [("v1", v1), ("v2", v2), ("u1", u1)] {
        if let Some(index) = f.values().iter().position(|x| x.is_zero()) {
            return Err(Error::InvalidArgument(format!("{name} vanishes at atom {index}")));
        }
    }
    let (a, b, c, d) = (u1.values(), v1.values(), u2.values(), v2.values());
    let k = Kernel::from_indexed(mu, |i, j| a[j] * b[i] - c[j] * d[i]);
    let gamma = u1.div(v2)?;
    Ok((k, gamma))
}

/// Rank-two kernel `φ(ξ)ψ(z)(z − ξ)` from `u₁ = φ`, `v₁ = ψz`, `u₂ = φz`, `v₂ = ψ`
/// with smooth `φ, ψ` of equal modulus, so `γ = φ/ψ` is unimodular.
pub fn smooth_rank_two<T: Real>(mu: &MeasureRef<T>) -> Result<(Kernel<T>, GridFunction<T>)> {
    let rho = |z: Complex<T>| T::lit(1.25) + T::lit(0.5) * z.re;
    let phi = GridFunction::from_points(mu, |z| Complex::from_polar(rho(z), T::lit(0.3) * T::PI() * z.im));
    let psi = GridFunction::from_points(mu, |z| Complex::from_polar(rho(z), T::lit(0.2) * T::PI() * (z * z).re));
    let z = GridFunction::monomial(mu, 1);
    make_rank_two(&phi, &psi.mul(&z)?, &phi.mul(&z)?, &psi)
}

/// `k(ξ, z) = 1 − Re(conj(ξ) z)`.
pub fn counterexample_kernel<T: Real>(mu: &MeasureRef<T>) -> Kernel<T> {
    Kernel::from_points(mu, |xi, z| Complex::new(T::one() - (xi.conj() * z).re, T::zero()))
}

/// `X = ½((·, z)1 − (·, 1) z̄)`, i.e. kernel `x(ξ, z) = ½(conj(ξ) − conj(z))`.
pub fn counterexample_identification<T: Real>(mu: &MeasureRef<T>) -> OperatorMatrix<T> {
    let half = T::lit(0.5);
    let x = Kernel::from_points(mu, |xi, z| (xi.conj() - z.conj()).scale(half));
    integral_operator(&x).with_role(Role::Identification)
}

/// The counterexample kernel and its two rank-two pieces, each with its own `γ`.
#[derive(Debug, Clone)]
pub struct CounterexampleSplit<T: Real> {
    pub full: Kernel<T>,
    pub first: Kernel<T>,
    pub second: Kernel<T>,
    pub gamma_first: GridFunction<T>,
    pub gamma_second: GridFunction<T>,
}

/// Splits `1 − Re(conj(ξ)z)` along `X = ½(·, z)1 − ½(·, 1)z̄`:
/// the first piece is `½ − ½ conj(ξ)z` with `γ = ½z̄`, the second
/// `½ − ½ ξ conj(z)` with `γ = ½z`.
pub fn split_counterexample<T: Real>(mu: &MeasureRef<T>) -> Result<CounterexampleSplit<T>> {
    let half = Complex::new(T::lit(0.5), T::zero());
    let h = GridFunction::constant(mu, half);
    let one = GridFunction::one(mu);
    let z = GridFunction::monomial(mu, 1);
    let zbar = z.conj();
    let (first, gamma_first) = make_rank_two(&h, &one, &zbar.scale(half), &z)?;
    let (second, gamma_second) = make_rank_two(&h, &one, &z.scale(half), &zbar)?;
    Ok(CounterexampleSplit {
        full: counterexample_kernel(mu),
        first,
        second,
        gamma_first,
        gamma_second,
    })
}
