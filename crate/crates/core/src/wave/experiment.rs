use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::cesaro::CesaroAccumulator;
use super::propagate::DiagonalUnitary;
use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, OperatorMatrix};
use crate::scalar::{fmt17, Real};

/// Finite stand-in for the weak operator topology: pairings `(T h₁, h₂)` for
/// every `h₁` in `inputs` and `h₂` in `outputs`.
#[derive(Debug, Clone)]
pub struct TestFamily<T: Real> {
    pub name: String,
    pub inputs: Vec<(i64, GridFunction<T>)>,
    pub outputs: Vec<(i64, GridFunction<T>)>,
}

impl<T: Real> TestFamily<T> {
    /// `h₁ = Uᵏe`, `h₂ = Uˡē` for `k, l` in `k_min..=k_max`.
    pub fn monomial(
        u: &DiagonalUnitary<T>,
        e: &GridFunction<T>,
        ebar: &GridFunction<T>,
        k_min: i64,
        k_max: i64,
    ) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::InvalidArgument(format!("empty k range {k_min}..={k_max}")));
        }
        let inputs = (k_min..=k_max)
            .map(|k| Ok((k, u.apply_power(e, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let outputs = (k_min..=k_max)
            .map(|l| Ok((l, u.apply_power(ebar, l)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: format!("monomial k,l in [{k_min}, {k_max}]"),
            inputs,
            outputs,
        })
    }

    /// `(input index, output index)` in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.inputs.len())
            .flat_map(|a| (0..self.outputs.len()).map(move |b| (a, b)))
            .collect()
    }
}

/// Inputs to [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentSetup<T: Real> {
    pub x: OperatorMatrix<T>,
    pub u: DiagonalUnitary<T>,
    pub family: TestFamily<T>,
    pub grid: Vec<u64>,
}

/// One test pair's sequences sampled on the grid.
#[derive(Debug, Clone)]
pub struct Trace<T: Real> {
    pub k: i64,
    pub l: i64,
    /// `(1/N) Σ_{n<N} ((UⁿXU⁻ⁿ − U⁻ⁿXUⁿ)h₁, h₂)`.
    pub cesaro_diff: Vec<Complex<T>>,
    /// Same with `+`.
    pub cesaro_sum: Vec<Complex<T>>,
    /// Non-averaged difference pairing at `n = N`.
    pub raw: Vec<Complex<T>>,
    /// `sup_{n ≤ N_last} |((UⁿXU⁻ⁿ + U⁻ⁿXUⁿ)h₁, h₂)|`, the amplitude of the averaged sum sequence.
    pub sum_amplitude: T,
}

impl<T: Real> Trace<T> {
    pub fn file_name(&self) -> String {
        format!("trace_k{}_l{}.csv", self.k, self.l)
    }

    pub fn to_csv(&self, grid: &[u64]) -> String {
        let mut out = String::from("N,cesaro_diff_re,cesaro_diff_im,cesaro_sum_re,cesaro_sum_im,raw_re,raw_im\n");
        for (i, n) in grid.iter().enumerate() {
            let (d, s, r) = (self.cesaro_diff[i], self.cesaro_sum[i], self.raw[i]);
            out.push_str(&format!(
                "{n},{},{},{},{},{},{}\n",
                fmt17(d.re),
                fmt17(d.im),
                fmt17(s.re),
                fmt17(s.im),
                fmt17(r.re),
                fmt17(r.im)
            ));
        }
        out
    }
}

/// `|c(N)| ≈ prefactor · N^exponent` from least squares on log–log data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub points: usize,
}

/// Minimum number of grid points at or below the horizon for a fit.
pub const MIN_FIT_POINTS: usize = 5;

/// Log–log least-squares fit over the points with `N ≤ horizon` and a
/// positive value; `None` when fewer than [`MIN_FIT_POINTS`] remain.
pub fn fit_decay(grid: &[u64], values: &[f64], horizon: u64) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(values)
        .filter(|(n, v)| **n <= horizon && **v > 0.0 && v.is_finite())
        .map(|(n, v)| ((*n as f64).ln(), v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(DecayFit {
        exponent: slope,
        prefactor: (my - slope * mx).exp(),
        points: pts.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport<T: Real> {
    pub measure_hash: String,
    pub family: String,
    pub grid: Vec<u64>,
    pub horizon: u64,
    pub traces: Vec<Trace<T>>,
    /// Decay fit of `|cesaro_diff|` per trace.
    pub fits: Vec<Option<DecayFit>>,
}

impl<T: Real> ConvergenceReport<T> {
    /// Grid values past the effective horizon.
    pub fn beyond_horizon(&self) -> Vec<u64> {
        self.grid.iter().copied().filter(|&n| n > self.horizon).collect()
    }

    /// `sup` over the family of `|cesaro_diff|` at grid index `i`.
    pub fn diff_sup(&self, i: usize) -> T {
        self.traces
            .iter()
            .fold(T::zero(), |m, t| m.max(t.cesaro_diff[i].norm()))
    }

    /// Successive-difference sup of `cesaro_sum` over the last octave of the
    /// grid, with the trace scale taken as the amplitude of the averaged
    /// sequence ([`Trace::sum_amplitude`]).
    ///
    /// The octave is `[N_last/2, N_last]`; when it holds a single grid point the
    /// last grid step is used.
    pub fn sum_cauchy_tail(&self, trace: usize) -> (T, T) {
        let t = &self.traces[trace];
        let last = *self.grid.last().expect("nonempty grid");
        let steps: Vec<usize> = (1..self.grid.len()).filter(|&i| 2 * self.grid[i - 1] >= last).collect();
        let steps = if steps.is_empty() && self.grid.len() > 1 {
            vec![self.grid.len() - 1]
        } else {
            steps
        };
        let osc = steps
            .iter()
            .fold(T::zero(), |m, &i| m.max((t.cesaro_sum[i] - t.cesaro_sum[i - 1]).norm()));
        (osc, t.sum_amplitude)
    }

    /// JSON summary: hash, horizon, grid, family, fits and horizon flags.
    pub fn summary_json(&self) -> Value {
        let fits: Vec<Value> = self
            .traces
            .iter()
            .zip(&self.fits)
            .map(|(t, f)| json!({"k": t.k, "l": t.l, "fit": f}))
            .collect();
        json!({
            "measure_hash": self.measure_hash,
            "horizon": self.horizon,
            "grid": self.grid,
            "beyond_horizon": self.beyond_horizon(),
            "family": self.family,
            "fits": fits,
            "raw_pairings": "qualitative",
            "tool_version": crate::TOOL_VERSION,
        })
    }

    /// Writes one CSV per trace and `manifest.json`; `extra` fields are merged
    /// into the manifest. Returns the written paths in order.
    pub fn write_to(&self, dir: &Path, extra: Value) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.traces.len() + 1);
        let mut files = Vec::with_capacity(self.traces.len());
        for t in &self.traces {
            let path = dir.join(t.file_name());
            fs::write(&path, t.to_csv(&self.grid))?;
            files.push(t.file_name());
            written.push(path);
        }
        let mut manifest = self.summary_json();
        manifest["traces"] = json!(files);
        if let (Value::Object(m), Value::Object(e)) = (&mut manifest, extra) {
            m.extend(e);
        }
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}

fn validate_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("N grid is empty".into()));
    }
    if grid[0] == 0 {
        return Err(Error::InvalidArgument("N grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Pairings `(UⁿXU⁻ⁿ h_a, g_b)` and `(U⁻ⁿXUⁿ h_a, g_b)` for every pair.
fn pairings_at<T: Real>(
    x: &OperatorMatrix<T>,
    u: &DiagonalUnitary<T>,
    inputs: &[Vec<Complex<T>>],
    outputs: &[Vec<Complex<T>>],
    n: i64,
) -> Vec<(Complex<T>, Complex<T>)> {
    let side = |p: &[Complex<T>]| -> Vec<Complex<T>> {
        let xs: Vec<Vec<Complex<T>>> = inputs
            .iter()
            .map(|h| {
                let v: Vec<Complex<T>> = h.iter().zip(p).map(|(a, b)| a * b).collect();
                x.entries().matvec(&v)
            })
            .collect();
        let gs: Vec<Vec<Complex<T>>> = outputs
            .iter()
            .map(|g| g.iter().zip(p).map(|(a, b)| (a * b).conj()).collect())
            .collect();
        xs.iter()
            .flat_map(|xv| {
                gs.iter().map(move |g| {
                    g.iter()
                        .zip(xv)
                        .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a * b)
                })
            })
            .collect()
    };
    let plus = side(&u.power(-n));
    let minus = side(&u.power(n));
    plus.into_iter().zip(minus).collect()
}

/// Traces of the averaged difference and sum sequences on the grid.
///
/// Pairings are evaluated in parallel over `n` and collected in order; each
/// trace's Cesàro accumulation is sequential, so results do not depend on
/// the thread count.
pub fn run_experiment<T: Real>(setup: &ExperimentSetup<T>) -> Result<ConvergenceReport<T>> {
    validate_grid(&setup.grid)?;
    let mu = setup.u.measure();
    mu.ensure_same(setup.x.measure())?;
    for (_, f) in setup.family.inputs.iter().chain(&setup.family.outputs) {
        mu.ensure_same(f.measure())?;
    }
    if setup.family.inputs.is_empty() || setup.family.outputs.is_empty() {
        return Err(Error::InvalidArgument("test family is empty".into()));
    }
    let inputs: Vec<Vec<Complex<T>>> = setup.family.inputs.iter().map(|(_, f)| f.to_orthonormal()).collect();
    let outputs: Vec<Vec<Complex<T>>> = setup.family.outputs.iter().map(|(_, f)| f.to_orthonormal()).collect();
    let n_max = *setup.grid.last().expect("validated") as i64;

    let table: Vec<Vec<(Complex<T>, Complex<T>)>> = (0..=n_max)
        .into_par_iter()
        .map(|n| pairings_at(&setup.x, &setup.u, &inputs, &outputs, n))
        .collect();

    let pairs = setup.family.pairs();
    let traces: Vec<Trace<T>> = pairs
        .iter()
        .enumerate()
        .map(|(p, &(a, b))| {
            let mut diff = CesaroAccumulator::new();
            let mut sum = CesaroAccumulator::new();
            let mut trace = Trace {
                k: setup.family.inputs[a].0,
                l: setup.family.outputs[b].0,
                cesaro_diff: Vec::with_capacity(setup.grid.len()),
                cesaro_sum: Vec::with_capacity(setup.grid.len()),
                raw: Vec::with_capacity(setup.grid.len()),
                sum_amplitude: T::zero(),
            };
            let mut next = 0;
            for (n, row) in table.iter().enumerate() {
                let (plus, minus) = row[p];
                // n = 0 contributes exactly zero to the difference sequence
                diff.push(if n == 0 {
                    Complex::new(T::zero(), T::zero())
                } else {
                    plus - minus
                });
                sum.push(plus + minus);
                trace.sum_amplitude = trace.sum_amplitude.max((plus + minus).norm());
                if next < setup.grid.len() && diff.count() == setup.grid[next] {
                    let (rp, rm) = table[setup.grid[next] as usize][p];
                    trace.cesaro_diff.push(diff.mean());
                    trace.cesaro_sum.push(sum.mean());
                    trace.raw.push(rp - rm);
                    next += 1;
                }
            }
            trace
        })
        .collect();

    let horizon = mu.horizon();
    let fits = traces
        .iter()
        .map(|t| {
            let v: Vec<f64> = t
                .cesaro_diff
                .iter()
                .map(|c| c.norm().to_f64().unwrap_or(f64::NAN))
                .collect();
            fit_decay(&setup.grid, &v, horizon)
        })
        .collect();
    Ok(ConvergenceReport {
        measure_hash: mu.id().to_string(),
        family: setup.family.name.clone(),
        grid: setup.grid.clone(),
        horizon,
        traces,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::{multiplication_unitary, MeasureRef};
    use crate::measure::{make_cantor, make_uniform};
    use crate::random::{random_operator, rng};
    use crate::wave::{difference_pairing, sum_pairing};

    fn setup(mu: &MeasureRef<f64>, grid: Vec<u64>) -> ExperimentSetup<f64> {
        let u = DiagonalUnitary::of_measure(mu);
        let one = GridFunction::one(mu);
        ExperimentSetup {
            x: random_operator(mu, &mut rng(4)),
            family: TestFamily::monomial(&u, &one, &one, -1, 1).unwrap(),
            u,
            grid,
        }
    }

    #[test]
    fn traces_match_direct_cesaro() {
        let mu = Arc::new(make_cantor::<f64>(3).unwrap());
        let s = setup(&mu, vec![1, 2, 5, 9]);
        let rep = run_experiment(&s).unwrap();
        assert_eq!(rep.traces.len(), 9);
        let uop = multiplication_unitary(&mu);
        let t = &rep.traces[5];
        let (h1, h2) = (&s.family.inputs[1].1, &s.family.outputs[2].1);
        assert_eq!((t.k, t.l), (0, 1));
        for (gi, &n_terms) in rep.grid.iter().enumerate() {
            let mut d = Complex::new(0.0, 0.0);
            let mut su = Complex::new(0.0, 0.0);
            for n in 0..n_terms as i64 {
                d += difference_pairing(&s.x, &uop, h1, h2, n).unwrap();
                su += sum_pairing(&s.x, &uop, h1, h2, n).unwrap();
            }
            let nn = n_terms as f64;
            assert!((t.cesaro_diff[gi] - d / nn).norm() < 1e-13);
            assert!((t.cesaro_sum[gi] - su / nn).norm() < 1e-13);
            let raw = difference_pairing(&s.x, &uop, h1, h2, n_terms as i64).unwrap();
            assert!((t.raw[gi] - raw).norm() < 1e-13);
        }
    }

    #[test]
    fn grid_validation() {
        let mu = Arc::new(make_uniform::<f64>(3).unwrap());
        for g in [vec![], vec![0, 1], vec![4, 4], vec![5, 3]] {
            assert!(run_experiment(&setup(&mu, g)).is_err());
        }
    }

    #[test]
    fn fit_recovers_power_law() {
        let grid: Vec<u64> = (4..12).map(|j| 1u64 << j).collect();
        let v: Vec<f64> = grid.iter().map(|&n| 3.0 / n as f64).collect();
        let f = fit_decay(&grid, &v, 10_000).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-9);
        assert!(fit_decay(&grid, &v, 100).is_none());
    }

    #[test]
    fn csv_and_manifest_layout() {
        let mu = Arc::new(make_uniform::<f64>(4).unwrap());
        let rep = run_experiment(&setup(&mu, vec![1, 3])).unwrap();
        let csv = rep.traces[0].to_csv(&rep.grid);
        assert!(csv.starts_with("N,cesaro_diff_re,cesaro_diff_im,cesaro_sum_re,cesaro_sum_im,raw_re,raw_im\n1,"));
        assert_eq!(rep.traces[0].file_name(), "trace_k-1_l-1.csv");
        let s = rep.summary_json();
        assert_eq!(s["horizon"], mu.horizon());
        assert_eq!(s["measure_hash"], mu.id());
    }
}
