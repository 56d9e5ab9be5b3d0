use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex;
use serde::Serialize;
use serde_json::{json, Value};
use waveops::hilbert::{multiplication_unitary, Conjugation, GridFunction, MeasureRef};
use waveops::measure::{decay_profile, make_cantor, make_riesz, make_uniform, riesz_demo, wiener_average};
use waveops::symmetry::{
    check_kernel_condition, check_kernel_condition_with, counterexample_identification, counterexample_kernel,
    find_gamma, smooth_rank_two, solve_identification, split_counterexample, Sign,
};
use waveops::wave::{
    cesaro, check_proposition_forward, construct_y, eta_block, geometric_mean_bound, run_experiment, symmetrize,
    verify_telescoping, DiagonalUnitary, ExperimentSetup, LemmaSetup, TestFamily,
};
use waveops::{content_hash, Operator, TOOL_VERSION};

use crate::spec::{build_measure, build_problem, resolve, ExperimentSpec, InputHashes, Problem, VectorSpec};
use crate::{CliError, ConvergeArgs, FourierArgs, VerifyArgs};

/// Propagation exponents at which the pairing identities are checked.
pub const LEMMA_N: [i64; 6] = [0, 1, 2, 7, 25, 64];
/// Relative tolerance for the η reflection and cancellation identities.
pub const ETA_TOL: f64 = 1e-12;
/// Default largest frequency for `fourier`.
pub const DEFAULT_N_MAX: u64 = 1024;

/// One line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            bound,
            passed: residual <= bound,
            detail: None,
        }
    }

    pub fn failed(name: impl Into<String>, detail: Value) -> Self {
        Self {
            name: name.into(),
            residual: f64::INFINITY,
            bound: 0.0,
            passed: false,
            detail: Some(detail),
        }
    }

    fn detail(mut self, d: Value) -> Self {
        self.detail = Some(d);
        self
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        match &self.detail {
            Some(Value::String(s)) if !self.passed => format!("{verdict} {}: {s}", self.name),
            _ => format!(
                "{verdict} {}: residual {:.3e} (bound {:.3e})",
                self.name, self.residual, self.bound
            ),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn f64_of(c: Complex<f64>) -> [f64; 2] {
    [c.re, c.im]
}

/// Spec file loaded with `--seed` applied.
struct Loaded {
    spec: ExperimentSpec,
    hash: String,
    base: PathBuf,
}

fn load(path: &Path, seed: Option<u64>) -> Result<Loaded, CliError> {
    let (mut spec, hash, base) = ExperimentSpec::load(path)?;
    if let Some(s) = seed {
        spec.override_seed(s);
    }
    Ok(Loaded { spec, hash, base })
}

fn output_dir(flag: &Option<PathBuf>, l: Option<&Loaded>) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| l.and_then(|l| l.spec.output_dir.as_ref().map(|p| resolve(&l.base, p))))
}

fn finish(checks: &[Check], out: Option<&Path>, extra: Value) -> Result<i32, CliError> {
    for c in checks {
        println!("{}", c.line());
    }
    let passed = checks.iter().all(|c| c.passed);
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut report = json!({
            "checks": checks,
            "passed": passed,
            "tool_version": TOOL_VERSION,
        });
        if let (Value::Object(m), Value::Object(e)) = (&mut report, extra) {
            m.extend(e);
        }
        write_json(&dir.join("verify_report.json"), &report)?;
    }
    println!(
        "{}",
        if passed {
            "verify: all checks passed"
        } else {
            "verify: FAILED"
        }
    );
    Ok(if passed { 0 } else { 1 })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    if let Some(name) = &args.builtin {
        return match name.as_str() {
            "paper-examples" => {
                let checks = builtin_examples();
                finish(&checks, args.out.as_deref(), json!({"builtin": name}))
            }
            other => Err(CliError::Usage(format!(
                "unknown builtin {other:?} (expected paper-examples)"
            ))),
        };
    }
    let path = args.spec.as_ref().expect("clap requires --spec or --builtin");
    let l = load(path, args.seed)?;
    if let Some(t) = args.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    l.spec.check_grid()?;
    let mut inputs = InputHashes::new();
    inputs.insert("spec".into(), l.hash.clone());
    let mu = build_measure(&l.spec.measure, &l.base, &mut inputs)?;
    let op = l
        .spec
        .operator
        .as_ref()
        .ok_or_else(|| CliError::Usage("spec has no [operator] section".into()))?;
    let problem = build_problem(&mu, op, &l.base, &mut inputs)?;
    let tol = args.tol.unwrap_or(l.spec.tolerances.identity);
    let vectors = l.spec.vectors.clone().unwrap_or_default();
    let n_y = *l.spec.n_grid.last().expect("checked");
    let checks = identity_suite(&problem, &vectors, tol, l.spec.tolerances.condition, n_y);
    let out = output_dir(&args.out, Some(&l));
    finish(
        &checks,
        out.as_deref(),
        json!({"inputs": inputs, "spec": l.spec.manifest_value()}),
    )
}

/// Every identity that applies to `problem`. Checks that cannot run because a
/// precondition fails are reported as failures naming the precondition.
pub fn identity_suite(p: &Problem, vectors: &VectorSpec, tol: f64, cond_tol: f64, n_y: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mu = &p.mu;
    let u = multiplication_unitary(mu);
    let du = DiagonalUnitary::of_measure(mu);

    if let Some(sign) = p.sign {
        checks.push(match &p.gamma {
            Some(g) => match check_kernel_condition_with(&p.kernel, g, sign, cond_tol) {
                Ok(r) => Check::new(format!("kernel condition ({sign})"), r.residual, cond_tol).detail(r.to_json()),
                Err(e) => Check::failed(format!("kernel condition ({sign})"), json!(e.to_string())),
            },
            None => {
                let r = find_gamma(&p.kernel, sign);
                Check::failed(
                    format!("kernel condition ({sign})"),
                    json!(format!(
                        "no gamma exists: {} witness at atoms {:?}",
                        r.witness
                            .as_ref()
                            .map(|w| format!("{:?}", w.kind).to_lowercase())
                            .unwrap_or_default(),
                        r.witness.as_ref().map(|w| w.indices.clone()).unwrap_or_default()
                    )),
                )
            }
        });
    }

    let kmax = p.kernel.max_abs().max(1.0);
    let k_of_x = p.x.commutator_with_diagonal(du.lambda()).to_kernel();
    checks.push(Check::new(
        "identification XU - UX = K",
        k_of_x.max_abs_diff(&p.kernel) / kmax,
        tol * p.cond.max(1.0),
    ));

    let x_norm = p.x.hs_norm().max(1.0);
    let tele = [(0, 1), (0, 7), (-5, 3), (2, 25), (-64, 64)]
        .iter()
        .map(|&(a, b)| verify_telescoping(&p.x, &u, a, b).map(|r| r / x_norm))
        .collect::<Result<Vec<f64>, _>>();
    checks.push(match tele {
        Ok(r) => Check::new("telescoping", r.into_iter().fold(0.0, f64::max), tol),
        Err(e) => Check::failed("telescoping", json!(e.to_string())),
    });

    let (Some(sign), Some(gamma)) = (p.sign, p.gamma.as_ref()) else {
        return checks;
    };
    let e = GridFunction::one(mu);
    let setup = match LemmaSetup::new(&p.x, &u, gamma, &e, sign) {
        Ok(s) => s,
        Err(err) => {
            checks.push(Check::failed("lemma precondition", json!(err.to_string())));
            return checks;
        }
    };
    let [k_lo, k_hi] = vectors.k_range;
    let kl: Vec<(i64, i64)> = (k_lo..=k_hi).flat_map(|k| (k_lo..=k_hi).map(move |l| (k, l))).collect();
    let scale = setup.scale().max(f64::MIN_POSITIVE);
    let lemma = kl
        .iter()
        .flat_map(|&(k, l)| LEMMA_N.iter().map(move |&n| (k, l, n)))
        .map(|(k, l, n)| setup.residual(k, l, n) / scale)
        .fold(0.0, f64::max);
    checks.push(Check::new(format!("pairing identity ({sign})"), lemma, tol));

    let table = setup.eta_table();
    let eta_scale = (setup.k.hs_norm() * e.norm().powi(2)).max(f64::MIN_POSITIVE);
    let n_last = *LEMMA_N.last().expect("nonempty");
    let mut refl: f64 = 0.0;
    let mut agg: f64 = 0.0;
    for &(k, l) in &kl {
        let (lo, hi) = eta_block(k, l, n_last);
        let seq = table.eta_range(k, l, lo, hi);
        refl = refl.max(seq.reflection_defect(sign) / eta_scale);
        for &n in &LEMMA_N {
            let d = match sign {
                Sign::Antisymmetric => seq.aggregate(n),
                Sign::Symmetric => seq.symmetric_defect(n),
            };
            agg = agg.max(d.map(|z| z.norm() / eta_scale).unwrap_or(f64::INFINITY));
        }
    }
    checks.push(Check::new(format!("eta reflection ({sign})"), refl, ETA_TOL));
    checks.push(Check::new(
        match sign {
            Sign::Antisymmetric => "eta aggregate cancellation",
            Sign::Symmetric => "eta symmetric reformulation",
        },
        agg,
        ETA_TOL,
    ));

    if sign == Sign::Antisymmetric {
        checks.extend(proposition_checks(&p.x, &u, gamma, tol, n_y));
    }
    checks
}

/// Forward implication and `Y` construction on the `C`-symmetric part of `x`.
fn proposition_checks(x: &Operator, u: &Operator, gamma: &GridFunction<f64>, tol: f64, n_y: u64) -> Vec<Check> {
    let xs = match symmetrize(x, gamma) {
        Ok(x) => x,
        Err(e) => return vec![Check::failed("proposition forward", json!(e.to_string()))],
    };
    let norm = xs.hs_norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    match check_proposition_forward(&xs, gamma) {
        Ok(d) => out.push(Check::new("proposition forward", d / norm, tol)),
        Err(e) => out.push(Check::failed("proposition forward", json!(e.to_string()))),
    }
    match construct_y(&xs, u, gamma, n_y) {
        Ok((_, d)) => {
            let detail = serde_json::to_value(d).expect("json");
            out.push(Check::new(format!("Y commutator defect (N = {n_y})"), d.d1, d.d1_bound).detail(detail.clone()));
            out.push(Check::new("Y C-symmetry defect", d.d2 / norm, tol).detail(detail));
        }
        Err(e) => out.push(Check::failed("Y construction", json!(e.to_string()))),
    }
    out
}

/// Built-in checks on the closed-form examples: the symmetric counterexample
/// and its split, a rank-two `γ`, and scalar Cesàro means.
pub fn builtin_examples() -> Vec<Check> {
    let mu: MeasureRef<f64> = Arc::new(make_cantor(5).expect("valid level"));
    let mut checks = Vec::new();
    let tol = 1e-10;

    let k = counterexample_kernel(&mu);
    let r = find_gamma(&k, Sign::Antisymmetric);
    checks.push(Check {
        name: "counterexample has no antisymmetric gamma".into(),
        residual: if r.gamma.is_none() && r.witness.is_some() {
            0.0
        } else {
            1.0
        },
        bound: 0.0,
        passed: r.gamma.is_none() && r.witness.is_some(),
        detail: Some(r.to_json()),
    });

    match split_counterexample(&mu) {
        Ok(s) => {
            for (name, part, g) in [
                ("first", &s.first, &s.gamma_first),
                ("second", &s.second, &s.gamma_second),
            ] {
                checks.push(match check_kernel_condition(part, g, Sign::Antisymmetric) {
                    Ok(r) => Check::new(format!("counterexample {name} part antisymmetric"), r.residual, 1e-12),
                    Err(e) => Check::failed(
                        format!("counterexample {name} part antisymmetric"),
                        json!(e.to_string()),
                    ),
                });
            }
            let gap = s.gamma_first.max_abs_diff(&s.gamma_second);
            checks.push(Check {
                name: "counterexample parts need different gammas".into(),
                residual: gap,
                bound: 1e-6,
                passed: gap > 1e-6,
                detail: None,
            });
            checks.push(Check::new(
                "counterexample parts sum to kernel",
                s.first.add(&s.second).expect("same measure").max_abs_diff(&s.full),
                1e-14,
            ));
        }
        Err(e) => checks.push(Check::failed("counterexample split", json!(e.to_string()))),
    }

    let x = counterexample_identification(&mu);
    let lambda = DiagonalUnitary::of_measure(&mu);
    let kx = x.commutator_with_diagonal(lambda.lambda()).to_kernel();
    checks.push(Check::new(
        "counterexample X gives XU - UX = K",
        kx.max_abs_diff(&k),
        tol,
    ));

    match smooth_rank_two(&mu) {
        Ok((k2, g)) => {
            match check_kernel_condition(&k2, &g, Sign::Antisymmetric) {
                Ok(r) => checks.push(Check::new("rank-two gamma = u1/v2", r.residual, 1e-12)),
                Err(e) => checks.push(Check::failed("rank-two gamma = u1/v2", json!(e.to_string()))),
            }
            match solve_identification(&k2) {
                Ok(id) => {
                    let kx = id.operator().commutator_with_diagonal(lambda.lambda()).to_kernel();
                    checks.push(Check::new(
                        "rank-two identification",
                        kx.max_abs_diff(&k2) / k2.max_abs().max(1.0),
                        tol * id.cond.max(1.0),
                    ));
                }
                Err(e) => checks.push(Check::failed("rank-two identification", json!(e.to_string()))),
            }
        }
        Err(e) => checks.push(Check::failed("rank-two construction", json!(e.to_string()))),
    }

    let i = Complex::new(0.0, 1.0);
    let seq: Vec<Complex<f64>> = (0..3).map(|n| i.powi(n)).collect();
    checks.push(Check::new(
        "scalar Cesaro mean of i^n, N = 3",
        (cesaro(&seq, 3) - i / 3.0).norm(),
        1e-15,
    ));
    let omega = Complex::from_polar(1.0, 0.7);
    let n = 1000;
    let pow: Vec<Complex<f64>> = (0..n).map(|k| omega.powi(k as i32)).collect();
    let mean = cesaro(&pow, n).norm();
    let bound = geometric_mean_bound(omega, n as u64);
    checks.push(Check::new("scalar Cesaro geometric bound", mean, bound));
    checks
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<i32, CliError> {
    let l = load(&args.spec, args.seed)?;
    l.spec.check_grid()?;
    let out = output_dir(&args.out, Some(&l))
        .ok_or_else(|| CliError::Usage("no output directory: set output_dir or pass --out".into()))?;
    let mut inputs = InputHashes::new();
    inputs.insert("spec".into(), l.hash.clone());
    let mu = build_measure(&l.spec.measure, &l.base, &mut inputs)?;
    let op = l
        .spec
        .operator
        .as_ref()
        .ok_or_else(|| CliError::Usage("spec has no [operator] section".into()))?;
    let p = build_problem(&mu, op, &l.base, &mut inputs)?;
    let gamma = p
        .gamma
        .clone()
        .ok_or_else(|| CliError::Check("infeasible operator: no gamma satisfies the requested relation".into()))?;
    let c = Conjugation::new(gamma).map_err(|e| CliError::Check(format!("infeasible operator: {e}")))?;
    let e = GridFunction::one(&mu);
    let ebar = c.apply(&e).expect("same measure");
    let u = DiagonalUnitary::of_measure(&mu);
    let vectors = l.spec.vectors.clone().unwrap_or_default();
    let [k_lo, k_hi] = vectors.k_range;
    let family =
        TestFamily::monomial(&u, &e, &ebar, k_lo, k_hi).map_err(|e| CliError::Usage(format!("vectors: {e}")))?;
    let setup = ExperimentSetup {
        x: p.x.clone(),
        u,
        family,
        grid: l.spec.n_grid.clone(),
    };
    let report = run_experiment(&setup).map_err(|e| CliError::Usage(e.to_string()))?;
    let extra = json!({
        "spec": l.spec.manifest_value(),
        "inputs": inputs,
        "operator": {
            "kind": p.kind,
            "symmetry": p.sign.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
            "cond": p.cond,
            "x_hs_norm": p.x.hs_norm(),
        },
    });
    let written = report.write_to(&out, extra).map_err(|e| io_err(&out, e))?;
    let last = report.grid.len() - 1;
    println!(
        "converge: {} files in {} (horizon {}, diff sup {:.3e} at N = {} -> {:.3e} at N = {})",
        written.len(),
        out.display(),
        report.horizon,
        report.diff_sup(0),
        report.grid[0],
        report.diff_sup(last),
        report.grid[last],
    );
    Ok(0)
}

/// `N` values for the Wiener column: powers of two up to `n_max`, then `n_max`.
pub fn wiener_grid(n_max: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (0..64).map(|k| 1u64 << k).take_while(|&n| n <= n_max).collect();
    if g.last() != Some(&n_max) && n_max > 0 {
        g.push(n_max);
    }
    g
}

pub fn cmd_fourier(args: &FourierArgs) -> Result<i32, CliError> {
    let mut inputs = InputHashes::new();
    let (mu, spec_n_max, loaded): (MeasureRef<f64>, Option<u64>, Option<Loaded>) = match &args.builtin {
        Some(name) => {
            let m = match name.as_str() {
                "uniform8" => make_uniform(8),
                "cantor8" => make_cantor(8),
                "riesz-demo" => make_riesz(&riesz_demo()),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown builtin {other:?} (expected uniform8, cantor8 or riesz-demo)"
                    )))
                }
            }
            .expect("builtin measures are valid");
            inputs.insert("measure".into(), m.id().to_string());
            (Arc::new(m), None, None)
        }
        None => {
            let l = load(
                args.spec.as_ref().expect("clap requires --spec or --builtin"),
                args.seed,
            )?;
            inputs.insert("spec".into(), l.hash.clone());
            let mu = build_measure(&l.spec.measure, &l.base, &mut inputs)?;
            (mu, l.spec.fourier.map(|f| f.n_max), Some(l))
        }
    };
    let n_max = args.n_max.or(spec_n_max).unwrap_or(DEFAULT_N_MAX);
    let out = output_dir(&args.out, loaded.as_ref())
        .ok_or_else(|| CliError::Usage("no output directory: set output_dir or pass --out".into()))?;
    ensure_dir(&out)?;

    let profile = decay_profile(&mu, n_max);
    let profile_path = out.join("profile.csv");
    fs::write(&profile_path, profile.to_csv()).map_err(|e| io_err(&profile_path, e))?;

    let energy = mu.atomic_energy();
    let mut wiener = String::from("N,wiener_average,atomic_energy\n");
    for n in wiener_grid(n_max) {
        wiener.push_str(&format!("{n},{:e},{:e}\n", wiener_average(&mu, n), energy));
    }
    let wiener_path = out.join("wiener.csv");
    fs::write(&wiener_path, &wiener).map_err(|e| io_err(&wiener_path, e))?;

    let mut manifest = json!({
        "measure_hash": mu.id(),
        "measure_label": mu.label(),
        "n_max": n_max,
        "atomic_energy": energy,
        "inputs": inputs,
        "files": ["profile.csv", "wiener.csv"],
        "tool_version": TOOL_VERSION,
        "mu_hat_zero": f64_of(profile.values[0]),
    });
    if let Some(name) = &args.builtin {
        manifest["builtin"] = json!(name);
    }
    if let Some(l) = &loaded {
        manifest["spec"] = l.spec.manifest_value();
    }
    write_json(&out.join("manifest.json"), &manifest)?;
    println!(
        "fourier: {} atoms, n_max {}, wiener({}) = {:.6e}, atomic energy {:.6e}",
        mu.len(),
        n_max,
        n_max,
        wiener_average(&mu, n_max.max(1)),
        energy
    );
    Ok(0)
}

/// Content hash of a file, for tests and manifests.
pub fn file_hash(path: &Path) -> std::io::Result<String> {
    Ok(content_hash(&fs::read(path)?))
}
