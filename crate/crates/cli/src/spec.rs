//! Experiment spec files (TOML) and their resolution into concrete objects.
//!
//! ```toml
//! n_grid = [16, 32, 64, 128]
//! output_dir = "out"
//!
//! [measure]
//! kind = "cantor"          # uniform | cantor | riesz | file | random
//! level = 7
//!
//! [operator]
//! kind = "rank_two"        # rank_two | counterexample | random_kernel | kernel_file
//! symmetry = "antisymmetric"
//!
//! [vectors]
//! family = "monomial"
//! k_range = [-4, 4]
//!
//! [tolerances]
//! identity = 1e-10
//! condition = 1e-10
//! ```
//! Dotted keys (`measure.kind = "cantor"`) are equivalent to sections. Unknown
//! keys, and keys that do not apply to the chosen kind, are errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use waveops::hilbert::{GridFunction, Kernel, MeasureRef};
use waveops::measure::{make_cantor, make_random, make_riesz, make_uniform, riesz_demo, DiscreteMeasure, RieszProduct};
use waveops::random::{random_kernel, rng};
use waveops::symmetry::{
    counterexample_kernel, find_gamma, smooth_rank_two, solve_identification, Identification, Sign,
};
use waveops::{content_hash, Operator};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Uniform,
    Cantor,
    Riesz,
    File,
    Random,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<MeasureKind>,
    /// Atom count for `uniform` and `random`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    /// Cantor level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Riesz: `preset = "demo"`, or explicit `coeffs`, `freqs`, `grid`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freqs: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    RankTwo,
    Counterexample,
    RandomKernel,
    KernelFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Antisymmetric,
    Symmetric,
    None,
}

impl SymmetryClass {
    pub fn sign(self) -> Option<Sign> {
        match self {
            SymmetryClass::Antisymmetric => Some(Sign::Antisymmetric),
            SymmetryClass::Symmetric => Some(Sign::Symmetric),
            SymmetryClass::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFamily {
    Monomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub family: VectorFamily,
    pub k_range: [i64; 2],
}

impl Default for VectorSpec {
    fn default() -> Self {
        Self {
            family: VectorFamily::Monomial,
            k_range: [-4, 4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub identity: f64,
    #[serde(default = "default_tol")]
    pub condition: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: default_tol(),
            condition: default_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSpec {
    pub n_max: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<VectorSpec>,
    #[serde(default)]
    pub n_grid: Vec<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourier: Option<FourierSpec>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| usage(format!("spec: {}", e.to_string().trim_end())))
    }

    /// Reads a spec file. Paths inside it stay as written; resolve them against
    /// the returned base directory (the spec file's directory) with [`resolve`].
    pub fn load(path: &Path) -> Result<(Self, String, PathBuf), CliError> {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read spec {}: {e}", path.display())))?;
        let spec = Self::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((spec, content_hash(text.as_bytes()), base))
    }

    /// `--seed` replaces every seed the spec uses.
    pub fn override_seed(&mut self, seed: u64) {
        if self.measure.kind == Some(MeasureKind::Random) {
            self.measure.seed = Some(seed);
        }
        if let Some(op) = self.operator.as_mut() {
            op.seed = Some(seed);
        }
    }

    pub fn check_grid(&self) -> Result<(), CliError> {
        if self.n_grid.is_empty() {
            return Err(usage("n_grid is empty"));
        }
        if self.n_grid[0] == 0 {
            return Err(usage("n_grid values must be positive"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("n_grid must be strictly increasing"));
        }
        Ok(())
    }

    /// The spec as embedded in manifests: everything except the output location.
    pub fn manifest_value(&self) -> serde_json::Value {
        let mut s = self.clone();
        s.output_dir = None;
        serde_json::to_value(&s).expect("spec serializes")
    }
}

/// `p` relative to `base` unless absolute.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

/// Input artifacts consumed so far, name → SHA-256.
pub type InputHashes = BTreeMap<String, String>;

fn forbid(kind: &str, name: &str, present: bool) -> Result<(), CliError> {
    if present {
        return Err(usage(format!("measure.{name} does not apply to kind {kind}")));
    }
    Ok(())
}

pub fn build_measure(spec: &MeasureSpec, base: &Path, inputs: &mut InputHashes) -> Result<MeasureRef<f64>, CliError> {
    let kind = spec.kind.ok_or_else(|| usage("measure.kind is required"))?;
    let s = spec;
    let riesz_keys =
        s.preset.is_some() || s.coeffs.is_some() || s.freqs.is_some() || s.grid.is_some() || s.normalize.is_some();
    let core = |e: waveops::Error| usage(format!("measure: {e}"));
    let mu = match kind {
        MeasureKind::Uniform => {
            forbid("uniform", "level", s.level.is_some())?;
            forbid("uniform", "seed", s.seed.is_some())?;
            forbid("uniform", "path", s.path.is_some())?;
            forbid("uniform", "riesz parameters", riesz_keys)?;
            make_uniform(s.atoms.ok_or_else(|| usage("measure.atoms is required for uniform"))?).map_err(core)?
        }
        MeasureKind::Cantor => {
            forbid("cantor", "atoms", s.atoms.is_some())?;
            forbid("cantor", "seed", s.seed.is_some())?;
            forbid("cantor", "path", s.path.is_some())?;
            forbid("cantor", "riesz parameters", riesz_keys)?;
            make_cantor(s.level.ok_or_else(|| usage("measure.level is required for cantor"))?).map_err(core)?
        }
        MeasureKind::Random => {
            forbid("random", "level", s.level.is_some())?;
            forbid("random", "path", s.path.is_some())?;
            forbid("random", "riesz parameters", riesz_keys)?;
            let m = s.atoms.ok_or_else(|| usage("measure.atoms is required for random"))?;
            let seed = s.seed.ok_or_else(|| usage("measure.seed is required for random"))?;
            make_random(m, seed).map_err(core)?
        }
        MeasureKind::File => {
            forbid("file", "atoms", s.atoms.is_some())?;
            forbid("file", "level", s.level.is_some())?;
            forbid("file", "seed", s.seed.is_some())?;
            forbid("file", "riesz parameters", riesz_keys)?;
            let path = resolve(
                base,
                s.path
                    .as_ref()
                    .ok_or_else(|| usage("measure.path is required for file"))?,
            );
            let text = fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read measure file {}: {e}", path.display())))?;
            inputs.insert("measure_file".into(), content_hash(text.as_bytes()));
            DiscreteMeasure::from_text(&text).map_err(|e| usage(format!("measure file {}: {e}", path.display())))?
        }
        MeasureKind::Riesz => {
            forbid("riesz", "atoms", s.atoms.is_some())?;
            forbid("riesz", "level", s.level.is_some())?;
            forbid("riesz", "seed", s.seed.is_some())?;
            forbid("riesz", "path", s.path.is_some())?;
            match s.preset.as_deref() {
                Some("demo") => {
                    if s.coeffs.is_some() || s.freqs.is_some() || s.grid.is_some() || s.normalize.is_some() {
                        return Err(usage(
                            "measure.preset = \"demo\" cannot be combined with explicit riesz parameters",
                        ));
                    }
                    make_riesz(&riesz_demo()).map_err(core)?
                }
                Some(other) => return Err(usage(format!("unknown riesz preset {other:?}"))),
                None => {
                    let mut r = RieszProduct::new(
                        s.coeffs
                            .clone()
                            .ok_or_else(|| usage("measure.coeffs is required for riesz"))?,
                        s.freqs
                            .clone()
                            .ok_or_else(|| usage("measure.freqs is required for riesz"))?,
                        s.grid.ok_or_else(|| usage("measure.grid is required for riesz"))?,
                    );
                    if let Some(n) = s.normalize {
                        r.normalize = n;
                    }
                    make_riesz(&r).map_err(core)?
                }
            }
        }
    };
    inputs.insert("measure".into(), mu.id().to_string());
    Ok(Arc::new(mu))
}

/// A commutator kernel with its identification operator and conjugation data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mu: MeasureRef<f64>,
    pub kernel: Kernel<f64>,
    pub x: Operator,
    pub cond: f64,
    /// `γ` supplied by the construction, or found by [`find_gamma`]; `None`
    /// when the requested relation has no solution.
    pub gamma: Option<GridFunction<f64>>,
    pub sign: Option<Sign>,
    pub kind: OperatorKind,
}

fn infeasible(msg: impl Into<String>) -> CliError {
    CliError::Check(msg.into())
}

pub fn build_problem(
    mu: &MeasureRef<f64>,
    spec: &OperatorSpec,
    base: &Path,
    inputs: &mut InputHashes,
) -> Result<Problem, CliError> {
    let default_class = match spec.kind {
        OperatorKind::RankTwo => SymmetryClass::Antisymmetric,
        OperatorKind::Counterexample => SymmetryClass::Symmetric,
        OperatorKind::RandomKernel | OperatorKind::KernelFile => SymmetryClass::None,
    };
    let class = spec.symmetry.unwrap_or(default_class);
    let sign = class.sign();
    if spec.path.is_some() && spec.kind != OperatorKind::KernelFile {
        return Err(usage("operator.path only applies to kind kernel_file"));
    }
    let (kernel, gamma) = match spec.kind {
        OperatorKind::RankTwo => {
            let (k, g) = smooth_rank_two(mu).map_err(|e| infeasible(format!("rank-two construction: {e}")))?;
            (k, Some(g))
        }
        OperatorKind::Counterexample => (counterexample_kernel(mu), Some(GridFunction::one(mu))),
        OperatorKind::RandomKernel => {
            let seed = spec
                .seed
                .ok_or_else(|| usage("operator.seed is required for random_kernel"))?;
            let k = random_kernel(mu, sign, None, &mut rng(seed));
            (k, Some(GridFunction::one(mu)))
        }
        OperatorKind::KernelFile => {
            let path = resolve(
                base,
                spec.path
                    .as_ref()
                    .ok_or_else(|| usage("operator.path is required for kernel_file"))?,
            );
            let text = fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read kernel file {}: {e}", path.display())))?;
            inputs.insert("kernel_file".into(), content_hash(text.as_bytes()));
            let k = Kernel::from_csv(&text, mu).map_err(|e| usage(format!("kernel file {}: {e}", path.display())))?;
            let gamma = match sign {
                Some(s) => find_gamma(&k, s).gamma_function(mu),
                None => Some(GridFunction::one(mu)),
            };
            (k, gamma)
        }
    };
    let Identification { x, cond } =
        solve_identification(&kernel).map_err(|e| infeasible(format!("no identification operator: {e}")))?;
    let x = Identification { x, cond }.operator();
    Ok(Problem {
        mu: mu.clone(),
        x,
        kernel,
        cond,
        gamma,
        sign,
        kind: spec.kind,
    })
}
