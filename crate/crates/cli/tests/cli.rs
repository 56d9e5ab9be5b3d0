use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::Value;
use tempfile::TempDir;
use waveops::content_hash;
use waveops::measure::make_cantor;
use waveops::symmetry::smooth_rank_two;

fn waveops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveops"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const RANK_TWO: &str = r#"
n_grid = [16, 32, 64, 128, 256]

[measure]
kind = "cantor"
level = 4

[operator]
kind = "rank_two"
symmetry = "antisymmetric"

[vectors]
family = "monomial"
k_range = [-2, 2]
"#;

#[test]
fn builtin_examples_pass() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r");
    let o = waveops(&["verify", "--builtin", "paper-examples", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn verify_spec_reports_every_check() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "s.toml", RANK_TWO);
    let out = dir.path().join("r");
    let o = waveops(&["verify", "--spec", &spec, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = read_json(&out.join("verify_report.json"));
    let names: Vec<String> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_owned())
        .collect();
    for want in [
        "telescoping",
        "pairing identity (antisymmetric)",
        "eta aggregate cancellation",
        "proposition forward",
    ] {
        assert!(names.iter().any(|n| n == want), "{names:?}");
    }
    for c in report["checks"].as_array().unwrap() {
        assert!(c["residual"].as_f64().unwrap() <= c["bound"].as_f64().unwrap());
    }
    assert_eq!(
        report["inputs"]["spec"],
        content_hash(fs::read(&spec).unwrap().as_slice())
    );
}

#[test]
fn wrong_sign_names_the_precondition() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "n_grid = [8]\n[measure]\nkind = \"uniform\"\natoms = 12\n[operator]\nkind = \"counterexample\"\nsymmetry = \"antisymmetric\"\n",
    );
    let o = waveops(&["verify", "--spec", &spec]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("C K* C = -K"), "{}", stdout(&o));
}

#[test]
fn tol_flag_tightens_checks() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "s.toml", RANK_TWO);
    assert_eq!(code(&waveops(&["verify", "--spec", &spec, "--tol", "1e-30"])), 1);
    assert_eq!(code(&waveops(&["verify", "--spec", &spec, "--tol", "-1"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let empty = write_spec(
        dir.path(),
        "e.toml",
        "n_grid = []\n[measure]\nkind = \"uniform\"\natoms = 4\n[operator]\nkind = \"counterexample\"\n",
    );
    assert_eq!(code(&waveops(&["verify", "--spec", &empty])), 2);

    let typo = write_spec(
        dir.path(),
        "t.toml",
        "n_grid = [4]\n[measure]\nkind = \"uniform\"\natom = 4\n",
    );
    let o = waveops(&["verify", "--spec", &typo]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("atom"), "{}", stderr(&o));

    let unsorted = write_spec(dir.path(), "u.toml", &RANK_TWO.replace("[16, 32,", "[32, 16,"));
    assert_eq!(code(&waveops(&["converge", "--spec", &unsorted, "--out", "x"])), 2);

    let no_seed = write_spec(
        dir.path(),
        "n.toml",
        "n_grid = [4]\n[measure]\nkind = \"uniform\"\natoms = 4\n[operator]\nkind = \"random_kernel\"\nsymmetry = \"antisymmetric\"\n",
    );
    let o = waveops(&["verify", "--spec", &no_seed]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("seed"));

    assert_eq!(code(&waveops(&["verify"])), 2);
    assert_eq!(code(&waveops(&["frobnicate"])), 2);
    assert_eq!(code(&waveops(&["verify", "--builtin", "nope"])), 2);
    assert_eq!(code(&waveops(&["verify", "--spec", "/nonexistent/spec.toml"])), 2);
}

#[test]
fn missing_measure_file_names_the_path() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "n_grid = [4]\noutput_dir = \"o\"\n[measure]\nkind = \"file\"\npath = \"absent.txt\"\n[operator]\nkind = \"counterexample\"\n",
    );
    let o = waveops(&["converge", "--spec", &spec]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("absent.txt"), "{}", stderr(&o));
}

#[test]
fn converge_is_deterministic_and_hashes_inputs() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "s.toml", RANK_TWO);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = waveops(&["converge", "--spec", &spec, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let manifest = read_json(&a.join("manifest.json"));
    let traces = manifest["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 25);
    for name in traces.iter().map(|t| t.as_str().unwrap()).chain(["manifest.json"]) {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    assert_eq!(
        manifest["inputs"]["spec"],
        content_hash(fs::read(&spec).unwrap().as_slice())
    );
    assert_eq!(manifest["inputs"]["measure"], manifest["measure_hash"]);
    assert_eq!(manifest["spec"]["measure"]["level"], 4);
    assert!(manifest["spec"].get("output_dir").is_none());
    let csv = fs::read_to_string(a.join("trace_k1_l-1.csv")).unwrap();
    assert!(csv.starts_with("N,cesaro_diff_re,cesaro_diff_im,cesaro_sum_re,cesaro_sum_im,raw_re,raw_im\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn converge_from_files_hashes_them() {
    let dir = TempDir::new().unwrap();
    let mu = Arc::new(make_cantor::<f64>(3).unwrap());
    let (k, _) = smooth_rank_two(&mu).unwrap();
    fs::write(dir.path().join("mu.txt"), mu.to_text()).unwrap();
    fs::write(dir.path().join("k.csv"), k.to_csv()).unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "n_grid = [8, 16, 32]\noutput_dir = \"out\"\n\
         measure.kind = \"file\"\nmeasure.path = \"mu.txt\"\n\
         operator.kind = \"kernel_file\"\noperator.path = \"k.csv\"\noperator.symmetry = \"antisymmetric\"\n\
         vectors.family = \"monomial\"\nvectors.k_range = [0, 1]\n",
    );
    let o = waveops(&["converge", "--spec", &spec]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(
        manifest["inputs"]["measure_file"],
        content_hash(mu.to_text().as_bytes())
    );
    assert_eq!(manifest["inputs"]["kernel_file"], content_hash(k.to_csv().as_bytes()));
    assert_eq!(manifest["measure_hash"], mu.id());
}

#[test]
fn infeasible_kernel_file_exits_one() {
    let dir = TempDir::new().unwrap();
    let mu = Arc::new(make_cantor::<f64>(2).unwrap());
    fs::write(dir.path().join("mu.txt"), mu.to_text()).unwrap();
    let k = waveops::symmetry::counterexample_kernel(&mu);
    fs::write(dir.path().join("k.csv"), k.to_csv()).unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "n_grid = [8]\n[measure]\nkind = \"file\"\npath = \"mu.txt\"\n\
         [operator]\nkind = \"kernel_file\"\npath = \"k.csv\"\nsymmetry = \"antisymmetric\"\n",
    );
    let o = waveops(&[
        "converge",
        "--spec",
        &spec,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("infeasible"));
    let o = waveops(&["verify", "--spec", &spec]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness"), "{}", stdout(&o));
}

#[test]
fn seed_flag_changes_random_runs() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "n_grid = [4, 8]\n[measure]\nkind = \"random\"\natoms = 6\nseed = 1\n\
         [operator]\nkind = \"random_kernel\"\nsymmetry = \"symmetric\"\nseed = 2\n",
    );
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let o = waveops(&[
            "converge",
            "--spec",
            &spec,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        read_json(&out.join("manifest.json"))
    };
    let a = run("5", "a");
    let b = run("5", "b");
    let c = run("6", "c");
    assert_eq!(a, b);
    assert_ne!(a["measure_hash"], c["measure_hash"]);
    assert_eq!(a["spec"]["operator"]["seed"], 5);
}

#[test]
fn fourier_uniform_is_zero_off_zero() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f");
    let o = waveops(&[
        "fourier",
        "--builtin",
        "uniform8",
        "--n-max",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("profile.csv")).unwrap();
    let abs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(abs.len(), 8);
    assert_eq!(abs[0], 1.0);
    assert!(abs[1..].iter().all(|&a| a == 0.0));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["inputs"]["measure"], manifest["measure_hash"]);
}

#[test]
fn fourier_cantor_wiener_trends_to_atomic_energy() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f");
    let o = waveops(&[
        "fourier",
        "--builtin",
        "cantor8",
        "--n-max",
        "16384",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("wiener.csv")).unwrap();
    let rows: Vec<(u64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    let target = 2f64.powi(-8);
    let first = (rows[0].1 - target).abs();
    let last = (rows.last().unwrap().1 - target).abs();
    assert_eq!(rows.last().unwrap().0, 16384);
    assert!(last < first / 20.0, "{first} {last}");
    // the abs column does not decay
    let prof = fs::read_to_string(out.join("profile.csv")).unwrap();
    let abs: Vec<f64> = prof
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(abs[abs.len() / 2..].iter().cloned().fold(0.0, f64::max) > 0.1);
}

#[test]
fn fourier_riesz_demo_decays_by_blocks() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f");
    // The 192-point grid aliases frequency 192 back to 0, and the product's
    // spectrum ends at 1 + 4 + 16 + 64 = 85, so look below the alias range.
    let o = waveops(&[
        "fourier",
        "--builtin",
        "riesz-demo",
        "--n-max",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let prof = fs::read_to_string(out.join("profile.csv")).unwrap();
    let abs: Vec<f64> = prof
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    let block = |lo: usize, hi: usize| abs[lo..hi].iter().cloned().fold(0.0, f64::max);
    let maxima: Vec<f64> = (0..4)
        .map(|j| block(4usize.pow(j), 4usize.pow(j + 1).min(86)))
        .collect();
    assert!(maxima.windows(2).all(|w| w[1] < w[0]), "{maxima:?}");
    assert!(
        (maxima[0] - 0.25).abs() < 1e-12 && (maxima[3] - 0.1).abs() < 1e-12,
        "{maxima:?}"
    );
    assert!(block(86, 101) < 1e-12);
}

#[test]
fn fourier_spec_requires_output() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.toml",
        "[measure]\nkind = \"cantor\"\nlevel = 3\n[fourier]\nn_max = 10\n",
    );
    assert_eq!(code(&waveops(&["fourier", "--spec", &spec])), 2);
    let out = dir.path().join("o");
    assert_eq!(
        code(&waveops(&["fourier", "--spec", &spec, "--out", out.to_str().unwrap()])),
        0
    );
    assert_eq!(fs::read_to_string(out.join("profile.csv")).unwrap().lines().count(), 12);
}
