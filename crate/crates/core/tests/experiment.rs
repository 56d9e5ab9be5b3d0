use std::sync::Arc;

use num_complex::Complex;
use waveops::hilbert::{GridFunction, MeasureRef};
use waveops::measure::make_cantor;
use waveops::symmetry::{counterexample_kernel, smooth_rank_two, solve_identification};
use waveops::wave::{
    cesaro, cesaro_means, fit_decay, run_experiment, CesaroAccumulator, ConvergenceReport, DiagonalUnitary,
    ExperimentSetup, TestFamily,
};

fn rank_two_setup(level: u32, grid: Vec<u64>) -> ExperimentSetup<f64> {
    let mu: MeasureRef<f64> = Arc::new(make_cantor(level).unwrap());
    let (k, gamma) = smooth_rank_two(&mu).unwrap();
    let x = solve_identification(&k).unwrap().operator();
    let u = DiagonalUnitary::of_measure(&mu);
    let e = GridFunction::one(&mu);
    let ebar = gamma.conj();
    let family = TestFamily::monomial(&u, &e, &ebar, -2, 2).unwrap();
    ExperimentSetup { x, u, family, grid }
}

fn run_with_threads(setup: &ExperimentSetup<f64>, threads: usize) -> ConvergenceReport<f64> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run_experiment(setup).unwrap())
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let setup = rank_two_setup(5, vec![10, 100, 387, 1000]);
    let a = run_with_threads(&setup, 1);
    let b = run_with_threads(&setup, 4);
    for (ta, tb) in a.traces.iter().zip(&b.traces) {
        assert_eq!(ta.to_csv(&a.grid), tb.to_csv(&b.grid));
    }
    assert_eq!(a.summary_json(), b.summary_json());
}

#[test]
fn rank_two_difference_traces_decay() {
    let setup = rank_two_setup(6, vec![16, 32, 64, 128, 256, 512, 1024]);
    let rep = run_experiment(&setup).unwrap();
    assert_eq!(rep.horizon, 1161);
    assert!(rep.beyond_horizon().is_empty());
    assert!(rep.diff_sup(0) / rep.diff_sup(6) >= 10.0);
    // traces with k + l = 0 vanish identically
    for t in rep.traces.iter().filter(|t| t.k + t.l == 0) {
        assert!(t.cesaro_diff.iter().all(|z| z.norm() < 1e-12));
    }
    for (t, f) in rep.traces.iter().zip(&rep.fits) {
        if t.k + t.l != 0 {
            let f = f.as_ref().unwrap();
            assert!(f.exponent < -0.5, "{} {} {:?}", t.k, t.l, f);
        }
    }
}

#[test]
fn counterexample_sum_traces_settle() {
    let mu: MeasureRef<f64> = Arc::new(make_cantor(5).unwrap());
    let x = solve_identification(&counterexample_kernel(&mu)).unwrap().operator();
    let u = DiagonalUnitary::of_measure(&mu);
    let e = GridFunction::one(&mu);
    let family = TestFamily::monomial(&u, &e, &e, -2, 2).unwrap();
    let rep = run_experiment(&ExperimentSetup {
        x,
        u,
        family,
        grid: vec![16, 32, 64, 128, 256, 387],
    })
    .unwrap();
    for i in 0..rep.traces.len() {
        let (osc, scale) = rep.sum_cauchy_tail(i);
        // some pairs vanish identically; their oscillation is rounding noise
        assert!(osc <= 1e-2 * scale || scale < 1e-14, "{i}: {osc} {scale}");
    }
    assert!(rep.diff_sup(0) / rep.diff_sup(5) >= 10.0);
}

#[test]
fn grid_beyond_horizon_is_flagged_and_csv_shaped() {
    let setup = rank_two_setup(3, vec![5, 10, 30, 60]);
    let rep = run_experiment(&setup).unwrap();
    // cyclic gap 1/27 between the last atom and 0: ceil(10 / (2 sin(π/27)))
    assert_eq!(rep.horizon, 44);
    assert_eq!(rep.beyond_horizon(), vec![60]);
    let csv = rep.traces[0].to_csv(&rep.grid);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "N,cesaro_diff_re,cesaro_diff_im,cesaro_sum_re,cesaro_sum_im,raw_re,raw_im"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
    assert_eq!(rep.summary_json()["raw_pairings"], "qualitative");
}

#[test]
fn invalid_grids_are_rejected() {
    for grid in [vec![], vec![0, 4], vec![4, 4], vec![8, 2]] {
        assert!(run_experiment(&rank_two_setup(2, grid)).is_err());
    }
}

#[test]
fn decay_fit_recovers_power_law_and_needs_five_points() {
    let grid: Vec<u64> = (4..12).map(|k| 1 << k).collect();
    let values: Vec<f64> = grid.iter().map(|&n| 3.0 * (n as f64).powf(-0.75)).collect();
    let fit = fit_decay(&grid, &values, 10_000).unwrap();
    assert!((fit.exponent + 0.75).abs() < 1e-12 && (fit.prefactor - 3.0).abs() < 1e-10);
    assert_eq!(fit.points, 8);
    assert!(fit_decay(&grid, &values, 200).is_none());
}

#[test]
fn scalar_cesaro_means() {
    let i = Complex::new(0.0, 1.0);
    let seq: Vec<Complex<f64>> = (0..8).map(|n| i.powi(n)).collect();
    // 1, i, -1, -i: means (1+i)/2 at N = 2, i/3 at N = 3, 0 at N = 4
    assert_eq!(cesaro(&seq, 2), Complex::new(0.5, 0.5));
    assert!((cesaro(&seq, 3) - i / 3.0).norm() < 1e-16);
    assert_eq!(cesaro(&seq, 4), Complex::new(0.0, 0.0));
    let means = cesaro_means(&seq);
    let mut acc = CesaroAccumulator::new();
    for (x, m) in seq.iter().zip(&means) {
        acc.push(*x);
        assert_eq!(acc.mean(), *m);
    }
}
