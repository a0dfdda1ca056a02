//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use floquet_core::floquet::instability_margin_single;
use floquet_core::moments::log_series;
use floquet_core::oracles::{dense_moments, dense_power, purity_by_quadrature};
use floquet_core::{
    analyze, effective_beta, effective_frequency, evolve_exact, evolve_rk4, fit_growth_rate, floquet_matrix,
    initial_state, linear_entropy, otoc_series, ratio_r, reduce, second_moments, single_oscillator_floquet,
    GaussianPureState, Regime, SymplecticForm, SystemParams, TOL_STAB,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(epsilon: f64, period: f64, lambda: f64, alpha: f64) -> SystemParams {
    SystemParams::new(epsilon, period, lambda, alpha).unwrap()
}

// eps = lambda = 0.1, alpha = 1
fn preset(period: f64) -> SystemParams {
    params(0.1, period, 0.1, 1.0)
}

const REAL_T: f64 = 3.32;
const COMPLEX_T: f64 = 3.14;
const STABLE_T: f64 = 3.5;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn symplecticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let (mut worst_dev, mut worst_det) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let eps = rng.random_range(0.0..=0.5);
        // (0.1, 10]
        let t = 10.0 - rng.random_range(0.0..9.9);
        let lambda = rng.random_range(0.0..=0.5);
        let alpha = rng.random_range(0.5..=2.0);
        let f = floquet_matrix(&params(eps, t, lambda, alpha));
        worst_dev = worst_dev.max(SymplecticForm::deviation(&f));
        worst_det = worst_det.max((f.determinant() - 1.0).abs());
    }
    outcome(
        worst_dev < 1e-11 && worst_det < 1e-11,
        format!("max |F^T J F - J| = {worst_dev:.2e}, max |det F - 1| = {worst_det:.2e} over 1000 draws"),
    )
}

fn decoupled_block() -> Outcome {
    let mut worst = 0.0f64;
    for eps in linspace(0.0, 0.5, 50) {
        for t in linspace(0.1, 10.0, 50) {
            let f = floquet_matrix(&params(eps, t, 0.0, 1.0));
            let single = single_oscillator_floquet(eps, t);
            for (i, fi) in [1, 3].into_iter().enumerate() {
                for (j, fj) in [1, 3].into_iter().enumerate() {
                    worst = worst.max((f[(fi, fj)] - single[(i, j)]).abs());
                }
            }
        }
    }
    outcome(worst < 1e-12, format!("max entry deviation {worst:.2e} on 50x50 grid"))
}

fn single_condition() -> Outcome {
    let (mut compared, mut excluded, mut mismatches) = (0usize, 0usize, 0usize);
    for eps in linspace(0.0, 0.5, 200) {
        for t in linspace(0.1, 10.0, 200) {
            let margin = instability_margin_single(eps, t);
            if margin.abs() < 1e-6 {
                excluded += 1;
                continue;
            }
            compared += 1;
            let unstable = analyze(&params(eps, t, 0.0, 1.0)).unwrap().mu_l > TOL_STAB;
            if unstable != (margin > 0.0) {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in {compared} cells ({excluded} boundary cells excluded)"),
    )
}

fn commutator_growth() -> Outcome {
    let p = preset(REAL_T);
    let data = analyze(&p).unwrap();
    let records = otoc_series(&data.matrix, 200);
    let qq = fit_growth_rate(&log_series(&records, |r| r.c_qq), 50..201).unwrap().slope;
    let pq = fit_growth_rate(&log_series(&records, |r| r.c_pq), 50..201).unwrap().slope;
    let target = 2.0 * data.mu_l;
    let common = 0.5 * (qq + pq);
    let err = (common - target).abs() / target;
    let spread = (qq - pq).abs() / common;
    outcome(
        data.mu_l > 0.0 && err < 0.01 && spread < 0.005,
        format!(
            "mu_L = {:.6}, slopes {qq:.6} / {pq:.6}, rel. error vs 2 mu_L {err:.2e}, slope spread {spread:.2e}",
            data.mu_l
        ),
    )
}

/// Largest interval around `t0` on which the coupled system is unstable.
fn unstable_band(t0: f64) -> (f64, f64) {
    let unstable = |t: f64| analyze(&preset(t)).unwrap().regime.is_unstable();
    assert!(unstable(t0));
    let edge = |step: f64| {
        let mut inside = t0;
        let mut outside = t0;
        while unstable(outside) {
            inside = outside;
            outside += step;
        }
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if unstable(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    (edge(-1e-3), edge(1e-3))
}

fn max_jump(lo: f64, hi: f64, points: usize) -> Option<f64> {
    let mut prev: Option<f64> = None;
    let mut jump = 0.0f64;
    for t in linspace(lo, hi, points) {
        let w = effective_frequency(&floquet_matrix(&preset(t))).ok()?;
        if !(w.is_finite() && w > 0.0) {
            return None;
        }
        if let Some(p) = prev {
            jump = jump.max((w - p).abs());
        }
        prev = Some(w);
    }
    Some(jump)
}

fn equipartition() -> Outcome {
    let f = floquet_matrix(&preset(REAL_T));
    let w2 = effective_frequency(&f).unwrap().powi(2);
    let r200 = ratio_r(&f, 200);
    let saturation = (r200 - w2).abs() / w2;
    let mut ok = saturation < 1e-6;
    let mut detail = format!("|R(200) - w^2|/w^2 = {saturation:.2e}");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for (label, t0) in [("real", REAL_T), ("complex", COMPLEX_T)] {
        let (lo, hi) = unstable_band(t0);
        let margin = 1e-3 * (hi - lo);
        let (lo, hi) = (lo + margin, hi - margin);
        let finite = (0..500).all(|_| {
            let t = rng.random_range(lo..=hi);
            effective_frequency(&floquet_matrix(&preset(t))).is_ok_and(|w| w.is_finite() && w > 0.0)
        });
        // a continuous curve's largest neighbour jump shrinks with the grid step
        let coarse = max_jump(lo, hi, 1000);
        let fine = max_jump(lo, hi, 10000);
        let refines = matches!((coarse, fine), (Some(c), Some(f)) if f <= 0.2 * c);
        ok &= finite && refines;
        detail += &format!(
            "; {label} band [{lo:.4}, {hi:.4}] finite {finite}, max jump {:.2e} -> {:.2e}",
            coarse.unwrap_or(f64::NAN),
            fine.unwrap_or(f64::NAN)
        );
    }
    outcome(ok, detail)
}

fn max_deviation(exact: &[GaussianPureState], rk4: &[GaussianPureState]) -> f64 {
    exact.iter().zip(rk4).map(|(e, r)| e.max_param_diff(r)).fold(0.0, f64::max)
}

fn integrator_cross_check() -> Outcome {
    let points = [
        params(0.1, STABLE_T, 0.1, 1.0),
        params(0.3, 2.0, 0.3, 1.0),
        params(0.1, REAL_T, 0.1, 1.0),
        params(0.1, 7.4, 0.1, 0.7),
        params(0.1, 2.5, 0.2, 1.5),
    ];
    let mut ok = true;
    let mut regimes = Vec::new();
    let mut parts = Vec::new();
    for p in &points {
        let regime = analyze(p).unwrap().regime;
        let start = initial_state(p.alpha);
        let exact = evolve_exact(&start, p, 100).unwrap();
        let fine = evolve_rk4(&start, p, 100, 1000).unwrap();
        let coarse = evolve_rk4(&start, p, 100, 500).unwrap();
        let dev = max_deviation(&exact, &fine);
        let order = (max_deviation(&exact, &coarse) / dev).log2();
        ok &= dev < 1e-6 && (3.7..=4.3).contains(&order);
        regimes.push(regime);
        parts.push(format!("{} {dev:.1e} (order {order:.2})", regime.label()));
    }
    for r in [Regime::Stable, Regime::UnstableReal, Regime::UnstableComplex] {
        ok &= regimes.contains(&r);
    }
    outcome(ok, format!("max deviation at 1000 steps/period: {}", parts.join(", ")))
}

fn purity_oracle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [STABLE_T, REAL_T, COMPLEX_T] {
        let p = preset(t);
        let states = evolve_exact(&initial_state(1.0), &p, 100).unwrap();
        let mut worst = 0.0f64;
        for n in (5..=100).step_by(5) {
            let s = &states[n];
            let dm = reduce(s);
            let quad = 1.0 - purity_by_quadrature(&dm, s.log_norm);
            worst = worst.max((linear_entropy(&dm, s.log_norm) - quad).abs());
        }
        ok &= worst < 1e-6;
        parts.push(format!("{} {worst:.1e}", analyze(&p).unwrap().regime.label()));
    }
    outcome(ok, format!("max |S_lin - quadrature| at n = 5, 10, ..., 100: {}", parts.join(", ")))
}

fn moment_cross_derivation() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [STABLE_T, REAL_T, COMPLEX_T] {
        let p = preset(t);
        let heisenberg = second_moments(&floquet_matrix(&p), 100);
        let states = evolve_exact(&initial_state(1.0), &p, 100).unwrap();
        let worst = heisenberg
            .iter()
            .zip(&states)
            .map(|(h, s)| {
                let q = h.q1_sq.value();
                (q - reduce(s).position_variance()).abs() / q
            })
            .fold(0.0, f64::max);
        ok &= worst < 1e-8;
        parts.push(format!("T={t} {worst:.1e}"));
    }
    outcome(ok, format!("max relative <q1^2> difference, n <= 100: {}", parts.join(", ")))
}

struct ThermalPoint {
    s_lin: f64,
    ratio: f64,
    beta: Option<f64>,
}

fn thermal_series(p: &SystemParams, periods: usize) -> Vec<ThermalPoint> {
    let omega_eff = effective_frequency(&floquet_matrix(p)).ok();
    evolve_exact(&initial_state(p.alpha), p, periods)
        .unwrap()
        .iter()
        .map(|s| {
            let dm = reduce(s);
            ThermalPoint {
                s_lin: linear_entropy(&dm, s.log_norm),
                ratio: dm.eta_over_re_chi(),
                beta: omega_eff.and_then(|w| effective_beta(&dm, w).ok()).map(|f| f.beta),
            }
        })
        .collect()
}

fn thermalization() -> Outcome {
    const PERIODS: usize = 1000;
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [REAL_T, COMPLEX_T] {
        let p = preset(t);
        let series = thermal_series(&p, PERIODS);
        let thermal = |x: &ThermalPoint| {
            x.s_lin >= 1.0 - 1e-3
                && (1.0 - 1e-3..=1.0).contains(&x.ratio)
                && x.beta.is_some_and(|b| b <= 1e-3)
        };
        // first n from which every later step is thermal
        let n_star = series.iter().rposition(|x| !thermal(x)).map_or(0, |i| i + 1);
        ok &= n_star <= PERIODS / 2;
        parts.push(format!("{} N* = {n_star}", analyze(&p).unwrap().regime.label()));
    }
    let stable = thermal_series(&preset(STABLE_T), PERIODS);
    let window: Vec<f64> = stable[500..=1000].iter().map(|x| x.s_lin).collect();
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let variance = window.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / window.len() as f64;
    ok &= variance > 1e-4;
    parts.push(format!("stable S_lin variance on [500, 1000] = {variance:.2e}"));
    outcome(ok, parts.join(", "))
}

fn initial_state_exactness() -> Outcome {
    let mut ok = true;
    let mut worst_s = 0.0f64;
    for t in [STABLE_T, REAL_T, COMPLEX_T] {
        let p = preset(t);
        let f = floquet_matrix(&p);
        let s = evolve_exact(&initial_state(p.alpha), &p, 0).unwrap()[0];
        let dm = reduce(&s);
        let s_lin = linear_entropy(&dm, s.log_norm);
        worst_s = worst_s.max(s_lin.abs());
        let m = second_moments(&f, 0)[0];
        let o = otoc_series(&f, 0)[0];
        ok &= s_lin.abs() < 1e-12
            && m.q1_sq.value() == 0.5
            && m.p1_sq.value() == 0.5
            && m.r == 1.0
            && ratio_r(&f, 0) == 1.0
            && o.c_qq.value() == 0.0
            && o.c_pq.value() == 1.0;
    }
    outcome(ok, format!("|S_lin(0)| <= {worst_s:.1e}; moments, commutators and R exact at n = 0"))
}

fn overflow_robustness() -> Outcome {
    const N: usize = 10_000;
    let data = analyze(&preset(REAL_T)).unwrap();
    let f = data.matrix;
    let moments = second_moments(&f, N);
    let otoc = otoc_series(&f, N);
    let finite = moments.iter().all(|m| {
        [m.q1_sq, m.q2_sq, m.p1_sq, m.p2_sq].iter().all(|v| v.ln().is_finite()) && m.r.is_finite()
    }) && otoc[0].c_qq.value() == 0.0
        && otoc[1..].iter().all(|o| o.c_qq.ln().is_finite() && o.c_pq.ln().is_finite());

    let target = 2.0 * data.mu_l;
    let window = N / 2..N + 1;
    let q1: Vec<(f64, f64)> = moments.iter().map(|m| (m.n as f64, m.q1_sq.ln())).collect();
    let slopes = [
        fit_growth_rate(&q1, window.clone()).unwrap().slope,
        fit_growth_rate(&log_series(&otoc, |o| o.c_qq), window.clone()).unwrap().slope,
        fit_growth_rate(&log_series(&otoc, |o| o.c_pq), window).unwrap().slope,
    ];
    let slope_err = slopes.iter().map(|s| (s - target).abs() / target).fold(0.0, f64::max);

    let mut dense_err = 0.0f64;
    for n in 0..=30 {
        let dense = dense_moments(&f, n);
        let m = &moments[n];
        let got = [m.q1_sq.value(), m.q2_sq.value(), m.p1_sq.value(), m.p2_sq.value()];
        for (g, d) in got.iter().zip(dense) {
            dense_err = dense_err.max((g - d).abs() / d);
        }
        let fn_ = dense_power(&f, n);
        let o = &otoc[n];
        for (g, d) in [(o.c_qq.value(), fn_[(0, 2)].powi(2)), (o.c_pq.value(), fn_[(2, 2)].powi(2))] {
            dense_err = dense_err.max((g - d).abs() / d.max(1.0));
        }
    }
    outcome(
        finite && slope_err < 1e-6 && dense_err < 1e-10,
        format!(
            "ln <q1^2>({N}) = {:.1}, max slope rel. error {slope_err:.1e}, dense mismatch n <= 30 {dense_err:.1e}",
            moments[N].q1_sq.ln()
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_floquet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("{args:?} exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 9] = [
        &["scan", "--eps-points", "21", "--t-points", "40"],
        &["lyapunov", "--t-points", "50"],
        &["--preset", "fig2a", "orbit", "--periods", "5"],
        &["--preset", "fig4", "moments", "--n-max", "100"],
        &["moments", "--sweep", "--t-points", "40"],
        &["--preset", "fig4", "otoc"],
        &["--preset", "fig4", "--format", "jsonl", "otoc", "--synthetic"],
        &["--preset", "fig5", "thermalize", "--periods", "100"],
        &["selftest"],
    ];
    let mut failures = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let first = run_cli(args, &dir.path().join(format!("{i}a")));
        let second = run_cli(args, &dir.path().join(format!("{i}b")));
        match (first, second) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            (Err(e), _) | (_, Err(e)) => failures.push(e),
            _ => failures.push(format!("{args:?} differs between runs")),
        }
    }
    let scan = ["scan", "--eps-points", "31", "--t-points", "97"];
    let threaded: Vec<_> = ["1", "4"]
        .iter()
        .map(|n| {
            let mut args = scan.to_vec();
            args.extend(["--threads", n]);
            run_cli(&args, &dir.path().join(format!("threads{n}")))
        })
        .collect();
    match (&threaded[0], &threaded[1]) {
        (Ok(a), Ok(b)) if a == b => {}
        _ => failures.push("scan output depends on --threads".to_string()),
    }
    let detail = if failures.is_empty() {
        format!("{} subcommand runs byte-identical, scan identical for 1 and 4 threads", runs.len())
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("symplecticity", symplecticity),
        ("decoupled block matches single oscillator", decoupled_block),
        ("single-oscillator instability condition", single_condition),
        ("commutator growth at 2 mu_L", commutator_growth),
        ("equipartition ratio saturation", equipartition),
        ("exact vs RK4 Gaussian evolution", integrator_cross_check),
        ("purity closed form vs quadrature", purity_oracle),
        ("Heisenberg vs Gaussian <q1^2>", moment_cross_derivation),
        ("thermalization endpoint", thermalization),
        ("initial-state exactness", initial_state_exactness),
        ("overflow robustness at n = 10^4", overflow_robustness),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked".to_string()));
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
