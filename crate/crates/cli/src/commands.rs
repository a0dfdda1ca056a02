//! One function per subcommand, each producing a [`Table`].

use floquet_core::gaussian::log_purity;
use floquet_core::moments::{default_window, log_series, ratio_ripple};
use floquet_core::{
    analyze, dense_orbit, effective_beta, effective_frequency, evolve_exact, fit_growth_rate,
    floquet_matrix, initial_state, linear_entropy, otoc_series, reduce, second_moments,
    single_oscillator_floquet, single_oscillator_mu_l, stability_scan, Axis, FloquetError,
    Regime, SystemParams, SymplecticForm, TOL_STAB,
};

use crate::config::{RunConfig, Settings};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Thresholds for the saturation step reported by `thermalize`.
pub const SATURATION_TOL: f64 = 1e-3;

/// Rate of the series replayed by `otoc --synthetic`.
pub const SYNTHETIC_RATE: f64 = 0.25;

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.params;
    match &cfg.settings {
        Settings::Scan { epsilon, period } => scan(&p, epsilon, period, cfg.threads),
        Settings::Lyapunov { period } => lyapunov(&p, period),
        Settings::Orbit { periods, samples_per_period, x0 } => {
            let orbit = dense_orbit(&p, *x0, *periods, *samples_per_period)?;
            let mut t = Table::new(&["t", "q1", "q2", "p1", "p2"]);
            for (time, x) in &orbit.samples {
                t.push(vec![(*time).into(), x.q1.into(), x.q2.into(), x.p1.into(), x.p2.into()]);
            }
            t.footer("regime", analyze(&p)?.regime.label());
            t.footer("truncated_at", orbit.truncated_at.map_or(Cell::text("none"), Cell::from));
            Ok(t)
        }
        Settings::Moments { sweep: Some(axis), .. } => omega_sweep(&p, axis),
        Settings::Moments { n_max, sweep: None } => moments(&p, *n_max),
        Settings::Otoc { n_max, window, synthetic } => otoc(&p, *n_max, *window, *synthetic),
        Settings::Thermalize { periods } => thermalize(&p, *periods),
        Settings::Selftest => selftest(),
    }
}

fn zeroed(mu_l: f64) -> f64 {
    if mu_l <= TOL_STAB {
        0.0
    } else {
        mu_l
    }
}

fn scan(p: &SystemParams, epsilon: &Axis, period: &Axis, threads: Option<usize>) -> Result<Table, CliError> {
    let records = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(|| stability_scan(epsilon, period, p.lambda, p.alpha))?,
        None => stability_scan(epsilon, period, p.lambda, p.alpha)?,
    };
    let mut t = Table::new(&["epsilon", "T", "mu_L", "regime"]);
    for r in records {
        t.push(vec![r.epsilon.into(), r.period.into(), r.mu_l.into(), r.regime.label().into()]);
    }
    Ok(t)
}

fn lyapunov(p: &SystemParams, period: &Axis) -> Result<Table, CliError> {
    let mut t = Table::new(&["T", "mu_L_coupled", "mu_L_single"]);
    for period in period.values() {
        let coupled = analyze(&SystemParams { period, ..*p })?.mu_l;
        let single = single_oscillator_mu_l(p.epsilon, period);
        t.push(vec![period.into(), zeroed(coupled).into(), zeroed(single).into()]);
    }
    Ok(t)
}

fn moments(p: &SystemParams, n_max: usize) -> Result<Table, CliError> {
    let f = floquet_matrix(p);
    let data = analyze(p)?;
    let mut t = Table::new(&["n", "q1_sq_log", "p1_sq_log", "R"]);
    let records = second_moments(&f, n_max);
    for r in &records {
        t.push(vec![r.n.into(), r.q1_sq.ln().into(), r.p1_sq.ln().into(), r.r.into()]);
    }
    t.footer("regime", data.regime.label());
    t.footer("mu_L", zeroed(data.mu_l));
    if data.regime.is_unstable() {
        match effective_frequency(&f) {
            Ok(w) => t.footer("omega_eff_sq", w * w),
            Err(FloquetError::DegenerateEigenvector { .. }) => t.footer("omega_eff_sq", Cell::text("degenerate")),
            Err(e) => return Err(e.into()),
        }
        // peak-to-peak oscillation of R around its saturated value
        t.footer("R_ripple", ratio_ripple(&records[default_window(records.len())]));
    }
    Ok(t)
}

fn omega_sweep(p: &SystemParams, axis: &Axis) -> Result<Table, CliError> {
    let mut t = Table::new(&["T", "omega_eff"]);
    for period in axis.values() {
        let f = floquet_matrix(&SystemParams { period, ..*p });
        let w = match effective_frequency(&f) {
            Ok(w) => Some(w),
            Err(FloquetError::NotUnstable { .. } | FloquetError::DegenerateEigenvector { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        t.push(vec![period.into(), Cell::opt(w)]);
    }
    Ok(t)
}

fn otoc(p: &SystemParams, n_max: usize, window: Option<(usize, usize)>, synthetic: bool) -> Result<Table, CliError> {
    let range = match window {
        Some((s, e)) => s..e + 1,
        None => default_window(n_max + 1),
    };
    let mut t = Table::new(&["n", "log_c_qq", "log_c_pq"]);

    if synthetic {
        let series: Vec<(f64, f64)> = (0..=n_max).map(|n| (n as f64, SYNTHETIC_RATE * n as f64)).collect();
        for (n, y) in &series {
            t.push(vec![(*n as usize).into(), (*y).into(), (*y).into()]);
        }
        let fit = fit_growth_rate(&series, range)?;
        t.footer("synthetic_rate", SYNTHETIC_RATE);
        t.footer("slope_fit", fit.slope);
        t.footer("residual_rms", fit.residual_rms);
        t.footer("relative_error", (fit.slope - SYNTHETIC_RATE).abs() / SYNTHETIC_RATE);
        return Ok(t);
    }

    let f = floquet_matrix(p);
    let data = analyze(p)?;
    let records = otoc_series(&f, n_max);
    for r in &records {
        t.push(vec![r.n.into(), r.c_qq.ln().into(), r.c_pq.ln().into()]);
    }
    let fit_qq = fit_growth_rate(&log_series(&records, |r| r.c_qq), range.clone())?;
    let fit_pq = fit_growth_rate(&log_series(&records, |r| r.c_pq), range.clone())?;
    let slope = 0.5 * (fit_qq.slope + fit_pq.slope);
    let two_mu_l = 2.0 * zeroed(data.mu_l);
    t.footer("window_start", range.start);
    t.footer("window_end", range.end - 1);
    t.footer("slope_fit_qq", fit_qq.slope);
    t.footer("slope_fit_pq", fit_pq.slope);
    t.footer("slope_fit", slope);
    t.footer("residual_rms", fit_qq.residual_rms.max(fit_pq.residual_rms));
    t.footer("two_mu_L", two_mu_l);
    t.footer("regime", data.regime.label());
    if data.regime.is_unstable() {
        t.footer("relative_error", (slope - two_mu_l).abs() / two_mu_l);
        t.footer("no_exponential_growth", "false");
    } else {
        t.footer("relative_error", Cell::Empty);
        t.footer("no_exponential_growth", "true");
    }
    Ok(t)
}

/// Row-level diagnostics of the thermalization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRow {
    pub eta_over_re_chi: f64,
    pub s_lin: f64,
    pub beta: Option<f64>,
    pub residual: f64,
}

pub fn thermal_rows(p: &SystemParams, periods: usize) -> Result<(Vec<ThermalRow>, Option<f64>), CliError> {
    let f = floquet_matrix(p);
    let omega_eff = if analyze(p)?.regime.is_unstable() { effective_frequency(&f).ok() } else { None };
    let states = evolve_exact(&initial_state(p.alpha), p, periods)?;
    let mut rows = Vec::with_capacity(states.len());
    for s in &states {
        let dm = reduce(s);
        let beta = match omega_eff {
            Some(w) => match effective_beta(&dm, w) {
                Ok(fit) => Some(fit.beta),
                Err(FloquetError::NotThermalForm { .. } | FloquetError::Undefined) => None,
                Err(e) => return Err(e.into()),
            },
            None => None,
        };
        rows.push(ThermalRow {
            eta_over_re_chi: dm.eta_over_re_chi(),
            s_lin: linear_entropy(&dm, s.log_norm),
            beta,
            residual: if dm.eta == 0.0 { 0.0 } else { dm.thermal_residual() },
        });
    }
    Ok((rows, omega_eff))
}

/// First step from which every later row is saturated.
pub fn saturation_step(rows: &[ThermalRow]) -> Option<usize> {
    let ok = |r: &ThermalRow| {
        r.s_lin >= 1.0 - SATURATION_TOL
            && r.eta_over_re_chi >= 1.0 - SATURATION_TOL
            && r.beta.is_some_and(|b| b <= SATURATION_TOL)
    };
    let tail = rows.iter().rev().take_while(|r| ok(r)).count();
    (tail > 0).then(|| rows.len() - tail)
}

fn thermalize(p: &SystemParams, periods: usize) -> Result<Table, CliError> {
    let (rows, omega_eff) = thermal_rows(p, periods)?;
    let mut t = Table::new(&["n", "eta_over_rechi", "s_lin", "beta_hat", "thermal_residual"]);
    for (n, r) in rows.iter().enumerate() {
        t.push(vec![n.into(), r.eta_over_re_chi.into(), r.s_lin.into(), Cell::opt(r.beta), r.residual.into()]);
    }
    let last = rows.last().expect("at least the initial state");
    t.footer("regime", analyze(p)?.regime.label());
    t.footer("omega_eff", Cell::opt(omega_eff));
    t.footer("final_s_lin", last.s_lin);
    t.footer("final_eta_over_rechi", last.eta_over_re_chi);
    t.footer("saturation_step", saturation_step(&rows).map_or(Cell::text("none"), Cell::from));
    Ok(t)
}

fn check(t: &mut Table, name: &str, pass: bool, detail: String) -> bool {
    t.push(vec![name.into(), (if pass { "PASS" } else { "FAIL" }).into(), Cell::Text(detail)]);
    pass
}

fn selftest() -> Result<Table, CliError> {
    let mut t = Table::new(&["check", "status", "detail"]);
    let mut failures = 0usize;

    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let p = SystemParams::new(0.025 * i as f64, 0.1 + 0.5 * j as f64, 0.3, 0.5 + 0.075 * j as f64)?;
            let f = floquet_matrix(&p);
            worst = worst.max(SymplecticForm::deviation(&f)).max((f.determinant() - 1.0).abs());
        }
    }
    failures += !check(&mut t, "symplectic", worst < 1e-11, format!("max deviation {worst:.3e}")) as usize;

    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let (eps, period) = (0.05 * i as f64, 0.5 + j as f64);
            let f = floquet_matrix(&SystemParams::new(eps, period, 0.0, 1.0)?);
            let block = f.select_rows(&[1, 3]).select_columns(&[1, 3]);
            worst = worst.max((block - single_oscillator_floquet(eps, period)).amax());
        }
    }
    failures += !check(&mut t, "decoupled_block", worst < 1e-12, format!("max deviation {worst:.3e}")) as usize;

    let fig4 = SystemParams::new(0.1, 3.32, 0.1, 1.0)?;
    let f = floquet_matrix(&fig4);
    let data = analyze(&fig4)?;
    let records = otoc_series(&f, 200);
    let fit = fit_growth_rate(&log_series(&records, |r| r.c_pq), 50..201)?;
    let rel = (fit.slope - 2.0 * data.mu_l).abs() / (2.0 * data.mu_l);
    failures += !check(&mut t, "commutator_growth", data.mu_l > 0.0 && rel < 0.01, format!("relative error {rel:.3e}")) as usize;

    let w = effective_frequency(&f)?;
    let r = second_moments(&f, 200)[200].r;
    let rel = (r - w * w).abs() / (w * w);
    failures += !check(&mut t, "equipartition_ratio", rel < 1e-6, format!("relative deviation {rel:.3e}")) as usize;

    let (rows, _) = thermal_rows(&fig4, 300)?;
    let last = rows.last().unwrap();
    let ok = last.s_lin >= 1.0 - SATURATION_TOL && last.eta_over_re_chi >= 1.0 - SATURATION_TOL;
    failures += !check(&mut t, "thermalization", ok, format!("final s_lin {:.12}", last.s_lin)) as usize;

    let s0 = initial_state(1.0);
    let dm = reduce(&s0);
    let m0 = &second_moments(&f, 0)[0];
    let ok = linear_entropy(&dm, s0.log_norm).abs() < 1e-12
        && log_purity(&dm, s0.log_norm).abs() < 1e-12
        && m0.q1_sq.value() == 0.5
        && m0.p1_sq.value() == 0.5
        && m0.r == 1.0;
    failures += !check(&mut t, "initial_state", ok, "vacuum product state".into()) as usize;

    let regime_ok = analyze(&SystemParams::new(0.1, 3.5, 0.1, 1.0)?)?.regime == Regime::Stable;
    failures += !check(&mut t, "stable_point", regime_ok, "eps 0.1, T 3.5".into()) as usize;

    t.footer("failures", failures);
    Ok(t)
}
