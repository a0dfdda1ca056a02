//! Command-line definition and run configuration.
//!
//! Values resolve as defaults < preset < config file < flags.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use floquet_core::{Axis, PhasePoint, SystemParams};
use serde::Deserialize;

use crate::error::CliError;
use crate::output::{Cell, Format};
use crate::presets;

#[derive(Debug, Parser)]
#[command(name = "floquet", version, about = "Floquet analysis of a parametrically driven pair of coupled oscillators")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Drive modulation depth, 0 <= eps < 1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Drive period T
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub period: Option<f64>,
    /// Coupling strength
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Frequency ratio of the undriven oscillator
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for `scan`
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Named parameter set (fig2a, fig2b, fig2c, fig4, fig5)
    #[arg(long, global = true)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Lyapunov exponent and regime over an (eps, T) grid
    Scan(ScanArgs),
    /// Lyapunov exponent against T, coupled and single oscillator
    Lyapunov(LyapunovArgs),
    /// Intra-period classical trajectory
    Orbit(OrbitArgs),
    /// Second moments and the ratio <p1^2>/<q1^2>
    Moments(MomentsArgs),
    /// Unequal-time commutators and their growth rate
    Otoc(OtocArgs),
    /// Reduced density matrix diagnostics along the exact evolution
    Thermalize(ThermalizeArgs),
    /// Quick internal consistency checks
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Scan(_) => "scan",
            Command::Lyapunov(_) => "lyapunov",
            Command::Orbit(_) => "orbit",
            Command::Moments(_) => "moments",
            Command::Otoc(_) => "otoc",
            Command::Thermalize(_) => "thermalize",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    /// Epsilon axis, inclusive endpoints
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_points: Option<usize>,
    /// Period axis, inclusive endpoints
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovArgs {
    /// Period axis, inclusive endpoints
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitArgs {
    /// Number of drive periods to trace
    #[arg(long)]
    pub periods: Option<usize>,
    /// Must be even
    #[arg(long)]
    pub samples_per_period: Option<usize>,
    /// Initial phase-space point
    #[arg(long, allow_hyphen_values = true)]
    pub q1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p2: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsArgs {
    /// Last stroboscopic step
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Emit `T,omega_eff` over a period sweep instead of a time series
    #[arg(long)]
    #[serde(default)]
    pub sweep: bool,
    /// Sweep period axis
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocArgs {
    /// Last stroboscopic step, at least 40
    #[arg(long)]
    pub n_max: Option<usize>,
    /// First step of the fit window (default: drop the first quarter)
    #[arg(long)]
    pub window_start: Option<usize>,
    /// Last step of the fit window, inclusive
    #[arg(long)]
    pub window_end: Option<usize>,
    /// Fit a pure exponential instead of the model series
    #[arg(long)]
    #[serde(default)]
    pub synthetic: bool,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalizeArgs {
    /// Number of drive periods to evolve
    #[arg(long)]
    pub periods: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    epsilon: Option<f64>,
    period: Option<f64>,
    lambda: Option<f64>,
    alpha: Option<f64>,
    format: Option<Format>,
    threads: Option<usize>,
    #[serde(default)]
    scan: ScanArgs,
    #[serde(default)]
    lyapunov: LyapunovArgs,
    #[serde(default)]
    orbit: OrbitArgs,
    #[serde(default)]
    moments: MomentsArgs,
    #[serde(default)]
    otoc: OtocArgs,
    #[serde(default)]
    thermalize: ThermalizeArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Settings {
    Scan { epsilon: Axis, period: Axis },
    Lyapunov { period: Axis },
    Orbit { periods: usize, samples_per_period: usize, x0: PhasePoint },
    Moments { n_max: usize, sweep: Option<Axis> },
    Otoc { n_max: usize, window: Option<(usize, usize)>, synthetic: bool },
    Thermalize { periods: usize },
    Selftest,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub preset: Option<String>,
    pub params: SystemParams,
    pub format: Format,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub settings: Settings,
}

pub const OTOC_MIN_STEPS: usize = 40;

fn axis(start: Option<f64>, end: Option<f64>, points: Option<usize>, default: (f64, f64, usize), what: &str) -> Result<Axis, CliError> {
    let (s, e, n) = (start.unwrap_or(default.0), end.unwrap_or(default.1), points.unwrap_or(default.2));
    Axis::new(s, e, n).map_err(|err| CliError::Config(format!("{what}: {err}")))
}

fn period_axis(axis: &Axis, params: &SystemParams) -> Result<(), CliError> {
    if axis.start <= 0.0 {
        return Err(CliError::Config(format!("period range must be positive, starts at {}", axis.start)));
    }
    SystemParams { period: axis.end, ..*params }.validate().map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    pub fn resolve(common: &CommonArgs, command: &Command) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let preset = common.preset.clone().or(file.preset.clone());
        let mut params = SystemParams::default();
        if let Some(name) = &preset {
            let p = presets::lookup(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset '{name}' (known: {})", presets::names()))
            })?;
            params = p.params;
        }
        let layer = |base: &mut f64, file: Option<f64>, flag: Option<f64>| {
            if let Some(v) = flag.or(file) {
                *base = v;
            }
        };
        layer(&mut params.epsilon, file.epsilon, common.epsilon);
        layer(&mut params.period, file.period, common.period);
        layer(&mut params.lambda, file.lambda, common.lambda);
        layer(&mut params.alpha, file.alpha, common.alpha);
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let threads = common.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }

        let settings = match command {
            Command::Scan(a) => {
                let f = &file.scan;
                let epsilon = axis(a.eps_min.or(f.eps_min), a.eps_max.or(f.eps_max), a.eps_points.or(f.eps_points), (0.0, 0.5, 101), "epsilon range")?;
                if epsilon.start < 0.0 || epsilon.end >= 1.0 {
                    return Err(CliError::Config(format!("epsilon range [{}, {}] leaves [0, 1)", epsilon.start, epsilon.end)));
                }
                let period = axis(a.t_min.or(f.t_min), a.t_max.or(f.t_max), a.t_points.or(f.t_points), (0.05, 10.0, 200), "period range")?;
                period_axis(&period, &params)?;
                Settings::Scan { epsilon, period }
            }
            Command::Lyapunov(a) => {
                let f = &file.lyapunov;
                let period = axis(a.t_min.or(f.t_min), a.t_max.or(f.t_max), a.t_points.or(f.t_points), (0.05, 10.0, 400), "period range")?;
                period_axis(&period, &params)?;
                Settings::Lyapunov { period }
            }
            Command::Orbit(a) => {
                let f = &file.orbit;
                let samples_per_period = a.samples_per_period.or(f.samples_per_period).unwrap_or(64);
                if samples_per_period < 2 || samples_per_period % 2 != 0 {
                    return Err(CliError::Config(format!("samples_per_period must be even and >= 2, got {samples_per_period}")));
                }
                let x0 = PhasePoint::new(
                    a.q1.or(f.q1).unwrap_or(1.0),
                    a.q2.or(f.q2).unwrap_or(0.0),
                    a.p1.or(f.p1).unwrap_or(0.0),
                    a.p2.or(f.p2).unwrap_or(0.0),
                );
                if !x0.max_abs().is_finite() {
                    return Err(CliError::Config("initial condition must be finite".into()));
                }
                Settings::Orbit { periods: a.periods.or(f.periods).unwrap_or(50), samples_per_period, x0 }
            }
            Command::Moments(a) => {
                let f = &file.moments;
                let n_max = a.n_max.or(f.n_max).unwrap_or(200);
                if n_max < 1 {
                    return Err(CliError::Config("n_max must be at least 1".into()));
                }
                let sweep = if a.sweep || f.sweep {
                    let period = axis(a.t_min.or(f.t_min), a.t_max.or(f.t_max), a.t_points.or(f.t_points), (0.05, 10.0, 400), "period range")?;
                    period_axis(&period, &params)?;
                    Some(period)
                } else {
                    None
                };
                Settings::Moments { n_max, sweep }
            }
            Command::Otoc(a) => {
                let f = &file.otoc;
                let n_max = a.n_max.or(f.n_max).unwrap_or(200);
                if n_max < OTOC_MIN_STEPS {
                    return Err(CliError::Config(format!("n_max must be at least {OTOC_MIN_STEPS}, got {n_max}")));
                }
                let start = a.window_start.or(f.window_start);
                let end = a.window_end.or(f.window_end);
                let window = match (start, end) {
                    (None, None) => None,
                    (s, e) => {
                        let (s, e) = (s.unwrap_or(n_max / 4), e.unwrap_or(n_max));
                        if s > e || e > n_max {
                            return Err(CliError::Config(format!("fit window [{s}, {e}] outside [0, {n_max}]")));
                        }
                        Some((s, e))
                    }
                };
                Settings::Otoc { n_max, window, synthetic: a.synthetic || f.synthetic }
            }
            Command::Thermalize(a) => {
                let periods = a.periods.or(file.thermalize.periods).unwrap_or(200);
                if periods < 1 {
                    return Err(CliError::Config("periods must be at least 1".into()));
                }
                Settings::Thermalize { periods }
            }
            Command::Selftest => Settings::Selftest,
        };

        Ok(Self {
            command: command.name(),
            preset,
            params,
            format: common.format.or(file.format).unwrap_or(Format::Csv),
            threads,
            out: common.out.clone(),
            settings,
        })
    }

    /// Header lines describing everything that affects the output. The
    /// output path and thread count do not, and are left out.
    pub fn header(&self) -> Vec<(String, Cell)> {
        let mut h: Vec<(String, Cell)> = vec![
            ("command".into(), Cell::text(self.command)),
            ("version".into(), Cell::text(env!("CARGO_PKG_VERSION"))),
            ("preset".into(), Cell::text(self.preset.as_deref().unwrap_or("none"))),
            ("epsilon".into(), Cell::from(self.params.epsilon)),
            ("period".into(), Cell::from(self.params.period)),
            ("lambda".into(), Cell::from(self.params.lambda)),
            ("alpha".into(), Cell::from(self.params.alpha)),
            ("format".into(), Cell::text(self.format.name())),
        ];
        let mut push = |k: &str, v: Cell| h.push((k.to_string(), v));
        let axis_fields = |prefix: &str, a: &Axis| {
            [
                (format!("{prefix}_min"), Cell::from(a.start)),
                (format!("{prefix}_max"), Cell::from(a.end)),
                (format!("{prefix}_points"), Cell::from(a.points)),
            ]
        };
        let flag = |b: bool| Cell::text(if b { "true" } else { "false" });
        match &self.settings {
            Settings::Scan { epsilon, period } => {
                for (k, v) in axis_fields("eps", epsilon).into_iter().chain(axis_fields("t", period)) {
                    push(&k, v);
                }
            }
            Settings::Lyapunov { period } => {
                for (k, v) in axis_fields("t", period) {
                    push(&k, v);
                }
            }
            Settings::Orbit { periods, samples_per_period, x0 } => {
                push("periods", Cell::from(*periods));
                push("samples_per_period", Cell::from(*samples_per_period));
                push("q1", Cell::from(x0.q1));
                push("q2", Cell::from(x0.q2));
                push("p1", Cell::from(x0.p1));
                push("p2", Cell::from(x0.p2));
            }
            Settings::Moments { n_max, sweep } => {
                push("n_max", Cell::from(*n_max));
                push("sweep", flag(sweep.is_some()));
                if let Some(a) = sweep {
                    for (k, v) in axis_fields("t", a) {
                        push(&k, v);
                    }
                }
            }
            Settings::Otoc { n_max, window, synthetic } => {
                push("n_max", Cell::from(*n_max));
                match window {
                    Some((s, e)) => {
                        push("window_start", Cell::from(*s));
                        push("window_end", Cell::from(*e));
                    }
                    None => push("window", Cell::text("default")),
                }
                push("synthetic", flag(*synthetic));
            }
            Settings::Thermalize { periods } => push("periods", Cell::from(*periods)),
            Settings::Selftest => {}
        }
        h
    }
}
