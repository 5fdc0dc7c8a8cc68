//! Command-line front end. Every subcommand writes CSV (or `key=value`
//! lines for `derive`) to `--out`, or to stdout when no path is given.
//!
//! Exit codes: 0 success, 2 invalid input, 3 truncation leak, 1 anything else.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::{heat, solve_trajectory, InitialData};
use crate::csvio::{format_number, Table, DEFAULT_PRECISION};
use crate::error::{DhoError, Result};
use crate::grid::GridSpec;
use crate::params::{derive, derive_quantum, PhysParams};
use crate::spectrum::{energy_eigenvalue, overlap, Eigenbasis, MAX_OVERLAP_LEVEL};
use crate::transitions::{
    closed_form, contour_extract_all, contour_points, integrate, integrate_auto, AmplitudeVector, CONTOUR_RADIUS,
    DEFAULT_TOL,
};
use crate::wavefunction::{assemble, default_grid, parallel_enabled};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

/// Default time axis of `fig2` and `fig3`.
pub const FIG_T_MAX: f64 = 30.0;
pub const FIG_SAMPLES: usize = 3000;
/// Snapshot times of `fig1`.
pub const FIG1_TIMES: [f64; 2] = [0.0, 250.0];
pub const FIG1_POINTS: usize = 2001;

#[derive(Parser, Debug)]
#[command(
    name = "dho",
    version,
    about = "Damped harmonic oscillator: spectra, transition amplitudes and figure data"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Mass
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Damping constant
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Spring constant
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    /// Time step; overrides the sample count
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Highest reported level
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<usize>,
    /// Initial level
    #[arg(long, global = true)]
    pub l: Option<usize>,
    #[arg(long = "case", global = true, value_enum)]
    pub case: Option<Case>,
    /// Digits after the decimal point
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    /// Output file (directory for fig1, fig2, fig3)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Plain key=value file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derived constants and regime tags
    Derive,
    /// |phi_n|^2 for n = 0, 1, 2 at t = 0 and t = 250
    Fig1 {
        #[arg(long, default_value_t = FIG1_POINTS)]
        points: usize,
    },
    /// |c_{n,0}|^2 for n = 0, 2, 4, 6
    Fig2 {
        /// Add columns from the Runge-Kutta route
        #[arg(long)]
        ode: bool,
    },
    /// |c_{n,2}|^2 for n = 0, 2, 4, 6
    Fig3 {
        #[arg(long)]
        ode: bool,
    },
    /// Classical trajectory and energy ledger
    Classical {
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        /// rho * sigma
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta0: f64,
    },
    /// Energy levels, eigenfunctions and overlaps
    Spectrum {
        #[command(subcommand)]
        what: SpectrumCommand,
    },
    /// Transition amplitudes c_{n,l}(t)
    Transitions {
        #[arg(value_enum)]
        route: Route,
        /// Fixed truncation for the ode route; raised automatically if absent
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// psi(X, t) assembled from Runge-Kutta amplitudes
    Wavefunction {
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = crate::wavefunction::GRID_POINTS)]
        points: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SpectrumCommand {
    Eigenvalues {
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    Eigenfunctions {
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    Overlaps {
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Closed,
    Ode,
    Contour,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    A,
    B,
    C,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::A, Case::B, Case::C];

    /// `gamma` at `m = omega = hbar = 1`.
    pub fn gamma(self) -> f64 {
        match self {
            Case::A => 1.0,
            Case::B => 5f64.sqrt() - 1.0,
            Case::C => 1.5,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Case::A => 'a',
            Case::B => 'b',
            Case::C => 'c',
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(Case::A),
            "b" => Ok(Case::B),
            "c" => Ok(Case::C),
            other => Err(DhoError::InvalidParams(format!(
                "case must be a, b or c, got {other:?}"
            ))),
        }
    }
}

/// Flags merged over the config file, with validated physical parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: PhysParams,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub n_max: Option<usize>,
    pub l: Option<usize>,
    pub case: Option<Case>,
    pub precision: usize,
    pub out: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 10] = [
    "m",
    "gamma",
    "k",
    "hbar",
    "t-max",
    "dt",
    "n-max",
    "l",
    "case",
    "precision",
];

/// Reads `key=value` lines; `#` starts a comment, `_` and `-` are interchangeable in keys.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| DhoError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| DhoError::InvalidParams(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(DhoError::InvalidParams(format!(
                "config line {}: unknown key {key:?}",
                i + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| DhoError::InvalidParams(format!("config value for {key} is not valid: {v:?}")))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, defaults: PhysParams) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        fn pick<T: std::str::FromStr + Copy>(
            flag: Option<T>,
            file: &BTreeMap<String, String>,
            key: &str,
        ) -> Result<Option<T>> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.get(key).map(|v| parse_value(key, v)).transpose(),
            }
        }
        let case = match args.case {
            Some(c) => Some(c),
            None => file.get("case").map(|v| Case::parse(v)).transpose()?,
        };
        let m = pick(args.m, &file, "m")?.unwrap_or(defaults.m);
        let gamma = pick(args.gamma, &file, "gamma")?
            .or(case.map(Case::gamma))
            .unwrap_or(defaults.gamma);
        let k = pick(args.k, &file, "k")?.unwrap_or(defaults.k);
        let hbar = pick(args.hbar, &file, "hbar")?.unwrap_or(defaults.hbar);
        let precision = pick(args.precision, &file, "precision")?.unwrap_or(DEFAULT_PRECISION);
        if precision > 17 {
            return Err(DhoError::InvalidParams(format!(
                "precision must be <= 17, got {precision}"
            )));
        }
        Ok(RunConfig {
            params: PhysParams::new(m, gamma, k, hbar)?,
            t_max: pick(args.t_max, &file, "t-max")?,
            dt: pick(args.dt, &file, "dt")?,
            n_max: pick(args.n_max, &file, "n-max")?,
            l: pick(args.l, &file, "l")?,
            case,
            precision,
            out: args.out.clone(),
        })
    }

    /// Time grid `[0, t_max]` with `dt` spacing, or `samples` points.
    pub fn time_grid(&self, default_t_max: f64, samples: usize) -> Result<GridSpec> {
        let t_max = self.t_max.unwrap_or(default_t_max);
        match self.dt {
            Some(dt) => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(DhoError::InvalidGrid(format!("dt must be > 0, got {dt}")));
                }
                let count = (t_max / dt).round() as usize + 1;
                GridSpec::temporal(0.0, t_max, count)
            }
            None => GridSpec::temporal(0.0, t_max, samples),
        }
    }
}

fn unit_params(gamma: f64) -> PhysParams {
    PhysParams {
        m: 1.0,
        gamma,
        k: 1.0,
        hbar: 1.0,
    }
}

pub fn exit_code(e: &DhoError) -> i32 {
    match e {
        DhoError::InvalidParams(_)
        | DhoError::Overdamped { .. }
        | DhoError::ConstraintInfeasible(_)
        | DhoError::InvalidGrid(_)
        | DhoError::Unsupported(_)
        | DhoError::SeriesDivergence { .. }
        | DhoError::QuadratureUnderResolved { .. } => EXIT_INVALID,
        DhoError::TruncationLeak { .. } => EXIT_TRUNCATION,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Derive => cmd_derive(&RunConfig::resolve(&cli.common, unit_params(1.0))?),
        Command::Fig1 { points } => cmd_fig1(
            &RunConfig::resolve(
                &cli.common,
                PhysParams {
                    m: 10.0,
                    gamma: 0.1,
                    k: 10.0,
                    hbar: 1.0,
                },
            )?,
            *points,
        ),
        Command::Fig2 { ode } => cmd_fig23(
            &RunConfig::resolve(&cli.common, unit_params(1.0))?,
            0,
            *ode,
            cli.common.gamma.is_some(),
        ),
        Command::Fig3 { ode } => cmd_fig23(
            &RunConfig::resolve(&cli.common, unit_params(1.0))?,
            2,
            *ode,
            cli.common.gamma.is_some(),
        ),
        Command::Classical { x0, phi, n0, theta0 } => {
            let cfg = RunConfig::resolve(&cli.common, unit_params(0.1))?;
            cmd_classical(&cfg, &InitialData::with_theta0(*x0, *phi, *n0, *theta0))
        }
        Command::Spectrum { what } => cmd_spectrum(&RunConfig::resolve(&cli.common, unit_params(0.1))?, what),
        Command::Transitions { route, truncation, tol } => cmd_transitions(
            &RunConfig::resolve(&cli.common, unit_params(1.0))?,
            *route,
            *truncation,
            *tol,
        ),
        Command::Wavefunction { t, points } => {
            cmd_wavefunction(&RunConfig::resolve(&cli.common, unit_params(1.0))?, *t, *points)
        }
    }
}

fn emit(cfg: &RunConfig, table: &Table) -> Result<()> {
    match &cfg.out {
        Some(path) => table.write_file(path, cfg.precision),
        None => {
            let stdout = std::io::stdout();
            table.write_to(stdout.lock(), cfg.precision)
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| DhoError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// `key=value` listing of the derived constants.
pub fn derive_listing(p: &PhysParams, precision: usize) -> Result<String> {
    let d = derive(p)?;
    let f = |v: f64| format_number(v, precision);
    let c = |v: Option<Complex64>| match v {
        Some(z) => format!("{}{}{}i", f(z.re), if z.im < 0.0 { "" } else { "+" }, f(z.im)),
        None => "absent".to_string(),
    };
    let lines = [
        ("m", f(p.m)),
        ("gamma", f(p.gamma)),
        ("k", f(p.k)),
        ("hbar", f(p.hbar)),
        ("omega", f(d.omega)),
        ("omega_minus", f(d.omega_minus)),
        ("omega_plus", f(d.omega_plus)),
        ("alpha", f(d.alpha)),
        ("beta", f(d.beta)),
        ("lambda", c(Some(d.lambda))),
        ("xi", c(d.xi)),
        ("zeta", c(d.zeta)),
        ("gamma_star", f(d.gamma_star)),
        (
            "quantum_regime",
            d.quantum_regime
                .map(|r| r.as_str().to_string())
                .unwrap_or_else(|| "overdamped".into()),
        ),
        ("classical_regime", d.classical_regime.as_str().to_string()),
    ];
    Ok(lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect())
}

pub fn cmd_derive(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.params;
    p.validate_quantum()?;
    let text = derive_listing(p, cfg.precision)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| DhoError::Io(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// `X, |phi_0|^2, |phi_1|^2, |phi_2|^2` at time `t` on `grid`.
pub fn fig1_table(p: &PhysParams, t: f64, grid: &GridSpec) -> Result<Table> {
    let basis = Eigenbasis::new(p, t)?;
    let mut table = Table::new(["X", "phi0_sq", "phi1_sq", "phi2_sq"]);
    for x in grid.points() {
        let phi = basis.eval_all(2, x);
        table.push(vec![x, phi[0].norm_sqr(), phi[1].norm_sqr(), phi[2].norm_sqr()]);
    }
    Ok(table)
}

/// Shared X grid for both `fig1` times: twelve initial ground-state widths each side.
pub fn fig1_grid(p: &PhysParams, points: usize) -> Result<GridSpec> {
    let sigma = Eigenbasis::new(p, 0.0)?.variance(0).sqrt();
    GridSpec::spatial(-12.0 * sigma, 12.0 * sigma, points)
}

pub fn cmd_fig1(cfg: &RunConfig, points: usize) -> Result<()> {
    let dir = out_dir(cfg)?;
    let grid = fig1_grid(&cfg.params, points)?;
    for t in FIG1_TIMES {
        let table = fig1_table(&cfg.params, t, &grid)?;
        table.write_file(&dir.join(format!("fig1_t{}.csv", t as u64)), cfg.precision)?;
    }
    Ok(())
}

/// Levels written by `fig2` and `fig3`.
pub const FIG_LEVELS: [usize; 4] = [0, 2, 4, 6];

/// `t, |c_{n,l}|^2` for `n = 0, 2, 4, 6` from the closed forms, optionally
/// followed by the same columns from the Runge-Kutta route.
pub fn fig23_table(p: &PhysParams, l: usize, grid: &GridSpec, with_ode: bool) -> Result<Table> {
    let d = derive_quantum(p)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(FIG_LEVELS.iter().map(|n| format!("p{n}")));
    if with_ode {
        header.extend(FIG_LEVELS.iter().map(|n| format!("ode_p{n}")));
    }
    let ts = grid.points();
    let row = |t: f64| -> Result<Vec<f64>> {
        let mut r = vec![t];
        for n in FIG_LEVELS {
            r.push(closed_form(&d, l, n, t)?.norm_sqr());
        }
        Ok(r)
    };
    let mut rows: Vec<Vec<f64>> = if parallel_enabled() {
        ts.par_iter().map(|&t| row(t)).collect::<Result<_>>()?
    } else {
        ts.iter().map(|&t| row(t)).collect::<Result<_>>()?
    };
    if with_ode {
        let sol = integrate_auto(p, l, grid, DEFAULT_TOL)?;
        for (r, v) in rows.iter_mut().zip(&sol) {
            r.extend(FIG_LEVELS.iter().map(|&n| v.probability(n)));
        }
    }
    let mut table = Table::new(header);
    table.rows = rows;
    Ok(table)
}

fn cmd_fig23(cfg: &RunConfig, l: usize, with_ode: bool, gamma_given: bool) -> Result<()> {
    let dir = out_dir(cfg)?;
    let grid = cfg.time_grid(FIG_T_MAX, FIG_SAMPLES)?;
    let fig = if l == 0 { 2 } else { 3 };
    if gamma_given {
        let table = fig23_table(&cfg.params, l, &grid, with_ode)?;
        return table.write_file(&dir.join(format!("fig{fig}_custom.csv")), cfg.precision);
    }
    let cases: Vec<Case> = match cfg.case {
        Some(c) => vec![c],
        None => Case::ALL.to_vec(),
    };
    for case in cases {
        let table = fig23_table(&unit_params(case.gamma()), l, &grid, with_ode)?;
        table.write_file(&dir.join(format!("fig{fig}_case_{}.csv", case.letter())), cfg.precision)?;
    }
    Ok(())
}

pub fn classical_table(p: &PhysParams, init: &InitialData, grid: &GridSpec) -> Result<Table> {
    let traj = solve_trajectory(p, init, grid)?;
    let ledger = heat(&traj);
    let mut table = Table::new([
        "t",
        "x",
        "y",
        "rho",
        "sigma",
        "X",
        "P",
        "theta",
        "N",
        "H",
        "E",
        "Q",
        "H_minus_E",
    ]);
    for (s, q) in traj.samples.iter().zip(&ledger.generated) {
        table.push(vec![
            s.t,
            s.x,
            s.y,
            s.rho,
            s.sigma,
            s.big_x,
            s.p,
            s.theta,
            s.n,
            s.h,
            s.e,
            *q,
            s.h - s.e,
        ]);
    }
    Ok(table)
}

fn cmd_classical(cfg: &RunConfig, init: &InitialData) -> Result<()> {
    let grid = cfg.time_grid(FIG_T_MAX, FIG_SAMPLES)?;
    emit(cfg, &classical_table(&cfg.params, init, &grid)?)
}

fn cmd_spectrum(cfg: &RunConfig, what: &SpectrumCommand) -> Result<()> {
    let p = &cfg.params;
    p.validate_quantum()?;
    let n_max = cfg.n_max.unwrap_or(4);
    let table = match what {
        SpectrumCommand::Eigenvalues { t } => {
            let mut table = Table::new(["n", "E"]);
            for n in 0..=n_max {
                table.push(vec![n as f64, energy_eigenvalue(p, n, *t)]);
            }
            table
        }
        SpectrumCommand::Eigenfunctions { t, points } => {
            let basis = Eigenbasis::new(p, *t)?;
            let half = 12.0 * basis.variance(n_max).sqrt();
            let grid = GridSpec::spatial(-half, half, *points)?;
            let mut header = vec!["X".to_string()];
            for n in 0..=n_max {
                header.push(format!("re{n}"));
                header.push(format!("im{n}"));
            }
            let mut table = Table::new(header);
            for x in grid.points() {
                let mut row = vec![x];
                for phi in basis.eval_all(n_max, x) {
                    row.push(phi.re);
                    row.push(phi.im);
                }
                table.push(row);
            }
            table
        }
        SpectrumCommand::Overlaps { t } => {
            if n_max > MAX_OVERLAP_LEVEL {
                return Err(DhoError::InvalidParams(format!(
                    "n-max must be <= {MAX_OVERLAP_LEVEL} for overlaps"
                )));
            }
            let mut table = Table::new(["n", "n2", "re", "im"]);
            for n in 0..=n_max {
                for n2 in 0..=n_max {
                    let o = overlap(p, n, n2, *t)?;
                    table.push(vec![n as f64, n2 as f64, o.re, o.im]);
                }
            }
            table
        }
    };
    emit(cfg, &table)
}

/// `t, re_n, im_n` for `n = 0..=levels`, plus `norm` (sum of `|c_n|^2` over
/// every level the route computed).
pub fn amplitude_table(samples: &[AmplitudeVector], levels: usize) -> Table {
    let mut header = vec!["t".to_string()];
    for n in 0..=levels {
        header.push(format!("re{n}"));
        header.push(format!("im{n}"));
    }
    header.push("norm".into());
    let mut table = Table::new(header);
    for v in samples {
        let mut row = vec![v.t];
        for n in 0..=levels {
            let c = v.get(n);
            row.push(c.re);
            row.push(c.im);
        }
        row.push(v.norm_sqr());
        table.push(row);
    }
    table
}

fn cmd_transitions(cfg: &RunConfig, route: Route, truncation: Option<usize>, tol: f64) -> Result<()> {
    let p = &cfg.params;
    let d = derive_quantum(p)?;
    let l = cfg.l.unwrap_or(0);
    let levels = cfg.n_max.unwrap_or(12);
    let grid = cfg.time_grid(FIG_T_MAX, FIG_SAMPLES)?;
    let samples: Vec<AmplitudeVector> = match route {
        Route::Ode => match truncation {
            Some(n) => integrate(p, l, n, &grid, tol)?,
            None => integrate_auto(p, l, &grid, tol)?,
        },
        Route::Closed => {
            let one = |t: f64| -> Result<AmplitudeVector> {
                let coeffs = (0..=levels)
                    .map(|n| closed_form(&d, l, n, t))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AmplitudeVector::from_coeffs(t, coeffs, l))
            };
            let ts = grid.points();
            if parallel_enabled() {
                ts.par_iter().map(|&t| one(t)).collect::<Result<_>>()?
            } else {
                ts.iter().map(|&t| one(t)).collect::<Result<_>>()?
            }
        }
        Route::Contour => {
            let points = contour_points(levels);
            let one = |t: f64| -> Result<AmplitudeVector> {
                Ok(AmplitudeVector::from_coeffs(
                    t,
                    contour_extract_all(&d, l, levels, t, CONTOUR_RADIUS, points)?,
                    l,
                ))
            };
            let ts = grid.points();
            if parallel_enabled() {
                ts.par_iter().map(|&t| one(t)).collect::<Result<_>>()?
            } else {
                ts.iter().map(|&t| one(t)).collect::<Result<_>>()?
            }
        }
    };
    emit(cfg, &amplitude_table(&samples, levels))
}

fn cmd_wavefunction(cfg: &RunConfig, t: f64, points: usize) -> Result<()> {
    let p = &cfg.params;
    let l = cfg.l.unwrap_or(0);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DhoError::InvalidGrid(format!("t must be >= 0, got {t}")));
    }
    let amps = if t == 0.0 {
        let mut c = vec![Complex64::new(0.0, 0.0); l + 21];
        c[l] = Complex64::new(1.0, 0.0);
        AmplitudeVector::from_coeffs(0.0, c, l)
    } else {
        integrate_auto(p, l, &GridSpec::temporal(0.0, t, 2)?, DEFAULT_TOL)?
            .pop()
            .expect("two samples")
    };
    let base = default_grid(p, t)?;
    let grid = GridSpec::spatial(base.min, base.max, points)?;
    let w = assemble(p, &amps, &grid, t)?;
    let mut table = Table::new(["X", "re", "im", "density"]);
    for (x, v) in grid.points().iter().zip(&w.values) {
        table.push(vec![*x, v.re, v.im, v.norm_sqr()]);
    }
    emit(cfg, &table)
}
