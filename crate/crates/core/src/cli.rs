//! Command-line front end.
//!
//! Every command writes its artifacts and a `manifest.json` into `--out`.
//! Exit codes: 0 pass, 1 usage or configuration error, 2 mathematical failure.
//! `QATTRACT_SEED` is reserved and ignored: every algorithm is deterministic.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::attract;
use crate::basin::{self, BasinMap, Budget, GridSpec};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Direction, EventSpec, IntegratorSettings, Trajectory};
use crate::invariants;
use crate::model::config::{load_system, Overrides};
use crate::model::{ForcingBounds, Nonlinearity, PhaseState, SystemConfig};
use crate::qpsolve::{self, FourierSolution, NewtonOptions};
use crate::region::RegionSpec;
use crate::report::Report;
use crate::svg::Plot;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "qattract", version, about = "Quasi-periodic responses, trapping regions and basins of forced oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Solve for the quasi-periodic response x0 by harmonic balance.
    Solve(SolveArgs),
    /// Check an invariant, trapping or blow-up set.
    Verify(VerifyArgs),
    /// Classify a grid of initial conditions.
    Basin(BasinArgs),
    /// Integrate one trajectory.
    Simulate(SimulateArgs),
    /// Overlay regions, trajectories and basin maps into one SVG.
    Plot(PlotArgs),
    /// Repeat a run recorded in a manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Basin(_) => "basin",
            Command::Simulate(_) => "simulate",
            Command::Plot(_) => "plot",
            Command::Rerun(_) => "rerun",
        }
    }

    fn out(&self) -> Option<&Path> {
        match self {
            Command::Solve(a) => Some(&a.sys.out),
            Command::Verify(a) => Some(&a.sys.out),
            Command::Basin(a) => Some(&a.sys.out),
            Command::Simulate(a) => Some(&a.sys.out),
            Command::Plot(a) => Some(&a.out),
            Command::Rerun(a) => a.out.as_deref(),
        }
    }

    fn sys(&self) -> Option<&SystemArgs> {
        match self {
            Command::Solve(a) => Some(&a.sys),
            Command::Verify(a) => Some(&a.sys),
            Command::Basin(a) => Some(&a.sys),
            Command::Simulate(a) => Some(&a.sys),
            Command::Plot(_) | Command::Rerun(_) => None,
        }
    }

    fn sys_mut(&mut self) -> Option<&mut SystemArgs> {
        match self {
            Command::Solve(a) => Some(&mut a.sys),
            Command::Verify(a) => Some(&mut a.sys),
            Command::Basin(a) => Some(&mut a.sys),
            Command::Simulate(a) => Some(&mut a.sys),
            Command::Plot(_) | Command::Rerun(_) => None,
        }
    }

    /// Makes every path absolute so a manifest can be replayed from any directory.
    fn absolutize(&mut self) -> Result<()> {
        let abs = |p: &mut PathBuf| -> Result<()> {
            *p = std::path::absolute(&*p)?;
            Ok(())
        };
        if let Some(s) = self.sys_mut() {
            abs(&mut s.config)?;
            abs(&mut s.out)?;
        }
        if let Command::Plot(a) = self {
            abs(&mut a.out)?;
            for p in a.region.iter_mut().chain(a.trajectory.iter_mut()).chain(a.basin.iter_mut()) {
                abs(p)?;
            }
        }
        Ok(())
    }

    fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Plot(a) => a.out = out,
            other => {
                if let Some(s) = other.sys_mut() {
                    s.out = out;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SystemArgs {
    /// System file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the damping gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Override the exponent parameter p.
    #[arg(long)]
    pub p: Option<u32>,
}

impl SystemArgs {
    fn overrides(&self) -> Overrides {
        Overrides { gamma: self.gamma, p: self.p }
    }

    fn load(&self) -> Result<SystemConfig> {
        load_system(&self.config, self.overrides())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sys: SystemArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetName {
    Hexagon,
    #[value(name = "S")]
    #[serde(rename = "S")]
    S,
    Blowup,
    Sandwich,
    Quadrants,
}

impl SetName {
    fn as_str(self) -> &'static str {
        match self {
            SetName::Hexagon => "hexagon",
            SetName::S => "S",
            SetName::Blowup => "blowup",
            SetName::Sandwich => "sandwich",
            SetName::Quadrants => "quadrants",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sys: SystemArgs,
    #[arg(long, value_enum)]
    pub set: SetName,
    /// Blow-up anchor X0 (default: the smallest integer >= xi).
    #[arg(long = "X0")]
    pub big_x0: Option<f64>,
    /// Integration horizon for trajectory-based checks.
    #[arg(long, default_value_t = 50.0)]
    pub tmax: f64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BasinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sys: SystemArgs,
    /// "x0:x1:nx,y0:y1:ny"
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Integration budget per grid point.
    #[arg(long, default_value_t = 200.0)]
    pub tmax: f64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Initial forcing phase shared by the whole sweep.
    #[arg(long, default_value_t = 0.0)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sys: SystemArgs,
    /// Initial position.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// Initial velocity.
    #[arg(long, allow_negative_numbers = true)]
    pub y0: f64,
    /// Final time.
    #[arg(long)]
    pub tmax: f64,
    /// Initial time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    /// Output sample spacing.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PlotArgs {
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Region JSON (repeatable).
    #[arg(long)]
    pub region: Vec<PathBuf>,
    /// Trajectory CSV "t,x,y" (repeatable).
    #[arg(long)]
    pub trajectory: Vec<PathBuf>,
    /// Basin CSV "x0,y0,label,t_decide" (repeatable).
    #[arg(long)]
    pub basin: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub version: String,
    pub wall_time_s: f64,
    pub exit_code: i32,
    /// Full parsed invocation with absolute paths; `rerun` replays it.
    pub invocation: Command,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Parses arguments (first item is the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

pub fn execute(cmd: Command) -> i32 {
    match cmd {
        Command::Rerun(r) => match RunManifest::load(&r.manifest) {
            Ok(m) => {
                let mut inv = m.invocation;
                if let Some(out) = r.out {
                    inv.set_out(out);
                }
                execute(inv)
            }
            Err(e) => report_error(&e),
        },
        mut cmd => {
            if let Err(e) = cmd.absolutize() {
                return report_error(&e);
            }
            let start = Instant::now();
            let out = cmd.out().expect("non-rerun commands have --out").to_path_buf();
            let code = match std::fs::create_dir_all(&out).map_err(Error::from).and_then(|_| dispatch(&cmd, &out)) {
                Ok(true) => 0,
                Ok(false) => 2,
                Err(e) => report_error(&e),
            };
            let manifest = RunManifest {
                command: cmd.name().into(),
                config: cmd.sys().map(|s| s.config.clone()),
                out: out.clone(),
                overrides: cmd.sys().map(|s| s.overrides()).unwrap_or_default(),
                version: env!("CARGO_PKG_VERSION").into(),
                wall_time_s: start.elapsed().as_secs_f64(),
                exit_code: code,
                invocation: cmd,
            };
            if out.is_dir() {
                let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
                if let Err(e) = write_atomic(&out, MANIFEST, &text) {
                    eprintln!("error: cannot write manifest: {e}");
                    return code.max(1);
                }
            }
            code
        }
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_mathematical() {
        2
    } else {
        1
    }
}

/// Writes `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, dir.join(name))?;
    Ok(())
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(0) => Err(Error::InvalidInput("--workers must be >= 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Ok(pass) or an error.
fn dispatch(cmd: &Command, out: &Path) -> Result<bool> {
    match cmd {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Basin(a) => cmd_basin(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Plot(a) => cmd_plot(a, out),
        Command::Rerun(_) => unreachable!("rerun is resolved before dispatch"),
    }
}

fn residual_tol(cfg: &SystemConfig) -> f64 {
    1e-10 * cfg.forcing.f0().abs().max(1.0)
}

fn cmd_solve(a: &SolveArgs, out: &Path) -> Result<bool> {
    let cfg = a.sys.load()?;
    let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
    let tol = residual_tol(&cfg);
    let times = attract::sample_times(&sol, 256, 3);
    let ode = times.iter().map(|&t| qpsolve::ode_residual(&cfg, &sol, t).abs()).fold(0.0, f64::max);
    let pass = sol.residual_norm <= tol;
    let mut summary = sol.summary_json();
    summary["tolerance"] = json!(tol);
    summary["ode_residual_max"] = json!(ode);
    summary["nonlinearity"] = json!(cfg.g.name());
    summary["pass"] = json!(pass);
    write_atomic(out, "solution.csv", &sol.to_csv())?;
    write_atomic(out, "summary.json", &pretty(&summary))?;
    Ok(pass)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn even_p(cfg: &SystemConfig) -> Result<u32> {
    match cfg.g {
        Nonlinearity::EvenMonomial { p } => Ok(p),
        _ => Err(Error::WrongNonlinearity(cfg.g.name())),
    }
}

fn odd_p(cfg: &SystemConfig) -> Result<u32> {
    match cfg.g {
        Nonlinearity::OddMonomial { p } => Ok(p),
        _ => Err(Error::Precondition(format!("this check needs an odd monomial nonlinearity, got {}", cfg.g.name()))),
    }
}

fn write_region(out: &Path, stem: &str, region: &RegionSpec) -> Result<()> {
    write_atomic(out, &format!("{stem}.json"), &pretty(&region.to_json()))?;
    for (i, arc) in region.arcs.iter().enumerate() {
        write_atomic(out, &format!("{stem}_arc{i}_{}.csv", arc.name), &region.arc_csv(i, 200))?;
    }
    Ok(())
}

fn combined(set: SetName, reports: &[Report], extra: Value) -> (bool, String) {
    let pass = reports.iter().all(|r| r.pass);
    (pass, pretty(&json!({"set": set.as_str(), "pass": pass, "reports": reports, "details": extra})))
}

fn cmd_verify(a: &VerifyArgs, out: &Path) -> Result<bool> {
    let cfg = a.sys.load()?;
    let file = format!("verify_{}.json", a.set.as_str());
    let (pass, text) = with_workers(a.workers, || -> Result<(bool, String)> {
        match a.set {
            SetName::Hexagon => {
                let p = even_p(&cfg)?;
                let fb = ForcingBounds::compute(&cfg.forcing, p);
                fb.require_positive()?;
                let hex = invariants::build_hexagon(p, fb.f_pow, fb.big_f_pow, cfg.gamma)?;
                let rep = hex.verify_flux(Some(&cfg), 1000, 100);
                write_region(out, "hexagon", &hex.region)?;
                Ok(combined(
                    a.set,
                    &[rep],
                    json!({"lambda1": hex.lambda1, "lambda2": hex.lambda2, "f_low": fb.f_low, "f_up": fb.f_up}),
                ))
            }
            SetName::Blowup => {
                let p = even_p(&cfg)?;
                let fb = ForcingBounds::compute(&cfg.forcing, p);
                fb.require_positive()?;
                let xi = invariants::solve_xi_root(p, fb.f_pow, fb.big_f_pow, cfg.gamma)?;
                let big_x0 = a.big_x0.unwrap_or(xi.ceil());
                let br = invariants::build_blowup_region(p, fb.f_pow, fb.big_f_pow, cfg.gamma, big_x0)?;
                let (rj, rs) = br.verify_flux(Some(&cfg), 1000, 100);
                write_region(out, "blowup_J", &br.j_set)?;
                write_region(out, "blowup_S", &br.s_set)?;
                Ok(combined(a.set, &[rj, rs], json!({"xi": xi, "X0": big_x0, "b": br.b, "x_min": br.x_min})))
            }
            SetName::S => {
                odd_p(&cfg)?;
                let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
                let st = attract::setup(&cfg, &sol)?;
                let rep = attract::s_boundary_flux(&cfg, &sol, &st.s, 1000, 100);
                write_atomic(out, "S_boundary.csv", &st.s.boundary_csv())?;
                write_region(out, "S", &st.s.region)?;
                Ok(combined(
                    a.set,
                    &[rep],
                    json!({"alpha": st.alpha, "R": st.rb, "friction": st.fb, "energy_level": st.s.energy_level,
                           "y_intercept": st.s.y_intercept, "xi_intercept": st.s.xi_intercept}),
                ))
            }
            SetName::Sandwich => {
                odd_p(&cfg)?;
                let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
                let st = attract::setup(&cfg, &sol)?;
                let xi_max = 4.0 * st.s.xi_intercept.max(st.s.xi_intercept_neg.abs());
                let rep = attract::verify_sandwich(&cfg, &sol, Some(&st.s), xi_max, 400, 100)?;
                Ok(combined(a.set, &[rep], json!({"alpha": st.alpha, "xi_intercept": st.s.xi_intercept})))
            }
            SetName::Quadrants => {
                odd_p(&cfg)?;
                let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
                let mut ics = Vec::new();
                for k in 0..10 {
                    let (xi, y) = (0.5 + 0.5 * k as f64, 0.25 + 0.75 * k as f64);
                    ics.push((xi, y));
                    ics.push((-xi, -y));
                }
                let (rep, transits) = attract::quadrant_transit_check(&cfg, &sol, &ics, a.tmax);
                let mut csv = String::from("xi0,y0,entered,time,bound\n");
                for t in &transits {
                    writeln!(csv, "{:.16e},{:.16e},{},{:.16e},{:.16e}", t.xi0, t.y0, t.entered, t.time, t.bound).unwrap();
                }
                write_atomic(out, "transits.csv", &csv)?;
                Ok(combined(a.set, &[rep], Value::Null))
            }
        }
    })??;
    write_atomic(out, &file, &text)?;
    println!("verify {}: {}", a.set.as_str(), if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn cmd_basin(a: &BasinArgs, out: &Path) -> Result<bool> {
    let cfg = a.sys.load()?;
    let grid: GridSpec = a.grid.parse::<GridSpec>()?.with_phase(a.phase);
    if !(a.tmax > 0.0) {
        return Err(Error::InvalidInput(format!("--tmax must be > 0, got {}", a.tmax)));
    }
    let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
    let map = basin::sweep(&cfg, &sol, &grid, &Budget::new(a.tmax), a.workers)?;
    write_atomic(out, "basin.csv", &map.to_csv())?;
    write_atomic(out, "basin_matrix.txt", &map.to_matrix())?;
    let summary = json!({
        "grid": a.grid,
        "phase": a.phase,
        "tmax": a.tmax,
        "points": grid.len(),
        "attracted": map.count(basin::Label::Attracted),
        "blown_up": map.count(basin::Label::BlownUp),
        "undecided": map.count(basin::Label::Undecided),
        "x0_mean": sol.mean(),
    });
    write_atomic(out, "basin_summary.json", &pretty(&summary))?;
    Ok(true)
}

fn cmd_simulate(a: &SimulateArgs, out: &Path) -> Result<bool> {
    let cfg = a.sys.load()?;
    let s0 = PhaseState::new(a.x0, a.y0, a.t0);
    if !s0.is_finite() || !(a.tmax > 0.0) || !(a.dt > 0.0) {
        return Err(Error::InvalidInput("need finite x0, y0, t0 and positive tmax, dt".into()));
    }
    let set = IntegratorSettings { sample_interval: Some(a.dt), ..IntegratorSettings::default().with_t_max(a.t0 + a.tmax) };
    set.validate()?;
    let events = [EventSpec::CrossXAxis(Direction::Any), EventSpec::CrossYAxis(Direction::Any)];
    let tr: Trajectory = integrate(&cfg, s0, &set, &events);
    write_atomic(out, "trajectory.csv", &tr.to_csv())?;
    write_atomic(out, "events.csv", &tr.events_csv())?;
    let summary = json!({
        "start": s0,
        "outcome": tr.outcome,
        "final_state": tr.final_state,
        "samples": tr.samples.len(),
        "steps": tr.steps,
    });
    write_atomic(out, "simulate_summary.json", &pretty(&summary))?;
    Ok(true)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn cmd_plot(a: &PlotArgs, out: &Path) -> Result<bool> {
    if a.region.is_empty() && a.trajectory.is_empty() && a.basin.is_empty() {
        return Err(Error::InvalidInput("plot needs at least one --region, --trajectory or --basin input".into()));
    }
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())));
    let mut plot = Plot::new("qattract");
    for p in &a.basin {
        let map = BasinMap::from_csv(&read(p)?)?;
        plot.add_basin(map);
    }
    for p in &a.region {
        let v: Value = serde_json::from_str(&read(p)?).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
        plot.add_region(&stem(p), RegionSpec::from_json(&v)?);
    }
    for p in &a.trajectory {
        let pts = Trajectory::samples_from_csv(&read(p)?)?.iter().map(|s| [s.x, s.y]).collect();
        plot.add_trajectory(&stem(p), pts);
    }
    write_atomic(out, "plot.svg", &plot.render())?;
    Ok(true)
}

/// Solves and returns x0, used by examples that want the same pipeline as `solve`.
pub fn solve_config(path: &Path, ov: Overrides) -> Result<(SystemConfig, FourierSolution)> {
    let cfg = load_system(path, ov)?;
    let sol = qpsolve::solve(&cfg, &NewtonOptions::default())?;
    Ok((cfg, sol))
}
