use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluxsim::phase_plane::gamma_star_separatrix;
use fluxsim::regime::nonexistence_rule;
use fluxsim::report::{
    asymptote, phase_portrait, shoot_bounded, sweep_census, sweep_points, write_census_csv, write_crossings_csv,
    write_cycle_csv, write_equilibria_csv, write_isoclines_csv, write_report_csv, write_separatrices_csv,
    write_sweep_csv, write_trajectory_csv, Artifact, Grid, OutputFormat, PortraitOptions, RunConfig, WORKERS_ENV,
};
use fluxsim::shooting::{solve_trajectory, GammaStarShooting};
use fluxsim::verify::{self, VerifyOptions};
use fluxsim::{gamma_star_shooting, Error, Params, SolveOptions};
use serde::Serialize;

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONEXISTENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "fluxsim", version, about = "Similarity solutions of f''' + (m+2) f f'' - (2m+1) f'^2 = 0")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify one slope f'(0), or shoot for the bounded solution.
    Solve(SolveArgs),
    /// Solve or census every point of a parameter grid.
    Sweep(SweepArgs),
    /// Critical gamma by shooting and by separatrix tracing.
    GammaStar(GammaStarArgs),
    /// Equilibria, separatrices and isoclines of the blown-up system.
    Phase(PhaseArgs),
    /// Run the registered numerical checks.
    Verify(VerifyArgs),
    /// Tail behaviour of one solution.
    Asymptote(AsymptoteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file (directory for `phase --format csv`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "shoot_bounded")]
    alpha: Option<f64>,
    #[arg(long)]
    shoot_bounded: bool,
    /// Also write the trajectory as t,f,fp,fpp.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// `m=...;gamma=...[;alpha=...]`, each axis a comma list or lo:hi:n.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GammaStarArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    /// Arc length followed along each separatrix.
    #[arg(long, default_value_t = 50.0)]
    s_max: f64,
    /// Sample the first-return map around A (m > 1).
    #[arg(long)]
    cycle: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only checks whose name contains this; repeatable.
    #[arg(long)]
    only: Vec<String>,
    /// Multiply the integrator tolerances.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// List the checks and exit.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoteArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[command(flatten)]
    common: Common,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Nonexistence(_) | Error::Regime(_) => EXIT_NONEXISTENCE,
            Error::InvalidInput(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Self { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_INTERNAL,
            msg: e.to_string(),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn config(command: &str, c: &Common) -> Res<RunConfig> {
    let mut cfg = RunConfig::new(command);
    if let Some(t) = c.t_max {
        cfg.t_max = t;
    }
    if let Some(r) = c.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(a) = c.abs_tol {
        cfg.abs_tol = a;
    }
    for (name, x) in [("--t-max", cfg.t_max), ("--rel-tol", cfg.rel_tol), ("--abs-tol", cfg.abs_tol)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Failure::usage(format!("{name} must be positive and finite")));
        }
    }
    cfg.format = match c.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    cfg.out = c.out.as_ref().map(|p| p.display().to_string());
    Ok(cfg)
}

fn params(m: f64, gamma: f64) -> Res<Params> {
    Params::new(m, gamma).map_err(|e| Failure::usage(e.to_string()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Res<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(cfg: &RunConfig, out: Option<&Path>, result: T) -> Res<()> {
    emit(out, Artifact::new(cfg, result).to_json()?.as_bytes())
}

/// CSV carries no room for the config echo; it goes next to the file.
fn sidecar(cfg: &RunConfig, out: Option<&Path>) -> Res<()> {
    if let Some(p) = out {
        let mut name = p.as_os_str().to_owned();
        name.push(".config.json");
        fs::write(PathBuf::from(name), Artifact::new(cfg, ()).to_json()?)?;
    }
    Ok(())
}

fn emit_csv(cfg: &RunConfig, out: Option<&Path>, write: impl FnOnce(&mut Vec<u8>) -> fluxsim::Result<()>) -> Res<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    emit(out, &buf)?;
    sidecar(cfg, out)
}

fn cmd_solve(a: SolveArgs) -> Res<()> {
    let mut cfg = config("solve", &a.common)?;
    let p = params(a.m, a.gamma)?;
    cfg.m = Some(a.m);
    cfg.gamma = Some(a.gamma);
    cfg.shoot_bounded = a.shoot_bounded;
    cfg.alpha = a.alpha;
    if let Some(rule) = nonexistence_rule(&p) {
        return Err(Error::Nonexistence(rule).into());
    }
    let opts = cfg.solve_options();
    let alpha = match (a.alpha, a.shoot_bounded) {
        (Some(x), _) => x,
        (None, true) => shoot_bounded(p, &opts)?.alpha,
        (None, false) => return Err(Failure::usage("give --alpha or --shoot-bounded")),
    };
    let (report, traj) = solve_trajectory(p, alpha, &opts)?;
    if let Some(path) = &a.trajectory {
        let mut buf = Vec::new();
        write_trajectory_csv(&traj.states, &mut buf)?;
        fs::write(path, buf)?;
    }
    let out = a.common.out.as_deref();
    match cfg.format {
        OutputFormat::Json => emit_json(&cfg, out, &report),
        OutputFormat::Csv => emit_csv(&cfg, out, |w| write_report_csv(&report, w)),
    }
}

fn cmd_sweep(a: SweepArgs) -> Res<()> {
    let mut cfg = config("sweep", &a.common)?;
    let grid = Grid::parse(&a.grid).map_err(|e| Failure::usage(e.to_string()))?;
    cfg.grid = Some(a.grid.clone());
    cfg.workers = a.workers;
    if a.workers == Some(0) {
        return Err(Failure::usage("--workers must be positive"));
    }
    let opts = cfg.solve_options();
    let out = a.common.out.as_deref();
    if grid.alpha.is_some() {
        let rows = sweep_points(&grid, &opts, a.workers)?;
        match cfg.format {
            OutputFormat::Json => emit_json(&cfg, out, &rows),
            OutputFormat::Csv => emit_csv(&cfg, out, |w| write_sweep_csv(&rows, w)),
        }
    } else {
        let rows = sweep_census(&grid, &opts, a.workers)?;
        match cfg.format {
            OutputFormat::Json => emit_json(&cfg, out, &rows),
            OutputFormat::Csv => emit_csv(&cfg, out, |w| write_census_csv(&rows, w)),
        }
    }
}

#[derive(Serialize)]
struct GammaStarBoth {
    m: f64,
    shooting: GammaStarShooting,
    separatrix: fluxsim::phase_plane::GammaStarResult,
    difference: f64,
}

fn cmd_gamma_star(a: GammaStarArgs) -> Res<()> {
    let mut cfg = config("gamma-star", &a.common)?;
    cfg.m = Some(a.m);
    let sep = gamma_star_separatrix(a.m)?;
    let sh = gamma_star_shooting(a.m, &cfg.solve_options())?;
    let both = GammaStarBoth {
        m: a.m,
        difference: sh.gamma_star - sep.gamma_star,
        shooting: sh,
        separatrix: sep,
    };
    let out = a.common.out.as_deref();
    match cfg.format {
        OutputFormat::Json => emit_json(&cfg, out, &both),
        OutputFormat::Csv => emit_csv(&cfg, out, |w| {
            let mut wr = fluxsim::report::csv_writer(w);
            let f = fluxsim::report::fmt_f64;
            let io = |e: csv::Error| Error::InvalidInput(e.to_string());
            wr.write_record(["m", "gamma_star_shooting", "gamma_star_separatrix", "difference", "u_star", "v_star"])
                .map_err(io)?;
            wr.write_record([
                f(both.m),
                f(both.shooting.gamma_star),
                f(both.separatrix.gamma_star),
                f(both.difference),
                f(both.separatrix.u_star),
                f(both.separatrix.v_star),
            ])
            .map_err(io)?;
            wr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
        }),
    }
}

fn cmd_phase(a: PhaseArgs) -> Res<()> {
    let mut cfg = config("phase", &a.common)?;
    cfg.m = Some(a.m);
    let po = PortraitOptions {
        s_max: a.s_max,
        cycle_probe: a.cycle,
        ..PortraitOptions::default()
    };
    let pp = phase_portrait(a.m, &po)?;
    match cfg.format {
        OutputFormat::Json => emit_json(&cfg, a.common.out.as_deref(), &pp),
        OutputFormat::Csv => {
            let dir = a
                .common
                .out
                .as_deref()
                .ok_or_else(|| Failure::usage("phase --format csv writes several files; give --out DIR"))?;
            fs::create_dir_all(dir)?;
            let file = |name: &str, write: &dyn Fn(&mut Vec<u8>) -> fluxsim::Result<()>| -> Res<()> {
                let mut buf = Vec::new();
                write(&mut buf)?;
                fs::write(dir.join(name), buf)?;
                Ok(())
            };
            file("equilibria.csv", &|w| write_equilibria_csv(&pp, w))?;
            file("separatrices.csv", &|w| write_separatrices_csv(&pp, w))?;
            file("crossings.csv", &|w| write_crossings_csv(&pp, w))?;
            file("isoclines.csv", &|w| write_isoclines_csv(&pp, w))?;
            if let Some(c) = &pp.cycle {
                file("cycle.csv", &|w| write_cycle_csv(c, w))?;
            }
            fs::write(dir.join("config.json"), Artifact::new(&cfg, ()).to_json()?)?;
            Ok(())
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Res<()> {
    if a.list {
        for c in verify::registry() {
            println!("{:<16} {}", c.name, c.description);
        }
        return Ok(());
    }
    if !(a.tol_scale.is_finite() && a.tol_scale > 0.0) {
        return Err(Failure::usage("--tol-scale must be positive"));
    }
    let names = verify::check_names();
    for o in &a.only {
        if !names.iter().any(|n| n.contains(o.as_str())) {
            return Err(Failure::usage(format!("--only {o} matches no check; known: {}", names.join(", "))));
        }
    }
    let mut vo = VerifyOptions {
        tol_scale: a.tol_scale,
        only: a.only.clone(),
        ..VerifyOptions::default()
    };
    if let Some(s) = a.seed {
        vo.seed = s;
    }
    let summary = verify::run(&vo);
    for c in &summary.checks {
        eprintln!("{} {:<16} {:>7.2}s {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    let mut cfg = RunConfig::new("verify");
    cfg.out = a.out.as_ref().map(|p| p.display().to_string());
    cfg.rel_tol = vo.solve().rel_tol;
    cfg.abs_tol = vo.solve().abs_tol;
    emit_json(&cfg, a.out.as_deref(), &summary)?;
    if summary.passed {
        Ok(())
    } else {
        let n = summary.checks.iter().filter(|c| !c.passed).count();
        Err(Failure {
            code: EXIT_INTERNAL,
            msg: format!("{n} check(s) failed"),
        })
    }
}

/// Tails need a longer horizon than the classification default.
const ASYMPTOTE_T_MAX: f64 = 1e3;

fn cmd_asymptote(a: AsymptoteArgs) -> Res<()> {
    let mut cfg = config("asymptote", &a.common)?;
    if a.common.t_max.is_none() {
        cfg.t_max = ASYMPTOTE_T_MAX;
    }
    let p = params(a.m, a.gamma)?;
    cfg.m = Some(a.m);
    cfg.gamma = Some(a.gamma);
    cfg.alpha = Some(a.alpha);
    let opts: SolveOptions = cfg.solve_options();
    let rep = asymptote(p, a.alpha, &opts)?;
    let out = a.common.out.as_deref();
    match cfg.format {
        OutputFormat::Json => emit_json(&cfg, out, &rep),
        OutputFormat::Csv => emit_csv(&cfg, out, |w| write_report_csv(&rep.report, w)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let r = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::GammaStar(a) => cmd_gamma_star(a),
        Cmd::Phase(a) => cmd_phase(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Asymptote(a) => cmd_asymptote(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fluxsim: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
