//! Run configuration, sweeps and the CSV/JSON output formats.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{decay_check_2_over_t, lambda_limit_with, tail_exponent, DecayCheck, LambdaLimit, TailFit};
use crate::error::{Error, Result};
use crate::ode::{Params, Termination};
use crate::phase_plane::{
    equilibria, isocline_psi, limit_cycle_probe, sector_layout, trace_separatrix, CycleReport, Equilibrium,
    PhasePoint, SectorLayout, Separatrix, SeparatrixTrace, TraceOptions,
};
use crate::regime::{nonexistence_rule, Regime};
use crate::shooting::{
    alpha_interval, shoot_concave, solve_at, solve_trajectory, Boundedness, IntervalKind, Shape, SolutionReport,
    SolveOptions,
};

pub const FORMAT_VERSION: &str = "fluxsim/1";
/// Environment variable holding the sweep worker count.
pub const WORKERS_ENV: &str = "FLUXSIM_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

/// Effective configuration of one run, echoed into its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub m: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub shoot_bounded: bool,
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub eps_far: f64,
    pub horizon_doublings: u32,
    pub grid: Option<String>,
    pub format: OutputFormat,
    pub out: Option<String>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let o = SolveOptions::default();
        Self {
            command: command.to_string(),
            m: None,
            gamma: None,
            alpha: None,
            shoot_bounded: false,
            t_max: o.t_max,
            rel_tol: o.rel_tol,
            abs_tol: o.abs_tol,
            eps_far: o.eps_far,
            horizon_doublings: o.horizon_doublings,
            grid: None,
            format: OutputFormat::default(),
            out: None,
            workers: None,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            t_max: self.t_max,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            eps_far: self.eps_far,
            horizon_doublings: self.horizon_doublings,
        }
    }
}

/// One JSON artifact: format version, config echo and payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub format_version: String,
    pub config: RunConfig,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(config: &RunConfig, result: T) -> Self {
        Self {
            format_version: FORMAT_VERSION.to_string(),
            config: config.clone(),
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// 17 significant digits; empty for `None`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Snake-case tag of a unit-like serde enum.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(serde_json::Value::Object(o)) => o
            .get("kind")
            .and_then(|k| k.as_str())
            .unwrap_or_default()
            .to_string(),
        _ => String::new(),
    }
}

pub fn regime_name(r: Regime) -> String {
    tag(&r)
}

fn termination_t(t: &Termination) -> Option<f64> {
    match *t {
        Termination::ReachedTMax => None,
        Termination::BlowupAt { t } | Termination::EventStop { t, .. } | Termination::Stopped { t } => Some(t),
    }
}

/// A CSV writer: LF line endings, header first.
pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

pub const REPORT_HEADER: [&str; 18] = [
    "m",
    "gamma",
    "alpha",
    "regime",
    "status",
    "shape",
    "boundedness",
    "lambda",
    "evidence",
    "residual_far",
    "r1",
    "r2",
    "r3",
    "t_max",
    "termination",
    "termination_t",
    "rule",
    "message",
];

/// Result for one `(m, gamma, alpha)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub regime: Regime,
    /// Nonexistence rule covering `(m, gamma)`, if any.
    pub rule: Option<String>,
    pub report: std::result::Result<SolutionReport, String>,
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let mut rec = vec![fmt_f64(self.m), fmt_f64(self.gamma), fmt_f64(self.alpha), regime_name(self.regime)];
        match &self.report {
            Ok(r) => {
                let c = &r.classification;
                let ir = r.identity_residuals;
                rec.extend([
                    "ok".to_string(),
                    c.shape.name().to_string(),
                    c.boundedness.name().to_string(),
                    fmt_opt(r.lambda_est),
                    tag(&c.evidence),
                    fmt_f64(r.residual_far),
                    fmt_f64(ir.r1),
                    fmt_f64(ir.r2),
                    fmt_f64(ir.r3),
                    fmt_f64(r.t_max),
                    tag(&r.termination),
                    fmt_opt(termination_t(&r.termination)),
                    self.rule.clone().unwrap_or_default(),
                    c.reason.clone().unwrap_or_default(),
                ]);
            }
            Err(e) => {
                rec.push("error".into());
                rec.extend(std::iter::repeat(String::new()).take(11));
                rec.push(self.rule.clone().unwrap_or_default());
                rec.push(e.clone());
            }
        }
        rec
    }
}

/// How many solutions the problem has at `(m, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionCount {
    None,
    Unique,
    /// An interval of slopes `f'(0)`, all solutions.
    Continuum,
    /// One bounded solution at the lower end, unbounded ones above it.
    BoundedWithUnboundedFamily,
    /// Bounded solutions at both ends, unbounded ones in between.
    TwoBoundedWithUnboundedFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub m: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub count: SolutionCount,
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
    pub rule: Option<String>,
    pub note: Option<String>,
}

pub const CENSUS_HEADER: [&str; 9] = ["m", "gamma", "regime", "count", "alpha_lo", "alpha_hi", "rule", "note", "error"];

/// Count the solutions at `(m, gamma)` from the nonexistence rules and the
/// set of admissible `f'(0)`.
pub fn census(p: Params, opts: &SolveOptions) -> Result<Census> {
    let regime = Regime::of(p.m);
    let mut out = Census {
        m: p.m,
        gamma: p.gamma,
        regime,
        count: SolutionCount::None,
        alpha_lo: None,
        alpha_hi: None,
        rule: nonexistence_rule(&p),
        note: None,
    };
    if out.rule.is_some() {
        return Ok(out);
    }
    let iv = alpha_interval(p, opts)?;
    out.note = iv.note.clone();
    if iv.kind != IntervalKind::Empty {
        out.alpha_lo = Some(iv.lo);
        out.alpha_hi = Some(iv.hi);
    }
    out.count = match (iv.kind, regime) {
        (IntervalKind::Empty, _) => SolutionCount::None,
        (IntervalKind::Singleton, _) => SolutionCount::Unique,
        (IntervalKind::Interval, Regime::MinusOne | Regime::MinusOneToMinusHalf) => {
            SolutionCount::BoundedWithUnboundedFamily
        }
        (IntervalKind::Interval, Regime::MinusTwoToMinusOne) => SolutionCount::TwoBoundedWithUnboundedFamily,
        (IntervalKind::Interval, _) => SolutionCount::Continuum,
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub m: f64,
    pub gamma: f64,
    pub census: std::result::Result<Census, String>,
}

impl CensusRow {
    pub fn record(&self) -> Vec<String> {
        match &self.census {
            Ok(c) => vec![
                fmt_f64(c.m),
                fmt_f64(c.gamma),
                regime_name(c.regime),
                tag(&c.count),
                fmt_opt(c.alpha_lo),
                fmt_opt(c.alpha_hi),
                c.rule.clone().unwrap_or_default(),
                c.note.clone().unwrap_or_default(),
                String::new(),
            ],
            Err(e) => vec![
                fmt_f64(self.m),
                fmt_f64(self.gamma),
                regime_name(Regime::of(self.m)),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ],
        }
    }
}

/// Axes of a sweep. Without an `alpha` axis each `(m, gamma)` point gets a
/// census instead of a single solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Grid {
    pub m: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Option<Vec<f64>>,
}

impl Grid {
    /// Parse `m=...;gamma=...[;alpha=...]`, each axis a comma list or
    /// `lo:hi:n` (inclusive, evenly spaced). Axes are sorted ascending.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut g = Grid::default();
        let (mut seen_m, mut seen_g) = (false, false);
        for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("grid axis '{part}' is not name=values")))?;
            let vals = parse_axis(values.trim())?;
            match name.trim() {
                "m" => (g.m, seen_m) = (vals, true),
                "gamma" => (g.gamma, seen_g) = (vals, true),
                "alpha" => g.alpha = Some(vals),
                other => return Err(Error::InvalidInput(format!("unknown grid axis '{other}'"))),
            }
        }
        if !(seen_m && seen_g) {
            return Err(Error::InvalidInput("grid needs both m and gamma axes".into()));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.m.len() * self.gamma.len() * self.alpha.as_ref().map_or(1, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.m
            .iter()
            .flat_map(|&m| self.gamma.iter().map(move |&g| (m, g)))
            .collect()
    }
}

fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| -> Result<f64> {
        let v: f64 = x
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("'{x}' is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!("'{x}' is not finite")))
        }
    };
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidInput(format!("range '{s}' must be lo:hi:n")));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("'{}' is not a count", parts[2])))?;
        if hi < lo {
            return Err(Error::InvalidInput(format!("range '{s}' has hi < lo")));
        }
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or_else(workers_from_env) {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))
}

/// Solve every `(m, gamma, alpha)` grid point; rows come back in
/// lexicographic grid order whatever the completion order.
pub fn sweep_points(grid: &Grid, opts: &SolveOptions, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    let alphas = grid
        .alpha
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("grid has no alpha axis".into()))?;
    let pts: Vec<(f64, f64, f64)> = grid
        .pairs()
        .into_iter()
        .flat_map(|(m, g)| alphas.iter().map(move |&a| (m, g, a)))
        .collect();
    let pool = pool(workers)?;
    Ok(pool.install(|| {
        pts.par_iter()
            .map(|&(m, gamma, alpha)| {
                let (rule, report) = match Params::new(m, gamma) {
                    Ok(p) => (nonexistence_rule(&p), solve_at(p, alpha, opts).map_err(|e| e.to_string())),
                    Err(e) => (None, Err(e.to_string())),
                };
                SweepRow {
                    m,
                    gamma,
                    alpha,
                    regime: Regime::of(m),
                    rule,
                    report,
                }
            })
            .collect()
    }))
}

/// Census of every `(m, gamma)` grid point, in grid order.
pub fn sweep_census(grid: &Grid, opts: &SolveOptions, workers: Option<usize>) -> Result<Vec<CensusRow>> {
    let pool = pool(workers)?;
    let pairs = grid.pairs();
    Ok(pool.install(|| {
        pairs
            .par_iter()
            .map(|&(m, gamma)| CensusRow {
                m,
                gamma,
                census: Params::new(m, gamma)
                    .and_then(|p| census(p, opts))
                    .map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(REPORT_HEADER).map_err(io_err)?;
    for r in rows {
        wr.write_record(r.record()).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

pub fn write_census_csv<W: Write>(rows: &[CensusRow], w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(CENSUS_HEADER).map_err(io_err)?;
    for r in rows {
        wr.write_record(r.record()).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// One report as a single-row CSV with the sweep header.
pub fn write_report_csv<W: Write>(report: &SolutionReport, w: W) -> Result<()> {
    let p = report.params;
    let row = SweepRow {
        m: p.m,
        gamma: p.gamma,
        alpha: report.alpha,
        regime: Regime::of(p.m),
        rule: nonexistence_rule(&p),
        report: Ok(report.clone()),
    };
    write_sweep_csv(std::slice::from_ref(&row), w)
}

/// Phase curve as `s,u,v`.
pub fn write_phase_csv<W: Write>(points: &[PhasePoint], w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["s", "u", "v"]).map_err(io_err)?;
    for p in points {
        wr.write_record([fmt_f64(p.s), fmt_f64(p.u), fmt_f64(p.v)]).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// Trajectory samples as `t,f,fp,fpp`.
pub fn write_trajectory_csv<W: Write>(states: &[crate::ode::State], w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["t", "f", "fp", "fpp"]).map_err(io_err)?;
    for s in states {
        wr.write_record([fmt_f64(s.t), fmt_f64(s.f), fmt_f64(s.fp), fmt_f64(s.fpp)])
            .map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// The bounded solution at `(m, gamma)`: the concave one for `m >= -1`,
/// the lower end of the admissible slopes below that.
pub fn shoot_bounded(p: Params, opts: &SolveOptions) -> Result<SolutionReport> {
    if let Some(rule) = nonexistence_rule(&p) {
        return Err(Error::Nonexistence(rule));
    }
    if p.m >= -1.0 - crate::regime::M_TOL {
        return shoot_concave(p, None, opts);
    }
    let iv = alpha_interval(p, opts)?;
    if iv.kind == IntervalKind::Empty {
        return Err(Error::Nonexistence(iv.note.unwrap_or_else(|| "no admissible f'(0)".into())));
    }
    solve_at(p, iv.lo, opts)
}

/// Everything needed to draw the phase portrait at one `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub m: f64,
    pub origin: Equilibrium,
    pub a: Equilibrium,
    pub layout: SectorLayout,
    pub separatrices: Vec<SeparatrixTrace>,
    /// `P = 0`: `v = 2u^2`, as `(u, v)`.
    pub p_isocline: Vec<(f64, f64)>,
    /// `Q_m = 0`, as `(u, v)`; the pole is skipped.
    pub q_isocline: Vec<(f64, f64)>,
    pub cycle: Option<CycleReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitOptions {
    /// Arc length in `s` followed along each separatrix.
    pub s_max: f64,
    pub u_range: (f64, f64),
    pub samples: usize,
    pub cycle_probe: bool,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        Self {
            s_max: 50.0,
            u_range: (-3.0, 3.0),
            samples: 601,
            cycle_probe: false,
        }
    }
}

pub fn phase_portrait(m: f64, o: &PortraitOptions) -> Result<PhasePortrait> {
    if Regime::of(m) == Regime::MinusTwo {
        return Err(Error::Regime("m = -2: O is not a saddle-node and the portrait degenerates".into()));
    }
    if o.samples < 2 || !(o.u_range.0 < o.u_range.1) {
        return Err(Error::InvalidInput("need at least two samples over a non-empty u range".into()));
    }
    let layout = sector_layout(m)?;
    let (origin, a) = equilibria(m);
    let topts = TraceOptions {
        s_max: o.s_max,
        ..TraceOptions::default()
    };
    let separatrices = [Separatrix::S0, Separatrix::S1, Separatrix::S2]
        .par_iter()
        .map(|&w| trace_separatrix(m, w, None, &topts))
        .collect::<Result<Vec<_>>>()?;
    let us: Vec<f64> = (0..o.samples)
        .map(|i| o.u_range.0 + (o.u_range.1 - o.u_range.0) * i as f64 / (o.samples - 1) as f64)
        .collect();
    let p_isocline = us.iter().map(|&u| (u, 2.0 * u * u)).collect();
    let q_isocline = us
        .iter()
        .filter_map(|&u| isocline_psi(m, u).ok().filter(|v| v.is_finite()).map(|v| (u, v)))
        .collect();
    let cycle = if o.cycle_probe && Regime::of(m) == Regime::AboveOne {
        Some(limit_cycle_probe(m)?)
    } else {
        None
    };
    Ok(PhasePortrait {
        m,
        origin,
        a,
        layout,
        separatrices,
        p_isocline,
        q_isocline,
        cycle,
    })
}

pub fn write_equilibria_csv<W: Write>(pp: &PhasePortrait, w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["name", "u", "v", "kind", "re1", "im1", "re2", "im2"]).map_err(io_err)?;
    for (name, e) in [("O", &pp.origin), ("A", &pp.a)] {
        let z = e.eigenvalues;
        wr.write_record([
            name.to_string(),
            fmt_f64(e.location.0),
            fmt_f64(e.location.1),
            tag(&e.kind),
            fmt_f64(z[0].re),
            fmt_f64(z[0].im),
            fmt_f64(z[1].re),
            fmt_f64(z[1].im),
        ])
        .map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// All separatrix points as `curve,s,u,v`.
pub fn write_separatrices_csv<W: Write>(pp: &PhasePortrait, w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["curve", "s", "u", "v"]).map_err(io_err)?;
    for tr in &pp.separatrices {
        let name = format!("{:?}", tr.which);
        for q in &tr.points {
            wr.write_record([name.clone(), fmt_f64(q.s), fmt_f64(q.u), fmt_f64(q.v)]).map_err(io_err)?;
        }
    }
    wr.flush().map_err(io_err)
}

/// Separatrix crossings in the order they occur, as `curve,kind,s,u,v`.
pub fn write_crossings_csv<W: Write>(pp: &PhasePortrait, w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["curve", "kind", "s", "u", "v"]).map_err(io_err)?;
    for tr in &pp.separatrices {
        for c in &tr.crossings {
            let q = c.point;
            wr.write_record([format!("{:?}", tr.which), tag(&c.kind), fmt_f64(q.s), fmt_f64(q.u), fmt_f64(q.v)])
                .map_err(io_err)?;
        }
    }
    wr.flush().map_err(io_err)
}

/// Both isoclines as `curve,u,v` with curve `P` or `Q`.
pub fn write_isoclines_csv<W: Write>(pp: &PhasePortrait, w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["curve", "u", "v"]).map_err(io_err)?;
    for (name, pts) in [("P", &pp.p_isocline), ("Q", &pp.q_isocline)] {
        for &(u, v) in pts {
            wr.write_record([name.to_string(), fmt_f64(u), fmt_f64(v)]).map_err(io_err)?;
        }
    }
    wr.flush().map_err(io_err)
}

/// Return-map samples as `v0,v1,return_s`.
pub fn write_cycle_csv<W: Write>(c: &CycleReport, w: W) -> Result<()> {
    let mut wr = csv_writer(w);
    wr.write_record(["v0", "v1", "return_s"]).map_err(io_err)?;
    for r in &c.samples {
        wr.write_record([fmt_f64(r.v0), fmt_opt(r.v1), fmt_opt(r.return_s)]).map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

/// Tail analysis of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub report: SolutionReport,
    pub lambda: Option<LambdaLimit>,
    pub tail_fit: Option<TailFit>,
    pub decay_2_over_t: Option<DecayCheck>,
    /// Why a tail quantity was not computed.
    pub notes: Vec<String>,
}

/// Classify `(m, gamma, alpha)` on `[0, t_max]` and run whichever tail
/// analysis fits the verdict: the limit of bounded solutions, the growth
/// exponent of unbounded ones and `t f(t) -> 2` for concave-convex ones.
pub fn asymptote(p: Params, alpha: f64, opts: &SolveOptions) -> Result<AsymptoteReport> {
    let (report, traj) = solve_trajectory(p, alpha, opts)?;
    let mut out = AsymptoteReport {
        report,
        lambda: None,
        tail_fit: None,
        decay_2_over_t: None,
        notes: Vec::new(),
    };
    let c = out.report.classification.clone();
    if !c.is_accepted() {
        out.notes.push(format!("not a solution: {}", c.reason.clone().unwrap_or_else(|| c.shape.name().into())));
        return Ok(out);
    }
    match c.boundedness {
        Boundedness::Unbounded => match tail_exponent(&traj) {
            Ok(f) => out.tail_fit = Some(f),
            Err(e) => out.notes.push(format!("tail fit: {e}")),
        },
        _ => match lambda_limit_with(&traj, opts.eps_far) {
            Ok(l) => out.lambda = Some(l),
            Err(e) => out.notes.push(format!("limit: {e}")),
        },
    }
    if Regime::of(p.m) == Regime::AboveOne && c.shape == Shape::ConcaveConvex {
        match decay_check_2_over_t(&traj) {
            Ok(d) => out.decay_2_over_t = Some(d),
            Err(e) => out.notes.push(format!("2/t decay: {e}")),
        }
    }
    Ok(out)
}
