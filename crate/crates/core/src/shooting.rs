//! Shooting on `alpha = f'(0)`: classification of integrated orbits,
//! bisection for the concave solution, the admissible `alpha` set and the
//! critical `gamma*` by bisection on existence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{lambda_limit_with, LambdaLimit};
use crate::error::{Error, Result};
use crate::identities::{residuals, IdentityResiduals};
use crate::ode::{
    integrate_with, Event, EventKind, EventSet, IvpSpec, Observation, Params, State, Termination, Trajectory,
    DEFAULT_ABS_TOL, DEFAULT_REL_TOL, DEFAULT_T_MAX, EPS_FAR,
};
use crate::regime::{self, concavity_locked, Regime};

/// Width below which an `alpha` bracket counts as converged.
pub const ALPHA_TOL: f64 = 1e-10;
/// Resolution of the endpoints returned by [`alpha_interval`].
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Resolution of [`gamma_star_shooting`].
pub const GAMMA_TOL: f64 = 1e-7;
/// Number of points in the initial `alpha` grid.
pub const GRID_POINTS: usize = 64;
/// Event and domain-test floor used by boundary searches.
const STRICT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub eps_far: f64,
    /// How many times an indeterminate verdict may double the horizon.
    pub horizon_doublings: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            eps_far: EPS_FAR,
            horizon_doublings: 1,
        }
    }
}

impl SolveOptions {
    pub fn spec(&self, p: Params, alpha: f64) -> IvpSpec {
        IvpSpec::new(p, alpha)
            .with_t_max(self.t_max)
            .with_tolerances(self.rel_tol, self.abs_tol)
    }

    /// Horizon used by bisection predicates and boundary searches.
    pub fn search_horizon(&self) -> f64 {
        4.0 * self.t_max
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Concave,
    ConcaveConvex,
    RejectedFpVanishes,
    RejectedBlowup,
    RejectedDivergentFp,
    /// The horizon ended before the orbit committed to a verdict.
    RejectedIndeterminate,
}

impl Shape {
    pub fn is_accepted(self) -> bool {
        matches!(self, Shape::Concave | Shape::ConcaveConvex)
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Concave => "concave",
            Shape::ConcaveConvex => "concave_convex",
            Shape::RejectedFpVanishes => "rejected_fp_vanishes",
            Shape::RejectedBlowup => "rejected_blowup",
            Shape::RejectedDivergentFp => "rejected_divergent_fp",
            Shape::RejectedIndeterminate => "rejected_indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundedness {
    Bounded { lambda: f64 },
    Unbounded,
    NotApplicable,
}

impl Boundedness {
    pub fn name(&self) -> &'static str {
        match self {
            Boundedness::Bounded { .. } => "bounded",
            Boundedness::Unbounded => "unbounded",
            Boundedness::NotApplicable => "not_applicable",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Boundedness::Bounded { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

/// How an accepted verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// `|f'|` and `|f''|` below `eps_far` at the horizon.
    FarField,
    /// Algebraic tail whose derivative signs can no longer change.
    SignCertificate,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub shape: Shape,
    pub boundedness: Boundedness,
    pub evidence: Evidence,
    pub reason: Option<String>,
}

impl Classification {
    fn rejected(shape: Shape, reason: String) -> Self {
        Self {
            shape,
            boundedness: Boundedness::NotApplicable,
            evidence: Evidence::None,
            reason: Some(reason),
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.shape.is_accepted()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Concave,
    Convex { t0: f64 },
}

/// Incremental classifier, fed events and steps as the orbit is integrated
/// so that decisive rejections can stop the run early.
#[derive(Debug, Clone)]
pub struct Classifier {
    m: f64,
    floor: f64,
    eps_far: f64,
    phase: Phase,
    verdict: Option<(Shape, f64, String)>,
}

impl Classifier {
    /// Events where the other derivative is below `eps_far` are treated as
    /// numerical noise around a converged tail.
    pub fn new(m: f64, eps_far: f64) -> Self {
        Self {
            m,
            floor: eps_far,
            eps_far,
            phase: Phase::Concave,
            verdict: None,
        }
    }

    /// Every sign change counts. Used to locate accept/reject boundaries.
    pub fn strict(m: f64, eps_far: f64) -> Self {
        Self {
            floor: STRICT_FLOOR,
            ..Self::new(m, eps_far)
        }
    }

    /// Time of a decisive rejection, if one was seen.
    pub fn rejected_at(&self) -> Option<f64> {
        self.verdict.as_ref().map(|v| v.1)
    }

    pub fn observe(&mut self, obs: Observation<'_>) -> bool {
        if self.verdict.is_none() {
            match obs {
                Observation::Event(e) => self.on_event(e),
                Observation::Step(s) => self.on_step(s),
            }
        }
        self.verdict.is_some()
    }

    fn reject(&mut self, shape: Shape, t: f64, reason: String) {
        self.verdict = Some((shape, t, reason));
    }

    fn on_event(&mut self, e: &Event) {
        let s = &e.state;
        let m = self.m;
        match (self.phase, e.kind) {
            (Phase::Concave, EventKind::FpZero) => {
                if s.fpp.abs() > self.floor && concavity_locked(m) {
                    self.reject(
                        Shape::RejectedFpVanishes,
                        e.t,
                        format!("f' vanishes at t={:.6} while f'' < 0", e.t),
                    );
                }
            }
            (Phase::Concave, EventKind::FZero) => {
                if Regime::of(m) == Regime::BelowMinusTwo {
                    self.reject(
                        Shape::RejectedDivergentFp,
                        e.t,
                        format!("f changes sign at t={:.6}; solutions are negative for m < -2", e.t),
                    );
                }
            }
            (Phase::Concave, EventKind::FppZero) => {
                if s.fp.abs() > self.floor {
                    if Regime::of(m) == Regime::AboveOne && s.fp < 0.0 && s.f > 0.0 {
                        self.phase = Phase::Convex { t0: e.t };
                    } else if s.fp < 0.0 && s.f > 0.0 {
                        self.reject(
                            Shape::RejectedFpVanishes,
                            e.t,
                            format!("f'' vanishes at t={:.6} with f' < 0; concave-convex solutions need m > 1", e.t),
                        );
                    } else if s.fp > 0.0 {
                        self.reject(
                            Shape::RejectedDivergentFp,
                            e.t,
                            format!("f'' vanishes at t={:.6} while f' > 0", e.t),
                        );
                    } else {
                        self.reject(
                            Shape::RejectedFpVanishes,
                            e.t,
                            format!("f'' vanishes at t={:.6} with f' < 0 and f <= 0", e.t),
                        );
                    }
                }
            }
            (Phase::Convex { .. }, EventKind::FpZero) => {
                if s.fpp.abs() > self.floor {
                    self.reject(
                        Shape::RejectedDivergentFp,
                        e.t,
                        format!("f' turns positive at t={:.6} after the inflection", e.t),
                    );
                }
            }
            (Phase::Convex { .. }, EventKind::FZero) => {
                self.reject(
                    Shape::RejectedDivergentFp,
                    e.t,
                    format!("f vanishes at t={:.6} after the inflection", e.t),
                );
            }
            (Phase::Convex { .. }, EventKind::FppZero) => {
                if s.fp.abs() > self.floor {
                    self.reject(
                        Shape::RejectedDivergentFp,
                        e.t,
                        format!("second inflection at t={:.6}", e.t),
                    );
                }
            }
        }
    }

    fn on_step(&mut self, s: &State) {
        if let Phase::Convex { .. } = self.phase {
            if let Some(why) = convex_domain_violation(self.m, s, self.floor) {
                self.reject(Shape::RejectedDivergentFp, s.t, why);
            }
        }
    }

    /// Final verdict for a trajectory whose every event and step was observed.
    pub fn finish(&self, traj: &Trajectory) -> Classification {
        if let Some((shape, _, reason)) = &self.verdict {
            return Classification::rejected(*shape, reason.clone());
        }
        let s = *traj.last();
        let eps = self.eps_far;
        match traj.termination {
            Termination::BlowupAt { t } => {
                return Classification::rejected(Shape::RejectedBlowup, format!("blow-up at t={t:.6}"));
            }
            Termination::EventStop { .. } | Termination::Stopped { .. } => {
                return Classification::rejected(
                    Shape::RejectedIndeterminate,
                    "integration stopped before a verdict".into(),
                );
            }
            Termination::ReachedTMax => {}
        }
        let far = s.fp.abs() < eps && s.fpp.abs() < eps;
        let m = self.m;
        match self.phase {
            Phase::Concave => {
                if far {
                    self.accept(Shape::Concave, Evidence::FarField, traj)
                } else if m < -0.5 - regime::M_TOL && s.fp > 0.0 && s.fpp < 0.0 {
                    self.accept(Shape::Concave, Evidence::SignCertificate, traj)
                } else if s.fp < 0.0 {
                    Classification::rejected(
                        Shape::RejectedFpVanishes,
                        format!("f' = {:.3e} < 0 at the horizon", s.fp),
                    )
                } else if s.fpp >= 0.0 || (!(m < -0.5 - regime::M_TOL) && s.fpp.abs() < eps) {
                    Classification::rejected(
                        Shape::RejectedDivergentFp,
                        format!("f' = {:.3e} stays positive with f'' = {:.3e}", s.fp, s.fpp),
                    )
                } else {
                    Classification::rejected(
                        Shape::RejectedIndeterminate,
                        format!("f' = {:.3e} still decreasing at t = {}", s.fp, s.t),
                    )
                }
            }
            Phase::Convex { .. } => {
                if far || (s.f > 0.0 && s.fp < 0.0 && s.fpp > 0.0) {
                    let ev = if far { Evidence::FarField } else { Evidence::SignCertificate };
                    self.accept(Shape::ConcaveConvex, ev, traj)
                } else {
                    Classification::rejected(
                        Shape::RejectedIndeterminate,
                        "convex tail without a definite sign pattern".into(),
                    )
                }
            }
        }
    }

    fn accept(&self, shape: Shape, evidence: Evidence, traj: &Trajectory) -> Classification {
        Classification {
            shape,
            boundedness: boundedness(traj, self.eps_far),
            evidence,
            reason: None,
        }
    }
}

/// Bounded decreasing tails after the inflection satisfy
/// `f'' + (m+2) f f' < 0` and `f' + (m+2) f^2 / 2 > 0`.
fn convex_domain_violation(m: f64, s: &State, floor: f64) -> Option<String> {
    let a = s.fpp + (m + 2.0) * s.f * s.fp;
    if a > floor {
        return Some(format!("f'' + (m+2) f f' = {a:.3e} > 0 at t={:.6}", s.t));
    }
    let b = s.fp + 0.5 * (m + 2.0) * s.f * s.f;
    if b < -floor {
        return Some(format!("f' + (m+2) f^2/2 = {b:.3e} < 0 at t={:.6}", s.t));
    }
    None
}

fn boundedness(traj: &Trajectory, eps: f64) -> Boundedness {
    let s = traj.last();
    if traj.far_field_converged(eps) {
        let mid = traj.eval(0.5 * traj.t_end()).map(|x| x.f).unwrap_or(f64::NAN);
        // Algebraic growth needs m < -1/2; above that a converged tail is a
        // finite limit even when f still creeps at the tolerance level.
        let no_growth = traj.params.m >= -0.5 - regime::M_TOL;
        if no_growth || (s.f - mid).abs() < 10.0 * eps {
            return match lambda_limit_with(traj, eps) {
                Ok(LambdaLimit::Finite { lambda }) => Boundedness::Bounded { lambda },
                Ok(LambdaLimit::Divergent) => Boundedness::Unbounded,
                Err(_) => Boundedness::NotApplicable,
            };
        }
    }
    if s.f > 0.0 && s.fp > 0.0 {
        Boundedness::Unbounded
    } else if s.f * s.fp < 0.0 {
        // Monotone decay of |f| towards zero.
        Boundedness::Bounded { lambda: 0.0 }
    } else {
        Boundedness::NotApplicable
    }
}

/// Classify a trajectory from its recorded events, states and termination.
pub fn classify(traj: &Trajectory) -> Classification {
    classify_with(traj, EPS_FAR)
}

pub fn classify_with(traj: &Trajectory, eps_far: f64) -> Classification {
    let mut c = Classifier::new(traj.params.m, eps_far);
    let mut ev = traj.events.iter().peekable();
    for s in traj.states.iter().skip(1) {
        while let Some(e) = ev.next_if(|e| e.t <= s.t) {
            c.observe(Observation::Event(e));
        }
        c.observe(Observation::Step(s));
    }
    for e in ev {
        c.observe(Observation::Event(e));
    }
    c.finish(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub params: Params,
    pub alpha: f64,
    pub classification: Classification,
    pub lambda_est: Option<f64>,
    /// `|f'|` at the end of the integration.
    pub residual_far: f64,
    pub identity_residuals: IdentityResiduals,
    /// Horizon actually used, after any doubling.
    pub t_max: f64,
    pub termination: Termination,
}

impl SolutionReport {
    pub fn is_accepted(&self) -> bool {
        self.classification.is_accepted()
    }
}

/// Integrate and classify a single `alpha`, doubling the horizon when the
/// verdict is indeterminate.
pub fn solve_at(p: Params, alpha: f64, opts: &SolveOptions) -> Result<SolutionReport> {
    Ok(solve_trajectory(p, alpha, opts)?.0)
}

/// Like [`solve_at`] but also hands back the final trajectory.
pub fn solve_trajectory(p: Params, alpha: f64, opts: &SolveOptions) -> Result<(SolutionReport, Trajectory)> {
    let mut t_max = opts.t_max;
    let mut attempt = 0;
    loop {
        let spec = opts.spec(p, alpha).with_t_max(t_max);
        let mut c = Classifier::new(p.m, opts.eps_far);
        let traj = match integrate_with(&spec, |o| c.observe(o)) {
            Ok(t) => t,
            Err(Error::StepBudget { t }) => {
                return Err(Error::HorizonExhausted(format!(
                    "step budget exhausted at t={t} for m={}, gamma={}, alpha={alpha}",
                    p.m, p.gamma
                )))
            }
            Err(e) => return Err(e),
        };
        let classification = c.finish(&traj);
        let retry = classification.shape == Shape::RejectedIndeterminate
            && traj.termination == Termination::ReachedTMax
            && attempt < opts.horizon_doublings;
        if retry {
            attempt += 1;
            t_max *= 2.0;
            continue;
        }
        let (lo, hi) = traj.t_range();
        let identity_residuals = residuals(&traj, lo, hi)?;
        let report = SolutionReport {
            params: p,
            alpha,
            lambda_est: classification.boundedness.lambda(),
            classification,
            residual_far: traj.last().fp.abs(),
            identity_residuals,
            t_max,
            termination: traj.termination,
        };
        return Ok((report, traj));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FirstTurn {
    FpZero,
    FppZero,
    Neither,
}

fn first_turn(p: Params, alpha: f64, opts: &SolveOptions) -> Result<FirstTurn> {
    let mut spec = opts.spec(p, alpha).with_t_max(opts.search_horizon());
    spec.events = EventSet::only(&[EventKind::FpZero, EventKind::FppZero]);
    let traj = integrate_with(&spec, |o| matches!(o, Observation::Event(_)))?;
    Ok(match traj.events.first().map(|e| e.kind) {
        Some(EventKind::FpZero) => FirstTurn::FpZero,
        Some(EventKind::FppZero) => FirstTurn::FppZero,
        _ => FirstTurn::Neither,
    })
}

/// Bisection for the concave bounded solution. `alpha` is too small when
/// `f'` vanishes before `f''` does (or `alpha <= 0`), too large otherwise.
pub fn shoot_concave(p: Params, bracket: Option<(f64, f64)>, opts: &SolveOptions) -> Result<SolutionReport> {
    if p.m < -1.0 - regime::M_TOL {
        return Err(Error::Regime(format!("concave shooting needs m >= -1 (m={})", p.m)));
    }
    let too_small = |a: f64| -> Result<bool> { Ok(a <= 0.0 || first_turn(p, a, opts)? == FirstTurn::FpZero) };
    let (mut lo, mut hi) = match bracket {
        Some((a, b)) => {
            if !(too_small(a)? && !too_small(b)?) {
                return Err(Error::NoSignChange { lo: a, hi: b });
            }
            (a, b)
        }
        None => {
            let (mut a, mut b) = (0.0, 1.0);
            while too_small(b)? {
                a = b;
                b *= 2.0;
                if b > 1e8 {
                    return Err(Error::NoSignChange { lo: 0.0, hi: b });
                }
            }
            (a, b)
        }
    };
    while hi - lo > ALPHA_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if too_small(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Where the divergent mode is strongly amplified the far-field test
    // needs alpha well below ALPHA_TOL; keep halving down to rounding.
    loop {
        let alpha = 0.5 * (lo + hi);
        let report = solve_at(p, alpha, opts)?;
        if report.is_accepted() {
            return Ok(report);
        }
        if alpha <= lo || alpha >= hi {
            return Err(Error::HorizonExhausted(format!(
                "bisected alpha={alpha} classified as {} ({})",
                report.classification.shape.name(),
                report.classification.reason.clone().unwrap_or_default()
            )));
        }
        if too_small(alpha)? {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Empty,
    Singleton,
    Interval,
}

/// The set of `alpha` yielding solutions. `hi` is infinite for the
/// half-lines of unbounded solutions (serialized as `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
    pub kind: IntervalKind,
    /// Grid points probed inside `(lo, hi)` that were not accepted.
    pub interior_rejections: usize,
    pub note: Option<String>,
}

impl AlphaInterval {
    pub fn empty(note: impl Into<String>) -> Self {
        Self {
            lo: f64::NAN,
            hi: f64::NAN,
            kind: IntervalKind::Empty,
            interior_rejections: 0,
            note: Some(note.into()),
        }
    }

    fn singleton(a: f64) -> Self {
        Self {
            lo: a,
            hi: a,
            kind: IntervalKind::Singleton,
            interior_rejections: 0,
            note: None,
        }
    }

    pub fn width(&self) -> f64 {
        match self.kind {
            IntervalKind::Empty => 0.0,
            _ => self.hi - self.lo,
        }
    }

    pub fn contains(&self, a: f64) -> bool {
        self.kind != IntervalKind::Empty && a >= self.lo && a <= self.hi
    }
}

/// Outcome of a boundary-search probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub accepted: bool,
    /// When the orbit was rejected, or the horizon if it was not.
    pub decided_at: f64,
}

/// Strict classification of one `alpha` over the search horizon.
pub fn probe(p: Params, alpha: f64, opts: &SolveOptions) -> Probe {
    let horizon = opts.search_horizon();
    let spec = opts.spec(p, alpha).with_t_max(horizon);
    let mut c = Classifier::strict(p.m, opts.eps_far);
    match integrate_with(&spec, |o| c.observe(o)) {
        Ok(traj) => {
            let cl = c.finish(&traj);
            let decided_at = c.rejected_at().unwrap_or(match traj.termination {
                Termination::BlowupAt { t } => t,
                _ => horizon,
            });
            Probe {
                accepted: cl.is_accepted(),
                decided_at,
            }
        }
        Err(_) => Probe {
            accepted: false,
            decided_at: horizon,
        },
    }
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Bisect between an accepted and a rejected `alpha`.
fn refine_boundary(p: Params, accepted: f64, rejected: f64, opts: &SolveOptions) -> f64 {
    let (mut a, mut r) = (accepted, rejected);
    while (a - r).abs() > BOUNDARY_TOL {
        let mid = 0.5 * (a + r);
        if mid == a || mid == r {
            break;
        }
        if probe(p, mid, opts).accepted {
            a = mid;
        } else {
            r = mid;
        }
    }
    0.5 * (a + r)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Look for an accepted `alpha` on `grid`, then by golden-section search on
/// the rejection time around the latest-rejected grid point.
fn find_accepted(p: Params, grid: &[f64], opts: &SolveOptions) -> (Vec<Probe>, Option<f64>) {
    let probes: Vec<Probe> = grid.par_iter().map(|&a| probe(p, a, opts)).collect();
    if let Some(i) = probes.iter().position(|q| q.accepted) {
        return (probes, Some(grid[i]));
    }
    let best = (0..grid.len())
        .max_by(|&i, &j| probes[i].decided_at.total_cmp(&probes[j].decided_at))
        .unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut q1 = probe(p, x1, opts);
    if q1.accepted {
        return (probes, Some(x1));
    }
    let mut q2 = probe(p, x2, opts);
    if q2.accepted {
        return (probes, Some(x2));
    }
    for _ in 0..90 {
        if (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if q1.decided_at >= q2.decided_at {
            b = x2;
            x2 = x1;
            q2 = q1;
            x1 = b - GOLDEN * (b - a);
            q1 = probe(p, x1, opts);
            if q1.accepted {
                return (probes, Some(x1));
            }
        } else {
            a = x1;
            x1 = x2;
            q1 = q2;
            x2 = a + GOLDEN * (b - a);
            q2 = probe(p, x2, opts);
            if q2.accepted {
                return (probes, Some(x2));
            }
        }
    }
    (probes, None)
}

/// Build the interval around the accepted run of a probed grid.
fn interval_from_grid(
    p: Params,
    grid: &[f64],
    probes: &[Probe],
    seed: f64,
    below: f64,
    above: Option<f64>,
    opts: &SolveOptions,
) -> AlphaInterval {
    // Accepted run containing the seed, or the seed alone when it came from
    // the golden-section search between grid points.
    let (acc_lo, acc_hi, rej_lo, rej_hi) = match grid.iter().position(|&g| g == seed) {
        Some(k) => {
            let mut i = k;
            while i > 0 && probes[i - 1].accepted {
                i -= 1;
            }
            let mut j = k;
            while j + 1 < grid.len() && probes[j + 1].accepted {
                j += 1;
            }
            let rej_lo = if i > 0 { grid[i - 1] } else { below };
            (grid[i], grid[j], rej_lo, grid.get(j + 1).copied().or(above))
        }
        None => {
            let k = grid.partition_point(|&g| g < seed);
            let rej_lo = if k > 0 { grid[k - 1] } else { below };
            (seed, seed, rej_lo, grid.get(k).copied().or(above))
        }
    };
    let lo = refine_boundary(p, acc_lo, rej_lo, opts);
    let (hi, note) = match rej_hi {
        Some(r) => (refine_boundary(p, acc_hi, r, opts), None),
        None => (acc_hi, Some("upper end not bracketed by the scan".to_string())),
    };
    let interior_rejections = grid
        .iter()
        .zip(probes)
        .filter(|(g, q)| **g > lo && **g < hi && !q.accepted)
        .count();
    let kind = if hi - lo > 2.0 * BOUNDARY_TOL {
        IntervalKind::Interval
    } else {
        IntervalKind::Singleton
    };
    AlphaInterval {
        lo,
        hi,
        kind,
        interior_rejections,
        note,
    }
}

/// The set of `alpha` for which the orbit is a solution.
pub fn alpha_interval(p: Params, opts: &SolveOptions) -> Result<AlphaInterval> {
    if let Some(rule) = regime::nonexistence_rule(&p) {
        return Ok(AlphaInterval::empty(rule));
    }
    match Regime::of(p.m) {
        Regime::MinusTwo => unreachable!("covered by the nonexistence rule"),
        Regime::BelowMinusTwo => {
            let top = (0.5 * p.gamma).sqrt();
            let grid = log_grid(top * 1e-4, top, GRID_POINTS);
            let (probes, seed) = find_accepted(p, &grid, opts);
            Ok(match seed {
                Some(s) => interval_from_grid(p, &grid, &probes, s, 0.0, Some(top * (1.0 + 1e-6)), opts),
                None => AlphaInterval::empty("no accepted alpha found; gamma is below its critical value"),
            })
        }
        Regime::MinusTwoToMinusOne => {
            let lb = regime::alpha_lower_bound(&p);
            let mut top = 2.0 * lb;
            while probe(p, top, opts).accepted && top < lb * 1e6 {
                top *= 2.0;
            }
            let grid = log_grid(lb, top, GRID_POINTS);
            let (probes, seed) = find_accepted(p, &grid, opts);
            Ok(match seed {
                Some(s) => interval_from_grid(p, &grid, &probes, s, lb, None, opts),
                None => AlphaInterval::empty("no accepted alpha found; gamma is above its critical value"),
            })
        }
        Regime::MinusOne => {
            let lo = shoot_concave(p, None, opts)?.alpha;
            Ok(AlphaInterval {
                lo,
                hi: f64::INFINITY,
                kind: IntervalKind::Interval,
                interior_rejections: 0,
                note: Some("bounded at lo, unbounded above".into()),
            })
        }
        Regime::MinusOneToMinusHalf => {
            let lo = shoot_concave(p, None, opts)?.alpha;
            if solve_at(p, 2.0 * lo + 1.0, opts)?.is_accepted() {
                Ok(AlphaInterval {
                    lo,
                    hi: f64::INFINITY,
                    kind: IntervalKind::Interval,
                    interior_rejections: 0,
                    note: Some("bounded at lo, unbounded above".into()),
                })
            } else {
                Ok(AlphaInterval::singleton(lo))
            }
        }
        Regime::MinusHalfToOne => Ok(AlphaInterval::singleton(shoot_concave(p, None, opts)?.alpha)),
        Regime::AboveOne => {
            let top = shoot_concave(p, None, opts)?.alpha;
            let mut w = 0.05 * top.abs().max(1.0);
            while probe(p, top - w, opts).accepted {
                w *= 2.0;
                if w > 1e6 {
                    return Err(Error::NotFound("lower end of the concave-convex band".into()));
                }
            }
            let grid = lin_grid(top - w, top, GRID_POINTS);
            let probes: Vec<Probe> = grid.par_iter().map(|&a| probe(p, a, opts)).collect();
            let first = probes[..GRID_POINTS - 1].iter().position(|q| q.accepted);
            let lo = match first {
                Some(0) | None => refine_boundary(p, grid[GRID_POINTS - 2], grid[0], opts),
                Some(i) => refine_boundary(p, grid[i], grid[i - 1], opts),
            };
            let interior_rejections = grid
                .iter()
                .zip(&probes)
                .filter(|(g, q)| **g > lo && **g < top && !q.accepted)
                .count();
            Ok(AlphaInterval {
                lo,
                hi: top,
                kind: IntervalKind::Interval,
                interior_rejections,
                note: Some("concave solution at hi, concave-convex below".into()),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStarShooting {
    pub m: f64,
    pub gamma_star: f64,
    /// Final bracket `(no solution side, solution side)`.
    pub bracket: (f64, f64),
    pub iterations: u32,
}

/// Whether some `alpha` gives a solution for these parameters.
pub fn has_solution(p: Params, opts: &SolveOptions) -> bool {
    if regime::nonexistence_rule(&p).is_some() {
        return false;
    }
    let grid = match Regime::of(p.m) {
        Regime::BelowMinusTwo => {
            let top = (0.5 * p.gamma).sqrt();
            log_grid(top * 1e-4, top, GRID_POINTS)
        }
        Regime::MinusTwoToMinusOne => {
            let lb = regime::alpha_lower_bound(&p);
            log_grid(lb, 64.0 * lb, GRID_POINTS)
        }
        _ => return alpha_interval(p, opts).map(|i| i.kind != IntervalKind::Empty).unwrap_or(false),
    };
    find_accepted(p, &grid, opts).1.is_some()
}

/// Critical `gamma` by bisection on existence: solutions exist for
/// `gamma > gamma*` when `m < -2` and for `gamma < gamma*` when `-2 < m < -1`.
pub fn gamma_star_shooting(m: f64, opts: &SolveOptions) -> Result<GammaStarShooting> {
    let (mut none, mut some) = match Regime::of(m) {
        Regime::BelowMinusTwo => {
            let b = regime::lower_gamma_bound(m);
            (b, 10.0 * b)
        }
        Regime::MinusTwoToMinusOne => (0.0, -50.0),
        _ => {
            return Err(Error::Regime(format!(
                "gamma* is defined for m < -2 or -2 < m < -1 (m={m})"
            )))
        }
    };
    let exists = |g: f64| has_solution(Params { m, gamma: g }, opts);
    if !exists(some) {
        return Err(Error::NotFound(format!("no solution at the far end gamma={some} of the bracket")));
    }
    let mut iterations = 0;
    while (some - none).abs() > GAMMA_TOL {
        let mid = 0.5 * (none + some);
        if exists(mid) {
            some = mid;
        } else {
            none = mid;
        }
        iterations += 1;
    }
    Ok(GammaStarShooting {
        m,
        gamma_star: 0.5 * (none + some),
        bracket: (none, some),
        iterations,
    })
}
