//! The similarity ODE `f''' + (m+2) f f'' - (2m+1) f'^2 = 0`, its initial
//! value problem `f(0) = -gamma, f'(0) = alpha, f''(0) = -1`, and the
//! trajectory data model produced by adaptive integration.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::dopri::{self, DenseSegment, DriveEnd, StepFailure, StepOptions};
use crate::error::{Error, Result};

/// Default far-field threshold on `|f'|` and `|f''|`.
pub const EPS_FAR: f64 = 1e-6;
pub const DEFAULT_T_MAX: f64 = 50.0;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e8;
/// Absolute resolution of event times on the dense output.
pub const EVENT_TOL: f64 = 1e-12;

/// A problem instance: power-law exponent `m` and mass-transfer parameter
/// `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub m: f64,
    pub gamma: f64,
}

impl Params {
    pub fn new(m: f64, gamma: f64) -> Result<Self> {
        if !m.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "parameters must be finite (m={m}, gamma={gamma})"
            )));
        }
        Ok(Self { m, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

impl State {
    pub fn from_vec(t: f64, y: [f64; 3]) -> Self {
        Self {
            t,
            f: y[0],
            fp: y[1],
            fpp: y[2],
        }
    }

    pub fn to_vec(&self) -> [f64; 3] {
        [self.f, self.fp, self.fpp]
    }

    pub fn max_abs(&self) -> f64 {
        self.f.abs().max(self.fp.abs()).max(self.fpp.abs())
    }
}

/// `f'''` from the ODE.
pub fn rhs(s: &State, p: &Params) -> f64 {
    third_derivative(p.m, s.f, s.fp, s.fpp)
}

#[inline]
pub(crate) fn third_derivative(m: f64, f: f64, fp: f64, fpp: f64) -> f64 {
    -(m + 2.0) * f * fpp + (2.0 * m + 1.0) * fp * fp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FZero,
    FpZero,
    FppZero,
}

impl EventKind {
    pub const ALL: [EventKind; 3] = [EventKind::FZero, EventKind::FpZero, EventKind::FppZero];

    fn component(self) -> usize {
        match self {
            EventKind::FZero => 0,
            EventKind::FpZero => 1,
            EventKind::FppZero => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::FZero => "f_zero",
            EventKind::FpZero => "fp_zero",
            EventKind::FppZero => "fpp_zero",
        }
    }
}

/// A set of event kinds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSet {
    pub f_zero: bool,
    pub fp_zero: bool,
    pub fpp_zero: bool,
}

impl EventSet {
    pub const NONE: EventSet = EventSet {
        f_zero: false,
        fp_zero: false,
        fpp_zero: false,
    };
    pub const ALL: EventSet = EventSet {
        f_zero: true,
        fp_zero: true,
        fpp_zero: true,
    };

    pub fn only(kinds: &[EventKind]) -> Self {
        let mut s = Self::NONE;
        for k in kinds {
            s.insert(*k);
        }
        s
    }

    pub fn insert(&mut self, k: EventKind) {
        match k {
            EventKind::FZero => self.f_zero = true,
            EventKind::FpZero => self.fp_zero = true,
            EventKind::FppZero => self.fpp_zero = true,
        }
    }

    pub fn contains(&self, k: EventKind) -> bool {
        match k {
            EventKind::FZero => self.f_zero,
            EventKind::FpZero => self.fp_zero,
            EventKind::FppZero => self.fpp_zero,
        }
    }

    pub fn kinds(&self) -> impl Iterator<Item = EventKind> + '_ {
        EventKind::ALL.into_iter().filter(|k| self.contains(*k))
    }
}

/// A located zero crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    pub state: State,
    /// The watched component goes from negative to positive.
    pub rising: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedTMax,
    BlowupAt { t: f64 },
    EventStop { event: EventKind, t: f64 },
    /// Ended by a caller-supplied rule at a step boundary.
    Stopped { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// Numerical realization of the initial value problem with `f'(0) = alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvpSpec {
    pub params: Params,
    pub alpha: f64,
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub blowup_bound: f64,
    pub events: EventSet,
    pub stop_on: EventSet,
    pub direction: Direction,
}

impl IvpSpec {
    pub fn new(params: Params, alpha: f64) -> Self {
        Self {
            params,
            alpha,
            t_max: DEFAULT_T_MAX,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
            events: EventSet::ALL,
            stop_on: EventSet::NONE,
            direction: Direction::Forward,
        }
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn stopping_on(mut self, kinds: &[EventKind]) -> Self {
        self.stop_on = EventSet::only(kinds);
        for k in kinds {
            self.events.insert(*k);
        }
        self
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    pub fn initial_state(&self) -> State {
        State {
            t: 0.0,
            f: -self.params.gamma,
            fp: self.alpha,
            fpp: -1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max must be positive and finite, got {}", self.t_max));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad(format!(
                "tolerances must be positive (rel_tol={}, abs_tol={})",
                self.rel_tol, self.abs_tol
            ));
        }
        if !(self.blowup_bound > 0.0) {
            return bad(format!("blowup_bound must be positive, got {}", self.blowup_bound));
        }
        if !self.alpha.is_finite() {
            return bad(format!("alpha must be finite, got {}", self.alpha));
        }
        Params::new(self.params.m, self.params.gamma).map(|_| ())
    }

    fn step_options(&self) -> StepOptions {
        StepOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            initial_step: 1e-4 / (1.0 + self.alpha.abs() + self.params.gamma.abs()),
            min_step: 1e-14,
            ..StepOptions::default()
        }
    }
}

/// Adaptively integrated orbit of `(f, f', f'')`.
///
/// States are ordered in the direction of integration (increasing `t` for
/// forward runs). The dense output of every accepted step is retained so the
/// orbit can be evaluated and integrated between steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    pub alpha: f64,
    pub termination: Termination,
    pub events: Vec<Event>,
    pub states: Vec<State>,
    #[serde(skip)]
    segments: Vec<DenseSegment<3>>,
}

impl Trajectory {
    pub fn first(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn t_end(&self) -> f64 {
        self.last().t
    }

    pub fn is_forward(&self) -> bool {
        self.t_end() >= self.first().t
    }

    /// Closed range of `t` covered by the trajectory.
    pub fn t_range(&self) -> (f64, f64) {
        let (a, b) = (self.first().t, self.t_end());
        (a.min(b), a.max(b))
    }

    pub fn has_dense_output(&self) -> bool {
        !self.segments.is_empty() || self.states.len() == 1
    }

    pub fn segments(&self) -> &[DenseSegment<3>] {
        &self.segments
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// State at `t` from the dense output.
    pub fn eval(&self, t: f64) -> Result<State> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        if self.segments.is_empty() {
            return Ok(*self.first());
        }
        let idx = self.segment_index(t);
        Ok(State::from_vec(t, self.segments[idx].eval(t)))
    }

    fn segment_index(&self, t: f64) -> usize {
        let fwd = self.is_forward();
        let idx = self.segments.partition_point(|s| if fwd { s.t1 < t } else { s.t1 > t });
        idx.min(self.segments.len() - 1)
    }

    /// Panels `(a, b)` with `a < b` following the step structure and clipped
    /// to `[lo, hi]`.
    pub fn panels(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .segments
            .iter()
            .filter_map(|s| {
                let a = s.lo().max(lo);
                let b = s.hi().min(hi);
                (b > a).then_some((a, b))
            })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// True when `|f'|` and `|f''|` are both below `eps` at the end.
    pub fn far_field_converged(&self, eps: f64) -> bool {
        let s = self.last();
        matches!(self.termination, Termination::ReachedTMax) && s.fp.abs() < eps && s.fpp.abs() < eps
    }
}

/// What a stopping rule gets to look at during integration.
#[derive(Debug, Clone, Copy)]
pub enum Observation<'a> {
    /// A located event, reported in chronological order.
    Event(&'a Event),
    /// The state at the end of an accepted step, after that step's events.
    Step(&'a State),
}

/// Integrate the IVP described by `spec`.
pub fn integrate(spec: &IvpSpec) -> Result<Trajectory> {
    let stop_on = spec.stop_on;
    integrate_with(spec, |obs| matches!(obs, Observation::Event(e) if stop_on.contains(e.kind)))
}

/// Integrate with a custom stopping rule. Returning `true` ends the run:
/// at the event time for events, at the step end for steps.
pub fn integrate_with<F>(spec: &IvpSpec, mut stop: F) -> Result<Trajectory>
where
    F: FnMut(Observation<'_>) -> bool,
{
    spec.validate()?;
    let m = spec.params.m;
    let sys = move |_t: f64, y: &[f64; 3]| [y[1], y[2], third_derivative(m, y[0], y[1], y[2])];
    let init = spec.initial_state();
    let t_end = match spec.direction {
        Direction::Forward => spec.t_max,
        Direction::Backward => -spec.t_max,
    };

    let mut states = vec![init];
    let mut events: Vec<Event> = Vec::new();
    let mut segments: Vec<DenseSegment<3>> = Vec::new();
    let mut termination = Termination::ReachedTMax;
    let watched: Vec<EventKind> = spec.events.kinds().collect();
    let bound = spec.blowup_bound;

    let end = dopri::drive(&sys, 0.0, init.to_vec(), t_end, &spec.step_options(), |seg| {
        segments.push(*seg);
        let mut found: Vec<Event> = watched
            .iter()
            .filter_map(|&k| locate_event(seg, k))
            .collect();
        found.sort_by(|a, b| {
            let (x, y) = if seg.t1 > seg.t0 { (a.t, b.t) } else { (b.t, a.t) };
            x.total_cmp(&y)
        });
        for ev in found {
            let halt = stop(Observation::Event(&ev));
            events.push(ev);
            if halt {
                if ev.t != states.last().unwrap().t {
                    states.push(ev.state);
                }
                termination = Termination::EventStop {
                    event: ev.kind,
                    t: ev.t,
                };
                return ControlFlow::Break(());
            }
        }
        let s = State::from_vec(seg.t1, seg.y1);
        states.push(s);
        if s.max_abs() > bound {
            termination = Termination::BlowupAt { t: seg.t1 };
            return ControlFlow::Break(());
        }
        if stop(Observation::Step(&s)) {
            termination = Termination::Stopped { t: seg.t1 };
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });

    match end {
        DriveEnd::Reached | DriveEnd::Stopped => {}
        DriveEnd::Failed(StepFailure::StepTooSmall { t }) | DriveEnd::Failed(StepFailure::NonFinite { t }) => {
            // Stiff divergence is treated as blow-up.
            termination = Termination::BlowupAt { t };
        }
        DriveEnd::Failed(StepFailure::StepBudget { t }) => {
            return Err(Error::StepBudget { t });
        }
    }

    Ok(Trajectory {
        params: spec.params,
        alpha: spec.alpha,
        termination,
        events,
        states,
        segments,
    })
}

fn locate_event(seg: &DenseSegment<3>, kind: EventKind) -> Option<Event> {
    let i = kind.component();
    let g0 = seg.y0[i];
    let g1 = seg.y1[i];
    if g0 == 0.0 {
        // Already reported at the previous step end (or the initial point).
        return None;
    }
    let t = if g1 == 0.0 {
        seg.t1
    } else if (g0 > 0.0) != (g1 > 0.0) {
        let tol = EVENT_TOL.max(4.0 * f64::EPSILON * seg.t1.abs());
        dopri::bisect_root(|t| seg.eval(t)[i], seg.t0, seg.t1, g0, tol)
    } else {
        return None;
    };
    let y = if t == seg.t1 { seg.y1 } else { seg.eval(t) };
    Some(Event {
        kind,
        t,
        state: State::from_vec(t, y),
        rising: g0 < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64, gamma: f64) -> Params {
        Params::new(m, gamma).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let zero = State::from_vec(0.0, [0.0, 0.0, 0.0]);
        assert_eq!(rhs(&zero, &p(0.7, 1.0)), 0.0);
        let s = State::from_vec(0.0, [1.0, 1.0, 1.0]);
        assert_eq!(rhs(&s, &p(1.0, 0.0)), 0.0);
        let s = State::from_vec(0.0, [5.0, 2.0, 7.0]);
        assert_eq!(rhs(&s, &p(-2.0, 0.0)), -12.0);
    }

    #[test]
    fn rejects_invalid_specs() {
        let base = IvpSpec::new(p(0.0, 0.0), 1.0);
        assert!(integrate(&base.clone().with_t_max(0.0)).is_err());
        assert!(integrate(&base.clone().with_t_max(-1.0)).is_err());
        assert!(integrate(&base.clone().with_tolerances(0.0, 1e-12)).is_err());
        assert!(integrate(&base.clone().with_tolerances(1e-8, -1.0)).is_err());
        assert!(Params::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn initial_state_follows_boundary_conditions() {
        let spec = IvpSpec::new(p(-3.0, 2.5), 0.4);
        let traj = integrate(&spec.with_t_max(1.0)).unwrap();
        let s = traj.first();
        assert_eq!((s.t, s.f, s.fp, s.fpp), (0.0, -2.5, 0.4, -1.0));
    }

    #[test]
    fn states_strictly_increasing() {
        let traj = integrate(&IvpSpec::new(p(0.5, -0.3), 0.8)).unwrap();
        assert!(traj.states.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn exact_bounded_slope_decays_at_m_minus_one() {
        let traj = integrate(&IvpSpec::new(p(-1.0, -1.0), 1.0).with_t_max(30.0)).unwrap();
        assert_eq!(traj.termination, Termination::ReachedTMax);
        assert!(traj.last().fp.abs() < 1e-6);
    }

    #[test]
    fn slope_below_threshold_makes_fp_vanish() {
        let traj = integrate(&IvpSpec::new(p(-1.0, -1.0), 0.5)).unwrap();
        let ev = traj.events_of(EventKind::FpZero).next().expect("f' must vanish");
        assert!(ev.state.fp.abs() < 1e-9);
        assert!(!ev.rising);
    }

    #[test]
    fn event_stop_truncates() {
        let spec = IvpSpec::new(p(-1.0, -1.0), 0.5).stopping_on(&[EventKind::FpZero]);
        let traj = integrate(&spec).unwrap();
        match traj.termination {
            Termination::EventStop { event, t } => {
                assert_eq!(event, EventKind::FpZero);
                assert_eq!(traj.t_end(), t);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn event_times_are_sharp() {
        let traj = integrate(&IvpSpec::new(p(-1.0, -1.0), 0.5)).unwrap();
        for e in &traj.events {
            let s = traj.eval(e.t).unwrap();
            let g = match e.kind {
                EventKind::FZero => s.f,
                EventKind::FpZero => s.fp,
                EventKind::FppZero => s.fpp,
            };
            let slope = match e.kind {
                EventKind::FZero => s.fp,
                EventKind::FpZero => s.fpp,
                EventKind::FppZero => rhs(&s, &traj.params),
            };
            assert!(g.abs() <= 1e-11 * (1.0 + slope.abs()), "{e:?}");
        }
    }

    #[test]
    fn blowup_is_detected() {
        // m = -2 has f''' = -3 f'^2 so f'' and f' run off to -infinity.
        let traj = integrate(&IvpSpec::new(p(-2.0, 0.3), 1.0).with_t_max(1e3)).unwrap();
        match traj.termination {
            Termination::BlowupAt { t } => {
                assert!(t < 1e3);
                let s = traj.last();
                assert!(s.max_abs() > 1e8 || t == s.t);
            }
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn backward_integration_runs_to_negative_times() {
        let spec = IvpSpec::new(p(0.0, 0.0), 0.7).with_t_max(2.0).backward();
        let traj = integrate(&spec).unwrap();
        assert!(traj.states.windows(2).all(|w| w[1].t < w[0].t));
        assert_eq!(traj.t_end(), -2.0);
        let mid = traj.eval(-1.0).unwrap();
        assert!(mid.f < 0.0);
    }

    #[test]
    fn eval_out_of_range() {
        let traj = integrate(&IvpSpec::new(p(0.0, 0.0), 0.7).with_t_max(2.0)).unwrap();
        assert!(matches!(traj.eval(3.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn dense_output_matches_state_at_nodes() {
        let traj = integrate(&IvpSpec::new(p(1.0, 0.0), 0.69)).unwrap();
        for s in traj.states.iter().skip(1).step_by(7) {
            let e = traj.eval(s.t).unwrap();
            assert!((e.f - s.f).abs() < 1e-13 && (e.fpp - s.fpp).abs() < 1e-13);
        }
    }
}
