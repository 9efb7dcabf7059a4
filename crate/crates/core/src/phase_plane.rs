//! The blown-up coordinates `s = ∫ f`, `u = f'/f^2`, `v = f''/f^3`, in which
//! the ODE becomes the planar autonomous system
//!
//! ```text
//! u' = P(u, v)   = v - 2u^2
//! v' = Q_m(u, v) = -(m+2) v + (2m+1) u^2 - 3uv
//! ```
//!
//! with equilibria `O = (0, 0)` (a saddle-node for `m != -2`) and
//! `A = (-1/2, 1/2)`.

use std::ops::ControlFlow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dopri::{self, DenseSegment, DriveEnd, StepOptions};
use crate::error::{Error, Result};
use crate::ode::{EventKind, Trajectory};
use crate::quadrature::gauss_legendre;
use crate::regime::{Regime, M_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub u: f64,
    pub v: f64,
}

/// `(P, Q_m)` at `(u, v)`.
pub fn vector_field(m: f64, u: f64, v: f64) -> (f64, f64) {
    (v - 2.0 * u * u, -(m + 2.0) * v + (2.0 * m + 1.0) * u * u - 3.0 * u * v)
}

/// The `Q_m = 0` isocline `v = (2m+1) u^2 / (3u + m + 2)`.
pub fn isocline_psi(m: f64, u: f64) -> Result<f64> {
    let den = 3.0 * u + m + 2.0;
    if den == 0.0 {
        return Err(Error::InvalidInput(format!("pole of the isocline at u={u} for m={m}")));
    }
    Ok((2.0 * m + 1.0) * u * u / den)
}

/// Slope `dv/du = Q_m / P` of phase curves.
pub fn slope_field(m: f64, u: f64, v: f64) -> Result<f64> {
    let (p, q) = vector_field(m, u, v);
    if p == 0.0 {
        return Err(Error::InvalidInput(format!("({u}, {v}) lies on the parabola v = 2u^2")));
    }
    Ok(q / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    UnstableNode,
    UnstableFocus,
    Center,
    StableFocus,
    StableNode,
    SaddleNode,
    /// Both eigenvalues vanish (`O` at `m = -2`).
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub location: (f64, f64),
    pub eigenvalues: [Complex64; 2],
    pub kind: EquilibriumKind,
}

/// Trace and discriminant (`trace^2 - 4 det`) of the Jacobian at `A`.
pub fn jacobian_a(m: f64) -> [[f64; 2]; 2] {
    [[2.0, 1.0], [-2.0 * m - 2.5, -m - 0.5]]
}

pub fn trace_det_a(m: f64) -> (f64, f64, f64) {
    let j = jacobian_a(m);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    (tr, det, tr * tr - 4.0 * det)
}

/// Thresholds on `m` separating node/focus/center behaviour at `A`.
pub fn a_thresholds() -> [f64; 3] {
    let r = 6f64.sqrt();
    [(3.0 - 2.0 * r) / 2.0, 1.5, (3.0 + 2.0 * r) / 2.0]
}

const KIND_TOL: f64 = 1e-12;

pub fn equilibria(m: f64) -> (Equilibrium, Equilibrium) {
    let o = Equilibrium {
        location: (0.0, 0.0),
        eigenvalues: [Complex64::new(0.0, 0.0), Complex64::new(-(m + 2.0), 0.0)],
        kind: if Regime::of(m) == Regime::MinusTwo {
            EquilibriumKind::Degenerate
        } else {
            EquilibriumKind::SaddleNode
        },
    };
    let (tr, _, disc) = trace_det_a(m);
    let root = Complex64::new(disc, 0.0).sqrt();
    let half = Complex64::new(0.5 * tr, 0.0);
    let kind = if disc >= -KIND_TOL {
        if tr > 0.0 {
            EquilibriumKind::UnstableNode
        } else {
            EquilibriumKind::StableNode
        }
    } else if tr.abs() <= KIND_TOL {
        EquilibriumKind::Center
    } else if tr > 0.0 {
        EquilibriumKind::UnstableFocus
    } else {
        EquilibriumKind::StableFocus
    };
    let a = Equilibrium {
        location: (-0.5, 0.5),
        eigenvalues: [half + 0.5 * root, half - 0.5 * root],
        kind,
    };
    (o, a)
}

/// Curve of the blown-up system with the times `t` it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurve {
    pub m: f64,
    pub tau: f64,
    pub points: Vec<PhasePoint>,
    pub times: Vec<f64>,
}

/// Push a trajectory through the blowing-up transform, starting at `tau` and
/// stopping before `f` vanishes. `s` is accumulated by Gauss–Legendre
/// quadrature of `f` on the dense output, so it decreases when `f < 0`.
pub fn blowup_transform(traj: &Trajectory, tau: f64) -> Result<PhaseCurve> {
    let start = traj.eval(tau)?;
    if start.f == 0.0 {
        return Err(Error::InvalidInput(format!("f vanishes at tau={tau}")));
    }
    let forward = traj.is_forward();
    let beyond = |t: f64| if forward { t > tau } else { t < tau };
    let t_stop = traj
        .events_of(EventKind::FZero)
        .map(|e| e.t)
        .find(|&t| beyond(t))
        .unwrap_or(traj.t_end());
    let mut times = vec![tau];
    times.extend(
        traj.states
            .iter()
            .map(|s| s.t)
            .filter(|&t| beyond(t) && if forward { t < t_stop } else { t > t_stop }),
    );
    let mut points = Vec::with_capacity(times.len());
    let mut s_acc = 0.0;
    let mut prev = tau;
    for &t in &times {
        if t != prev {
            s_acc += integrate_f(traj, prev, t);
            prev = t;
        }
        let st = traj.eval(t)?;
        points.push(PhasePoint {
            s: s_acc,
            u: st.fp / (st.f * st.f),
            v: st.fpp / (st.f * st.f * st.f),
        });
    }
    Ok(PhaseCurve {
        m: traj.params.m,
        tau,
        points,
        times,
    })
}

/// `∫_a^b f` over the step structure of the trajectory (signed).
fn integrate_f(traj: &Trajectory, a: f64, b: f64) -> f64 {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let total: f64 = traj
        .panels(lo, hi)
        .into_iter()
        .map(|(x, y)| gauss_legendre(|t| traj.eval(t).map(|s| s.f).unwrap_or(f64::NAN), x, y))
        .sum();
    sign * total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Stop once `|u| + |v|` exceeds this.
    pub escape_radius: f64,
    pub max_steps: usize,
}

impl Default for PlanarOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            escape_radius: 1e4,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitEnd {
    ReachedEnd,
    Escaped { s: f64 },
    Stopped { s: f64 },
    Failed { s: f64 },
}

/// Planar orbit with dense output in `s`.
#[derive(Debug, Clone)]
pub struct PlanarOrbit {
    pub m: f64,
    pub points: Vec<PhasePoint>,
    pub end: OrbitEnd,
    segments: Vec<DenseSegment<2>>,
}

impl PlanarOrbit {
    pub fn segments(&self) -> &[DenseSegment<2>] {
        &self.segments
    }

    pub fn s_range(&self) -> (f64, f64) {
        let a = self.points[0].s;
        let b = self.points.last().map(|p| p.s).unwrap_or(a);
        (a.min(b), a.max(b))
    }

    pub fn eval(&self, s: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.s_range();
        if !(s >= lo && s <= hi) {
            return None;
        }
        if self.segments.is_empty() {
            return Some((self.points[0].u, self.points[0].v));
        }
        let fwd = self.points.last().unwrap().s >= self.points[0].s;
        let idx = self
            .segments
            .partition_point(|g| if fwd { g.t1 < s } else { g.t1 > s })
            .min(self.segments.len() - 1);
        let y = self.segments[idx].eval(s);
        Some((y[0], y[1]))
    }
}

/// Integrate the planar system from `start` towards `s_end`. The callback
/// sees each accepted segment and may end the run.
pub fn integrate_planar<F>(m: f64, start: (f64, f64), s0: f64, s_end: f64, opts: &PlanarOptions, mut on_seg: F) -> PlanarOrbit
where
    F: FnMut(&DenseSegment<2>) -> bool,
{
    let sys = move |_s: f64, y: &[f64; 2]| {
        let (p, q) = vector_field(m, y[0], y[1]);
        [p, q]
    };
    let step = StepOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        initial_step: 1e-3,
        max_steps: opts.max_steps,
        ..StepOptions::default()
    };
    let mut points = vec![PhasePoint {
        s: s0,
        u: start.0,
        v: start.1,
    }];
    let mut segments = Vec::new();
    let mut end = OrbitEnd::ReachedEnd;
    let radius = opts.escape_radius;
    let result = dopri::drive(&sys, s0, [start.0, start.1], s_end, &step, |seg| {
        segments.push(*seg);
        points.push(PhasePoint {
            s: seg.t1,
            u: seg.y1[0],
            v: seg.y1[1],
        });
        if seg.y1[0].abs() + seg.y1[1].abs() > radius {
            end = OrbitEnd::Escaped { s: seg.t1 };
            return ControlFlow::Break(());
        }
        if on_seg(seg) {
            end = OrbitEnd::Stopped { s: seg.t1 };
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    if let DriveEnd::Failed(f) = result {
        let s = match f {
            dopri::StepFailure::StepTooSmall { t }
            | dopri::StepFailure::NonFinite { t }
            | dopri::StepFailure::StepBudget { t } => t,
        };
        end = OrbitEnd::Failed { s };
    }
    PlanarOrbit {
        m,
        points,
        end,
        segments,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Separatrix {
    S0,
    S1,
    S2,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentLine {
    /// `span{(1, -(m+2))}`
    L,
    /// `span{(1, 0)}`
    L0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
    On,
}

/// Position of the invariant manifolds through `O` relative to their
/// tangent lines, one row per `m`-interval of the saddle-node picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorLayout {
    /// The manifold `W = S0 ∪ O ∪ S1` relative to `L`.
    pub w_side: Side,
    /// The centre manifold `S2 ∪ O ∪ C3` relative to `L0`.
    pub center_side: Side,
    /// `W` is the unstable manifold of `O` (else stable).
    pub w_unstable: bool,
}

pub fn sector_layout(m: f64) -> Result<SectorLayout> {
    let near = |x: f64| (m - x).abs() <= M_TOL;
    if near(-2.0) {
        return Err(Error::Regime("m = -2 has no saddle-node at O".into()));
    }
    let w_side = if near(-1.0) {
        Side::On
    } else if m < -2.0 || m > -1.0 {
        Side::Below
    } else {
        Side::Above
    };
    let center_side = if near(-0.5) {
        Side::On
    } else if m < -2.0 || m > -0.5 {
        Side::Above
    } else {
        Side::Below
    };
    Ok(SectorLayout {
        w_side,
        center_side,
        w_unstable: m < -2.0,
    })
}

/// `W` near `O`: `v = -(m+2) u + a u^2`.
pub fn w_quadratic_coeff(m: f64) -> f64 {
    -3.0 * (m + 1.0) / (2.0 * (m + 2.0))
}

/// Centre manifold near `O`: `v = b u^2 + c u^3`.
pub fn center_coeffs(m: f64) -> (f64, f64) {
    let b = (2.0 * m + 1.0) / (m + 2.0);
    let c = -b * (2.0 * b - 1.0) / (m + 2.0);
    (b, c)
}

/// Direction of `s` that carries a separatrix away from `O`.
pub fn outgoing_direction(m: f64, which: Separatrix) -> SDirection {
    match which {
        Separatrix::S0 | Separatrix::S1 => {
            if m < -2.0 {
                SDirection::Forward
            } else {
                SDirection::Backward
            }
        }
        // On the centre manifold u' ~ -3u^2/(m+2).
        Separatrix::S2 | Separatrix::C3 => {
            let leaves_forward = (m > -2.0) == matches!(which, Separatrix::S2);
            if leaves_forward {
                SDirection::Forward
            } else {
                SDirection::Backward
            }
        }
    }
}

pub const SEED_OFFSET: f64 = 1e-6;
pub const SEED_OFFSET_CHECK: f64 = 1e-7;
/// Seed offset along `L0`; the centre direction escapes only algebraically.
pub const CENTER_SEED_OFFSET: f64 = 1e-4;

/// Seed point on the requested branch at distance `delta` along its tangent.
pub fn seed_point(m: f64, which: Separatrix, delta: f64) -> (f64, f64) {
    match which {
        Separatrix::S0 | Separatrix::S1 => {
            let u = if which == Separatrix::S0 { delta } else { -delta };
            (u, -(m + 2.0) * u + w_quadratic_coeff(m) * u * u)
        }
        Separatrix::S2 | Separatrix::C3 => {
            let u = if which == Separatrix::S2 { -delta } else { delta };
            let (b, c) = center_coeffs(m);
            (u, b * u * u + c * u * u * u)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// `Q_m = 0`
    QIsocline,
    /// `P = 0`
    PIsocline,
    /// `v = 0`
    UAxis,
    /// `u = 0`
    VAxis,
    /// `v = -(m+2) u`
    LineL,
}

impl CrossingKind {
    pub const ALL: [CrossingKind; 5] = [
        CrossingKind::QIsocline,
        CrossingKind::PIsocline,
        CrossingKind::UAxis,
        CrossingKind::VAxis,
        CrossingKind::LineL,
    ];

    fn eval(self, m: f64, u: f64, v: f64) -> f64 {
        match self {
            CrossingKind::QIsocline => vector_field(m, u, v).1,
            CrossingKind::PIsocline => vector_field(m, u, v).0,
            CrossingKind::UAxis => v,
            CrossingKind::VAxis => u,
            CrossingKind::LineL => v + (m + 2.0) * u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub kind: CrossingKind,
    pub point: PhasePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixTrace {
    pub m: f64,
    pub which: Separatrix,
    pub direction: SDirection,
    pub tangent_at_o: TangentLine,
    pub seed_offset: f64,
    pub points: Vec<PhasePoint>,
    pub crossings: Vec<Crossing>,
    pub end: OrbitEnd,
}

impl SeparatrixTrace {
    pub fn first_crossing(&self, kind: CrossingKind) -> Option<&Crossing> {
        self.crossings.iter().find(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub planar: PlanarOptions,
    /// Largest `|s|` followed.
    pub s_max: f64,
    /// Stop at the first crossing of this kind.
    pub stop_at: Option<CrossingKind>,
    /// Stop once the orbit comes back within this distance of `O`.
    pub return_radius: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            planar: PlanarOptions::default(),
            s_max: 1e5,
            stop_at: None,
            return_radius: 1e-8,
        }
    }
}

/// Trace a separatrix of `O` away from the saddle-node. `direction` defaults
/// to the one leaving `O`.
pub fn trace_separatrix(
    m: f64,
    which: Separatrix,
    direction: Option<SDirection>,
    opts: &TraceOptions,
) -> Result<SeparatrixTrace> {
    trace_with_offset(m, which, direction, None, opts)
}

pub fn trace_with_offset(
    m: f64,
    which: Separatrix,
    direction: Option<SDirection>,
    offset: Option<f64>,
    opts: &TraceOptions,
) -> Result<SeparatrixTrace> {
    sector_layout(m)?;
    if which == Separatrix::C3 {
        return Err(Error::Precondition(
            "C3 lies on the attracting side of the centre manifold and is not unique; it cannot be traced".into(),
        ));
    }
    let tangent = match which {
        Separatrix::S0 | Separatrix::S1 => TangentLine::L,
        _ => TangentLine::L0,
    };
    let delta = offset.unwrap_or(match tangent {
        TangentLine::L => SEED_OFFSET,
        TangentLine::L0 => CENTER_SEED_OFFSET,
    });
    let direction = direction.unwrap_or_else(|| outgoing_direction(m, which));
    let seed = seed_point(m, which, delta);
    let s_end = match direction {
        SDirection::Forward => opts.s_max,
        SDirection::Backward => -opts.s_max,
    };
    let mut crossings = Vec::new();
    let stop_at = opts.stop_at;
    let mut left_o = false;
    let r_ret = opts.return_radius;
    let orbit = integrate_planar(m, seed, 0.0, s_end, &opts.planar, |seg| {
        let mut found: Vec<Crossing> = CrossingKind::ALL
            .iter()
            .filter_map(|&k| locate_crossing(m, seg, k))
            .collect();
        found.sort_by(|a, b| (a.point.s - seg.t0).abs().total_cmp(&(b.point.s - seg.t0).abs()));
        let mut stop = false;
        for c in found {
            crossings.push(c);
            if Some(c.kind) == stop_at {
                stop = true;
                break;
            }
        }
        let r = seg.y1[0].hypot(seg.y1[1]);
        if r > 10.0 * delta {
            left_o = true;
        } else if left_o && r < r_ret {
            stop = true;
        }
        stop
    });
    Ok(SeparatrixTrace {
        m,
        which,
        direction,
        tangent_at_o: tangent,
        seed_offset: delta,
        points: orbit.points,
        crossings,
        end: orbit.end,
    })
}

fn locate_crossing(m: f64, seg: &DenseSegment<2>, kind: CrossingKind) -> Option<Crossing> {
    let g0 = kind.eval(m, seg.y0[0], seg.y0[1]);
    let g1 = kind.eval(m, seg.y1[0], seg.y1[1]);
    if g0 == 0.0 || (g0 > 0.0) == (g1 > 0.0) && g1 != 0.0 {
        return None;
    }
    let s = if g1 == 0.0 {
        seg.t1
    } else {
        let tol = 1e-14 * seg.t1.abs().max(1.0);
        dopri::bisect_root(
            |s| {
                let y = seg.eval(s);
                kind.eval(m, y[0], y[1])
            },
            seg.t0,
            seg.t1,
            g0,
            tol,
        )
    };
    let y = seg.eval(s);
    Some(Crossing {
        kind,
        point: PhasePoint { s, u: y[0], v: y[1] },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStarResult {
    pub m: f64,
    pub u_star: f64,
    pub v_star: f64,
    pub gamma_star: f64,
    /// `gamma*` recomputed from a ten times smaller seed offset.
    pub gamma_star_check: f64,
    pub method: &'static str,
}

impl GammaStarResult {
    pub fn seed_sensitivity(&self) -> f64 {
        (self.gamma_star - self.gamma_star_check).abs()
    }
}

/// Critical `gamma` from the first crossing of `S0` (traced away from `O`)
/// with the isocline `Q_m = 0`: `gamma* = v*^(-1/3)`.
pub fn gamma_star_separatrix(m: f64) -> Result<GammaStarResult> {
    if !Regime::of(m).has_critical_gamma() {
        return Err(Error::Regime(format!("gamma* is defined for m < -2 or -2 < m < -1 (m={m})")));
    }
    let opts = TraceOptions {
        stop_at: Some(CrossingKind::QIsocline),
        s_max: 1e3,
        ..TraceOptions::default()
    };
    let star = |delta: f64| -> Result<(f64, f64)> {
        let tr = trace_with_offset(m, Separatrix::S0, None, Some(delta), &opts)?;
        let c = tr
            .first_crossing(CrossingKind::QIsocline)
            .ok_or_else(|| Error::NotFound(format!("S0 does not reach Q=0 within |s| <= {}", opts.s_max)))?;
        Ok((c.point.u, c.point.v))
    };
    let (u_star, v_star) = star(SEED_OFFSET)?;
    let (_, v_check) = star(SEED_OFFSET_CHECK)?;
    Ok(GammaStarResult {
        m,
        u_star,
        v_star,
        gamma_star: (1.0 / v_star).cbrt(),
        gamma_star_check: (1.0 / v_check).cbrt(),
        method: "separatrix",
    })
}

/// `D+ = {0 < u < -(m+2)/2, 0 <= v < -(m+2) u}`.
pub fn in_domain_plus(m: f64, u: f64, v: f64) -> bool {
    u > 0.0 && u < -(m + 2.0) / 2.0 && v >= 0.0 && v < -(m + 2.0) * u
}

/// `D- = {-(m+2)/2 < u < 0, 0 <= v < -(m+2) u}`.
pub fn in_domain_minus(m: f64, u: f64, v: f64) -> bool {
    u < 0.0 && u > -(m + 2.0) / 2.0 && v >= 0.0 && v < -(m + 2.0) * u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleVerdict {
    /// The return map has a fixed point on the section.
    Cycle,
    /// Every sampled orbit winds into `A`.
    SpiralsIntoA,
    /// Every sampled orbit winds away from `A`.
    SpiralsOut,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub v0: f64,
    /// Next crossing of the section in the same direction, if any.
    pub v1: Option<f64>,
    pub return_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub m: f64,
    pub verdict: CycleVerdict,
    pub cycle_v: Option<f64>,
    pub period_s: Option<f64>,
    /// Largest `|R(v0) - v0|` for `v0` within 0.01 of `A` on the section.
    pub near_a_displacement: Option<f64>,
    pub samples: Vec<ReturnSample>,
}

impl CycleReport {
    pub fn found(&self) -> bool {
        self.verdict == CycleVerdict::Cycle
    }
}

/// First return to the section `u = -1/2`, crossed with `u` increasing.
pub fn return_map(m: f64, v0: f64, s_max: f64) -> ReturnSample {
    let mut hit: Option<(f64, f64)> = None;
    let opts = PlanarOptions {
        escape_radius: 1e3,
        ..PlanarOptions::default()
    };
    integrate_planar(m, (-0.5, v0), 0.0, s_max, &opts, |seg| {
        let g0 = seg.y0[0] + 0.5;
        let g1 = seg.y1[0] + 0.5;
        if g0 < 0.0 && g1 >= 0.0 {
            let s = dopri::bisect_root(|s| seg.eval(s)[0] + 0.5, seg.t0, seg.t1, g0, 1e-13);
            let v = seg.eval(s)[1];
            if v > 0.5 {
                hit = Some((s, v));
                return true;
            }
        }
        false
    });
    ReturnSample {
        v0,
        v1: hit.map(|h| h.1),
        return_s: hit.map(|h| h.0),
    }
}

/// Sample the first-return map on `u = -1/2, v in (1/2, 3/2)` and look for
/// a fixed point.
pub fn limit_cycle_probe(m: f64) -> Result<CycleReport> {
    if Regime::of(m) != Regime::AboveOne {
        return Err(Error::Regime(format!("cycle probe is for m > 1 (m={m})")));
    }
    let s_max = 1e3;
    let n = 40;
    let samples: Vec<ReturnSample> = (1..=n)
        .map(|k| return_map(m, 0.5 + k as f64 / n as f64, s_max))
        .collect();
    let disp = |r: &ReturnSample| r.v1.map(|v1| v1 - r.v0);
    let mut cycle = None;
    for w in samples.windows(2) {
        if let (Some(d0), Some(d1)) = (disp(&w[0]), disp(&w[1])) {
            if d0 > 0.0 && d1 < 0.0 {
                let (mut a, mut b) = (w[0].v0, w[1].v0);
                while b - a > 1e-10 {
                    let mid = 0.5 * (a + b);
                    match return_map(m, mid, s_max).v1 {
                        Some(v1) if v1 > mid => a = mid,
                        Some(_) => b = mid,
                        None => break,
                    }
                }
                let v = 0.5 * (a + b);
                cycle = Some((v, return_map(m, v, s_max).return_s));
                break;
            }
        }
    }
    let ds: Vec<f64> = samples.iter().filter_map(disp).collect();
    // Samples without a return left the neighbourhood of A.
    let verdict = if cycle.is_some() {
        CycleVerdict::Cycle
    } else if !ds.is_empty() && ds.iter().all(|&d| d < 0.0) {
        CycleVerdict::SpiralsIntoA
    } else if ds.iter().all(|&d| d > 0.0) {
        CycleVerdict::SpiralsOut
    } else {
        CycleVerdict::Inconclusive
    };
    let near: Vec<f64> = (1..=4)
        .filter_map(|k| {
            let v0 = 0.5 + 0.0025 * k as f64;
            return_map(m, v0, s_max).v1.map(|v1| (v1 - v0).abs())
        })
        .collect();
    let near_a_displacement = (near.len() == 4).then(|| near.iter().copied().fold(0.0, f64::max));
    Ok(CycleReport {
        m,
        verdict,
        cycle_v: cycle.map(|c| c.0),
        period_s: cycle.and_then(|c| c.1),
        near_a_displacement,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_examples() {
        assert_eq!(vector_field(0.3, 0.0, 0.0), (0.0, 0.0));
        let (p, q) = vector_field(2.7, -0.5, 0.5);
        assert!(p.abs() < 1e-15 && q.abs() < 1e-15);
        assert_eq!(vector_field(0.0, 1.0, 1.0), (-1.0, -4.0));
    }

    #[test]
    fn isocline_examples() {
        assert_eq!(isocline_psi(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(isocline_psi(-0.5, 0.7).unwrap(), 0.0);
        assert_eq!(isocline_psi(1.0, 1.0).unwrap(), 0.5);
        assert!(isocline_psi(1.0, -1.0).is_err());
    }

    #[test]
    fn slope_examples() {
        assert!((slope_field(2.0, 0.3, 0.0).unwrap() + 2.5).abs() < 1e-14);
        assert!((slope_field(2.0, 0.0, 0.4).unwrap() + 4.0).abs() < 1e-14);
        assert!(slope_field(2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(equilibria(1.5).1.kind, EquilibriumKind::Center);
        assert_eq!(equilibria(0.0).1.kind, EquilibriumKind::UnstableFocus);
        assert_eq!(equilibria(5.0).1.kind, EquilibriumKind::StableNode);
        assert_eq!(equilibria(-3.0).1.kind, EquilibriumKind::UnstableNode);
        assert_eq!(equilibria(2.0).1.kind, EquilibriumKind::StableFocus);
        assert_eq!(equilibria(0.0).0.kind, EquilibriumKind::SaddleNode);
        assert_eq!(equilibria(-2.0).0.kind, EquilibriumKind::Degenerate);
    }

    #[test]
    fn seeds_lie_on_manifolds() {
        for m in [-3.0, -1.5, -0.75, 0.0, 2.0] {
            for which in [Separatrix::S0, Separatrix::S1, Separatrix::S2] {
                let d = 1e-3;
                let (u, v) = seed_point(m, which, d);
                // Invariance residual h'(u) P - Q is of higher order in d.
                let (p, q) = vector_field(m, u, v);
                let h = match which {
                    Separatrix::S2 => {
                        let (b, c) = center_coeffs(m);
                        2.0 * b * u + 3.0 * c * u * u
                    }
                    _ => -(m + 2.0) + 2.0 * w_quadratic_coeff(m) * u,
                };
                let r = h * p - q;
                let order = if which == Separatrix::S2 { 4 } else { 3 };
                let (u2, v2) = seed_point(m, which, d / 2.0);
                let (p2, q2) = vector_field(m, u2, v2);
                let h2 = match which {
                    Separatrix::S2 => {
                        let (b, c) = center_coeffs(m);
                        2.0 * b * u2 + 3.0 * c * u2 * u2
                    }
                    _ => -(m + 2.0) + 2.0 * w_quadratic_coeff(m) * u2,
                };
                let r2 = h2 * p2 - q2;
                // Halving the offset shrinks the residual by at least 2^order.
                assert!(r2.abs() <= r.abs() / 2f64.powi(order) * 1.2 + 1e-18, "m={m} {which:?} r={r} r2={r2}");
            }
        }
    }

    #[test]
    fn c3_is_refused() {
        assert!(trace_separatrix(0.0, Separatrix::C3, None, &TraceOptions::default()).is_err());
        assert!(trace_separatrix(-2.0, Separatrix::S0, None, &TraceOptions::default()).is_err());
    }
}

#[cfg(test)]
mod numeric_tests {
    use super::*;

    #[test]
    fn w_is_a_line_at_minus_one() {
        let tr = trace_separatrix(-1.0, Separatrix::S0, None, &TraceOptions { s_max: 20.0, ..TraceOptions::default() }).unwrap();
        let worst = tr.points.iter().map(|p| (p.v + p.u).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn blasius_center_branch_is_the_axis() {
        let tr = trace_separatrix(-0.5, Separatrix::S2, None, &TraceOptions { s_max: 50.0, ..TraceOptions::default() }).unwrap();
        let worst = tr.points.iter().map(|p| p.v.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn gamma_star_minus_three() {
        let g = gamma_star_separatrix(-3.0).unwrap();
        assert!((g.u_star - 0.090353).abs() < 1e-5, "{g:?}");
        assert!((g.v_star - 0.055997).abs() < 1e-5, "{g:?}");
        assert!((g.gamma_star - 2.61383481).abs() < 1e-4);
        assert!(g.seed_sensitivity() < 1e-4);
    }

    #[test]
    fn gamma_star_middle_band() {
        for (m, want) in [(-1.5, -3.10070706), (-1.25, -1.52628566), (-1.75, -7.28757125)] {
            let g = gamma_star_separatrix(m).unwrap();
            assert!((g.gamma_star - want).abs() < 1e-4, "m={m} {g:?}");
        }
    }

    #[test]
    fn s0_crossing_order_minus_three() {
        let tr = trace_separatrix(-3.0, Separatrix::S0, None, &TraceOptions { s_max: 200.0, ..TraceOptions::default() }).unwrap();
        let kinds: Vec<CrossingKind> = tr.crossings.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds[..4],
            [CrossingKind::QIsocline, CrossingKind::PIsocline, CrossingKind::UAxis, CrossingKind::VAxis]
        );
    }

    #[test]
    fn cycle_at_three_halves() {
        let r = limit_cycle_probe(1.5).unwrap();
        assert!(r.near_a_displacement.unwrap() < 1e-4, "{:?}", r.near_a_displacement);
    }

    #[test]
    fn cycle_probe_regimes() {
        assert!(limit_cycle_probe(1.2).unwrap().found());
        assert_eq!(limit_cycle_probe(3.0).unwrap().verdict, CycleVerdict::SpiralsIntoA);
    }

    #[test]
    fn transform_matches_planar() {
        use crate::ode::{integrate, IvpSpec, Params};
        let (m, g, a) = (1.0, 1.0, 1.13715804);
        let traj = integrate(&IvpSpec::new(Params::new(m, g).unwrap(), a).with_t_max(10.0)).unwrap();
        let curve = blowup_transform(&traj, 0.0).unwrap();
        // u and v blow up where f vanishes; compare before that.
        let last = curve.points.iter().rev().find(|p| p.u.abs() + p.v.abs() < 1e3).unwrap();
        assert!(last.s.abs() > 0.1);
        let orbit = integrate_planar(m, (a / (g * g), 1.0 / (g * g * g)), 0.0, last.s, &PlanarOptions::default(), |_| false);
        let (u, v) = orbit.eval(last.s).unwrap();
        assert!((u - last.u).abs() < 1e-7 * last.u.abs().max(1.0));
        assert!((v - last.v).abs() < 1e-7 * last.v.abs().max(1.0));
    }
}
