//! Tail behaviour of computed solutions: the limit of `f`, power-law growth
//! of unbounded solutions and the `2/t` decay of concave-convex ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{EventKind, Termination, Trajectory, EPS_FAR};
use crate::regime::Regime;

/// Minimum number of resampled points in a tail window.
pub const MIN_TAIL_POINTS: usize = 64;
/// Fits with a lower coefficient of determination are flagged unreliable.
pub const R2_RELIABLE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaLimit {
    Finite { lambda: f64 },
    /// `f` exceeds the a priori ceiling `sqrt(gamma^2 + 2 alpha/(m+2))`.
    Divergent,
}

impl LambdaLimit {
    pub fn value(&self) -> Option<f64> {
        match self {
            LambdaLimit::Finite { lambda } => Some(*lambda),
            LambdaLimit::Divergent => None,
        }
    }
}

/// Upper bound on bounded solutions for `m > -1`, when it is real.
pub fn bounded_ceiling(m: f64, gamma: f64, alpha: f64) -> Option<f64> {
    if m <= -1.0 {
        return None;
    }
    let s = gamma * gamma + 2.0 * alpha / (m + 2.0);
    (s >= 0.0).then(|| s.sqrt())
}

/// Limit of `f` from Aitken extrapolation over `f(T/4), f(T/2), f(T)`.
pub fn lambda_limit(traj: &Trajectory) -> Result<LambdaLimit> {
    lambda_limit_with(traj, EPS_FAR)
}

pub fn lambda_limit_with(traj: &Trajectory, eps_far: f64) -> Result<LambdaLimit> {
    if !traj.far_field_converged(eps_far) {
        return Err(Error::Precondition(format!(
            "far field not reached: |f'|={:.3e}, |f''|={:.3e} at t={}",
            traj.last().fp.abs(),
            traj.last().fpp.abs(),
            traj.t_end()
        )));
    }
    let t = traj.t_end();
    let f1 = traj.eval(0.25 * t)?.f;
    let f2 = traj.eval(0.5 * t)?.f;
    let f3 = traj.last().f;
    let (d1, d2) = (f2 - f1, f3 - f2);
    let mut lambda = f3;
    if d1 != 0.0 {
        let r = d2 / d1;
        if r > 0.0 && r < 1.0 {
            lambda = f3 + d2 * r / (1.0 - r);
        }
    }
    let p = traj.params;
    if let Some(ceiling) = bounded_ceiling(p.m, p.gamma, traj.alpha) {
        if lambda > ceiling * (1.0 + 1e-9) + 1e-9 {
            return Ok(LambdaLimit::Divergent);
        }
    }
    Ok(LambdaLimit::Finite { lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitVerdict {
    /// Within 5% of the expected exponent.
    Consistent,
    Inconsistent,
    /// Goodness of fit below the reliability threshold.
    Unreliable,
}

/// Least-squares fit of `log f = log c + p log t` on the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent_est: f64,
    pub coeff_est: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    /// `(m+2)/(1-m)`, the growth exponent of unbounded solutions.
    pub target_exponent: f64,
    /// `c` refit with the exponent pinned to `target_exponent`.
    pub coeff_at_target: f64,
    pub verdict: FitVerdict,
}

impl TailFit {
    pub fn exponent_rel_error(&self) -> f64 {
        ((self.exponent_est - self.target_exponent) / self.target_exponent).abs()
    }
}

pub fn growth_exponent(m: f64) -> f64 {
    (m + 2.0) / (1.0 - m)
}

/// Fit the power-law growth of an unbounded candidate over the last quarter
/// of its time range.
pub fn tail_exponent(traj: &Trajectory) -> Result<TailFit> {
    let end = traj.last();
    if !matches!(traj.termination, Termination::ReachedTMax) {
        return Err(Error::Precondition(format!(
            "trajectory did not reach its horizon ({:?})",
            traj.termination
        )));
    }
    if !(end.f > 0.0 && end.fp > 0.0 && end.fpp < 0.0) {
        return Err(Error::Precondition(format!(
            "tail is not of increasing concave shape (f={:.3e}, f'={:.3e}, f''={:.3e})",
            end.f, end.fp, end.fpp
        )));
    }
    if traj.far_field_converged(EPS_FAR) {
        return Err(Error::Precondition("trajectory is bounded (far field reached)".into()));
    }
    let t_hi = traj.t_end();
    let t_lo = 0.75 * t_hi;
    if !(t_lo > 0.0) {
        return Err(Error::Precondition("fit window is empty".into()));
    }
    let n = MIN_TAIL_POINTS;
    let (llo, lhi) = (t_lo.ln(), t_hi.ln());
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let x = llo + (lhi - llo) * i as f64 / (n - 1) as f64;
        let f = traj.eval(x.exp().clamp(t_lo, t_hi))?.f;
        if f <= 0.0 {
            return Err(Error::Precondition("f not positive on the fit window".into()));
        }
        xs.push(x);
        ys.push(f.ln());
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let target = growth_exponent(traj.params.m);
    let mean_resid = xs.iter().zip(&ys).map(|(x, y)| y - target * x).sum::<f64>() / n as f64;
    let mut fit = TailFit {
        exponent_est: slope,
        coeff_est: intercept.exp(),
        window: (t_lo, t_hi),
        r_squared: r2,
        target_exponent: target,
        coeff_at_target: mean_resid.exp(),
        verdict: FitVerdict::Unreliable,
    };
    if r2 >= R2_RELIABLE {
        fit.verdict = if fit.exponent_rel_error() < 0.05 {
            FitVerdict::Consistent
        } else {
            FitVerdict::Inconsistent
        };
    }
    Ok(fit)
}

/// Ordinary least squares; returns `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecayCheck {
    Measured { max_rel_error: f64, window: (f64, f64) },
    Skipped { reason: String },
}

/// Largest relative deviation of `t f(t)` from 2 on `[T/2, T]`.
///
/// Only meaningful when the equilibrium `(-1/2, 1/2)` of the phase plane is
/// attracting (`m > 3/2`); for `1 < m <= 3/2` a cycle surrounds it and the
/// check is skipped.
pub fn decay_check_2_over_t(traj: &Trajectory) -> Result<DecayCheck> {
    let m = traj.params.m;
    if Regime::of(m) != Regime::AboveOne {
        return Err(Error::Precondition(format!("2/t decay applies only for m > 1 (m={m})")));
    }
    let end = traj.last();
    let inflected = traj.events_of(EventKind::FppZero).any(|e| e.state.fp < 0.0 && e.state.f > 0.0);
    if !(inflected && end.f > 0.0 && end.fp < 0.0 && end.fpp > 0.0) {
        return Err(Error::Precondition("shape mismatch: not a concave-convex decaying solution".into()));
    }
    if m <= 1.5 {
        return Ok(DecayCheck::Skipped {
            reason: "cycle_present".into(),
        });
    }
    let t_hi = traj.t_end();
    let t_lo = 0.5 * t_hi;
    let n = 4 * MIN_TAIL_POINTS;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let t = t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64;
        let f = traj.eval(t)?.f;
        worst = worst.max((t * f - 2.0).abs() / 2.0);
    }
    Ok(DecayCheck::Measured {
        max_rel_error: worst,
        window: (t_lo, t_hi),
    })
}
