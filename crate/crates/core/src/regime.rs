//! Qualitative regimes of the problem as a function of `m`.

use serde::{Deserialize, Serialize};

use crate::ode::Params;

/// Tolerance used when testing `m` against the special values -2, -1, -1/2.
pub const M_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `m < -2`: negative concave solutions for `gamma` above a critical value.
    BelowMinusTwo,
    /// `m = -2`: no solutions at all.
    MinusTwo,
    /// `-2 < m < -1`: bounded and unbounded families for `gamma` below a
    /// negative critical value.
    MinusTwoToMinusOne,
    /// `m = -1`: Riccati reduction.
    MinusOne,
    /// `-1 < m <= -1/2`.
    MinusOneToMinusHalf,
    /// `-1/2 < m <= 1`: exactly one solution, concave.
    MinusHalfToOne,
    /// `m > 1`: one concave solution and a band of concave-convex ones.
    AboveOne,
}

impl Regime {
    pub fn of(m: f64) -> Self {
        if (m + 2.0).abs() <= M_TOL {
            Regime::MinusTwo
        } else if m < -2.0 {
            Regime::BelowMinusTwo
        } else if (m + 1.0).abs() <= M_TOL {
            Regime::MinusOne
        } else if m < -1.0 {
            Regime::MinusTwoToMinusOne
        } else if m <= -0.5 + M_TOL {
            Regime::MinusOneToMinusHalf
        } else if m <= 1.0 + M_TOL {
            Regime::MinusHalfToOne
        } else {
            Regime::AboveOne
        }
    }

    /// Whether `gamma*` is defined for this regime.
    pub fn has_critical_gamma(self) -> bool {
        matches!(self, Regime::BelowMinusTwo | Regime::MinusTwoToMinusOne)
    }
}

/// Concavity cannot be lost once `f'' < 0` for `m <= -1/2`.
pub fn concavity_locked(m: f64) -> bool {
    m <= -0.5 + M_TOL
}

pub fn is_blasius(m: f64) -> bool {
    (m + 0.5).abs() <= M_TOL
}

/// `cbrt(2 / (m+2)^2)`: for `m < -2` there is no solution when `gamma` does
/// not exceed this value.
pub fn lower_gamma_bound(m: f64) -> f64 {
    (2.0 / ((m + 2.0) * (m + 2.0))).cbrt()
}

/// Necessary lower bound on `f'(0)` for `-2 < m <= -1` and `gamma < 0`.
pub fn alpha_lower_bound(p: &Params) -> f64 {
    -1.0 / ((p.m + 2.0) * p.gamma)
}

/// A rule that proves nonexistence without any computation, if one applies.
pub fn nonexistence_rule(p: &Params) -> Option<String> {
    match Regime::of(p.m) {
        Regime::MinusTwo => Some("m = -2: f''' = -3 f'^2 forces f' to -infinity, no solution for any gamma".into()),
        Regime::BelowMinusTwo if p.gamma <= lower_gamma_bound(p.m) => Some(format!(
            "m < -2 requires gamma > cbrt(2/(m+2)^2) = {:.9}",
            lower_gamma_bound(p.m)
        )),
        Regime::MinusTwoToMinusOne if p.gamma >= 0.0 => {
            Some("-2 < m < -1 requires gamma < 0 (and gamma below its critical value)".into())
        }
        Regime::MinusOne if p.gamma >= 0.0 => Some("m = -1 admits solutions only for gamma < 0".into()),
        _ => None,
    }
}
