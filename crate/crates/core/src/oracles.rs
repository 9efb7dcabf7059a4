//! Closed-form and semi-analytic reference solutions.

use serde::{Deserialize, Serialize};

use crate::dopri::bisect_root;
use crate::error::{Error, Result};
use crate::ode::{IvpSpec, Params, Trajectory};
use crate::quadrature::{gauss_legendre, AnalyticProfile, Profile};
use crate::regime::{is_blasius, M_TOL};

/// Constants of the first integral `f' + f^2/2 = c t + d` at `m = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiParams {
    pub gamma: f64,
    pub c: f64,
    pub d: f64,
}

impl RiccatiParams {
    pub fn new(gamma: f64, alpha: f64) -> Self {
        Self {
            gamma,
            c: -1.0 - gamma * alpha,
            d: alpha + 0.5 * gamma * gamma,
        }
    }

    /// The bounded branch, `f'(0) = -1/gamma`.
    pub fn bounded(gamma: f64) -> Result<Self> {
        if !(gamma < 0.0) {
            return Err(Error::InvalidInput(format!("the bounded m=-1 solution needs gamma < 0 (gamma={gamma})")));
        }
        Ok(Self::new(gamma, -1.0 / gamma))
    }

    /// `f(∞) = sqrt(2d)` on the bounded branch.
    pub fn limit(&self) -> f64 {
        (2.0 * self.d).sqrt()
    }
}

/// Bounded solution for `m = -1`:
/// `f = 2s / (r e^(st) - 1) + s` with `s = sqrt(2d)`, `r = (gamma - s)/(gamma + s)`.
pub fn riccati_bounded(gamma: f64, t: f64) -> Result<[f64; 3]> {
    let rp = RiccatiParams::bounded(gamma)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("t must be >= 0 (t={t})")));
    }
    let s = rp.limit();
    let e = (gamma - s) / (gamma + s) * (s * t).exp();
    let d = e - 1.0;
    Ok([
        2.0 * s / d + s,
        -2.0 * s * s * e / (d * d),
        2.0 * s * s * s * e * (e + 1.0) / (d * d * d),
    ])
}

pub fn riccati_profile(gamma: f64, t_max: f64) -> Result<AnalyticProfile<impl Fn(f64) -> [f64; 3]>> {
    riccati_bounded(gamma, 0.0)?;
    Ok(AnalyticProfile {
        m: -1.0,
        domain: (0.0, t_max),
        panel_width: 0.25,
        eval: move |t| riccati_bounded(gamma, t).unwrap_or([f64::NAN; 3]),
    })
}

/// `max |f' + f^2/2 - (c t + d)|` over the stored states of an `m = -1` run.
pub fn riccati_residual(traj: &Trajectory) -> Result<f64> {
    if (traj.params.m + 1.0).abs() > M_TOL {
        return Err(Error::Precondition(format!("Riccati identity needs m = -1 (m={})", traj.params.m)));
    }
    let rp = RiccatiParams::new(traj.params.gamma, traj.alpha);
    Ok(traj
        .states
        .iter()
        .map(|s| (s.fp + 0.5 * s.f * s.f - (rp.c * s.t + rp.d)).abs())
        .fold(0.0, f64::max))
}

/// The explicit concave solution for `m = 1`,
/// `f = -(e^(-3 eta t) - 1)/(9 eta^2) - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitM1 {
    pub gamma: f64,
    /// Positive root of `9 eta^3 + 9 gamma eta^2 - 1`.
    pub eta: f64,
}

impl ExplicitM1 {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be finite ({gamma})")));
        }
        let cubic = |x: f64| 9.0 * x * x * (x + gamma) - 1.0;
        let mut lo = 0.0;
        // 9 eta^2 (eta + gamma) >= 9 at eta = max(1, 1 - gamma).
        let mut hi = (1.0f64).max(1.0 - gamma);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if cubic(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self {
            gamma,
            eta: 0.5 * (lo + hi),
        })
    }

    pub fn cubic_residual(&self) -> f64 {
        9.0 * self.eta.powi(3) + 9.0 * self.gamma * self.eta.powi(2) - 1.0
    }

    /// `f'(0) = 1/(3 eta)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (3.0 * self.eta)
    }

    /// `f(∞) = 1/(9 eta^2) - gamma`, which equals `eta`.
    pub fn limit(&self) -> f64 {
        1.0 / (9.0 * self.eta * self.eta) - self.gamma
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        let e = (-3.0 * self.eta * t).exp();
        [
            -(e - 1.0) / (9.0 * self.eta * self.eta) - self.gamma,
            e / (3.0 * self.eta),
            -e,
        ]
    }

    pub fn profile(&self, t_max: f64) -> AnalyticProfile<impl Fn(f64) -> [f64; 3]> {
        let me = *self;
        AnalyticProfile {
            m: 1.0,
            domain: (0.0, t_max),
            panel_width: 0.25,
            eval: move |t| me.eval(t),
        }
    }
}

pub fn explicit_m1(gamma: f64, t: f64) -> Result<[f64; 3]> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("t must be >= 0 (t={t})")));
    }
    Ok(ExplicitM1::new(gamma)?.eval(t))
}

/// Blasius check for `m = -1/2`. The equation `f''' + (3/2) f f'' = 0` is
/// equivalent to `f''(t) = f''(t0) exp(-(3/2) ∫_t0^t f)`; this returns the
/// largest deviation from that identity at the panel ends of the profile,
/// scaled by `max(|f''(t)|, |f''(t0)|)`, with `∫ f` accumulated by
/// Gauss–Legendre quadrature.
pub fn blasius_check<P: Profile>(profile: &P) -> Result<f64> {
    if !is_blasius(profile.m()) {
        return Err(Error::Precondition(format!("Blasius reduction needs m = -1/2 (m={})", profile.m())));
    }
    let (lo, hi) = profile.domain();
    let start = profile.sample(lo)[2];
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    for (a, b) in profile.panels(lo, hi) {
        acc += gauss_legendre(|t| profile.sample(t)[0], a, b);
        let want = start * (-1.5 * acc).exp();
        worst = worst.max((profile.sample(b)[2] - want).abs() / want.abs().max(start.abs()));
    }
    Ok(worst)
}

/// A `gamma = 0` solution integrated on both sides of `t = 0`.
#[derive(Debug, Clone)]
pub struct TwoSided {
    pub forward: Trajectory,
    pub backward: Trajectory,
}

impl TwoSided {
    pub fn new(forward: Trajectory, backward: Trajectory) -> Result<Self> {
        let (pf, pb) = (forward.params, backward.params);
        if pf.gamma != 0.0 || pb != pf || forward.alpha != backward.alpha {
            return Err(Error::InvalidInput("both halves must be the same gamma = 0 problem".into()));
        }
        if !forward.is_forward() || backward.is_forward() && backward.states.len() > 1 {
            return Err(Error::InvalidInput("halves have the wrong orientation".into()));
        }
        Ok(Self { forward, backward })
    }

    /// Integrate `g` with `g(0) = 0, g'(0) = alpha, g''(0) = -1` over
    /// `[-t_back, t_fwd]`.
    pub fn integrate(m: f64, alpha: f64, t_back: f64, t_fwd: f64) -> Result<Self> {
        let p = Params::new(m, 0.0)?;
        let forward = crate::ode::integrate(&IvpSpec::new(p, alpha).with_t_max(t_fwd))?;
        let backward = crate::ode::integrate(&IvpSpec::new(p, alpha).with_t_max(t_back).backward())?;
        Self::new(forward, backward)
    }

    fn side(&self, t: f64) -> &Trajectory {
        if t >= 0.0 {
            &self.forward
        } else {
            &self.backward
        }
    }

    pub fn eval(&self, t: f64) -> Result<[f64; 3]> {
        self.side(t).eval(t).map(|s| s.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateScale {
    pub t0: f64,
    pub k: f64,
    pub spec: IvpSpec,
}

/// Build the problem for `target_gamma` from a `gamma = 0` solution `g` via
/// `f(t) = k g(k t + t0)`, where `h(t0) = g(t0)^3/g''(t0) = target_gamma^3`
/// and `k = -target_gamma/g(t0)`.
pub fn translate_scale(g: &TwoSided, target_gamma: f64) -> Result<TranslateScale> {
    let p0 = g.forward.params;
    let alpha0 = g.forward.alpha;
    let spec_for = |gamma: f64, alpha: f64| -> Result<IvpSpec> {
        Ok(IvpSpec::new(Params::new(p0.m, gamma)?, alpha))
    };
    if target_gamma == 0.0 {
        return Ok(TranslateScale {
            t0: 0.0,
            k: 1.0,
            spec: spec_for(0.0, alpha0)?,
        });
    }
    let side = if target_gamma < 0.0 { &g.forward } else { &g.backward };
    let target = target_gamma.powi(3);
    let h = |t: f64| -> f64 {
        match side.eval(t) {
            Ok(s) if s.fpp < 0.0 => s.f.powi(3) / s.fpp - target,
            _ => f64::NAN,
        }
    };
    // h(0) = 0 and |h| grows along the scan; walk the stored states until it
    // passes the target.
    let mut prev = (0.0, -target);
    let mut bracket = None;
    for st in side.states.iter().skip(1) {
        if !(st.fpp < 0.0) {
            return Err(Error::Precondition(format!("g'' is not negative at t={}", st.t)));
        }
        let val = st.f.powi(3) / st.fpp - target;
        if (val > 0.0) != (prev.1 > 0.0) {
            bracket = Some((prev.0, st.t, prev.1));
            break;
        }
        prev = (st.t, val);
    }
    let (a, b, ha) = bracket.ok_or_else(|| {
        Error::NotFound(format!(
            "h(t) = gamma^3 not bracketed on the available range of g (up to t={}); extend the integration",
            side.t_end()
        ))
    })?;
    let t0 = bisect_root(h, a, b, ha, 1e-14 * b.abs().max(1.0));
    let st = side.eval(t0)?;
    let k = -target_gamma / st.f;
    Ok(TranslateScale {
        t0,
        k,
        spec: spec_for(target_gamma, k * k * st.fp)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::residuals;
    use crate::ode::{integrate, rhs, State};

    #[test]
    fn riccati_boundary_values() {
        let [f, fp, fpp] = riccati_bounded(-1.0, 0.0).unwrap();
        assert!((f - 1.0).abs() < 1e-15 && (fp - 1.0).abs() < 1e-15 && (fpp + 1.0).abs() < 1e-15);
        let [f, _, _] = riccati_bounded(-1.0, 60.0).unwrap();
        assert!((f - 3f64.sqrt()).abs() < 1e-12);
        assert!(riccati_bounded(0.0, 1.0).is_err());
        assert!(riccati_bounded(0.5, 1.0).is_err());
    }

    #[test]
    fn riccati_analytic_satisfies_ode() {
        for gamma in [-0.5, -1.0, -2.0, -4.0] {
            let rp = RiccatiParams::bounded(gamma).unwrap();
            assert!(rp.c.abs() < 1e-15 && rp.d > 0.0);
            for i in 0..50 {
                let t = 0.1 * i as f64;
                let [f, fp, fpp] = riccati_bounded(gamma, t).unwrap();
                assert!((fp + 0.5 * f * f - rp.d).abs() < 1e-12);
                // Differentiate the first integral once more: f'' + f f' = 0.
                assert!((fpp + f * fp).abs() < 1e-11 * (1.0 + fpp.abs()));
            }
        }
    }

    #[test]
    fn riccati_residual_on_runs() {
        let p = Params::new(-1.0, -1.0).unwrap();
        let tr = integrate(&IvpSpec::new(p, 2.0).with_t_max(20.0)).unwrap();
        assert!(riccati_residual(&tr).unwrap() < 1e-6);
        let tr = integrate(&IvpSpec::new(Params::new(0.0, 0.0).unwrap(), 1.0).with_t_max(1.0)).unwrap();
        assert!(riccati_residual(&tr).is_err());
    }

    #[test]
    fn eta_examples() {
        let e = ExplicitM1::new(0.0).unwrap();
        assert!((e.eta - 9f64.powf(-1.0 / 3.0)).abs() < 1e-14);
        assert!((e.alpha() - 3f64.powf(-1.0 / 3.0)).abs() < 1e-13);
        assert!((e.limit() - 0.480750).abs() < 1e-6);
        let e = ExplicitM1::new(-10.0).unwrap();
        assert!(e.cubic_residual().abs() < 1e-10);
        for g in [-2.0, -1.0, 0.0, 1.0, 5.0] {
            let e = ExplicitM1::new(g).unwrap();
            assert!(e.eta > 0.0 && e.cubic_residual().abs() < 1e-12, "{e:?}");
            assert!((e.limit() - e.eta).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_m1_satisfies_ode() {
        for g in [-1.0, 0.0, 1.0, 2.0] {
            let e = ExplicitM1::new(g).unwrap();
            let [f0, _, fpp0] = e.eval(0.0);
            assert!((f0 + g).abs() < 1e-14 && (fpp0 + 1.0).abs() < 1e-15);
            for i in 0..40 {
                let t = 0.25 * i as f64;
                let [f, fp, fpp] = e.eval(t);
                let fppp = 3.0 * e.eta * (-3.0 * e.eta * t).exp();
                let r = rhs(&State { t, f, fp, fpp }, &Params::new(1.0, g).unwrap());
                assert!((r - fppp).abs() < 1e-10, "g={g} t={t}");
            }
        }
    }

    #[test]
    fn analytic_identity_residuals_vanish() {
        let e = ExplicitM1::new(1.0).unwrap();
        let r = residuals(&e.profile(20.0), 0.0, 20.0).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
        let r = residuals(&riccati_profile(-1.0, 20.0).unwrap(), 0.0, 20.0).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
    }

    #[test]
    fn blasius_on_exact_and_integrated() {
        // 2/(t + c) solves f''' + (3/2) f f'' = 0.
        let c = 1.5;
        let exact = AnalyticProfile {
            m: -0.5,
            domain: (0.0, 10.0),
            panel_width: 0.1,
            eval: move |t: f64| {
                let x = t + c;
                [2.0 / x, -2.0 / (x * x), 4.0 / (x * x * x)]
            },
        };
        assert!(blasius_check(&exact).unwrap() < 1e-10);
        let tr = integrate(&IvpSpec::new(Params::new(-0.5, 0.0).unwrap(), 1.2).with_t_max(20.0)).unwrap();
        assert!(blasius_check(&tr).unwrap() < 1e-6);
        let tr = integrate(&IvpSpec::new(Params::new(0.0, 0.3).unwrap(), 1.0).with_t_max(1.0)).unwrap();
        assert!(blasius_check(&tr).is_err());
    }

    #[test]
    fn translate_identity_case() {
        let g = TwoSided::integrate(-0.75, 1.7, 2.0, 10.0).unwrap();
        let ts = translate_scale(&g, 0.0).unwrap();
        assert_eq!((ts.t0, ts.k, ts.spec.alpha), (0.0, 1.0, 1.7));
    }

    #[test]
    fn translate_to_negative_and_positive_gamma() {
        use crate::shooting::{classify, shoot_concave, Shape, SolveOptions};
        let m = -0.75;
        let g0 = shoot_concave(Params::new(m, 0.0).unwrap(), None, &SolveOptions::default()).unwrap();
        let g = TwoSided::integrate(m, g0.alpha, 3.0, 200.0).unwrap();
        for gamma in [-1.0, 0.5] {
            let ts = translate_scale(&g, gamma).unwrap();
            let tr = integrate(&ts.spec.clone().with_t_max(50.0)).unwrap();
            let f = ts.k * g.eval(ts.t0).unwrap()[0];
            let fpp = ts.k.powi(3) * g.eval(ts.t0).unwrap()[2];
            assert!((f + gamma).abs() < 1e-10);
            assert!((fpp + 1.0).abs() < 1e-8);
            let c = classify(&tr);
            assert_eq!(c.shape, Shape::Concave);
            // f(t) = k g(k t + t0) along the run.
            for t in [1.0, 5.0, 20.0] {
                let want = ts.k * g.eval(ts.k * t + ts.t0).unwrap()[0];
                assert!((tr.eval(t).unwrap().f - want).abs() < 1e-6);
            }
        }
    }
}
