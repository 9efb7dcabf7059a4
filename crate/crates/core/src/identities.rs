//! Integral identities satisfied by every solution of the ODE on a finite
//! interval `[rho, r]`, obtained by integrating the equation against `1`,
//! `t` and `f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

/// Absolute residuals of the three identities on `[rho, r]`:
///
/// * `f''|  + (m+2) f f'|  = 3(m+1) ∫ f'^2`
/// * `t f''| - f'| + (m+2) t f f'| - (m+2)/2 f^2| = 3(m+1) ∫ t f'^2`
/// * `f f''| - f'^2/2| + (m+2) f^2 f'| = (4m+5) ∫ f f'^2`
pub fn residuals<P: Profile>(profile: &P, rho: f64, r: f64) -> Result<IdentityResiduals> {
    let (lo, hi) = profile.domain();
    if !(rho >= lo && r <= hi) {
        return Err(Error::OutOfRange {
            t: if rho < lo { rho } else { r },
            lo,
            hi,
        });
    }
    if rho > r {
        return Err(Error::InvalidInput(format!("rho={rho} must not exceed r={r}")));
    }
    if rho == r {
        return Ok(IdentityResiduals { r1: 0.0, r2: 0.0, r3: 0.0 });
    }
    let m = profile.m();
    let a = profile.sample(rho);
    let b = profile.sample(r);
    let jump = |g: &dyn Fn(f64, &[f64; 3]) -> f64| g(r, &b) - g(rho, &a);

    let i1 = profile.integrate(rho, r, |_, y| y[1] * y[1]);
    let i2 = profile.integrate(rho, r, |t, y| t * y[1] * y[1]);
    let i3 = profile.integrate(rho, r, |_, y| y[0] * y[1] * y[1]);

    let lhs1 = jump(&|_, y| y[2] + (m + 2.0) * y[0] * y[1]);
    let lhs2 = jump(&|t, y| {
        t * y[2] - y[1] + (m + 2.0) * t * y[0] * y[1] - 0.5 * (m + 2.0) * y[0] * y[0]
    });
    let lhs3 = jump(&|_, y| y[0] * y[2] - 0.5 * y[1] * y[1] + (m + 2.0) * y[0] * y[0] * y[1]);

    Ok(IdentityResiduals {
        r1: (lhs1 - 3.0 * (m + 1.0) * i1).abs(),
        r2: (lhs2 - 3.0 * (m + 1.0) * i2).abs(),
        r3: (lhs3 - (4.0 * m + 5.0) * i3).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IvpSpec, Params};

    #[test]
    fn empty_interval_is_exact() {
        let traj = integrate(&IvpSpec::new(Params::new(0.0, 0.5).unwrap(), 0.6).with_t_max(3.0)).unwrap();
        let r = residuals(&traj, 1.0, 1.0).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let traj = integrate(&IvpSpec::new(Params::new(0.0, 0.5).unwrap(), 0.6).with_t_max(3.0)).unwrap();
        assert!(residuals(&traj, 0.0, 4.0).is_err());
        assert!(residuals(&traj, 2.0, 1.0).is_err());
    }

    #[test]
    fn small_on_integrated_orbit() {
        let traj = integrate(&IvpSpec::new(Params::new(-0.3, 0.2).unwrap(), 0.9).with_t_max(10.0)).unwrap();
        let r = residuals(&traj, 0.0, 3.0).unwrap();
        assert!(r.max() < 1e-8, "{r:?}");
    }
}
