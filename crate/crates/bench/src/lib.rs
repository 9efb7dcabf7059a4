//! Workloads shared by the benchmarks.

pub use fluxsim::{IvpSpec, Params, SolveOptions};

/// `(m, gamma)` points covering the concave regimes.
pub const SHOOT_CASES: [(f64, f64); 4] = [(-1.0, -1.0), (-0.5, 0.0), (0.0, 1.0), (1.0, 2.0)];

/// `m` values with a critical gamma, one per side of `m = -2`.
pub const GAMMA_STAR_CASES: [f64; 2] = [-3.0, -1.5];

/// A bounded solution on `[0, t_max]`.
pub fn bounded_ivp(t_max: f64) -> IvpSpec {
    IvpSpec::new(Params::new(1.0, 0.0).unwrap(), 3f64.powf(-1.0 / 3.0)).with_t_max(t_max)
}

/// An unbounded algebraic tail, the slow case for the integrator.
pub fn unbounded_ivp(t_max: f64) -> IvpSpec {
    IvpSpec::new(Params::new(-1.0, -1.0).unwrap(), 2.0).with_t_max(t_max)
}
