pub mod asymptotics;
pub mod dopri;
pub mod error;
pub mod identities;
pub mod ode;
pub mod oracles;
pub mod phase_plane;
pub mod quadrature;
pub mod regime;
pub mod report;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use ode::{
    integrate, integrate_with, rhs, Direction, Event, EventKind, EventSet, IvpSpec, Observation,
    Params, State,
    Termination, Trajectory,
};
pub use identities::{residuals, IdentityResiduals};
pub use quadrature::Profile;
pub use regime::Regime;
pub use shooting::{
    alpha_interval, classify, gamma_star_shooting, shoot_concave, solve_at, AlphaInterval, Boundedness,
    Classification, IntervalKind, Shape, SolutionReport, SolveOptions,
};
