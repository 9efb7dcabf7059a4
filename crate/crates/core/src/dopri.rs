//! Dormand–Prince 5(4) stepper with PI step-size control and the standard
//! fourth-order continuous extension.
//!
//! The stepper is generic over a fixed state dimension so the same code
//! drives the third-order similarity ODE (3 components) and the planar
//! blown-up system (2 components).

use std::ops::ControlFlow;

pub trait OdeSystem<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Magnitude of the first trial step; the sign is taken from the
    /// integration direction.
    pub initial_step: f64,
    /// Smallest admissible step magnitude, relative to `max(1, |t|)`.
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-4,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Interpolated state at `t`; `t` is expected to lie in the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h();
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            let c = &self.cont;
            *o = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        out
    }

    pub fn lo(&self) -> f64 {
        self.t0.min(self.t1)
    }

    pub fn hi(&self) -> f64 {
        self.t0.max(self.t1)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo() && t <= self.hi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    /// The controller asked for a step below the floor.
    StepTooSmall { t: f64 },
    /// The right-hand side or the trial state became non-finite.
    NonFinite { t: f64 },
    /// `max_steps` accepted steps were taken.
    StepBudget { t: f64 },
}

/// Outcome of a drive loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveEnd {
    Reached,
    Stopped,
    Failed(StepFailure),
}

/// Integrate from `(t0, y0)` towards `t_end` (either direction). Each
/// accepted step is handed to `on_step`; returning `Break` stops the run.
pub fn drive<const N: usize, S, F>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &StepOptions,
    mut on_step: F,
) -> DriveEnd
where
    S: OdeSystem<N> + ?Sized,
    F: FnMut(&DenseSegment<N>) -> ControlFlow<()>,
{
    const BETA: f64 = 0.04;
    const SAFE: f64 = 0.9;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    let expo1 = 0.2 - BETA * 0.75;

    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.eval(t, &y);
    if !all_finite(&k1) {
        return DriveEnd::Failed(StepFailure::NonFinite { t });
    }
    let mut h = dir * opts.initial_step.abs().min(opts.max_step).min((t_end - t0).abs());
    let mut fac_old: f64 = 1e-4;
    let mut accepted = 0usize;
    let mut last_rejected = false;

    while (t_end - t) * dir > 0.0 {
        if accepted >= opts.max_steps {
            return DriveEnd::Failed(StepFailure::StepBudget { t });
        }
        let floor = opts.min_step * t.abs().max(1.0);
        if h.abs() < floor {
            return DriveEnd::Failed(StepFailure::StepTooSmall { t });
        }
        // Land exactly on the end point.
        if (t + h - t_end) * dir > 0.0 || (t_end - t - h).abs() < floor {
            h = t_end - t;
        }

        let mut ys = [0.0; N];
        for i in 0..N {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = sys.eval(t + C2 * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = sys.eval(t + C3 * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = sys.eval(t + C4 * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = sys.eval(t + C5 * h, &ys);
        for i in 0..N {
            ys[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = sys.eval(t + h, &ys);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = sys.eval(t + h, &y1);

        let mut err: f64 = 0.0;
        let mut finite = all_finite(&y1) && all_finite(&k7);
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.abs_tol + opts.rel_tol * y[i].abs().max(y1[i].abs());
            let r = (e / sk).abs();
            if !r.is_finite() {
                finite = false;
            }
            err = err.max(r);
        }

        if !finite {
            // Shrink hard and retry; a non-finite trial usually means the
            // step crossed a singularity of the continuation.
            h *= 0.1;
            last_rejected = true;
            if h.abs() < floor {
                return DriveEnd::Failed(StepFailure::NonFinite { t });
            }
            continue;
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            accepted += 1;

            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let cont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i])
                }),
            ];
            let seg = DenseSegment {
                t0: t,
                t1: t + h,
                y0: y,
                y1,
                cont,
            };
            t += h;
            y = y1;
            k1 = k7;

            if on_step(&seg).is_break() {
                return DriveEnd::Stopped;
            }
            if h_new.abs() > opts.max_step {
                h_new = dir * opts.max_step;
            }
            if last_rejected && h_new.abs() > h.abs() {
                h_new = h;
            }
            last_rejected = false;
            h = h_new;
        } else {
            h_new = h / (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
            h = h_new;
        }
    }
    DriveEnd::Reached
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Locate a sign change of `g` on `[a, b]` by bisection. `ga` and `gb` are
/// the values at the ends and must have opposite signs (or `gb == 0`).
pub fn bisect_root<G: FnMut(f64) -> f64>(mut g: G, mut a: f64, mut b: f64, ga: f64, tol: f64) -> f64 {
    let mut ga = ga;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    b
}
