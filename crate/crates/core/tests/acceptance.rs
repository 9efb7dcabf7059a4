//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; the process exits non-zero
//! when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use fluxsim::asymptotics::{bounded_ceiling, decay_check_2_over_t, tail_exponent, DecayCheck};
use fluxsim::phase_plane::{blowup_transform, equilibria, gamma_star_separatrix, vector_field};
use fluxsim::report::{census, SolutionCount};
use fluxsim::shooting::solve_trajectory;
use fluxsim::verify::{accepted_samples, horizon_quantities, invariant_cases};
use fluxsim::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = std::result::Result<String, String>;

fn p(m: f64, g: f64) -> Params {
    Params::new(m, g).unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

/// Collects failure messages; a criterion passes when none were recorded.
#[derive(Default)]
struct Log {
    fails: Vec<String>,
    notes: Vec<String>,
}

impl Log {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fails.push(msg());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn finish(self) -> Outcome {
        if self.fails.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(self.fails.join("; "))
        }
    }
}

fn lift<T>(r: fluxsim::Result<T>, what: &str) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---- local oracles ----

/// Bounded solution at m = -1: `f' + f^2/2 = d` with `d = -1/gamma + gamma^2/2`.
fn riccati_closed_form(gamma: f64, t: f64) -> [f64; 3] {
    let d = -1.0 / gamma + 0.5 * gamma * gamma;
    let s = (2.0 * d).sqrt();
    let r = (gamma - s) / (gamma + s);
    let e = r * (s * t).exp();
    let dd = e - 1.0;
    [
        2.0 * s / dd + s,
        -2.0 * s * s * e / (dd * dd),
        2.0 * s.powi(3) * e * (e + 1.0) / dd.powi(3),
    ]
}

/// Positive root of `9 eta^3 + 9 gamma eta^2 - 1 = 0`.
fn eta_root(gamma: f64) -> f64 {
    let g = |x: f64| 9.0 * x * x * x + 9.0 * gamma * x * x - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn growth(m: f64) -> f64 {
    (m + 2.0) / (1.0 - m)
}

fn gamma_floor(m: f64) -> f64 {
    (2.0 / ((m + 2.0) * (m + 2.0))).cbrt()
}

/// Jacobian of the planar field by central differences.
fn fd_jacobian(m: f64, u: f64, v: f64) -> [[f64; 2]; 2] {
    let h = 1e-6;
    let (pu1, qu1) = vector_field(m, u + h, v);
    let (pu0, qu0) = vector_field(m, u - h, v);
    let (pv1, qv1) = vector_field(m, u, v + h);
    let (pv0, qv0) = vector_field(m, u, v - h);
    [
        [(pu1 - pu0) / (2.0 * h), (pv1 - pv0) / (2.0 * h)],
        [(qu1 - qu0) / (2.0 * h), (qv1 - qv0) / (2.0 * h)],
    ]
}

/// Classical RK4 on `du/ds = v - 2u^2`, `dv/ds = -(m+2)v + (2m+1)u^2 - 3uv`.
fn rk4_planar(m: f64, (u, v): (f64, f64), ds: f64, n: usize) -> (f64, f64) {
    let field = |u: f64, v: f64| (v - 2.0 * u * u, -(m + 2.0) * v + (2.0 * m + 1.0) * u * u - 3.0 * u * v);
    let (mut u, mut v) = (u, v);
    for _ in 0..n {
        let k1 = field(u, v);
        let k2 = field(u + 0.5 * ds * k1.0, v + 0.5 * ds * k1.1);
        let k3 = field(u + 0.5 * ds * k2.0, v + 0.5 * ds * k2.1);
        let k4 = field(u + ds * k3.0, v + ds * k3.1);
        u += ds / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += ds / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (u, v)
}

// ---- criteria ----

fn m_minus_one_oracle() -> Outcome {
    let mut log = Log::default();
    let o = opts();
    for gamma in [-0.5, -1.0, -2.0, -4.0] {
        let r = lift(shoot_concave(p(-1.0, gamma), None, &o), "shooting")?;
        let want = -1.0 / gamma;
        log.check((r.alpha - want).abs() < 1e-6, || format!("gamma={gamma}: alpha={} vs {want}", r.alpha));
        let traj = lift(integrate(&o.spec(p(-1.0, gamma), r.alpha).with_t_max(20.0)), "integrate")?;
        let mut worst: f64 = 0.0;
        for i in 0..=2000 {
            let t = 20.0 * i as f64 / 2000.0;
            let s = lift(traj.eval(t), "eval")?;
            let c = riccati_closed_form(gamma, t);
            worst = worst.max((s.f - c[0]).abs()).max((s.fp - c[1]).abs()).max((s.fpp - c[2]).abs());
        }
        log.check(worst < 1e-5, || format!("gamma={gamma}: pointwise error {worst:.2e}"));
        let d = -1.0 / gamma + 0.5 * gamma * gamma;
        let res = traj.states.iter().map(|s| (s.fp + 0.5 * s.f * s.f - d).abs()).fold(0.0, f64::max);
        log.check(res < 1e-6, || format!("gamma={gamma}: Riccati residual {res:.2e}"));
        log.note(format!("gamma={gamma}: {worst:.1e}"));
    }
    log.finish()
}

fn m_one_oracle() -> Outcome {
    let mut log = Log::default();
    let o = opts();
    for gamma in [-1.0, 0.0, 1.0, 2.0] {
        let eta = eta_root(gamma);
        let (alpha, lambda) = (1.0 / (3.0 * eta), 1.0 / (9.0 * eta * eta) - gamma);
        let r = lift(shoot_concave(p(1.0, gamma), None, &o), "shooting")?;
        log.check((r.alpha - alpha).abs() < 1e-6, || format!("gamma={gamma}: alpha={} vs {alpha}", r.alpha));
        match r.lambda_est {
            Some(l) => log.check((l - lambda).abs() < 1e-5, || format!("gamma={gamma}: lambda={l} vs {lambda}")),
            None => log.check(false, || format!("gamma={gamma}: no limit reported")),
        }
    }
    log.finish()
}

fn equilibrium_classification() -> Outcome {
    let mut log = Log::default();
    let sqrt6 = 6f64.sqrt();
    let (t1, t2, t3) = ((3.0 - 2.0 * sqrt6) / 2.0, 1.5, (3.0 + 2.0 * sqrt6) / 2.0);
    let complex = |m: f64| equilibria(m).1.eigenvalues[0].im != 0.0;
    let trace = |m: f64| {
        let e = equilibria(m).1.eigenvalues;
        e[0].re + e[1].re
    };
    let locate = |f: &dyn Fn(f64) -> bool, a: f64, b: f64| {
        let fa = f(a);
        let (mut a, mut b) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if f(mid) == fa {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let d1 = locate(&complex, t1 - 0.5, t1 + 0.5);
    let d3 = locate(&complex, t3 - 0.5, t3 + 0.5);
    let tr = locate(&|m| trace(m) > 0.0, 0.5, 2.5);
    for (got, want) in [(d1, t1), (tr, t2), (d3, t3)] {
        log.check((got - want).abs() < 1e-10, || format!("sign change at {got} vs {want}"));
    }
    // Eigenvalues against a finite-difference Jacobian at A.
    for m in [-4.0, -1.0, 0.0, 1.0, 1.5, 2.0, 5.0] {
        let j = fd_jacobian(m, -0.5, 0.5);
        let (tr_fd, det_fd) = (j[0][0] + j[1][1], j[0][0] * j[1][1] - j[0][1] * j[1][0]);
        let e = equilibria(m).1.eigenvalues;
        let (tr_e, det_e) = ((e[0] + e[1]).re, (e[0] * e[1]).re);
        log.check((tr_fd - tr_e).abs() < 1e-6 && (det_fd - det_e).abs() < 1e-6, || {
            format!("m={m}: trace/det {tr_e}/{det_e} vs {tr_fd}/{det_fd}")
        });
    }
    // Five regimes: real unstable, complex unstable, centre, complex stable, real stable.
    for (m, cx, sign) in [(-3.0, false, 1.0), (0.0, true, 1.0), (1.5, true, 0.0), (2.5, true, -1.0), (6.0, false, -1.0)] {
        let e = equilibria(m).1.eigenvalues;
        let re_sign = if e[0].re.abs() < 1e-12 { 0.0 } else { e[0].re.signum() };
        log.check(complex(m) == cx && re_sign == sign && e[1].re.signum() * sign >= 0.0, || format!("m={m}: {e:?}"));
    }
    for m in [-5.0, -3.0, -1.0, 0.0, 1.5, 4.0] {
        let o = equilibria(m).0;
        let j = fd_jacobian(m, 0.0, 0.0);
        let mut got = [o.eigenvalues[0].re, o.eigenvalues[1].re];
        got.sort_by(f64::total_cmp);
        let mut want = [0.0, -(m + 2.0)];
        want.sort_by(f64::total_cmp);
        let ok = (got[0] - want[0]).abs() < 1e-12
            && (got[1] - want[1]).abs() < 1e-12
            && o.eigenvalues.iter().all(|z| z.im == 0.0)
            && (j[0][0] + j[1][1] - (want[0] + want[1])).abs() < 1e-6;
        log.check(ok, || format!("O at m={m}: {:?}", o.eigenvalues));
    }
    log.note(format!("thresholds found at {d1:.12}, {tr:.12}, {d3:.12}"));
    log.finish()
}

fn gamma_star_cross_validation() -> Outcome {
    let o = opts();
    let rows: Vec<(f64, fluxsim::Result<(f64, f64)>)> = [-4.0, -3.0, -2.5, -1.75, -1.5, -1.25]
        .par_iter()
        .map(|&m| {
            let r = gamma_star_shooting(m, &o).and_then(|a| Ok((a.gamma_star, gamma_star_separatrix(m)?.gamma_star)));
            (m, r)
        })
        .collect();
    let mut log = Log::default();
    for (m, r) in rows {
        let (a, b) = lift(r, &format!("m={m}"))?;
        log.check((a - b).abs() < 1e-4, || format!("m={m}: shooting {a} vs separatrix {b}"));
        if m < -2.0 {
            let floor = gamma_floor(m);
            log.check(a > floor && b > floor, || format!("m={m}: {a}, {b} not above {floor}"));
        } else {
            log.check(a < 0.0 && b < 0.0, || format!("m={m}: {a}, {b} not negative"));
        }
        log.note(format!("m={m}: {a:.6}/{b:.6}"));
    }
    log.finish()
}

fn regime_table() -> Outcome {
    let o = opts();
    let gs3 = lift(gamma_star_shooting(-3.0, &o), "gamma* at m=-3")?.gamma_star;
    let gs15 = lift(gamma_star_shooting(-1.5, &o), "gamma* at m=-1.5")?.gamma_star;
    let mut cases = vec![];
    for g in [-2.0, -1.0, 0.0, 0.5, 3.0] {
        cases.push((-2.0, g, SolutionCount::None));
    }
    cases.push((-3.0, 1.0, SolutionCount::None));
    cases.push((-1.5, gs15 + 0.5, SolutionCount::None));
    for m in [0.0, 1.0] {
        for g in [-1.0, 0.0, 1.0] {
            cases.push((m, g, SolutionCount::Unique));
        }
    }
    cases.push((-3.0, 2.0 * gs3, SolutionCount::Continuum));
    cases.push((2.0, -1.0, SolutionCount::Continuum));
    cases.push((-1.0, -1.0, SolutionCount::BoundedWithUnboundedFamily));
    let got: Vec<_> = cases.par_iter().map(|&(m, g, _)| census(p(m, g), &o)).collect();
    let mut log = Log::default();
    for (&(m, g, want), c) in cases.iter().zip(got) {
        let c = lift(c, &format!("m={m}, gamma={g}"))?;
        log.check(c.count == want, || format!("m={m}, gamma={g}: {:?} expected {want:?}", c.count));
        if want == SolutionCount::Continuum {
            let w = c.alpha_hi.unwrap_or(0.0) - c.alpha_lo.unwrap_or(0.0);
            log.check(w > 0.0, || format!("m={m}, gamma={g}: width {w}"));
        }
    }
    log.note(format!("{} points", cases.len()));
    log.finish()
}

fn asymptotic_exponents() -> Outcome {
    let o = opts();
    let cases = [(-1.75, -10.0, 1e4), (-1.5, -4.0, 1e4), (-1.25, -3.0, 1e4), (-0.9, -1.0, 1e4), (-0.6, -1.0, 3e3)];
    let fits: Vec<_> = cases
        .par_iter()
        .map(|&(m, g, horizon)| -> std::result::Result<(f64, f64), String> {
            let iv = lift(alpha_interval(p(m, g), &o), "interval")?;
            let alpha = if iv.hi.is_finite() { 0.5 * (iv.lo + iv.hi) } else { iv.lo + 1.0 };
            let traj = lift(integrate(&o.spec(p(m, g), alpha).with_t_max(horizon)), "integrate")?;
            let c = classify(&traj);
            if !c.is_accepted() || c.boundedness != Boundedness::Unbounded {
                return Err(format!("m={m}: alpha={alpha} is not an unbounded solution ({c:?})"));
            }
            Ok((m, lift(tail_exponent(&traj), "fit")?.exponent_est))
        })
        .collect();
    let mut log = Log::default();
    for r in fits {
        let (m, est) = r?;
        let err = (est - growth(m)).abs() / growth(m);
        log.check(err < 0.05, || format!("m={m}: exponent {est} vs {}", growth(m)));
        log.note(format!("m={m}: {:.2}%", 100.0 * err));
    }
    let (gamma, alpha) = (-1.0, 2.0);
    let traj = lift(integrate(&o.spec(p(-1.0, gamma), alpha).with_t_max(1e3)), "integrate")?;
    let fit = lift(tail_exponent(&traj), "fit")?;
    let c = (-2.0 * (1.0 + gamma * alpha)).sqrt();
    log.check((fit.exponent_est - 0.5).abs() / 0.5 < 0.05, || format!("m=-1: exponent {}", fit.exponent_est));
    log.check((fit.coeff_at_target - c).abs() / c < 0.05, || format!("m=-1: coefficient {} vs {c}", fit.coeff_at_target));
    // Direct look at t f(t) on the tail, independent of the library's decay check.
    let iv = lift(alpha_interval(p(3.0, 0.0), &o), "interval")?;
    let traj = lift(integrate(&o.spec(p(3.0, 0.0), 0.5 * (iv.lo + iv.hi)).with_t_max(1e3)), "integrate")?;
    let mut worst: f64 = 0.0;
    for i in 0..=500 {
        let t = 500.0 + i as f64;
        worst = worst.max((t * lift(traj.eval(t), "eval")?.f - 2.0).abs() / 2.0);
    }
    log.check(worst < 0.1, || format!("m=3: |t f - 2|/2 = {worst}"));
    if let Ok(DecayCheck::Measured { max_rel_error, .. }) = decay_check_2_over_t(&traj) {
        log.check((max_rel_error - worst).abs() < 1e-3, || format!("m=3: library {max_rel_error} vs {worst}"));
    } else {
        log.check(false, || "m=3: decay check not measured".into());
    }
    log.note(format!("m=3: {:.3}%", 100.0 * worst));
    log.finish()
}

fn transform_conjugacy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = Vec::new();
    while cases.len() < 20 {
        let m: f64 = rng.gen_range(-3.5..3.0);
        let g: f64 = rng.gen_range(-2.0..2.0);
        let a: f64 = rng.gen_range(-1.0..2.0);
        // The start point (alpha/gamma^2, 1/gamma^3) must lie in the compared window.
        if (m + 2.0).abs() > 0.1 && g.abs() > 0.2 && a.abs() / (g * g) + 1.0 / g.abs().powi(3) < 40.0 {
            cases.push((m, g, a));
        }
    }
    let errs: Vec<_> = cases
        .par_iter()
        .map(|&(m, g, a)| -> std::result::Result<(f64, usize), String> {
            let spec = IvpSpec::new(p(m, g), a).with_t_max(3.0).stopping_on(&[EventKind::FZero]);
            let traj = lift(integrate(&spec), "integrate")?;
            let curve = lift(blowup_transform(&traj, 0.0), "transform")?;
            let mut cur = (a / (g * g), 1.0 / g.powi(3));
            let mut s_cur = 0.0;
            let mut worst: f64 = 0.0;
            let mut n = 0;
            for q in curve.points.iter().take_while(|q| q.u.abs() + q.v.abs() <= 50.0) {
                let span = q.s - s_cur;
                let steps = (span.abs() / 2e-4).ceil().max(1.0) as usize;
                cur = rk4_planar(m, cur, span / steps as f64, steps);
                s_cur = q.s;
                worst = worst.max((cur.0 - q.u).abs()).max((cur.1 - q.v).abs());
                n += 1;
            }
            Ok((worst, n))
        })
        .collect();
    let mut log = Log::default();
    let mut overall: f64 = 0.0;
    for (&(m, g, a), e) in cases.iter().zip(errs) {
        let (e, n) = e?;
        overall = overall.max(e);
        log.check(n > 1, || format!("(m, gamma, alpha)=({m:.3}, {g:.3}, {a:.3}): empty orbit"));
        log.check(e < 1e-5, || format!("(m, gamma, alpha)=({m:.3}, {g:.3}, {a:.3}): {e:.2e}"));
    }
    log.note(format!("20 cases, worst {overall:.2e}"));
    log.finish()
}

fn integral_identities() -> Outcome {
    let o = opts();
    let samples = lift(accepted_samples(&o), "samples")?;
    let rows: Vec<_> = samples
        .par_iter()
        .map(|&(pp, alpha)| -> std::result::Result<(Params, bool, Vec<f64>), String> {
            let (rep, _) = lift(solve_trajectory(pp, alpha, &o), "solve")?;
            let mut seq = Vec::new();
            for rel in [1e-6, 1e-8, 1e-10] {
                let tr = lift(integrate(&IvpSpec::new(pp, alpha).with_t_max(rep.t_max).with_tolerances(rel, rel * 1e-2)), "integrate")?;
                let (lo, hi) = tr.t_range();
                seq.push(lift(residuals(&tr, lo, hi), "residuals")?.max());
            }
            Ok((pp, rep.is_accepted(), seq))
        })
        .collect();
    let mut log = Log::default();
    let n = rows.len();
    for r in rows {
        let (pp, accepted, seq) = r?;
        let tag = format!("m={}, gamma={}", pp.m, pp.gamma);
        log.check(accepted, || format!("{tag}: not accepted"));
        log.check(seq[2] < 1e-6, || format!("{tag}: residual {:.2e} at rel_tol 1e-10", seq[2]));
        log.check(seq[1] <= seq[0] && seq[2] <= seq[1], || {
            format!("{tag}: {:.2e}, {:.2e}, {:.2e} not decreasing", seq[0], seq[1], seq[2])
        });
    }
    log.note(format!("{n} accepted solutions"));
    log.finish()
}

/// Local restatement of the invariants for one `(m, gamma, alpha)`.
fn invariant_failures(pp: Params, alpha: f64, o: &SolveOptions) -> std::result::Result<Vec<String>, String> {
    let (m, gamma) = (pp.m, pp.gamma);
    let (rep, traj) = lift(solve_trajectory(pp, alpha, o), "solve")?;
    let mut bad = Vec::new();
    let inflections: Vec<f64> = traj.events_of(EventKind::FppZero).map(|e| e.t).collect();
    if m <= -0.5 {
        if traj.states.iter().any(|s| s.fpp > 0.0) || !inflections.is_empty() {
            bad.push("f'' left the negative half-line".to_string());
        }
    } else if inflections.len() > 1 {
        bad.push(format!("{} inflections", inflections.len()));
    }
    if !rep.is_accepted() {
        return Ok(bad);
    }
    let c = rep.classification;
    let no_solution = m == -2.0
        || (m < -2.0 && gamma <= gamma_floor(m))
        || (m > -2.0 && m <= -1.0 && gamma >= 0.0);
    if no_solution {
        bad.push("accepted where no solution exists".into());
    }
    if m > -2.0 && m <= -1.0 && gamma < 0.0 && alpha < -1.0 / ((m + 2.0) * gamma) - 1e-8 {
        bad.push(format!("alpha={alpha} below -1/((m+2) gamma)"));
    }
    if m <= -0.5 && alpha <= 0.0 {
        bad.push("accepted with f'(0) <= 0".into());
    }
    let bounded = matches!(c.boundedness, Boundedness::Bounded { .. });
    if m >= -0.5 && !bounded {
        bad.push("not bounded although m >= -1/2".into());
    }
    if m > -1.0 && c.shape == Shape::Concave && bounded {
        let top = (gamma * gamma + 2.0 * alpha / (m + 2.0)).sqrt();
        let slack = 1e-8 * (1.0 + top);
        if traj.states.iter().any(|s| s.f < -gamma - slack || s.f > top + slack) {
            bad.push(format!("f leaves [-gamma, {top}]"));
        }
        if let Some(lib) = bounded_ceiling(m, gamma, alpha) {
            if (lib - top).abs() > 1e-12 * (1.0 + top) {
                bad.push(format!("library ceiling {lib} vs {top}"));
            }
        }
    }
    // f'' must go to zero: follow the trajectory out until it does.
    let small = 10.0 * o.eps_far;
    let mut horizon = rep.t_max;
    let mut end = traj.last().fpp.abs();
    while end >= small && horizon < 2e4 {
        horizon = (horizon * 4.0).min(2e4);
        let tr = lift(integrate(&o.spec(pp, alpha).with_t_max(horizon)), "integrate")?;
        if tr.termination != Termination::ReachedTMax {
            break;
        }
        end = tr.last().fpp.abs();
    }
    if end >= small {
        bad.push(format!("|f''| = {end:.2e} at t = {horizon}"));
    }
    Ok(bad)
}

fn invariant_suite() -> Outcome {
    let o = opts();
    let cases = invariant_cases(20240601, 200, &o);
    let rows: Vec<_> = cases.par_iter().map(|&(pp, a)| (pp, a, invariant_failures(pp, a, &o))).collect();
    let mut log = Log::default();
    let mut accepted = 0;
    for (pp, a, r) in rows {
        let tag = format!("(m, gamma, alpha)=({}, {}, {a})", pp.m, pp.gamma);
        match r {
            Ok(v) => {
                for b in v {
                    log.check(false, || format!("{tag}: {b}"));
                }
            }
            Err(e) => log.check(false, || format!("{tag}: {e}")),
        }
        if solve_at(pp, a, &o).map(|r| r.is_accepted()).unwrap_or(false) {
            accepted += 1;
        }
    }
    log.check(accepted >= 50, || format!("only {accepted} accepted cases"));
    log.note(format!("200 cases, {accepted} accepted"));
    log.finish()
}

fn horizon_insensitivity() -> Outcome {
    let base = opts();
    let runs: Vec<_> = [base, base.with_t_max(2.0 * base.t_max)].par_iter().map(horizon_quantities).collect();
    let mut it = runs.into_iter();
    let a = lift(it.next().unwrap(), "base horizon")?;
    let b = lift(it.next().unwrap(), "doubled horizon")?;
    let mut log = Log::default();
    log.check(a.len() == b.len() && a.len() >= 10, || format!("{} vs {} quantities", a.len(), b.len()));
    let mut worst: f64 = 0.0;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        let d = (x - y).abs();
        worst = worst.max(d);
        log.check(d < 1e-5, || format!("{name}: {x} vs {y}"));
    }
    log.note(format!("{} quantities, worst change {worst:.2e}", a.len()));
    log.finish()
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("m=-1 closed form", m_minus_one_oracle),
        ("m=1 closed form", m_one_oracle),
        ("equilibrium classification", equilibrium_classification),
        ("gamma* cross-validation", gamma_star_cross_validation),
        ("regime table", regime_table),
        ("asymptotic exponents", asymptotic_exponents),
        ("transform conjugacy", transform_conjugacy),
        ("integral identities", integral_identities),
        ("invariant suite", invariant_suite),
        ("horizon insensitivity", horizon_insensitivity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.2}s) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s) {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
