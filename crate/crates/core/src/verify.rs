//! Registry of numerical checks run by `fluxsim verify`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{bounded_ceiling, decay_check_2_over_t, growth_exponent, tail_exponent, DecayCheck};
use crate::error::Result;
use crate::identities::residuals;
use crate::ode::{integrate, EventKind, IvpSpec, Params, Termination};
use crate::oracles::{
    blasius_check, riccati_bounded, riccati_residual, translate_scale, ExplicitM1, TwoSided,
};
use crate::phase_plane::{
    a_thresholds, blowup_transform, equilibria, gamma_star_separatrix, integrate_planar, limit_cycle_probe,
    sector_layout, trace_separatrix, CycleVerdict, EquilibriumKind, PlanarOptions, Separatrix, Side, TraceOptions,
};
use crate::regime::{alpha_lower_bound, lower_gamma_bound, nonexistence_rule};
use crate::report::{census, SolutionCount};
use crate::shooting::{
    alpha_interval, gamma_star_shooting, shoot_concave, solve_trajectory, Boundedness, Evidence, IntervalKind,
    Shape, SolveOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Multiplies the integrator tolerances (pass thresholds are unchanged).
    pub tol_scale: f64,
    /// Run only checks whose name contains one of these.
    pub only: Vec<String>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            only: Vec::new(),
            seed: 20_240_601,
        }
    }
}

impl VerifyOptions {
    pub fn solve(&self) -> SolveOptions {
        let mut o = SolveOptions::default();
        o.rel_tol *= self.tol_scale;
        o.abs_tol *= self.tol_scale;
        o
    }

    fn spec(&self, p: Params, alpha: f64, t_max: f64) -> IvpSpec {
        self.solve().spec(p, alpha).with_t_max(t_max)
    }

    fn selects(&self, name: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|o| name.contains(o.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

type CheckFn = fn(&VerifyOptions) -> Result<Outcome>;

pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    run: CheckFn,
}

/// Pass/fail plus a one-line account of the worst case.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// Collects failures; the detail is the first failure or a summary.
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn done(self) -> Result<Outcome> {
        Ok(if self.failures.is_empty() {
            Outcome::new(true, self.notes.join("; "))
        } else {
            Outcome::new(false, format!("{} failure(s): {}", self.failures.len(), self.failures.join("; ")))
        })
    }
}

pub fn registry() -> Vec<Check> {
    vec![
        Check {
            name: "riccati",
            description: "m=-1: shooting recovers -1/gamma, trajectory matches the closed form, Riccati residual",
            run: check_riccati,
        },
        Check {
            name: "explicit_m1",
            description: "m=1: shooting recovers 1/(3 eta) and the limit eta",
            run: check_explicit_m1,
        },
        Check {
            name: "equilibria",
            description: "kinds of A and their thresholds, eigenvalues of O",
            run: check_equilibria,
        },
        Check {
            name: "gamma_star",
            description: "critical gamma by shooting and by separatrix agree",
            run: check_gamma_star,
        },
        Check {
            name: "regime_table",
            description: "solution counts at sampled (m, gamma)",
            run: check_regime_table,
        },
        Check {
            name: "tail_exponents",
            description: "growth exponents (m+2)/(1-m), sqrt(t) law at m=-1, 2/t decay at m=3",
            run: check_tail_exponents,
        },
        Check {
            name: "conjugacy",
            description: "blown-up trajectories agree with planar orbits",
            run: check_conjugacy,
        },
        Check {
            name: "identities",
            description: "integral identities on accepted solutions and their decrease with tolerance",
            run: check_identities,
        },
        Check {
            name: "invariants",
            description: "sign propagation, bounds, necessary conditions over a randomized grid",
            run: check_invariants,
        },
        Check {
            name: "horizon",
            description: "doubling t_max leaves alpha*, gamma* and lambda unchanged",
            run: check_horizon,
        },
        Check {
            name: "blasius",
            description: "m=-1/2 runs satisfy the Blasius identity",
            run: check_blasius,
        },
        Check {
            name: "translate_scale",
            description: "solutions built from gamma=0 by translation and scaling",
            run: check_translate,
        },
        Check {
            name: "sectors",
            description: "separatrix positions near O against the tangent lines",
            run: check_sectors,
        },
        Check {
            name: "cycles",
            description: "return map around A for m=1.2, 3/2 and 3",
            run: check_cycles,
        },
        Check {
            name: "covariance",
            description: "k g(k t + t0) solves the same equation",
            run: check_covariance,
        },
    ]
}

pub fn check_names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name).collect()
}

pub fn run_one(name: &str, opts: &VerifyOptions) -> Option<CheckResult> {
    registry().into_iter().find(|c| c.name == name).map(|c| execute(&c, opts))
}

fn execute(c: &Check, opts: &VerifyOptions) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match (c.run)(opts) {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: c.name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run the selected checks in parallel; results keep registry order.
pub fn run(opts: &VerifyOptions) -> VerifySummary {
    let start = Instant::now();
    let selected: Vec<Check> = registry().into_iter().filter(|c| opts.selects(c.name)).collect();
    let checks: Vec<CheckResult> = selected.par_iter().map(|c| execute(c, opts)).collect();
    VerifySummary {
        passed: checks.iter().all(|c| c.passed),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn p(m: f64, gamma: f64) -> Params {
    Params::new(m, gamma).expect("finite parameters")
}

fn check_riccati(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let mut t = Tally::new();
    for gamma in [-0.5, -1.0, -2.0, -4.0] {
        let r = shoot_concave(p(-1.0, gamma), None, &opts)?;
        let want = -1.0 / gamma;
        t.check((r.alpha - want).abs() < 1e-6, || format!("gamma={gamma}: alpha={} vs {want}", r.alpha));
        let traj = integrate(&o.spec(p(-1.0, gamma), r.alpha, 20.0))?;
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let s = 0.05 * i as f64;
            let exact = riccati_bounded(gamma, s)?;
            let got = traj.eval(s)?.to_vec();
            for k in 0..3 {
                worst = worst.max((exact[k] - got[k]).abs());
            }
        }
        t.check(worst < 1e-5, || format!("gamma={gamma}: pointwise error {worst:.2e}"));
        let res = riccati_residual(&traj)?;
        t.check(res < 1e-6, || format!("gamma={gamma}: Riccati residual {res:.2e}"));
    }
    let traj = integrate(&o.spec(p(-1.0, -1.0), 2.0, 50.0))?;
    let res = riccati_residual(&traj)?;
    t.check(res < 1e-6, || format!("unbounded alpha=2: Riccati residual {res:.2e}"));
    t.done()
}

fn check_explicit_m1(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let mut t = Tally::new();
    for gamma in [-1.0, 0.0, 1.0, 2.0] {
        let e = ExplicitM1::new(gamma)?;
        let r = shoot_concave(p(1.0, gamma), None, &opts)?;
        t.check((r.alpha - e.alpha()).abs() < 1e-6, || {
            format!("gamma={gamma}: alpha={} vs {}", r.alpha, e.alpha())
        });
        match r.lambda_est {
            Some(l) => t.check((l - e.limit()).abs() < 1e-5, || format!("gamma={gamma}: lambda={l} vs {}", e.limit())),
            None => t.check(false, || format!("gamma={gamma}: no lambda")),
        }
    }
    t.done()
}

fn check_equilibria(_: &VerifyOptions) -> Result<Outcome> {
    let mut t = Tally::new();
    let th = a_thresholds();
    let kind = |m: f64| equilibria(m).1.kind;
    // Locate each change of kind by bisection and compare with the formula.
    let locate = |lo: f64, hi: f64| {
        let k0 = kind(lo);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if kind(mid) == k0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let found1 = locate(th[0] - 0.5, th[0] + 0.5);
    let found3 = locate(th[2] - 0.5, th[2] + 0.5);
    t.check((found1 - th[0]).abs() < 1e-10, || format!("node/focus change at {found1} vs {}", th[0]));
    t.check((found3 - th[2]).abs() < 1e-10, || format!("focus/node change at {found3} vs {}", th[2]));
    let expect = [
        (-6.0, EquilibriumKind::UnstableNode),
        (th[0], EquilibriumKind::UnstableNode),
        (th[0] + 1e-9, EquilibriumKind::UnstableFocus),
        (0.0, EquilibriumKind::UnstableFocus),
        (1.5 - 1e-9, EquilibriumKind::UnstableFocus),
        (1.5, EquilibriumKind::Center),
        (1.5 + 1e-9, EquilibriumKind::StableFocus),
        (th[2] - 1e-9, EquilibriumKind::StableFocus),
        (th[2], EquilibriumKind::StableNode),
        (10.0, EquilibriumKind::StableNode),
    ];
    for (m, k) in expect {
        t.check(kind(m) == k, || format!("m={m}: {:?} expected {k:?}", kind(m)));
    }
    for m in [-5.0, -3.0, -1.0, 0.0, 1.5, 4.0] {
        let o = equilibria(m).0;
        let ok = o.eigenvalues[0].norm() == 0.0 && (o.eigenvalues[1].re + m + 2.0).abs() < 1e-15 && o.eigenvalues[1].im == 0.0;
        t.check(ok && o.kind == EquilibriumKind::SaddleNode, || format!("O at m={m}: {:?}", o));
    }
    t.note(format!("thresholds located at {found1:.12}, 1.5, {found3:.12}"));
    t.done()
}

fn check_gamma_star(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let mut t = Tally::new();
    let rows: Vec<(f64, Result<(f64, f64)>)> = [-4.0, -3.0, -2.5, -1.75, -1.5, -1.25]
        .par_iter()
        .map(|&m| {
            let r = gamma_star_shooting(m, &opts).and_then(|a| Ok((a.gamma_star, gamma_star_separatrix(m)?.gamma_star)));
            (m, r)
        })
        .collect();
    for (m, r) in rows {
        let (a, b) = r?;
        t.check((a - b).abs() < 1e-4, || format!("m={m}: shooting {a} vs separatrix {b}"));
        if m < -2.0 {
            let bound = lower_gamma_bound(m);
            t.check(a > bound && b > bound, || format!("m={m}: {a}, {b} not above {bound}"));
        } else {
            t.check(a < 0.0 && b < 0.0, || format!("m={m}: {a}, {b} not negative"));
        }
        t.note(format!("m={m}: {a:.7}"));
    }
    t.done()
}

fn check_regime_table(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let gs3 = gamma_star_shooting(-3.0, &opts)?.gamma_star;
    let gs15 = gamma_star_shooting(-1.5, &opts)?.gamma_star;
    let mut cases: Vec<(f64, f64, SolutionCount)> = Vec::new();
    for g in [-1.0, 0.0, 0.3, 2.0] {
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
    let got: Vec<Result<crate::report::Census>> = cases.par_iter().map(|&(m, g, _)| census(p(m, g), &opts)).collect();
    let mut t = Tally::new();
    for ((m, g, want), c) in cases.iter().zip(got) {
        let c = c?;
        t.check(c.count == *want, || format!("m={m}, gamma={g}: {:?} expected {want:?}", c.count));
        if *want == SolutionCount::Continuum {
            let w = c.alpha_hi.unwrap_or(0.0) - c.alpha_lo.unwrap_or(0.0);
            t.check(w > 0.0, || format!("m={m}, gamma={g}: interval width {w}"));
        }
    }
    t.note(format!("{} points", cases.len()));
    t.done()
}

fn check_tail_exponents(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    // (m, gamma, horizon); alpha is taken inside the unbounded family.
    let cases = [(-1.75, -10.0, 1e4), (-1.5, -4.0, 1e4), (-1.25, -3.0, 1e4), (-0.9, -1.0, 1e4), (-0.6, -1.0, 3e3)];
    let fits: Vec<Result<(f64, f64, f64)>> = cases
        .par_iter()
        .map(|&(m, g, horizon)| {
            let iv = alpha_interval(p(m, g), &opts)?;
            let alpha = if iv.hi.is_finite() { 0.5 * (iv.lo + iv.hi) } else { iv.lo + 1.0 };
            let traj = integrate(&o.spec(p(m, g), alpha, horizon))?;
            let fit = tail_exponent(&traj)?;
            Ok((m, fit.exponent_est, fit.exponent_rel_error()))
        })
        .collect();
    let mut t = Tally::new();
    for r in fits {
        let (m, est, err) = r?;
        t.check(err < 0.05, || format!("m={m}: exponent {est} vs {} ({:.1}%)", growth_exponent(m), 100.0 * err));
        t.note(format!("m={m}: {est:.4}"));
    }
    let (gamma, alpha) = (-1.0, 2.0);
    let traj = integrate(&o.spec(p(-1.0, gamma), alpha, 1e3))?;
    let fit = tail_exponent(&traj)?;
    let c = (-2.0 * (1.0 + gamma * alpha)).sqrt();
    let cerr = (fit.coeff_at_target - c).abs() / c;
    t.check(fit.exponent_rel_error() < 0.05, || format!("m=-1: exponent {}", fit.exponent_est));
    t.check(cerr < 0.05, || format!("m=-1: coefficient {} vs {c}", fit.coeff_at_target));
    let iv = alpha_interval(p(3.0, 0.0), &opts)?;
    let traj = integrate(&o.spec(p(3.0, 0.0), 0.5 * (iv.lo + iv.hi), 1e3))?;
    match decay_check_2_over_t(&traj)? {
        DecayCheck::Measured { max_rel_error, .. } => {
            t.check(max_rel_error < 0.1, || format!("m=3: |t f - 2|/2 = {max_rel_error}"));
            t.note(format!("m=3: 2/t within {:.2}%", 100.0 * max_rel_error));
        }
        DecayCheck::Skipped { reason } => t.check(false, || format!("m=3 decay skipped: {reason}")),
    }
    t.done()
}

/// Randomized `(m, gamma, alpha)` whose trajectory keeps the sign of `f` on
/// the compared window `[0, t_end]`.
pub fn conjugacy_cases(seed: u64, n: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let m: f64 = rng.gen_range(-3.5..3.0);
        let g: f64 = rng.gen_range(-2.0..2.0);
        let a: f64 = rng.gen_range(-1.0..2.0);
        if (m + 2.0).abs() < 0.1 || g.abs() < 0.2 {
            continue;
        }
        out.push((m, g, a));
    }
    out
}

/// Largest `(u, v)` discrepancy between the transformed trajectory and the
/// planar orbit, over points with `|u| + |v| <= 50`.
pub fn conjugacy_error(m: f64, gamma: f64, alpha: f64, rel_tol: f64) -> Result<f64> {
    let spec = IvpSpec::new(p(m, gamma), alpha)
        .with_t_max(3.0)
        .with_tolerances(rel_tol, rel_tol * 1e-2)
        .stopping_on(&[EventKind::FZero]);
    let traj = integrate(&spec)?;
    let curve = blowup_transform(&traj, 0.0)?;
    let pts: Vec<_> = curve
        .points
        .iter()
        .take_while(|q| q.u.abs() + q.v.abs() <= 50.0)
        .copied()
        .collect();
    let Some(last) = pts.last() else { return Ok(0.0) };
    let start = (alpha / (gamma * gamma), 1.0 / gamma.powi(3));
    let popts = PlanarOptions {
        rel_tol: rel_tol * 1e-1,
        abs_tol: rel_tol * 1e-3,
        ..PlanarOptions::default()
    };
    let orbit = integrate_planar(m, start, 0.0, last.s, &popts, |_| false);
    let mut worst: f64 = 0.0;
    for q in &pts {
        match orbit.eval(q.s) {
            Some((u, v)) => worst = worst.max((u - q.u).abs()).max((v - q.v).abs()),
            None => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

fn check_conjugacy(o: &VerifyOptions) -> Result<Outcome> {
    let rel = o.solve().rel_tol;
    let cases = conjugacy_cases(o.seed, 20);
    let errs: Vec<Result<f64>> = cases.par_iter().map(|&(m, g, a)| conjugacy_error(m, g, a, rel)).collect();
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for ((m, g, a), e) in cases.iter().zip(errs) {
        let e = e?;
        worst = worst.max(e);
        t.check(e < 1e-5, || format!("(m, gamma, alpha)=({m:.3}, {g:.3}, {a:.3}): {e:.2e}"));
    }
    t.note(format!("20 cases, worst {worst:.2e}"));
    t.done()
}

/// A spread of accepted solutions: concave bounded, concave-convex and
/// unbounded ones.
pub fn accepted_samples(opts: &SolveOptions) -> Result<Vec<(Params, f64)>> {
    let mut out = Vec::new();
    for (m, g) in [(1.0, -1.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0), (-0.5, 0.0), (-1.0, -1.0), (2.0, -1.0)] {
        out.push((p(m, g), shoot_concave(p(m, g), None, opts)?.alpha));
    }
    let iv = alpha_interval(p(-0.75, -1.0), opts)?;
    out.push((p(-0.75, -1.0), iv.lo));
    out.push((p(-0.75, -1.0), iv.lo + 1.0));
    let iv = alpha_interval(p(2.0, -1.0), opts)?;
    out.push((p(2.0, -1.0), 0.5 * (iv.lo + iv.hi)));
    let iv = alpha_interval(p(-1.5, -4.0), opts)?;
    out.push((p(-1.5, -4.0), iv.lo));
    out.push((p(-1.5, -4.0), 0.5 * (iv.lo + iv.hi)));
    let iv = alpha_interval(p(-3.0, 3.0), opts)?;
    out.push((p(-3.0, 3.0), iv.lo));
    out.push((p(-3.0, 3.0), 0.5 * (iv.lo + iv.hi)));
    Ok(out)
}

fn check_identities(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let samples = accepted_samples(&opts)?;
    let tols = [1e-6, 1e-8, 1e-10];
    let rows: Vec<Result<(Params, f64, Shape, Vec<f64>)>> = samples
        .par_iter()
        .map(|&(pp, alpha)| {
            let (rep, _) = solve_trajectory(pp, alpha, &opts)?;
            let mut seq = Vec::new();
            for rel in tols {
                let tr = integrate(&IvpSpec::new(pp, alpha).with_t_max(rep.t_max).with_tolerances(rel, rel * 1e-2))?;
                let (lo, hi) = tr.t_range();
                seq.push(residuals(&tr, lo, hi)?.max());
            }
            Ok((pp, alpha, rep.classification.shape, {
                seq.push(rep.identity_residuals.max());
                seq
            }))
        })
        .collect();
    let mut t = Tally::new();
    for r in rows {
        let (pp, alpha, shape, seq) = r?;
        let at_default = seq[3];
        t.check(shape.is_accepted(), || format!("m={}, gamma={}, alpha={alpha}: {shape:?}", pp.m, pp.gamma));
        t.check(at_default < 1e-6, || format!("m={}, gamma={}: residual {at_default:.2e}", pp.m, pp.gamma));
        t.check(seq[1] <= seq[0] && seq[2] <= seq[1], || {
            format!("m={}, gamma={}: residuals {:.2e}, {:.2e}, {:.2e} not decreasing", pp.m, pp.gamma, seq[0], seq[1], seq[2])
        });
    }
    t.note(format!("{} accepted solutions", samples.len()));
    t.done()
}

/// Invariant violations found on one `(m, gamma, alpha)`.
pub fn invariant_violations(pp: Params, alpha: f64, opts: &SolveOptions) -> Result<Vec<String>> {
    let (m, gamma) = (pp.m, pp.gamma);
    let mut bad = Vec::new();
    let (rep, traj) = solve_trajectory(pp, alpha, opts)?;
    let shape = rep.classification.shape;
    // Sign propagation of f''.
    let fpp_zero: Vec<_> = traj.events_of(EventKind::FppZero).collect();
    if m <= -0.5 {
        if traj.states.iter().any(|s| s.fpp > 0.0) || !fpp_zero.is_empty() {
            bad.push("f'' became nonnegative with m <= -1/2".into());
        }
    } else if let Some(first) = fpp_zero.first() {
        if fpp_zero.len() > 1 || traj.states.iter().any(|s| s.t > first.t && s.fpp < 0.0) {
            bad.push("f'' changed sign twice with m > -1/2".into());
        }
    }
    if !shape.is_accepted() {
        return Ok(bad);
    }
    if let Some(rule) = nonexistence_rule(&pp) {
        bad.push(format!("accepted although {rule}"));
    }
    if (-2.0..=-1.0).contains(&m) && gamma < 0.0 && alpha < alpha_lower_bound(&pp) - 1e-8 {
        bad.push(format!("alpha={alpha} below -1/((m+2) gamma)"));
    }
    if m <= -0.5 && alpha <= 0.0 {
        bad.push("accepted with f'(0) <= 0 and m <= -1/2".into());
    }
    if m >= -0.5 && !matches!(rep.classification.boundedness, Boundedness::Bounded { .. }) {
        bad.push(format!("unbounded verdict with m={m} >= -1/2"));
    }
    let bounded = matches!(rep.classification.boundedness, Boundedness::Bounded { .. });
    if m > -1.0 && shape == Shape::Concave && bounded {
        if let Some(c) = bounded_ceiling(m, gamma, alpha) {
            let slack = 1e-8 * (1.0 + c);
            if traj.states.iter().any(|s| s.f < -gamma - slack || s.f > c + slack) {
                bad.push(format!("f leaves [-gamma, {c}]"));
            }
        }
    }
    let fpp_end = traj.last().fpp.abs();
    let small = 10.0 * opts.eps_far;
    match rep.classification.evidence {
        Evidence::FarField => {
            if fpp_end >= small {
                bad.push(format!("|f''(t_max)| = {fpp_end:.2e}"));
            }
        }
        _ => {
            // Follow algebraic tails until f'' is small.
            if let Some(t) = fpp_decay_time(pp, alpha, rep.t_max, small, opts)? {
                if !t.is_finite() {
                    bad.push("f'' does not decay".into());
                }
            }
        }
    }
    Ok(bad)
}

/// Time at which `|f''|` first drops below `small`, searching up to `2e4`.
fn fpp_decay_time(pp: Params, alpha: f64, from: f64, small: f64, opts: &SolveOptions) -> Result<Option<f64>> {
    let mut horizon = from;
    while horizon < 2e4 {
        horizon = (horizon * 4.0).min(2e4);
        let tr = integrate(&opts.spec(pp, alpha).with_t_max(horizon))?;
        if tr.termination != Termination::ReachedTMax {
            return Ok(Some(f64::INFINITY));
        }
        if tr.last().fpp.abs() < small {
            return Ok(Some(horizon));
        }
    }
    Ok(Some(f64::INFINITY))
}

/// Randomized invariant cases. Most slopes are taken from the computed
/// solution set so that accepted solutions are well represented.
pub fn invariant_cases(seed: u64, n: usize, opts: &SolveOptions) -> Vec<(Params, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            let m = loop {
                let m: f64 = rng.gen_range(-3.5..3.0);
                if (m + 2.0).abs() > 0.1 {
                    break m;
                }
            };
            (m, rng.gen_range(-3.0..3.0), rng.gen::<f64>(), rng.gen_range(-1.0..3.0))
        })
        .collect();
    draws
        .par_iter()
        .map(|&(m, g, pick, free)| {
            let pp = p(m, g);
            let iv = if nonexistence_rule(&pp).is_none() {
                alpha_interval(pp, opts).ok().filter(|iv| iv.kind != IntervalKind::Empty)
            } else {
                None
            };
            let alpha = match iv {
                Some(iv) if pick < 0.4 => iv.lo,
                Some(iv) if pick < 0.55 && iv.hi.is_finite() => iv.hi,
                Some(iv) if pick < 0.75 && iv.kind == IntervalKind::Interval => {
                    if iv.hi.is_finite() {
                        iv.lo + (iv.hi - iv.lo) * (pick - 0.55) / 0.2
                    } else {
                        iv.lo + 5.0 * (pick - 0.55)
                    }
                }
                _ => free,
            };
            (pp, alpha)
        })
        .collect()
}

fn check_invariants(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let cases = invariant_cases(o.seed, 200, &opts);
    let rows: Vec<(Params, f64, Result<Vec<String>>)> = cases
        .par_iter()
        .map(|&(pp, a)| (pp, a, invariant_violations(pp, a, &opts)))
        .collect();
    let mut t = Tally::new();
    let n = rows.len();
    for (pp, a, r) in rows {
        match r {
            Ok(v) => {
                for b in v {
                    t.check(false, || format!("(m, gamma, alpha)=({}, {}, {a}): {b}", pp.m, pp.gamma));
                }
            }
            Err(e) => t.check(false, || format!("(m, gamma, alpha)=({}, {}, {a}): {e}", pp.m, pp.gamma)),
        }
    }
    t.note(format!("{n} cases"));
    t.done()
}

/// The quantities compared by the horizon check at one `t_max`.
pub fn horizon_quantities(opts: &SolveOptions) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (m, g) in [(1.0, 0.0), (0.0, 1.0), (-1.0, -1.0), (-0.5, 0.0)] {
        let r = shoot_concave(p(m, g), None, opts)?;
        out.push((format!("alpha*(m={m}, gamma={g})"), r.alpha));
        out.push((format!("lambda(m={m}, gamma={g})"), r.lambda_est.unwrap_or(f64::NAN)));
    }
    for (m, g) in [(-0.75, -1.0), (2.0, -1.0), (-3.0, 3.0), (-1.5, -4.0)] {
        let iv = alpha_interval(p(m, g), opts)?;
        out.push((format!("alpha_lo(m={m}, gamma={g})"), iv.lo));
        if iv.hi.is_finite() {
            out.push((format!("alpha_hi(m={m}, gamma={g})"), iv.hi));
        }
    }
    for m in [-3.0, -1.5] {
        out.push((format!("gamma*(m={m})"), gamma_star_shooting(m, opts)?.gamma_star));
    }
    Ok(out)
}

fn check_horizon(o: &VerifyOptions) -> Result<Outcome> {
    let base = o.solve();
    let runs: Vec<Result<Vec<(String, f64)>>> = [base, base.with_t_max(2.0 * base.t_max)]
        .par_iter()
        .map(horizon_quantities)
        .collect();
    let mut it = runs.into_iter();
    let (a, b) = (it.next().unwrap()?, it.next().unwrap()?);
    let mut t = Tally::new();
    let mut worst: f64 = 0.0;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        let d = (x - y).abs();
        worst = worst.max(d);
        t.check(d < 1e-5, || format!("{name}: {x} vs {y}"));
    }
    t.note(format!("{} quantities, worst change {worst:.2e}", a.len()));
    t.done()
}

fn check_blasius(o: &VerifyOptions) -> Result<Outcome> {
    let mut t = Tally::new();
    for (g, a) in [(0.0, 1.2), (-1.0, 0.8), (1.0, 2.0), (0.5, 0.9)] {
        let tr = integrate(&o.spec(p(-0.5, g), a, 20.0))?;
        let r = blasius_check(&tr)?;
        t.check(r < 1e-6, || format!("gamma={g}, alpha={a}: {r:.2e}"));
    }
    let tr = integrate(&o.spec(p(0.0, 0.0), 1.0, 1.0))?;
    t.check(blasius_check(&tr).is_err(), || "m=0 accepted by the Blasius check".into());
    t.done()
}

fn check_translate(o: &VerifyOptions) -> Result<Outcome> {
    let opts = o.solve();
    let m = -0.75;
    let g0 = shoot_concave(p(m, 0.0), None, &opts)?;
    let g = TwoSided::integrate(m, g0.alpha, 3.0, 200.0)?;
    let mut t = Tally::new();
    let ts = translate_scale(&g, 0.0)?;
    t.check(ts.t0 == 0.0 && ts.spec.alpha == g0.alpha, || "gamma=0 is not the identity".into());
    let ts = translate_scale(&g, -1.0)?;
    let (rep, traj) = solve_trajectory(ts.spec.params, ts.spec.alpha, &opts)?;
    let st = traj.first();
    t.check((st.f - 1.0).abs() < 1e-12, || format!("f(0)={}", st.f));
    let fpp = ts.k.powi(3) * g.eval(ts.t0)?[2];
    t.check((fpp + 1.0).abs() < 1e-8, || format!("k^3 g''(t0) = {fpp}"));
    t.check(
        rep.classification.shape == Shape::Concave && matches!(rep.classification.boundedness, Boundedness::Bounded { .. }),
        || format!("{:?}", rep.classification),
    );
    let iv = alpha_interval(p(m, -1.0), &opts)?;
    t.check((iv.lo - ts.spec.alpha).abs() < 1e-6, || format!("alpha {} vs shooting {}", ts.spec.alpha, iv.lo));
    t.done()
}

fn check_sectors(_: &VerifyOptions) -> Result<Outcome> {
    let mut t = Tally::new();
    let opts = TraceOptions {
        s_max: 50.0,
        ..TraceOptions::default()
    };
    for m in [-3.5, -3.0, -1.75, -1.5, -0.75, 0.0, 2.0] {
        let lay = sector_layout(m)?;
        // Near O the traced curves must sit on the predicted side.
        let side = |v: f64| if v > 0.0 { Side::Above } else { Side::Below };
        for which in [Separatrix::S0, Separatrix::S1] {
            let tr = trace_separatrix(m, which, None, &opts)?;
            if let Some(q) = tr.points.iter().find(|q| q.u.abs() > 1e-3 && q.u.abs() < 2e-2) {
                let s = side(q.v + (m + 2.0) * q.u);
                t.check(s == lay.w_side, || format!("m={m} {which:?}: {s:?} of L, expected {:?}", lay.w_side));
            }
        }
        let tr = trace_separatrix(m, Separatrix::S2, None, &opts)?;
        if let Some(q) = tr.points.iter().find(|q| q.u.abs() > 1e-3 && q.u.abs() < 2e-2) {
            let s = side(q.v);
            t.check(s == lay.center_side, || format!("m={m} S2: {s:?} of L0, expected {:?}", lay.center_side));
        }
    }
    let tr = trace_separatrix(-1.0, Separatrix::S0, None, &opts)?;
    let dev = tr.points.iter().map(|q| (q.v + q.u).abs()).fold(0.0, f64::max);
    t.check(dev < 1e-6, || format!("m=-1: |v+u| up to {dev:.2e}"));
    t.done()
}

fn check_cycles(_: &VerifyOptions) -> Result<Outcome> {
    let mut t = Tally::new();
    let r = limit_cycle_probe(1.2)?;
    t.check(r.verdict == CycleVerdict::Cycle, || format!("m=1.2: {:?}", r.verdict));
    let r = limit_cycle_probe(3.0)?;
    t.check(r.verdict == CycleVerdict::SpiralsIntoA, || format!("m=3: {:?}", r.verdict));
    let r = limit_cycle_probe(1.5)?;
    let d = r.near_a_displacement.unwrap_or(f64::INFINITY);
    t.check(d < 1e-4, || format!("m=3/2: return displacement {d:.2e} near A"));
    t.done()
}

fn check_covariance(o: &VerifyOptions) -> Result<Outcome> {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed ^ 0x5eed);
    let mut done = 0;
    while done < 10 {
        let m: f64 = rng.gen_range(-1.5..2.0);
        let a: f64 = rng.gen_range(0.2..2.0);
        let t0: f64 = rng.gen_range(0.0..1.0);
        let g = integrate(&o.spec(p(m, 0.0), a, 6.0))?;
        let Ok(s0) = g.eval(t0) else { continue };
        if !(s0.fpp < 0.0) {
            continue;
        }
        // k^3 g''(t0) = -1 makes f(t) = k g(k t + t0) a standard problem.
        let k = (-1.0 / s0.fpp).cbrt();
        let span = ((g.t_end() - t0) / k).min(3.0);
        if span < 0.5 {
            continue;
        }
        let spec = IvpSpec::new(p(m, -k * s0.f), k * k * s0.fp).with_t_max(span);
        let f = integrate(&o.spec(spec.params, spec.alpha, span))?;
        let mut worst: f64 = 0.0;
        for i in 0..=30 {
            let s = span * i as f64 / 30.0;
            let (Ok(fs), Ok(gs)) = (f.eval(s), g.eval(k * s + t0)) else { continue };
            worst = worst.max((fs.f - k * gs.f).abs() / (1.0 + fs.f.abs()));
        }
        t.check(worst < 1e-7, || format!("m={m:.3}, k={k:.3}, t0={t0:.3}: deviation {worst:.2e}"));
        done += 1;
    }
    t.note(format!("{done} scalings"));
    t.done()
}
