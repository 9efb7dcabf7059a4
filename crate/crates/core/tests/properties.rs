use fluxsim::dopri::bisect_root;
use fluxsim::phase_plane::{equilibria, vector_field, EquilibriumKind};
use fluxsim::regime::{lower_gamma_bound, nonexistence_rule};
use fluxsim::report::{fmt_f64, Grid};
use fluxsim::*;
use proptest::prelude::*;

fn p(m: f64, g: f64) -> Params {
    Params::new(m, g).unwrap()
}

/// `None` when the step budget runs out; orbits with `f, f' -> +inf` turn
/// stiff long before they reach the blow-up bound.
fn short(m: f64, g: f64, a: f64, t_max: f64) -> Option<Trajectory> {
    match integrate(&IvpSpec::new(p(m, g), a).with_t_max(t_max)) {
        Ok(tr) => Some(tr),
        Err(Error::StepBudget { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // f'' + f f' is a first integral at m = -1.
    #[test]
    fn riccati_first_integral(g in -3.0f64..3.0, a in -2.0f64..3.0) {
        let tr = short(-1.0, g, a, 5.0);
        prop_assume!(tr.is_some());
        let tr = tr.unwrap();
        let c0 = -1.0 - g * a;
        for s in &tr.states {
            let scale = 1.0 + s.fpp.abs() + (s.f * s.fp).abs();
            prop_assert!((s.fpp + s.f * s.fp - c0).abs() < 1e-7 * scale, "t={} drift {}", s.t, s.fpp + s.f * s.fp - c0);
        }
    }

    // f'' keeps its initial sign when 2m + 1 <= 0.
    #[test]
    fn concavity_is_kept(m in -3.5f64..-0.5, g in -3.0f64..3.0, a in -1.0f64..3.0) {
        prop_assume!((m + 2.0).abs() > 0.05);
        let tr = short(m, g, a, 10.0);
        prop_assume!(tr.is_some());
        let tr = tr.unwrap();
        prop_assert!(tr.states.iter().all(|s| s.fpp < 0.0));
        prop_assert_eq!(tr.events_of(EventKind::FppZero).count(), 0);
    }

    #[test]
    fn recorded_events_are_roots(m in -1.0f64..2.0, g in -2.0f64..2.0, a in -1.0f64..2.0) {
        let tr = short(m, g, a, 8.0);
        prop_assume!(tr.is_some());
        let tr = tr.unwrap();
        for e in &tr.events {
            let v = match e.kind {
                EventKind::FZero => e.state.f,
                EventKind::FpZero => e.state.fp,
                EventKind::FppZero => e.state.fpp,
            };
            prop_assert!(v.abs() < 1e-9 * (1.0 + e.state.max_abs()), "{:?} at {}: {}", e.kind, e.t, v);
        }
    }

    #[test]
    fn dense_output_matches_steps(m in -1.0f64..2.0, g in -1.0f64..1.0, a in 0.0f64..2.0) {
        let tr = short(m, g, a, 4.0);
        prop_assume!(tr.is_some());
        let tr = tr.unwrap();
        for s in tr.states.iter().skip(1) {
            let d = tr.eval(s.t).unwrap();
            prop_assert!((d.f - s.f).abs() <= 1e-12 * (1.0 + s.f.abs()));
            prop_assert!((d.fp - s.fp).abs() <= 1e-12 * (1.0 + s.fp.abs()));
        }
    }

    #[test]
    fn bisection_brackets_the_root(r in -5.0f64..5.0, w in 0.1f64..3.0) {
        let g = |x: f64| (x - r) * (1.0 + x * x);
        let root = bisect_root(g, r - w, r + 0.7 * w, g(r - w), 1e-13);
        prop_assert!((root - r).abs() < 1e-12);
    }

    // Kind of A follows from trace and discriminant of its Jacobian.
    #[test]
    fn equilibrium_kind_matches_trace_and_discriminant(m in -8.0f64..8.0) {
        prop_assume!((m + 2.0).abs() > 1e-6);
        let a = equilibria(m).1;
        let tr = 2.0 - m - 0.5;
        let det = 2.0 * (-m - 0.5) + 2.0 * m + 2.5;
        let disc = tr * tr - 4.0 * det;
        let z = a.eigenvalues;
        prop_assert!(((z[0] + z[1]).re - tr).abs() < 1e-9);
        prop_assert!(((z[0] * z[1]).re - det).abs() < 1e-9);
        let (pp, qq) = vector_field(m, -0.5, 0.5);
        prop_assert!(pp.abs() < 1e-15 && qq.abs() < 1e-15);
        if disc.abs() > 1e-9 && tr.abs() > 1e-9 {
            let expect = match (disc < 0.0, tr > 0.0) {
                (true, true) => EquilibriumKind::UnstableFocus,
                (true, false) => EquilibriumKind::StableFocus,
                (false, true) => EquilibriumKind::UnstableNode,
                (false, false) => EquilibriumKind::StableNode,
            };
            prop_assert_eq!(a.kind, expect);
        }
    }

    #[test]
    fn low_gamma_has_no_solution_below_minus_two(m in -4.0f64..-2.1, frac in 0.0f64..1.0) {
        let g = frac * lower_gamma_bound(m);
        let pp = p(m, g);
        prop_assert!(nonexistence_rule(&pp).is_some());
        let iv = alpha_interval(pp, &SolveOptions::default()).unwrap();
        prop_assert_eq!(iv.kind, IntervalKind::Empty);
    }

    #[test]
    fn fmt_f64_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn grid_ranges_are_sorted_and_inclusive(lo in -3.0f64..0.0, w in 0.1f64..3.0, n in 2usize..12) {
        let hi = lo + w;
        let g = Grid::parse(&format!("m={lo}:{hi}:{n};gamma=1,0,-1")).unwrap();
        prop_assert_eq!(g.m.len(), n);
        prop_assert!(g.m.windows(2).all(|x| x[0] < x[1]));
        prop_assert!((g.m[0] - lo).abs() < 1e-12 && (g.m[n - 1] - hi).abs() < 1e-12);
        prop_assert_eq!(g.gamma.clone(), vec![-1.0, 0.0, 1.0]);
        prop_assert_eq!(g.len(), 3 * n);
    }
}
