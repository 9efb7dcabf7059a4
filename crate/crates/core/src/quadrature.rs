//! Gauss–Legendre quadrature over piecewise-smooth profiles.

use crate::ode::Trajectory;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`. Exact for polynomials of
/// degree up to 15.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut g: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        acc += w * (g(c - r * x) + g(c + r * x));
    }
    acc * r
}

/// A solution profile `t -> (f, f', f'')` with a natural panel structure.
pub trait Profile {
    fn m(&self) -> f64;
    /// Covered interval of `t`.
    fn domain(&self) -> (f64, f64);
    /// `[f, f', f'']` at `t`, which must lie in `domain()`.
    fn sample(&self, t: f64) -> [f64; 3];
    /// Integration panels covering `[lo, hi]`.
    fn panels(&self, lo: f64, hi: f64) -> Vec<(f64, f64)>;

    /// `∫_lo^hi g(t, f, f', f'') dt`, summed panel by panel.
    fn integrate<G: FnMut(f64, [f64; 3]) -> f64>(&self, lo: f64, hi: f64, mut g: G) -> f64
    where
        Self: Sized,
    {
        self.panels(lo, hi)
            .into_iter()
            .map(|(a, b)| gauss_legendre(|t| g(t, self.sample(t)), a, b))
            .sum()
    }
}

impl Profile for Trajectory {
    fn m(&self) -> f64 {
        self.params.m
    }

    fn domain(&self) -> (f64, f64) {
        self.t_range()
    }

    fn sample(&self, t: f64) -> [f64; 3] {
        self.eval(t)
            .map(|s| s.to_vec())
            .unwrap_or([f64::NAN; 3])
    }

    fn panels(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        Trajectory::panels(self, lo, hi)
    }
}

/// A closed-form profile split into uniform panels.
pub struct AnalyticProfile<F> {
    pub m: f64,
    pub domain: (f64, f64),
    pub panel_width: f64,
    pub eval: F,
}

impl<F: Fn(f64) -> [f64; 3]> Profile for AnalyticProfile<F> {
    fn m(&self) -> f64 {
        self.m
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn sample(&self, t: f64) -> [f64; 3] {
        (self.eval)(t)
    }

    fn panels(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        if hi <= lo {
            return Vec::new();
        }
        let n = ((hi - lo) / self.panel_width).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        (0..n)
            .map(|i| (lo + i as f64 * h, if i + 1 == n { hi } else { lo + (i + 1) as f64 * h }))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = GL8_WEIGHTS.iter().sum::<f64>() * 2.0;
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_degree_fifteen() {
        let v = gauss_legendre(|x| x.powi(15) + x.powi(14), 0.0, 1.0);
        assert!((v - (1.0 / 16.0 + 1.0 / 15.0)).abs() < 1e-14);
    }

    #[test]
    fn analytic_profile_panels_cover_interval() {
        let p = AnalyticProfile {
            m: 0.0,
            domain: (0.0, 10.0),
            panel_width: 0.3,
            eval: |t: f64| [t.sin(), t.cos(), -t.sin()],
        };
        let panels = p.panels(1.0, 7.0);
        assert_eq!(panels.first().unwrap().0, 1.0);
        assert_eq!(panels.last().unwrap().1, 7.0);
        let v = p.integrate(0.0, 3.0, |_, y| y[1]);
        assert!((v - 3f64.sin()).abs() < 1e-13);
    }
}
