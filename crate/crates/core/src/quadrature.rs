//! Gauss–Legendre rules on intervals.

/// Two-point rule on [-1, 1]: (node, weight).
pub const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

/// Five-point rule on [-1, 1].
pub const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Integrates `f` over [a, b] with the given rule.
pub fn integrate(rule: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Composite five-point Gauss over consecutive panel breakpoints.
pub fn composite_gauss5(breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    breaks.windows(2).map(|w| integrate(&GAUSS5, w[0], w[1], &f)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_is_exact_for_degree_nine() {
        let v = integrate(&GAUSS5, -0.3, 1.7, |x| x.powi(9) - 2.0 * x.powi(4));
        let exact = (1.7f64.powi(10) - 0.3f64.powi(10)) / 10.0 - 2.0 * (1.7f64.powi(5) + 0.3f64.powi(5)) / 5.0;
        assert!((v - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn two_point_is_exact_for_cubics() {
        let v = integrate(&GAUSS2, 0.0, 2.0, |x| x * x * x + x);
        assert!((v - 6.0).abs() < 1e-14);
    }
}
