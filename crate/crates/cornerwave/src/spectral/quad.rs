//! Gauss–Legendre panel quadrature.
//!
//! Radial coefficient integrals and the field synthesis both integrate smooth
//! but oscillatory integrands over finite windows. Composite 16-point
//! Gauss–Legendre panels handle those well: each panel is exact through
//! degree 31, so once a panel spans at most a few oscillation periods the
//! error drops with machine-epsilon-limited speed under panel doubling.

use std::sync::OnceLock;
use thiserror::Error;

use crate::tol::TOL_QUAD_REL;

/// Panel-doubling refinement limit: 2^24 panels on a window is far past the
/// point where roundoff dominates any smooth integrand.
const MAX_DOUBLINGS: u32 = 24;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature failed to converge on [{a}, {b}]: relative change {last_change:.3e} after {panels} panels")]
    NoConvergence {
        a: f64,
        b: f64,
        panels: usize,
        last_change: f64,
    },
}

/// Legendre polynomial value and derivative at `x` by the three-term
/// recurrence; the derivative uses the standard lowering identity.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// ascending. Roots come from Newton iteration seeded by the Chebyshev cosine
/// approximation; four iterations reach full double precision.
pub fn gl_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "a Gauss rule needs at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..60 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = w;
        nodes[k] = -x;
        weights[k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// The 16-point rule, cached: it is the panel workhorse for every integral in
/// this module.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gl_nodes(16))
}

/// All nodes and scaled weights of `panels` equal GL-16 panels across
/// [a, b], in ascending order. This is the explicit grid the synthesis path
/// shares between coefficient and field evaluation.
pub fn panel_grid(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1 && b > a, "panel grid needs b > a and >= 1 panel");
    let (xs, ws) = gl16();
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(16 * panels);
    let mut weights = Vec::with_capacity(16 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (&x, &w) in xs.iter().zip(ws) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// Composite GL-16 integral of `f` over [a, b] with a fixed panel count.
pub fn panel_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (xs, ws) = gl16();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (&x, &w) in xs.iter().zip(ws) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

/// Integral of `f` over [a, b] by panel doubling from `initial_panels` until
/// successive refinements agree to the relative quadrature tolerance.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
) -> Result<f64, QuadError> {
    let mut panels = initial_panels.max(1);
    let mut prev = panel_integrate(&mut f, a, b, panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let next = panel_integrate(&mut f, a, b, panels);
        // The scale floor keeps integrals that are legitimately ~0 (odd
        // integrands, cancelling oscillations) from demanding impossible
        // relative agreement.
        let scale = next.abs().max(prev.abs()).max(1e-300);
        last_change = (next - prev).abs() / scale;
        if last_change <= TOL_QUAD_REL {
            return Ok(next);
        }
        prev = next;
    }
    Err(QuadError::NoConvergence {
        a,
        b,
        panels,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_point_rule_matches_reference_values() {
        let (xs, ws) = gl16();
        assert_eq!(xs.len(), 16);
        // Outermost node/weight of the 16-point rule from standard tables.
        assert!(
            (xs[15] - 0.989_400_934_991_649_9).abs() < 1e-15,
            "largest node off: {}",
            xs[15]
        );
        assert!(
            (ws[15] - 0.027_152_459_411_754_095).abs() < 1e-15,
            "edge weight off: {}",
            ws[15]
        );
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-14, "weights must sum to 2: {total}");
    }

    #[test]
    fn rules_are_symmetric_and_ordered_for_many_sizes() {
        for n in 2..=64 {
            let (xs, ws) = gl_nodes(n);
            let total: f64 = ws.iter().sum();
            assert!(
                (total - 2.0).abs() < 1e-13,
                "n={n}: weights sum to {total}"
            );
            for k in 0..n {
                assert!(
                    (xs[k] + xs[n - 1 - k]).abs() < 1e-15,
                    "n={n}: nodes not symmetric at k={k}"
                );
                if k > 0 {
                    assert!(xs[k] > xs[k - 1], "n={n}: nodes not ascending at k={k}");
                }
            }
        }
    }

    #[test]
    fn single_panel_is_exact_through_degree_31() {
        // x^31 over [-1, 1] vanishes by symmetry; x^30 has a known value.
        let odd = panel_integrate(|x| x.powi(31), -1.0, 1.0, 1);
        assert!(odd.abs() < 1e-15, "odd power should vanish: {odd}");
        let even = panel_integrate(|x| x.powi(30), -1.0, 1.0, 1);
        assert!(
            (even - 2.0 / 31.0).abs() < 1e-15,
            "x^30 integral off: {even}"
        );
    }

    #[test]
    fn adaptive_doubling_resolves_an_oscillatory_integral() {
        let want = (140.0f64).sin() / 7.0;
        let got = integrate_adaptive(|x| (7.0 * x).cos(), 0.0, 20.0, 1).unwrap();
        assert!(
            (got - want).abs() <= 1e-8 * want.abs().max(1.0),
            "cos(7x) over [0,20]: {got} vs {want}"
        );
    }

    #[test]
    fn adaptive_doubling_reports_divergence() {
        // 1/|x - 1/2| is not integrable; panel doubling must give up rather
        // than return a number.
        let res = integrate_adaptive(|x| 1.0 / (x - 0.5).abs(), 0.0, 1.0, 1);
        assert!(
            matches!(res, Err(QuadError::NoConvergence { .. })),
            "divergent integrand must not converge"
        );
    }

    #[test]
    fn panel_grid_reproduces_the_panel_integral() {
        let (nodes, weights) = panel_grid(0.3, 2.1, 7);
        assert_eq!(nodes.len(), 7 * 16);
        let f = |x: f64| (1.3 * x).sin() * x;
        let direct = panel_integrate(f, 0.3, 2.1, 7);
        let via_grid: f64 = nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum();
        assert!(
            (direct - via_grid).abs() < 1e-14,
            "grid and closure forms disagree: {direct} vs {via_grid}"
        );
        for pair in nodes.windows(2) {
            assert!(pair[1] > pair[0], "grid nodes must ascend");
        }
    }
}
