//! Gauss–Legendre rules and a globally adaptive integrator built on them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots of `P_n` by Newton iteration from the Chebyshev-like initial
/// guesses `cos(π(i − 1/4)/(n + 1/2))`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre: need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

const PANEL_ORDER: usize = 10;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Fixed-order Gauss–Legendre estimate of `∫_a^b f`.
pub fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // ties broken by position so the refinement order is deterministic
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64) -> Panel {
    let mid = 0.5 * (a + b);
    let left = gl_panel(f, a, mid);
    let right = gl_panel(f, mid, b);
    Panel {
        a,
        b,
        left,
        right,
        error: (left + right - whole).abs(),
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// Each panel is estimated by the 10-point rule on the whole panel and on
/// its two halves; the difference is the panel's error estimate. The panel
/// with the largest estimate is bisected until the summed estimate drops
/// below `rel_tol · |integral|` (or `abs_floor`).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_panels: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let whole = gl_panel(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(make_panel(f, a, b, whole));
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.left + p.right, e + p.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::non_convergence(
                "adaptive quadrature (non-finite integrand)",
                heap.len(),
            ));
        }
        if error <= rel_tol * value.abs() || error <= abs_floor {
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::non_convergence("adaptive quadrature", heap.len()));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::non_convergence(
                "adaptive quadrature (panel underflow)",
                heap.len(),
            ));
        }
        heap.push(make_panel(f, worst.a, mid, worst.left));
        heap.push(make_panel(f, mid, worst.b, worst.right));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(PANEL_ORDER);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for degree in 0..(2 * PANEL_ORDER) {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(degree as i32))
                .sum();
            let expected = if degree % 2 == 1 {
                0.0
            } else {
                2.0 / (degree as f64 + 1.0)
            };
            assert!((got - expected).abs() < 1e-14, "degree {degree}: {got}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let (nodes, _) = gauss_legendre(7);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(nodes[3].abs() < 1e-15);
        assert!((nodes[0] + nodes[6]).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate_adaptive(&|t: f64| t.sqrt(), 0.0, 2.0, 1e-12, 0.0, 5000).unwrap();
        let expected = 2.0 / 3.0 * 2.0_f64.powf(1.5);
        assert!((r.value - expected).abs() < 1e-11 * expected);
    }

    #[test]
    fn adaptive_smooth_integrand_single_panel() {
        let r = integrate_adaptive(&|t: f64| (-t).exp(), 0.0, 1.0, 1e-12, 0.0, 100).unwrap();
        assert_eq!(r.panels, 1);
        assert!((r.value - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let r = integrate_adaptive(&|t: f64| 1.0 / t, 0.0, 1.0, 1e-12, 0.0, 50);
        assert!(r.is_err());
    }
}
