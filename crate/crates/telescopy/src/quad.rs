//! Adaptive Gauss–Legendre quadrature for oscillatory Fourier integrands.
//!
//! The coherence integrals `g(k) = ∫ I(x) e^{ikx} dx` have smooth densities
//! under an oscillatory kernel, so a fixed-order panel rule with adaptive
//! bisection converges quickly: each panel is accepted when splitting it in
//! two changes the estimate by less than the requested relative tolerance.

use num_complex::Complex64;
use std::sync::OnceLock;

const PANEL_ORDER: usize = 15;
const MAX_DEPTH: usize = 40;

/// Gauss–Legendre nodes and weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre_15() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n(x).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = gauss_legendre_15();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

fn refine<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    rel_tol: f64,
    scale: f64,
    depth: usize,
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let split = left + right;
    if depth >= MAX_DEPTH || (split - whole).norm() <= rel_tol * scale.max(1e-300) {
        return split;
    }
    refine(f, a, mid, left, rel_tol, scale, depth + 1)
        + refine(f, mid, b, right, rel_tol, scale, depth + 1)
}

/// Integrate a complex-valued function over `[a, b]` to the given relative
/// tolerance.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rel_tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let whole = panel(&f, a, b);
    let scale = whole.norm();
    refine(&f, a, b, whole, rel_tol, scale, 0)
}

/// Integrate a real-valued function over `[a, b]`.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, rel_tol).re
}
