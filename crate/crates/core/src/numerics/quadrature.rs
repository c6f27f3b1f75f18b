//! Gauss–Legendre / Gauss–Laguerre rules and adaptive integration, including
//! a log-domain driver for integrands that are only representable as logs.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shared 64-point rule.
pub fn gauss_legendre_64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

/// Shared 20-point rule used as the panel rule of the adaptive driver.
pub fn gauss_legendre_20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// An `n`-point Gauss–Laguerre rule for `∫_0^∞ e^{-x} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
                }
            };
            let mut pp = 0.0;
            let mut p2 = 0.0;
            for _ in 0..200 {
                let mut p1 = 1.0;
                p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
                }
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = -1.0 / (pp * nf * p2);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// Adaptive bisection driver: a panel is accepted when the 20-point rule on
/// the whole panel agrees with the sum over its two halves.
pub fn adaptive(
    f: &(impl Fn(f64) -> f64 + ?Sized),
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    let rule = gauss_legendre_20();
    let mut stack = vec![(a, b, rule.integrate(f, a, b))];
    let mut total = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        let refined = left + right;
        panels += 1;
        if panels > max_panels {
            return Err(Error::Quadrature(format!("panel budget {max_panels} exceeded on [{a}, {b}]")));
        }
        let err = (refined - whole).abs();
        if err <= abs_tol.max(rel_tol * refined.abs()) || (hi - lo) < 1e-12 * (b - a).abs() {
            total += refined;
        } else {
            stack.push((lo, mid, left));
            stack.push((mid, hi, right));
        }
    }
    Ok(total)
}

/// Integrate `exp(log_f)` over `[a, b]` and return the natural log of the
/// result. The integrand is shifted by its sampled maximum so peaks of
/// height `e^{1000}` are handled. `hints` are points where the integrand is
/// known to peak; they become panel breakpoints.
///
/// A log-integrand of size `L` carries rounding noise of order `L eps`, so
/// the tolerance is raised to `64 eps |shift|` when that is larger. The
/// shifted integrand peaks near 1, so panels below `1e-150` are accepted
/// outright instead of being refined through the subnormal range.
pub fn log_integrate(log_f: impl Fn(f64) -> f64, a: f64, b: f64, hints: &[f64], rel_tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(f64::NEG_INFINITY);
    }
    const SAMPLES: usize = 512;
    let mut shift = f64::NEG_INFINITY;
    for i in 0..=SAMPLES {
        let x = a + (b - a) * (i as f64 + 0.5) / (SAMPLES as f64 + 1.0);
        shift = shift.max(log_f(x));
    }
    for &h in hints {
        if h > a && h < b {
            shift = shift.max(log_f(h));
        }
    }
    if !shift.is_finite() {
        return Ok(shift);
    }
    let mut breaks = vec![a];
    let mut inner: Vec<f64> = hints.iter().copied().filter(|h| *h > a && *h < b).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    breaks.extend(inner);
    breaks.push(b);
    let g = |x: f64| (log_f(x) - shift).exp();
    let tol = rel_tol.max(64.0 * f64::EPSILON * shift.abs());
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        sum += adaptive(&g, w[0], w[1], tol, 1e-150, 20_000)?;
    }
    Ok(shift + sum.ln())
}
