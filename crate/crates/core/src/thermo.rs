//! Limiting thermodynamics: the grand-canonical entropy `f(beta, mu)`, the
//! limiting microcanonical entropy `s(m, rho)`, and the parameter bijection
//! between the two ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::numerics::jet::Jet;
use crate::numerics::optimize::{golden_max, golden_min};

/// Grand-canonical parameters with `mu > |beta|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldParams {
    beta: f64,
    mu: f64,
}

impl FieldParams {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        if beta.is_finite() && mu.is_finite() && mu > beta.abs() {
            Ok(Self { beta, mu })
        } else {
            Err(Error::InvalidFields { beta, mu })
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Single-site normalizer `q = 1/(mu+beta) + 1/(mu-beta)`.
    pub fn q(&self) -> f64 {
        1.0 / (self.mu + self.beta) + 1.0 / (self.mu - self.beta)
    }

    /// Probability that a single spin is positive under `eta(beta, mu)`.
    pub fn positive_mass(&self) -> f64 {
        (1.0 / (self.mu + self.beta)) / self.q()
    }
}

/// `f(beta, mu) = ln(1/(mu+beta) + 1/(mu-beta))`, or `+inf` when `mu <= |beta|`.
pub fn grand_entropy(beta: f64, mu: f64) -> f64 {
    if !(mu > beta.abs()) {
        return f64::INFINITY;
    }
    (1.0 / (mu + beta) + 1.0 / (mu - beta)).ln()
}

/// `s(m, rho) = 1 + ln((sqrt((rho+m)/2) + sqrt((rho-m)/2))^2)` on the interior.
pub fn limiting_entropy(point: &ModelPoint) -> Result<f64> {
    point.require_interior()?;
    let u = (0.5 * (point.rho() + point.m())).sqrt() + (0.5 * (point.rho() - point.m())).sqrt();
    Ok(1.0 + (u * u).ln())
}

/// The algebraically simplified form `1 + ln(rho + sqrt(rho^2 - m^2))`.
pub fn limiting_entropy_simplified(point: &ModelPoint) -> Result<f64> {
    point.require_interior()?;
    let (m, rho) = (point.m(), point.rho());
    Ok(1.0 + (rho + (rho * rho - m * m).sqrt()).ln())
}

/// `s(m, 1)` on the closed interval `[-1, 1]`, using the continuous
/// extension `s(±1, 1) = 1` at the endpoints.
pub fn unit_slice_entropy(m: f64) -> Result<f64> {
    if !(m.abs() <= 1.0) {
        return Err(Error::Domain(format!("m = {m} outside [-1, 1]")));
    }
    Ok(1.0 + (1.0 + (1.0 - m * m).max(0.0).sqrt()).ln())
}

/// Taylor jet of `m -> s(m, 1)` at an interior `m`, exact up to `order`.
pub fn unit_slice_entropy_jet(m: f64, order: usize) -> Jet {
    let x = Jet::variable(m, order);
    let r = (&Jet::constant(1.0, order) - &(&x * &x)).sqrt();
    r.add_scalar(1.0).ln().add_scalar(1.0)
}

/// The ensemble bijection `(m, rho) -> (beta, mu)`:
/// `mu = 1/sqrt(rho^2 - m^2)` and `beta = (1 - rho mu)/m`, the latter written
/// as `-m / (r (rho + r))` with `r = sqrt(rho^2 - m^2)` so `m = 0` needs no
/// special case.
pub fn ensemble_map(point: &ModelPoint) -> Result<FieldParams> {
    point.require_interior()?;
    let (m, rho) = (point.m(), point.rho());
    let r = ((rho - m) * (rho + m)).sqrt();
    // `+ 0.0` turns the -0.0 produced at m = 0 into 0.0
    FieldParams::new(-m / (r * (rho + r)) + 0.0, 1.0 / r)
}

/// `(m, rho) = -grad f(beta, mu)`.
pub fn inverse_map(params: &FieldParams) -> Result<ModelPoint> {
    let (b, mu) = (params.beta(), params.mu());
    let d = (mu - b) * (mu + b);
    ModelPoint::interior(-2.0 * b / d, (mu * mu + b * b) / (mu * d))
}

/// Outcome of the numerical Legendre minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreResult {
    pub value: f64,
    pub beta: f64,
    pub mu: f64,
    pub sweeps: usize,
}

fn legendre_objective(point: &ModelPoint, beta: f64, mu: f64) -> f64 {
    beta * point.m() + mu * point.rho() + grand_entropy(beta, mu)
}

fn coordinate_descent(point: &ModelPoint, mut beta: f64, mut mu: f64) -> Result<LegendreResult> {
    let obj = |b: f64, u: f64| legendre_objective(point, b, u);
    let mut value = obj(beta, mu);
    let mut sweeps = 0;
    for sweep in 1..=2000 {
        sweeps = sweep;
        // mu-step on (|beta|, hi)
        let lo = beta.abs();
        let mut hi = mu.max(lo + 1.0);
        while obj(beta, hi) < obj(beta, 0.5 * (mu + hi)) || obj(beta, hi) < value {
            hi = lo + 2.0 * (hi - lo);
            if hi > 1e12 {
                return Err(Error::NonConvergence(format!("mu diverged from (m={}, rho={})", point.m(), point.rho())));
            }
        }
        let span = hi - lo;
        let (u, _) = golden_min(|u| obj(beta, u), lo + 1e-15 * span.max(1.0), hi, 1e-13 * span.max(1e-3));
        mu = u;
        // beta-step on (-mu, mu)
        let edge = mu * (1.0 - 1e-15);
        let (b, v) = golden_min(|b| obj(b, mu), -edge, edge, 1e-13 * mu);
        beta = b;
        if !(mu > beta.abs()) || !v.is_finite() {
            return Err(Error::NonConvergence(format!("iterate (beta={beta}, mu={mu}) left the domain")));
        }
        let improvement = value - v;
        value = v;
        if improvement.abs() < 1e-15 * value.abs().max(1.0) {
            break;
        }
    }
    Ok(LegendreResult { value, beta, mu, sweeps })
}

/// Numerically evaluates `inf_{mu > |beta|} { beta m + mu rho + f(beta, mu) }`
/// by coordinate descent, once from the analytic ensemble-map seed and once
/// from a random seed, returning the smaller value.
pub fn legendre_inf_numeric(point: &ModelPoint, restart_seed: u64) -> Result<LegendreResult> {
    let seed = ensemble_map(point)?;
    let a = coordinate_descent(point, seed.beta(), seed.mu())?;
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed);
    let mu0: f64 = rng.random_range(0.5..3.0) / point.rho();
    let beta0 = mu0 * rng.random_range(-0.9..0.9);
    let b = coordinate_descent(point, beta0, mu0)?;
    Ok(if b.value < a.value { b } else { a })
}

/// `sup_{m in [-1,1]} { s(m, 1) - beta m }` and its maximizer.
pub fn half_constrained_entropy(beta: f64) -> (f64, f64) {
    let obj = |m: f64| unit_slice_entropy(m).unwrap_or(f64::NEG_INFINITY) - beta * m;
    let (m, v) = golden_max(obj, -1.0, 1.0, 1e-12);
    (v, m)
}
