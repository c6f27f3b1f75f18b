//! Relative-entropy rate between the microcanonical marginal and the
//! grand-canonical product measure, the Pinsker bound it implies on local
//! expectation gaps, and a Monte Carlo check of that bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{entropy_n, ModelPoint};
use crate::sampling::{estimate_observables, Observable, RngState, SamplerSpec};
use crate::thermo::{ensemble_map, grand_entropy, FieldParams};

/// Radicands in `[-RADICAND_CLAMP, 0)` are treated as zero.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Slack, in combined standard errors, allowed on top of the bound.
pub const STDERR_SLACK: f64 = 4.0;

/// `H_{n-2}/(n-2) = beta m + mu rho + f(beta, mu) - n/(n-2) s_n(m, rho)`.
pub fn relative_entropy_rate(n: usize, point: &ModelPoint, params: &FieldParams) -> Result<f64> {
    if n < 3 {
        return Err(Error::SystemTooSmall { n, min: 3 });
    }
    let nf = n as f64;
    let s_n = entropy_n(n, point)?;
    Ok(params.beta() * point.m() + params.mu() * point.rho() + grand_entropy(params.beta(), params.mu())
        - nf / (nf - 2.0) * s_n)
}

/// `sqrt(|I| (n-2) / (2 (n-2-|I|)) * rate)`.
pub fn pinsker_bound(n: usize, index_size: usize, point: &ModelPoint, params: &FieldParams) -> Result<f64> {
    if n < 3 || index_size == 0 || index_size >= n - 2 {
        return Err(Error::IndexSetTooLarge { size: index_size, limit: n.saturating_sub(2) });
    }
    let rate = relative_entropy_rate(n, point, params)?;
    let (i, m) = (index_size as f64, (n - 2) as f64);
    let radicand = i * m / (2.0 * (m - i)) * rate;
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("negative relative entropy radicand {radicand}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    pub observable: String,
    pub arity: usize,
    pub microcanonical: f64,
    pub grand_canonical: f64,
    pub gap: f64,
    pub combined_stderr: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Largest Pinsker bound over the suite.
    pub bound: f64,
    /// Largest empirical gap over the suite.
    pub empirical_gap: f64,
    pub observable_count: usize,
    pub n: usize,
    pub params: FieldParams,
    pub entries: Vec<GapEntry>,
    pub all_within: bool,
}

/// Estimates `|nu_n[f] - eta[f]|` at matched parameters for every
/// observable in the suite and compares it with the Pinsker bound plus
/// `STDERR_SLACK` combined standard errors.
pub fn verify_gap(
    n: usize,
    point: &ModelPoint,
    obs_suite: &[Observable],
    n_samples: usize,
    rng: RngState,
) -> Result<EquivalenceReport> {
    if let Some(o) = obs_suite.iter().find(|o| o.sup_norm() > 1.0) {
        return Err(Error::InvalidArgument(format!("observable {} has sup norm {} > 1", o.name(), o.sup_norm())));
    }
    let params = ensemble_map(point)?;
    let micro = SamplerSpec::Microcanonical { n, m: point.m(), rho: point.rho() };
    let grand = SamplerSpec::GrandCanonical { n, beta: params.beta(), mu: params.mu() };
    let em = estimate_observables(&micro, obs_suite, n_samples, rng.split(0))?;
    let eg = estimate_observables(&grand, obs_suite, n_samples, rng.split(1))?;
    let mut entries = Vec::with_capacity(obs_suite.len());
    for ((o, a), b) in obs_suite.iter().zip(&em).zip(&eg) {
        let bound = pinsker_bound(n, o.arity(), point, &params)?;
        let gap = (a.mean - b.mean).abs();
        let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        entries.push(GapEntry {
            observable: o.name().to_string(),
            arity: o.arity(),
            microcanonical: a.mean,
            grand_canonical: b.mean,
            gap,
            combined_stderr: se,
            bound,
            within_bound: gap <= bound + STDERR_SLACK * se,
        });
    }
    Ok(EquivalenceReport {
        bound: entries.iter().map(|e| e.bound).fold(0.0, f64::max),
        empirical_gap: entries.iter().map(|e| e.gap).fold(0.0, f64::max),
        observable_count: entries.len(),
        n,
        params,
        all_within: entries.iter().all(|e| e.within_bound),
        entries,
    })
}
