//! Mean-field interactions `g` on the unit slice and the analysis of
//! `psi(m) = g(m) + s(m, 1)`: global maximizers, their type, the Laplace
//! weights and the resulting limit mixture.

mod analysis;
mod mixture;

pub use analysis::{
    analyze, analyze_with, classify_type, find_global_maxima, psi, psi_derivatives, rate_function, sup_psi, weight_w,
    MaximizerRecord, TypeClassification, K_MAX,
};
pub use mixture::{
    finite_mixture, limit_state_expectation, limiting_mixture, FiniteMixture, MixtureComponent, MixtureState,
};

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expression::{self, Expr};
use crate::numerics::jet::Jet;

/// An interaction `g: [-1, 1] -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    Zero,
    /// `g(m) = -beta m`.
    Linear {
        beta: f64,
    },
    /// `g(m) = beta_j/2 m^2 + h m`.
    CurieWeiss {
        beta_j: f64,
        h: f64,
    },
    /// `g(m) = sum_i coeffs[i] m^i`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    Expression(Expr),
}

impl Interaction {
    /// Polynomial coefficients for the closed-form families.
    fn coefficients(&self) -> Option<Vec<f64>> {
        match self {
            Interaction::Zero => Some(vec![0.0]),
            Interaction::Linear { beta } => Some(vec![0.0, -beta]),
            Interaction::CurieWeiss { beta_j, h } => Some(vec![0.0, *h, 0.5 * beta_j]),
            Interaction::Polynomial { coeffs } => Some(coeffs.clone()),
            Interaction::Expression(_) => None,
        }
    }

    /// True for the families whose derivatives are exact polynomials.
    pub fn is_polynomial(&self) -> bool {
        !matches!(self, Interaction::Expression(_))
    }

    pub fn value(&self, m: f64) -> Result<f64> {
        let v = match self {
            Interaction::Expression(e) => e.eval(m).map_err(|_| Error::NonFinite { m })?,
            _ => self.coefficients().unwrap().iter().rev().fold(0.0, |acc, c| acc * m + c),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { m })
        }
    }

    /// Taylor jet of `g` at `m`. Expressions fall back to Richardson
    /// extrapolated finite differences where their jet is undefined.
    pub fn jet(&self, m: f64, order: usize) -> Result<Jet> {
        match self {
            Interaction::Expression(e) => match e.eval_jet(m, order) {
                Ok(j) if j.coeffs().iter().all(|c| c.is_finite()) => Ok(j),
                _ => finite_difference_jet(|x| e.eval(x), m, order),
            },
            _ => {
                let x = Jet::variable(m, order);
                let coeffs = self.coefficients().unwrap();
                Ok(coeffs.iter().rev().fold(Jet::constant(0.0, order), |acc, c| (&acc * &x).add_scalar(*c)))
            }
        }
    }
}

fn finite_difference_jet(f: impl Fn(f64) -> Result<f64>, m: f64, order: usize) -> Result<Jet> {
    let mut coeffs = vec![f(m).map_err(|_| Error::NonFinite { m })?];
    let mut fact = 1.0;
    for j in 1..=order {
        fact *= j as f64;
        coeffs.push(richardson_derivative(&f, m, j)? / fact);
    }
    Ok(Jet::from_coeffs(coeffs))
}

/// `j`-th derivative by a central difference of step `h` and `h/2`,
/// combined to cancel the `h^2` error term. The step shrinks when a probe
/// leaves the domain of `f`.
pub(crate) fn richardson_derivative(f: &impl Fn(f64) -> Result<f64>, m: f64, j: usize) -> Result<f64> {
    let central = |h: f64| -> Result<f64> {
        let mut sum = 0.0;
        let mut binom = 1.0;
        for i in 0..=j {
            let x = m + (0.5 * j as f64 - i as f64) * h;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * f(x)?;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        Ok(sum / h.powi(j as i32))
    };
    let mut h = 2.0 * f64::EPSILON.powf(1.0 / (j as f64 + 4.0));
    for _ in 0..12 {
        if let (Ok(d1), Ok(d2)) = (central(h), central(0.5 * h)) {
            let d = (4.0 * d2 - d1) / 3.0;
            if d.is_finite() {
                return Ok(d);
            }
        }
        h *= 0.25;
    }
    Err(Error::NonFinite { m })
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interaction::Zero => write!(f, "zero"),
            Interaction::Linear { beta } => write!(f, "linear:beta={beta:?}"),
            Interaction::CurieWeiss { beta_j, h } => write!(f, "cw:betaJ={beta_j:?},h={h:?}"),
            Interaction::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| format!("{c:?}")).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Interaction::Expression(e) => write!(f, "expr:{e}"),
        }
    }
}

impl Serialize for Interaction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_interaction(s)
    }
}

/// Parses `zero`, `linear:beta=B`, `cw:betaJ=J[,h=H]`, `poly:c0,c1,...` or
/// `expr:<expression in m>`. The result is probed on a 65-point grid of
/// `[-1, 1]` so domain errors surface here rather than mid-analysis.
pub fn parse_interaction(spec: &str) -> Result<Interaction> {
    let spec = spec.trim();
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let g = match kind {
        "zero" if body.is_empty() => Interaction::Zero,
        "linear" => {
            let kv = key_values(body, &["beta"])?;
            Interaction::Linear { beta: required(&kv, "beta")? }
        }
        "cw" => {
            let kv = key_values(body, &["betaJ", "h"])?;
            Interaction::CurieWeiss {
                beta_j: required(&kv, "betaJ")?,
                h: kv.iter().find(|(k, _)| k == "h").map_or(0.0, |(_, v)| *v),
            }
        }
        "poly" => {
            let coeffs = body.split(',').map(|c| number(c.trim())).collect::<Result<Vec<f64>>>()?;
            Interaction::Polynomial { coeffs }
        }
        "expr" => {
            let offset = spec.len() - body.len();
            Interaction::Expression(expression::parse(body).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
                other => other,
            })?)
        }
        _ => return Err(Error::Parse { pos: 0, msg: format!("unknown interaction '{spec}'") }),
    };
    for i in 0..=64 {
        let m = -1.0 + i as f64 / 32.0;
        g.value(m).map_err(|_| Error::Domain(format!("interaction {g} is not finite at m = {m}")))?;
    }
    Ok(g)
}

fn number(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { pos: 0, msg: format!("invalid number '{s}'") })
}

fn key_values(body: &str, allowed: &[&str]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse { pos: 0, msg: format!("expected key=value, got '{part}'") })?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::Parse { pos: 0, msg: format!("unknown key '{k}'") });
        }
        out.push((k.to_string(), number(v.trim())?));
    }
    Ok(out)
}

fn required(kv: &[(String, f64)], key: &str) -> Result<f64> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse { pos: 0, msg: format!("missing key '{key}'") })
}
