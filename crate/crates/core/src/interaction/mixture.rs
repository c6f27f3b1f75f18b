use std::cell::RefCell;

use serde::Serialize;

use super::analysis::{analyze, local_maxima_hints};
use super::Interaction;
use crate::error::{Error, Result};
use crate::model::{ModelPoint, PartitionTable};
use crate::numerics::log_add_exp;
use crate::numerics::quadrature::{log_integrate, GaussLaguerre};
use crate::sampling::Observable;
use crate::thermo::{ensemble_map, FieldParams};

/// One pure state `eta(beta(m*), mu(m*))` of the limit mixture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub m_star: f64,
    pub type_k: usize,
    pub weight: f64,
    pub probability: f64,
    pub params: FieldParams,
}

/// `sum_i p_i eta(beta(m_i), mu(m_i))` over the maximizers of highest type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureState {
    pub components: Vec<MixtureComponent>,
    pub max_type: usize,
}

/// Mixture weights are proportional to `W(m*)` among maximizers of the
/// highest type; lower types carry no mass in the limit.
pub fn limiting_mixture(g: &Interaction) -> Result<MixtureState> {
    let records = analyze(g)?;
    let max_type = records.iter().map(|r| r.type_k).max().unwrap_or(1);
    let top: Vec<_> = records.into_iter().filter(|r| r.type_k == max_type).collect();
    let total: f64 = top.iter().map(|r| r.weight).sum();
    let components = top
        .into_iter()
        .map(|r| {
            Ok(MixtureComponent {
                m_star: r.m_star,
                type_k: r.type_k,
                weight: r.weight,
                probability: r.weight / total,
                params: ensemble_map(&ModelPoint::interior(r.m_star, 1.0)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixtureState { components, max_type })
}

/// Law `kappa_n^g` of the magnetization per spin at size `n`: density
/// `n e^{n g(m)} Z_n(mn, n) / Q_n` on `(-1, 1)` plus atoms at `±1`.
#[derive(Debug, Clone)]
pub struct FiniteMixture {
    g: Interaction,
    table: PartitionTable,
    hints: Vec<f64>,
    log_atoms: [f64; 2],
    log_q: f64,
    rel_tol: f64,
}

pub fn finite_mixture(g: &Interaction, n: usize) -> Result<FiniteMixture> {
    FiniteMixture::new(g.clone(), n, 1e-10)
}

impl FiniteMixture {
    pub fn new(g: Interaction, n: usize, rel_tol: f64) -> Result<Self> {
        let table = PartitionTable::new(n)?;
        let nf = n as f64;
        let boundary = table.log_z_boundary_totals(nf);
        let log_atoms = [nf.ln() + nf * g.value(-1.0)? + boundary, nf.ln() + nf * g.value(1.0)? + boundary];
        let hints = local_maxima_hints(&g)?;
        let mut mix = Self { g, table, hints, log_atoms, log_q: 0.0, rel_tol };
        let body = mix.log_interior(-1.0, 1.0)?;
        mix.log_q = log_add_exp(body, log_add_exp(log_atoms[0], log_atoms[1]));
        Ok(mix)
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    /// `ln Q_n`, the total unnormalized mass.
    pub fn log_normalizer(&self) -> f64 {
        self.log_q
    }

    /// Unnormalized log density on `(-1, 1)`.
    pub fn log_density(&self, m: f64) -> Result<f64> {
        let nf = self.n() as f64;
        Ok(nf.ln() + nf * self.g.value(m)? + self.table.log_z_interior_totals(m * nf, nf))
    }

    fn log_interior(&self, a: f64, b: f64) -> Result<f64> {
        let (a, b) = (a.max(-1.0), b.min(1.0));
        if b <= a {
            return Ok(f64::NEG_INFINITY);
        }
        let failure = RefCell::new(None);
        let v = log_integrate(
            |m| {
                self.log_density(m).unwrap_or_else(|e| {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                })
            },
            a,
            b,
            &self.hints,
            self.rel_tol,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// `ln kappa_n^g([a, b])`, atoms included when `±1` lies in `[a, b]`.
    pub fn log_mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        let mut v = self.log_interior(a, b)?;
        if a <= -1.0 && b >= -1.0 {
            v = log_add_exp(v, self.log_atoms[0]);
        }
        if a <= 1.0 && b >= 1.0 {
            v = log_add_exp(v, self.log_atoms[1]);
        }
        Ok(v - self.log_q)
    }

    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.log_mass(a, b)?.exp())
    }
}

/// Largest arity handled by the tensorized quadrature.
pub const MAX_EXPECTATION_ARITY: usize = 4;

fn laguerre_nodes(arity: usize) -> usize {
    match arity {
        1 => 96,
        2 => 64,
        3 => 32,
        _ => 20,
    }
}

/// Nodes and weights of the single-site law of `eta(beta, mu)` (two
/// exponential branches) for Gauss-Laguerre order `len`.
fn site_rule(params: &FieldParams, rule: &GaussLaguerre) -> Vec<(f64, f64)> {
    let p = params.positive_mass();
    let up = params.mu() + params.beta();
    let down = params.mu() - params.beta();
    let mut out = Vec::with_capacity(2 * rule.nodes().len());
    for (t, w) in rule.nodes().iter().zip(rule.weights()) {
        out.push((t / up, p * w));
        out.push((-t / down, (1.0 - p) * w));
    }
    out
}

/// `sum_i p_i eta_i[f]` by tensorized Gauss-Laguerre quadrature over the
/// sign branches of each coordinate. Supports arity up to 4.
pub fn limit_state_expectation(mix: &MixtureState, obs: &Observable) -> Result<f64> {
    let arity = obs.arity();
    if arity == 0 || arity > MAX_EXPECTATION_ARITY {
        return Err(Error::ArityTooLarge { arity, limit: MAX_EXPECTATION_ARITY });
    }
    let rule = GaussLaguerre::new(laguerre_nodes(arity));
    let mut total = 0.0;
    for c in &mix.components {
        let site = site_rule(&c.params, &rule);
        let mut idx = vec![0usize; arity];
        let mut x = vec![0.0; arity];
        let mut sum = 0.0;
        'outer: loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                x[d] = site[i].0;
                w *= site[i].1;
            }
            sum += w * obs.eval(&x);
            for d in (0..arity).rev() {
                idx[d] += 1;
                if idx[d] < site.len() {
                    continue 'outer;
                }
                idx[d] = 0;
            }
            break;
        }
        total += c.probability * sum;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_curie_weiss_mixture() {
        let mix = limiting_mixture(&Interaction::CurieWeiss { beta_j: 1.0, h: 0.0 }).unwrap();
        assert_eq!(mix.components.len(), 2);
        let total: f64 = mix.components.iter().map(|c| c.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for c in &mix.components {
            assert!((c.probability - 0.5).abs() < 1e-9);
        }
        // first moment of the symmetric mixture vanishes
        let e = limit_state_expectation(&mix, &Observable::first_coordinate()).unwrap();
        assert!(e.abs() < 1e-10);
    }

    #[test]
    fn pure_state_moments() {
        let mix = limiting_mixture(&Interaction::Linear { beta: 0.4 }).unwrap();
        assert_eq!(mix.components.len(), 1);
        let c = &mix.components[0];
        let e = limit_state_expectation(&mix, &Observable::first_coordinate()).unwrap();
        assert!((e - c.m_star).abs() < 1e-10, "{e} vs {}", c.m_star);
        let e = limit_state_expectation(&mix, &Observable::abs_first_coordinate()).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
        let prod = Observable::new("x1*x2", 2, f64::INFINITY, |x: &[f64]| x[0] * x[1]).unwrap();
        let e = limit_state_expectation(&mix, &prod).unwrap();
        assert!((e - c.m_star * c.m_star).abs() < 1e-10);
        let wide = Observable::new("x5", 5, 1.0, |x: &[f64]| x[4]).unwrap();
        assert!(matches!(limit_state_expectation(&mix, &wide), Err(Error::ArityTooLarge { .. })));
    }

    #[test]
    fn finite_mixture_total_mass() {
        // with g = 0, Q_n = n^(n-1) (2^n - 2)/(n-1)! + 2 n^n/(n-1)!
        let n = 12;
        let mix = finite_mixture(&Interaction::Zero, n).unwrap();
        let fact: f64 = (1..n).map(|i| i as f64).product();
        let nf = n as f64;
        let q = nf.powi(n as i32 - 1) * (2f64.powi(n as i32) - 2.0) / fact + 2.0 * nf.powi(n as i32) / fact;
        assert!((mix.log_normalizer() - q.ln()).abs() < 1e-9);
        assert!((mix.mass(-1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let half = mix.mass(0.0, 1.0).unwrap();
        assert!((half - 0.5).abs() < 1e-9);
    }
}
