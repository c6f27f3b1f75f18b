use std::f64::consts::PI;

use serde::Serialize;

use super::Interaction;
use crate::error::{Error, Result};
use crate::numerics::gamma;
use crate::numerics::jet::Jet;
use crate::numerics::optimize::{bisect, golden_max};
use crate::thermo::{unit_slice_entropy, unit_slice_entropy_jet};

/// Highest maximizer type that is classified.
pub const K_MAX: usize = 4;

const GRID: usize = 4096;
const ANALYTIC_ZERO_TOL: f64 = 1e-10;

/// `psi(m) = g(m) + s(m, 1)` on `[-1, 1]`.
pub fn psi(g: &Interaction, m: f64) -> Result<f64> {
    let s = unit_slice_entropy(m)?;
    let v = g.value(m)? + s;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { m })
    }
}

fn psi_jet(g: &Interaction, m: f64, order: usize) -> Result<Jet> {
    if !(m.abs() < 1.0) {
        return Err(Error::Domain(format!("derivatives of psi need |m| < 1, got {m}")));
    }
    Ok(&g.jet(m, order)? + &unit_slice_entropy_jet(m, order))
}

/// `[psi(m), psi'(m), ..., psi^(order)(m)]` at an interior `m`.
pub fn psi_derivatives(g: &Interaction, m: f64, order: usize) -> Result<Vec<f64>> {
    let j = psi_jet(g, m, order)?;
    Ok((0..=order).map(|i| j.derivative(i)).collect())
}

fn dpsi(g: &Interaction, m: f64) -> Result<f64> {
    Ok(psi_jet(g, m, 1)?.derivative(1))
}

/// Local maxima of `psi` found by a grid scan, including the endpoints
/// when they beat their neighbour. Returns `(m, psi(m))`.
fn local_maxima(g: &Interaction) -> Result<Vec<(f64, f64)>> {
    let xs: Vec<f64> = (0..GRID).map(|i| -1.0 + 2.0 * i as f64 / (GRID - 1) as f64).collect();
    let mut values = Vec::with_capacity(GRID);
    let mut slopes = vec![f64::NAN; GRID];
    for (i, &x) in xs.iter().enumerate() {
        values.push(psi(g, x)?);
        if i > 0 && i + 1 < GRID {
            slopes[i] = dpsi(g, x)?;
        }
    }
    let f = |x: f64| psi(g, x).unwrap_or(f64::NEG_INFINITY);
    let df = |x: f64| dpsi(g, x).unwrap_or(f64::NAN);
    let mut out = Vec::new();
    // Brackets [lo, hi] containing a +/- sign change of psi'.
    let mut brackets = Vec::new();
    if slopes[1] <= 0.0 {
        brackets.push((xs[0], xs[1]));
    }
    for i in 1..GRID - 2 {
        if slopes[i] > 0.0 && slopes[i + 1] <= 0.0 {
            brackets.push((xs[i], xs[i + 1]));
        }
    }
    if slopes[GRID - 2] >= 0.0 {
        brackets.push((xs[GRID - 2], xs[GRID - 1]));
    }
    for (lo, hi) in brackets {
        let (mut x, mut fx) = golden_max(f, lo, hi, 1e-13);
        let (a, b) = (lo.max(-1.0 + 1e-15), hi.min(1.0 - 1e-15));
        if let Some(r) = bisect(df, a, b) {
            let fr = f(r);
            if fr >= fx - 1e-15 * fx.abs().max(1.0) {
                x = r;
                fx = fr;
            }
        }
        out.push((x, fx));
    }
    out.push((-1.0, values[0]));
    out.push((1.0, values[GRID - 1]));
    Ok(out)
}

/// Interior local maxima of `psi`, used as quadrature breakpoints.
pub(crate) fn local_maxima_hints(g: &Interaction) -> Result<Vec<f64>> {
    Ok(local_maxima(g)?.into_iter().map(|c| c.0).filter(|m| m.abs() < 1.0).collect())
}

/// `sup psi` over `[-1, 1]`, boundary included.
pub fn sup_psi(g: &Interaction) -> Result<f64> {
    Ok(local_maxima(g)?.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max))
}

/// All global maximizers of `psi`: local maxima within `tol_value` of the
/// largest value, merged when closer than `tol_sep`. Fails with
/// `BoundaryMaximum` if one of them is an endpoint.
pub fn find_global_maxima(g: &Interaction, tol_value: f64, tol_sep: f64) -> Result<Vec<f64>> {
    let cands = local_maxima(g)?;
    let best = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let mut sel: Vec<(f64, f64)> = cands.into_iter().filter(|c| c.1 >= best - tol_value).collect();
    if let Some(b) = sel.iter().find(|c| c.0.abs() >= 1.0) {
        return Err(Error::BoundaryMaximum { m: b.0 });
    }
    sel.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for c in sel {
        match merged.last_mut() {
            Some(last) if c.0 - last.0 < tol_sep => {
                if c.1 > last.1 {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
    }
    Ok(merged.into_iter().map(|c| c.0).collect())
}

/// Type of a maximizer: the smallest `k` with `psi^(j)(m*) = 0` for
/// `j < 2k` and `psi^(2k)(m*) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeClassification {
    pub k: usize,
    /// The maximizer, re-polished as a root of `psi^(2k-1)`.
    pub m_star: f64,
    /// `psi^(2k)(m*)`.
    pub deriv_2k: f64,
    /// `psi^(j)(m*)` for `j = 1..=2k`.
    pub derivatives: Vec<f64>,
    pub zero_tol: f64,
}

/// Root of `psi^(order)` near `m`, searched in brackets growing from 1e-6
/// to 0.05. Returns `m` unchanged when no sign change is found.
fn polish(g: &Interaction, m: f64, order: usize) -> f64 {
    let d = |x: f64| psi_jet(g, x, order).map(|j| j.derivative(order)).unwrap_or(f64::NAN);
    let mut w = 1e-6;
    while w <= 0.05 {
        let (a, b) = ((m - w).max(-1.0 + 1e-12), (m + w).min(1.0 - 1e-12));
        let (da, db) = (d(a), d(b));
        if da.is_finite() && db.is_finite() && da.signum() != db.signum() {
            return bisect(d, a, b).unwrap_or(m);
        }
        w *= 4.0;
    }
    m
}

/// Classifies the maximizer `m_star`. With `zero_tol = None` a derivative
/// counts as zero below 1e-10 for polynomial families and below
/// `max(1e-6, 1e-4 |psi^(2k)|)` for expressions.
pub fn classify_type(g: &Interaction, m_star: f64, zero_tol: Option<f64>) -> Result<TypeClassification> {
    if !(m_star.abs() < 1.0) {
        return Err(Error::BoundaryMaximum { m: m_star });
    }
    for k in 1..=K_MAX {
        let m = if k == 1 { m_star } else { polish(g, m_star, 2 * k - 1) };
        let d = psi_derivatives(g, m, 2 * k)?;
        let top = d[2 * k];
        let tol = zero_tol.unwrap_or(if g.is_polynomial() { ANALYTIC_ZERO_TOL } else { (1e-4 * top.abs()).max(1e-6) });
        if d[1..2 * k].iter().all(|v| v.abs() <= tol) && top < -tol {
            sanity_check(g, m, k, top)?;
            return Ok(TypeClassification { k, m_star: m, deriv_2k: top, derivatives: d[1..].to_vec(), zero_tol: tol });
        }
    }
    Err(Error::TypeTooHigh { m: m_star, k_max: K_MAX })
}

/// Re-derives the sign of `psi^(2k)` by finite differences of `psi` at two
/// step sizes; skipped when the stencil would leave `[-1, 1]`.
fn sanity_check(g: &Interaction, m: f64, k: usize, top: f64) -> Result<()> {
    let f = |x: f64| psi(g, x);
    let order = 2 * k;
    let reach = 0.5 * order as f64 * 2.0 * f64::EPSILON.powf(1.0 / (order as f64 + 4.0));
    if m.abs() + reach >= 1.0 {
        return Ok(());
    }
    let fd = super::richardson_derivative(&f, m, order)?;
    if fd.is_finite() && (fd - top).abs() > 0.5 * top.abs() && fd.signum() != top.signum() {
        return Err(Error::NonConvergence(format!(
            "derivative of order {order} at m = {m}: jet {top}, finite difference {fd}"
        )));
    }
    Ok(())
}

/// Laplace weight of a type-`k` maximizer with `psi^(2k)(m*) = deriv_2k`.
pub(crate) fn weight_from(m: f64, k: usize, deriv_2k: f64) -> Result<f64> {
    let s = unit_slice_entropy(m)?;
    let (p, q) = ((0.5 * (1.0 + m)).sqrt(), (0.5 * (1.0 - m)).sqrt());
    let u = p + q;
    let (a1, a2) = (2.0 * p / u, 2.0 * q / u);
    let kk = 2 * k;
    let fact: f64 = (1..=kk).map(|i| i as f64).product();
    let c = (-s).exp() / (1.0 - m * m).sqrt()
        * (2.0 * PI / a1).sqrt()
        * (2.0 * PI / a2).sqrt()
        * 2.0
        * gamma(1.0 + 1.0 / kk as f64)
        * fact.powf(1.0 / kk as f64);
    Ok(c / deriv_2k.abs().powf(1.0 / kk as f64))
}

/// The weight `W(m*) = C^k / |psi^(2k)(m*)|^(1/(2k))` after classifying `m*`.
pub fn weight_w(g: &Interaction, m_star: f64) -> Result<f64> {
    let t = classify_type(g, m_star, None)?;
    weight_from(t.m_star, t.k, t.deriv_2k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizerRecord {
    pub m_star: f64,
    pub psi: f64,
    pub type_k: usize,
    pub deriv_2k: f64,
    pub weight: f64,
}

/// Finds, classifies and weighs every global maximizer of `psi`.
pub fn analyze(g: &Interaction) -> Result<Vec<MaximizerRecord>> {
    analyze_with(g, 1e-9, 1e-6)
}

/// [`analyze`] with explicit tie and separation tolerances.
pub fn analyze_with(g: &Interaction, tol_value: f64, tol_sep: f64) -> Result<Vec<MaximizerRecord>> {
    find_global_maxima(g, tol_value, tol_sep)?
        .into_iter()
        .map(|m| {
            let t = classify_type(g, m, None)?;
            Ok(MaximizerRecord {
                m_star: t.m_star,
                psi: psi(g, t.m_star)?,
                type_k: t.k,
                deriv_2k: t.deriv_2k,
                weight: weight_from(t.m_star, t.k, t.deriv_2k)?,
            })
        })
        .collect()
}

/// `I^g(m) = sup psi - psi(m)`, and `+inf` off `[-1, 1]`.
pub fn rate_function(g: &Interaction, m: f64) -> Result<f64> {
    if !(m.abs() <= 1.0) {
        return Ok(f64::INFINITY);
    }
    Ok((sup_psi(g)? - psi(g, m)?).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(beta_j: f64) -> Interaction {
        Interaction::CurieWeiss { beta_j, h: 0.0 }
    }

    #[test]
    fn zero_interaction_has_single_type_one_maximizer() {
        let r = analyze(&Interaction::Zero).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].m_star.abs() < 1e-12);
        assert_eq!(r[0].type_k, 1);
        assert!((r[0].deriv_2k + 0.5).abs() < 1e-12);
        let w = 2.0 * PI.powf(1.5) / std::f64::consts::E;
        assert!((r[0].weight - w).abs() < 1e-12);
    }

    #[test]
    fn curie_weiss_symmetric_pair() {
        let r = analyze(&cw(1.0)).unwrap();
        assert_eq!(r.len(), 2);
        let root = ((5.0f64).sqrt() - 1.0) / 2.0;
        for rec in &r {
            assert!(((1.0 - rec.m_star * rec.m_star).sqrt() - root).abs() < 1e-10);
            assert_eq!(rec.type_k, 1);
            assert!((rec.deriv_2k + 5f64.sqrt()).abs() < 1e-8);
        }
        assert!((r[0].m_star + r[1].m_star).abs() < 1e-12);
        assert!((r[0].weight - r[1].weight).abs() < 1e-10 * r[0].weight);
    }

    #[test]
    fn critical_curie_weiss_is_type_two() {
        let t = classify_type(&cw(0.5), 1e-8, None).unwrap();
        assert_eq!(t.k, 2);
        assert!((t.deriv_2k + 2.25).abs() < 1e-9);
        let r = analyze(&cw(0.5)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].type_k, 2);
    }

    #[test]
    fn linear_field_shifts_maximizer() {
        // psi'(m) = -beta - m / (r (1 + r)) = 0 with r = sqrt(1 - m^2)
        let g = Interaction::Linear { beta: 0.3 };
        let m = find_global_maxima(&g, 1e-9, 1e-6).unwrap();
        assert_eq!(m.len(), 1);
        let r = (1.0 - m[0] * m[0]).sqrt();
        assert!((-0.3 - m[0] / (r * (1.0 + r))).abs() < 1e-12);
        assert!(m[0] < 0.0);
    }

    #[test]
    fn boundary_maximum_is_reported() {
        // a field this strong pushes the optimum below double resolution of 1
        let g = Interaction::Linear { beta: -1e9 };
        match find_global_maxima(&g, 1e-9, 1e-6) {
            Err(Error::BoundaryMaximum { m }) => assert_eq!(m, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rate_function_vanishes_at_maximizers() {
        let g = cw(1.0);
        for m in find_global_maxima(&g, 1e-9, 1e-6).unwrap() {
            assert!(rate_function(&g, m).unwrap() < 1e-12);
        }
        assert_eq!(rate_function(&g, 1.5).unwrap(), f64::INFINITY);
        let i = rate_function(&Interaction::Zero, 0.4).unwrap();
        let exact = std::f64::consts::LN_2 - (1.0 + 0.84f64.sqrt()).ln();
        assert!((i - exact).abs() < 1e-12);
    }
}
