//! The angular integral representation of `Z_n` and the finite-`n`
//! Laplace weights `W_n` built on it.
//!
//! `Z_n(mn, rho n)` equals
//! `4^{n-1} n^{n-2} n! e^{-(n-1)} / ((2n-2)! pi^2 sqrt(rho^2-m^2))`
//! times `∫∫_{[0,pi]^2} cos t1 cos t2 e^{(n-1) s(m, rho, t1, t2)}`.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interaction::{classify_type, find_global_maxima, psi, Interaction};
use crate::model::{LogReal, ModelPoint, PartitionTable};
use crate::numerics::quadrature::{gauss_legendre_64, log_integrate};
use crate::numerics::LnFactorials;

/// `s(m, rho, t1, t2) = 1 + ln((sqrt((rho+m)/2) cos t1 + sqrt((rho-m)/2) cos t2)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularEntropy {
    a: f64,
    b: f64,
}

impl AngularEntropy {
    pub fn new(point: &ModelPoint) -> Self {
        let (m, rho) = (point.m(), point.rho());
        Self { a: (0.5 * (rho + m)).sqrt(), b: (0.5 * (rho - m)).sqrt() }
    }

    pub fn eval(&self, theta1: f64, theta2: f64) -> f64 {
        let u = self.a * theta1.cos() + self.b * theta2.cos();
        1.0 + (u * u).ln()
    }

    /// Curvatures `a_1, a_2` with `d^2 s / d t_i^2 = -a_i` at `t = 0`.
    pub fn curvatures(&self) -> (f64, f64) {
        let u = self.a + self.b;
        (2.0 * self.a / u, 2.0 * self.b / u)
    }
}

/// `psi^g(m, t1, t2) = g(m) + s(m, 1, t1, t2)`.
pub fn angular_psi(g: &Interaction, m: f64, theta1: f64, theta2: f64) -> Result<f64> {
    let s = AngularEntropy::new(&ModelPoint::interior(m, 1.0)?);
    Ok(g.value(m)? + s.eval(theta1, theta2))
}

/// Breakpoints on `[0, pi]` graded dyadically towards both ends.
fn graded_breaks(levels: usize) -> Vec<f64> {
    let mut left: Vec<f64> = (1..=levels).rev().map(|l| 0.5 * PI / (1u64 << l) as f64).collect();
    left.insert(0, 0.0);
    let mut out = left.clone();
    out.push(0.5 * PI);
    out.extend(left.iter().rev().map(|x| PI - x));
    out
}

fn angular_integral(a: f64, b: f64, power: i32, levels: usize) -> f64 {
    let rule = gauss_legendre_64();
    let breaks = graded_breaks(levels);
    let nodes: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .map(|(t, w)| (t.cos(), w))
        .collect();
    let scale = 1.0 / (a + b);
    let (a, b) = (a * scale, b * scale);
    let mut total = 0.0;
    for &(c1, w1) in &nodes {
        let mut row = 0.0;
        for &(c2, w2) in &nodes {
            row += w2 * c2 * (a * c1 + b * c2).powi(power);
        }
        total += w1 * c1 * row;
    }
    total
}

/// Maximum number of dyadic levels tried before giving up.
const MAX_LEVELS: usize = 24;

/// `ln Z_n(mn, rho n)` from the angular representation. The integrand is
/// divided by its peak `e^{(n-1) s(m, rho, 0, 0)}` and summed with signed
/// cosines before taking the log. Refinement stops when two successive
/// grading levels agree to 1e-12.
pub fn log_z_bessel(n: usize, point: &ModelPoint) -> Result<LogReal> {
    if n < 2 {
        return Err(Error::SystemTooSmall { n, min: 2 });
    }
    if !point.is_interior() {
        return Err(Error::NotInterior { m: point.m(), rho: point.rho() });
    }
    let s = AngularEntropy::new(point);
    let power = 2 * (n as i32 - 1);
    let mut levels = ((n as f64).sqrt().log2().ceil() as usize) + 2;
    let mut prev = angular_integral(s.a, s.b, power, levels);
    let j = loop {
        levels += 1;
        if levels > MAX_LEVELS {
            return Err(Error::Quadrature(format!("angular integral did not settle for n = {n}")));
        }
        let cur = angular_integral(s.a, s.b, power, levels);
        if (cur - prev).abs() <= 1e-12 * cur.abs() {
            break cur;
        }
        prev = cur;
    };
    if !(j > 0.0) {
        return Err(Error::Quadrature(format!("non-positive angular integral {j}")));
    }
    let t = LnFactorials::new(2 * n);
    let nf = n as f64;
    let (m, rho) = (point.m(), point.rho());
    let log_z = (nf - 1.0) * 2.0 * LN_2 + (nf - 2.0) * nf.ln() + t.get(n)
        - t.get(2 * n - 2)
        - 2.0 * PI.ln()
        - 0.5 * ((rho - m) * (rho + m)).ln()
        + 2.0 * (nf - 1.0) * (s.a + s.b).ln()
        + j.ln();
    LogReal::from_ln(log_z)
}

/// `ln` of `2 n^{1+1/(2k)} (2n-2)! pi^2 e^{n-1} / (4^{n-1} n^{n-2} n!)`,
/// the factor that turns the windowed integral into `W_n`.
pub fn laplace_prefactor(n: usize, k: usize) -> Result<LogReal> {
    if n < 2 {
        return Err(Error::SystemTooSmall { n, min: 2 });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("type k must be at least 1".into()));
    }
    let t = LnFactorials::new(2 * n);
    let nf = n as f64;
    LogReal::from_ln(
        LN_2 + (1.0 + 1.0 / (2 * k) as f64) * nf.ln() + t.get(2 * n - 2) + 2.0 * PI.ln() + (nf - 1.0)
            - (nf - 1.0) * 2.0 * LN_2
            - (nf - 2.0) * nf.ln()
            - t.get(n),
    )
}

/// `W_n^g(m*, delta) = prefactor(n, k) e^{-n psi(m*)} ∫_{m*-delta}^{m*+delta} e^{n g(m)} Z_n(mn, n) dm`.
///
/// The window must lie in `[-1, 1]` and contain no other global maximizer.
pub fn w_n_numeric(g: &Interaction, m_star: f64, delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0) || m_star - delta < -1.0 || m_star + delta > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] is not inside [-1, 1]",
            m_star - delta,
            m_star + delta
        )));
    }
    let maxima = find_global_maxima(g, 1e-9, 1e-6)?;
    let own = maxima
        .iter()
        .copied()
        .min_by(|x, y| (x - m_star).abs().total_cmp(&(y - m_star).abs()))
        .filter(|x| (x - m_star).abs() < 1e-6)
        .ok_or_else(|| Error::InvalidArgument(format!("m = {m_star} is not a global maximizer")))?;
    if maxima.iter().any(|x| *x != own && (x - m_star).abs() <= delta) {
        return Err(Error::WindowNotIsolated { m_star });
    }
    let t = classify_type(g, own, None)?;
    let table = PartitionTable::new(n)?;
    let nf = n as f64;
    let log_f = |m: f64| match g.value(m) {
        Ok(v) => nf * v + table.log_z_interior_totals(m * nf, nf),
        Err(_) => f64::NAN,
    };
    let integral = log_integrate(log_f, m_star - delta, m_star + delta, &[t.m_star], 1e-12)?;
    if integral.is_nan() {
        return Err(Error::NonFinite { m: m_star });
    }
    let ln_w = integral + laplace_prefactor(n, t.k)?.ln() - nf * psi(g, t.m_star)?;
    Ok(ln_w.exp())
}

/// Limit of [`scaled_increment`]: `psi^(2k)(m*)/(2k)! m^{2k} - a_1 t1^2/2 - a_2 t2^2/2`.
pub fn taylor_quadratic_form(g: &Interaction, m_star: f64, theta1: f64, theta2: f64, m: f64) -> Result<f64> {
    let t = classify_type(g, m_star, None)?;
    let kk = 2 * t.k;
    let fact: f64 = (1..=kk).map(|i| i as f64).product();
    let (a1, a2) = AngularEntropy::new(&ModelPoint::interior(t.m_star, 1.0)?).curvatures();
    Ok(t.deriv_2k / fact * m.powi(kk as i32) - 0.5 * a1 * theta1 * theta1 - 0.5 * a2 * theta2 * theta2)
}

/// `n (psi(m* + m n^{-1/(2k)}, t1 n^{-1/2}, t2 n^{-1/2}) - psi(m*))`.
pub fn scaled_increment(g: &Interaction, m_star: f64, n: f64, theta1: f64, theta2: f64, m: f64) -> Result<f64> {
    let t = classify_type(g, m_star, None)?;
    let x = t.m_star + m * n.powf(-1.0 / (2 * t.k) as f64);
    let r = n.sqrt();
    Ok(n * (angular_psi(g, x, theta1 / r, theta2 / r)? - angular_psi(g, t.m_star, 0.0, 0.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_z_interior;
    use crate::thermo::limiting_entropy;

    #[test]
    fn angular_entropy_reduces_at_zero_angles() {
        for &(m, rho) in &[(0.0, 1.0), (0.4, 0.9), (-1.1, 1.3)] {
            let p = ModelPoint::interior(m, rho).unwrap();
            let s = AngularEntropy::new(&p).eval(0.0, 0.0);
            assert!((s - limiting_entropy(&p).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn bessel_small_cases() {
        let v = log_z_bessel(2, &ModelPoint::interior(0.0, 1.0).unwrap()).unwrap();
        assert!(v.ln().abs() < 1e-13);
        let p = ModelPoint::interior(0.2, 1.0).unwrap();
        let exact = log_z_interior(5, &p).unwrap().ln();
        assert!((log_z_bessel(5, &p).unwrap().ln() - exact).abs() < 1e-12);
        let q = ModelPoint::interior(-0.2, 1.0).unwrap();
        assert!((log_z_bessel(5, &q).unwrap().ln() - exact).abs() < 1e-12);
    }

    #[test]
    fn prefactor_examples() {
        // n = 2, k = 1: 2 * 2^{3/2} * 2! * pi^2 * e / (4 * 1 * 2!)
        let hand = (2.0 * 2f64.powf(1.5) * 2.0 * PI * PI * std::f64::consts::E / (4.0 * 2.0)).ln();
        assert!((laplace_prefactor(2, 1).unwrap().ln() - hand).abs() < 1e-14);
        let n = 300usize;
        let d = laplace_prefactor(n, 1).unwrap().ln() - laplace_prefactor(n, 3).unwrap().ln();
        assert!((d - (0.5 - 1.0 / 6.0) * (n as f64).ln()).abs() < 1e-10);
        assert!(laplace_prefactor(1, 1).is_err());
    }

    #[test]
    fn window_must_isolate_maximizer() {
        let g = Interaction::CurieWeiss { beta_j: 1.0, h: 0.0 };
        let m = find_global_maxima(&g, 1e-9, 1e-6).unwrap()[1];
        assert!(w_n_numeric(&g, m, 0.2, 50).is_ok());
        assert!(w_n_numeric(&g, m, 1.2, 50).is_err());
        // shallow double well: m* ~ 0.27, so a window of 0.6 reaches -m*
        let g = Interaction::CurieWeiss { beta_j: 0.53, h: 0.0 };
        let m = find_global_maxima(&g, 1e-9, 1e-6).unwrap();
        assert_eq!(m.len(), 2);
        assert!(matches!(w_n_numeric(&g, m[1], 0.6, 50), Err(Error::WindowNotIsolated { .. })));
    }

    #[test]
    fn quadratic_form_at_zero() {
        let q = taylor_quadratic_form(&Interaction::Zero, 0.0, 0.3, -0.5, 0.7).unwrap();
        assert!((q - (-0.25 * 0.49 - 0.5 * 0.09 - 0.5 * 0.25)).abs() < 1e-12);
    }
}
