//! Exact microcanonical partition functions and finite-volume entropies.
//!
//! For `n` spins with total magnetization `M` and total particle number `N`
//! (`|M| < N`), the partition function is
//!
//! ```text
//! Z_n(M, N) = 1/2 * Σ_{k=1}^{n-1} C(n,k) X^{k-1}/(k-1)! * Y^{n-k-1}/(n-k-1)!
//! ```
//!
//! with `X = (N + M)/2`, `Y = (N - M)/2`; on the boundary `|M| = N` it is
//! `N^{n-1}/(n-1)!`. Everything is evaluated in log space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{CompensatedSum, LnFactorials};
use crate::thermo::{grand_entropy, FieldParams};

/// Relative tolerance used to classify `|m| = rho`.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Interior,
    Boundary,
}

/// A constraint pair `(m, rho)`: specific magnetization and specific particle number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelPoint {
    m: f64,
    rho: f64,
    region: Region,
}

impl ModelPoint {
    /// Classifies `(m, rho)`; `|m| >= rho (1 - 1e-12)` counts as boundary.
    pub fn new(m: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !m.is_finite() || !rho.is_finite() {
            return Err(Error::InvalidPoint { m, rho });
        }
        let region = if m.abs() < rho * (1.0 - BOUNDARY_REL_TOL) {
            Region::Interior
        } else if m.abs() <= rho * (1.0 + BOUNDARY_REL_TOL) {
            Region::Boundary
        } else {
            return Err(Error::InvalidPoint { m, rho });
        };
        Ok(Self { m, rho, region })
    }

    /// Like [`ModelPoint::new`] but rejects boundary points.
    pub fn interior(m: f64, rho: f64) -> Result<Self> {
        let p = Self::new(m, rho)?;
        if p.region != Region::Interior {
            return Err(Error::NotInterior { m, rho });
        }
        Ok(p)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn is_interior(&self) -> bool {
        self.region == Region::Interior
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::NotInterior { m: self.m, rho: self.rho })
        }
    }

    pub fn totals(&self, n: usize) -> MacroTotals {
        MacroTotals { magnetization: self.m * n as f64, particles: self.rho * n as f64, n }
    }
}

/// The natural log of a strictly positive quantity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogReal(f64);

impl LogReal {
    pub fn from_ln(log_value: f64) -> Result<Self> {
        if log_value.is_finite() {
            Ok(Self(log_value))
        } else {
            Err(Error::Domain(format!("log value {log_value} is not finite")))
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    /// The represented quantity; may overflow to `inf` for large logs.
    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

/// Macroscopic totals `M_n = Σ φ_i`, `N_n = Σ |φ_i|` for a system of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroTotals {
    pub magnetization: f64,
    pub particles: f64,
    pub n: usize,
}

impl MacroTotals {
    pub fn new(magnetization: f64, particles: f64, n: usize) -> Result<Self> {
        if !(particles > 0.0) || magnetization.abs() > particles * (1.0 + BOUNDARY_REL_TOL) {
            return Err(Error::InvalidPoint { m: magnetization, rho: particles });
        }
        Ok(Self { magnetization, particles, n })
    }

    pub fn point(&self) -> Result<ModelPoint> {
        let n = self.n as f64;
        ModelPoint::new(self.magnetization / n, self.particles / n)
    }
}

/// Precomputed `ln[C(n,k) / ((k-1)! (n-k-1)!)]` for `k = 1..n-1`, so that
/// repeated evaluations of `Z_n` at one system size cost `O(n)` each.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    n: usize,
    coeffs: Vec<f64>,
    ln_fact: LnFactorials,
}

impl PartitionTable {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SystemTooSmall { n, min: 2 });
        }
        let t = LnFactorials::new(n);
        let coeffs =
            (1..n).map(|k| t.get(n) - ((t.get(k) + t.get(n - k)) + (t.get(k - 1) + t.get(n - k - 1)))).collect();
        Ok(Self { n, coeffs, ln_fact: t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ln` of the summands for `k = 1..n-1` at totals `(M, N)`, without the 1/2.
    pub fn log_terms(&self, magnetization: f64, particles: f64) -> Vec<f64> {
        let n = self.n;
        let lx = (0.5 * (particles + magnetization)).ln();
        let ly = (0.5 * (particles - magnetization)).ln();
        (1..n)
            .map(|k| {
                let a = (k - 1) as f64;
                let b = (n - k - 1) as f64;
                let xa = if a == 0.0 { 0.0 } else { a * lx };
                let yb = if b == 0.0 { 0.0 } else { b * ly };
                self.coeffs[k - 1] + (xa + yb)
            })
            .collect()
    }

    /// `ln Z_n(M, N)` for `|M| < N`.
    pub fn log_z_interior_totals(&self, magnetization: f64, particles: f64) -> f64 {
        let terms = self.log_terms(magnetization, particles);
        symmetric_log_sum_exp(&terms) - std::f64::consts::LN_2
    }

    /// `ln Z_n(±N, N) = (n-1) ln N - ln (n-1)!`.
    pub fn log_z_boundary_totals(&self, particles: f64) -> f64 {
        (self.n - 1) as f64 * particles.ln() - self.ln_fact.get(self.n - 1)
    }

    /// Dispatches on the region of `(M, N)`.
    pub fn log_z_totals(&self, magnetization: f64, particles: f64) -> f64 {
        if magnetization.abs() < particles * (1.0 - BOUNDARY_REL_TOL) {
            self.log_z_interior_totals(magnetization, particles)
        } else {
            self.log_z_boundary_totals(particles)
        }
    }

    /// `s_n(m, rho) = ln Z_n(mn, rho n) / n`.
    pub fn entropy(&self, point: &ModelPoint) -> f64 {
        let t = point.totals(self.n);
        let lz = match point.region() {
            Region::Interior => self.log_z_interior_totals(t.magnetization, t.particles),
            Region::Boundary => self.log_z_boundary_totals(t.particles),
        };
        lz / self.n as f64
    }
}

/// Log-sum-exp that pairs index `i` with `len - 1 - i` before accumulating,
/// so a reversed input gives a bitwise identical result.
pub(crate) fn symmetric_log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let len = terms.len();
    let mut acc = CompensatedSum::default();
    for i in 0..len / 2 {
        acc.add((terms[i] - max).exp() + (terms[len - 1 - i] - max).exp());
    }
    if len % 2 == 1 {
        acc.add((terms[len / 2] - max).exp());
    }
    max + acc.value().ln()
}

/// `ln Z_n(mn, rho n)` for an interior point.
pub fn log_z_interior(n: usize, point: &ModelPoint) -> Result<LogReal> {
    point.require_interior()?;
    let table = PartitionTable::new(n)?;
    let t = point.totals(n);
    LogReal::from_ln(table.log_z_interior_totals(t.magnetization, t.particles))
}

/// `ln(N^{n-1} / (n-1)!)`, the boundary partition function.
pub fn log_z_boundary(n: usize, particles: f64) -> Result<LogReal> {
    if n < 2 {
        return Err(Error::SystemTooSmall { n, min: 2 });
    }
    if !(particles > 0.0) || !particles.is_finite() {
        return Err(Error::InvalidArgument(format!("particle number N = {particles} must be > 0")));
    }
    let t = LnFactorials::new(n);
    LogReal::from_ln((n - 1) as f64 * particles.ln() - t.get(n - 1))
}

/// `ln Z_n(M, N)` for arbitrary admissible totals.
pub fn log_z(totals: &MacroTotals) -> Result<LogReal> {
    let table = PartitionTable::new(totals.n)?;
    if totals.magnetization.abs() < totals.particles * (1.0 - BOUNDARY_REL_TOL) {
        LogReal::from_ln(table.log_z_interior_totals(totals.magnetization, totals.particles))
    } else {
        log_z_boundary(totals.n, totals.particles)
    }
}

/// Finite-volume specific entropy `s_n(m, rho)`.
pub fn entropy_n(n: usize, point: &ModelPoint) -> Result<f64> {
    Ok(PartitionTable::new(n)?.entropy(point))
}

/// Upper bound from nonnegativity of the relative entropy:
/// `s_n <= (n-2)/n * (beta m + mu rho + f(beta, mu))`.
pub fn entropy_upper_bound(n: usize, point: &ModelPoint, params: &FieldParams) -> f64 {
    let nf = n as f64;
    (nf - 2.0) / nf
        * (params.beta() * point.m() + params.mu() * point.rho() + grand_entropy(params.beta(), params.mu()))
}

/// Lower bound keeping only the `k = n-1` summand of the partition function.
pub fn entropy_lower_bound(n: usize, point: &ModelPoint) -> f64 {
    let nf = n as f64;
    let t = LnFactorials::new(n);
    ((0.5f64).ln() + (nf - 2.0) * (0.5 * (point.rho() + point.m())).ln() + (nf - 1.0) * nf.ln() - t.get(n - 2)) / nf
}

/// Regular lattice of `(m, rho)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub m_min: f64,
    pub m_max: f64,
    pub m_count: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_count: usize,
}

impl Lattice {
    fn coord(min: f64, max: f64, count: usize, i: usize) -> f64 {
        if count == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (count - 1) as f64
        }
    }

    pub fn m_at(&self, i: usize) -> f64 {
        Self::coord(self.m_min, self.m_max, self.m_count, i)
    }

    pub fn rho_at(&self, j: usize) -> f64 {
        Self::coord(self.rho_min, self.rho_max, self.rho_count, j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityViolation {
    pub center: (f64, f64),
    pub direction: (i64, i64),
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub n: usize,
    pub tolerance: f64,
    pub checked: usize,
    pub skipped_points: usize,
    pub violations: Vec<ConcavityViolation>,
}

/// Midpoint-concavity check of `s_n` along the four lattice directions.
/// Points outside the open region `|m| < rho` are skipped.
pub fn check_concavity_grid(n: usize, grid: &Lattice, tol: f64) -> Result<ConcavityReport> {
    let table = PartitionTable::new(n)?;
    let mut values = vec![vec![None; grid.rho_count]; grid.m_count];
    let mut skipped = 0;
    for (i, row) in values.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            match ModelPoint::interior(grid.m_at(i), grid.rho_at(j)) {
                Ok(p) => *slot = Some(table.entropy(&p)),
                Err(_) => skipped += 1,
            }
        }
    }
    let mut checked = 0;
    let mut violations = Vec::new();
    let dirs: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];
    let get = |i: i64, j: i64| -> Option<f64> {
        if i < 0 || j < 0 || i as usize >= grid.m_count || j as usize >= grid.rho_count {
            return None;
        }
        values[i as usize][j as usize]
    };
    for i in 0..grid.m_count as i64 {
        for j in 0..grid.rho_count as i64 {
            let Some(center) = get(i, j) else { continue };
            for &(di, dj) in &dirs {
                let (Some(a), Some(b)) = (get(i - di, j - dj), get(i + di, j + dj)) else {
                    continue;
                };
                checked += 1;
                let deficit = 0.5 * (a + b) - center;
                if deficit > tol {
                    violations.push(ConcavityViolation {
                        center: (grid.m_at(i as usize), grid.rho_at(j as usize)),
                        direction: (di, dj),
                        deficit,
                    });
                }
            }
        }
    }
    Ok(ConcavityReport { n, tolerance: tol, checked, skipped_points: skipped, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn point_classification() {
        assert_eq!(ModelPoint::new(0.5, 1.0).unwrap().region(), Region::Interior);
        assert_eq!(ModelPoint::new(1.0, 1.0).unwrap().region(), Region::Boundary);
        assert_eq!(ModelPoint::new(-1.0 + 1e-14, 1.0).unwrap().region(), Region::Boundary);
        assert!(ModelPoint::new(1.1, 1.0).is_err());
        assert!(ModelPoint::new(0.0, 0.0).is_err());
        assert!(ModelPoint::new(0.0, -1.0).is_err());
        assert!(matches!(ModelPoint::interior(1.0, 1.0), Err(Error::NotInterior { .. })));
    }

    #[test]
    fn small_interior_values() {
        let p = ModelPoint::interior(0.0, 1.0).unwrap();
        assert_eq!(log_z_interior(2, &p).unwrap().ln(), 0.0);
        assert!(rel(log_z_interior(3, &p).unwrap().value(), 4.5) < 1e-12);
        assert!(rel(log_z_interior(4, &p).unwrap().value(), 20.0) < 1e-12);
    }

    #[test]
    fn boundary_values() {
        assert!((log_z_boundary(2, 2.0).unwrap().ln() - 2f64.ln()).abs() < 1e-15);
        assert!((log_z_boundary(3, 3.0).unwrap().ln() - 4.5f64.ln()).abs() < 1e-15);
        assert!((log_z_boundary(3, 1.0).unwrap().ln() - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_z_boundary(3, 0.0).is_err());
        assert!(log_z_boundary(3, -1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelPoint::interior(0.0, 1.0).unwrap();
        assert!(matches!(log_z_interior(1, &p), Err(Error::SystemTooSmall { .. })));
        let b = ModelPoint::new(1.0, 1.0).unwrap();
        assert!(matches!(log_z_interior(5, &b), Err(Error::NotInterior { .. })));
    }

    #[test]
    fn entropy_examples() {
        let p = ModelPoint::interior(0.0, 1.0).unwrap();
        assert!((entropy_n(3, &p).unwrap() - 4.5f64.ln() / 3.0).abs() < 1e-15);
        assert!((entropy_n(3, &p).unwrap() - 0.501359).abs() < 1e-6);
        assert_eq!(entropy_n(2, &p).unwrap(), 0.0);
        let b = ModelPoint::new(1.0, 1.0).unwrap();
        assert!((entropy_n(3, &b).unwrap() - 4.5f64.ln() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetry_is_exact() {
        for n in [2, 3, 7, 50, 301] {
            for m in [0.1, 0.37, 0.9] {
                let a = log_z_interior(n, &ModelPoint::interior(m, 1.3).unwrap()).unwrap();
                let b = log_z_interior(n, &ModelPoint::interior(-m, 1.3).unwrap()).unwrap();
                assert_eq!(a.ln().to_bits(), b.ln().to_bits(), "n={n}, m={m}");
            }
        }
    }

    #[test]
    fn concavity_small_n() {
        let grid = Lattice { m_min: -0.8, m_max: 0.8, m_count: 21, rho_min: 0.5, rho_max: 1.5, rho_count: 21 };
        let r2 = check_concavity_grid(2, &grid, 1e-9).unwrap();
        assert!(r2.violations.is_empty());
        assert!(r2.skipped_points > 0);
        let r10 = check_concavity_grid(10, &grid, 1e-9).unwrap();
        assert!(r10.violations.is_empty());
        assert!(r10.checked > 1000);
    }
}
