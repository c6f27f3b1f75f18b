//! Truncated Taylor series ("jets") for exact higher derivatives.
//!
//! A jet of order `K` holds the normalized coefficients `f^(j)(x0) / j!` for
//! `j = 0..=K`. Arithmetic on jets propagates the series of the composition,
//! so evaluating a formula on `Jet::variable(x0, K)` yields every derivative
//! of that formula at `x0` up to order `K` without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order > 0 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The `j`-th derivative, `j! * c_j`.
    pub fn derivative(&self, j: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=j {
            fact *= i as f64;
        }
        self.coeffs[j] * fact
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add_scalar(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += a;
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "jet order mismatch");
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn sqrt(&self) -> Self {
        let a = &self.coeffs;
        let mut r = vec![0.0; a.len()];
        r[0] = a[0].sqrt();
        for k in 1..a.len() {
            let mut acc = a[k];
            for i in 1..k {
                acc -= r[i] * r[k - i];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Self { coeffs: r }
    }

    pub fn ln(&self) -> Self {
        let a = &self.coeffs;
        let mut l = vec![0.0; a.len()];
        l[0] = a[0].ln();
        for k in 1..a.len() {
            let mut acc = a[k];
            for i in 1..k {
                acc -= (i as f64 / k as f64) * l[i] * a[k - i];
            }
            l[k] = acc / a[0];
        }
        Self { coeffs: l }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![0.0; a.len()];
        e[0] = a[0].exp();
        for k in 1..a.len() {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += (i as f64) * a[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Self { coeffs: e }
    }

    /// Returns `(sin, cos)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let mut s = vec![0.0; a.len()];
        let mut c = vec![0.0; a.len()];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..a.len() {
            let (mut ds, mut dc) = (0.0, 0.0);
            for i in 1..=k {
                let w = i as f64 * a[i];
                ds += w * c[k - i];
                dc -= w * s[k - i];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn powi(&self, exp: i32) -> Self {
        if exp < 0 {
            return Jet::constant(1.0, self.order()) / self.powi(-exp);
        }
        let mut out = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = exp as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        out
    }

    /// `|x|`; `None` at a zero base point where the series does not exist.
    pub fn abs(&self) -> Option<Self> {
        if self.coeffs[0] > 0.0 {
            Some(self.clone())
        } else if self.coeffs[0] < 0.0 {
            Some(-self)
        } else {
            None
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "jet order mismatch");
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet { coeffs: out }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "jet order mismatch");
        let a = &self.coeffs;
        let b = &rhs.coeffs;
        let mut q = vec![0.0; a.len()];
        for k in 0..a.len() {
            let mut acc = a[k];
            for i in 0..k {
                acc -= q[i] * b[k - i];
            }
            q[k] = acc / b[0];
        }
        Jet { coeffs: q }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable_has_unit_derivatives() {
        let x = Jet::variable(0.0, 6);
        let e = x.exp();
        for j in 0..=6 {
            assert!((e.derivative(j) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn sqrt_and_ln_match_closed_forms() {
        let x0 = 0.3;
        let x = Jet::variable(x0, 3);
        let r = (&Jet::constant(1.0, 3) - &(&x * &x)).sqrt();
        // d/dx sqrt(1 - x^2) = -x / sqrt(1 - x^2)
        let d1 = -x0 / (1.0 - x0 * x0).sqrt();
        assert!((r.derivative(1) - d1).abs() < 1e-14);
        let l = x.add_scalar(1.0).ln();
        // third derivative of ln(1 + x) = 2 / (1 + x)^3
        assert!((l.derivative(3) - 2.0 / (1.0 + x0).powi(3)).abs() < 1e-12);
    }

    #[test]
    fn sin_cos_and_division() {
        let x = Jet::variable(0.7, 4);
        let (s, c) = x.sin_cos();
        let t = &s / &c;
        // d/dx tan = 1 + tan^2
        let tan = 0.7f64.tan();
        assert!((t.derivative(1) - (1.0 + tan * tan)).abs() < 1e-12);
        assert!((c.derivative(4) - 0.7f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Jet::variable(1.5, 5);
        let p = x.powi(4);
        assert!((p.derivative(1) - 4.0 * 1.5f64.powi(3)).abs() < 1e-12);
        assert!((p.derivative(4) - 24.0).abs() < 1e-12);
        assert!(p.derivative(5).abs() < 1e-12);
        let inv = x.powi(-1);
        assert!((inv.derivative(1) + 1.0 / 2.25).abs() < 1e-14);
    }
}
