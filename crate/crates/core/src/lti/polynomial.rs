use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::roots;

/// Relative size below which a leading coefficient is treated as zero.
pub const TRIM_REL: f64 = 1e-12;

/// Real polynomial in `s`, coefficients in ascending powers (`coeffs[k]` multiplies `s^k`).
///
/// The zero polynomial is stored as `[0.0]`; every other polynomial has a
/// nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial and trims leading coefficients smaller than
    /// `1e-12 * max|c|`.
    ///
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().unwrap().abs() <= TRIM_REL * max {
            coeffs.pop();
        }
        if max == 0.0 {
            coeffs.truncate(1);
        }
        Polynomial { coeffs }
    }

    /// Keeps the coefficients as given apart from exact trailing zeros.
    fn from_exact(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    /// `s`
    pub fn s() -> Self {
        Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    /// `a*s + b`
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(vec![b, a])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, r| &acc * &Self::linear(1.0, -r))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Coefficient of `s^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// Sum of `|c_k| |s|^k`, the scale against which `|p(s)|` is judged small.
    pub fn magnitude_scale(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Divides by `s`, dropping the constant term.
    ///
    /// Only meaningful when the constant term is (numerically) zero.
    pub fn deflate_origin(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::from_exact(self.coeffs[1..].to_vec())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::from_exact(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Complex roots via companion-matrix eigenvalues.
    pub fn roots(&self) -> Vec<Complex64> {
        roots::poly_roots(self)
    }

    /// Coefficient-wise comparison after normalization by the largest magnitude.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        (0..n).all(|k| (self.coeff(k) - other.coeff(k)).abs() <= tol * scale)
    }

    /// Sum with cancellation-aware trimming: a leading coefficient is dropped
    /// when it is below `TRIM_REL` times the operands' coefficients at that order.
    fn combine(&self, other: &Self, sign: f64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        let mut mag = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeff(k);
            let b = sign * other.coeff(k);
            out.push(a + b);
            mag.push(a.abs().max(b.abs()));
        }
        while out.len() > 1 {
            let k = out.len() - 1;
            if out[k].abs() <= TRIM_REL * mag[k] {
                out.pop();
            } else {
                break;
            }
        }
        if out.len() == 1 && out[0].abs() <= TRIM_REL * mag[0] {
            out[0] = 0.0;
        }
        Polynomial { coeffs: out }
    }
}

/// Product of two polynomials (coefficient convolution).
pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let mut out = vec![0.0; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        for (j, y) in b.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    // The product's leading coefficient is the product of nonzero leading
    // coefficients, so no relative trimming is applied here.
    Polynomial::from_exact(out)
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        poly_mul(self, rhs)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && !(self.coeffs.len() == 1) {
                continue;
            }
            if !first {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}s")?,
                _ => write!(f, "{a}s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_square() {
        let p = Polynomial::new(vec![1.0, 1.0]);
        assert_eq!(poly_mul(&p, &p).coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_annihilates() {
        let p = Polynomial::new(vec![1.0, 1.0]);
        let z = Polynomial::zero();
        let prod = poly_mul(&z, &p);
        assert!(prod.is_zero());
        assert_eq!(prod.coeffs(), &[0.0]);
    }

    #[test]
    fn governor_turbine_lags() {
        // (1 + T_G s)(1 + T_CH s) with T_G = 0.1, T_CH = 0.2
        let prod = poly_mul(
            &Polynomial::new(vec![1.0, 0.1]),
            &Polynomial::new(vec![1.0, 0.2]),
        );
        let expect = [1.0, 0.3, 0.02];
        for (a, b) in prod.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn trims_spurious_leading_terms() {
        let p = Polynomial::new(vec![1.0, 2.0, 1e-15]);
        assert_eq!(p.degree(), 1);
        let a = Polynomial::new(vec![1.0, 1.0, 3.0]);
        let b = Polynomial::new(vec![0.0, 0.0, 3.0]);
        assert_eq!((&a - &b).degree(), 1);
    }

    #[test]
    fn sum_to_zero_is_zero_polynomial() {
        let a = Polynomial::new(vec![1.0, 2.0]);
        let d = &a - &a;
        assert!(d.is_zero());
    }

    #[test]
    #[should_panic]
    fn empty_is_rejected() {
        let _ = Polynomial::new(vec![]);
    }

    #[test]
    fn horner_eval() {
        let p = Polynomial::new(vec![1.0, -3.0, 2.0]);
        assert_eq!(p.eval_real(2.0), 3.0);
        let v = p.eval(Complex64::new(0.0, 1.0));
        assert!((v - Complex64::new(-1.0, -3.0)).norm() < 1e-15);
    }
}
