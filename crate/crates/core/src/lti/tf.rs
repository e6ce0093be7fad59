use std::fmt;

use num_complex::Complex64;

use super::polynomial::{poly_mul, Polynomial};
use crate::error::{Error, Result};

/// `|den(s)|` below this fraction of `sum |d_k| |s|^k` counts as a pole hit.
pub const POLE_REL: f64 = 1e-12;

/// Real rational function `num(s) / den(s)` with a monic denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let lead = den.leading();
        Ok(RationalTF {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    /// Convenience constructor from ascending coefficient lists.
    ///
    /// Panics when the denominator is zero; use [`RationalTF::new`] for fallible input.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Self {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
            .expect("nonzero denominator")
    }

    pub fn constant(k: f64) -> Self {
        RationalTF {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// `1/s`
    pub fn integrator() -> Self {
        RationalTF {
            num: Polynomial::one(),
            den: Polynomial::s(),
        }
    }

    /// `s`; improper, only useful as an intermediate factor.
    pub fn differentiator() -> Self {
        RationalTF {
            num: Polynomial::s(),
            den: Polynomial::one(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// `deg(den) - deg(num)`; negative for improper functions.
    pub fn relative_degree(&self) -> isize {
        self.den.degree() as isize - self.num.degree() as isize
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if self.num.is_zero() {
            Vec::new()
        } else {
            self.num.roots()
        }
    }

    /// `num(s)/den(s)`, failing with [`Error::EvalAtPole`] when `s` sits on a pole.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        tf_eval(self, s)
    }

    /// Frequency response at `s = j*omega`.
    pub fn freq_response(&self, omega: f64) -> Result<Complex64> {
        tf_eval(self, Complex64::new(0.0, omega))
    }

    pub fn scale(&self, k: f64) -> Self {
        RationalTF {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Reciprocal; the numerator must be nonzero.
    pub fn recip(&self) -> Result<Self> {
        RationalTF::new(self.den.clone(), self.num.clone())
    }

    pub fn series(&self, other: &Self) -> Self {
        tf_series(self, other)
    }

    pub fn add(&self, other: &Self) -> Self {
        tf_add(self, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        tf_add(self, &other.neg())
    }

    /// Multiplies by `s`, exact on the coefficients.
    pub fn times_s(&self) -> Self {
        RationalTF {
            num: poly_mul(&self.num, &Polynomial::s()),
            den: self.den.clone(),
        }
    }

    /// Coefficient-wise comparison of numerator and denominator.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.num.approx_eq(&other.num, tol) && self.den.approx_eq(&other.den, tol)
    }
}

/// Horner evaluation of `f` at a complex point.
pub fn tf_eval(f: &RationalTF, s: Complex64) -> Result<Complex64> {
    let d = f.den.eval(s);
    let scale = f.den.magnitude_scale(s);
    if d.norm() <= POLE_REL * scale || d.norm() == 0.0 {
        return Err(Error::EvalAtPole(s));
    }
    Ok(f.num.eval(s) / d)
}

/// Cascade `a * b` without pole-zero cancellation.
pub fn tf_series(a: &RationalTF, b: &RationalTF) -> RationalTF {
    RationalTF::new(poly_mul(&a.num, &b.num), poly_mul(&a.den, &b.den))
        .expect("product of nonzero denominators is nonzero")
}

/// Parallel sum `a + b` over a common denominator.
///
/// Identical denominators are shared instead of multiplied.
pub fn tf_add(a: &RationalTF, b: &RationalTF) -> RationalTF {
    if a.num.is_zero() {
        return b.clone();
    }
    if b.num.is_zero() {
        return a.clone();
    }
    if a.den.approx_eq(&b.den, 1e-14) {
        return RationalTF::new(&a.num + &b.num, a.den.clone()).expect("nonzero denominator");
    }
    let num = &poly_mul(&a.num, &b.den) + &poly_mul(&b.num, &a.den);
    RationalTF::new(num, poly_mul(&a.den, &b.den)).expect("nonzero denominator")
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}
