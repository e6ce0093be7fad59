//! Initial- and final-value limits of step responses.

use num_complex::Complex64;

use super::polynomial::Polynomial;
use super::tf::RationalTF;
use crate::error::{Error, Result};

/// A root with modulus below this is taken to sit at the origin.
pub const ORIGIN_TOL: f64 = 1e-9;
/// Numerator zeros this close to the origin cancel origin poles.
pub const PAIRING_TOL: f64 = 1e-8;

/// `lim_{s->inf} s f(s)`: the initial slope of the unit-step response of `f`.
///
/// Relative degree 1 gives the leading-coefficient ratio, higher relative
/// degrees give 0, and a biproper `f` has a step at `t = 0+` and an unbounded
/// initial slope.
pub fn ivt_rate_limit(f: &RationalTF) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    if !f.is_proper() {
        return Err(Error::ImproperTf {
            num: f.num().degree(),
            den: f.den().degree(),
        });
    }
    match f.relative_degree() {
        0 => Err(Error::Unbounded),
        1 => Ok(f.num().leading() / f.den().leading()),
        _ => Ok(0.0),
    }
}

/// `lim_{s->0} s f(s)`: the final value of the impulse response of `s f`,
/// i.e. the steady state of `f` driven by a unit step when `f` already
/// contains the `1/s` of the input.
///
/// Origin poles of `s f` are cancelled against numerator zeros at the origin
/// first; any remaining pole on or right of the imaginary axis is rejected.
pub fn fvt_limit(f: &RationalTF) -> Result<f64> {
    let num = f.num() * &Polynomial::s();
    let den = f.den();
    let poles = den.roots();
    let mut origin_poles = 0;
    for p in &poles {
        if p.norm() < ORIGIN_TOL {
            origin_poles += 1;
        } else if p.re >= 0.0 {
            return Err(Error::FvtInvalid(*p));
        }
    }
    if num.is_zero() {
        return Ok(0.0);
    }
    let origin_zeros = num
        .roots()
        .iter()
        .filter(|z| z.norm() < PAIRING_TOL)
        .count();
    let k = origin_poles.min(origin_zeros);
    if origin_poles > k {
        return Err(Error::FvtInvalid(Complex64::new(0.0, 0.0)));
    }
    Ok(num.coeff(k) / den.coeff(k))
}
