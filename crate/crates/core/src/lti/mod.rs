//! Rational transfer functions, state-space realization and fixed-step
//! integration.

mod polynomial;
mod roots;
mod statespace;
mod tf;
mod theorems;

pub use polynomial::{poly_mul, Polynomial, TRIM_REL};
pub use statespace::{step_response, step_rk4, step_rk4_in_place, tf_to_statespace, Rk4Scratch, StateSpace};
pub use tf::{tf_add, tf_eval, tf_series, RationalTF, POLE_REL};
pub use theorems::{fvt_limit, ivt_rate_limit, ORIGIN_TOL, PAIRING_TOL};
