use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::tf::RationalTF;
use crate::error::{Error, Result};

/// Single-input single-output realization `dx/dt = A x + B u`, `y = C x + D u`.
///
/// `A` is stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

impl StateSpace {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n * n || c.len() != n {
            return Err(Error::invalid(
                "state space",
                format!(
                    "inconsistent dimensions: A has {} entries, B {}, C {}",
                    a.len(),
                    n,
                    c.len()
                ),
            ));
        }
        Ok(StateSpace { n, a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.a)
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn zero_state(&self) -> Vec<f64> {
        vec![0.0; self.n]
    }

    pub fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }

    /// `dx/dt` written into `out`.
    pub fn derivative(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = self.b[i] * u;
            for j in 0..n {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
    }

    /// Transfer function value `C (sI - A)^-1 B + D`.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        if self.n == 0 {
            return Ok(Complex64::new(self.d, 0.0));
        }
        let n = self.n;
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[i * n + j]
        });
        let rhs = DVector::<Complex64>::from_iterator(n, self.b.iter().map(|&v| v.into()));
        let x = m.lu().solve(&rhs).ok_or(Error::EvalAtPole(s))?;
        let y: Complex64 = self.c.iter().zip(x.iter()).map(|(c, x)| *c * x).sum();
        Ok(y + self.d)
    }

    /// Diagonal similarity transform that equalizes row and column norms of
    /// `A`. The transfer function is unchanged.
    pub fn balanced(&self) -> Self {
        let n = self.n;
        let mut a = self.a.clone();
        let mut scale = vec![1.0; n];
        for _ in 0..100 {
            let mut done = true;
            for i in 0..n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 0..n {
                    if i != j {
                        r += a[i * n + j].abs();
                        c += a[j * n + i].abs();
                    }
                }
                if r == 0.0 || c == 0.0 {
                    continue;
                }
                let mut f = 1.0;
                let mut cc = c;
                while cc < r / 2.0 {
                    f *= 2.0;
                    cc *= 4.0;
                }
                while cc > r * 2.0 {
                    f /= 2.0;
                    cc /= 4.0;
                }
                if (cc + r / f) / f < 0.95 * (c + r) {
                    done = false;
                    // x_i' = x_i / f
                    for j in 0..n {
                        a[i * n + j] /= f;
                        a[j * n + i] *= f;
                    }
                    scale[i] *= f;
                }
            }
            if done {
                break;
            }
        }
        let b = self.b.iter().zip(&scale).map(|(b, f)| b / f).collect();
        let c = self.c.iter().zip(&scale).map(|(c, f)| c * f).collect();
        StateSpace {
            n,
            a,
            b,
            c,
            d: self.d,
        }
    }
}

/// Controllable canonical realization of a proper transfer function.
pub fn tf_to_statespace(f: &RationalTF) -> Result<StateSpace> {
    if !f.is_proper() {
        return Err(Error::ImproperTf {
            num: f.num().degree(),
            den: f.den().degree(),
        });
    }
    let n = f.den().degree();
    let den = f.den().coeffs(); // monic
    let mut num: Vec<f64> = (0..=n).map(|k| f.num().coeff(k)).collect();
    let d = num[n];
    // strictly proper remainder: num - d*den
    for k in 0..=n {
        num[k] -= d * den[k];
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n.saturating_sub(1) {
        a[i * n + i + 1] = 1.0;
    }
    if n > 0 {
        for j in 0..n {
            a[(n - 1) * n + j] = -den[j];
        }
    }
    let mut b = vec![0.0; n];
    if n > 0 {
        b[n - 1] = 1.0;
    }
    let c = num[..n].to_vec();
    StateSpace::new(a, b, c, d)
}

/// Workspace for repeated RK4 steps without allocation.
#[derive(Debug, Clone)]
pub struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub fn new(n: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Classical RK4 step of `dx/dt = A x + B u` with `u` held over the step.
pub fn step_rk4(ss: &StateSpace, x: &[f64], u: f64, h: f64) -> Vec<f64> {
    let mut next = x.to_vec();
    let mut scratch = Rk4Scratch::new(ss.order());
    step_rk4_in_place(ss, &mut next, u, h, &mut scratch);
    next
}

/// In-place variant of [`step_rk4`].
pub fn step_rk4_in_place(ss: &StateSpace, x: &mut [f64], u: f64, h: f64, w: &mut Rk4Scratch) {
    let n = ss.order();
    if n == 0 {
        return;
    }
    ss.derivative(x, u, &mut w.k1);
    for i in 0..n {
        w.tmp[i] = x[i] + 0.5 * h * w.k1[i];
    }
    ss.derivative(&w.tmp, u, &mut w.k2);
    for i in 0..n {
        w.tmp[i] = x[i] + 0.5 * h * w.k2[i];
    }
    ss.derivative(&w.tmp, u, &mut w.k3);
    for i in 0..n {
        w.tmp[i] = x[i] + h * w.k3[i];
    }
    ss.derivative(&w.tmp, u, &mut w.k4);
    for i in 0..n {
        x[i] += h / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
}

/// Unit-step response sampled every `h` seconds for `steps` steps, starting at rest.
/// Returns `steps + 1` samples including `t = 0`.
pub fn step_response(f: &RationalTF, h: f64, steps: usize) -> Result<Vec<f64>> {
    let ss = tf_to_statespace(f)?.balanced();
    let mut x = ss.zero_state();
    let mut w = Rk4Scratch::new(ss.order());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(ss.output(&x, 1.0));
    for _ in 0..steps {
        step_rk4_in_place(&ss, &mut x, 1.0, h, &mut w);
        out.push(ss.output(&x, 1.0));
    }
    Ok(out)
}
