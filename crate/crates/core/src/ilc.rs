//! Interlinking converter controller: lead-lag concatenators on each subgrid
//! deviation and two PI power loops that move power between the storage
//! subgrid and the AC and DC subgrids.
//!
//! Sign convention: `P1 > 0` flows DS -> DC, `P2 > 0` flows DS -> AC.

use crate::error::{Error, Result};
use crate::lti::{Polynomial, RationalTF};
use crate::subgrid::{SubgridKind, SubgridSpec};

/// Cutoffs of the three concatenators `T_x(s) = (s + omega_x)/(s + omega_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcatenatorSpec {
    pub omega_0: f64,
    pub omega_ac: f64,
    pub omega_dc: f64,
    pub omega_ds: f64,
}

impl ConcatenatorSpec {
    pub fn omega(&self, kind: SubgridKind) -> f64 {
        match kind {
            SubgridKind::Ac => self.omega_ac,
            SubgridKind::Dc => self.omega_dc,
            SubgridKind::Ds => self.omega_ds,
        }
    }

    /// Identity filters (`omega_x = omega_0`): transient coupling only, no
    /// steady-state rescaling of the deviations.
    pub fn unity(omega_0: f64) -> Self {
        ConcatenatorSpec {
            omega_0,
            omega_ac: omega_0,
            omega_dc: omega_0,
            omega_ds: omega_0,
        }
    }
}

/// `omega_x = omega_0 x_max/(x_max - x_min)`, so that each filter's DC gain
/// turns a per-unit deviation into the subgrid's loading index.
pub fn design_omegas(omega_0: f64, ac: &SubgridSpec, dc: &SubgridSpec, ds: &SubgridSpec) -> Result<ConcatenatorSpec> {
    if !(omega_0 > 0.0) {
        return Err(Error::invalid("ilc.omega_0", "must be positive"));
    }
    let w = |s: &SubgridSpec| -> Result<f64> {
        if s.range() == 0.0 {
            return Err(Error::DegenerateLimits(s.x_max));
        }
        Ok(omega_0 * s.x_max / s.range())
    };
    Ok(ConcatenatorSpec {
        omega_0,
        omega_ac: w(ac)?,
        omega_dc: w(dc)?,
        omega_ds: w(ds)?,
    })
}

/// Smallest `omega_0` a single-precision controller can resolve:
/// `M 2^-23 / T_s`.
///
/// With `omega_0 T_s` below the float mantissa step, the discrete pole
/// `1 - omega_0 T_s` rounds to 1 and the filter degenerates to an integrator.
pub fn min_cutoff(sampling_period: f64, safety_factor: f64) -> f64 {
    safety_factor * f64::from(f32::EPSILON) / sampling_period
}

/// `(s + omega_x)/(s + omega_0)` for the given channel.
pub fn concatenator_tf(spec: &ConcatenatorSpec, channel: SubgridKind) -> RationalTF {
    RationalTF::from_coeffs(&[spec.omega(channel), 1.0], &[spec.omega_0, 1.0])
}

/// Gains of the two power loops and the controller's sampling data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlcSpec {
    pub k_tp1: f64,
    pub k_ti1: f64,
    pub k_tp2: f64,
    pub k_ti2: f64,
    pub sampling_period: f64,
    pub safety_factor_m: f64,
}

impl Default for IlcSpec {
    /// Loop gains fast enough to equalize the concatenated deviations within
    /// a few milliseconds, well ahead of the first 10 ms rate sample.
    fn default() -> Self {
        IlcSpec {
            k_tp1: 4000.0,
            k_ti1: 4e5,
            k_tp2: 4000.0,
            k_ti2: 4e5,
            sampling_period: 50e-6,
            safety_factor_m: 1.3,
        }
    }
}

impl IlcSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ilc.k_tp1", self.k_tp1),
            ("ilc.k_ti1", self.k_ti1),
            ("ilc.k_tp2", self.k_tp2),
            ("ilc.k_ti2", self.k_ti2),
            ("ilc.T_s", self.sampling_period),
            ("ilc.M", self.safety_factor_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Controller memory: concatenator states, PI integrals and the last outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IlcState {
    /// Filter states `z` for AC, DC, DS.
    pub z: [f64; 3],
    pub int1: f64,
    pub int2: f64,
    /// Last commanded flows in watts.
    pub p1: f64,
    pub p2: f64,
    /// Global power base `P_ac_max + P_dc_max + P_ds_max` in watts.
    pub p_base: f64,
}

impl IlcState {
    pub fn new(p_base: f64) -> Self {
        IlcState {
            z: [0.0; 3],
            int1: 0.0,
            int2: 0.0,
            p1: 0.0,
            p2: 0.0,
            p_base,
        }
    }

    /// Concatenator outputs `y = u + (omega_x - omega_0) z` for the given
    /// deviations, ordered AC, DC, DS.
    pub fn concatenated(&self, dev: [f64; 3], c: &ConcatenatorSpec) -> [f64; 3] {
        let mut y = [0.0; 3];
        for (i, k) in SubgridKind::ALL.iter().enumerate() {
            y[i] = dev[i] + (c.omega(*k) - c.omega_0) * self.z[i];
        }
        y
    }
}

/// One controller step.
///
/// The flows are evaluated from the state at the start of the step and
/// returned in `p1`/`p2`; filter and integrator states are then advanced over
/// `h` with the deviations held constant.
pub fn ilc_step(
    state: &IlcState,
    delta_f_pu: f64,
    delta_vdc_pu: f64,
    delta_vds_pu: f64,
    spec: &IlcSpec,
    cspec: &ConcatenatorSpec,
    h: f64,
) -> IlcState {
    let dev = [delta_f_pu, delta_vdc_pu, delta_vds_pu];
    let y = state.concatenated(dev, cspec);
    let e1 = y[2] - y[1];
    let e2 = y[2] - y[0];
    let mut next = state.clone();
    next.p1 = (spec.k_tp1 * e1 + spec.k_ti1 * state.int1) * state.p_base;
    next.p2 = (spec.k_tp2 * e2 + spec.k_ti2 * state.int2) * state.p_base;
    next.int1 += e1 * h;
    next.int2 += e2 * h;
    // dz/dt = u - omega_0 z with u constant: exact update.
    let decay = (-cspec.omega_0 * h).exp();
    let gain = if cspec.omega_0 * h < 1e-8 {
        h * (1.0 - 0.5 * cspec.omega_0 * h)
    } else {
        (1.0 - decay) / cspec.omega_0
    };
    for i in 0..3 {
        next.z[i] = decay * state.z[i] + gain * dev[i];
    }
    next
}

/// Equivalent series impedances of the two power loops:
/// `Z_n = s/(k_tpn s + k_tin)`.
pub fn ilc_equivalent_impedances(spec: &IlcSpec) -> (RationalTF, RationalTF) {
    let z = |kp: f64, ki: f64| {
        RationalTF::new(Polynomial::s(), Polynomial::linear(kp, ki)).expect("positive gains")
    };
    (z(spec.k_tp1, spec.k_ti1), z(spec.k_tp2, spec.k_ti2))
}
