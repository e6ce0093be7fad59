//! AC, DC and storage (DS) subgrids as per-unit dynamic blocks: droop design,
//! open-loop transfer functions, the battery/supercapacitor power split and
//! the slow restoration PI loop.
//!
//! Per-unit bases: `x_max` for frequency or voltage, `p_max` for power.
//! Deviations follow `x* = 1 + dx* + delta*`, where `dx*` is the droop/inertia
//! deviation and `delta*` the restoration compensation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{Polynomial, RationalTF, Rk4Scratch, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgridKind {
    Ac,
    Dc,
    Ds,
}

impl SubgridKind {
    pub const ALL: [SubgridKind; 3] = [SubgridKind::Ac, SubgridKind::Dc, SubgridKind::Ds];

    pub fn name(self) -> &'static str {
        match self {
            SubgridKind::Ac => "ac",
            SubgridKind::Dc => "dc",
            SubgridKind::Ds => "ds",
        }
    }

    /// Position in AC, DC, DS ordered arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    /// SI unit of the regulated quantity.
    pub fn unit(self) -> &'static str {
        match self {
            SubgridKind::Ac => "Hz",
            SubgridKind::Dc | SubgridKind::Ds => "V",
        }
    }
}

impl std::fmt::Display for SubgridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SubgridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac" => Ok(SubgridKind::Ac),
            "dc" => Ok(SubgridKind::Dc),
            "ds" => Ok(SubgridKind::Ds),
            _ => Err(Error::invalid("subgrid", format!("unknown subgrid `{s}` (expected ac, dc or ds)"))),
        }
    }
}

/// Governor and turbine time constants shared by the AC and DC sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Governor {
    pub t_g: f64,
    pub f_hp: f64,
    pub t_ch: f64,
    pub t_rh: f64,
}

impl Default for Governor {
    fn default() -> Self {
        Governor {
            t_g: 0.1,
            f_hp: 0.3,
            t_ch: 0.2,
            t_rh: 7.0,
        }
    }
}

impl Governor {
    /// `T(s) Y(s) = (F_HP T_RH s + 1) / ((T_G s + 1)(T_CH s + 1)(T_RH s + 1))`
    pub fn tf(&self) -> RationalTF {
        let num = Polynomial::linear(self.f_hp * self.t_rh, 1.0);
        let den = &(&Polynomial::linear(self.t_g, 1.0) * &Polynomial::linear(self.t_ch, 1.0))
            * &Polynomial::linear(self.t_rh, 1.0);
        RationalTF::new(num, den).expect("nonzero denominator")
    }
}

/// Physical and control parameters of one subgrid.
///
/// AC and DC use `h`, `d`, `r` and the governor; DS uses `y_h` and `y_l`.
/// `r` and `y_l` left as `None` are filled by [`design_droop`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubgridSpec {
    pub kind: SubgridKind,
    pub x_max: f64,
    pub x_min: f64,
    pub x_nominal: f64,
    pub p_max: f64,
    pub h: f64,
    pub d: f64,
    pub r: Option<f64>,
    pub y_h: f64,
    pub y_l: Option<f64>,
    pub governor: Governor,
    pub k_p: f64,
    pub k_i: f64,
}

/// Restoration gains used by the reference configuration.
///
/// Within half a second the compensation can move by at most
/// `k_p + 0.5 k_i` times the deviation peak, here 1.75%, whatever the plant.
/// Restoration then settles with a time constant near `(1 + k_p)/k_i = 40 s`.
pub const DEFAULT_K_P: f64 = 0.005;
pub const DEFAULT_K_I: f64 = 0.025;

impl SubgridSpec {
    /// Reference parameter set of the laboratory hybrid microgrid (20 kW per subgrid).
    pub fn reference(kind: SubgridKind) -> Self {
        let (x_max, x_min, x_nominal, h) = match kind {
            SubgridKind::Ac => (51.0, 49.0, 50.0, 2.0),
            SubgridKind::Dc => (380.0, 370.0, 370.0, 3.0),
            SubgridKind::Ds => (710.0, 690.0, 700.0, 0.0),
        };
        let spec = SubgridSpec {
            kind,
            x_max,
            x_min,
            x_nominal,
            p_max: 20e3,
            h,
            d: if kind == SubgridKind::Ds { 0.0 } else { 1.0 },
            r: None,
            y_h: if kind == SubgridKind::Ds { 7.5 } else { 0.0 },
            y_l: None,
            governor: Governor::default(),
            k_p: DEFAULT_K_P,
            k_i: DEFAULT_K_I,
        };
        design_droop(&spec).expect("reference limits are valid")
    }

    pub fn range(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x_nominal_pu(&self) -> f64 {
        self.x_nominal / self.x_max
    }

    /// Lower per-unit band edge `x_min / x_max`.
    pub fn x_min_pu(&self) -> f64 {
        self.x_min / self.x_max
    }

    /// Droop coefficient; panics if it has not been designed or set.
    pub fn droop(&self) -> f64 {
        match self.kind {
            SubgridKind::Ds => self.y_l.expect("y_L designed"),
            _ => self.r.expect("R designed"),
        }
    }

    /// Inertia seen at the swing junction: `2H` for AC/DC, `2 y_H` for DS.
    pub fn two_h(&self) -> f64 {
        match self.kind {
            SubgridKind::Ds => 2.0 * self.y_h,
            _ => 2.0 * self.h,
        }
    }

    /// Inertia coefficient entering the capacity-weighted global inertia.
    pub fn inertia(&self) -> f64 {
        self.two_h() / 2.0
    }

    /// Steady `|dx*|` per unit of local output power: `R/(D R + 1)` or `1/y_L`.
    pub fn steady_gain(&self) -> f64 {
        match self.kind {
            SubgridKind::Ds => 1.0 / self.droop(),
            _ => {
                let r = self.droop();
                r / (self.d * r + 1.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.kind.name();
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{k}.{name}"), format!("must be positive, got {v}")))
            }
        };
        if self.x_max == self.x_min {
            return Err(Error::DegenerateLimits(self.x_max));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::invalid(format!("{k}.x_min"), "must be below x_max"));
        }
        // The reference DC bus is specified with nominal equal to its minimum.
        if !(self.x_min <= self.x_nominal && self.x_nominal <= self.x_max) {
            return Err(Error::invalid(
                format!("{k}.x_nominal"),
                format!("{} outside [{}, {}]", self.x_nominal, self.x_min, self.x_max),
            ));
        }
        pos("P_max", self.p_max)?;
        if self.k_p < 0.0 || self.k_i < 0.0 {
            return Err(Error::invalid(format!("{k}.k_p/k_i"), "restoration gains must be nonnegative"));
        }
        match self.kind {
            SubgridKind::Ds => {
                pos("y_H", self.y_h)?;
                if let Some(y) = self.y_l {
                    pos("y_L", y)?;
                }
            }
            _ => {
                pos("H", self.h)?;
                if self.d < 0.0 {
                    return Err(Error::invalid(format!("{k}.D"), "must be nonnegative"));
                }
                if let Some(r) = self.r {
                    pos("R", r)?;
                }
                let g = &self.governor;
                pos("T_G", g.t_g)?;
                pos("T_CH", g.t_ch)?;
                pos("T_RH", g.t_rh)?;
                if !(0.0..=1.0).contains(&g.f_hp) {
                    return Err(Error::invalid(format!("{k}.F_HP"), "must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// State-space form in physical coordinates, input local per-unit output
    /// power, output `dx*`.
    ///
    /// AC/DC states: `[dx*, governor, steam chest, reheater]`; DS: `[dV*]`.
    pub fn plant(&self) -> StateSpace {
        match self.kind {
            SubgridKind::Ds => {
                let m = self.two_h();
                StateSpace::new(vec![-self.droop() / m], vec![-1.0 / m], vec![1.0], 0.0)
                    .expect("consistent dimensions")
            }
            _ => {
                let m = self.two_h();
                let g = &self.governor;
                let r = self.droop();
                #[rustfmt::skip]
                let a = vec![
                    -self.d / m, 0.0, g.f_hp / m, (1.0 - g.f_hp) / m,
                    -1.0 / (r * g.t_g), -1.0 / g.t_g, 0.0, 0.0,
                    0.0, 1.0 / g.t_ch, -1.0 / g.t_ch, 0.0,
                    0.0, 0.0, 1.0 / g.t_rh, -1.0 / g.t_rh,
                ];
                StateSpace::new(a, vec![-1.0 / m, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0], 0.0)
                    .expect("consistent dimensions")
            }
        }
    }

    /// Plant state holding a constant local output `p_pu` in equilibrium.
    pub fn equilibrium(&self, p_pu: f64) -> Vec<f64> {
        let dx = -self.steady_gain() * p_pu;
        match self.kind {
            SubgridKind::Ds => vec![dx],
            _ => {
                let a = -dx / self.droop();
                vec![dx, a, a, a]
            }
        }
    }
}

/// Fills `R` (AC/DC) or `y_L` (DS) so that the steady droop gain spans the
/// band exactly: full output drives `x` from `x_max` to `x_min`.
///
/// AC/DC: `R = (x_max - x_min) / (x_max - D (x_max - x_min))`.
/// DS: `y_L = x_max / (x_max - x_min)`.
pub fn design_droop(spec: &SubgridSpec) -> Result<SubgridSpec> {
    let range = spec.range();
    if range == 0.0 {
        return Err(Error::DegenerateLimits(spec.x_max));
    }
    let mut out = spec.clone();
    match spec.kind {
        SubgridKind::Ds => out.y_l = Some(spec.x_max / range),
        _ => {
            let den = spec.x_max - spec.d * range;
            if den <= 0.0 {
                return Err(Error::NegativeDroop(den));
            }
            out.r = Some(range / den);
        }
    }
    Ok(out)
}

/// Relative mismatch between the steady droop gain and `(x_max - x_min)/x_max`.
pub fn droop_identity_residual(spec: &SubgridSpec) -> f64 {
    let want = spec.range() / spec.x_max;
    (spec.steady_gain() - want).abs() / want
}

/// `N_ac0(s) = dx*/P_o* = -R / ((2H s + D) R + T(s) Y(s))` on the local base.
pub fn build_ac_open_loop_tf(spec: &SubgridSpec) -> RationalTF {
    swing_open_loop(spec)
}

/// DC analog of [`build_ac_open_loop_tf`], with the same governor chain.
pub fn build_dc_open_loop_tf(spec: &SubgridSpec) -> RationalTF {
    swing_open_loop(spec)
}

fn swing_open_loop(spec: &SubgridSpec) -> RationalTF {
    // -R den_TY / ((2H s + D) R den_TY + num_TY)
    let ty = spec.governor.tf();
    let r = spec.droop();
    let swing = Polynomial::linear(spec.two_h() * r, spec.d * r);
    let den = &(&swing * ty.den()) + ty.num();
    RationalTF::new(ty.den().scale(-r), den).expect("nonzero denominator")
}

/// `N_ds0(s) = dV*/P_ods* = -1 / (2 y_H s + y_L)`.
pub fn build_ds_open_loop_tf(spec: &SubgridSpec) -> RationalTF {
    RationalTF::new(
        Polynomial::constant(-1.0),
        Polynomial::linear(spec.two_h(), spec.droop()),
    )
    .expect("nonzero denominator")
}

/// Open-loop transfer function for any subgrid kind.
pub fn build_open_loop_tf(spec: &SubgridSpec) -> RationalTF {
    match spec.kind {
        SubgridKind::Ac => build_ac_open_loop_tf(spec),
        SubgridKind::Dc => build_dc_open_loop_tf(spec),
        SubgridKind::Ds => build_ds_open_loop_tf(spec),
    }
}

/// Battery (low-frequency) and supercapacitor (high-frequency) shares of a DS
/// output step of `magnitude` p.u., as Laplace-domain responses.
///
/// With `a = y_L / (2 y_H)`: `P_L = a/(s + a) P_ods`, `P_H = s/(s + a) P_ods`,
/// so the two paths always sum to `P_ods`.
pub fn hess_split(magnitude: f64, spec: &SubgridSpec) -> (RationalTF, RationalTF) {
    let step = RationalTF::integrator().scale(magnitude);
    let (low, high) = hess_split_ratios(spec);
    (step.series(&low), step.series(&high))
}

/// The two split filters `P_L/P_ods` and `P_H/P_ods`.
pub fn hess_split_ratios(spec: &SubgridSpec) -> (RationalTF, RationalTF) {
    let a = spec.droop() / spec.two_h();
    (
        RationalTF::from_coeffs(&[a], &[a, 1.0]),
        RationalTF::from_coeffs(&[0.0, 1.0], &[a, 1.0]),
    )
}

/// Battery share of the DS output given the bus deviation: `P_L* = -y_L dV*`.
pub fn hess_low_power_pu(spec: &SubgridSpec, delta_v_pu: f64) -> f64 {
    -spec.droop() * delta_v_pu
}

/// Per-unit state of one subgrid that the simulator advances.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgridState {
    pub delta_x_pu: f64,
    pub delta_comp_pu: f64,
    /// Restoration error at the previous update.
    pub e_prev: f64,
    /// Plant states in the coordinates of [`SubgridSpec::plant`].
    pub block: Vec<f64>,
    pub p_out_pu_local: f64,
}

impl SubgridState {
    /// Equilibrium at local output `p_pu`, with the compensation chosen so
    /// that `x*` starts at nominal.
    pub fn steady(spec: &SubgridSpec, p_pu: f64) -> Self {
        let block = spec.equilibrium(p_pu);
        let dx = block[0];
        SubgridState {
            delta_x_pu: dx,
            delta_comp_pu: spec.x_nominal_pu() - 1.0 - dx,
            e_prev: 0.0,
            block,
            p_out_pu_local: p_pu,
        }
    }

    /// Reconstructed per-unit quantity `1 + dx* + delta*`.
    pub fn x_pu(&self) -> f64 {
        1.0 + self.delta_x_pu + self.delta_comp_pu
    }
}

/// One incremental PI update of the restoration loop:
/// `e = x_n* - x*`, `delta* += k_p (e - e_prev) + k_i e h`.
pub fn restoration_step(state: &SubgridState, x_nominal_pu: f64, h: f64, spec: &SubgridSpec) -> SubgridState {
    let mut next = state.clone();
    restoration_update(&mut next, x_nominal_pu, h, spec);
    next
}

/// In-place form of [`restoration_step`].
pub fn restoration_update(state: &mut SubgridState, x_nominal_pu: f64, h: f64, spec: &SubgridSpec) {
    let e = x_nominal_pu - state.x_pu();
    state.delta_comp_pu += spec.k_p * (e - state.e_prev) + spec.k_i * e * h;
    state.e_prev = e;
}

/// Loading condition `(x_max - x)/(x_max - x_min)`: 0 unloaded, 1 fully loaded.
pub fn compute_lc(x_si: f64, spec: &SubgridSpec) -> f64 {
    (spec.x_max - x_si) / spec.range()
}

/// Relative loading index `(x_max - x + delta)/(x_max - x_min)`, which removes
/// the restoration offset `delta` (SI) from the loading condition.
pub fn compute_rli(x_si: f64, delta_comp_si: f64, spec: &SubgridSpec) -> f64 {
    (spec.x_max - x_si + delta_comp_si) / spec.range()
}

/// A subgrid plant with its integration state, driven by local output power.
#[derive(Debug, Clone)]
pub struct Subgrid {
    pub spec: SubgridSpec,
    plant: StateSpace,
    pub state: SubgridState,
    scratch: Rk4Scratch,
}

impl Subgrid {
    pub fn new(spec: SubgridSpec, p_pu: f64) -> Self {
        let plant = spec.plant();
        let state = SubgridState::steady(&spec, p_pu);
        let scratch = Rk4Scratch::new(plant.order());
        Subgrid {
            spec,
            plant,
            state,
            scratch,
        }
    }

    /// Plant output `dx*` for the current state.
    pub fn delta_x(&self) -> f64 {
        self.plant.output(&self.state.block, 0.0)
    }

    /// Restoration update followed by an RK4 step of the plant with the local
    /// output held at `p_pu`. Restoration is skipped when `restore` is false,
    /// leaving the compensation at its initial value.
    pub fn advance(&mut self, p_pu: f64, h: f64, restore: bool) {
        self.state.p_out_pu_local = p_pu;
        self.state.delta_x_pu = self.delta_x();
        if restore {
            restoration_update(&mut self.state, self.spec.x_nominal_pu(), h, &self.spec);
        }
        crate::lti::step_rk4_in_place(&self.plant, &mut self.state.block, p_pu, h, &mut self.scratch);
        self.state.delta_x_pu = self.delta_x();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{fvt_limit, ivt_rate_limit};
    use num_complex::Complex64;

    fn ac() -> SubgridSpec {
        SubgridSpec::reference(SubgridKind::Ac)
    }
    fn dc() -> SubgridSpec {
        SubgridSpec::reference(SubgridKind::Dc)
    }
    fn ds() -> SubgridSpec {
        SubgridSpec::reference(SubgridKind::Ds)
    }

    #[test]
    fn droop_design_values() {
        assert!((ac().droop() - 2.0 / 49.0).abs() < 1e-15);
        assert!((dc().droop() - 10.0 / 370.0).abs() < 1e-15);
        assert!((ds().droop() - 35.5).abs() < 1e-12);
        for s in [ac(), dc(), ds()] {
            assert!(droop_identity_residual(&s) < 1e-12);
        }
    }

    #[test]
    fn droop_design_errors() {
        let mut s = ac();
        s.x_min = s.x_max;
        assert_eq!(design_droop(&s), Err(Error::DegenerateLimits(51.0)));
        let mut s = ac();
        s.d = 30.0; // 51 - 30*2 < 0
        assert!(matches!(design_droop(&s), Err(Error::NegativeDroop(_))));
    }

    #[test]
    fn governor_chain() {
        let ty = Governor::default().tf();
        let want = RationalTF::new(
            Polynomial::new(vec![1.0, 2.1]),
            &(&Polynomial::new(vec![1.0, 0.1]) * &Polynomial::new(vec![1.0, 0.2]))
                * &Polynomial::new(vec![1.0, 7.0]),
        )
        .unwrap();
        assert!(ty.approx_eq(&want, 1e-14));
    }

    #[test]
    fn open_loop_limits() {
        let n_ac = build_ac_open_loop_tf(&ac());
        assert!((ivt_rate_limit(&n_ac).unwrap() + 0.25).abs() < 1e-12);
        let g = fvt_limit(&n_ac.series(&RationalTF::integrator())).unwrap();
        assert!((g + 2.0 / 51.0).abs() < 1e-10);

        let n_dc = build_dc_open_loop_tf(&dc());
        assert!((ivt_rate_limit(&n_dc).unwrap() + 1.0 / 6.0).abs() < 1e-12);
        let g = fvt_limit(&n_dc.series(&RationalTF::integrator())).unwrap();
        assert!((g + 10.0 / 380.0).abs() < 1e-10);

        let n_ds = build_ds_open_loop_tf(&ds());
        assert!((ivt_rate_limit(&n_ds).unwrap() + 1.0 / 15.0).abs() < 1e-12);
        let g = fvt_limit(&n_ds.series(&RationalTF::integrator())).unwrap();
        assert!((g + 1.0 / 35.5).abs() < 1e-12);
    }

    #[test]
    fn damping_change_compensated_by_redesign() {
        let mut s = dc();
        s.d = 2.0;
        let s = design_droop(&s).unwrap();
        let g = fvt_limit(&build_dc_open_loop_tf(&s).series(&RationalTF::integrator())).unwrap();
        assert!((g + 10.0 / 380.0).abs() < 1e-10);
    }

    #[test]
    fn large_inertia_flattens_initial_rate() {
        let mut s = ac();
        s.h = 1e9;
        assert!(ivt_rate_limit(&build_ac_open_loop_tf(&s)).unwrap().abs() < 1e-9);
        let mut s = ds();
        s.y_h = 1e9;
        assert!(ivt_rate_limit(&build_ds_open_loop_tf(&s)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn physical_plant_matches_transfer_function() {
        for s in [ac(), dc(), ds()] {
            let tf = build_open_loop_tf(&s);
            let ss = s.plant();
            for w in [1e-3, 0.3, 2.0, 50.0] {
                let z = Complex64::new(0.1, w);
                let a = tf.eval(z).unwrap();
                let b = ss.eval(z).unwrap();
                assert!((a - b).norm() < 1e-10 * a.norm(), "{} at {w}", s.kind);
            }
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        for s in [ac(), dc(), ds()] {
            let ss = s.plant();
            let x = s.equilibrium(0.6);
            let mut dx = vec![0.0; x.len()];
            ss.derivative(&x, 0.6, &mut dx);
            assert!(dx.iter().all(|v| v.abs() < 1e-14), "{:?}", dx);
        }
    }

    #[test]
    fn hess_split_limits() {
        let (pl, ph) = hess_split(0.5, &ds());
        assert!(fvt_limit(&ph).unwrap().abs() < 1e-12);
        assert!((fvt_limit(&pl).unwrap() - 0.5).abs() < 1e-12);
        // initial value of the step response = lim s F(s)
        assert!((ivt_rate_limit(&ph).unwrap() - 0.5).abs() < 1e-12);
        let (lo, hi) = hess_split_ratios(&ds());
        let sum = lo.add(&hi);
        assert!(sum.num().approx_eq(sum.den(), 1e-10));
    }

    #[test]
    fn restoration_arithmetic() {
        let spec = SubgridSpec {
            k_p: 0.0,
            k_i: 0.2,
            ..ac()
        };
        let mut st = SubgridState::steady(&spec, 0.0);
        let before = st.delta_comp_pu;
        let next = restoration_step(&st, st.x_pu(), 0.1, &spec);
        assert_eq!(next.delta_comp_pu, before);
        // force a constant error of 0.01
        st.e_prev = 0.01;
        let xn = st.x_pu() + 0.01;
        let next = restoration_step(&st, xn, 0.1, &spec);
        assert!((next.delta_comp_pu - before - 2e-4).abs() < 1e-15);
    }

    #[test]
    fn loading_indices() {
        let s = ac();
        assert_eq!(compute_lc(51.0, &s), 0.0);
        assert_eq!(compute_lc(49.0, &s), 1.0);
        assert_eq!(compute_lc(375.0, &dc()), 0.5);
        assert!((compute_rli(50.0, -0.8, &s) - 0.1).abs() < 1e-12);
        assert_eq!(compute_rli(50.3, 0.0, &s), compute_lc(50.3, &s));
        assert_eq!(compute_rli(51.0, 0.0, &s), 0.0);
    }

    #[test]
    fn steady_state_starts_at_nominal() {
        for s in [ac(), dc(), ds()] {
            let st = SubgridState::steady(&s, 0.4);
            assert!((st.x_pu() - s.x_nominal_pu()).abs() < 1e-15);
        }
    }
}
