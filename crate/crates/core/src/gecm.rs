//! Global equivalent circuit: each subgrid as a Thevenin branch on the global
//! power base, coupled through the two converter loops, solved by nodal
//! analysis over rational functions.
//!
//! Node "voltages" are `V_x = -dx*_x`; injections are the subgrid loads in
//! per unit of `P_Gmax`. With `Y_x = 1/Z_x`, `Y_n = 1/Z_ILCn` and concatenators
//! `T_x`, the balance at each node (rows AC, DS, DC) reads
//!
//! ```text
//! [ Y_ac + T_ac Y2   -T_ds Y2                  0              ] [V_ac]   [P_Lac]
//! [ -T_ac Y2         Y_ds + T_ds (Y1 + Y2)     -T_dc Y1       ] [V_ds] = [P_Lds]
//! [ 0                -T_ds Y1                  Y_dc + T_dc Y1 ] [V_dc]   [P_Ldc]
//! ```
//!
//! Every column sums to its branch admittance, i.e. the converter is lossless.

use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::config::HybridConfig;
use crate::error::{Error, Result};
use crate::ilc::{concatenator_tf, ilc_equivalent_impedances, ConcatenatorSpec, IlcSpec};
use crate::lti::{Polynomial, RationalTF};
use crate::report::fmt_sig;
use crate::sim::Toggles;
use crate::subgrid::{build_open_loop_tf, SubgridKind, SubgridSpec};

/// Residual bound for back-substituting a nodal solution.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Branch impedances, concatenators, converter loops and load injections.
/// Arrays are ordered AC, DC, DS.
#[derive(Debug, Clone)]
pub struct GecmSystem {
    /// `Z_x = -dx*/P_ox_G`.
    pub z: [RationalTF; 3],
    pub t: [RationalTF; 3],
    /// Converter power loops; `None` leaves the subgrids uncoupled.
    pub ilc: Option<IlcSpec>,
    /// Load steps in per unit of `P_Gmax`.
    pub loads: [f64; 3],
    pub p_gmax: f64,
    omega_0: f64,
}

/// `Z_x = -N_x0 P_Gmax/P_xmax` for each subgrid.
pub fn build_branch_impedances(specs: [&SubgridSpec; 3]) -> [RationalTF; 3] {
    let pg: f64 = specs.iter().map(|s| s.p_max).sum();
    specs.map(|s| build_open_loop_tf(s).scale(-pg / s.p_max))
}

impl GecmSystem {
    /// Model of `cfg` with load steps `loads_w` (watts, AC/DC/DS).
    pub fn new(cfg: &HybridConfig, loads_w: [f64; 3], toggles: Toggles) -> Result<Self> {
        let conc = if toggles.concatenator {
            cfg.concatenators()?
        } else {
            ConcatenatorSpec::unity(cfg.omega_0)
        };
        let pg = cfg.p_gmax();
        Ok(GecmSystem {
            z: build_branch_impedances(cfg.specs()),
            t: SubgridKind::ALL.map(|k| concatenator_tf(&conc, k)),
            ilc: toggles.ilc.then_some(cfg.ilc),
            loads: loads_w.map(|p| p / pg),
            p_gmax: pg,
            omega_0: cfg.omega_0,
        })
    }

    pub fn total_load(&self) -> f64 {
        self.loads.iter().sum()
    }

    /// `Z_ILC1`, `Z_ILC2`, if the converter is active.
    pub fn z_ilc(&self) -> Option<(RationalTF, RationalTF)> {
        self.ilc.as_ref().map(ilc_equivalent_impedances)
    }

    /// Same network with other load injections (per unit of `P_Gmax`).
    pub fn with_loads(&self, loads: [f64; 3]) -> Self {
        GecmSystem {
            loads,
            ..self.clone()
        }
    }
}

/// Node admittance matrix, rows and columns ordered AC, DS, DC.
pub fn assemble_admittance(sys: &GecmSystem) -> [[RationalTF; 3]; 3] {
    let y = sys.z.clone().map(|z| z.recip().expect("nonzero branch impedance"));
    let [y_ac, y_dc, y_ds] = y;
    let [t_ac, t_dc, t_ds] = sys.t.clone();
    let zero = RationalTF::zero();
    match sys.z_ilc() {
        None => [
            [y_ac, zero.clone(), zero.clone()],
            [zero.clone(), y_ds, zero.clone()],
            [zero.clone(), zero, y_dc],
        ],
        Some((z1, z2)) => {
            let y1 = z1.recip().expect("nonzero");
            let y2 = z2.recip().expect("nonzero");
            [
                [y_ac.add(&t_ac.series(&y2)), t_ds.series(&y2).neg(), zero.clone()],
                [
                    t_ac.series(&y2).neg(),
                    y_ds.add(&t_ds.series(&y1.add(&y2))),
                    t_dc.series(&y1).neg(),
                ],
                [zero, t_ds.series(&y1).neg(), y_dc.add(&t_dc.series(&y1))],
            ]
        }
    }
}

/// Deviation responses `dx*_x`, each multiplying a unit step: the step
/// response is `delta[i](s)/s`. Ordered AC, DC, DS.
#[derive(Debug, Clone)]
pub struct NodalSolution {
    pub delta: [RationalTF; 3],
    /// Load injections the solution was computed for (per unit of `P_Gmax`).
    pub loads: [f64; 3],
    /// Largest relative back-substitution residual over the test points.
    pub residual: f64,
}

impl NodalSolution {
    pub fn delta_f_pu(&self) -> &RationalTF {
        &self.delta[0]
    }
    pub fn delta_vdc_pu(&self) -> &RationalTF {
        &self.delta[1]
    }
    pub fn delta_vds_pu(&self) -> &RationalTF {
        &self.delta[2]
    }

    /// Responses per unit of total global load, `N_x1(s)`.
    pub fn per_unit_load(&self) -> Result<[RationalTF; 3]> {
        let total: f64 = self.loads.iter().sum();
        if total == 0.0 {
            return Err(Error::invalid("loads", "total load is zero"));
        }
        Ok(self.delta.clone().map(|d| d.scale(1.0 / total)))
    }
}

fn det3(m: &[[Polynomial; 3]; 3]) -> Polynomial {
    let minor = |a: &Polynomial, b: &Polynomial, c: &Polynomial, d: &Polynomial| &(a * d) - &(b * c);
    let c0 = &m[0][0] * &minor(&m[1][1], &m[1][2], &m[2][1], &m[2][2]);
    let c1 = &m[0][1] * &minor(&m[1][0], &m[1][2], &m[2][0], &m[2][2]);
    let c2 = &m[0][2] * &minor(&m[1][0], &m[1][1], &m[2][0], &m[2][1]);
    &(&c0 - &c1) + &c2
}

/// Fixed complex test points for residual checks: along the imaginary axis
/// from 0.01 to 100 rad/s and a few off-axis points.
pub fn test_points() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.01),
        Complex64::new(0.0, 0.1),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 10.0),
        Complex64::new(0.0, 100.0),
        Complex64::new(-0.05, 0.3),
        Complex64::new(0.2, 0.5),
        Complex64::new(1.0, 2.0),
        Complex64::new(-3.0, 30.0),
        Complex64::new(5.0, -7.0),
    ]
}

/// Largest relative residual `|G V - I| / (sum |G_ij V_j| + |I_i|)`.
pub fn residual(sys: &GecmSystem, sol: &NodalSolution) -> Result<f64> {
    let g = assemble_admittance(sys);
    // matrix order AC, DS, DC; solution and loads order AC, DC, DS
    let perm = [0usize, 2, 1];
    let mut worst: f64 = 0.0;
    for s in test_points() {
        let v: Vec<Complex64> = perm
            .iter()
            .map(|&i| sol.delta[i].eval(s).map(|d| -d))
            .collect::<Result<_>>()?;
        for (row, &li) in perm.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut scale = sys.loads[li].abs();
            for col in 0..3 {
                if g[row][col].is_zero() {
                    continue;
                }
                let term = g[row][col].eval(s)? * v[col];
                scale += term.norm();
                acc += term;
            }
            let r = (acc - sys.loads[li]).norm();
            if scale > 0.0 {
                worst = worst.max(r / scale);
            }
        }
    }
    Ok(worst)
}

/// Cramer's rule on the polynomial form of the nodal system, gated by a
/// back-substitution residual check.
pub fn solve_nodal(sys: &GecmSystem) -> Result<NodalSolution> {
    let delta = match &sys.ilc {
        None => {
            let d = [0, 1, 2].map(|i| sys.z[i].scale(-sys.loads[i]));
            return finish(sys, d);
        }
        Some(ilc) => coupled_solution(sys, ilc)?,
    };
    finish(sys, delta)
}

fn finish(sys: &GecmSystem, delta: [RationalTF; 3]) -> Result<NodalSolution> {
    let mut sol = NodalSolution {
        delta,
        loads: sys.loads,
        residual: 0.0,
    };
    sol.residual = residual(sys, &sol)?;
    if !(sol.residual < RESIDUAL_TOL) {
        return Err(Error::SingularSystem);
    }
    Ok(sol)
}

fn coupled_solution(sys: &GecmSystem, ilc: &IlcSpec) -> Result<[RationalTF; 3]> {
    // Y_x = n_x/d_x, T_x = q_x/p, Y_n = m_n/s; each row is multiplied by d_x p s.
    let n = sys.z.clone().map(|z| z.den().clone());
    let d = sys.z.clone().map(|z| z.num().clone());
    let q = sys.t.clone().map(|t| t.num().clone());
    let p = Polynomial::linear(1.0, sys.omega_0);
    let s = Polynomial::s();
    let m1 = Polynomial::linear(ilc.k_tp1, ilc.k_ti1);
    let m2 = Polynomial::linear(ilc.k_tp2, ilc.k_ti2);
    let (ac, dc, ds) = (0, 1, 2);
    let ps = &p * &s;
    let zero = Polynomial::zero();

    let m = [
        [
            &(&n[ac] * &ps) + &(&(&q[ac] * &m2) * &d[ac]),
            -&(&(&q[ds] * &m2) * &d[ac]),
            zero.clone(),
        ],
        [
            -&(&(&q[ac] * &m2) * &d[ds]),
            &(&n[ds] * &ps) + &(&(&q[ds] * &(&m1 + &m2)) * &d[ds]),
            -&(&(&q[dc] * &m1) * &d[ds]),
        ],
        [
            zero,
            -&(&(&q[ds] * &m1) * &d[dc]),
            &(&n[dc] * &ps) + &(&(&q[dc] * &m1) * &d[dc]),
        ],
    ];
    let rhs = [
        (&d[ac] * &ps).scale(sys.loads[ac]),
        (&d[ds] * &ps).scale(sys.loads[ds]),
        (&d[dc] * &ps).scale(sys.loads[dc]),
    ];

    // The concatenator DC gains make (1/w_ac, 1/w_ds, 1/w_dc) a null vector
    // at s = 0, so det has a root at the origin; every right-hand side
    // carries a factor s as well. Both are divided out.
    let det = det3(&m).deflate_origin();
    if det.is_zero() {
        return Err(Error::SingularSystem);
    }
    let cramer = |col: usize| {
        let mut mm = m.clone();
        for row in 0..3 {
            mm[row][col] = rhs[row].clone();
        }
        det3(&mm).deflate_origin()
    };
    // columns: 0 = V_ac, 1 = V_ds, 2 = V_dc
    let v_ac = cramer(0);
    let v_ds = cramer(1);
    let v_dc = cramer(2);
    let tf = |num: Polynomial| RationalTF::new(num.scale(-1.0), det.clone());
    Ok([tf(v_ac)?, tf(v_dc)?, tf(v_ds)?])
}

/// Limit of infinitely fast converter loops: the concatenated deviations are
/// forced equal, `T_x V_x = W`, and the branch currents add up to the total
/// load, so `dx*_x = -P_LG / (T_x sum_y Y_y/T_y)`.
pub fn solve_ideal_coupling(sys: &GecmSystem) -> Result<[RationalTF; 3]> {
    let mut sum = RationalTF::zero();
    for i in 0..3 {
        let y = sys.z[i].recip()?;
        sum = sum.add(&y.series(&sys.t[i].recip()?));
    }
    let total = sys.total_load();
    let w = sum.recip()?.scale(-total);
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        out.push(w.series(&sys.t[i].recip()?));
    }
    Ok(out.try_into().expect("three entries"))
}

/// Capacity-weighted inertia `H_G = sum H_x P_xmax / P_Gmax` (DS contributes `y_H`).
pub fn global_inertia(specs: &[&SubgridSpec]) -> f64 {
    let pg: f64 = specs.iter().map(|s| s.p_max).sum();
    specs.iter().map(|s| s.inertia() * s.p_max / pg).sum()
}

/// Initial rates of change after a total load step (watts), in SI units per
/// second for each subgrid (Hz/s or V/s), as positive magnitudes.
pub fn predict_rates(specs: &[&SubgridSpec], total_load_step: f64) -> Vec<f64> {
    let pg: f64 = specs.iter().map(|s| s.p_max).sum();
    let rate_pu = (total_load_step / pg) / (2.0 * global_inertia(specs));
    specs.iter().map(|s| rate_pu * s.x_max).collect()
}

/// Steady outputs in watts when the total load is shared by capacity.
pub fn predict_steady_shares(specs: &[&SubgridSpec], total_load: f64) -> Vec<f64> {
    let pg: f64 = specs.iter().map(|s| s.p_max).sum();
    specs.iter().map(|s| s.p_max * total_load / pg).collect()
}

/// Steady per-unit output ratio when only the transient coupling acts
/// (unity concatenators): `1/(1 - x_min/x_max)` per subgrid.
pub fn objective1_only_ratio(specs: &[&SubgridSpec]) -> Vec<f64> {
    specs.iter().map(|s| 1.0 / (1.0 - s.x_min_pu())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodePoint {
    pub omega: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// `n` log-spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Default Bode grid: 300 points over `[1e-4, 1e4]` rad/s.
pub fn default_bode_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 300)
}

/// `20 log10 |f(jw)|` and `arg f(jw)` in degrees at each grid point.
pub fn bode_export(f: &RationalTF, omega_grid: &[f64]) -> Result<Vec<BodePoint>> {
    if omega_grid.iter().any(|w| !(*w > 0.0)) || omega_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("omega_grid", "must be positive and ascending"));
    }
    omega_grid
        .iter()
        .map(|&w| {
            let v = f.freq_response(w)?;
            Ok(BodePoint {
                omega: w,
                mag_db: 20.0 * v.norm().log10(),
                phase_deg: v.arg().to_degrees(),
            })
        })
        .collect()
}

pub fn write_bode_csv(mut out: impl Write, points: &[BodePoint]) -> std::io::Result<()> {
    writeln!(out, "omega_rad_s,mag_db,phase_deg")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_sig(p.omega), fmt_sig(p.mag_db), fmt_sig(p.phase_deg))?;
    }
    Ok(())
}

/// Transfer functions that can be exported as Bode data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodeTarget {
    Nac0,
    Nac1,
    Ndc0,
    Ndc1,
    Nds0,
    Nds1,
    Tac,
    Tdc,
    Tds,
    FClosed,
}

impl BodeTarget {
    pub const ALL: [(&'static str, BodeTarget); 10] = [
        ("N_ac0", BodeTarget::Nac0),
        ("N_ac1", BodeTarget::Nac1),
        ("N_dc0", BodeTarget::Ndc0),
        ("N_dc1", BodeTarget::Ndc1),
        ("N_ds0", BodeTarget::Nds0),
        ("N_ds1", BodeTarget::Nds1),
        ("T_ac", BodeTarget::Tac),
        ("T_dc", BodeTarget::Tdc),
        ("T_ds", BodeTarget::Tds),
        ("f_closed", BodeTarget::FClosed),
    ];

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|(n, _)| *n).collect()
    }
}

impl FromStr for BodeTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::invalid(
                    "target",
                    format!("unknown target `{s}`; valid targets: {}", Self::names().join(", ")),
                )
            })
    }
}

/// `f_max s x*(s)` for the AC subgrid: the frequency seen from a start at
/// `f_max` with no load, including restoration `F = k_p + k_i/s` when enabled.
///
/// With restoration, `s x* = (1 + F x_n*)/(1 + F) + s dx*/(1 + F)`, whose
/// low-frequency value is `x_n*`.
pub fn closed_loop_frequency(cfg: &HybridConfig, sol: &NodalSolution, restoration: bool) -> RationalTF {
    let spec = &cfg.ac;
    let dx = &sol.delta[0];
    let s_x = if restoration {
        // 1/(1+F) = s/((1+k_p)s + k_i)
        let den = Polynomial::linear(1.0 + spec.k_p, spec.k_i);
        let xn = spec.x_nominal_pu();
        let source = RationalTF::new(Polynomial::linear(1.0 + xn * spec.k_p, xn * spec.k_i), den.clone())
            .expect("nonzero");
        let sens = RationalTF::new(Polynomial::s(), den).expect("nonzero");
        source.add(&dx.series(&sens))
    } else {
        RationalTF::one().add(dx)
    };
    s_x.scale(spec.x_max)
}

/// Transfer function for a Bode target; `loads_w` are the load steps used
/// for the coupled responses.
pub fn bode_transfer(cfg: &HybridConfig, target: BodeTarget, loads_w: [f64; 3], toggles: Toggles) -> Result<RationalTF> {
    let conc = || -> Result<ConcatenatorSpec> {
        if toggles.concatenator {
            cfg.concatenators()
        } else {
            Ok(ConcatenatorSpec::unity(cfg.omega_0))
        }
    };
    let coupled = |i: usize| -> Result<RationalTF> {
        let sol = solve_nodal(&GecmSystem::new(cfg, loads_w, toggles)?)?;
        Ok(sol.per_unit_load()?[i].clone())
    };
    Ok(match target {
        BodeTarget::Nac0 => build_open_loop_tf(&cfg.ac),
        BodeTarget::Ndc0 => build_open_loop_tf(&cfg.dc),
        BodeTarget::Nds0 => build_open_loop_tf(&cfg.ds),
        BodeTarget::Nac1 => coupled(0)?,
        BodeTarget::Ndc1 => coupled(1)?,
        BodeTarget::Nds1 => coupled(2)?,
        BodeTarget::Tac => concatenator_tf(&conc()?, SubgridKind::Ac),
        BodeTarget::Tdc => concatenator_tf(&conc()?, SubgridKind::Dc),
        BodeTarget::Tds => concatenator_tf(&conc()?, SubgridKind::Ds),
        BodeTarget::FClosed => {
            let sol = solve_nodal(&GecmSystem::new(cfg, loads_w, toggles)?)?;
            closed_loop_frequency(cfg, &sol, toggles.restoration)
        }
    })
}

/// Analytic predictions for a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub h_g: f64,
    /// Initial rate magnitudes after `rate_load_w`: Hz/s, V/s, V/s.
    pub rates: [f64; 3],
    pub rate_load_w: f64,
    /// Steady outputs for `share_load_w`, watts.
    pub shares: [f64; 3],
    pub share_load_w: f64,
    pub objective1_ratio: [f64; 3],
}

impl Predictions {
    pub fn new(cfg: &HybridConfig, rate_load_w: f64, share_load_w: f64) -> Self {
        let specs = cfg.specs();
        let v = |x: Vec<f64>| -> [f64; 3] { x.try_into().expect("three subgrids") };
        Predictions {
            h_g: global_inertia(&specs),
            rates: v(predict_rates(&specs, rate_load_w)),
            rate_load_w,
            shares: v(predict_steady_shares(&specs, share_load_w)),
            share_load_w,
            objective1_ratio: v(objective1_only_ratio(&specs)),
        }
    }

    /// `(name, value, unit)` rows.
    pub fn rows(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("H_G", self.h_g, "s"),
            ("rate_load", self.rate_load_w, "W"),
            ("rocof", self.rates[0], "Hz/s"),
            ("rocov_dc", self.rates[1], "V/s"),
            ("rocov_ds", self.rates[2], "V/s"),
            ("share_load", self.share_load_w, "W"),
            ("p_oac", self.shares[0], "W"),
            ("p_odc", self.shares[1], "W"),
            ("p_ods", self.shares[2], "W"),
            ("objective1_ratio_ac", self.objective1_ratio[0], "1"),
            ("objective1_ratio_dc", self.objective1_ratio[1], "1"),
            ("objective1_ratio_ds", self.objective1_ratio[2], "1"),
        ]
    }
}

pub fn write_predictions_csv(mut out: impl Write, p: &Predictions) -> std::io::Result<()> {
    writeln!(out, "name,value,unit")?;
    for (n, v, u) in p.rows() {
        writeln!(out, "{n},{},{u}", fmt_sig(v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{fvt_limit, ivt_rate_limit};

    fn reference() -> HybridConfig {
        HybridConfig::reference()
    }

    fn on() -> Toggles {
        Toggles::default()
    }

    #[test]
    fn branch_scaling() {
        let cfg = reference();
        let z = build_branch_impedances(cfg.specs());
        // Z_ds = 1/((1/3)(2 y_H s + y_L)): initial slope of -N scaled by 3
        assert!((ivt_rate_limit(&z[2]).unwrap() - 0.2).abs() < 1e-12);
        let single = build_branch_impedances([&cfg.ac, &cfg.dc.clone(), &cfg.ds]);
        assert!(single[0].approx_eq(&build_open_loop_tf(&cfg.ac).scale(-3.0), 1e-14));
    }

    #[test]
    fn single_dominant_subgrid_reduces_to_own_branch() {
        let cfg = reference().with_capacities([20e3, 1e-6, 1e-6]);
        let z = build_branch_impedances(cfg.specs());
        let scale = cfg.p_gmax() / 20e3;
        assert!(z[0].approx_eq(&build_open_loop_tf(&cfg.ac).scale(-scale), 1e-14));
        assert!((scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inertia_and_rates() {
        let cfg = reference();
        assert!((global_inertia(&cfg.specs()) - 12.5 / 3.0).abs() < 1e-12);
        assert!((global_inertia(&cfg.with_y_h(15.0).specs()) - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(global_inertia(&[&cfg.ac]), 2.0);
        let r = predict_rates(&cfg.specs(), 36e3);
        for (a, b) in r.iter().zip([3.672, 27.36, 51.12]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(predict_rates(&cfg.specs(), 0.0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shares_and_ratio() {
        let cfg = reference();
        assert_eq!(predict_steady_shares(&cfg.specs(), 36e3), vec![12e3; 3]);
        let c = cfg.with_capacities([40e3, 10e3, 10e3]);
        assert_eq!(predict_steady_shares(&c.specs(), 30e3), vec![20e3, 5e3, 5e3]);
        let r = objective1_only_ratio(&cfg.specs());
        for (a, b) in r.iter().zip([25.5, 38.0, 35.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_nodal_solution() {
        let cfg = reference();
        let sys = GecmSystem::new(&cfg, [12e3, 14e3, 10e3], Toggles { ilc: false, ..on() }).unwrap();
        let g = assemble_admittance(&sys);
        assert!(g[0][1].is_zero() && g[1][2].is_zero() && g[2][1].is_zero());
        let sol = solve_nodal(&sys).unwrap();
        let rate = ivt_rate_limit(&sol.delta[0]).unwrap() / sys.loads[0];
        assert!((rate + 3.0 / 4.0).abs() < 1e-12); // -1/(2 H_ac) per local p.u., global base x3
    }

    #[test]
    fn coupled_nodal_solution_residual_and_steady_shares() {
        let cfg = reference();
        let sys = GecmSystem::new(&cfg, [12e3, 14e3, 10e3], on()).unwrap();
        let sol = solve_nodal(&sys).unwrap();
        assert!(sol.residual < 1e-6, "{}", sol.residual);
        // steady per-unit loadings equal: dx*_x = -g_x * P_ox/P_xmax with P_ox = 12 kW
        for (i, s) in cfg.specs().iter().enumerate() {
            let v = fvt_limit(&sol.delta[i].series(&RationalTF::integrator())).unwrap();
            let want = -s.steady_gain() * 0.6;
            assert!(((v - want) / want).abs() < 1e-6, "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn zero_loads_give_zero_response() {
        let sys = GecmSystem::new(&reference(), [0.0; 3], on()).unwrap();
        let sol = solve_nodal(&sys).unwrap();
        assert!(sol.delta.iter().all(|d| d.is_zero()));
    }

    #[test]
    fn symmetric_system_symmetric_response() {
        let mut cfg = reference();
        cfg.dc = cfg.ac.clone();
        cfg.dc.kind = SubgridKind::Dc;
        let sys = GecmSystem::new(&cfg, [10e3, 10e3, 0.0], on()).unwrap();
        let sol = solve_nodal(&sys).unwrap();
        for w in [0.01, 1.0, 30.0] {
            let a = sol.delta[0].freq_response(w).unwrap();
            let b = sol.delta[1].freq_response(w).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm());
        }
    }

    #[test]
    fn ideal_coupling_global_rate() {
        let cfg = reference();
        let sys = GecmSystem::new(&cfg, [12e3, 14e3, 10e3], on()).unwrap();
        let ideal = solve_ideal_coupling(&sys).unwrap();
        for d in &ideal {
            let r = ivt_rate_limit(&d.scale(1.0 / sys.total_load())).unwrap();
            assert!((r + 1.0 / (2.0 * 12.5 / 3.0)).abs() < 1e-9, "{r}");
        }
    }

    #[test]
    fn bode_constant_and_lead_lag() {
        let pts = bode_export(&RationalTF::constant(25.5), &[1.0, 10.0]).unwrap();
        assert!((pts[0].mag_db - 28.1308).abs() < 1e-3);
        let t = bode_transfer(&reference(), BodeTarget::Tac, [0.0; 3], on()).unwrap();
        let pts = bode_export(&t, &[1e-6, 1e4]).unwrap();
        assert!((pts[0].mag_db - 20.0 * 25.5f64.log10()).abs() < 1e-3);
        assert!(pts[1].mag_db.abs() < 1e-3);
        assert!(bode_export(&t, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn coupled_response_lowers_high_frequency_gain() {
        let cfg = reference();
        let loads = [12e3, 14e3, 10e3];
        let n0 = bode_transfer(&cfg, BodeTarget::Nac0, loads, on()).unwrap();
        let n1 = bode_transfer(&cfg, BodeTarget::Nac1, loads, on()).unwrap();
        assert!(n1.freq_response(100.0).unwrap().norm() < n0.freq_response(100.0).unwrap().norm());
    }

    #[test]
    fn closed_loop_frequency_low_band() {
        let cfg = reference();
        let t = bode_transfer(&cfg, BodeTarget::FClosed, [12e3, 14e3, 10e3], on()).unwrap();
        let lo = t.freq_response(1e-7).unwrap().norm();
        assert!((lo - 50.0).abs() < 1e-3, "{lo}");
        let off = Toggles { restoration: false, ..on() };
        let t = bode_transfer(&cfg, BodeTarget::FClosed, [12e3, 14e3, 10e3], off).unwrap();
        let lo = t.freq_response(1e-7).unwrap().norm();
        assert!((lo - 51.0 * (1.0 - 0.6 * 2.0 / 51.0)).abs() < 1e-3, "{lo}");
    }

    #[test]
    fn unknown_target_lists_valid_ones() {
        let e = "N_xx".parse::<BodeTarget>().unwrap_err().to_string();
        assert!(e.contains("N_ac0") && e.contains("f_closed"));
    }
}
