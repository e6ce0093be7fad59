//! System parameters and the TOML experiment file.
//!
//! A file has sections `[ac]`, `[dc]`, `[ds]`, `[ilc]`, `[sim]`, an optional
//! `[toggles]` table and any number of `[[events]]`. Numbers are SI. Missing
//! or unknown keys are reported by their dotted name, e.g. `ds.y_H`.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilc::{design_omegas, min_cutoff, ConcatenatorSpec, IlcSpec};
use crate::sim::{Event, Scenario, Toggles};
use crate::subgrid::{design_droop, droop_identity_residual, Governor, SubgridKind, SubgridSpec};

/// The three subgrids plus the interlinking converter.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub ac: SubgridSpec,
    pub dc: SubgridSpec,
    pub ds: SubgridSpec,
    pub ilc: IlcSpec,
    /// Common concatenator cutoff in rad/s.
    pub omega_0: f64,
}

impl HybridConfig {
    /// Reference laboratory system: 20 kW per subgrid, `omega_0 = 1e-3 pi`.
    pub fn reference() -> Self {
        HybridConfig {
            ac: SubgridSpec::reference(SubgridKind::Ac),
            dc: SubgridSpec::reference(SubgridKind::Dc),
            ds: SubgridSpec::reference(SubgridKind::Ds),
            ilc: IlcSpec::default(),
            omega_0: 1e-3 * std::f64::consts::PI,
        }
    }

    pub fn spec(&self, kind: SubgridKind) -> &SubgridSpec {
        match kind {
            SubgridKind::Ac => &self.ac,
            SubgridKind::Dc => &self.dc,
            SubgridKind::Ds => &self.ds,
        }
    }

    pub fn spec_mut(&mut self, kind: SubgridKind) -> &mut SubgridSpec {
        match kind {
            SubgridKind::Ac => &mut self.ac,
            SubgridKind::Dc => &mut self.dc,
            SubgridKind::Ds => &mut self.ds,
        }
    }

    pub fn specs(&self) -> [&SubgridSpec; 3] {
        [&self.ac, &self.dc, &self.ds]
    }

    /// Global power base: sum of the three capacities, in watts.
    pub fn p_gmax(&self) -> f64 {
        self.ac.p_max + self.dc.p_max + self.ds.p_max
    }

    pub fn concatenators(&self) -> Result<ConcatenatorSpec> {
        design_omegas(self.omega_0, &self.ac, &self.dc, &self.ds)
    }

    /// Lower bound on `omega_0` for the controller's sampling period.
    pub fn omega_0_bound(&self) -> f64 {
        min_cutoff(self.ilc.sampling_period, self.ilc.safety_factor_m)
    }

    /// Same system with `y_H` of the storage subgrid replaced.
    pub fn with_y_h(&self, y_h: f64) -> Self {
        let mut c = self.clone();
        c.ds.y_h = y_h;
        c
    }

    /// Same system with new capacities (watts, ordered AC, DC, DS).
    pub fn with_capacities(&self, caps: [f64; 3]) -> Self {
        let mut c = self.clone();
        c.ac.p_max = caps[0];
        c.dc.p_max = caps[1];
        c.ds.p_max = caps[2];
        c
    }

    /// Parameter checks shared by every command.
    ///
    /// With `strict_cutoff`, an `omega_0` below the digital-resolution bound
    /// is an error; otherwise it is only logged.
    pub fn validate(&self, strict_cutoff: bool) -> Result<()> {
        for s in self.specs() {
            s.validate()?;
            design_droop(s)?;
            let designed = design_droop(s)?;
            if (s.droop() - designed.droop()).abs() > 1e-12 * designed.droop() {
                warn!(
                    "{}: droop coefficient {} overrides the designed value {}; steady power sharing will not follow capacities",
                    s.kind,
                    s.droop(),
                    designed.droop()
                );
            } else if droop_identity_residual(s) > 1e-10 {
                return Err(Error::invalid(format!("{}.droop", s.kind), "droop identity violated"));
            }
        }
        self.ilc.validate()?;
        if !(self.omega_0 > 0.0) {
            return Err(Error::invalid("ilc.omega_0", "must be positive"));
        }
        let bound = self.omega_0_bound();
        if self.omega_0 < bound {
            let msg = format!("omega_0 = {} rad/s is below the resolution bound {} rad/s", self.omega_0, bound);
            if strict_cutoff {
                return Err(Error::invalid("ilc.omega_0", msg));
            }
            warn!("{msg}");
        }
        Ok(())
    }
}

/// `[ac]` / `[dc]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwingSection {
    pub x_max: f64,
    pub x_min: f64,
    pub x_nominal: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// Droop override; designed from the limits when absent.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "T_G")]
    pub t_g: f64,
    #[serde(rename = "F_HP")]
    pub f_hp: f64,
    #[serde(rename = "T_CH")]
    pub t_ch: f64,
    #[serde(rename = "T_RH")]
    pub t_rh: f64,
    pub k_p: f64,
    pub k_i: f64,
}

impl SwingSection {
    fn governor(&self) -> Governor {
        Governor {
            t_g: self.t_g,
            f_hp: self.f_hp,
            t_ch: self.t_ch,
            t_rh: self.t_rh,
        }
    }
}

/// `[ds]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageSection {
    pub x_max: f64,
    pub x_min: f64,
    pub x_nominal: f64,
    #[serde(rename = "P_max")]
    pub p_max: f64,
    #[serde(rename = "y_H")]
    pub y_h: f64,
    /// Droop override; designed from the limits when absent.
    #[serde(rename = "y_L", default, skip_serializing_if = "Option::is_none")]
    pub y_l: Option<f64>,
    pub k_p: f64,
    pub k_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlcSection {
    pub omega_0: f64,
    pub k_tp1: f64,
    pub k_ti1: f64,
    pub k_tp2: f64,
    pub k_ti2: f64,
    #[serde(rename = "T_s")]
    pub t_s: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub step: f64,
    pub horizon: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Loads present before `t = 0`, watts, ordered AC, DC, DS.
    #[serde(default)]
    pub initial_loads_w: [f64; 3],
}

fn default_sample_interval() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub t: f64,
    pub subgrid: SubgridKind,
    pub load_w: f64,
}

/// Parsed experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridConfigFile {
    pub ac: SwingSection,
    pub dc: SwingSection,
    pub ds: StorageSection,
    pub ilc: IlcSection,
    pub sim: SimSection,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub events: Vec<EventEntry>,
}

const SWING_KEYS: &[&str] = &[
    "x_max", "x_min", "x_nominal", "P_max", "H", "D", "R", "T_G", "F_HP", "T_CH", "T_RH", "k_p", "k_i",
];
const SWING_OPTIONAL: &[&str] = &["R"];
const STORAGE_KEYS: &[&str] = &["x_max", "x_min", "x_nominal", "P_max", "y_H", "y_L", "k_p", "k_i"];
const STORAGE_OPTIONAL: &[&str] = &["y_L"];
const ILC_KEYS: &[&str] = &["omega_0", "k_tp1", "k_ti1", "k_tp2", "k_ti2", "T_s", "M"];
const SIM_KEYS: &[&str] = &["step", "horizon", "sample_interval", "initial_loads_w"];
const SIM_OPTIONAL: &[&str] = &["sample_interval", "initial_loads_w"];
const TOGGLE_KEYS: &[&str] = &["concatenator", "restoration", "ilc"];
const EVENT_KEYS: &[&str] = &["t", "subgrid", "load_w"];
const TOP_KEYS: &[&str] = &["ac", "dc", "ds", "ilc", "sim", "toggles", "events"];

fn check_table(table: &toml::Table, section: &str, keys: &[&str], optional: &[&str]) -> Result<()> {
    for k in table.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown key `{section}.{k}`")));
        }
    }
    for k in keys {
        if !optional.contains(k) && !table.contains_key(*k) {
            return Err(Error::Config(format!("missing key `{section}.{k}`")));
        }
    }
    Ok(())
}

fn section<'a>(root: &'a toml::Table, name: &str) -> Result<Option<&'a toml::Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(Error::Config(format!("`{name}` must be a table"))),
    }
}

/// Key-level checks that give dotted names before serde sees the document.
fn check_keys(root: &toml::Table) -> Result<()> {
    for k in root.keys() {
        if !TOP_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
    }
    let required = |name: &str| -> Result<&toml::Table> {
        section(root, name)?.ok_or_else(|| Error::Config(format!("missing section `[{name}]`")))
    };
    check_table(required("ac")?, "ac", SWING_KEYS, SWING_OPTIONAL)?;
    check_table(required("dc")?, "dc", SWING_KEYS, SWING_OPTIONAL)?;
    check_table(required("ds")?, "ds", STORAGE_KEYS, STORAGE_OPTIONAL)?;
    check_table(required("ilc")?, "ilc", ILC_KEYS, &[])?;
    check_table(required("sim")?, "sim", SIM_KEYS, SIM_OPTIONAL)?;
    if let Some(t) = section(root, "toggles")? {
        check_table(t, "toggles", TOGGLE_KEYS, TOGGLE_KEYS)?;
    }
    if let Some(ev) = root.get("events") {
        let arr = ev
            .as_array()
            .ok_or_else(|| Error::Config("`events` must be an array of tables".into()))?;
        for (i, e) in arr.iter().enumerate() {
            let t = e
                .as_table()
                .ok_or_else(|| Error::Config(format!("`events[{i}]` must be a table")))?;
            check_table(t, &format!("events[{i}]"), EVENT_KEYS, &[])?;
        }
    }
    Ok(())
}

impl HybridConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let root: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        check_keys(&root)?;
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reference system and event sequence: 14 kW DC, 12 kW AC and 10 kW DS
    /// at 1 s, then a further 6 kW on AC at 20 s.
    pub fn reference() -> Self {
        Self::from_parts(&HybridConfig::reference(), &Scenario::reference())
    }

    pub fn from_parts(cfg: &HybridConfig, sc: &Scenario) -> Self {
        let swing = |s: &SubgridSpec| SwingSection {
            x_max: s.x_max,
            x_min: s.x_min,
            x_nominal: s.x_nominal,
            p_max: s.p_max,
            h: s.h,
            d: s.d,
            r: None,
            t_g: s.governor.t_g,
            f_hp: s.governor.f_hp,
            t_ch: s.governor.t_ch,
            t_rh: s.governor.t_rh,
            k_p: s.k_p,
            k_i: s.k_i,
        };
        HybridConfigFile {
            ac: swing(&cfg.ac),
            dc: swing(&cfg.dc),
            ds: StorageSection {
                x_max: cfg.ds.x_max,
                x_min: cfg.ds.x_min,
                x_nominal: cfg.ds.x_nominal,
                p_max: cfg.ds.p_max,
                y_h: cfg.ds.y_h,
                y_l: None,
                k_p: cfg.ds.k_p,
                k_i: cfg.ds.k_i,
            },
            ilc: IlcSection {
                omega_0: cfg.omega_0,
                k_tp1: cfg.ilc.k_tp1,
                k_ti1: cfg.ilc.k_ti1,
                k_tp2: cfg.ilc.k_tp2,
                k_ti2: cfg.ilc.k_ti2,
                t_s: cfg.ilc.sampling_period,
                m: cfg.ilc.safety_factor_m,
            },
            sim: SimSection {
                step: sc.step,
                horizon: sc.horizon,
                sample_interval: sc.sample_interval,
                initial_loads_w: sc.initial_loads,
            },
            toggles: sc.toggles,
            events: sc
                .events
                .iter()
                .map(|e| EventEntry {
                    t: e.time,
                    subgrid: e.subgrid,
                    load_w: e.load_delta,
                })
                .collect(),
        }
    }

    /// System parameters with droop coefficients designed (or overridden).
    pub fn system(&self) -> Result<HybridConfig> {
        let swing = |kind: SubgridKind, s: &SwingSection| -> Result<SubgridSpec> {
            let spec = SubgridSpec {
                kind,
                x_max: s.x_max,
                x_min: s.x_min,
                x_nominal: s.x_nominal,
                p_max: s.p_max,
                h: s.h,
                d: s.d,
                r: None,
                y_h: 0.0,
                y_l: None,
                governor: s.governor(),
                k_p: s.k_p,
                k_i: s.k_i,
            };
            let mut spec = design_droop(&spec)?;
            if s.r.is_some() {
                spec.r = s.r;
            }
            Ok(spec)
        };
        let d = &self.ds;
        let ds = SubgridSpec {
            kind: SubgridKind::Ds,
            x_max: d.x_max,
            x_min: d.x_min,
            x_nominal: d.x_nominal,
            p_max: d.p_max,
            h: 0.0,
            d: 0.0,
            r: None,
            y_h: d.y_h,
            y_l: None,
            governor: Governor::default(),
            k_p: d.k_p,
            k_i: d.k_i,
        };
        let mut ds = design_droop(&ds)?;
        if d.y_l.is_some() {
            ds.y_l = d.y_l;
        }
        Ok(HybridConfig {
            ac: swing(SubgridKind::Ac, &self.ac)?,
            dc: swing(SubgridKind::Dc, &self.dc)?,
            ds,
            ilc: IlcSpec {
                k_tp1: self.ilc.k_tp1,
                k_ti1: self.ilc.k_ti1,
                k_tp2: self.ilc.k_tp2,
                k_ti2: self.ilc.k_ti2,
                sampling_period: self.ilc.t_s,
                safety_factor_m: self.ilc.m,
            },
            omega_0: self.ilc.omega_0,
        })
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            horizon: self.sim.horizon,
            step: self.sim.step,
            sample_interval: self.sim.sample_interval,
            events: self
                .events
                .iter()
                .map(|e| Event {
                    time: e.t,
                    subgrid: e.subgrid,
                    load_delta: e.load_w,
                })
                .collect(),
            initial_loads: self.sim.initial_loads_w,
            toggles: self.toggles,
        }
    }

    /// Parses both halves and runs all validation.
    pub fn resolve(&self, strict_cutoff: bool) -> Result<(HybridConfig, Scenario)> {
        let cfg = self.system()?;
        cfg.validate(strict_cutoff)?;
        let sc = self.scenario();
        sc.validate()?;
        Ok((cfg, sc))
    }
}
