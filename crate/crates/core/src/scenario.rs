//! Scenario files: JSON documents with explicit units in every field name.
//!
//! Parsing happens in two steps. The document is deserialized into a
//! permissive shape where every field is optional, then validated into the
//! domain types so that all missing or out-of-range fields are reported
//! together.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cir::{ClusterConfig, RayDensity};
use crate::error::{Error, Result};
use crate::geometry::{ClusterGeometry, Extent, Side};
use crate::propagation::{Material, Polarization, RadioParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_N_RAYS: usize = 1000;
pub const DEFAULT_DELTA_PHI_DEG: f64 = 5.0;
pub const DEFAULT_DELTA_TAU_NS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSettings {
    pub density: RayDensity,
    /// Angle resolution, degrees.
    pub delta_phi: f64,
    /// Time resolution, seconds.
    pub delta_tau: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            density: RayDensity::Count(DEFAULT_N_RAYS),
            delta_phi: DEFAULT_DELTA_PHI_DEG,
            delta_tau: DEFAULT_DELTA_TAU_NS * 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub radio: RadioParams,
    pub simulation: SimulationSettings,
    /// LOS distance in metres when the LOS ray is present.
    pub los: Option<f64>,
    pub clusters: Vec<ClusterConfig>,
}

// ---------------------------------------------------------------------------
// Document shape
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default)]
    pub radio: Option<RadioDoc>,
    #[serde(default)]
    pub simulation: SimulationDoc,
    #[serde(default)]
    pub los: Option<LosDoc>,
    #[serde(default)]
    pub clusters: Vec<ClusterDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioDoc {
    pub p_t_dbm: Option<f64>,
    pub g_t_db: Option<f64>,
    pub g_r_db: Option<f64>,
    pub f_c_hz: Option<f64>,
    pub polarization: Option<Polarization>,
    pub p_rs_dbm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rays_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_alpha_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_phi_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_tau_ns: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosDoc {
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default)]
    pub geometry: GeometryDoc,
    #[serde(default)]
    pub material: MaterialDoc,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub d_m: Option<f64>,
    pub h_t_m: Option<f64>,
    pub h_r_m: Option<f64>,
    pub l_neg_m: Option<Extent>,
    pub l_pos_m: Option<Extent>,
    pub theta_tx_deg: Option<f64>,
    pub side: Option<Side>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDoc {
    pub eps_r: Option<f64>,
    pub sigma_h_mm: Option<f64>,
    pub m: Option<f64>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Collector(Vec<String>);

impl Collector {
    fn need<T: Copy>(&mut self, v: Option<T>, path: &str) -> Option<T> {
        if v.is_none() {
            self.0.push(format!("{path} is required"));
        }
        v
    }

    fn extend(&mut self, prefix: &str, msgs: Vec<String>) {
        self.0.extend(msgs.into_iter().map(|m| format!("{prefix}: {m}")));
    }
}

impl ScenarioDoc {
    pub fn validate(&self) -> Result<Scenario> {
        let mut c = Collector(Vec::new());
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                c.0.push(format!(
                    "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                ));
            }
        }

        let radio = match &self.radio {
            None => {
                c.0.push("radio is required".into());
                None
            }
            Some(r) => {
                let p_t = c.need(r.p_t_dbm, "radio.p_t_dbm");
                let g_t = c.need(r.g_t_db, "radio.g_t_db");
                let g_r = c.need(r.g_r_db, "radio.g_r_db");
                let f_c = c.need(r.f_c_hz, "radio.f_c_hz");
                let pol = c.need(r.polarization, "radio.polarization");
                let p_rs = c.need(r.p_rs_dbm, "radio.p_rs_dbm");
                match (p_t, g_t, g_r, f_c, pol, p_rs) {
                    (Some(p_t), Some(g_t), Some(g_r), Some(f_c), Some(pol), Some(p_rs)) => {
                        let radio = RadioParams {
                            p_t_dbm: p_t,
                            g_t_db: g_t,
                            g_r_db: g_r,
                            f_c_hz: f_c,
                            polarization: pol,
                            p_rs_dbm: p_rs,
                        };
                        c.extend("radio", radio.violations());
                        Some(radio)
                    }
                    _ => None,
                }
            }
        };

        let sim = &self.simulation;
        let density = match (sim.n_rays_d, sim.delta_alpha_deg) {
            (Some(_), Some(_)) => {
                c.0.push("simulation: give either n_rays_d or delta_alpha_deg, not both".into());
                RayDensity::default()
            }
            (Some(0), None) => {
                c.0.push("simulation.n_rays_d must be positive".into());
                RayDensity::default()
            }
            (Some(n), None) => RayDensity::Count(n),
            (None, Some(d)) => {
                if !(d > 0.0 && d.is_finite()) {
                    c.0.push(format!("simulation.delta_alpha_deg must be positive, got {d}"));
                }
                RayDensity::Spacing(d)
            }
            (None, None) => RayDensity::default(),
        };
        let delta_phi = sim.delta_phi_deg.unwrap_or(DEFAULT_DELTA_PHI_DEG);
        if !(delta_phi > 0.0 && delta_phi.is_finite()) {
            c.0.push(format!("simulation.delta_phi_deg must be positive, got {delta_phi}"));
        }
        let delta_tau_ns = sim.delta_tau_ns.unwrap_or(DEFAULT_DELTA_TAU_NS);
        if !(delta_tau_ns > 0.0 && delta_tau_ns.is_finite()) {
            c.0.push(format!("simulation.delta_tau_ns must be positive, got {delta_tau_ns}"));
        }

        let los = match &self.los {
            Some(LosDoc { enabled: true, d_m }) => match c.need(*d_m, "los.d_m") {
                Some(d) if !(d > 0.0 && d.is_finite()) => {
                    c.0.push(format!("los.d_m must be positive, got {d}"));
                    None
                }
                other => other,
            },
            _ => None,
        };

        let mut clusters = Vec::with_capacity(self.clusters.len());
        let mut labels = HashSet::new();
        for (i, doc) in self.clusters.iter().enumerate() {
            let label = doc
                .label
                .clone()
                .unwrap_or_else(|| format!("cluster-{}", i + 1));
            if !labels.insert(label.clone()) {
                c.0.push(format!("clusters[{i}]: duplicate label `{label}`"));
            }
            if let Some(cfg) = doc.validate(i, label, &mut c) {
                clusters.push(cfg);
            }
        }

        if !c.0.is_empty() {
            return Err(Error::Validation(c.0));
        }
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            radio: radio.expect("validated"),
            simulation: SimulationSettings {
                density,
                delta_phi,
                delta_tau: delta_tau_ns * 1e-9,
            },
            los,
            clusters,
        })
    }
}

impl ClusterDoc {
    fn validate(&self, i: usize, label: String, c: &mut Collector) -> Option<ClusterConfig> {
        let p = format!("clusters[{i}]");
        let g = &self.geometry;
        let d = c.need(g.d_m, &format!("{p}.geometry.d_m"));
        let h_t = c.need(g.h_t_m, &format!("{p}.geometry.h_t_m"));
        let h_r = c.need(g.h_r_m, &format!("{p}.geometry.h_r_m"));
        let l_neg = c.need(g.l_neg_m, &format!("{p}.geometry.l_neg_m"));
        let l_pos = c.need(g.l_pos_m, &format!("{p}.geometry.l_pos_m"));
        let theta = c.need(g.theta_tx_deg, &format!("{p}.geometry.theta_tx_deg"));
        let side = c.need(g.side, &format!("{p}.geometry.side"));
        let m = &self.material;
        let eps_r = c.need(m.eps_r, &format!("{p}.material.eps_r"));
        let sigma_h = c.need(m.sigma_h_mm, &format!("{p}.material.sigma_h_mm"));
        let order = c.need(m.m, &format!("{p}.material.m"));

        let geometry = ClusterGeometry {
            d: d?,
            h_t: h_t?,
            h_r: h_r?,
            l_neg: l_neg?,
            l_pos: l_pos?,
            theta_tx: theta?,
            side: side?,
        };
        let material = Material {
            eps_r: eps_r?,
            sigma_h: sigma_h? * 1e-3,
            m: order?,
        };
        let before = c.0.len();
        c.extend(&format!("{p}.geometry"), geometry.violations());
        c.extend(&format!("{p}.material"), material.violations());
        (c.0.len() == before).then_some(ClusterConfig {
            label,
            geometry,
            material,
        })
    }
}

impl Scenario {
    pub fn to_doc(&self) -> ScenarioDoc {
        let sim = &self.simulation;
        let (n_rays_d, delta_alpha_deg) = match sim.density {
            RayDensity::Count(n) => (Some(n), None),
            RayDensity::Spacing(d) => (None, Some(d)),
        };
        ScenarioDoc {
            schema_version: Some(SCHEMA_VERSION),
            name: Some(self.name.clone()),
            comment: None,
            radio: Some(RadioDoc {
                p_t_dbm: Some(self.radio.p_t_dbm),
                g_t_db: Some(self.radio.g_t_db),
                g_r_db: Some(self.radio.g_r_db),
                f_c_hz: Some(self.radio.f_c_hz),
                polarization: Some(self.radio.polarization),
                p_rs_dbm: Some(self.radio.p_rs_dbm),
            }),
            simulation: SimulationDoc {
                n_rays_d,
                delta_alpha_deg,
                delta_phi_deg: Some(sim.delta_phi),
                delta_tau_ns: Some(sim.delta_tau * 1e9),
            },
            los: Some(LosDoc {
                enabled: self.los.is_some(),
                d_m: self.los,
            }),
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterDoc {
                    label: Some(c.label.clone()),
                    comment: None,
                    geometry: GeometryDoc {
                        d_m: Some(c.geometry.d),
                        h_t_m: Some(c.geometry.h_t),
                        h_r_m: Some(c.geometry.h_r),
                        l_neg_m: Some(c.geometry.l_neg),
                        l_pos_m: Some(c.geometry.l_pos),
                        theta_tx_deg: Some(c.geometry.theta_tx),
                        side: Some(c.geometry.side),
                    },
                    material: MaterialDoc {
                        eps_r: Some(c.material.eps_r),
                        sigma_h_mm: Some(c.material.sigma_h * 1e3),
                        m: Some(c.material.m),
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario serializes")
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.validate()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}
