//! Comparison of simulated cluster statistics with reference measurements.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ScenarioStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCluster {
    pub label: String,
    pub aoa_deg: ReferenceValue,
    pub spread_deg: ReferenceValue,
    pub relative_power_db: ReferenceValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScenario {
    pub scenario: String,
    pub clusters: Vec<ReferenceCluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_aoa_error_deg: f64,
    pub mean_spread_error_deg: f64,
    pub rms_relative_power_error_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub description: Option<String>,
    pub thresholds: Thresholds,
    pub scenarios: Vec<ReferenceScenario>,
}

impl Reference {
    fn find(&self, scenario: &str, label: &str) -> Option<&ReferenceCluster> {
        self.scenarios
            .iter()
            .filter(|s| s.scenario == scenario)
            .flat_map(|s| &s.clusters)
            .find(|c| c.label == label)
    }
}

pub fn parse_reference(text: &str) -> Result<Reference> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_reference(path: impl AsRef<Path>) -> Result<Reference> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_reference(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDelta {
    pub scenario: String,
    pub label: String,
    pub aoa_deg: f64,
    pub aoa_ref_deg: f64,
    pub aoa_error_deg: f64,
    pub spread_deg: Option<f64>,
    pub spread_ref_deg: f64,
    pub spread_error_deg: Option<f64>,
    pub relative_power_db: Option<f64>,
    pub relative_power_ref_db: f64,
    /// Signed, simulated minus reference.
    pub relative_power_error_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub clusters: Vec<ClusterDelta>,
    pub max_aoa_error_deg: f64,
    pub mean_spread_error_deg: Option<f64>,
    pub rms_relative_power_error_db: Option<f64>,
    pub thresholds: Thresholds,
    /// Names of the aggregates that exceed their threshold or could not be
    /// computed.
    pub exceeded: Vec<String>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.exceeded.is_empty()
    }
}

/// Absolute AoA difference on the circle, degrees.
fn angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn compare(stats: &[ScenarioStats], reference: &Reference) -> Result<ComparisonReport> {
    let mut clusters = Vec::new();
    for sc in stats {
        for c in &sc.clusters {
            let r = reference
                .find(&sc.scenario, &c.label)
                .ok_or_else(|| Error::MissingReference(format!("{}/{}", sc.scenario, c.label)))?;
            clusters.push(ClusterDelta {
                scenario: sc.scenario.clone(),
                label: c.label.clone(),
                aoa_deg: c.global_aoa_deg,
                aoa_ref_deg: r.aoa_deg.value,
                aoa_error_deg: angle_error(c.global_aoa_deg, r.aoa_deg.value),
                spread_deg: c.spread_deg,
                spread_ref_deg: r.spread_deg.value,
                spread_error_deg: c.spread_deg.map(|s| (s - r.spread_deg.value).abs()),
                relative_power_db: c.relative_peak_db,
                relative_power_ref_db: r.relative_power_db.value,
                relative_power_error_db: c
                    .relative_peak_db
                    .map(|p| p - r.relative_power_db.value),
            });
        }
    }
    clusters.sort_by(|a, b| (&a.scenario, &a.label).cmp(&(&b.scenario, &b.label)));

    let max_aoa = clusters.iter().map(|c| c.aoa_error_deg).fold(0.0, f64::max);
    let spread_errs: Vec<f64> = clusters.iter().filter_map(|c| c.spread_error_deg).collect();
    let power_sq: Vec<f64> = clusters
        .iter()
        .filter_map(|c| c.relative_power_error_db.map(|e| e * e))
        .collect();
    // A cluster without a value counts as a failed comparison.
    let all_spreads = spread_errs.len() == clusters.len();
    let all_powers = power_sq.len() == clusters.len();
    let mean_spread = mean(&spread_errs).filter(|_| all_spreads);
    let rms_power = mean(&power_sq).map(f64::sqrt).filter(|_| all_powers);

    let t = reference.thresholds;
    let mut exceeded = Vec::new();
    if max_aoa > t.max_aoa_error_deg {
        exceeded.push("max_aoa_error_deg".to_string());
    }
    if !mean_spread.is_some_and(|m| m <= t.mean_spread_error_deg) && !clusters.is_empty() {
        exceeded.push("mean_spread_error_deg".to_string());
    }
    if !rms_power.is_some_and(|r| r <= t.rms_relative_power_error_db) && !clusters.is_empty() {
        exceeded.push("rms_relative_power_error_db".to_string());
    }

    Ok(ComparisonReport {
        clusters,
        max_aoa_error_deg: max_aoa,
        mean_spread_error_deg: mean_spread,
        rms_relative_power_error_db: rms_power,
        thresholds: t,
        exceeded,
    })
}
