//! End-to-end scenario simulation, summary statistics and profile output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{compose_channel, los_ray, wrap_180, ChannelResponse, ClusterResponse, LOS_LABEL};
use crate::cir::{angle_spread, bin_cir, cluster_cir, ray_spread, TheoreticalCir};
use crate::error::{Error, Result};
use crate::propagation::{amplitude_to_dbm, to_db};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub scenario: String,
    pub channel: ChannelResponse,
    /// Theoretical CIRs in the same order as `channel.clusters`.
    pub theoretical: Vec<TheoreticalCir>,
    pub stats: ScenarioStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub label: String,
    pub global_aoa_deg: f64,
    /// Span of the theoretical rays at or above the receiver sensitivity.
    pub spread_deg: Option<f64>,
    /// Span of the surviving binned MPCs.
    pub binned_spread_deg: Option<f64>,
    pub peak_power_dbm: Option<f64>,
    pub total_power_dbm: Option<f64>,
    /// LOS power minus the cluster peak MPC power.
    pub relative_peak_db: Option<f64>,
    pub toa_ns: f64,
    pub n_mpc: usize,
    pub n_rays: usize,
    pub alpha_minus_deg: f64,
    pub alpha_plus_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub scenario: String,
    pub los_power_dbm: Option<f64>,
    pub los_toa_ns: Option<f64>,
    pub clusters: Vec<ClusterStats>,
}

fn cluster_stats(
    theo: &TheoreticalCir,
    resp: &ClusterResponse,
    p_rs_dbm: f64,
    los_dbm: Option<f64>,
) -> ClusterStats {
    let peak = resp.binned.peak().map(|m| m.power_dbm);
    let total = resp.total_power_mw();
    ClusterStats {
        label: resp.label.clone(),
        global_aoa_deg: resp.global_aoa,
        spread_deg: ray_spread(theo, p_rs_dbm).ok(),
        binned_spread_deg: angle_spread(&resp.binned).ok(),
        peak_power_dbm: peak,
        total_power_dbm: (total > 0.0).then(|| to_db(total)),
        relative_peak_db: los_dbm.zip(peak).map(|(l, p)| l - p),
        toa_ns: resp.toa * 1e9,
        n_mpc: resp.binned.n_mpc,
        n_rays: theo.n_rays,
        alpha_minus_deg: theo.region.alpha_minus,
        alpha_plus_deg: theo.region.alpha_plus,
    }
}

pub fn simulate(scenario: &Scenario) -> Result<SimulationOutput> {
    let radio = &scenario.radio;
    let sim = &scenario.simulation;
    let per_cluster: Vec<(TheoreticalCir, ClusterResponse)> = scenario
        .clusters
        .par_iter()
        .map(|cfg| {
            let theo = cluster_cir(cfg, radio, sim.density)?;
            let binned = bin_cir(&theo, sim.delta_phi, sim.delta_tau, radio.p_rs_dbm)?;
            let resp = ClusterResponse::new(binned, theo.sigma, cfg.geometry.side, theo.t_sp);
            Ok((theo, resp))
        })
        .collect::<Result<_>>()?;

    let los = scenario.los.map(|d| los_ray(radio, d));
    let (theos, responses): (Vec<_>, Vec<_>) = per_cluster.into_iter().unzip();
    let channel = compose_channel(los, responses)?;
    let theoretical: Vec<TheoreticalCir> = channel
        .clusters
        .iter()
        .map(|c| {
            theos
                .iter()
                .find(|t| t.label == c.label)
                .cloned()
                .expect("every response has a theoretical CIR")
        })
        .collect();

    let los_dbm = los.map(|l| l.power_dbm);
    let stats = ScenarioStats {
        scenario: scenario.name.clone(),
        los_power_dbm: los_dbm,
        los_toa_ns: los.map(|l| l.delay * 1e9),
        clusters: theoretical
            .iter()
            .zip(&channel.clusters)
            .map(|(t, r)| cluster_stats(t, r, radio.p_rs_dbm, los_dbm))
            .collect(),
    };
    Ok(SimulationOutput {
        scenario: scenario.name.clone(),
        channel,
        theoretical,
        stats,
    })
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    TheoreticalAngle,
    BinnedAngle,
    TheoreticalDelay,
    BinnedDelay,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 4] = [
        ProfileKind::TheoreticalAngle,
        ProfileKind::BinnedAngle,
        ProfileKind::TheoreticalDelay,
        ProfileKind::BinnedDelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::TheoreticalAngle => "theoretical_angle",
            ProfileKind::BinnedAngle => "binned_angle",
            ProfileKind::TheoreticalDelay => "theoretical_delay",
            ProfileKind::BinnedDelay => "binned_delay",
        }
    }

    pub fn axis(self) -> &'static str {
        match self {
            ProfileKind::TheoreticalAngle | ProfileKind::BinnedAngle => "angle_deg",
            ProfileKind::TheoreticalDelay | ProfileKind::BinnedDelay => "delay_ns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRecord {
    /// Global AoA in degrees or absolute ToA in nanoseconds.
    pub axis_value: f64,
    pub power_dbm: f64,
    pub label: String,
}

fn sorted_series(label: &str, mut points: Vec<(f64, f64)>) -> Vec<ProfileRecord> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    points
        .into_iter()
        .map(|(axis_value, power_dbm)| ProfileRecord {
            axis_value,
            power_dbm,
            label: label.to_string(),
        })
        .collect()
}

/// One series per source: LOS first, then clusters in channel order. Each
/// series is sorted by its axis.
pub fn profile(output: &SimulationOutput, kind: ProfileKind) -> Vec<ProfileRecord> {
    let mut records = Vec::new();
    if let Some(los) = &output.channel.los {
        let axis = match kind.axis() {
            "angle_deg" => los.aoa,
            _ => los.delay * 1e9,
        };
        records.extend(sorted_series(LOS_LABEL, vec![(axis, los.power_dbm)]));
    }
    for (theo, resp) in output.theoretical.iter().zip(&output.channel.clusters) {
        let sign = resp.side.sign();
        let base = 90.0 - theo.phi + theo.sigma;
        let points: Vec<(f64, f64)> = match kind {
            ProfileKind::TheoreticalAngle => theo
                .components()
                .iter()
                .map(|r| (wrap_180(sign * (base + r.alpha)), r.power_dbm))
                .collect(),
            ProfileKind::TheoreticalDelay => theo
                .components()
                .iter()
                .map(|r| ((resp.toa + r.delay) * 1e9, r.power_dbm))
                .collect(),
            ProfileKind::BinnedAngle => resp
                .binned
                .mpcs
                .iter()
                .map(|m| (resp.mpc_aoa(m), m.power_dbm))
                .collect(),
            ProfileKind::BinnedDelay => {
                // MPCs sharing a delay bin add in power.
                let mut acc: Vec<(f64, f64)> = Vec::new();
                for m in &resp.binned.mpcs {
                    let t = (resp.toa + m.delay_bin_center) * 1e9;
                    match acc.iter_mut().find(|(x, _)| (*x - t).abs() < 1e-9) {
                        Some(entry) => entry.1 += m.power_mw(),
                        None => acc.push((t, m.power_mw())),
                    }
                }
                acc.into_iter()
                    .map(|(t, p)| (t, amplitude_to_dbm(p.sqrt())))
                    .collect()
            }
        };
        records.extend(sorted_series(&resp.label, points));
    }
    records
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub fn profile_csv(records: &[ProfileRecord], axis: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([axis, "power_dbm", "label"]).map_err(io)?;
    for r in records {
        w.write_record([
            r.axis_value.to_string(),
            r.power_dbm.to_string(),
            r.label.clone(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct JsonProfile<'a> {
    axis: &'a str,
    records: &'a [ProfileRecord],
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Rendered output files as `(file name, contents)`.
pub fn render_outputs(output: &SimulationOutput, format: OutputFormat) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    for kind in ProfileKind::ALL {
        let records = profile(output, kind);
        match format {
            OutputFormat::Csv => files.push((
                format!("{}.csv", kind.name()),
                profile_csv(&records, kind.axis())?,
            )),
            OutputFormat::Json => files.push((
                format!("{}.json", kind.name()),
                json(&JsonProfile {
                    axis: kind.axis(),
                    records: &records,
                }),
            )),
        }
    }
    files.push(("stats.json".into(), json(&output.stats)));
    files.push(("channel.json".into(), json(&output.channel)));
    Ok(files)
}

/// Writes every output file into `dir`. On failure, files written by this
/// call are removed again.
pub fn write_outputs(output: &SimulationOutput, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let files = render_outputs(output, format)?;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(Error::Io(format!("{}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(written)
}

pub fn load_stats(path: impl AsRef<Path>) -> Result<ScenarioStats> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
