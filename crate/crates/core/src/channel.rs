//! Channel-level composition: the LOS ray plus spatially separated clusters
//! on a common AoA axis whose zero is the LOS direction.

use serde::Serialize;

use crate::cir::{BinnedCir, Mpc};
use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::propagation::{dbm_to_amplitude, free_space_loss, to_db, RadioParams, SPEED_OF_LIGHT};

pub use crate::cir::ClusterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LosRay {
    /// Seconds.
    pub delay: f64,
    pub aoa: f64,
    pub power_dbm: f64,
}

pub fn los_ray(radio: &RadioParams, d: f64) -> LosRay {
    let power_dbm = radio.eirp_dbm() - to_db(free_space_loss(d, radio.wavelength()));
    LosRay {
        delay: d / SPEED_OF_LIGHT,
        aoa: 0.0,
        power_dbm,
    }
}

/// Cluster AoA relative to the LOS direction, signed by the reflector side.
pub fn global_aoa(phi: f64, sigma: f64, side: Side) -> f64 {
    side.sign() * (90.0 - phi + sigma)
}

/// Wraps an angle into `(-180, 180]`.
pub fn wrap_180(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w <= -180.0 {
        w + 360.0
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResponse {
    pub label: String,
    /// Global AoA of the specular MPC, degrees.
    pub global_aoa: f64,
    /// Specular time of arrival, seconds.
    pub toa: f64,
    pub sigma: f64,
    pub side: Side,
    pub binned: BinnedCir,
}

impl ClusterResponse {
    pub fn new(binned: BinnedCir, sigma: f64, side: Side, toa: f64) -> Self {
        Self {
            label: binned.label.clone(),
            global_aoa: global_aoa(binned.phi, sigma, side),
            toa,
            sigma,
            side,
            binned,
        }
    }

    /// Global AoA of an MPC of this cluster.
    pub fn mpc_aoa(&self, mpc: &Mpc) -> f64 {
        wrap_180(self.side.sign() * (90.0 - mpc.angle_bin_center + self.sigma))
    }

    /// The cluster CIR shifted onto the global time/angle axes.
    pub fn taps(&self) -> Vec<ChannelTap> {
        self.binned
            .mpcs
            .iter()
            .map(|m| ChannelTap {
                source: self.label.clone(),
                aoa: self.mpc_aoa(m),
                toa: self.toa + m.delay_bin_center,
                amplitude: m.amplitude,
                phase: m.phase,
                power_dbm: m.power_dbm,
            })
            .collect()
    }

    /// Angular extent `[start, end]` of the binned support on the global
    /// axis, unwrapped so that `start <= end`. `None` without MPCs.
    pub fn angular_support(&self) -> Option<(f64, f64)> {
        let half = self.binned.delta_phi / 2.0;
        let offsets = self.binned.mpcs.iter().map(|m| m.offset(self.binned.delta_phi));
        let (lo, hi) = offsets.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
            (lo.min(o), hi.max(o))
        });
        if lo > hi {
            return None;
        }
        // global = sign * (Phi_0 + offset) with Phi_0 = 90 - phi + sigma
        let base = 90.0 - self.binned.phi + self.sigma;
        let (a, b) = match self.side {
            Side::Right => (base + lo - half, base + hi + half),
            Side::Left => (-(base + hi + half), -(base + lo - half)),
        };
        let start = wrap_180(a);
        Some((start, start + (b - a)))
    }

    pub fn total_power_mw(&self) -> f64 {
        self.binned.total_power_mw()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelTap {
    pub source: String,
    pub aoa: f64,
    pub toa: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelResponse {
    pub los: Option<LosRay>,
    /// Sorted by ToA, then global AoA, then label.
    pub clusters: Vec<ClusterResponse>,
    pub n_cl: usize,
}

pub const LOS_LABEL: &str = "los";

impl ChannelResponse {
    /// All taps on the global axes, sorted by ToA then AoA.
    pub fn taps(&self) -> Vec<ChannelTap> {
        let mut taps: Vec<ChannelTap> = self
            .los
            .iter()
            .map(|los| ChannelTap {
                source: LOS_LABEL.into(),
                aoa: los.aoa,
                toa: los.delay,
                amplitude: dbm_to_amplitude(los.power_dbm),
                phase: 0.0,
                power_dbm: los.power_dbm,
            })
            .collect();
        taps.extend(self.clusters.iter().flat_map(ClusterResponse::taps));
        taps.sort_by(|a, b| {
            a.toa
                .total_cmp(&b.toa)
                .then(a.aoa.total_cmp(&b.aoa))
                .then_with(|| a.source.cmp(&b.source))
        });
        taps
    }
}

fn arcs_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    const TOL: f64 = 1e-9;
    [-360.0, 0.0, 360.0]
        .iter()
        .any(|shift| a.0 < b.1 + shift - TOL && b.0 + shift < a.1 - TOL)
}

fn check_overlap(clusters: &[ClusterResponse]) -> Result<()> {
    for (i, a) in clusters.iter().enumerate() {
        let Some(sa) = a.angular_support() else { continue };
        for b in &clusters[i + 1..] {
            let Some(sb) = b.angular_support() else { continue };
            if arcs_overlap(sa, sb) {
                return Err(Error::ClusterOverlap {
                    first: a.label.clone(),
                    second: b.label.clone(),
                });
            }
        }
    }
    Ok(())
}

pub fn compose_channel(
    los: Option<LosRay>,
    mut clusters: Vec<ClusterResponse>,
) -> Result<ChannelResponse> {
    clusters.sort_by(|a, b| {
        a.toa
            .total_cmp(&b.toa)
            .then(a.global_aoa.total_cmp(&b.global_aoa))
            .then_with(|| a.label.cmp(&b.label))
    });
    check_overlap(&clusters)?;
    Ok(ChannelResponse {
        los,
        n_cl: clusters.len(),
        clusters,
    })
}

/// Channel matrix between per-cluster beams. Off-diagonal links are absent
/// under perfect spatial separation.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannelMatrix<'a> {
    pub entries: Vec<Vec<Option<&'a ClusterResponse>>>,
}

impl<'a> MimoChannelMatrix<'a> {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, p: usize, q: usize) -> Option<&'a ClusterResponse> {
        self.entries.get(p).and_then(|row| row.get(q)).copied().flatten()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().enumerate().all(|(p, row)| {
            row.iter()
                .enumerate()
                .all(|(q, e)| (p == q) == e.is_some())
        })
    }

    /// Sum of the diagonal links' total binned power, milliwatts.
    pub fn trace_power_mw(&self) -> f64 {
        (0..self.dim())
            .filter_map(|j| self.get(j, j))
            .map(ClusterResponse::total_power_mw)
            .sum()
    }
}

pub fn mimo_matrix(clusters: &[ClusterResponse]) -> Result<MimoChannelMatrix<'_>> {
    check_overlap(clusters)?;
    let n = clusters.len();
    let entries = (0..n)
        .map(|p| (0..n).map(|q| (p == q).then(|| &clusters[p])).collect())
        .collect();
    Ok(MimoChannelMatrix { entries })
}
