//! Dense theoretical cluster CIR over the offset-AoA grid, and its reduction
//! to resolvable MPCs by angle/time binning.
//!
//! Every ray stands for a cell of the support region in `alpha` (the
//! midpoint partition of the grid, clipped to `[alpha_minus, alpha_plus]`).
//! A bin's MPC is the phasor sum of its rays, each weighted by the part of
//! its cell (in degrees) that falls inside the bin, with the path phase
//! advanced linearly across the cell. The sum therefore approximates the
//! integral of the angular amplitude density over the bin and does not
//! depend on the grid density once the grid resolves the amplitude envelope.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    diffuse_path, path_length_slope, solve_specular, support_region, ClusterGeometry,
    SpecularSolution, SupportRegion, ALPHA_EPS,
};
use crate::propagation::{
    amplitude_to_dbm, propagate, ray_phase, wrap_360, Material, RadioParams, SPEED_OF_LIGHT,
};

/// One reflector with its surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub label: String,
    pub geometry: ClusterGeometry,
    pub material: Material,
}

/// How densely the support region is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayDensity {
    /// Fixed number of grid rays over the support region.
    Count(usize),
    /// Fixed spacing in degrees.
    Spacing(f64),
}

impl Default for RayDensity {
    fn default() -> Self {
        RayDensity::Count(1000)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportGrid {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub delta_alpha: f64,
    /// Grid size before the specular offset is removed.
    pub n_rays_d: usize,
    /// Diffuse offsets, ascending, without 0.
    pub alphas: Vec<f64>,
}

pub fn discretize_support(region: &SupportRegion, delta_alpha: f64) -> Result<SupportGrid> {
    if region.empty {
        return Err(Error::EmptySupport);
    }
    if !(delta_alpha > 0.0 && delta_alpha.is_finite()) {
        return Err(Error::Validation(vec![format!(
            "delta_alpha must be positive, got {delta_alpha}"
        )]));
    }
    let width = region.alpha_plus - region.alpha_minus;
    let n = (width / delta_alpha + 1e-9).floor().max(0.0) as usize;
    let zero_tol = ALPHA_EPS * delta_alpha.max(1.0);
    let alphas = (0..n)
        .map(|k| region.alpha_minus + k as f64 * delta_alpha)
        .filter(|a| a.abs() > zero_tol)
        .collect();
    Ok(SupportGrid {
        alpha_minus: region.alpha_minus,
        alpha_plus: region.alpha_plus,
        delta_alpha,
        n_rays_d: n,
        alphas,
    })
}

/// Grid for a support region at the requested density. A point support
/// yields an empty grid.
pub fn grid_for(region: &SupportRegion, density: RayDensity) -> Result<SupportGrid> {
    if region.empty {
        return Err(Error::EmptySupport);
    }
    let width = region.width();
    if region.is_point() {
        return Ok(SupportGrid {
            alpha_minus: region.alpha_minus,
            alpha_plus: region.alpha_plus,
            delta_alpha: 0.0,
            n_rays_d: 0,
            alphas: Vec::new(),
        });
    }
    let delta = match density {
        RayDensity::Count(0) => {
            return Err(Error::Validation(vec!["ray count must be positive".into()]))
        }
        RayDensity::Count(n) => width / n as f64,
        RayDensity::Spacing(d) => d,
    };
    discretize_support(region, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayComponent {
    /// Offset AoA, degrees.
    pub alpha: f64,
    /// Path length, metres.
    pub length: f64,
    /// Delay relative to the specular ray, seconds.
    pub delay: f64,
    /// `sqrt(P)` with `P` in milliwatts.
    pub amplitude: f64,
    /// Degrees, relative to the specular ray.
    pub phase: f64,
    pub power_dbm: f64,
    /// Part of the support region this ray represents, degrees of `alpha`.
    pub cell: [f64; 2],
    /// Path phase slope, radians per degree of `alpha`.
    pub phase_slope: f64,
}

impl RayComponent {
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase.to_radians())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoreticalCir {
    pub label: String,
    /// `None` only when the support region is empty.
    pub specular: Option<RayComponent>,
    /// Diffuse rays, ascending in `alpha`.
    pub rays: Vec<RayComponent>,
    /// Specular time of arrival, seconds.
    pub t_sp: f64,
    pub phi: f64,
    pub sigma: f64,
    pub n_rays: usize,
    pub region: SupportRegion,
}

impl TheoreticalCir {
    /// Specular and diffuse rays together, ascending in `alpha`.
    pub fn components(&self) -> Vec<RayComponent> {
        let mut all = Vec::with_capacity(self.rays.len() + 1);
        all.extend(self.rays.iter().copied().filter(|r| r.alpha < 0.0));
        all.extend(self.specular);
        all.extend(self.rays.iter().copied().filter(|r| r.alpha > 0.0));
        all
    }

    /// True when every cell has zero width, i.e. only the specular point is
    /// reachable.
    pub fn is_point(&self) -> bool {
        self.components().iter().all(|r| r.cell[1] - r.cell[0] <= 0.0)
    }
}

struct RayContext<'a> {
    config: &'a ClusterConfig,
    radio: &'a RadioParams,
    spec: SpecularSolution,
    gamma_sp: Complex64,
}

impl RayContext<'_> {
    /// `None` for rays that carry no energy (grazing, absorbed, or outside
    /// the scattering lobe).
    fn ray(&self, alpha: f64, cell: [f64; 2]) -> Result<Option<RayComponent>> {
        let geom = &self.config.geometry;
        let path = match diffuse_path(geom, &self.spec, alpha) {
            Ok(p) if p.l_dif.is_finite() => p,
            Ok(_) | Err(Error::NonPhysical(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let prop = match propagate(
            self.radio,
            &self.config.material,
            geom.h_t,
            self.spec.phi,
            alpha,
            path.l_dif,
            path.s1_prime,
        ) {
            Ok(p) => p,
            Err(Error::TotalAbsorption | Error::ZeroPattern(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if !prop.power_dbm.is_finite() {
            return Ok(None);
        }
        let lambda = self.radio.wavelength();
        Ok(Some(RayComponent {
            alpha,
            length: path.l_dif,
            delay: ((path.l_dif - self.spec.l_sp) / SPEED_OF_LIGHT).max(0.0),
            amplitude: prop.amplitude,
            phase: ray_phase(path.l_dif, self.spec.l_sp, lambda, prop.gamma, self.gamma_sp),
            power_dbm: prop.power_dbm,
            cell,
            phase_slope: std::f64::consts::TAU / lambda
                * path_length_slope(geom, &self.spec, alpha),
        }))
    }
}

/// Midpoint partition of `[lo, hi]` around sorted sample points.
fn cells(points: &[f64], lo: f64, hi: f64) -> Vec<[f64; 2]> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let a = if i == 0 { lo } else { 0.5 * (points[i - 1] + points[i]) };
            let b = if i + 1 == n { hi } else { 0.5 * (points[i] + points[i + 1]) };
            [a.min(points[i]), b.max(points[i])]
        })
        .collect()
}

pub fn build_theoretical_cir(
    config: &ClusterConfig,
    radio: &RadioParams,
    grid: &SupportGrid,
) -> Result<TheoreticalCir> {
    let geom = &config.geometry;
    let spec = solve_specular(geom)?;
    let region = support_region(geom, &spec);
    let theta_sp = 90.0 - spec.phi;
    let gamma_sp =
        crate::propagation::fresnel(theta_sp, config.material.eps_r, radio.polarization)?;
    let ctx = RayContext {
        config,
        radio,
        spec,
        gamma_sp,
    };

    let mut points: Vec<f64> = grid.alphas.clone();
    points.push(0.0);
    points.sort_by(f64::total_cmp);
    let cell_of = cells(&points, grid.alpha_minus, grid.alpha_plus);

    let specular_idx = points.iter().position(|a| *a == 0.0).unwrap_or(0);
    let specular = ctx
        .ray(0.0, cell_of[specular_idx])?
        .ok_or(Error::TotalAbsorption)?;

    let rays: Vec<RayComponent> = points
        .par_iter()
        .zip(cell_of.par_iter())
        .enumerate()
        .filter(|(i, _)| *i != specular_idx)
        .map(|(_, (a, c))| ctx.ray(*a, *c))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    Ok(TheoreticalCir {
        label: config.label.clone(),
        specular: Some(RayComponent {
            delay: 0.0,
            phase: 0.0,
            ..specular
        }),
        rays,
        t_sp: spec.l_sp / SPEED_OF_LIGHT,
        phi: spec.phi,
        sigma: spec.sigma,
        n_rays: grid.n_rays_d,
        region,
    })
}

/// Theoretical CIR of one cluster at the given ray density. An empty support
/// region gives a CIR without any component.
pub fn cluster_cir(
    config: &ClusterConfig,
    radio: &RadioParams,
    density: RayDensity,
) -> Result<TheoreticalCir> {
    let spec = solve_specular(&config.geometry)?;
    let region = support_region(&config.geometry, &spec);
    if region.empty {
        return Ok(TheoreticalCir {
            label: config.label.clone(),
            specular: None,
            rays: Vec::new(),
            t_sp: spec.l_sp / SPEED_OF_LIGHT,
            phi: spec.phi,
            sigma: spec.sigma,
            n_rays: 0,
            region,
        });
    }
    let grid = grid_for(&region, density)?;
    build_theoretical_cir(config, radio, &grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mpc {
    /// Bin index relative to the specular bin; positive towards positive
    /// `alpha`.
    pub bin: i64,
    /// Bin centre as an absolute AoA w.r.t. the RNR, degrees.
    pub angle_bin_center: f64,
    /// Bin centre delay relative to the specular ray, seconds.
    pub delay_bin_center: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub power_dbm: f64,
}

impl Mpc {
    pub fn offset(&self, delta_phi: f64) -> f64 {
        self.bin as f64 * delta_phi
    }

    pub fn power_mw(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCir {
    pub label: String,
    pub phi: f64,
    pub delta_phi: f64,
    pub delta_tau: f64,
    /// Surviving MPCs, ascending in bin index.
    pub mpcs: Vec<Mpc>,
    pub n_mpc: usize,
    /// Occupied bins before sensitivity pruning.
    pub n_bins: usize,
}

impl BinnedCir {
    pub fn peak(&self) -> Option<&Mpc> {
        self.mpcs
            .iter()
            .max_by(|a, b| a.power_dbm.total_cmp(&b.power_dbm))
    }

    pub fn total_power_mw(&self) -> f64 {
        self.mpcs.iter().map(Mpc::power_mw).sum()
    }
}

#[derive(Default)]
struct BinAcc {
    field: Complex64,
    energy: f64,
    delay_moment: f64,
}

/// Integral of `exp(j g u)` over `[u0, u1]`.
fn linear_phase_weight(g: f64, u0: f64, u1: f64) -> Complex64 {
    let width = u1 - u0;
    if (g * width).abs() < 1e-6 {
        Complex64::from_polar(width, g * 0.5 * (u0 + u1))
    } else {
        (Complex64::from_polar(1.0, g * u1) - Complex64::from_polar(1.0, g * u0))
            / Complex64::new(0.0, g)
    }
}

fn bin_index(offset: f64, delta_phi: f64) -> i64 {
    (offset / delta_phi + 0.5).floor() as i64
}

pub fn bin_cir(
    theo: &TheoreticalCir,
    delta_phi: f64,
    delta_tau: f64,
    p_rs_dbm: f64,
) -> Result<BinnedCir> {
    let mut bad = Vec::new();
    if !(delta_phi > 0.0 && delta_phi.is_finite()) {
        bad.push(format!("delta_phi must be positive, got {delta_phi}"));
    }
    if !(delta_tau > 0.0 && delta_tau.is_finite()) {
        bad.push(format!("delta_tau must be positive, got {delta_tau}"));
    }
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }

    let mut bins: BTreeMap<i64, BinAcc> = BTreeMap::new();
    if let (true, Some(sp)) = (theo.is_point(), &theo.specular) {
        let acc = bins.entry(0).or_default();
        acc.field = sp.phasor();
        acc.energy = sp.amplitude * sp.amplitude;
    } else {
        for ray in theo.components() {
            let [lo, hi] = ray.cell;
            if hi <= lo {
                continue;
            }
            let phasor = ray.phasor();
            let power = ray.amplitude * ray.amplitude;
            for k in bin_index(lo, delta_phi)..=bin_index(hi, delta_phi) {
                let a = lo.max((k as f64 - 0.5) * delta_phi);
                let b = hi.min((k as f64 + 0.5) * delta_phi);
                if b <= a {
                    continue;
                }
                let w = linear_phase_weight(ray.phase_slope, a - ray.alpha, b - ray.alpha);
                let acc = bins.entry(k).or_default();
                acc.field += phasor * w;
                acc.energy += power * (b - a);
                acc.delay_moment += power * (b - a) * ray.delay;
            }
        }
    }

    let n_bins = bins.len();
    let mpcs: Vec<Mpc> = bins
        .into_iter()
        .filter_map(|(k, acc)| {
            let amplitude = acc.field.norm();
            let power_dbm = amplitude_to_dbm(amplitude);
            if !(power_dbm >= p_rs_dbm) {
                return None;
            }
            let mean_delay = if acc.energy > 0.0 {
                acc.delay_moment / acc.energy
            } else {
                0.0
            };
            Some(Mpc {
                bin: k,
                angle_bin_center: theo.phi - k as f64 * delta_phi,
                delay_bin_center: (mean_delay / delta_tau).round() * delta_tau,
                amplitude,
                phase: wrap_360(acc.field.arg().to_degrees()),
                power_dbm,
            })
        })
        .collect();

    Ok(BinnedCir {
        label: theo.label.clone(),
        phi: theo.phi,
        delta_phi,
        delta_tau,
        n_mpc: mpcs.len(),
        mpcs,
        n_bins,
    })
}

/// Threshold-span spread of the surviving MPCs: distance between the outer
/// bin centres plus one bin.
pub fn angle_spread(binned: &BinnedCir) -> Result<f64> {
    let first = binned.mpcs.iter().map(|m| m.bin).min();
    let last = binned.mpcs.iter().map(|m| m.bin).max();
    match (first, last) {
        (Some(a), Some(b)) => Ok((b - a) as f64 * binned.delta_phi + binned.delta_phi),
        _ => Err(Error::EmptyCluster(binned.label.clone())),
    }
}

/// Threshold-span spread of the theoretical profile: the `alpha` range of
/// rays at or above `p_rs_dbm`.
pub fn ray_spread(theo: &TheoreticalCir, p_rs_dbm: f64) -> Result<f64> {
    let above = theo
        .components()
        .into_iter()
        .filter(|r| r.power_dbm >= p_rs_dbm)
        .map(|r| r.alpha);
    let (lo, hi) = above.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        (lo.min(a), hi.max(a))
    });
    if lo > hi {
        Err(Error::EmptyCluster(theo.label.clone()))
    } else {
        Ok(hi - lo)
    }
}
