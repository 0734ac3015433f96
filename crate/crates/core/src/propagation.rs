//! Per-ray electromagnetic bookkeeping: grazing and scatter angles, the
//! directive scattering lobe, and the free-space, reflection and scattering
//! losses that turn a ray path into a received power and phase.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rays whose directive pattern falls below this are dropped.
pub const MIN_PATTERN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Relative permittivity, real.
    pub eps_r: f64,
    /// Surface-height standard deviation, metres.
    pub sigma_h: f64,
    /// Directive pattern order.
    pub m: f64,
}

impl Material {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.eps_r.is_finite() && self.eps_r >= 1.0) {
            out.push(format!("eps_r must be >= 1, got {}", self.eps_r));
        }
        if !(self.sigma_h.is_finite() && self.sigma_h >= 0.0) {
            out.push(format!("sigma_h must be >= 0, got {}", self.sigma_h));
        }
        if !(self.m.is_finite() && self.m >= 1.0) {
            out.push(format!("m must be >= 1, got {}", self.m));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub p_t_dbm: f64,
    pub g_t_db: f64,
    pub g_r_db: f64,
    pub f_c_hz: f64,
    pub polarization: Polarization,
    /// Receiver sensitivity.
    pub p_rs_dbm: f64,
}

impl RadioParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c_hz
    }

    pub fn eirp_dbm(&self) -> f64 {
        self.p_t_dbm + self.g_t_db + self.g_r_db
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.f_c_hz.is_finite() && self.f_c_hz > 0.0) {
            out.push(format!("f_c must be positive, got {}", self.f_c_hz));
        }
        for (name, v) in [
            ("p_t", self.p_t_dbm),
            ("g_t", self.g_t_db),
            ("g_r", self.g_r_db),
            ("p_rs", self.p_rs_dbm),
        ] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite, got {v}"));
            }
        }
        out
    }
}

/// Grazing angle of the incident ray, degrees in (0, 90].
pub fn grazing_angle(h_t: f64, s1_prime: f64) -> f64 {
    h_t.atan2(s1_prime.abs()).to_degrees()
}

/// Angle between the ray's own specular reflection and the direction it
/// actually leaves towards the receiver, degrees, clockwise positive.
///
/// A reflection point past the transmitter foot (`s1_prime < 0`) sends the
/// ray's specular reflection away from the receiver; the plain formula then
/// measures the wrong supplement and is corrected by `2 (90 - theta)`.
pub fn scatter_offset(phi: f64, alpha: f64, theta: f64, s1_prime: f64) -> f64 {
    let arrival = phi - alpha;
    if s1_prime < 0.0 {
        theta - 90.0 - arrival
    } else {
        90.0 - arrival - theta
    }
}

pub fn directive_pattern(psi: f64, m: f64) -> f64 {
    ((1.0 + psi.to_radians().cos()) / 2.0).powf(m)
}

/// Fresnel reflection coefficient at grazing angle `theta` (degrees).
pub fn fresnel(theta: f64, eps_r: f64, polarization: Polarization) -> Result<Complex64> {
    if !(eps_r >= 1.0) {
        return Err(Error::InvalidMaterial(format!(
            "relative permittivity {eps_r} is below 1"
        )));
    }
    let (sin, cos) = theta.to_radians().sin_cos();
    let root = Complex64::new(eps_r - cos * cos, 0.0).sqrt();
    let gamma = match polarization {
        Polarization::Vertical => (-eps_r * sin + root) / (eps_r * sin + root),
        Polarization::Horizontal => (sin - root) / (sin + root),
    };
    Ok(gamma)
}

/// Linear reflection loss `1 / |gamma|^2`.
pub fn reflection_loss(gamma: Complex64) -> Result<f64> {
    let mag2 = gamma.norm_sqr();
    if mag2 == 0.0 {
        return Err(Error::TotalAbsorption);
    }
    Ok(1.0 / mag2)
}

/// Rayleigh roughness factor for the coherent component.
pub fn roughness_factor(theta: f64, sigma_h: f64, wavelength: f64) -> f64 {
    let g = 4.0 * std::f64::consts::PI * sigma_h / wavelength * theta.to_radians().sin();
    (-0.5 * g * g).exp()
}

/// Linear scattering loss `(1 / (rho_s rho))^2`.
pub fn scattering_loss(rho_s: f64, rho: f64) -> Result<f64> {
    if rho < MIN_PATTERN || rho_s <= 0.0 {
        return Err(Error::ZeroPattern(rho * rho_s));
    }
    let r = 1.0 / (rho_s * rho);
    Ok(r * r)
}

/// Free-space spreading as a linear attenuation `(4 pi l / lambda)^2`.
pub fn free_space_loss(length: f64, wavelength: f64) -> f64 {
    let r = 4.0 * std::f64::consts::PI * length / wavelength;
    r * r
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Received power in dBm and amplitude `sqrt(P)` with `P` in milliwatts.
pub fn ray_power(radio: &RadioParams, fspl: f64, refl: f64, scat: f64) -> (f64, f64) {
    let power_dbm = radio.eirp_dbm() - to_db(fspl) - to_db(refl) - to_db(scat);
    (power_dbm, dbm_to_amplitude(power_dbm))
}

pub fn dbm_to_amplitude(power_dbm: f64) -> f64 {
    10f64.powf(power_dbm / 20.0)
}

pub fn amplitude_to_dbm(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

/// Phase of a ray relative to the specular ray, degrees in `[0, 360)`.
pub fn ray_phase(
    length: f64,
    l_sp: f64,
    wavelength: f64,
    gamma: Complex64,
    gamma_sp: Complex64,
) -> f64 {
    let path = 360.0 * (length - l_sp) / wavelength;
    let refl = gamma.arg().to_degrees() - gamma_sp.arg().to_degrees();
    wrap_360(path + refl)
}

pub fn wrap_360(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Everything the ray pipeline derives for one reflection point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPropagation {
    pub theta: f64,
    pub psi: f64,
    pub rho: f64,
    pub rho_s: f64,
    pub gamma: Complex64,
    pub fspl: f64,
    pub refl: f64,
    pub scat: f64,
    pub power_dbm: f64,
    pub amplitude: f64,
}

/// Runs grazing angle, scatter offset and the three losses for one ray.
pub fn propagate(
    radio: &RadioParams,
    material: &Material,
    h_t: f64,
    phi: f64,
    alpha: f64,
    length: f64,
    s1_prime: f64,
) -> Result<RayPropagation> {
    let lambda = radio.wavelength();
    let theta = grazing_angle(h_t, s1_prime);
    let psi = scatter_offset(phi, alpha, theta, s1_prime);
    let rho = directive_pattern(psi, material.m);
    let rho_s = roughness_factor(theta, material.sigma_h, lambda);
    let gamma = fresnel(theta, material.eps_r, radio.polarization)?;
    let refl = reflection_loss(gamma)?;
    let scat = scattering_loss(rho_s, rho)?;
    let fspl = free_space_loss(length, lambda);
    let (power_dbm, amplitude) = ray_power(radio, fspl, refl, scat);
    Ok(RayPropagation {
        theta,
        psi,
        rho,
        rho_s,
        gamma,
        fspl,
        refl,
        scat,
        power_dbm,
        amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn radio() -> RadioParams {
        RadioParams {
            p_t_dbm: 25.0,
            g_t_db: 6.7,
            g_r_db: 29.0,
            f_c_hz: 60e9,
            polarization: Polarization::Horizontal,
            p_rs_dbm: -60.0,
        }
    }

    #[test]
    fn grazing_angle_limits() {
        assert_relative_eq!(grazing_angle(3.0, 3.0), 45.0, epsilon = 1e-12);
        assert_eq!(grazing_angle(3.0, 0.0), 90.0);
        assert_relative_eq!(grazing_angle(3.0, -3.0), 45.0, epsilon = 1e-12);
    }

    #[test]
    fn specular_scatter_offset_is_zero() {
        let phi: f64 = 12.3;
        assert_relative_eq!(scatter_offset(phi, 0.0, 90.0 - phi, 1.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn behind_receiver_normal_spreads_past_ninety() {
        // reflection point behind the RNR: alpha > phi
        let (phi, alpha, theta) = (20.0, 35.0, 40.0);
        let psi = scatter_offset(phi, alpha, theta, 5.0);
        assert!(psi > 0.0);
        assert!(theta + psi > 90.0);
    }

    #[test]
    fn pattern_values() {
        for m in [1.0, 17.0, 35.0] {
            assert_eq!(directive_pattern(0.0, m), 1.0);
            assert!(directive_pattern(180.0, m) < 1e-30);
        }
        assert_relative_eq!(directive_pattern(60.0, 17.0), 0.75f64.powi(17), epsilon = 1e-15);
        assert!((directive_pattern(60.0, 17.0) - 7.5e-3).abs() < 1e-4);
    }

    #[test]
    fn fresnel_normal_incidence() {
        let g = fresnel(90.0, 2.9, Polarization::Horizontal).unwrap();
        let expect = (1.0 - 2.9f64.sqrt()) / (1.0 + 2.9f64.sqrt());
        assert_relative_eq!(g.re, expect, epsilon = 1e-12);
        assert_eq!(g.im, 0.0);
        assert!((g.re + 0.260).abs() < 1e-3);
        let r = reflection_loss(g).unwrap();
        assert_relative_eq!(r, 1.0 / (expect * expect), epsilon = 1e-12);
        assert!((r - 14.8).abs() < 0.1);
        assert!((to_db(r) - 11.7).abs() < 0.05);
    }

    #[test]
    fn fresnel_grazing_limit() {
        let g = fresnel(1e-6, 7.5, Polarization::Horizontal).unwrap();
        assert!((g.re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn fresnel_rejects_low_permittivity() {
        assert!(matches!(
            fresnel(30.0, 0.5, Polarization::Vertical),
            Err(Error::InvalidMaterial(_))
        ));
    }

    #[test]
    fn brewster_minimum_for_vertical() {
        let mags: Vec<f64> = (1..900)
            .map(|i| fresnel(i as f64 * 0.1, 4.0, Polarization::Vertical).unwrap().norm())
            .collect();
        let (imin, _) = mags
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert!(imin > 0 && imin < mags.len() - 1);
        // tan(theta_B) = 1/sqrt(eps) in grazing terms
        let theta_b = (1.0 / 2.0f64).atan().to_degrees();
        assert!(((imin + 1) as f64 * 0.1 - theta_b).abs() < 0.2);
    }

    #[test]
    fn reflection_loss_values() {
        assert_eq!(reflection_loss(Complex64::new(-1.0, 0.0)).unwrap(), 1.0);
        let r = reflection_loss(Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(r, 4.0);
        assert!((to_db(r) - 6.02).abs() < 0.01);
        assert_eq!(reflection_loss(Complex64::new(0.0, 0.0)), Err(Error::TotalAbsorption));
    }

    #[test]
    fn roughness_values() {
        let lambda = SPEED_OF_LIGHT / 60e9;
        assert_eq!(roughness_factor(37.0, 0.0, lambda), 1.0);
        let g = 4.0 * std::f64::consts::PI * 0.3e-3 / lambda;
        assert_relative_eq!(
            roughness_factor(90.0, 0.3e-3, lambda),
            (-0.5 * g * g).exp(),
            epsilon = 1e-14
        );
        assert!((roughness_factor(90.0, 0.3e-3, lambda) - 0.753).abs() < 1e-3);
        assert!(roughness_factor(90.0, 0.3e-3, lambda) <= roughness_factor(10.0, 0.3e-3, lambda));
    }

    #[test]
    fn scattering_loss_values() {
        assert_eq!(scattering_loss(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(scattering_loss(1.0, 0.5).unwrap(), 4.0);
        let s = scattering_loss(0.753, 1.0).unwrap();
        assert!((s - 1.764).abs() < 1e-3);
        assert!((to_db(s) - 2.47).abs() < 0.01);
        assert!(matches!(scattering_loss(1.0, 0.0), Err(Error::ZeroPattern(_))));
    }

    #[test]
    fn free_space_values() {
        let lambda = SPEED_OF_LIGHT / 60e9;
        let unit = lambda / (4.0 * std::f64::consts::PI);
        assert_relative_eq!(free_space_loss(unit, lambda), 1.0, epsilon = 1e-12);
        assert!((to_db(free_space_loss(11.56, lambda)) - 89.3).abs() < 0.05);
        let doubled = to_db(free_space_loss(8.0, lambda)) - to_db(free_space_loss(4.0, lambda));
        assert_relative_eq!(doubled, 20.0 * 2f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn ray_power_is_additive_in_db() {
        let r = radio();
        let (p0, a0) = ray_power(&r, 1.0, 1.0, 1.0);
        assert_relative_eq!(p0, 60.7, epsilon = 1e-12);
        assert_relative_eq!(a0 * a0, 10f64.powf(6.07), max_relative = 1e-12);
        let base = ray_power(&r, 1e9, 10.0, 2.0).0;
        let bumped = ray_power(&r, 1e9, 10.0 * 10f64.powf(0.3), 2.0).0;
        assert_relative_eq!(base - bumped, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_references() {
        let lambda = 0.005;
        let g = Complex64::new(-0.3, 0.0);
        assert_eq!(ray_phase(10.0, 10.0, lambda, g, g), 0.0);
        assert_relative_eq!(ray_phase(10.0 + lambda / 2.0, 10.0, lambda, g, g), 180.0, epsilon = 1e-6);
        let pos = Complex64::new(0.3, 0.0);
        assert_relative_eq!(ray_phase(10.0, 10.0, lambda, g, pos), 180.0, epsilon = 1e-12);
    }

    #[test]
    fn specular_ray_identity() {
        let r = radio();
        let mat = Material { eps_r: 2.9, sigma_h: 0.3e-3, m: 17.0 };
        let phi: f64 = 12.26;
        let h_t = 7.1;
        let s1 = h_t * phi.to_radians().tan();
        let p = propagate(&r, &mat, h_t, phi, 0.0, 11.56, s1).unwrap();
        assert_relative_eq!(p.theta, 90.0 - phi, epsilon = 1e-9);
        assert!(p.psi.abs() < 1e-9);
        assert_relative_eq!(p.rho, 1.0, epsilon = 1e-15);
        assert!(p.power_dbm > r.p_rs_dbm);
    }
}
