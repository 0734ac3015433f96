//! Basic geometric model of a single first-order reflection.
//!
//! The reflector is a straight line. The receiver stands `h_r` metres from it
//! and the transmitter `h_t` metres from it; their feet on the reflector are
//! `s` metres apart. Angles at the receiver are measured from the reflector
//! normal through the receiver (RNR). The offset AoA `alpha` of a diffuse ray
//! is its deviation from the specular AoA `phi`, so the ray arrives at
//! `phi - alpha` from the normal. Positive `alpha` moves the reflection point
//! towards (and past) the receiver foot; negative `alpha` moves it towards
//! (and past) the transmitter foot.
//!
//! All public angles are in degrees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing offset AoAs against support bounds.
pub const ALPHA_EPS: f64 = 1e-9;

/// Reflector extent on one side of the specular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Finite(f64),
    Unbounded(UnboundedTag),
}

/// Serialized form of [`Extent::Unbounded`]: the literal string `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnboundedTag {
    Unbounded,
}

impl Extent {
    pub const UNBOUNDED: Extent = Extent::Unbounded(UnboundedTag::Unbounded);

    /// Length in metres, `f64::INFINITY` when unbounded.
    pub fn meters(self) -> f64 {
        match self {
            Extent::Finite(v) => v,
            Extent::Unbounded(_) => f64::INFINITY,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Extent::Unbounded(_))
    }
}

impl From<f64> for Extent {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            Extent::UNBOUNDED
        } else {
            Extent::Finite(v)
        }
    }
}

/// Which side of the LOS line (seen from the receiver) the reflector is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGeometry {
    /// Tx-Rx distance, metres.
    pub d: f64,
    /// Transmitter to reflector line, metres.
    pub h_t: f64,
    /// Receiver to reflector line, metres.
    pub h_r: f64,
    /// Reflector extent on the negative-alpha (transmitter) side.
    pub l_neg: Extent,
    /// Reflector extent on the positive-alpha (receiver) side.
    pub l_pos: Extent,
    /// Transmit beamwidth, degrees.
    pub theta_tx: f64,
    pub side: Side,
}

impl ClusterGeometry {
    /// Lists every violated invariant; empty when the geometry is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.d) {
            out.push(format!("d must be a positive length, got {}", self.d));
        }
        if !finite_pos(self.h_t) {
            out.push(format!("h_t must be a positive length, got {}", self.h_t));
        }
        if !finite_pos(self.h_r) {
            out.push(format!("h_r must be a positive length, got {}", self.h_r));
        }
        for (name, ext) in [("l_neg", self.l_neg), ("l_pos", self.l_pos)] {
            if let Extent::Finite(v) = ext {
                if !(v.is_finite() && v >= 0.0) {
                    out.push(format!("{name} must be non-negative, got {v}"));
                }
            }
        }
        if !(self.theta_tx > 0.0 && self.theta_tx <= 360.0) {
            out.push(format!(
                "theta_tx must lie in (0, 360] degrees, got {}",
                self.theta_tx
            ));
        }
        if out.is_empty() && self.d <= (self.h_t - self.h_r).abs() {
            out.push(format!(
                "d = {} must exceed |h_t - h_r| = {}",
                self.d,
                (self.h_t - self.h_r).abs()
            ));
        }
        out
    }

    /// Same scene with transmitter and receiver swapped.
    pub fn mirrored(&self) -> Self {
        Self {
            h_t: self.h_r,
            h_r: self.h_t,
            l_neg: self.l_pos,
            l_pos: self.l_neg,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecularSolution {
    /// Distance between the two reflector normals (RNT to RNR).
    pub s: f64,
    pub l_sp: f64,
    /// Specular AoA w.r.t. the RNR, degrees.
    pub phi: f64,
    /// Signed tilt of the Tx-Rx line w.r.t. the reflector, degrees.
    pub sigma: f64,
    /// Reflection point to receiver.
    pub d1: f64,
    /// Reflection point to transmitter.
    pub d2: f64,
    /// Reflection point to RNT.
    pub s1: f64,
    /// Reflection point to RNR.
    pub s2: f64,
}

pub fn solve_specular(geom: &ClusterGeometry) -> Result<SpecularSolution> {
    let ClusterGeometry { d, h_t, h_r, .. } = *geom;
    let gap = (h_t - h_r).abs();
    if !(d > gap) {
        return Err(Error::DegenerateGeometry { d, gap });
    }
    let s = (d * d - gap * gap).sqrt();
    let l_sp = s.hypot(h_t + h_r);
    let phi = ((h_t + h_r) / l_sp).acos();
    let sigma = ((h_t - h_r) / d).asin();
    let d1 = h_r * l_sp / (h_t + h_r);
    Ok(SpecularSolution {
        s,
        l_sp,
        phi: phi.to_degrees(),
        sigma: sigma.to_degrees(),
        d1,
        d2: l_sp - d1,
        s1: h_t * phi.tan(),
        s2: d1 * phi.sin(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusePath {
    pub l_dif: f64,
    /// Reflection point to receiver.
    pub l1: f64,
    /// Reflection point to transmitter.
    pub l2: f64,
    /// Signed distance from the reflection point to the RNT; negative past
    /// the transmitter foot.
    pub s1_prime: f64,
    /// Signed distance from the reflection point to the RNR; negative past
    /// the receiver foot.
    pub s2_prime: f64,
}

/// Path of the diffuse ray arriving at offset AoA `alpha`.
///
/// No support-region check is done here; see [`diffuse_path_in_support`].
pub fn diffuse_path(
    geom: &ClusterGeometry,
    spec: &SpecularSolution,
    alpha: f64,
) -> Result<DiffusePath> {
    let off = spec.phi - alpha;
    if !(off.abs() < 90.0) {
        return Err(Error::NonPhysical(off.abs()));
    }
    let x = off.to_radians();
    let l1 = geom.h_r / x.cos();
    let s2_prime = l1 * x.sin();
    let s1_prime = spec.s - s2_prime;
    let l2 = geom.h_t.hypot(s1_prime);
    Ok(DiffusePath {
        l_dif: l1 + l2,
        l1,
        l2,
        s1_prime,
        s2_prime,
    })
}

pub fn diffuse_path_in_support(
    geom: &ClusterGeometry,
    spec: &SpecularSolution,
    region: &SupportRegion,
    alpha: f64,
) -> Result<DiffusePath> {
    if !region.contains(alpha) {
        return Err(Error::OutOfSupport {
            alpha,
            lo: region.alpha_minus,
            hi: region.alpha_plus,
        });
    }
    diffuse_path(geom, spec, alpha)
}

/// Derivative of the diffuse path length with respect to `alpha`, metres per
/// degree. Zero at the specular point.
pub fn path_length_slope(geom: &ClusterGeometry, spec: &SpecularSolution, alpha: f64) -> f64 {
    let x = (spec.phi - alpha).to_radians();
    let cos = x.cos();
    let s1p = spec.s - geom.h_r * x.tan();
    let l2 = geom.h_t.hypot(s1p);
    // dl/dx = h_r / cos^2 x * (sin x - s1'/l2), and dx/dalpha = -1.
    let dl_dx = geom.h_r / (cos * cos) * (x.sin() - s1p / l2);
    -dl_dx * std::f64::consts::PI / 180.0
}

/// Transmitter- and receiver-side lengths of the visible region, metres.
/// Either may be `f64::INFINITY`.
pub fn visible_region(geom: &ClusterGeometry, spec: &SpecularSolution) -> (f64, f64) {
    let half = geom.theta_tx / 2.0;
    // Beam edge on the transmitter side, measured from the RNT towards the
    // receiver; negative when the edge crosses the RNT.
    let inner = spec.phi - half;
    let l_t = if inner <= -90.0 {
        f64::INFINITY
    } else {
        spec.s1 - geom.h_t * inner.to_radians().tan()
    };
    let outer = spec.phi + half;
    let l_r = if outer >= 90.0 {
        f64::INFINITY
    } else {
        geom.h_t * outer.to_radians().tan() - spec.s1
    };
    (l_t.min(geom.l_neg.meters()), l_r.min(geom.l_pos.meters()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportRegion {
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    /// May be infinite.
    #[serde(serialize_with = "finite_or_null")]
    pub w_t: f64,
    /// May be infinite.
    #[serde(serialize_with = "finite_or_null")]
    pub w_r: f64,
    pub empty: bool,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        ser.serialize_f64(*v)
    } else {
        ser.serialize_none()
    }
}

impl SupportRegion {
    pub fn width(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.alpha_plus - self.alpha_minus
        }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        !self.empty
            && alpha >= self.alpha_minus - ALPHA_EPS
            && alpha <= self.alpha_plus + ALPHA_EPS
    }

    /// Only the specular ray is reachable.
    pub fn is_point(&self) -> bool {
        !self.empty && self.width() <= ALPHA_EPS
    }
}

pub fn support_region(geom: &ClusterGeometry, spec: &SpecularSolution) -> SupportRegion {
    let (w_t, w_r) = visible_region(geom, spec);
    let phi = spec.phi;
    let hr = geom.h_r;
    let foot = spec.d1 * phi.to_radians().sin();
    let alpha_neg = phi - ((foot + w_t) / hr).atan().to_degrees();
    let alpha_pos = phi - ((foot - w_r) / hr).atan().to_degrees();
    let (lo_geo, hi_geo) = if geom.h_t >= geom.h_r {
        (phi - 90.0, phi - spec.sigma + 90.0)
    } else {
        (phi - spec.sigma - 90.0, phi + 90.0)
    };
    let alpha_minus = lo_geo.max(alpha_neg);
    let alpha_plus = hi_geo.min(alpha_pos);
    SupportRegion {
        alpha_minus,
        alpha_plus,
        w_t,
        w_r,
        empty: alpha_minus > alpha_plus,
    }
}
