//! Independent 2-D coordinate model of one reflector, used as a test oracle.
//!
//! The reflector is the line y = 0. The receiver sits at (0, h_r) and the
//! transmitter at (s, h_t). Everything is derived from vectors and line
//! intersections rather than from the closed-form expressions in the crate.

#![allow(dead_code)]

use mmw_cluster::geometry::ClusterGeometry;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type V2 = [f64; 2];

pub fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn norm(a: V2) -> f64 {
    a[0].hypot(a[1])
}

pub fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Unsigned angle between two vectors, degrees.
pub fn angle_between(a: V2, b: V2) -> f64 {
    cross(a, b).abs().atan2(dot(a, b)).to_degrees()
}

#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub s: f64,
    pub tx: V2,
    pub rx: V2,
    /// Specular point on the reflector.
    pub x_sp: f64,
    pub l_sp: f64,
    pub phi: f64,
    pub sigma: f64,
}

pub fn frame(d: f64, h_t: f64, h_r: f64) -> Frame {
    let s = (d * d - (h_t - h_r).powi(2)).sqrt();
    let tx = [s, h_t];
    let rx = [0.0, h_r];
    let rx_image = [0.0, -h_r];
    // Tx -> image line crossing y = 0
    let dir = sub(rx_image, tx);
    let t = -tx[1] / dir[1];
    let x_sp = tx[0] + t * dir[0];
    let down = [0.0, -1.0];
    Frame {
        s,
        tx,
        rx,
        x_sp,
        l_sp: norm(dir),
        phi: angle_between(down, sub([x_sp, 0.0], rx)),
        sigma: sub(tx, rx)[1].atan2(sub(tx, rx)[0]).to_degrees(),
    }
}

/// Receiver look direction for offset AoA `alpha`: rotated from the
/// specular direction towards the receiver foot for positive `alpha`.
pub fn look_dir(f: &Frame, alpha: f64) -> V2 {
    let beta = (f.phi - alpha).to_radians();
    [beta.sin(), -beta.cos()]
}

#[derive(Debug, Clone, Copy)]
pub struct OracleRay {
    pub point: V2,
    pub l1: f64,
    pub l2: f64,
    pub length: f64,
    /// Horizontal distance from the transmitter foot to the reflection
    /// point, positive towards the receiver.
    pub s1_prime: f64,
    pub grazing: f64,
}

/// Diffuse ray reaching the receiver at offset `alpha`; `None` when the
/// look direction never meets the reflector line.
pub fn ray(f: &Frame, alpha: f64) -> Option<OracleRay> {
    let dir = look_dir(f, alpha);
    if dir[1] >= 0.0 {
        return None;
    }
    let t = -f.rx[1] / dir[1];
    let point = [f.rx[0] + t * dir[0], 0.0];
    let l1 = norm(sub(point, f.rx));
    let to_tx = sub(f.tx, point);
    let l2 = norm(to_tx);
    Some(OracleRay {
        point,
        l1,
        l2,
        length: l1 + l2,
        s1_prime: f.tx[0] - point[0],
        grazing: 90.0 - angle_between([0.0, 1.0], to_tx),
    })
}

/// Whether offset `alpha` lies in the support region, decided by point tests
/// on the reflection point: it must exist, lie on the reflector side of the
/// Tx-Rx line, fall on the reflector and inside the transmit beam.
pub fn in_support(f: &Frame, g: &ClusterGeometry, alpha: f64) -> bool {
    let Some(r) = ray(f, alpha) else {
        return false;
    };
    let dir = look_dir(f, alpha);
    let los = sub(f.tx, f.rx);
    let up = [-los[1], los[0]];
    if dot(dir, up) > 0.0 {
        return false;
    }
    let x = r.point[0];
    if x < f.x_sp - g.l_pos.meters() || x > f.x_sp + g.l_neg.meters() {
        return false;
    }
    let axis = sub([f.x_sp, 0.0], f.tx);
    angle_between(axis, sub(r.point, f.tx)) <= g.theta_tx / 2.0
}

/// `|a - b| <= tol * max(|a|, |b|, scale)`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

pub fn random_geometry(rng: &mut ChaCha8Rng) -> ClusterGeometry {
    use mmw_cluster::geometry::{Extent, Side};
    loop {
        let h_t: f64 = rng.gen_range(0.2..10.0);
        let h_r = rng.gen_range(0.2..10.0);
        let d = rng.gen_range(0.5..40.0);
        if d <= (h_t - h_r).abs() * 1.001 + 1e-3 {
            continue;
        }
        let mut extent = || {
            if rng.gen_bool(0.3) {
                Extent::UNBOUNDED
            } else {
                Extent::Finite(rng.gen_range(0.0..20.0))
            }
        };
        let l_neg = extent();
        let l_pos = extent();
        let theta_tx = if rng.gen_bool(0.1) {
            rng.gen_range(180.0..=360.0)
        } else {
            rng.gen_range(1.0..180.0)
        };
        return ClusterGeometry {
            d,
            h_t,
            h_r,
            l_neg,
            l_pos,
            theta_tx,
            side: if rng.gen_bool(0.5) { Side::Left } else { Side::Right },
        };
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SweepCounts {
    pub rays: usize,
    pub memberships: usize,
    /// Sweep points inside the support region.
    pub inside: usize,
    /// Reflection points behind the receiver foot (alpha > phi).
    pub past_receiver: usize,
    /// Reflection points beyond the transmitter foot (s1' < 0).
    pub past_transmitter: usize,
    pub empty_regions: usize,
}

/// Compares the crate against the oracle for one geometry on a 1 degree
/// sweep. Returns the first mismatch.
pub fn check_geometry(g: &ClusterGeometry, tol: f64, counts: &mut SweepCounts) -> Result<(), String> {
    use mmw_cluster::geometry::{diffuse_path, solve_specular, support_region};
    use mmw_cluster::propagation::grazing_angle;

    let f = frame(g.d, g.h_t, g.h_r);
    let sol = solve_specular(g).map_err(|e| e.to_string())?;
    let scale = g.d.max(g.h_t).max(g.h_r);
    let checks = [
        ("s", sol.s, f.s, scale),
        ("l_sp", sol.l_sp, f.l_sp, scale),
        ("s2", sol.s2, f.x_sp, scale),
        ("s1", sol.s1, f.s - f.x_sp, scale),
        ("phi", sol.phi, f.phi, 90.0),
        ("sigma", sol.sigma, f.sigma, 90.0),
    ];
    for (name, got, want, sc) in checks {
        if !close(got, want, tol, sc) {
            return Err(format!("{name}: {got} vs oracle {want} for {g:?}"));
        }
    }

    let region = support_region(g, &sol);
    if region.empty {
        counts.empty_regions += 1;
    }
    let start = (sol.phi - 89.0).ceil() as i64;
    let end = (sol.phi + 89.0).floor() as i64;
    for a in start..=end {
        let alpha = a as f64;
        let Some(o) = ray(&f, alpha) else { continue };
        let p = diffuse_path(g, &sol, alpha).map_err(|e| format!("alpha {alpha}: {e}"))?;
        let sc = scale.max(o.length);
        let pairs = [
            ("l_dif", p.l_dif, o.length),
            ("l1", p.l1, o.l1),
            ("l2", p.l2, o.l2),
            ("reflection point", p.s2_prime, o.point[0]),
            ("s1'", p.s1_prime, o.s1_prime),
        ];
        for (name, got, want) in pairs {
            if !close(got, want, tol, sc) {
                return Err(format!("{name} at alpha {alpha}: {got} vs oracle {want} for {g:?}"));
            }
        }
        let theta = grazing_angle(g.h_t, p.s1_prime);
        if !close(theta, o.grazing, tol, 90.0) {
            return Err(format!("grazing at alpha {alpha}: {theta} vs oracle {} for {g:?}", o.grazing));
        }
        counts.rays += 1;
        if o.point[0] < 0.0 {
            counts.past_receiver += 1;
        }
        if o.s1_prime < 0.0 {
            counts.past_transmitter += 1;
        }

        // membership, skipping points that sit on a boundary
        let near_edge = (alpha - region.alpha_minus).abs() < 1e-7
            || (alpha - region.alpha_plus).abs() < 1e-7;
        if !near_edge {
            let got = region.contains(alpha);
            let want = in_support(&f, g, alpha);
            if got != want {
                return Err(format!(
                    "membership at alpha {alpha}: crate {got}, oracle {want}, region [{}, {}] for {g:?}",
                    region.alpha_minus, region.alpha_plus
                ));
            }
            counts.memberships += 1;
            counts.inside += got as usize;
        }
    }

    // the crate's boundaries are where the oracle flips
    if !region.empty && region.width() > 1e-5 {
        let h = 1e-7 * (1.0 + region.alpha_minus.abs().max(region.alpha_plus.abs()));
        let edges = [
            (region.alpha_minus + h, true),
            (region.alpha_minus - h, false),
            (region.alpha_plus - h, true),
            (region.alpha_plus + h, false),
        ];
        for (alpha, want) in edges {
            if in_support(&f, g, alpha) != want {
                return Err(format!(
                    "boundary near alpha {alpha}: oracle says {}, region [{}, {}] for {g:?}",
                    !want, region.alpha_minus, region.alpha_plus
                ));
            }
        }
    }
    Ok(())
}
