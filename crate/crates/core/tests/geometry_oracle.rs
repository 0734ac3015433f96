mod common;

use approx::assert_abs_diff_eq;
use common::{check_geometry, frame, random_geometry, SweepCounts};
use mmw_cluster::geometry::{
    diffuse_path, solve_specular, support_region, ClusterGeometry, Extent, Side,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn geom(d: f64, h_t: f64, h_r: f64) -> ClusterGeometry {
    ClusterGeometry {
        d,
        h_t,
        h_r,
        l_neg: Extent::UNBOUNDED,
        l_pos: Extent::UNBOUNDED,
        theta_tx: 45.0,
        side: Side::Right,
    }
}

#[test]
fn blackboard_row_matches_coordinates() {
    let f = frame(3.8, 6.1, 3.5);
    assert_abs_diff_eq!(f.phi, 16.1, epsilon = 0.05);
    assert_abs_diff_eq!(f.sigma, 43.2, epsilon = 0.05);
    let sol = solve_specular(&geom(3.8, 6.1, 3.5)).unwrap();
    assert_abs_diff_eq!(sol.phi, f.phi, epsilon = 1e-12);
    assert_abs_diff_eq!(sol.sigma, f.sigma, epsilon = 1e-12);
}

#[test]
fn randomized_sweeps_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts = SweepCounts::default();
    for _ in 0..300 {
        let g = random_geometry(&mut rng);
        check_geometry(&g, 1e-9, &mut counts).unwrap();
    }
    assert!(counts.past_receiver > 0 && counts.past_transmitter > 0, "{counts:?}");
    assert!(counts.inside > 0 && counts.inside < counts.memberships, "{counts:?}");
}

#[test]
fn delay_is_asymmetric_in_alpha() {
    for (h_t, h_r) in [(8.0, 6.0), (6.0, 8.0), (10.0, 2.0)] {
        let g = geom(35.0, h_t, h_r);
        let sol = solve_specular(&g).unwrap();
        let region = support_region(&g, &sol);
        let a = 0.5 * region.alpha_plus.min(-region.alpha_minus);
        let plus = diffuse_path(&g, &sol, a).unwrap().l_dif;
        let minus = diffuse_path(&g, &sol, -a).unwrap().l_dif;
        assert!((plus - minus).abs() > 1e-6, "{h_t} {h_r}: {plus} {minus}");
        assert!(plus > sol.l_sp && minus > sol.l_sp);
    }
}
