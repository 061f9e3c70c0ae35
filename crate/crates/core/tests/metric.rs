use std::f64::consts::PI;

use sgeo_core::geometries::{circle, interval, torus, TorusVariant};
use sgeo_core::metric::*;
use sgeo_core::{TruncatedTriple, Verdict, C64};

fn circ(l: usize) -> TruncatedTriple {
    circle(l, 1.0).unwrap().triple
}

#[test]
fn coincident_points() {
    let t = circ(16);
    let d = connes_distance(&[1.0], &[1.0], &t, 50).unwrap();
    assert_eq!(d.lower_bound, 0.0);
    assert!(d.converged);
}

#[test]
fn circle_quarter_turn_converges() {
    let target = PI / 2.0;
    let ratios: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&l| {
            let d = connes_distance(&[0.0], &[target], &circ(l), 100).unwrap();
            assert!(d.constraint_slack >= -1e-9, "witness infeasible: {}", d.constraint_slack);
            d.lower_bound / target
        })
        .collect();
    // a feasible witness never beats the geodesic distance
    assert!(ratios.iter().all(|&r| r <= 1.0 + 1e-9), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios[2] >= 0.97, "{ratios:?}");
}

#[test]
fn symmetric_in_endpoints() {
    let t = circ(32);
    let a = connes_distance(&[0.3], &[2.0], &t, 50).unwrap().lower_bound;
    let b = connes_distance(&[2.0], &[0.3], &t, 50).unwrap().lower_bound;
    assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
}

#[test]
fn doubling_dirac_halves_distance() {
    let t = circ(32);
    let mut parts = t.clone().into_parts();
    parts.dirac = parts.dirac.scale_real(2.0);
    parts.clifford.iter_mut().for_each(|g| *g *= C64::new(2.0, 0.0));
    let doubled = TruncatedTriple::new(parts).unwrap();
    let a = connes_distance(&[0.0], &[1.0], &t, 50).unwrap().lower_bound;
    let b = connes_distance(&[0.0], &[1.0], &doubled, 50).unwrap().lower_bound;
    assert!((a - 2.0 * b).abs() <= 1e-6 * a, "{a} vs 2·{b}");
}

#[test]
fn torus_short_hop() {
    let t = torus(2, 16, TorusVariant::Dirac, 1.0).unwrap().triple;
    let d = connes_distance(&[0.0, 0.0], &[0.1, 0.0], &t, 40).unwrap();
    assert!(d.lower_bound >= 0.95 * 0.1, "{}", d.lower_bound);
    assert!(d.lower_bound <= 0.1 + 1e-9);
}

#[test]
fn interval_unsupported() {
    let t = interval(16).unwrap().triple;
    assert!(connes_distance(&[0.1], &[0.5], &t, 10).is_err());
    assert!(propagation(&t, 0.1).is_err());
}

#[test]
fn witness_band_choice() {
    assert_eq!(witness_band(&circ(32)), 32);
    assert_eq!(witness_band(&torus(2, 8, TorusVariant::Dirac, 1.0).unwrap().triple), 4);
}

#[test]
fn kernel_at_time_zero_is_identity() {
    let t = circ(32);
    let k = position_kernel(&t, 0.0, 5).unwrap();
    for (i, m) in k.iter().enumerate() {
        let want = if i == 5 { 1.0 } else { 0.0 };
        assert!((m - want).abs() < 1e-12, "{i}: {m}");
    }
}

#[test]
fn leakage_small_and_refines() {
    let coarse = propagation(&circ(64), 0.3).unwrap();
    let fine = propagation(&circ(128), 0.3).unwrap();
    assert!(fine.leakage <= 0.01);
    assert!(fine.leakage < coarse.leakage, "{} vs {}", fine.leakage, coarse.leakage);
}

#[test]
fn propagation_check_circle() {
    let t = circ(64);
    let r = finite_propagation_check(&t, &[0.0, 0.3, 0.6, 1.0]);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let radii = &r.series["radius99"];
    assert!(radii.windows(2).all(|w| w[1] >= w[0]), "{radii:?}");
}

#[test]
fn propagation_check_torus() {
    let t = torus(2, 16, TorusVariant::Dirac, 1.0).unwrap().triple;
    let r = finite_propagation_check(&t, &[0.0, 0.05, 0.1]);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn margin_shrinks_with_cutoff() {
    assert!(smearing_margin(&circ(128)) < smearing_margin(&circ(64)));
    let ratio = smearing_margin(&circ(64)) / smearing_margin(&circ(256));
    assert!((ratio - 2.0).abs() < 1e-12);
}
