use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgeo_core::dixmier::{dixmier_estimate, Cutoff};
use sgeo_core::geometries::circle;
use sgeo_core::spectral::{rank_bound_constant, singular_profile};
use sgeo_core::triple::Element;
use sgeo_core::voiculescu::*;
use sgeo_core::report::linear_fit;
use sgeo_core::{MatrixOperator, TruncatedTriple, Verdict, C64};

fn circ(l: usize) -> TruncatedTriple {
    circle(l, 1.0).unwrap().triple
}

fn eps_sweep() -> Vec<f64> {
    (0..10).map(|i| 0.5 * (0.02f64 / 0.5).powf(i as f64 / 9.0)).collect()
}

fn arc(center: f64, len: f64) -> impl Fn(&[f64]) -> bool {
    move |x: &[f64]| {
        let d = (x[0] - center).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= len / 2.0
    }
}

fn operator_element(t: &TruncatedTriple, op: MatrixOperator) -> Element {
    Element { op, symbol: vec![C64::new(0.0, 0.0); t.grid_len()] }
}

/// Rank-3 projection onto random mixtures of the D-eigenvectors with |n| <= 4.
fn mixed_projection(t: &TruncatedTriple, seed: u64) -> MatrixOperator {
    let eig = t.dirac_eigen();
    let low: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k].abs() <= 4.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for _ in 0..3 {
        let mut v = vec![C64::new(0.0, 0.0); t.hilbert_dim()];
        for &k in &low {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for (x, y) in v.iter_mut().zip(eig.vector(k)) {
                *x += c * y;
            }
        }
        for b in &basis {
            let ip: C64 = b.iter().zip(&v).map(|(a, c)| a.conj() * c).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= ip * y);
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    MatrixOperator::from_fn(t.hilbert_dim(), |r, c| basis.iter().map(|b| b[r] * b[c].conj()).sum())
}

#[test]
fn scalar_has_no_obstruction() {
    let t = circ(64);
    let est = kj_estimate(&[t.unit()], &t, Cutoff::Smooth, &eps_sweep()).unwrap();
    assert!(est.per_epsilon.iter().all(|e| e.1 < 1e-10));
    assert!(est.value < 1e-10);
}

#[test]
fn cosine_has_positive_plateau() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    let est = kj_estimate(&[cos], &t, Cutoff::Smooth, &eps_sweep()).unwrap();
    assert!(est.value > 0.1, "{est:?}");
    assert!(est.regime_ok, "{est:?}");
    // the cutoff ranks grow as ε shrinks
    assert!(est.ranks.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn non_hermitian_rejected() {
    let t = circ(16);
    let u = t.generator("u").unwrap().clone();
    assert!(kj_estimate(&[u], &t, Cutoff::Smooth, &eps_sweep()).is_err());
}

#[test]
fn pure_point_fixtures_vanish() {
    let t = circ(64);
    let eps = eps_sweep();
    // 0/1 pattern in the D-basis commutes with every f(ε|D|)
    let diag = t.dirac_eigen().map(|l| if (l.round() as i64).rem_euclid(3) == 0 { 1.0 } else { 0.0 });
    let est = kj_estimate(&[operator_element(&t, diag)], &t, Cutoff::Smooth, &eps).unwrap();
    assert!(est.value < 1e-9, "{est:?}");
    // finite-rank mixture: the commutator dies once the cutoff is flat on its range
    let proj = operator_element(&t, mixed_projection(&t, 11));
    let est = kj_estimate(&[proj], &t, Cutoff::Hat, &eps).unwrap();
    let first = est.per_epsilon[0].1;
    let last = est.per_epsilon.last().unwrap().1;
    assert!(first > 0.05, "{est:?}");
    assert!(last < 0.1 * first, "{est:?}");
}

#[test]
fn arc_sweep_scales_linearly() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    let eps = eps_sweep();
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for len in [PI / 2.0, PI / 4.0, PI / 8.0] {
        let region = arc(PI / 2.0, len);
        let plats = plateau_family(&t, &[PI / 2.0], &[len / 2.0]).unwrap();
        let l = localized_kj(std::slice::from_ref(&cos), &region, &plats, &t, Cutoff::Smooth, &eps).unwrap();
        assert!(l.estimate.value > 0.0);
        lx.push(len.ln());
        ly.push(l.estimate.value.ln());
    }
    let slope = linear_fit(&lx, &ly).1;
    assert!((slope - 1.0).abs() <= 0.15, "slope {slope}");
}

#[test]
fn monotone_in_region() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    let eps = eps_sweep();
    let values: Vec<f64> = [PI / 8.0, PI / 4.0, PI / 2.0]
        .iter()
        .map(|&len| {
            let plats = plateau_family(&t, &[PI / 2.0], &[len / 2.0]).unwrap();
            localized_kj(std::slice::from_ref(&cos), &arc(PI / 2.0, len), &plats, &t, Cutoff::Smooth, &eps).unwrap().estimate.value
        })
        .collect();
    for w in values.windows(2) {
        assert!(w[1] >= 0.98 * w[0], "{values:?}");
    }
}

#[test]
fn full_region_matches_global() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    let eps = eps_sweep();
    let global = kj_estimate(std::slice::from_ref(&cos), &t, Cutoff::Smooth, &eps).unwrap();
    let all = |_: &[f64]| true;
    let local = localized_kj(&[cos], &all, &[t.unit()], &t, Cutoff::Smooth, &eps).unwrap();
    assert!(local.projection_adjustment < 1e-9);
    assert!((local.estimate.value - global.value).abs() <= 0.02 * global.value);
    // λ(K) for b = 1 is the Dixmier trace of 1
    assert!((local.lambda_k - 2.0).abs() < 0.05, "{}", local.lambda_k);
    assert!(local.remainder_order >= 0.9, "order {}", local.remainder_order);
}

#[test]
fn empty_region_is_zero() {
    let t = circ(32);
    let cos = t.generator("cos").unwrap().clone();
    let none = |_: &[f64]| false;
    let l = localized_kj(&[cos], &none, &[t.unit()], &t, Cutoff::Smooth, &eps_sweep()).unwrap();
    assert_eq!(l.estimate.value, 0.0);
}

#[test]
fn plateaus_cover_the_arc() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    let plats = plateau_family(&t, &[PI / 2.0], &[PI / 8.0]).unwrap();
    let l = localized_kj(&[cos], &arc(PI / 2.0, PI / 4.0), &plats, &t, Cutoff::Smooth, &eps_sweep()).unwrap();
    // band-limited ramps only approximate 1 on K
    assert!(l.plateau_defect < 0.15, "{}", l.plateau_defect);
    assert!(l.lambda_k > 0.0 && l.lambda_k < 2.0);
}

#[test]
fn rank_bound_on_every_cutoff() {
    let t = circ(64);
    let cos = t.generator("cos").unwrap().clone();
    for &e in &eps_sweep() {
        let a_eps = spectral_cutoff(&t, Cutoff::Hat, e);
        let rank = t.abs_dirac_eigen().values.iter().filter(|&&l| Cutoff::Hat.eval(e * l) > 0.0).count();
        let prof = singular_profile(&a_eps.commutator(&cos.op));
        let bound = rank_bound_constant(1.0, 2 * rank) * prof.op_norm();
        assert!(prof.lp1(1.0) <= bound + 1e-9, "ε {e}: {} > {bound}", prof.lp1(1.0));
    }
}

#[test]
fn cutoff_rank_against_dixmier() {
    // liminf ε^p Tr(g(ε|D|)) <= c_g ∫-|D|^{-p}, with g = 1_[0,1] and c_g = 1
    let t = circ(128);
    let dix = dixmier_estimate(&t.unit().op, &t).unwrap().value;
    let est = kj_estimate(&[t.generator("cos").unwrap().clone()], &t, Cutoff::Smooth, &eps_sweep()).unwrap();
    let k = est.ranks.len();
    for (&(e, _), &rank) in est.per_epsilon[k - k / 3..].iter().zip(&est.ranks[k - k / 3..]) {
        assert!(e * rank as f64 <= 1.05 * dix, "ε {e}: {} vs {dix}", e * rank as f64);
    }
}

#[test]
fn commutator_decay() {
    let t = circ(64);
    let eps = eps_sweep();
    let r = commutator_decay_check(t.generator("cos").unwrap(), &t, Cutoff::Smooth, &eps);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let r = commutator_decay_check(&t.unit(), &t, Cutoff::Smooth, &eps);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.notes.iter().any(|n| n.contains("vacuous")));
}

#[test]
fn decay_constants() {
    let smooth = decay_constant(Cutoff::Smooth);
    assert!(smooth > 1.0 && smooth < 10.0);
    assert!(decay_constant(Cutoff::Hat) > 1.0);
}
