use std::f64::consts::PI;

use sgeo_core::calculus::*;
use sgeo_core::geometries::{circle, corrupt, interval, torus, Corruption, TorusVariant};
use sgeo_core::operator::{random_hermitian, random_matrix};
use sgeo_core::{MatrixOperator, TruncatedTriple, Verdict, C64};

fn circ(l: usize) -> TruncatedTriple {
    circle(l, 1.0).unwrap().triple
}

fn tor(l: usize) -> TruncatedTriple {
    torus(2, l, TorusVariant::Dirac, 1.0).unwrap().triple
}

#[test]
fn circle_bracket_of_shift_is_shift() {
    let t = circ(32);
    let u = &t.generator("u").unwrap().op;
    let x = bracket_d(u, &t).sub(u);
    assert_eq!(t.band_norm(&x, 1).unwrap(), 0.0);
}

#[test]
fn circle_bracket_of_cosine() {
    let t = circ(32);
    let c = &t.generator("cos").unwrap().op;
    let s = &t.generator("sin").unwrap().op;
    let x = bracket_d(c, &t).sub(&s.scale(C64::new(0.0, 1.0)));
    assert!(t.band_norm(&x, 1).unwrap() <= 1e-12);
    assert!(bracket_d(&MatrixOperator::identity(t.hilbert_dim()), &t).max_abs() == 0.0);
}

#[test]
fn delta_of_shift_has_unit_norm() {
    let t = circ(32);
    let u = &t.generator("u").unwrap().op;
    assert!((t.band_norm(&delta(u, &t), 1).unwrap() - 1.0).abs() < 1e-12);
    let d2 = t.dirac().mul(t.dirac());
    assert!(delta(&d2, &t).max_abs() < 1e-12);
}

#[test]
fn torus_delta_of_bracket_stable_under_refinement() {
    let norm = |l: usize| {
        let t = tor(l);
        let a = &t.generator("sin1").unwrap().op;
        t.band_norm(&delta(&bracket_d(a, &t), &t), 2).unwrap()
    };
    let (a, b) = (norm(16), norm(32));
    assert!(((b - a) / a).abs() <= 0.05, "{a} {b}");
}

#[test]
fn delta1_bounds() {
    let t = circ(64);
    let one = MatrixOperator::identity(t.hilbert_dim());
    assert!(delta1(&one, &t).max_abs() < 1e-12);
    let x = random_hermitian(t.hilbert_dim(), 3);
    let lhs = delta(&x, &t).op_norm();
    let d1 = delta1(&x, &t);
    let rhs = x.op_norm() + d1.op_norm() + delta1(&d1, &t).op_norm();
    assert!(lhs <= rhs + 1e-8, "{lhs} > {rhs}");
    let mut prev: Option<f64> = None;
    for l in [64, 128, 256] {
        let t = circ(l);
        let u = &t.generator("u").unwrap().op;
        let v = t.band_norm(&delta1(u, &t), 1).unwrap();
        if let Some(p) = prev {
            assert!((v - p).abs() < 0.05);
        }
        prev = Some(v);
    }
}

#[test]
fn regularity_passes_on_circle_and_torus_fails_on_interval() {
    let gen = |name: &'static str| move |t: &TruncatedTriple| Ok(t.generator(name)?.op.clone());
    let r = regularity_probe(&gen("u"), &circ(32), &circ(64), 4, RefinementRule::default());
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(r.series["delta_fine"].iter().all(|v| (v - 1.0).abs() < 1e-12));
    let r = regularity_probe(&gen("cos1"), &tor(8), &tor(16), 3, RefinementRule::default());
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let r = regularity_probe(&gen("x"), &interval(32).unwrap().triple, &interval(64).unwrap().triple, 3, RefinementRule::default());
    assert_eq!(r.verdict, Verdict::Fail, "{r:?}");
    let scalar = |t: &TruncatedTriple| Ok(MatrixOperator::identity(t.hilbert_dim()).scale_real(3.0));
    let r = regularity_probe(&scalar, &circ(32), &circ(64), 3, RefinementRule::default());
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn multicommutator_examples() {
    let i = C64::new(0.0, 1.0);
    let s1 = MatrixOperator::from_triplets(2, vec![(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))]);
    let s2 = MatrixOperator::from_triplets(2, vec![(0, 1, -i), (1, 0, i)]);
    let s3 = MatrixOperator::from_real_diagonal(&[1.0, -1.0]);
    let m = multicommutator(&[s1.scale(i), s2.scale(i)]).unwrap();
    assert!(m.sub(&s3.scale(C64::new(0.0, -2.0))).max_abs() < 1e-15);
    let r = random_matrix(4, 1);
    assert!(multicommutator(&[r.clone(), random_matrix(4, 2), r]).unwrap().max_abs() < 1e-12);
    assert!(multicommutator(&vec![s1.clone(); 7]).is_err());
}

#[test]
fn order_one_examples() {
    let c = circle(32, 1.0).unwrap();
    let r = order_one_check(&c.triple);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.value("residual").unwrap(), 0.0);
    let t = torus(2, 16, TorusVariant::Dirac, 1.0).unwrap();
    assert!(order_one_check(&t.triple).value("residual").unwrap() <= 1e-10);
    let bad = corrupt(&c, Corruption::DenseD, 7).unwrap();
    let r = order_one_check(&bad.triple);
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.value("residual").unwrap() > 1e-3);
}

#[test]
fn symbol_commutation_examples() {
    let t = tor(16);
    let h = t.generator("sin1").unwrap();
    let a = t.generator("cos2").unwrap();
    let r = symbol_commutation_check(h, a, &t);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(r.value("abs_commutator").unwrap() <= 1e-8 && r.value("square_in_algebra").unwrap() <= 1e-8);
    let c = circle(32, 1.0).unwrap();
    let r = symbol_commutation_check(c.triple.generator("cos").unwrap(), c.triple.generator("sin").unwrap(), &c.triple);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let bad = corrupt(&c, Corruption::OrderOneBreak, 3).unwrap().triple;
    let r = symbol_commutation_check(bad.generator("cos").unwrap(), bad.generator("sin").unwrap(), &bad);
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn double_and_leibniz_identities() {
    for t in [circ(32), tor(12)] {
        for g in t.generators().values() {
            let h = g.op.add(&g.op.adjoint()).scale_real(0.5);
            assert!(double_identity_residual(&h, &t).unwrap() <= 1e-9);
            assert!(leibniz_residual(&g.op, &t).unwrap() <= 1e-8);
        }
    }
}

#[test]
fn pk_submultiplicative() {
    let t = circ(12);
    let a = &t.generator("cos").unwrap().op;
    let b = &t.generator("u").unwrap().op.add(a);
    for k in 0..=3 {
        let lhs = pk_norm(&a.mul(b), &t, k);
        assert!(lhs <= pk_norm(a, &t, k) * pk_norm(b, &t, k) + 1e-9);
    }
}

#[test]
fn max_principle_examples() {
    let scales = [0.16, 0.08, 0.04];
    let c = circ(64);
    let r = max_principle_check(c.generator("cos").unwrap(), &c, &scales, 0.5);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let iv = interval(48).unwrap().triple;
    let r = max_principle_check(iv.generator("x").unwrap(), &iv, &scales, 0.5);
    assert_eq!(r.verdict, Verdict::Fail, "{r:?}");
    let one = c.unit();
    assert_eq!(max_principle_check(&one, &c, &scales, 0.5).verdict, Verdict::Pass);
}

#[test]
fn geodesic_flow_order() {
    let steps = [0.04, 0.02, 0.01, 0.005];
    let c = circ(32);
    let r = geodesic_flow_derivative_check(&c.generator("u").unwrap().op, &c, &steps);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!((r.value("order").unwrap() - 1.0).abs() < 0.1);
    let d2 = c.dirac().mul(c.dirac());
    assert_eq!(geodesic_flow_derivative_check(&d2, &c, &steps).verdict, Verdict::Pass);
    let t = tor(8);
    let x = bracket_d(&t.generator("sin1").unwrap().op, &t);
    let r = geodesic_flow_derivative_check(&x, &t, &[0.004, 0.002, 0.001]);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let _ = PI;
}
