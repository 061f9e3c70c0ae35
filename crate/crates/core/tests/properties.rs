use proptest::prelude::*;

use sgeo_core::dixmier::{cesaro_mean, Cutoff};
use sgeo_core::geometries::circle;
use sgeo_core::spectral::singular_profile;
use sgeo_core::triple::{Coefficients, Grid, ModeBox};
use sgeo_core::{MatrixOperator, C64};

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn square(n: usize) -> impl Strategy<Value = MatrixOperator> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| MatrixOperator::from_fn(n, |r, c| v[r * n + c]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_roundtrip(values in prop::collection::vec(complex(), 9)) {
        let modes = ModeBox::new(1, 4);
        let grid = Grid { p: 1, points: 11, period: 1.0 };
        let c = Coefficients { modes, values: values.clone() };
        let back = grid.analyze(&grid.synthesize(&c), 4);
        for (a, b) in back.values.iter().zip(&values) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cutoffs_are_contractions(u in 0.0..3.0f64, v in 0.0..3.0f64) {
        for f in [Cutoff::Hat, Cutoff::Smooth] {
            let (a, b) = (f.eval(u), f.eval(v));
            prop_assert!((0.0..=1.0).contains(&a));
            if u <= v {
                prop_assert!(a >= b - 1e-15);
            }
        }
    }

    #[test]
    fn cesaro_fixes_constants(c in -5.0..5.0f64, k in 1usize..3) {
        let u: Vec<f64> = (0..64).map(|i| 1.0 + i as f64 * 0.1).collect();
        let vals = vec![c; u.len()];
        for m in cesaro_mean(&u, &vals, k).unwrap() {
            prop_assert!((m - c).abs() < 1e-9);
        }
    }

    #[test]
    fn sigma_subadditive(a in square(6), b in square(6)) {
        let (pa, pb, ps) = (singular_profile(&a), singular_profile(&b), singular_profile(&a.add(&b)));
        for n in 1..=6 {
            prop_assert!(ps.sigma_n(n) <= pa.sigma_n(n) + pb.sigma_n(n) + 1e-9);
        }
    }

    #[test]
    fn lp1_between_norms(a in square(6), p in 1.0..4.0f64) {
        let prof = singular_profile(&a);
        let v = prof.lp1(p);
        prop_assert!(v >= prof.op_norm() - 1e-12);
        prop_assert!(v <= prof.trace_norm() + 1e-12);
    }

    #[test]
    fn commutator_antisymmetric(a in square(5), b in square(5)) {
        let s = a.commutator(&b).add(&b.commutator(&a));
        prop_assert!(s.max_abs() < 1e-12);
        prop_assert!((a.adjoint().adjoint().sub(&a)).max_abs() == 0.0);
    }

    #[test]
    fn toeplitz_of_real_symbol_is_hermitian(re in prop::collection::vec(-1.0..1.0f64, 3), im in prop::collection::vec(-1.0..1.0f64, 2)) {
        let t = circle(8, 1.0).unwrap().triple;
        // real trigonometric polynomial: c_{-k} = conj(c_k)
        let c1 = C64::new(re[1], im[0]);
        let c2 = C64::new(re[2], im[1]);
        let values = vec![c2.conj(), c1.conj(), C64::new(re[0], 0.0), c1, c2];
        let op = t.toeplitz(&Coefficients { modes: ModeBox::new(1, 2), values }).unwrap();
        prop_assert!(op.hermitian_defect() < 1e-12);
    }
}
