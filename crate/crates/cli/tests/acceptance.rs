//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgeo_cli::{run, RunConfig, RunReport};
use sgeo_core::calculus::{multicommutator, order_one_check, regularity_probe, RefinementRule};
use sgeo_core::dixmier::{absolute_continuity_fit, dixmier_estimate, heat_vs_dixmier, random_samples, Cutoff};
use sgeo_core::geometries::{circle, form_clifford, pauli, torus, Corruption, GeometryKind, TorusVariant};
use sgeo_core::hochschild::{antisymmetrize, boundary, orientability_check, word, HochschildChain, Word};
use sgeo_core::metric::{connes_distance, propagation};
use sgeo_core::operator::{kron, random_matrix};
use sgeo_core::spectral::{
    dimension_fit, interpolation_constant, lp1_norm, rank_bound_constant, singular_profile,
};
use sgeo_core::triple::{grading_relations, Element};
use sgeo_core::voiculescu::kj_estimate;
use sgeo_core::{GeometrySpec, MatrixOperator, TruncatedTriple, Verdict, C64};

type Outcome = Result<(bool, String), String>;

fn circ(l: usize) -> TruncatedTriple {
    circle(l, 1.0).unwrap().triple
}

fn tor(p: usize, l: usize) -> sgeo_core::geometries::Geometry {
    torus(p, l, TorusVariant::Dirac, 1.0).unwrap()
}

fn checks(spec: GeometrySpec, names: &[&str]) -> RunReport {
    run(&RunConfig::new(spec).with_checks(names), 1).expect("valid config")
}

fn bound(report: &RunReport, check: &str, key: &str) -> f64 {
    let c = report.checks.iter().find(|c| c.name == check).unwrap_or_else(|| panic!("no check {check}"));
    c.bounds.get(key).map(|b| b.value).unwrap_or(f64::NAN)
}

fn verdict(report: &RunReport, check: &str) -> Verdict {
    report.checks.iter().find(|c| c.name == check).map(|c| c.verdict).unwrap()
}

fn c1() -> Outcome {
    let start = Instant::now();
    let t = circ(256);
    let slope = dimension_fit(&t).value;
    let dix = dixmier_estimate(&MatrixOperator::identity(t.hilbert_dim()), &t).map_err(|e| e.to_string())?.value;
    let secs = start.elapsed().as_secs_f64();
    let ok = (slope + 1.0).abs() <= 0.05 && (dix - 2.0).abs() <= 0.05 && secs <= 30.0;
    Ok((ok, format!("slope {slope:.4}, Tr_ω(|D|^-1) {dix:.4}, {secs:.2} s")))
}

fn c2() -> Outcome {
    let t = circ(256);
    let lam = t.effective_lambda();
    let grid: Vec<f64> = (0..24).map(|i| 5.0 / lam * 10f64.powf(i as f64 / 23.0)).collect();
    let r = heat_vs_dixmier(&MatrixOperator::identity(t.hilbert_dim()), Cutoff::Hat, &grid, &t);
    let gap = r.bounds["relative_gap"].value;
    let slack = r.value("one_sided_slack").unwrap_or(f64::NAN);
    let heat = r.value("heat").unwrap_or(f64::NAN);
    let dix = r.value("dixmier").unwrap_or(f64::NAN);
    let ok = r.passed() && gap <= 0.07 && slack >= -0.02;
    Ok((ok, format!("heat {heat:.4} vs ½·{dix:.4}, gap {:.2}%, one-sided slack {:.2}%", gap * 100.0, slack * 100.0)))
}

fn c3() -> Outcome {
    let g = tor(2, 32);
    let t = &g.triple;
    let order = order_one_check(t).bounds["residual"].value;
    let (h, s, a) = grading_relations(t.grading().ok_or("torus has no grading")?, t.dirac());
    let gam = t.clifford();
    let eta = (gam[0].clone() * gam[0].clone())[(0, 0)];
    let mut cliff = 0.0f64;
    for (i, gi) in gam.iter().enumerate() {
        for (j, gj) in gam.iter().enumerate() {
            let anti = gi * gj + gj * gi;
            let want = DMatrix::<C64>::identity(gi.nrows(), gi.nrows()) * (eta * if i == j { 2.0 } else { 0.0 });
            cliff = cliff.max((anti - want).map(|z| z.norm()).max());
        }
    }
    let gamma = h.max(s).max(a).max(cliff).max((eta.norm() - 1.0).abs());
    let orient = orientability_check(t, g.cycle.as_ref().ok_or("no orientation cycle")?);
    let pi = orient.bounds["pi_d_residual"].value;
    let dix = dixmier_estimate(&MatrixOperator::identity(t.hilbert_dim()), t).map_err(|e| e.to_string())?.value;
    let oracle = 1.0 / (2.0 * PI);
    let rel = (dix - oracle).abs() / oracle;
    let ok = order <= 1e-10 && gamma <= 1e-12 && orient.passed() && pi <= 1e-10 && rel <= 0.05;
    Ok((
        ok,
        format!(
            "order one {order:.1e}, γ relations {gamma:.1e}, π_D(c) - γ {pi:.1e}, Tr_ω {dix:.5} vs 1/2π ({:.2}%)",
            rel * 100.0
        ),
    ))
}

fn c4() -> Outcome {
    let names = ["max_principle", "regularity"];
    let mut parts = Vec::new();
    let mut ok = true;
    for (spec, expect_pass) in [
        (GeometrySpec::interval(64), false),
        (GeometrySpec::circle(64), true),
        (GeometrySpec::torus(2, 16), true),
    ] {
        let kind = format!("{:?}", spec.kind).to_lowercase();
        let r = checks(spec, &names);
        for n in names {
            let v = verdict(&r, n);
            let want = if expect_pass { Verdict::Pass } else { Verdict::Fail };
            ok &= v == want;
            parts.push(format!("{kind} {n} {v}"));
        }
    }
    // the interval's failure shows up as growth under refinement
    let iv = |n: usize| -> TruncatedTriple { sgeo_core::geometries::interval(n).unwrap().triple };
    let x = |t: &TruncatedTriple| Ok(t.generator("x")?.op.clone());
    let probe = regularity_probe(&x, &iv(32), &iv(64), 3, RefinementRule::default());
    ok &= probe.verdict == Verdict::Fail;
    Ok((ok, parts.join(", ")))
}

/// Random chain of degree 1..=4 over the generator names.
fn random_chain(names: &[String], rng: &mut ChaCha8Rng) -> HochschildChain {
    let degree = rng.gen_range(1..=4);
    let mut c = HochschildChain::zero(degree);
    for _ in 0..rng.gen_range(1..5) {
        let factors: Vec<Word> = (0..=degree)
            .map(|_| {
                let letters: Vec<&str> =
                    (0..rng.gen_range(0..3)).map(|_| names[rng.gen_range(0..names.len())].as_str()).collect();
                word(&letters)
            })
            .collect();
        c.add_term(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), factors).unwrap();
    }
    c
}

fn chain_residuals(t: &TruncatedTriple, rng: &mut ChaCha8Rng) -> f64 {
    let names = t.generator_names();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c = random_chain(&names, rng);
        let scale = c.l1_norm().max(1e-300);
        if c.degree >= 2 {
            let bb = boundary(&boundary(&c, t).unwrap(), t).unwrap();
            worst = worst.max(bb.l1_norm() / scale);
        }
        let pc = antisymmetrize(&c);
        worst = worst.max(boundary(&pc, t).unwrap().l1_norm() / scale);
        let ppc = antisymmetrize(&pc);
        worst = worst.max(ppc.combine(C64::new(1.0, 0.0), &pc, C64::new(-1.0, 0.0)).unwrap().l1_norm() / scale);
    }
    worst
}

/// [T_1, ..., T_p] against det(f)·[γ^1, ..., γ^p] for T_i = Σ_μ diag(f_iμ) ⊗ γ^μ.
fn determinant_expansion(gammas: &[DMatrix<C64>], rng: &mut ChaCha8Rng) -> f64 {
    let p = gammas.len();
    let m = 5;
    let f: Vec<Vec<Vec<C64>>> = (0..p)
        .map(|_| (0..p).map(|_| (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect())
        .collect();
    let ops: Vec<MatrixOperator> = (0..p)
        .map(|i| {
            let mut sum = DMatrix::<C64>::zeros(m * gammas[0].nrows(), m * gammas[0].nrows());
            for (mu, g) in gammas.iter().enumerate() {
                sum += kron(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(f[i][mu].clone())), g);
            }
            MatrixOperator::from_dense(sum)
        })
        .collect();
    let lhs = multicommutator(&ops).unwrap();
    let gops: Vec<MatrixOperator> = gammas.iter().map(|g| MatrixOperator::from_dense(g.clone())).collect();
    let base = multicommutator(&gops).unwrap().to_dense();
    let dets: Vec<C64> = (0..m).map(|j| DMatrix::from_fn(p, p, |i, mu| f[i][mu][j]).determinant()).collect();
    let rhs = kron(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dets)), &base);
    let scale = rhs.map(|z| z.norm()).max().max(1.0);
    lhs.sub(&MatrixOperator::from_dense(rhs)).max_abs() / scale
}

fn c5() -> Outcome {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut parts = Vec::new();
    let mut product = GeometrySpec::torus(2, 8);
    product.kind = GeometryKind::Product;
    product.ladder = vec![0.0, 50.0];
    for spec in [
        GeometrySpec::circle(64),
        GeometrySpec::torus(2, 16),
        GeometrySpec::torus(3, 8),
        product,
        GeometrySpec::interval(64),
    ] {
        let r = checks(spec.clone(), &["double_identity", "symbol_commutation"]);
        let name = r.geometry.as_ref().map(|g| g.name.clone()).unwrap_or_default();
        let double = bound(&r, "double_identity", "double");
        let leibniz = bound(&r, "double_identity", "leibniz");
        let symbol = match verdict(&r, "symbol_commutation") {
            Verdict::Inconclusive => None,
            _ => Some(bound(&r, "symbol_commutation", "abs_commutator").max(bound(&r, "symbol_commutation", "square_in_algebra"))),
        };
        let t = spec.build(0).unwrap().triple;
        let chains = chain_residuals(&t, &mut rng);
        let good = double <= tol && leibniz <= tol && symbol.is_none_or(|s| s <= tol) && chains <= tol;
        ok &= good;
        parts.push(format!(
            "{name}: double {double:.1e}, Leibniz {leibniz:.1e}, symbol {}, chains {chains:.1e}{}",
            symbol.map_or("n/a".to_string(), |s| format!("{s:.1e}")),
            if good { "" } else { " [over 1e-9]" }
        ));
    }
    let mut multi = 0.0f64;
    let [s1, s2, s3] = pauli();
    let forms = |p: usize| -> Vec<DMatrix<C64>> { (0..p).map(|mu| form_clifford(p, mu).map(|v| C64::new(v, 0.0))).collect() };
    for _ in 0..50 {
        for gammas in [vec![s1.clone(), s2.clone()], vec![s1.clone(), s2.clone(), s3.clone()], forms(2), forms(3)] {
            multi = multi.max(determinant_expansion(&gammas, &mut rng));
        }
    }
    ok &= multi <= tol;
    parts.push(format!("determinant expansion {multi:.1e}"));
    Ok((ok, parts.join("; ")))
}

fn random_op(dim: usize, rng: &mut ChaCha8Rng) -> MatrixOperator {
    let scale = rng.gen_range(0.1..10.0);
    random_matrix(dim, rng.gen()).scale_real(scale)
}

fn low_rank(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> MatrixOperator {
    let a = DMatrix::from_fn(dim, rank, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let b = DMatrix::from_fn(rank, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    MatrixOperator::from_dense(a * b)
}

fn c6() -> Outcome {
    let slack = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = [0usize; 5];
    let trials = 200;
    for i in 0..trials {
        let dim = rng.gen_range(2..32);
        let (a, b) = (random_op(dim, &mut rng), random_op(dim, &mut rng));
        let (pa, pb, ps) = (singular_profile(&a), singular_profile(&b), singular_profile(&a.add(&b)));
        if (1..=dim).any(|n| ps.sigma_n(n) > pa.sigma_n(n) + pb.sigma_n(n) + slack) {
            violations[0] += 1;
        }
        let s = if i % 2 == 0 { random_op(dim, &mut rng) } else { low_rank(dim, 1 + i % 3, &mut rng) };
        let prof = singular_profile(&s);
        for p in [1.5, 2.0, 3.0] {
            let rhs = interpolation_constant(p) * prof.trace_norm().powf(1.0 / p) * prof.op_norm().powf(1.0 - 1.0 / p);
            if prof.lp1(p) > rhs + slack {
                violations[1] += 1;
            }
        }
        let rank = rng.gen_range(1..6);
        let lr = singular_profile(&low_rank(24, rank, &mut rng));
        for p in [1.0, 1.5, 2.0, 3.0] {
            if lr.lp1(p) > rank_bound_constant(p, rank) * lr.op_norm() * (1.0 + 1e-12) + slack {
                violations[2] += 1;
            }
        }
        let p = rng.gen_range(1.0..4.0);
        let (l, x, r) = (random_op(dim, &mut rng), random_op(dim, &mut rng), random_op(dim, &mut rng));
        let lhs = singular_profile(&l.mul(&x).mul(&r)).lp1(p);
        if lhs > l.op_norm() * singular_profile(&x).lp1(p) * r.op_norm() * (1.0 + 1e-10) + slack {
            violations[3] += 1;
        }
        let (primary, alternate) = lp1_norm(&random_op(rng.gen_range(8..65), &mut rng), rng.gen_range(1.2..3.0));
        if !(0.25..=4.0).contains(&(primary / alternate)) {
            violations[4] += 1;
        }
    }
    let ok = violations.iter().all(|&v| v == 0);
    Ok((
        ok,
        format!(
            "{trials} samples each; violations: σ_N triangle {}, interpolation {}, rank bound {}, two-sided product {}, (p,1) norm equivalence {}",
            violations[0], violations[1], violations[2], violations[3], violations[4]
        ),
    ))
}

fn c7() -> Outcome {
    let r = checks(GeometrySpec::circle(64), &["voiculescu_scaling"]);
    let c = &r.checks[0];
    let slope = c.value("slope").unwrap_or(f64::NAN);
    let drop = c.bounds.get("monotone_drop").map_or(f64::NAN, |b| b.value);
    let t = circ(64);
    let eps: Vec<f64> = (0..10).map(|i| 0.5 * (0.02f64 / 0.5).powf(i as f64 / 9.0)).collect();
    let diag = t.dirac_eigen().map(|l| if (l.round() as i64).rem_euclid(3) == 0 { 1.0 } else { 0.0 });
    let fixture = Element { op: diag, symbol: vec![C64::new(0.0, 0.0); t.grid_len()] };
    let pure = kj_estimate(&[fixture], &t, Cutoff::Smooth, &eps).map_err(|e| e.to_string())?.value;
    let ok = c.verdict == Verdict::Pass && (slope - 1.0).abs() <= 0.15 && drop <= 0.02 && pure < 1e-9;
    Ok((ok, format!("arc slope {slope:.3}, largest monotone drop {:.2}%, pure-point k_J {pure:.1e}", drop * 100.0)))
}

fn c8() -> Outcome {
    let target = PI / 2.0;
    let mut ratios = Vec::new();
    for l in [32, 64, 128] {
        let d = connes_distance(&[0.0], &[target], &circ(l), 100).map_err(|e| e.to_string())?;
        ratios.push(d.lower_bound / target);
    }
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let t = tor(2, 16).triple;
    let hop = connes_distance(&[0.0, 0.0], &[0.1, 0.0], &t, 40).map_err(|e| e.to_string())?.lower_bound / 0.1;
    let base = circ(32);
    let mut parts = base.clone().into_parts();
    parts.dirac = parts.dirac.scale_real(2.0);
    parts.clifford.iter_mut().for_each(|g| *g *= C64::new(2.0, 0.0));
    let doubled = TruncatedTriple::new(parts).map_err(|e| e.to_string())?;
    let a = connes_distance(&[0.0], &[1.0], &base, 50).map_err(|e| e.to_string())?.lower_bound;
    let b = connes_distance(&[0.0], &[1.0], &doubled, 50).map_err(|e| e.to_string())?.lower_bound;
    let scaling = (a - 2.0 * b).abs() / a;
    let ok = ratios[2] >= 0.97 && monotone && hop >= 0.95 && scaling <= 1e-6;
    Ok((
        ok,
        format!(
            "circle ratios {:.4}/{:.4}/{:.4} (Λ 32/64/128), torus hop ratio {hop:.4}, D→2D mismatch {scaling:.1e}",
            ratios[0], ratios[1], ratios[2]
        ),
    ))
}

fn c9() -> Outcome {
    let coarse = propagation(&circ(64), 0.3).map_err(|e| e.to_string())?.leakage;
    let fine = propagation(&circ(128), 0.3).map_err(|e| e.to_string())?.leakage;
    Ok((fine <= 0.01 && fine < coarse, format!("leakage Λ=64 {coarse:.5}, Λ=128 {fine:.5}")))
}

fn c10() -> Outcome {
    let t = circ(64);
    let r = absolute_continuity_fit(&t, &random_samples(&t, 8, 10).map_err(|e| e.to_string())?);
    let kappa = r.value("kappa_re").unwrap_or(f64::NAN);
    let spread = r.bounds["relative_spread"].value;
    let tt = tor(2, 16).triple;
    let rt = absolute_continuity_fit(&tt, &random_samples(&tt, 8, 10).map_err(|e| e.to_string())?);
    let kt = rt.value("kappa_re").unwrap_or(f64::NAN);
    let st = rt.bounds["relative_spread"].value;
    let ok = r.passed() && (kappa - 0.5).abs() <= 0.03 * 0.5 && rt.passed();
    Ok((
        ok,
        format!(
            "circle κ {kappa:.4} (spread {:.2}%), torus κ {kt:.4} (spread {:.2}%)",
            spread * 100.0,
            st * 100.0
        ),
    ))
}

const CORRUPTION_SUITE: &[&str] =
    &["dimension", "order_one", "orientability", "symbol_commutation", "double_identity", "dixmier", "max_principle"];

fn c11() -> Outcome {
    let mut cfg = RunConfig::new(GeometrySpec::circle(64))
        .with_checks(&["dimension", "order_one", "dixmier", "heat_vs_dixmier", "absolute_continuity", "distance"]);
    cfg.seed = 11;
    let hashes: Vec<String> =
        [1, 1, 2].iter().map(|&jobs| run(&cfg, jobs).expect("valid config").determinism_hash).collect();
    let same = hashes.iter().all(|h| h == &hashes[0]);
    let mut ok = same;
    let mut parts = vec![format!("hash {} ({})", &hashes[0][..12], if same { "stable" } else { "differs" })];
    for mode in Corruption::ALL {
        let mut spec =
            if mode == Corruption::GradingBreak { GeometrySpec::torus(2, 8) } else { GeometrySpec::circle(64) };
        spec.corrupt = Some(mode);
        let mut cfg = RunConfig::new(spec).with_checks(CORRUPTION_SUITE);
        cfg.seed = 11;
        let r = run(&cfg, 1).expect("valid config");
        let failed: BTreeSet<&str> =
            r.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.name.as_str()).collect();
        let expected: BTreeSet<&str> = mode.expected_failures().iter().copied().collect();
        ok &= failed == expected;
        parts.push(format!("{} fails {{{}}}", mode.name(), failed.into_iter().collect::<Vec<_>>().join(", ")));
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("circle dimension and Dixmier trace", c1),
        ("heat functional against the Dixmier trace", c2),
        ("torus axioms and Weyl constant", c3),
        ("interval counterexample discriminates", c4),
        ("algebraic identity suite", c5),
        ("norm inequality suite", c6),
        ("Voiculescu obstruction scaling", c7),
        ("Connes distance bounds", c8),
        ("finite propagation", c9),
        ("absolute continuity fit", c10),
        ("determinism and corruption detection", c11),
    ];
    let prev = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(payload) => Err(payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {title}: {detail} [{:.1} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    std::panic::set_hook(prev);
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
