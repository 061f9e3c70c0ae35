//! Commutator calculus around D: [D, a], δ, δ₁, regularity towers,
//! multicommutators and the order-one / maximum-principle / symbol checks.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgeoError};
use crate::hochschild::signed_permutations;
use crate::operator::{MatrixOperator, C64};
use crate::report::{linear_fit, CheckReport};
use crate::triple::sampling::{Coefficients, Grid, ModeBox};
use crate::triple::{mode_norm, Element, Sampling, TruncatedTriple};

pub const ORDER_ONE_TOL: f64 = 1e-10;

/// [D, a].
pub fn bracket_d(a: &MatrixOperator, t: &TruncatedTriple) -> MatrixOperator {
    t.dirac().commutator(a)
}

/// δ(T) = [|D|, T] with the kernel shift in |D|.
pub fn delta(x: &MatrixOperator, t: &TruncatedTriple) -> MatrixOperator {
    t.abs_dirac().commutator(x)
}

/// δ₁(T) = [D², T](1 + D²)^{-1/2}.
pub fn delta1(x: &MatrixOperator, t: &TruncatedTriple) -> MatrixOperator {
    let d2 = t.dirac().mul(t.dirac());
    let damp = t.abs_dirac_function(|v| 1.0 / (1.0 + v * v).sqrt());
    d2.commutator(x).mul(&damp)
}

/// Basis mask |mode| <= cutoff (empty when cutoff < 1 is not enforced here).
pub fn cutoff_mask(t: &TruncatedTriple, cutoff: i64) -> Vec<bool> {
    let s = t.spinor_dim();
    (0..t.hilbert_dim()).map(|i| mode_norm(&t.mode_labels()[i / s]) <= cutoff).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub lambda: usize,
    pub norms_delta: Vec<f64>,
    pub norms_delta_of_bracket: Vec<f64>,
    pub norms_delta1: Vec<f64>,
    /// Slope of log ‖δ^m(a)‖ against m (0 when the tower vanishes).
    pub growth_exponent: f64,
}

/// Norms of the δ, δ∘[D,·] and δ₁ towers of `a` up to m_max, each read on
/// the inner band at depth 1 (|D| and D do not widen the band).
pub fn regularity_profile(a: &MatrixOperator, t: &TruncatedTriple, m_max: usize) -> Result<RegularityProfile> {
    let mask = t.band_mask(1)?;
    let abs_d = t.abs_dirac();
    let d2 = t.dirac().mul(t.dirac());
    let damp = t.abs_dirac_function(|v| 1.0 / (1.0 + v * v).sqrt());
    let tower = |start: MatrixOperator, step: &dyn Fn(&MatrixOperator) -> MatrixOperator| {
        let mut out = Vec::with_capacity(m_max + 1);
        let mut x = start;
        for m in 0..=m_max {
            out.push(x.compress(&mask).op_norm());
            if m < m_max {
                x = step(&x);
            }
        }
        out
    };
    let d = |x: &MatrixOperator| abs_d.commutator(x);
    let d1 = |x: &MatrixOperator| d2.commutator(x).mul(&damp);
    let norms_delta = tower(a.clone(), &d);
    let norms_delta_of_bracket = tower(bracket_d(a, t), &d);
    let norms_delta1 = tower(a.clone(), &d1);
    let pts: Vec<(f64, f64)> = norms_delta
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 1e-12)
        .map(|(m, v)| (m as f64, v.ln()))
        .collect();
    let growth_exponent = if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linear_fit(&x, &y).1
    } else {
        0.0
    };
    Ok(RegularityProfile {
        lambda: t.band().lambda_full,
        norms_delta,
        norms_delta_of_bracket,
        norms_delta1,
        growth_exponent,
    })
}

/// Settings for the Λ-refinement verdict of the regularity probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRule {
    /// Largest growth per Λ-doubling still counted as bounded.
    pub pass_ratio: f64,
    /// Growth per doubling above which the tower is declared unbounded.
    pub fail_ratio: f64,
    /// Norms below this are treated as exactly zero.
    pub zero_floor: f64,
}

impl Default for RefinementRule {
    fn default() -> Self {
        RefinementRule { pass_ratio: 1.5, fail_ratio: 1.8, zero_floor: 1e-12 }
    }
}

/// Condition 3 probe: towers of `a` on a coarse and a fine truncation;
/// bounded iff every norm grows by at most `pass_ratio` per Λ-doubling.
pub fn regularity_probe(
    a: &dyn Fn(&TruncatedTriple) -> Result<MatrixOperator>,
    coarse: &TruncatedTriple,
    fine: &TruncatedTriple,
    m_max: usize,
    rule: RefinementRule,
) -> CheckReport {
    let mut r = CheckReport::new("regularity");
    if m_max < 2 {
        r.fail("m_max must be at least 2");
        return r;
    }
    let profile = |t: &TruncatedTriple| -> Result<RegularityProfile> { regularity_profile(&a(t)?, t, m_max) };
    let (pc, pf) = match (profile(coarse), profile(fine)) {
        (Ok(c), Ok(f)) => (c, f),
        (Err(e), _) | (_, Err(e)) => {
            match e {
                SgeoError::BandExhausted { .. } => r.inconclusive(e.to_string()),
                _ => r.fail(e.to_string()),
            }
            return r;
        }
    };
    let doublings = (pf.lambda as f64 / pc.lambda as f64).log2().max(1e-9);
    let mut worst: f64 = 0.0;
    for (name, c, f) in [
        ("delta", &pc.norms_delta, &pf.norms_delta),
        ("delta_bracket", &pc.norms_delta_of_bracket, &pf.norms_delta_of_bracket),
        ("delta1", &pc.norms_delta1, &pf.norms_delta1),
    ] {
        let ratios: Vec<f64> = c
            .iter()
            .zip(f)
            .map(|(&c, &f)| {
                if c <= rule.zero_floor && f <= rule.zero_floor {
                    1.0
                } else {
                    (f / c.max(rule.zero_floor)).powf(1.0 / doublings)
                }
            })
            .collect();
        worst = ratios.iter().copied().fold(worst, f64::max);
        r.series(&format!("{name}_coarse"), c.clone());
        r.series(&format!("{name}_fine"), f.clone());
        r.series(&format!("{name}_ratio"), ratios);
    }
    r.metric("growth_exponent_fine", pf.growth_exponent);
    r.metric("worst_ratio_per_doubling", worst);
    r.metric("lambda_coarse", pc.lambda as f64);
    r.metric("lambda_fine", pf.lambda as f64);
    if worst > rule.fail_ratio {
        r.fail(format!("tower norms grow by {worst:.3} per Λ-doubling"));
    } else if worst > rule.pass_ratio {
        r.inconclusive(format!("growth {worst:.3} per doubling between pass and fail thresholds"));
    }
    r
}

/// Σ_σ ε(σ) T_σ(1) ⋯ T_σ(n), for 1 <= n <= 6.
pub fn multicommutator(ops: &[MatrixOperator]) -> Result<MatrixOperator> {
    let n = ops.len();
    if n == 0 || n > 6 {
        return Err(SgeoError::InvalidArgument(format!("multicommutator of {n} operators (allowed 1..=6)")));
    }
    let dim = ops[0].dim();
    let mut total = MatrixOperator::zeros(dim);
    for (perm, sign) in signed_permutations(n) {
        let mut prod = ops[perm[0]].clone();
        for &j in &perm[1..] {
            prod = prod.mul(&ops[j]);
        }
        total = total.combine(C64::new(1.0, 0.0), &prod, C64::new(sign, 0.0));
    }
    Ok(total)
}

/// Condition 2: max over ordered generator pairs of ‖P_in [[D,a],b] P_in‖.
pub fn order_one_check(t: &TruncatedTriple) -> CheckReport {
    let mut r = CheckReport::new("order_one");
    let mask = match t.band_mask(3) {
        Ok(m) => m,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    let mut worst: f64 = 0.0;
    let mut worst_pair = String::new();
    for (na, a) in t.generators() {
        let da = bracket_d(&a.op, t);
        for (nb, b) in t.generators() {
            let x = da.commutator(&b.op).compress(&mask);
            let v = if x.frobenius() <= ORDER_ONE_TOL * 1e-2 { x.frobenius() } else { x.op_norm() };
            if v > worst {
                worst = v;
                worst_pair = format!("[[D,{na}],{nb}]");
            }
        }
    }
    r.bound("residual", worst, ORDER_ONE_TOL);
    if !worst_pair.is_empty() {
        r.note(format!("largest: {worst_pair}"));
    }
    r
}

/// Least-squares fit of X by a multiplication operator M_c ⊗ 1 on the
/// modes |k| <= cutoff; for a module endomorphism this is the normalized
/// spinor trace.
pub fn algebra_projection(x: &MatrixOperator, t: &TruncatedTriple, cutoff: i64) -> Result<Coefficients> {
    let radius = t.band().lambda_full;
    let modes = ModeBox::new(t.p(), radius);
    let s = t.spinor_dim();
    let labels = t.mode_labels();
    let mut sum = vec![C64::new(0.0, 0.0); modes.len()];
    for (r, c, v) in x.triplets() {
        if r % s != c % s {
            continue;
        }
        let (lr, lc) = (&labels[r / s], &labels[c / s]);
        if mode_norm(lr) > cutoff || mode_norm(lc) > cutoff {
            continue;
        }
        let k: Vec<i64> = lr.iter().zip(lc).map(|(a, b)| a - b).collect();
        if let Some(i) = modes.index(&k) {
            sum[i] += v;
        }
    }
    // pair counts per shift on the box |k| <= cutoff
    let side = (2 * cutoff + 1) as f64;
    let values = (0..modes.len())
        .map(|i| {
            let k = modes.label(i);
            let count: f64 = k.iter().map(|&d| (side - d.abs() as f64).max(0.0)).product::<f64>() * s as f64;
            if count > 0.0 {
                sum[i] / count
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Coefficients { modes, values })
}

/// |[D,h]| computed in the algebra: the multiplication-operator part of
/// [D,h]*[D,h], square-rooted pointwise on a 4Λ+1 grid.
pub fn abs_bracket_symbol(h: &Element, t: &TruncatedTriple, cutoff: i64) -> Result<(Coefficients, f64)> {
    let dh = bracket_d(&h.op, t);
    let sq = dh.adjoint().mul(&dh);
    let c = algebra_projection(&sq, t, cutoff)?;
    let grid = fine_grid(t)?;
    let vals: Vec<C64> = grid.synthesize(&c).iter().map(|v| C64::new(v.re.max(0.0).sqrt(), 0.0)).collect();
    let mask = cutoff_mask(t, cutoff);
    let resid = sq.sub(&t.toeplitz(&c)?).compress(&mask).op_norm();
    let mut abs = grid.analyze(&vals, t.band().lambda_full);
    // drop FFT round-off so the multiplication operator stays sparse
    let top = abs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    abs.values.iter_mut().filter(|v| v.norm() <= 1e-15 * top).for_each(|v| *v = C64::new(0.0, 0.0));
    Ok((abs, resid))
}

fn fine_grid(t: &TruncatedTriple) -> Result<Grid> {
    let g = t.grid().ok_or_else(|| SgeoError::Unsupported("needs a periodic geometry".into()))?;
    Ok(Grid { points: 4 * t.band().lambda_full + 1, ..g })
}

/// [|[D,h]|, [D,a]] = 0 and [D,h]² ∈ A, both on the inner band.
pub fn symbol_commutation_check(h: &Element, a: &Element, t: &TruncatedTriple) -> CheckReport {
    let mut r = CheckReport::new("symbol_commutation");
    let cutoff = match t.band().checked_cutoff(3) {
        Ok(c) => c as i64,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    let (abs_c, square_resid) = match abs_bracket_symbol(h, t, cutoff) {
        Ok(v) => v,
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let abs_op = match t.toeplitz(&abs_c) {
        Ok(o) => o,
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let da = bracket_d(&a.op, t);
    let inner = cutoff_mask(t, cutoff);
    r.bound("abs_commutator", abs_op.commutator(&da).compress(&inner).op_norm(), 1e-9);
    r.bound("square_in_algebra", square_resid, 1e-9);
    // the same commutator with |[D,h]| from matrix functional calculus, kept
    // as a diagnostic: truncating before taking |.| spreads errors inward
    let dh = bracket_d(&h.op, t);
    if t.hilbert_dim() <= 600 {
        if let Ok(m) = crate::triple::functional_calculus(&dh.adjoint().mul(&dh), |v| v.max(0.0).sqrt()) {
            r.metric("matrix_abs_commutator", m.commutator(&da).compress(&inner).op_norm());
        }
    }
    r
}

/// [[D², h], h] = 2[D, h]² on the inner band.
pub fn double_identity_residual(h: &MatrixOperator, t: &TruncatedTriple) -> Result<f64> {
    let mask = t.band_mask(3)?;
    let d = t.dirac();
    let d2 = d.mul(d);
    let lhs = d2.commutator(h).commutator(h);
    let dh = d.commutator(h);
    let rhs = dh.mul(&dh).scale_real(2.0);
    Ok(lhs.sub(&rhs).compress(&mask).op_norm())
}

/// |D|²T = T|D|² + 2δ(T)|D| + δ²(T).
pub fn leibniz_residual(x: &MatrixOperator, t: &TruncatedTriple) -> Result<f64> {
    let mask = t.band_mask(1)?;
    let a = t.abs_dirac();
    let a2 = a.mul(&a);
    let d1 = a.commutator(x);
    let d2 = a.commutator(&d1);
    let rhs = x.mul(&a2).add(&d1.mul(&a).scale_real(2.0)).add(&d2);
    Ok(a2.mul(x).sub(&rhs).compress(&mask).op_norm())
}

/// p_k(x) = ‖ρ_k(x)‖ with ρ_k(x) the block upper-triangular Toeplitz matrix
/// with δ^j(x)/j! on the j-th block diagonal.
pub fn pk_norm(x: &MatrixOperator, t: &TruncatedTriple, k: usize) -> f64 {
    let n = x.dim();
    let abs_d = t.abs_dirac();
    let mut powers = vec![x.clone()];
    for j in 1..=k {
        let next = abs_d.commutator(&powers[j - 1]).scale_real(1.0 / j as f64);
        powers.push(next);
    }
    let mut entries = Vec::new();
    for (j, pj) in powers.iter().enumerate() {
        let tr = pj.triplets();
        for blk in 0..=(k - j) {
            for &(r, c, v) in &tr {
                entries.push((blk * n + r, (blk + j) * n + c, v));
            }
        }
    }
    MatrixOperator::from_triplets((k + 1) * n, entries).op_norm()
}

/// Maximum principle: ‖[D,h] b_n‖ → 0 for bumps b_n concentrating at
/// the maximum of h. `scales` are bump widths (fractions of the period, or
/// of [0, 1] on the interval), decreasing.
pub fn max_principle_check(h: &Element, t: &TruncatedTriple, scales: &[f64], factor: f64) -> CheckReport {
    let mut r = CheckReport::new("max_principle");
    let spread = h.symbol.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
        - h.symbol.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let dh = bracket_d(&h.op, t);
    let top = h.argmax();
    let x0 = t.grid_point(top);
    r.series("argmax", x0.clone());
    let (mask, period, bump_band) = match t.sampling() {
        Sampling::Fourier { period, .. } => {
            let lambda = t.band().lambda_full;
            let b = lambda / 2;
            let cutoff = lambda as i64 - b as i64 - t.band().generator_bandwidth as i64;
            if cutoff < 1 {
                r.inconclusive("band too small for the bumps");
                return r;
            }
            (cutoff_mask(t, cutoff), *period, b)
        }
        Sampling::Interval { .. } => match t.band_mask(2) {
            Ok(m) => (m, 1.0, 0),
            Err(e) => {
                r.inconclusive(e.to_string());
                return r;
            }
        },
    };
    let mut values = Vec::new();
    for &s in scales {
        let sigma = s * period;
        let bump = t.element_from_fn(
            |x| {
                let d = t.grid_distance(x, &x0);
                C64::new((-d * d / (2.0 * sigma * sigma)).exp(), 0.0)
            },
            bump_band,
        );
        let bump = match bump {
            Ok(b) => b,
            Err(e) => {
                r.fail(e.to_string());
                return r;
            }
        };
        let sup = bump.symbol.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        values.push(dh.mul(&bump.op).compress(&mask).op_norm() / sup);
    }
    r.series("commutator_on_bumps", values.clone());
    r.metric("symbol_spread", spread);
    if values.iter().all(|v| *v <= 1e-12) {
        r.note("[D,h] vanishes");
        return r;
    }
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * 1.01);
    let ratio = values.last().unwrap() / values[0].max(1e-300);
    r.bound("decay_ratio", ratio, factor);
    if !monotone {
        r.fail("sequence not decreasing");
    }
    r
}

/// e^{is|D|} T e^{-is|D|}.
pub fn geodesic_flow(x: &MatrixOperator, t: &TruncatedTriple, s: f64) -> MatrixOperator {
    let e = t.abs_dirac_eigen();
    let phases: Vec<C64> = e.values.iter().map(|&l| C64::from_polar(1.0, s * l)).collect();
    let u = e.basis.mul(&MatrixOperator::from_diagonal(&phases)).mul(&e.basis.adjoint());
    u.mul(x).mul(&u.adjoint())
}

/// ‖(γ_s(T) - T)/s - iδ(T)‖ = O(s): slope of the log residual against log s.
pub fn geodesic_flow_derivative_check(x: &MatrixOperator, t: &TruncatedTriple, steps: &[f64]) -> CheckReport {
    let mut r = CheckReport::new("geodesic_flow");
    let mask = match t.band_mask(1) {
        Ok(m) => m,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    let d = delta(x, t).scale(C64::new(0.0, 1.0));
    let res: Vec<f64> = steps
        .iter()
        .map(|&s| geodesic_flow(x, t, s).sub(x).scale_real(1.0 / s).sub(&d).compress(&mask).op_norm())
        .collect();
    r.series("steps", steps.to_vec());
    r.series("residuals", res.clone());
    // rounding in γ_s(T) - T is amplified by 1/s
    let floor = 1e-11 * x.compress(&mask).op_norm().max(1.0) / steps.iter().copied().fold(f64::INFINITY, f64::min);
    if res.iter().all(|v| *v <= floor) {
        r.note("T commutes with |D|");
        return r;
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        steps.iter().zip(&res).filter(|(_, v)| **v > floor).map(|(s, v)| (s.ln(), v.ln())).unzip();
    if lx.len() < 2 {
        r.inconclusive("too few nonzero residuals to fit");
        return r;
    }
    let order = linear_fit(&lx, &ly).1;
    r.at_least("order", order, 0.9);
    r
}
