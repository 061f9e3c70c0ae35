//! Charts from a volume form: fiber projections of the rank function, the
//! conditional expectation onto the algebra, orientation densities ρ_α,
//! the open-cover identity, localized derivations and Jacobians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calculus::bracket_d;
use crate::error::{Result, SgeoError};
use crate::hochschild::signed_permutations;
use crate::operator::{MatrixOperator, C64};
use crate::report::CheckReport;
use crate::triple::{eigendecompose, module_inner, Element, Grid, TruncatedTriple};

const I: C64 = C64::new(0.0, 1.0);

/// i^k for integer k.
pub fn i_pow(k: i64) -> C64 {
    [C64::new(1.0, 0.0), I, C64::new(-1.0, 0.0), -I][k.rem_euclid(4) as usize]
}

#[derive(Clone, Debug)]
pub struct ChartCandidate {
    pub name: String,
    pub a0: Element,
    pub coords: Vec<Element>,
    pub rho: Element,
    /// Grid points where |ρ_α| > 1e-3 max |ρ_α|.
    pub support_mask: Vec<bool>,
}

/// p_j = Π_{k≠j} (τ - k)/(j - k) for j = 0..=n.
pub fn fiber_projections(tau: &MatrixOperator, n: usize) -> Result<Vec<MatrixOperator>> {
    let eig = eigendecompose(tau)?;
    if let Some(v) = eig.values.iter().find(|v| {
        let r = v.round();
        (*v - r).abs() > 1e-6 || r < 0.0 || r > n as f64
    }) {
        return Err(SgeoError::InvalidArgument(format!("spectrum point {v} is not in {{0..{n}}}")));
    }
    let dim = tau.dim();
    let id = MatrixOperator::identity(dim);
    Ok((0..=n)
        .map(|j| {
            let mut acc = id.clone();
            for k in (0..=n).filter(|&k| k != j) {
                let factor = tau.sub(&id.scale_real(k as f64)).scale_real(1.0 / (j as f64 - k as f64));
                acc = acc.mul(&factor);
            }
            acc
        })
        .collect())
}

/// Normalized partial trace over the spinor index, lifted back as M ⊗ 1:
/// the conditional expectation on a module of constant rank S.
fn partial_trace(x: &MatrixOperator, s: usize) -> MatrixOperator {
    let mut entries = Vec::new();
    for (r, c, v) in x.triplets() {
        if r % s == c % s {
            let (mr, mc) = (r / s, c / s);
            for sp in 0..s {
                entries.push((mr * s + sp, mc * s + sp, v / s as f64));
            }
        }
    }
    MatrixOperator::from_triplets(x.dim(), entries)
}

/// E_A(T) = Σ_{j>0} (1/j) p_j Σ_k T_kk; on the periodic geometries the rank
/// function is the constant spinor dimension, so this is the normalized
/// spinor trace. T must commute with the generators on the inner band.
pub fn conditional_expectation(x: &MatrixOperator, t: &TruncatedTriple) -> Result<Element> {
    if t.grid().is_none() {
        return Err(SgeoError::Unsupported("conditional expectation needs a free module".into()));
    }
    let depth = validation_depth(t);
    let scale = x.max_abs().max(1.0);
    for name in t.generator_names() {
        let a = &t.generator(&name)?.op;
        let defect = t.band_norm(&x.commutator(a), depth)?;
        if defect > 1e-8 * scale {
            return Err(SgeoError::InvalidArgument(format!("not a module endomorphism: ‖[T,{name}]‖ = {defect:.3e}")));
        }
    }
    t.element_from_op(partial_trace(x, t.spinor_dim()))
}

fn validation_depth(t: &TruncatedTriple) -> usize {
    (1..=2).rev().find(|&d| t.band().inner_cutoff(d) >= 0).unwrap_or(0)
}

/// ρ_α = i^{p(p+1)/2} E_A(γ Σ_β ε(β) [D,a^{β(1)}] ⋯ [D,a^{β(p)}]), without γ
/// for odd p. The sign convention follows the triple's grading.
pub fn rho_alpha(t: &TruncatedTriple, coords: &[Element]) -> Result<Element> {
    let p = t.p();
    if coords.len() != p {
        return Err(SgeoError::DimensionMismatch { expected: p, got: coords.len() });
    }
    let brackets: Vec<MatrixOperator> = coords.iter().map(|a| bracket_d(&a.op, t)).collect();
    let n = t.hilbert_dim();
    let mut sum = MatrixOperator::zeros(n);
    for (perm, sign) in signed_permutations(p) {
        let mut prod = MatrixOperator::identity(n);
        for &j in &perm {
            prod = prod.mul(&brackets[j]);
        }
        sum = sum.add(&prod.scale_real(sign));
    }
    if p.is_multiple_of(2) {
        let gamma = t.grading().ok_or_else(|| SgeoError::InvalidArgument("even p needs a grading".into()))?;
        sum = gamma.mul(&sum);
    }
    let phase = i_pow((p * (p + 1) / 2) as i64);
    // E_A acts on the zero-mode column only, so truncation edges do not enter
    let e = t.element_from_op(partial_trace(&sum, t.spinor_dim()))?;
    Ok(e.scale(phase))
}

fn support_mask(rho: &Element) -> Vec<bool> {
    let max = rho.symbol.iter().map(|v| v.norm()).fold(0.0, f64::max);
    rho.symbol.iter().map(|v| v.norm() > 1e-3 * max).collect()
}

/// Builds a chart from its coordinates; a0 is filled in by [`normalize_cover`].
pub fn chart(t: &TruncatedTriple, name: &str, coords: Vec<Element>) -> Result<ChartCandidate> {
    for (k, c) in coords.iter().enumerate() {
        if c.op.hermitian_defect() > 1e-12 {
            return Err(SgeoError::InvalidArgument(format!("coordinate {k} of chart {name} is not Hermitian")));
        }
    }
    let rho = rho_alpha(t, &coords)?;
    Ok(ChartCandidate { name: name.into(), a0: t.unit().scale(C64::new(0.0, 0.0)), support_mask: support_mask(&rho), coords, rho })
}

/// Sets a_α⁰ = i^{p(p+1)/2} ρ_α* / N with N the grid mean of Σ_α |ρ_α|²,
/// which solves the cover identity when Σ_α |ρ_α|² is constant.
pub fn normalize_cover(t: &TruncatedTriple, charts: &mut [ChartCandidate]) {
    let len = t.grid_len();
    let norm = (0..len).map(|i| charts.iter().map(|c| c.rho.symbol[i].norm_sqr()).sum::<f64>()).sum::<f64>() / len as f64;
    let phase = i_pow((t.p() * (t.p() + 1) / 2) as i64);
    for c in charts.iter_mut() {
        c.a0 = c.rho.adjoint().scale(phase / norm);
    }
}

/// Coordinates sin(2π(x_μ - s_μ)/L)·L/2π for every shift pattern s_μ ∈
/// {0, L/4}: 2^p charts whose densities are products of cosines and sines.
pub fn standard_charts(t: &TruncatedTriple) -> Result<Vec<ChartCandidate>> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("standard charts need a periodic geometry".into()))?;
    let p = t.p();
    let period = grid.period;
    let k = 2.0 * std::f64::consts::PI / period;
    let mut charts = Vec::new();
    for mask in 0..(1usize << p) {
        let coords = (0..p)
            .map(|mu| {
                let shift = if mask >> mu & 1 == 1 { period / 4.0 } else { 0.0 };
                t.element_from_fn(|x| C64::new((k * (x[mu] - shift)).sin() / k, 0.0), 1)
            })
            .collect::<Result<Vec<_>>>()?;
        charts.push(chart(t, &format!("chart{mask:0p$b}"), coords)?);
    }
    normalize_cover(t, &mut charts);
    Ok(charts)
}

/// i^{-p(p+1)/2} Σ_α a_α⁰ ρ_α = 1 on the grid, and min_x max_α |ρ_α(x)| > 0.
pub fn cover_check(t: &TruncatedTriple, charts: &[ChartCandidate]) -> CheckReport {
    let mut r = CheckReport::new("cover");
    if charts.is_empty() {
        r.fail("no charts");
        return r;
    }
    let phase = i_pow(-((t.p() * (t.p() + 1) / 2) as i64));
    let mut residual: f64 = 0.0;
    for i in 0..t.grid_len() {
        let s: C64 = charts.iter().map(|c| c.a0.symbol[i] * c.rho.symbol[i]).sum::<C64>() * phase;
        residual = residual.max((s - 1.0).norm());
    }
    // positivity on a finer grid whose spacing divides the quarter period
    let Some(grid) = t.grid() else {
        r.fail("cover check needs a periodic geometry");
        return r;
    };
    let coeffs: Vec<_> = match charts.iter().map(|c| t.symbol_coefficients(&c.rho.op)).collect::<Result<Vec<_>>>() {
        Ok(cs) => cs.into_iter().map(|c| c.with_radius(c.bandwidth(1e-14))).collect(),
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let fine = Grid { p: grid.p, points: 4 * grid.points.min(12), period: grid.period };
    let (mut worst, mut worst_at) = (f64::INFINITY, 0);
    let mut zero_set = Vec::new();
    for i in 0..fine.len() {
        let x = fine.point(i);
        let m = coeffs.iter().map(|c| c.eval(&x, grid.period).norm()).fold(0.0, f64::max);
        if m < worst {
            worst = m;
            worst_at = i;
        }
        if m <= 1e-6 && zero_set.len() < 16 {
            zero_set.push(x);
        }
    }
    r.metric("charts", charts.len() as f64);
    r.metric("min_max_rho", worst);
    r.series("min_max_rho_at", fine.point(worst_at));
    r.bound("identity_residual", residual, 1e-6);
    r.at_least("min_max_rho", worst, 1e-6);
    if !zero_set.is_empty() {
        r.note(format!("ρ vanishes for every chart at {zero_set:?}"));
    }
    r
}

/// δ(a) = i(ξ|[D,a]ξ) as an element.
pub fn localized_derivation(xi: &[C64], a: &Element, t: &TruncatedTriple) -> Result<Element> {
    let da = bracket_d(&a.op, t);
    let g = module_inner(t, xi, &da.apply(xi))?;
    Ok(t.element_from_op(g)?.scale(I))
}

fn eval_element(t: &TruncatedTriple, e: &Element, x: &[f64]) -> Result<C64> {
    let period = t.grid().map(|g| g.period).unwrap_or(1.0);
    Ok(t.symbol_coefficients(&e.op)?.eval(x, period))
}

/// |ξ(x)|² evaluated from the Fourier coefficients.
pub fn pointwise_norm_sqr(t: &TruncatedTriple, xi: &[C64], x: &[f64]) -> Result<f64> {
    let period = t.grid().map(|g| g.period).unwrap_or(1.0);
    let mut acc = 0.0;
    for sp in 0..t.spinor_dim() {
        acc += t.spinor_component(xi, sp)?.eval(x, period).norm_sqr();
    }
    Ok(acc)
}

/// Default Jacobian threshold relative to the natural scale.
pub const JACOBIAN_THRESHOLD: f64 = 1e-3;

/// det(δ_j(a^k))(x) for the derivations δ_j = i(ξ_j|[D,·]ξ_j), cross-checked
/// against ρ(x) of the same coordinates (the γ-trace of the multicommutator).
pub fn jacobian_test(t: &TruncatedTriple, coords: &[Element], frames: &[Vec<C64>], x: &[f64]) -> CheckReport {
    let mut r = CheckReport::new("jacobian");
    let p = t.p();
    if coords.len() != p || frames.len() != p {
        r.fail(format!("need {p} coordinates and {p} frame vectors"));
        return r;
    }
    let run = || -> Result<(f64, f64, f64, bool)> {
        let period = t.grid().map(|g| g.period).unwrap_or(1.0);
        let mut weights = Vec::new();
        for xi in frames {
            let peak = (0..t.grid_len()).map(|i| pointwise_norm_sqr(t, xi, &t.grid_point(i))).collect::<Result<Vec<_>>>()?;
            let max = peak.iter().copied().fold(0.0, f64::max);
            let here = pointwise_norm_sqr(t, xi, x)?;
            if here < 1e-3 * max {
                return Ok((0.0, 0.0, 0.0, false));
            }
            weights.push(here);
        }
        let mut m = DMatrix::<C64>::zeros(p, p);
        for (j, xi) in frames.iter().enumerate() {
            for (k, a) in coords.iter().enumerate() {
                m[(j, k)] = eval_element(t, &localized_derivation(xi, a, t)?, x)?;
            }
        }
        let det = m.determinant().norm();
        let coord_scale: f64 = coords
            .iter()
            .map(|a| a.symbol.iter().map(|v| v.norm()).fold(0.0, f64::max) * 2.0 * std::f64::consts::PI / period)
            .product();
        let scale = coord_scale * weights.iter().product::<f64>();
        let rho = eval_element(t, &rho_alpha(t, coords)?, x)?.norm();
        Ok((det, scale, rho / coord_scale.max(1e-300), true))
    };
    match run() {
        Ok((_, _, _, false)) => r.inconclusive("x is outside the support of a frame vector"),
        Ok((det, scale, rho_rel, true)) => {
            r.metric("det", det);
            r.metric("scale", scale);
            r.metric("rho_relative", rho_rel);
            r.at_least("relative_det", det / scale.max(1e-300), JACOBIAN_THRESHOLD);
            r.at_least("rho_cross_check", rho_rel, JACOBIAN_THRESHOLD);
        }
        Err(e) => r.fail(e.to_string()),
    }
    r
}

/// Entries a_kl = (η_k|T η_l) of an endomorphism in the constant frame
/// η_k = 1 ⊗ e_k, and the operator Σ a_kl ⊗ E_kl rebuilt from them.
pub fn frame_decomposition(t: &TruncatedTriple, x: &MatrixOperator) -> Result<(Vec<Vec<Element>>, MatrixOperator)> {
    let s = t.spinor_dim();
    let one = |k: usize| {
        let mut e = vec![C64::new(0.0, 0.0); s];
        e[k] = C64::new(1.0, 0.0);
        t.vector_from_fn(|_| C64::new(1.0, 0.0), 0, &e)
    };
    let frame = (0..s).map(one).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    let mut rebuilt = MatrixOperator::zeros(t.hilbert_dim());
    for k in 0..s {
        let mut row = Vec::new();
        for l in 0..s {
            let e = t.element_from_op(module_inner(t, &frame[k], &x.apply(&frame[l]))?)?;
            let mut unit = DMatrix::<C64>::zeros(s, s);
            unit[(k, l)] = C64::new(1.0, 0.0);
            rebuilt = rebuilt.add(&e.op.mul(&t.spinor_operator(&unit)));
            row.push(e);
        }
        entries.push(row);
    }
    Ok((entries, rebuilt))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartSummary {
    pub name: String,
    pub support_fraction: f64,
}

pub fn summarize(charts: &[ChartCandidate]) -> Vec<ChartSummary> {
    charts
        .iter()
        .map(|c| ChartSummary {
            name: c.name.clone(),
            support_fraction: c.support_mask.iter().filter(|&&b| b).count() as f64 / c.support_mask.len().max(1) as f64,
        })
        .collect()
}
