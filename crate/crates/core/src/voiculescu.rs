//! The obstruction k_J over spectral cutoffs A_ε = f(ε|D|), its localized
//! form on a region K, and the commutator decay ‖[f(ε|D|), a]‖ = O(ε).

use serde::{Deserialize, Serialize};

use crate::dixmier::{log_trace_slope, Cutoff};
use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};
use crate::report::{linear_fit, CheckReport};
use crate::spectral::singular_profile;
use crate::triple::{functional_calculus, Element, Grid, TruncatedTriple};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstructionEstimate {
    /// (ε, max_j ‖[A_ε, a_j]‖_(p,1)) over the valid grid, ε descending.
    pub per_epsilon: Vec<(f64, f64)>,
    pub ranks: Vec<usize>,
    /// min over the trailing third of the sweep (the small-ε regime).
    pub value: f64,
    /// The trailing third of the sweep is flat within 10% or has decayed
    /// below 1e-3 of the peak.
    pub regime_ok: bool,
}

impl ObstructionEstimate {
    fn from_sweep(per_epsilon: Vec<(f64, f64)>, ranks: Vec<usize>) -> Self {
        let peak = per_epsilon.iter().map(|e| e.1).fold(0.0, f64::max);
        let k = (per_epsilon.len() / 3).max(2).min(per_epsilon.len());
        let tail = &per_epsilon[per_epsilon.len() - k..];
        let value = tail.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.1), hi.max(e.1)));
        let regime_ok = hi <= 1e-3 * peak.max(1e-300) || (hi - lo) <= 0.1 * hi;
        ObstructionEstimate { per_epsilon, ranks, value, regime_ok }
    }
}

/// ε values (descending) with ε·Λ_eff >= support of f.
fn valid_eps(f: Cutoff, eps_grid: &[f64], t: &TruncatedTriple) -> Result<Vec<f64>> {
    let lam = t.effective_lambda();
    let mut eps: Vec<f64> = eps_grid.iter().copied().filter(|e| e * lam >= f.support()).collect();
    if eps.is_empty() {
        return Err(SgeoError::InvalidArgument("no ε in the grid respects the band guard".into()));
    }
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eps)
}

/// A_ε = f(ε|D|), clamped to [0, 1].
pub fn spectral_cutoff(t: &TruncatedTriple, f: Cutoff, eps: f64) -> MatrixOperator {
    t.abs_dirac_function(|l| f.eval(eps * l).clamp(0.0, 1.0))
}

fn cutoff_rank(t: &TruncatedTriple, f: Cutoff, eps: f64) -> usize {
    t.abs_dirac_eigen().values.iter().filter(|&&l| f.eval(eps * l) > 0.0).count()
}

/// k_J({a_j}) ≈ liminf_{ε→0} max_j ‖[f(ε|D|), a_j]‖_(p,1).
pub fn kj_estimate(a_list: &[Element], t: &TruncatedTriple, f: Cutoff, eps_grid: &[f64]) -> Result<ObstructionEstimate> {
    for a in a_list {
        if a.op.hermitian_defect() > 1e-10 {
            return Err(SgeoError::InvalidArgument("k_J needs Hermitian elements".into()));
        }
    }
    let p = t.p() as f64;
    let eps = valid_eps(f, eps_grid, t)?;
    let mut sweep = Vec::new();
    let mut ranks = Vec::new();
    for &e in &eps {
        let a_eps = spectral_cutoff(t, f, e);
        let worst = a_list.iter().map(|a| singular_profile(&a_eps.commutator(&a.op)).lp1(p)).fold(0.0, f64::max);
        sweep.push((e, worst));
        ranks.push(cutoff_rank(t, f, e));
    }
    Ok(ObstructionEstimate::from_sweep(sweep, ranks))
}

/// Region K for the localized estimate.
pub type Region<'a> = &'a dyn Fn(&[f64]) -> bool;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalizedEstimate {
    pub estimate: ObstructionEstimate,
    /// ‖M_K - P_K‖_F / ‖M_K‖_F: how far the compressed indicator is from
    /// the projection that replaces it.
    pub projection_adjustment: f64,
    /// min over the plateau family of ∫- b |D|^{-p}.
    pub lambda_k: f64,
    /// max over the plateau family of max_{x∈K} |b(x) - 1|.
    pub plateau_defect: f64,
    /// (ε, remainder norm) for the first element and plateau.
    pub remainder: Vec<(f64, f64)>,
    pub remainder_order: f64,
}

/// Compressed indicator of K (Fourier coefficients from a fine Riemann sum)
/// and its closest projection (spectral projection on [1/2, ∞)).
pub fn region_projection(t: &TruncatedTriple, region: Region) -> Result<(MatrixOperator, f64)> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("regions need a periodic geometry".into()))?;
    let radius = t.band().lambda_full;
    let fine = Grid { p: grid.p, points: 8 * (2 * radius + 1), period: grid.period };
    let values: Vec<C64> = (0..fine.len()).map(|i| if region(&fine.point(i)) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect();
    let coeffs = fine.analyze(&values, 2 * radius);
    let m = t.toeplitz(&coeffs)?.hermitian_part();
    let proj = functional_calculus(&m, |v| if v >= 0.5 { 1.0 } else { 0.0 })?;
    let fro = m.frobenius();
    let adjustment = if fro > 0.0 { m.sub(&proj).frobenius() / fro } else { 0.0 };
    Ok((proj, adjustment))
}

/// Localized k_J with R_ε = 1_K f(ε|D|) 1_K acting on 1_K H against the
/// compressions 1_K a_j 1_K, plus λ(K) over the plateau family and the
/// remainder ‖[R_ε,a] - ½ε(1_K f'(ε|D|) b δ(a) 1_K + 1_K δ(a) b f'(ε|D|) 1_K)‖.
pub fn localized_kj(
    a_list: &[Element],
    region: Region,
    plateaus: &[Element],
    t: &TruncatedTriple,
    f: Cutoff,
    eps_grid: &[f64],
) -> Result<LocalizedEstimate> {
    if a_list.is_empty() || plateaus.is_empty() {
        return Err(SgeoError::InvalidArgument("need elements and at least one plateau function".into()));
    }
    let (proj, adjustment) = region_projection(t, region)?;
    let eps = valid_eps(f, eps_grid, t)?;
    let p = t.p() as f64;
    if proj.frobenius() == 0.0 {
        let sweep = eps.iter().map(|&e| (e, 0.0)).collect();
        let mut out = LocalizedEstimate::default();
        out.estimate = ObstructionEstimate { per_epsilon: sweep, ranks: vec![0; eps.len()], value: 0.0, regime_ok: true };
        return Ok(out);
    }
    let local: Vec<MatrixOperator> = a_list.iter().map(|a| proj.mul(&a.op).mul(&proj)).collect();
    let abs_d = t.abs_dirac();
    let a0 = &a_list[0].op;
    let b = &plateaus[0].op;
    let delta_a = abs_d.commutator(a0);
    let mut sweep = Vec::new();
    let mut ranks = Vec::new();
    let mut remainder = Vec::new();
    for &e in &eps {
        let r = proj.mul(&spectral_cutoff(t, f, e)).mul(&proj);
        let worst = local.iter().map(|a| singular_profile(&r.commutator(a)).lp1(p)).fold(0.0, f64::max);
        sweep.push((e, worst));
        ranks.push(cutoff_rank(t, f, e));
        let fp = t.abs_dirac_function(|l| f.derivative(e * l));
        let lead = proj
            .mul(&fp)
            .mul(b)
            .mul(&delta_a)
            .mul(&proj)
            .add(&proj.mul(&delta_a).mul(b).mul(&fp).mul(&proj))
            .scale_real(0.5 * e);
        remainder.push((e, singular_profile(&r.commutator(a0).sub(&lead)).lp1(p)));
    }
    let lx: Vec<f64> = remainder.iter().map(|r| r.0.ln()).collect();
    let ly: Vec<f64> = remainder.iter().map(|r| r.1.max(1e-300).ln()).collect();
    let remainder_order = if remainder.len() >= 2 { linear_fit(&lx, &ly).1 } else { f64::NAN };
    let lambda_k = plateaus.iter().map(|b| log_trace_slope(&b.op, t).0.re).fold(f64::INFINITY, f64::min);
    let plateau_defect = plateaus.iter().map(|b| plateau_defect(t, b, region)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(LocalizedEstimate {
        estimate: ObstructionEstimate::from_sweep(sweep, ranks),
        projection_adjustment: adjustment,
        lambda_k,
        plateau_defect,
        remainder,
        remainder_order,
    })
}

fn plateau_defect(t: &TruncatedTriple, b: &Element, region: Region) -> Result<f64> {
    let grid = t.grid().unwrap();
    let coeffs = t.symbol_coefficients(&b.op)?;
    let fine = Grid { p: grid.p, points: 4 * grid.points, period: grid.period };
    let mut worst: f64 = 0.0;
    for i in 0..fine.len() {
        let x = fine.point(i);
        if region(&x) {
            worst = worst.max((coeffs.eval(&x, grid.period) - 1.0).norm());
        }
    }
    Ok(worst)
}

/// Three plateau functions for an arc/box K = {|x_μ - c_μ| <= h_μ}: 1 on K,
/// linear ramps of widths w ∈ {1/4, 1/8, 1/16} of the period outside,
/// band-limited at Λ/2.
pub fn plateau_family(t: &TruncatedTriple, center: &[f64], half_width: &[f64]) -> Result<Vec<Element>> {
    let grid = t.grid().ok_or_else(|| SgeoError::Unsupported("plateaus need a periodic geometry".into()))?;
    let period = grid.period;
    let band = (t.band().lambda_full / 2).max(1);
    [4.0, 8.0, 16.0]
        .iter()
        .map(|div| {
            let w = period / div;
            t.element_from_fn(
                |x| {
                    let v = x.iter().zip(center).zip(half_width).map(|((&x, &c), &h)| {
                        let d = (x - c).rem_euclid(period);
                        let d = d.min(period - d);
                        (1.0 - (d - h).max(0.0) / w).max(0.0)
                    });
                    C64::new(v.product(), 0.0)
                },
                band,
            )
        })
        .collect()
}

/// C_f = (2π)^{-1} ∫ |s f̂(s)| ds for f extended evenly; f̂ by quadrature.
/// Diverges (logarithmically in the cut) for the hat function.
pub fn decay_constant(f: Cutoff) -> f64 {
    let nu = 2000;
    let du = f.support() / nu as f64;
    let samples: Vec<(f64, f64)> = (0..nu).map(|i| {
        let u = (i as f64 + 0.5) * du;
        (u, f.eval(u))
    }).collect();
    let (s_max, ns) = (400.0, 8000);
    let ds = s_max / ns as f64;
    let mut acc = 0.0;
    for j in 0..ns {
        let s = (j as f64 + 0.5) * ds;
        let fhat: f64 = 2.0 * samples.iter().map(|(u, v)| v * (s * u).cos()).sum::<f64>() * du;
        acc += (s * fhat).abs() * ds;
    }
    2.0 * acc / (2.0 * std::f64::consts::PI)
}

/// sup_ε ‖[f(ε|D|), a]‖ / (ε ‖[D,a]‖) <= C_f (10% slack), with the norms
/// read on the inner band; the untruncated ratio is reported alongside.
pub fn commutator_decay_check(a: &Element, t: &TruncatedTriple, f: Cutoff, eps_grid: &[f64]) -> CheckReport {
    let mut r = CheckReport::new("commutator_decay");
    let da = t.dirac().commutator(&a.op);
    let depth = (1..=2).rev().find(|&d| t.band().inner_cutoff(d) >= 0).unwrap_or(0);
    let da_norm = match t.band_norm(&da, depth) {
        Ok(v) => v,
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let scale = a.op.max_abs().max(1.0);
    if da_norm <= 1e-12 * scale {
        r.note("[D,a] = 0: vacuous");
        r.metric("ratio_max", 0.0);
        return r;
    }
    let eps = match valid_eps(f, eps_grid, t) {
        Ok(e) => e,
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let c_f = decay_constant(f);
    let (mut ratios, mut full) = (Vec::new(), Vec::new());
    for &e in &eps {
        let comm = spectral_cutoff(t, f, e).commutator(&a.op);
        ratios.push(t.band_norm(&comm, depth).unwrap_or(f64::NAN) / (e * da_norm));
        full.push(comm.op_norm() / (e * da.op_norm()));
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    r.metric("c_f", c_f);
    r.metric("ratio_full_max", full.iter().copied().fold(0.0, f64::max));
    r.series("eps", eps);
    r.series("ratio", ratios);
    r.series("ratio_full", full);
    r.bound("ratio_max", worst, 1.1 * c_f);
    r
}
