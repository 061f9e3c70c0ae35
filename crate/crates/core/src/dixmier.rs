//! Logarithmic traces: Cesàro means, Dixmier-trace estimators, heat
//! functionals and the absolute-continuity fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgeoError};
use crate::operator::{inner, MatrixOperator, C64};
use crate::report::{linear_fit, CheckReport, LimitEstimate};
use crate::spectral::{counting_function, profile_from_values};
use crate::triple::{functional_calculus, module_inner, Coefficients, Element, ModeBox, TruncatedTriple};

/// Spectral cutoff f with f = 1 near 0 and f = 0 on [1, ∞).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cutoff {
    /// (1 - u)₊
    #[default]
    Hat,
    /// C^∞: 1 on [0, 1/2], 0 on [1, ∞).
    Smooth,
}

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl Cutoff {
    pub fn eval(self, u: f64) -> f64 {
        let u = u.abs();
        match self {
            Cutoff::Hat => (1.0 - u).max(0.0),
            Cutoff::Smooth => {
                if u <= 0.5 {
                    1.0
                } else if u >= 1.0 {
                    0.0
                } else {
                    let s = 2.0 * (u - 0.5);
                    psi(1.0 - s) / (psi(1.0 - s) + psi(s))
                }
            }
        }
    }

    pub fn derivative(self, u: f64) -> f64 {
        match self {
            Cutoff::Hat => {
                if u.abs() < 1.0 {
                    -u.signum()
                } else {
                    0.0
                }
            }
            Cutoff::Smooth => {
                let h = 1e-6;
                (self.eval(u + h) - self.eval(u - h)) / (2.0 * h)
            }
        }
    }

    /// Right end of the support.
    pub fn support(self) -> f64 {
        1.0
    }

    /// ρ = p ∫₀^∞ u^{p-1} f(u) du (composite Simpson).
    pub fn rho(self, p: usize) -> f64 {
        let n = 4000;
        let h = self.support() / n as f64;
        let g = |u: f64| p as f64 * u.powi(p as i32 - 1) * self.eval(u);
        let mut acc = g(0.0) + g(self.support());
        for i in 1..n {
            acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }
}

/// M(f)(λ) = (1/log λ) ∫₁^λ f(u) du/u on a grid given by log λ (starting at
/// 0), trapezoidal in log u, iterated `iterations` times.
pub fn cesaro_mean(log_lambda: &[f64], values: &[f64], iterations: usize) -> Result<Vec<f64>> {
    if log_lambda.len() < 8 || log_lambda.len() != values.len() {
        return Err(SgeoError::InvalidArgument("Cesàro mean needs at least 8 matching samples".into()));
    }
    let mut cur = values.to_vec();
    for _ in 0..iterations {
        let mut out = Vec::with_capacity(cur.len());
        let mut integral = 0.0;
        out.push(cur[0]);
        for i in 1..cur.len() {
            let du = log_lambda[i] - log_lambda[i - 1];
            integral += 0.5 * du * (cur[i] + cur[i - 1]);
            let span = log_lambda[i] - log_lambda[0];
            out.push(if span > 0.0 { integral / span } else { cur[i] });
        }
        cur = out;
    }
    Ok(cur)
}

/// Diagonal of V* T V in the |D| eigenbasis (ascending |D|). Eigenvectors
/// of |D| live on few modes, so only their support is visited.
fn eigen_diagonal(x: &MatrixOperator, t: &TruncatedTriple) -> Vec<C64> {
    t.abs_dirac_eigen()
        .sparse_columns()
        .iter()
        .map(|col| {
            let mut acc = C64::new(0.0, 0.0);
            for &(i, a) in col {
                for &(j, b) in col {
                    acc += a.conj() * x.get(i, j) * b;
                }
            }
            acc
        })
        .collect()
}

/// Slope of a partial-sum sequence S_N against log N on [lo, hi].
fn log_slope(partial: &[f64], lo: usize, hi: usize) -> (f64, f64, Vec<f64>) {
    let ns: Vec<usize> = geometric_points(lo, hi, 64);
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = ns.iter().map(|&n| partial[n - 1]).collect();
    let (_, slope, stderr) = linear_fit(&x, &y);
    // local slopes over four sub-windows
    let q = x.len() / 4;
    let local = (0..4).map(|i| linear_fit(&x[i * q..(i + 1) * q], &y[i * q..(i + 1) * q]).1).collect();
    (slope, stderr, local)
}

fn geometric_points(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let f = i as f64 / (count - 1) as f64;
            ((lo as f64).ln() * (1.0 - f) + (hi as f64).ln() * f).exp().round() as usize
        })
        .collect();
    out.dedup();
    out
}

/// Complex slope of Tr(E_N |D|^{-p} T) against log N, N in [dim/16, dim/2]
/// (linear in T, no positivity needed).
pub fn log_trace_slope(x: &MatrixOperator, t: &TruncatedTriple) -> (C64, LimitEstimate) {
    let vals = &t.abs_dirac_eigen().values;
    let p = t.p() as i32;
    let diag = eigen_diagonal(x, t);
    let n = diag.len();
    let (mut re, mut im) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut sr, mut si) = (0.0, 0.0);
    for (d, l) in diag.iter().zip(vals) {
        let w = l.powi(-p);
        sr += w * d.re;
        si += w * d.im;
        re.push(sr);
        im.push(si);
    }
    let (lo, hi) = ((n / 16).max(1), (n / 2).max(2));
    let (slope_re, stderr, local) = log_slope(&re, lo, hi);
    let (slope_im, _, _) = log_slope(&im, lo, hi);
    let mut est = LimitEstimate::exact(slope_re);
    est.stderr = stderr;
    let first = local[0];
    let last = *local.last().unwrap();
    est.trend_slope = (last - first) / slope_re.abs().max(1e-300) / (hi as f64 / lo as f64).log2().max(1.0) * 2.0;
    est.converged = est.trend_slope.abs() <= 0.01;
    est.window_values = local;
    est.diagnostics.insert("window_lo".into(), lo as f64);
    est.diagnostics.insert("window_hi".into(), hi as f64);
    (C64::new(slope_re, slope_im), est)
}

/// Largest dimension for which estimator (i) (singular values of
/// T^{1/2}|D|^{-p}T^{1/2}) is computed for a general T.
pub const SVD_ESTIMATOR_DIM: usize = 700;

/// Tr_ω(T|D|^{-p}) for T >= 0: estimator (ii) as the value, estimator (i)
/// as a reconciliation diagnostic.
pub fn dixmier_estimate(x: &MatrixOperator, t: &TruncatedTriple) -> Result<LimitEstimate> {
    let n = t.hilbert_dim();
    let tol = 1e-10 * x.max_abs().max(1.0);
    if x.hermitian_defect() > tol {
        return Err(SgeoError::InvalidArgument("Dixmier estimate needs a positive operator".into()));
    }
    let diag = eigen_diagonal(x, t);
    if diag.iter().any(|d| d.re < -tol) {
        return Err(SgeoError::InvalidArgument("operator is not positive".into()));
    }
    let (_, mut est) = log_trace_slope(x, t);
    let vals = &t.abs_dirac_eigen().values;
    let p = t.p() as i32;
    let is_identity = x.sub(&MatrixOperator::identity(n)).max_abs() == 0.0;
    let singular: Option<Vec<f64>> = if is_identity {
        Some(vals.iter().map(|l| l.powi(-p)).collect())
    } else if n <= SVD_ESTIMATOR_DIM {
        let root = functional_calculus(&x.hermitian_part(), |v| v.max(0.0).sqrt())?;
        let weight = t.abs_dirac_function(|l| l.powi(-p));
        Some(root.mul(&weight).mul(&root).singular_values())
    } else {
        None
    };
    if let Some(mu) = singular {
        let prof = profile_from_values(mu, n);
        let (lo, hi) = ((n / 16).max(1), (n / 2).max(2));
        let (slope_i, _, _) = log_slope(&prof.sigma, lo, hi);
        est.diagnostics.insert("estimator_i".into(), slope_i);
        let gap = (slope_i - est.value).abs() / est.value.abs().max(1e-300);
        est.diagnostics.insert("reconciliation_gap".into(), if est.value == 0.0 && slope_i == 0.0 { 0.0 } else { gap });
    }
    if est.value.abs() < 1e-14 {
        est.value = 0.0;
    }
    Ok(est)
}

/// Tr_ω(T|D|^{-p}) for Hermitian T via T = (T + c) - c with c = ‖T‖.
pub fn dixmier_estimate_hermitian(x: &MatrixOperator, t: &TruncatedTriple) -> Result<LimitEstimate> {
    let c = x.op_norm();
    let id = MatrixOperator::identity(x.dim());
    let plus = dixmier_estimate(&x.add(&id.scale_real(c)), t)?;
    let unit = dixmier_estimate(&id, t)?;
    let mut est = plus.clone();
    est.value = plus.value - c * unit.value;
    Ok(est)
}

/// ε^p Tr(f(ε|D|) T) on the ε grid; points with ε·Λ_eff < support(f) are
/// invalid (NaN). The reading is the mean over the smallest third of the
/// valid ε values, with the drift across that window as trend.
pub fn heat_functional(x: &MatrixOperator, f: Cutoff, eps_grid: &[f64], t: &TruncatedTriple) -> Result<LimitEstimate> {
    let diag = eigen_diagonal(x, t);
    let vals = &t.abs_dirac_eigen().values;
    let lam_eff = t.effective_lambda();
    let p = t.p() as i32;
    let mut eps: Vec<f64> = eps_grid.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let series: Vec<f64> = eps
        .iter()
        .map(|&e| {
            if e * lam_eff < f.support() {
                return f64::NAN;
            }
            let s: f64 = diag.iter().zip(vals).map(|(d, &l)| f.eval(e * l) * d.re).sum();
            e.powi(p) * s
        })
        .collect();
    let valid: Vec<(f64, f64)> = eps.iter().copied().zip(series.iter().copied()).filter(|(_, v)| v.is_finite()).collect();
    if valid.len() < 3 {
        return Err(SgeoError::InvalidArgument("fewer than 3 valid ε points for this band".into()));
    }
    let k = (valid.len() / 3).max(2);
    let window: Vec<(f64, f64)> = valid[valid.len() - k..].to_vec();
    let value = window.iter().map(|w| w.1).sum::<f64>() / k as f64;
    let (e0, v0) = window[0];
    let (e1, v1) = window[k - 1];
    let doublings = (e0 / e1).log2().max(1e-9);
    let trend = (v1 - v0) / value.abs().max(1e-12) / doublings;
    let mut est = LimitEstimate {
        value,
        window_values: window.iter().map(|w| w.1).collect(),
        trend_slope: trend,
        converged: trend.abs() <= 0.01,
        stderr: 0.0,
        diagnostics: Default::default(),
    };
    let logs: Vec<f64> = valid.iter().map(|(e, _)| (valid[0].0 / e).ln()).collect();
    let vs: Vec<f64> = valid.iter().map(|(_, v)| *v).collect();
    if let Ok(m) = cesaro_mean(&logs, &vs, 2) {
        est.diagnostics.insert("cesaro2_at_smallest_eps".into(), *m.last().unwrap());
    }
    est.diagnostics.insert("liminf_window".into(), window.iter().map(|w| w.1).fold(f64::INFINITY, f64::min));
    est.diagnostics.insert("valid_points".into(), valid.len() as f64);
    Ok(est)
}

/// The heat functional against ρ·Tr_ω(T|D|^{-p}).
pub fn heat_vs_dixmier(x: &MatrixOperator, f: Cutoff, eps_grid: &[f64], t: &TruncatedTriple) -> CheckReport {
    let mut r = CheckReport::new("heat_vs_dixmier");
    let lam = t.effective_lambda();
    let lambdas: Vec<f64> = (0..16).map(|i| lam / 8.0 * 4f64.powf(i as f64 / 15.0)).collect();
    let counts = counting_function(t, &lambdas);
    let p = t.p() as i32;
    let lower = lambdas.iter().zip(&counts).map(|(l, &c)| c as f64 / l.powi(p)).fold(f64::INFINITY, f64::min);
    r.metric("counting_liminf", lower);
    if !(lower > 0.0) {
        r.inconclusive("λ^{-p} α(λ) does not stay positive");
        return r;
    }
    let rho = f.rho(t.p());
    r.metric("rho", rho);
    let dix = match dixmier_estimate_hermitian(x, t) {
        Ok(d) => d,
        Err(e) => {
            r.fail(e.to_string());
            return r;
        }
    };
    let heat = match heat_functional(x, f, eps_grid, t) {
        Ok(h) => h,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    let target = rho * dix.value;
    r.metric("heat", heat.value);
    r.metric("dixmier", dix.value);
    r.metric("rho_dixmier", target);
    r.series("heat_window", heat.window_values.clone());
    let diff = (heat.value - target).abs();
    if target.abs() >= 0.02 {
        r.bound("relative_gap", diff / target.abs(), 0.07);
        let liminf = heat.diagnostics["liminf_window"];
        // liminf ε^p Tr(f(ε|D|)T) <= ρ Tr_ω, with 2% slack
        r.at_least("one_sided_slack", (target - liminf) / target.abs(), -0.02);
    } else {
        r.bound("absolute_gap", diff, 0.02);
    }
    r
}

/// Condition 5: ⟨ξ, aη⟩ = κ Tr_ω(a(ξ|η)|D|^{-p}) with one κ for all samples.
pub fn absolute_continuity_fit(t: &TruncatedTriple, samples: &[(Vec<C64>, Vec<C64>, Element)]) -> CheckReport {
    let mut r = CheckReport::new("absolute_continuity");
    if samples.len() < 4 {
        r.fail("need at least 4 samples");
        return r;
    }
    let mut pairs = Vec::new();
    for (xi, eta, a) in samples {
        let lhs = inner(xi, &a.op.apply(eta));
        let g = match module_inner(t, xi, eta) {
            Ok(g) => g,
            Err(e) => {
                r.fail(e.to_string());
                return r;
            }
        };
        let (rhs, _) = log_trace_slope(&a.op.mul(&g), t);
        if lhs.norm() < 1e-12 && rhs.norm() < 1e-12 {
            continue;
        }
        pairs.push((lhs, rhs));
    }
    if pairs.len() < 4 {
        r.fail("fewer than 4 non-trivial samples");
        return r;
    }
    let num: C64 = pairs.iter().map(|(l, rh)| rh.conj() * l).sum();
    let den: f64 = pairs.iter().map(|(_, rh)| rh.norm_sqr()).sum();
    let kappa = num / den;
    let spread = pairs.iter().map(|(l, rh)| ((l / rh) - kappa).norm() / kappa.norm()).fold(0.0, f64::max);
    r.metric("kappa_re", kappa.re);
    r.metric("kappa_im", kappa.im);
    r.metric("samples", pairs.len() as f64);
    r.series("kappa_i_re", pairs.iter().map(|(l, rh)| (l / rh).re).collect());
    r.bound("relative_spread", spread, 0.05);
    r
}

/// `count` random (ξ, η, a): ξ, η with Fourier radius 3 in every spinor
/// component, a cycling through the unit and the generators.
pub fn random_samples(t: &TruncatedTriple, count: usize, seed: u64) -> Result<Vec<(Vec<C64>, Vec<C64>, Element)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = ModeBox::new(t.p(), 3.min(t.band().lambda_full));
    let s = t.spinor_dim();
    let vector = |rng: &mut ChaCha8Rng| -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); t.hilbert_dim()];
        for sp in 0..s {
            let values = (0..modes.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mut unit = vec![C64::new(0.0, 0.0); s];
            unit[sp] = C64::new(1.0, 0.0);
            let v = t.vector_from_coefficients(&Coefficients { modes, values }, &unit)?;
            out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
        }
        Ok(out)
    };
    let mut elements = vec![t.unit()];
    elements.extend(t.generator_names().iter().filter_map(|n| t.generator(n).ok().cloned()));
    (0..count)
        .map(|i| Ok((vector(&mut rng)?, vector(&mut rng)?, elements[i % elements.len()].clone())))
        .collect()
}

/// Fitted two-sided Weyl constants c₁ <= α(λ)/λ^p <= c₂ over [Λ_eff/8, Λ_eff/2].
pub fn weyl_constants(t: &TruncatedTriple) -> (f64, f64) {
    let lam = t.effective_lambda();
    let lambdas: Vec<f64> = (0..32).map(|i| lam / 8.0 * 4f64.powf(i as f64 / 31.0)).collect();
    let counts = counting_function(t, &lambdas);
    let ratios: Vec<f64> = lambdas.iter().zip(&counts).map(|(l, &c)| c as f64 / l.powi(t.p() as i32)).collect();
    (ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs() {
        assert_eq!(Cutoff::Hat.eval(0.25), 0.75);
        assert!((Cutoff::Hat.rho(1) - 0.5).abs() < 1e-12);
        assert!((Cutoff::Hat.rho(2) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(Cutoff::Smooth.eval(0.3), 1.0);
        assert_eq!(Cutoff::Smooth.eval(1.2), 0.0);
        assert!((Cutoff::Smooth.eval(0.75) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cesaro_of_constant_and_cosine() {
        let n = 512;
        let u: Vec<f64> = (0..n).map(|i| i as f64 * 20.0 / (n - 1) as f64).collect();
        let c = cesaro_mean(&u, &vec![3.0; n], 2).unwrap();
        assert!(c.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let f: Vec<f64> = u.iter().map(|x| x.cos()).collect();
        let m = cesaro_mean(&u, &f, 1).unwrap();
        let err = u.iter().zip(&m).skip(1).map(|(x, v)| (v - x.sin() / x).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
        assert!(cesaro_mean(&u[..5], &f[..5], 1).is_err());
    }
}
