//! Characteristic values, Weyl norms σ_N, L^(p,1) norms, the counting
//! function of |D| and the dimension fit.

use serde::{Deserialize, Serialize};

use crate::operator::MatrixOperator;
use crate::report::{linear_fit, LimitEstimate};
use crate::triple::TruncatedTriple;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularValueProfile {
    /// μ_1 >= μ_2 >= ...
    pub mu: Vec<f64>,
    /// σ_N = μ_1 + ... + μ_N, with sigma[N-1] = σ_N.
    pub sigma: Vec<f64>,
    pub source_dim: usize,
}

pub fn singular_profile(x: &MatrixOperator) -> SingularValueProfile {
    profile_from_values(x.singular_values(), x.dim())
}

pub fn profile_from_values(mut mu: Vec<f64>, source_dim: usize) -> SingularValueProfile {
    mu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let sigma = mu
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    SingularValueProfile { mu, sigma, source_dim }
}

impl SingularValueProfile {
    /// σ_N; saturates at the trace norm beyond the dimension.
    pub fn sigma_n(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.sigma[(n - 1).min(self.sigma.len() - 1)]
        }
    }

    pub fn trace_norm(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    pub fn op_norm(&self) -> f64 {
        self.mu.first().copied().unwrap_or(0.0)
    }

    /// ‖T‖_(p,1) = Σ n^{-1+1/p} μ_n.
    pub fn lp1(&self, p: f64) -> f64 {
        self.mu.iter().enumerate().map(|(i, m)| ((i + 1) as f64).powf(-1.0 + 1.0 / p) * m).sum()
    }

    /// (1-θ) Σ_N N^{θ-2} σ_N with θ = 1/p; the tail beyond the dimension,
    /// where σ_N is constant, is summed in closed form via the Hurwitz zeta
    /// tail estimate Σ_{N>M} N^{θ-2} ≈ ∫_{M+1/2}^∞ x^{θ-2} dx.
    pub fn lp1_alternate(&self, p: f64) -> f64 {
        let theta = 1.0 / p;
        if (theta - 1.0).abs() < 1e-15 {
            return f64::NAN;
        }
        let m = self.sigma.len();
        let head: f64 = self.sigma.iter().enumerate().map(|(i, s)| ((i + 1) as f64).powf(theta - 2.0) * s).sum();
        let tail = self.trace_norm() * (m as f64 + 0.5).powf(theta - 1.0) / (1.0 - theta);
        (1.0 - theta) * (head + tail)
    }
}

/// (‖T‖_(p,1), ‖T‖_(p,1)'); the alternate form is only a norm for p > 1 and
/// is NaN at p = 1.
pub fn lp1_norm(x: &MatrixOperator, p: f64) -> (f64, f64) {
    let prof = singular_profile(x);
    (prof.lp1(p), prof.lp1_alternate(p))
}

/// Constant of ‖S‖_(p,1) <= c_p ‖S‖₁^{1/p} ‖S‖^{1-1/p}, from splitting the
/// sum at n = ‖S‖₁/‖S‖ and bounding μ_n by ‖S‖ below and by σ_n/n above.
pub fn interpolation_constant(p: f64) -> f64 {
    if p <= 1.0 {
        1.0
    } else {
        p + 1.0 + p / (p - 1.0)
    }
}

/// Σ_{n<=N} n^{-1+1/p}: ‖T‖_(p,1) <= this · ‖T‖ when rank T <= N.
pub fn rank_bound_constant(p: f64, rank: usize) -> f64 {
    (1..=rank).map(|n| (n as f64).powf(-1.0 + 1.0 / p)).sum()
}

/// α(λ) = #{eigenvalues of |D| <= λ} (kernel shift applied).
pub fn counting_function(t: &TruncatedTriple, lambdas: &[f64]) -> Vec<usize> {
    let vals = &t.abs_dirac_eigen().values;
    lambdas.iter().map(|&l| vals.partition_point(|&v| v <= l)).collect()
}

/// Slope of log μ_n(|D|^{-1}) against log n over n in [dim/8, dim/2]
/// (estimates -1/p); diagnostics carry sup_n n^{1/p} μ_n, over all n and
/// over the window.
pub fn dimension_fit(t: &TruncatedTriple) -> LimitEstimate {
    let vals = &t.abs_dirac_eigen().values;
    let mu: Vec<f64> = vals.iter().map(|v| 1.0 / v).collect();
    dimension_fit_values(&mu, t.p() as f64)
}

/// `mu` descending characteristic values of the resolvent.
pub fn dimension_fit_values(mu: &[f64], p: f64) -> LimitEstimate {
    let dim = mu.len();
    let (lo, hi) = ((dim / 8).max(1), (dim / 2).max(2));
    let x: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let y: Vec<f64> = (lo..=hi).map(|n| mu[n - 1].ln()).collect();
    let mut est = LimitEstimate::exact(f64::NAN);
    let spread = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mu.iter().copied().fold(f64::INFINITY, f64::min);
    if dim < 16 || spread <= 1e-14 * mu[0].abs() {
        est.converged = false;
        return est;
    }
    let (_, slope, stderr) = linear_fit(&x, &y);
    // slope over each half of the window, as a drift diagnostic
    let mid = x.len() / 2;
    let s1 = linear_fit(&x[..mid], &y[..mid]).1;
    let s2 = linear_fit(&x[mid..], &y[mid..]).1;
    let sup = mu.iter().enumerate().map(|(i, m)| ((i + 1) as f64).powf(1.0 / p) * m).fold(0.0, f64::max);
    est.value = slope;
    est.stderr = stderr;
    est.window_values = vec![s1, s2];
    est.trend_slope = s2 - s1;
    est.converged = (s2 - s1).abs() <= 0.05;
    let window_sup = (lo..=hi).map(|n| (n as f64).powf(1.0 / p) * mu[n - 1]).fold(0.0, f64::max);
    est.diagnostics.insert("sup_n_pow_mu".into(), sup);
    est.diagnostics.insert("window_sup_n_pow_mu".into(), window_sup);
    est.diagnostics.insert("window_lo".into(), lo as f64);
    est.diagnostics.insert("window_hi".into(), hi as f64);
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_of_diagonal() {
        let p = singular_profile(&MatrixOperator::from_real_diagonal(&[3.0, 1.0, 2.0]));
        assert_eq!(p.mu, vec![3.0, 2.0, 1.0]);
        assert_eq!(p.sigma, vec![3.0, 5.0, 6.0]);
        assert!((p.lp1(1.0) - 6.0).abs() < 1e-12);
        let z = singular_profile(&MatrixOperator::zeros(3));
        assert!(z.mu.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rank_one_lp1() {
        let x = MatrixOperator::from_triplets(4, vec![(1, 2, crate::operator::C64::new(2.5, 0.0))]);
        assert!((lp1_norm(&x, 2.0).0 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constants() {
        assert_eq!(interpolation_constant(1.0), 1.0);
        assert!((interpolation_constant(2.0) - 5.0).abs() < 1e-15);
        assert!((rank_bound_constant(1.0, 5) - 5.0).abs() < 1e-15);
    }
}
