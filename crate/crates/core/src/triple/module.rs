//! The projective module of spinors: the algebra-valued inner product and
//! rank-one endomorphisms ζ ↦ ξ·(η|ζ).

use super::sampling::{Coefficients, Grid, ModeBox};
use super::TruncatedTriple;
use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};

/// (ξ|η) = Σ_s conj(ξ_s) η_s as a multiplication operator, computed on a
/// grid of 4Λ+1 points per axis.
pub fn module_inner(t: &TruncatedTriple, xi: &[C64], eta: &[C64]) -> Result<MatrixOperator> {
    let radius = t.band().lambda_full;
    module_inner_with_grid(t, xi, eta, 4 * radius + 1)
}

/// As [`module_inner`] with an explicit grid size; grids with fewer than
/// 2Λ+1 points alias and are rejected.
pub fn module_inner_with_grid(t: &TruncatedTriple, xi: &[C64], eta: &[C64], points: usize) -> Result<MatrixOperator> {
    let coeffs = pointwise_product(t, xi, eta, points, None)?;
    t.toeplitz(&coeffs.with_radius(t.band().lambda_full))
}

/// The endomorphism T_{ξ,η}: ζ ↦ ξ·(η|ζ), exact on the truncated space.
pub fn rank_one_endomorphism(t: &TruncatedTriple, xi: &[C64], eta: &[C64]) -> Result<MatrixOperator> {
    let radius = t.band().lambda_full;
    let s = t.spinor_dim();
    let n = t.hilbert_dim();
    check_len(t, xi)?;
    check_len(t, eta)?;
    let modes = ModeBox::new(t.p(), radius);
    // c_{ab}(d) = Σ_k ξ_{a,k} conj(η_{b,k-d}): the coefficients of ξ_a conj(η_b)
    let mut corr = Vec::with_capacity(s * s);
    for a in 0..s {
        for b in 0..s {
            corr.push(pointwise_product(t, eta, xi, 4 * radius + 1, Some((b, a)))?);
        }
    }
    let mut entries = Vec::new();
    for m in 0..modes.len() {
        let km = modes.label(m);
        for l in 0..modes.len() {
            let kl = modes.label(l);
            let d: Vec<i64> = km.iter().zip(&kl).map(|(x, y)| x - y).collect();
            for a in 0..s {
                for b in 0..s {
                    let v = corr[a * s + b].get(&d);
                    if v.norm() > 0.0 {
                        entries.push((m * s + a, l * s + b, v));
                    }
                }
            }
        }
    }
    Ok(MatrixOperator::from_triplets(n, entries))
}

fn check_len(t: &TruncatedTriple, v: &[C64]) -> Result<()> {
    if v.len() != t.hilbert_dim() {
        return Err(SgeoError::DimensionMismatch { expected: t.hilbert_dim(), got: v.len() });
    }
    Ok(())
}

/// Fourier coefficients (radius 2Λ) of Σ conj(ξ_a) η_b, summed over a = b
/// when `pair` is None.
fn pointwise_product(
    t: &TruncatedTriple,
    xi: &[C64],
    eta: &[C64],
    points: usize,
    pair: Option<(usize, usize)>,
) -> Result<Coefficients> {
    check_len(t, xi)?;
    check_len(t, eta)?;
    let radius = t.band().lambda_full;
    let grid = match t.grid() {
        Some(g) => Grid { points, ..g },
        None => return Err(SgeoError::Unsupported("module products need a periodic geometry".into())),
    };
    if points < 2 * radius + 1 {
        return Err(SgeoError::InvalidArgument(format!(
            "grid of {points} points cannot resolve modes up to {radius}"
        )));
    }
    let pairs: Vec<(usize, usize)> = match pair {
        Some(p) => vec![p],
        None => (0..t.spinor_dim()).map(|s| (s, s)).collect(),
    };
    let mut acc = vec![C64::new(0.0, 0.0); grid.len()];
    for (a, b) in pairs {
        let fa = grid.synthesize(&t.spinor_component(xi, a)?);
        let fb = grid.synthesize(&t.spinor_component(eta, b)?);
        for ((slot, x), y) in acc.iter_mut().zip(&fa).zip(&fb) {
            *slot += x.conj() * y;
        }
    }
    // an undersampled grid still aliases the top modes; only 4Λ+1 is exact
    let out_radius = (2 * radius).min((points - 1) / 2);
    Ok(grid.analyze(&acc, out_radius))
}
