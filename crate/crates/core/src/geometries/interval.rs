use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{finish, Geometry};
use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};
use crate::triple::{gauss_legendre, interval_sign, BandPolicy, Sampling, TripleParts, TruncatedTriple};

/// D = ((0, d/dx), (-d/dx, 0)) on [0, 1] with ξ₁(0) = 0, ξ₂(1) = 0, built on
/// its exact eigenbasis: eigenvalues ±(k + 1/2)π for k < N.
pub fn interval(n: usize) -> Result<Geometry> {
    if n < 4 {
        return Err(SgeoError::InvalidArgument("interval needs N >= 4".into()));
    }
    let diag: Vec<f64> = (0..2 * n).map(|i| interval_sign(i) * ((i / 2) as f64 + 0.5) * PI).collect();
    let (nodes, weights) = gauss_legendre(4 * n + 64);
    let grid: Vec<f64> = (0..=2 * n).map(|j| j as f64 / (2 * n) as f64).collect();
    let parts = TripleParts {
        name: format!("interval(N={n})"),
        dirac: MatrixOperator::from_real_diagonal(&diag),
        generators: BTreeMap::new(),
        unitary_pairs: Vec::new(),
        grading: None,
        p: 1,
        mode_labels: (0..n as i64).map(|k| vec![k]).collect(),
        spinor_dim: 2,
        band: BandPolicy { lambda_full: n - 1, generator_bandwidth: (n / 16).max(1) },
        kernel_shift: 1.0,
        clifford: Vec::new(),
        sampling: Sampling::Interval { modes: n, grid, nodes, weights },
        provenance: vec![format!("interval N={n} (expected to fail regularity and the maximum principle)")],
    };
    let base = TruncatedTriple::new(parts)?;
    let x = base.element_from_fn(|p| C64::new(p[0], 0.0), 0)?;
    let triple = finish(base, vec![("x", x)])?;
    Ok(Geometry { triple, cycle: None })
}
