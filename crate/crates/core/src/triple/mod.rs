//! Truncated spectral triples (A, H, D) as finite matrix data.
//!
//! Algebra elements are stored in the D-eigen (Fourier) basis where
//! multiplication operators are banded Toeplitz matrices. Identities that
//! hold for the exact operators are only evaluated on an inner band of
//! modes, shrunk by the generator bandwidth once per operator product.

pub mod eigen;
pub mod module;
pub mod sampling;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64, ONE, ZERO};
pub use eigen::{eigendecompose, functional_calculus, Eigen};
pub use module::{module_inner, module_inner_with_grid, rank_one_endomorphism};
pub use sampling::{Coefficients, Grid, ModeBox};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const COMMUTATION_TOL: f64 = 1e-10;
pub const GRADING_TOL: f64 = 1e-12;

/// Truncation-band bookkeeping: modes with |k| <= lambda_full are kept, and a
/// residual of an expression with `depth` operator products is read on
/// |k| <= lambda_full - depth * generator_bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandPolicy {
    pub lambda_full: usize,
    pub generator_bandwidth: usize,
}

impl BandPolicy {
    pub fn inner_cutoff(&self, depth: usize) -> i64 {
        self.lambda_full as i64 - (depth * self.generator_bandwidth) as i64
    }

    /// Inner cutoff, or `BandExhausted` when it drops below 1.
    pub fn checked_cutoff(&self, depth: usize) -> Result<usize> {
        let inner = self.inner_cutoff(depth);
        if inner < 1 {
            return Err(SgeoError::BandExhausted { inner, depth });
        }
        Ok(inner as usize)
    }
}

/// How algebra elements are sampled in position space.
#[derive(Clone, Debug)]
pub enum Sampling {
    /// Fourier modes on the box |k|_inf <= Λ of Z^p, functions of
    /// x in [0, period)^p.
    Fourier { modes: ModeBox, period: f64 },
    /// Analytic eigenbasis of the interval operator with `modes` positive
    /// frequencies (k + 1/2)π; functions of x in [0, 1].
    Interval { modes: usize, grid: Vec<f64>, nodes: Vec<f64>, weights: Vec<f64> },
}

/// An algebra element: its operator on H and its symbol sampled on the
/// triple's position grid.
#[derive(Clone, Debug)]
pub struct Element {
    pub op: MatrixOperator,
    pub symbol: Vec<C64>,
}

impl Element {
    pub fn mul(&self, other: &Element) -> Element {
        Element {
            op: self.op.mul(&other.op),
            symbol: self.symbol.iter().zip(&other.symbol).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn combine(&self, alpha: C64, other: &Element, beta: C64) -> Element {
        Element {
            op: self.op.combine(alpha, &other.op, beta),
            symbol: self.symbol.iter().zip(&other.symbol).map(|(a, b)| alpha * a + beta * b).collect(),
        }
    }

    pub fn scale(&self, alpha: C64) -> Element {
        Element { op: self.op.scale(alpha), symbol: self.symbol.iter().map(|v| alpha * v).collect() }
    }

    pub fn adjoint(&self) -> Element {
        Element { op: self.op.adjoint(), symbol: self.symbol.iter().map(|v| v.conj()).collect() }
    }

    /// Index of the grid point where the real part of the symbol is largest.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.symbol.iter().enumerate() {
            if v.re > self.symbol[best].re {
                best = i;
            }
        }
        best
    }
}

/// Everything needed to build a [`TruncatedTriple`].
#[derive(Clone, Debug)]
pub struct TripleParts {
    pub name: String,
    pub dirac: MatrixOperator,
    pub generators: BTreeMap<String, Element>,
    /// (u, u*) name pairs whose product is the unit.
    pub unitary_pairs: Vec<(String, String)>,
    pub grading: Option<MatrixOperator>,
    pub p: usize,
    pub mode_labels: Vec<Vec<i64>>,
    pub spinor_dim: usize,
    pub band: BandPolicy,
    pub kernel_shift: f64,
    /// Spinor-size Clifford generators γ^μ with [D, f] = Σ γ^μ ∂_μ f
    /// (empty when the geometry has no global frame).
    pub clifford: Vec<DMatrix<C64>>,
    pub sampling: Sampling,
    pub provenance: Vec<String>,
}

/// A validated truncated spectral triple. Immutable; spectral data of D is
/// computed lazily once.
#[derive(Debug)]
pub struct TruncatedTriple {
    parts: TripleParts,
    dirac_eigen: OnceLock<Eigen>,
    abs_eigen: OnceLock<Eigen>,
}

impl Clone for TruncatedTriple {
    fn clone(&self) -> Self {
        TruncatedTriple { parts: self.parts.clone(), dirac_eigen: OnceLock::new(), abs_eigen: OnceLock::new() }
    }
}

impl TruncatedTriple {
    /// Validates the triple invariants and builds the triple.
    pub fn new(parts: TripleParts) -> Result<Self> {
        let t = TruncatedTriple { parts, dirac_eigen: OnceLock::new(), abs_eigen: OnceLock::new() };
        t.validate()?;
        Ok(t)
    }

    pub fn into_parts(self) -> TripleParts {
        self.parts
    }

    pub fn parts(&self) -> &TripleParts {
        &self.parts
    }

    fn validate(&self) -> Result<()> {
        let p = &self.parts;
        let n = p.dirac.dim();
        if n == 0 {
            return Err(SgeoError::InvariantViolation("empty Hilbert space".into()));
        }
        if p.mode_labels.len() * p.spinor_dim != n {
            return Err(SgeoError::InvariantViolation(format!(
                "{} mode labels x spinor dim {} != hilbert dim {n}",
                p.mode_labels.len(),
                p.spinor_dim
            )));
        }
        if p.kernel_shift <= 0.0 {
            return Err(SgeoError::InvariantViolation("kernel_shift must be positive".into()));
        }
        let defect = p.dirac.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(SgeoError::InvariantViolation(format!("D not Hermitian (asymmetry {defect:.3e})")));
        }
        for (name, g) in &p.generators {
            if g.op.dim() != n {
                return Err(SgeoError::DimensionMismatch { expected: n, got: g.op.dim() });
            }
            if g.symbol.len() != self.grid_len() {
                return Err(SgeoError::InvariantViolation(format!("symbol of `{name}` has wrong grid size")));
            }
        }
        // small truncations cannot afford the full margin; use what is left
        let depth = (0..=2).rev().find(|&d| p.band.inner_cutoff(d) >= 0).unwrap_or(0);
        let cutoff = p.band.inner_cutoff(depth);
        let mask: Vec<bool> = (0..n).map(|i| mode_norm(&p.mode_labels[i / p.spinor_dim]) <= cutoff).collect();
        let names: Vec<&String> = p.generators.keys().collect();
        for (i, a) in names.iter().enumerate() {
            let ga = &p.generators[*a].op;
            let normal = ga.commutator(&ga.adjoint()).compress(&mask);
            if !small(&normal, COMMUTATION_TOL) {
                return Err(SgeoError::InvariantViolation(format!("generator `{a}` is not normal")));
            }
            for b in &names[i + 1..] {
                let c = ga.commutator(&p.generators[*b].op).compress(&mask);
                if !small(&c, COMMUTATION_TOL) {
                    return Err(SgeoError::InvariantViolation(format!("generators `{a}` and `{b}` do not commute")));
                }
            }
        }
        if let Some(g) = &p.grading {
            let (herm, square, anti) = grading_relations(g, &p.dirac);
            let scale = p.dirac.max_abs().max(1.0);
            if herm > GRADING_TOL || square > GRADING_TOL || anti > GRADING_TOL * scale {
                return Err(SgeoError::InvariantViolation(format!(
                    "grading relations fail: |γ-γ*|={herm:.2e}, |γ²-1|={square:.2e}, |γD+Dγ|={anti:.2e}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn hilbert_dim(&self) -> usize {
        self.parts.dirac.dim()
    }

    pub fn dirac(&self) -> &MatrixOperator {
        &self.parts.dirac
    }

    pub fn p(&self) -> usize {
        self.parts.p
    }

    pub fn spinor_dim(&self) -> usize {
        self.parts.spinor_dim
    }

    pub fn band(&self) -> BandPolicy {
        self.parts.band
    }

    pub fn kernel_shift(&self) -> f64 {
        self.parts.kernel_shift
    }

    pub fn grading(&self) -> Option<&MatrixOperator> {
        self.parts.grading.as_ref()
    }

    pub fn clifford(&self) -> &[DMatrix<C64>] {
        &self.parts.clifford
    }

    pub fn mode_labels(&self) -> &[Vec<i64>] {
        &self.parts.mode_labels
    }

    pub fn provenance(&self) -> &[String] {
        &self.parts.provenance
    }

    pub fn sampling(&self) -> &Sampling {
        &self.parts.sampling
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.parts.generators.keys().cloned().collect()
    }

    pub fn generators(&self) -> &BTreeMap<String, Element> {
        &self.parts.generators
    }

    pub fn generator(&self, name: &str) -> Result<&Element> {
        self.parts.generators.get(name).ok_or_else(|| SgeoError::UnknownElement(name.to_string()))
    }

    pub fn unitary_pairs(&self) -> &[(String, String)] {
        &self.parts.unitary_pairs
    }

    /// The unit as an algebra element.
    pub fn unit(&self) -> Element {
        Element { op: MatrixOperator::identity(self.hilbert_dim()), symbol: vec![ONE; self.grid_len()] }
    }

    /// Eigen-decomposition of D (cached).
    pub fn dirac_eigen(&self) -> &Eigen {
        self.dirac_eigen.get_or_init(|| eigendecompose(&self.parts.dirac).expect("D validated Hermitian"))
    }

    /// Eigen-decomposition of |D| with the kernel shift applied, values
    /// ascending (cached).
    pub fn abs_dirac_eigen(&self) -> &Eigen {
        self.abs_eigen.get_or_init(|| {
            let e = self.dirac_eigen();
            let shift = self.parts.kernel_shift;
            let tol = 1e-12 * e.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let mut order: Vec<(f64, usize)> = e
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| (if v.abs() <= tol { shift } else { v.abs() }, i))
                .collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let n = self.hilbert_dim();
            let mut entries = Vec::new();
            for (new_col, &(_, old_col)) in order.iter().enumerate() {
                for r in 0..n {
                    let v = e.basis.get(r, old_col);
                    if v != ZERO {
                        entries.push((r, new_col, v));
                    }
                }
            }
            let basis = if e.basis.is_sparse() {
                MatrixOperator::from_triplets(n, entries)
            } else {
                let mut d = DMatrix::zeros(n, n);
                for (r, c, v) in entries {
                    d[(r, c)] = v;
                }
                MatrixOperator::from_dense(d)
            };
            Eigen { values: order.into_iter().map(|o| o.0).collect(), basis }
        })
    }

    /// f(|D|) with the kernel shift rule.
    pub fn abs_dirac_function(&self, f: impl Fn(f64) -> f64) -> MatrixOperator {
        self.abs_dirac_eigen().map(f)
    }

    pub fn abs_dirac(&self) -> MatrixOperator {
        self.abs_dirac_function(|x| x)
    }

    /// Smallest |D| eigenvalue carried by a mode on the truncation edge: below
    /// this value the truncated spectrum is complete.
    pub fn effective_lambda(&self) -> f64 {
        let e = self.dirac_eigen();
        let n = self.hilbert_dim();
        let s = self.parts.spinor_dim;
        let edge = self.parts.band.lambda_full as i64;
        let mut best = f64::INFINITY;
        for k in 0..n {
            let mut weight_edge = 0.0;
            for r in 0..n {
                let v = e.basis.get(r, k);
                if v != ZERO && mode_norm(&self.parts.mode_labels[r / s]) >= edge {
                    weight_edge += v.norm_sqr();
                }
            }
            if weight_edge > 0.5 {
                best = best.min(e.values[k].abs());
            }
        }
        best
    }

    /// Basis mask of |mode| <= inner cutoff at `depth`.
    pub fn band_mask(&self, depth: usize) -> Result<Vec<bool>> {
        let cutoff = self.parts.band.checked_cutoff(depth)? as i64;
        let s = self.parts.spinor_dim;
        Ok((0..self.hilbert_dim()).map(|i| mode_norm(&self.parts.mode_labels[i / s]) <= cutoff).collect())
    }

    /// Orthogonal projection onto the inner band at `depth`.
    pub fn band_projector(&self, depth: usize) -> Result<MatrixOperator> {
        let mask = self.band_mask(depth)?;
        let diag: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        Ok(MatrixOperator::from_real_diagonal(&diag))
    }

    /// ‖P_in X P_in‖ at the given depth.
    pub fn band_norm(&self, x: &MatrixOperator, depth: usize) -> Result<f64> {
        Ok(x.compress(&self.band_mask(depth)?).op_norm())
    }

    /// The position grid used for symbols.
    pub fn grid(&self) -> Option<Grid> {
        match &self.parts.sampling {
            Sampling::Fourier { modes, period } => {
                Some(Grid { p: modes.p, points: 2 * modes.radius + 1, period: *period })
            }
            Sampling::Interval { .. } => None,
        }
    }

    pub fn grid_len(&self) -> usize {
        match &self.parts.sampling {
            Sampling::Fourier { modes, .. } => (2 * modes.radius + 1).pow(modes.p as u32),
            Sampling::Interval { grid, .. } => grid.len(),
        }
    }

    /// Position of grid point `idx`.
    pub fn grid_point(&self, idx: usize) -> Vec<f64> {
        match &self.parts.sampling {
            Sampling::Fourier { .. } => self.grid().unwrap().point(idx),
            Sampling::Interval { grid, .. } => vec![grid[idx]],
        }
    }

    /// Distance between grid points in the model geometry.
    pub fn grid_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.grid() {
            Some(g) => g.periodic_distance(a, b),
            None => (a[0] - b[0]).abs(),
        }
    }

    fn fourier(&self) -> Result<(ModeBox, f64)> {
        match &self.parts.sampling {
            Sampling::Fourier { modes, period } => Ok((*modes, *period)),
            Sampling::Interval { .. } => Err(SgeoError::Unsupported("no Fourier sampling on the interval".into())),
        }
    }

    /// Multiplication operator M_f ⊗ 1 for band-limited coefficients.
    pub fn toeplitz(&self, coeffs: &Coefficients) -> Result<MatrixOperator> {
        let (modes, _) = self.fourier()?;
        let s = self.parts.spinor_dim;
        let support: Vec<(Vec<i64>, C64)> = (0..coeffs.modes.len())
            .filter(|&i| coeffs.values[i] != ZERO)
            .map(|i| (coeffs.modes.label(i), coeffs.values[i]))
            .collect();
        let mut entries = Vec::with_capacity(modes.len() * support.len() * s);
        for m_idx in 0..modes.len() {
            let m = modes.label(m_idx);
            for (k, v) in &support {
                let n: Vec<i64> = m.iter().zip(k).map(|(a, b)| a - b).collect();
                if let Some(n_idx) = modes.index(&n) {
                    for sp in 0..s {
                        entries.push((m_idx * s + sp, n_idx * s + sp, *v));
                    }
                }
            }
        }
        Ok(MatrixOperator::from_triplets(self.hilbert_dim(), entries))
    }

    /// Element with the given Fourier coefficients (radius <= Λ).
    pub fn element_from_coefficients(&self, coeffs: &Coefficients) -> Result<Element> {
        let (modes, period) = self.fourier()?;
        if coeffs.modes.radius > modes.radius {
            return Err(SgeoError::InvalidArgument(format!(
                "coefficient radius {} exceeds the truncation {}",
                coeffs.modes.radius, modes.radius
            )));
        }
        let grid = Grid { p: modes.p, points: 2 * modes.radius + 1, period };
        Ok(Element { op: self.toeplitz(coeffs)?, symbol: grid.synthesize(coeffs) })
    }

    /// Band-limited element approximating `f`: Fourier interpolation at
    /// `bandwidth` for periodic geometries, exact quadrature on the interval.
    pub fn element_from_fn(&self, f: impl Fn(&[f64]) -> C64, bandwidth: usize) -> Result<Element> {
        match &self.parts.sampling {
            Sampling::Fourier { modes, period } => {
                let bandwidth = bandwidth.min(modes.radius);
                let fine = Grid { p: modes.p, points: 4 * bandwidth + 9, period: *period };
                let samples: Vec<C64> = (0..fine.len()).map(|i| f(&fine.point(i))).collect();
                let coeffs = fine.analyze(&samples, bandwidth);
                self.element_from_coefficients(&coeffs)
            }
            Sampling::Interval { modes, grid, nodes, weights } => {
                let op = interval_multiplication(*modes, nodes, weights, |x| f(&[x]));
                let symbol = grid.iter().map(|&x| f(&[x])).collect();
                Ok(Element { op, symbol })
            }
        }
    }

    /// Fourier coefficients of a multiplication operator, read off the
    /// column of the zero mode (exact for bandwidth <= Λ).
    pub fn symbol_coefficients(&self, op: &MatrixOperator) -> Result<Coefficients> {
        let (modes, _) = self.fourier()?;
        let s = self.parts.spinor_dim;
        let zero = modes.index(&vec![0; modes.p]).unwrap();
        let values = (0..modes.len()).map(|i| op.get(i * s, zero * s)).collect();
        Ok(Coefficients { modes, values })
    }

    /// Wraps a multiplication operator as an element (periodic geometries).
    pub fn element_from_op(&self, op: MatrixOperator) -> Result<Element> {
        let coeffs = self.symbol_coefficients(&op)?;
        let grid = self.grid().unwrap();
        Ok(Element { op, symbol: grid.synthesize(&coeffs) })
    }

    /// Vector in H whose spinor component `spinor` is the band-limited
    /// function `f` and all others vanish.
    pub fn vector_from_fn(&self, f: impl Fn(&[f64]) -> C64, bandwidth: usize, spinor: &[C64]) -> Result<Vec<C64>> {
        let (modes, period) = self.fourier()?;
        let bandwidth = bandwidth.min(modes.radius);
        let fine = Grid { p: modes.p, points: 4 * bandwidth + 9, period };
        let samples: Vec<C64> = (0..fine.len()).map(|i| f(&fine.point(i))).collect();
        let coeffs = fine.analyze(&samples, bandwidth);
        self.vector_from_coefficients(&coeffs, spinor)
    }

    pub fn vector_from_coefficients(&self, coeffs: &Coefficients, spinor: &[C64]) -> Result<Vec<C64>> {
        let (modes, _) = self.fourier()?;
        let s = self.parts.spinor_dim;
        if spinor.len() != s {
            return Err(SgeoError::DimensionMismatch { expected: s, got: spinor.len() });
        }
        let mut out = vec![ZERO; self.hilbert_dim()];
        for i in 0..coeffs.modes.len() {
            if let Some(m) = modes.index(&coeffs.modes.label(i)) {
                for (sp, &w) in spinor.iter().enumerate() {
                    out[m * s + sp] = coeffs.values[i] * w;
                }
            }
        }
        Ok(out)
    }

    /// Spinor component `sp` of a vector, as Fourier coefficients.
    pub fn spinor_component(&self, xi: &[C64], sp: usize) -> Result<Coefficients> {
        let (modes, _) = self.fourier()?;
        let s = self.parts.spinor_dim;
        Ok(Coefficients { modes, values: (0..modes.len()).map(|m| xi[m * s + sp]).collect() })
    }

    /// Lifts a spinor-size matrix to 1 ⊗ m on H.
    pub fn spinor_operator(&self, m: &DMatrix<C64>) -> MatrixOperator {
        let s = self.parts.spinor_dim;
        let modes = self.parts.mode_labels.len();
        let mut entries = Vec::new();
        for k in 0..modes {
            for a in 0..s {
                for b in 0..s {
                    if m[(a, b)] != ZERO {
                        entries.push((k * s + a, k * s + b, m[(a, b)]));
                    }
                }
            }
        }
        MatrixOperator::from_triplets(self.hilbert_dim(), entries)
    }
}

/// |k|_inf of a mode label.
pub fn mode_norm(label: &[i64]) -> i64 {
    label.iter().map(|c| c.abs()).max().unwrap_or(0)
}

fn small(x: &MatrixOperator, tol: f64) -> bool {
    x.frobenius() <= tol || x.op_norm() <= tol
}

/// (|γ - γ*|, |γ² - 1|, |γD + Dγ|) measured as max entries.
pub fn grading_relations(gamma: &MatrixOperator, dirac: &MatrixOperator) -> (f64, f64, f64) {
    let n = gamma.dim();
    let herm = gamma.hermitian_defect();
    let square = gamma.mul(gamma).sub(&MatrixOperator::identity(n)).max_abs();
    let anti = gamma.anticommutator(dirac).max_abs();
    (herm, square, anti)
}

/// Interval eigenfunction ψ_{k,s}(x) = (sin ω_k x, -s cos ω_k x),
/// ω_k = (k + 1/2)π, eigenvalue s·ω_k of D = ((0, d/dx), (-d/dx, 0)).
pub fn interval_mode(k: usize, sign: f64, x: f64) -> [f64; 2] {
    let w = (k as f64 + 0.5) * std::f64::consts::PI;
    [(w * x).sin(), -sign * (w * x).cos()]
}

/// Basis index for the interval: 2k for s = +1, 2k + 1 for s = -1.
pub fn interval_sign(idx: usize) -> f64 {
    if idx.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Matrix of multiplication by f in the interval eigenbasis, by quadrature.
pub fn interval_multiplication(modes: usize, nodes: &[f64], weights: &[f64], f: impl Fn(f64) -> C64) -> MatrixOperator {
    let n = 2 * modes;
    let fx: Vec<C64> = nodes.iter().map(|&x| f(x)).collect();
    let vals: Vec<Vec<[f64; 2]>> =
        (0..n).map(|i| nodes.iter().map(|&x| interval_mode(i / 2, interval_sign(i), x)).collect()).collect();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = ZERO;
            for q in 0..nodes.len() {
                let a = vals[i][q];
                let b = vals[j][q];
                acc += fx[q] * (weights[q] * (a[0] * b[0] + a[1] * b[1]));
            }
            m[(i, j)] = acc;
            if i != j {
                // f need not be real: entry (j, i) is the same integral
                m[(j, i)] = acc;
            }
        }
    }
    MatrixOperator::from_dense(m)
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..order {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = (1.0 - z) / 2.0;
        nodes[order - 1 - i] = (1.0 + z) / 2.0;
        weights[i] = w / 2.0;
        weights[order - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((integral - 0.1).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interval_modes_are_orthonormal() {
        let (x, w) = gauss_legendre(200);
        let m = interval_multiplication(12, &x, &w, |_| ONE);
        assert!(m.sub(&MatrixOperator::identity(24)).max_abs() < 1e-12);
    }

    #[test]
    fn band_policy_cutoffs() {
        let b = BandPolicy { lambda_full: 4, generator_bandwidth: 2 };
        assert_eq!(b.checked_cutoff(1).unwrap(), 2);
        assert!(matches!(b.checked_cutoff(2), Err(SgeoError::BandExhausted { inner: 0, depth: 2 })));
    }
}
