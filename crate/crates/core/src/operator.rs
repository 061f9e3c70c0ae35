//! Square complex matrices on the truncated Hilbert space.
//!
//! Operators built from model geometries are overwhelmingly sparse (Dirac
//! operators are block diagonal in the mode basis, multiplication operators
//! are banded Toeplitz), while functional calculus output is dense. Both
//! representations live behind [`MatrixOperator`]; arithmetic picks the
//! cheaper path and never changes values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SgeoError};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Below this dimension operator norms are computed by a full SVD.
pub const EXACT_NORM_DIM: usize = 320;

/// Compressed sparse rows with sorted column indices.
#[derive(Clone, Debug)]
pub struct Csr {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "triplet ({r},{c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Csr { dim, indptr, indices, values }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    fn nnz(&self) -> usize {
        self.values.len()
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    fn adjoint(&self) -> Csr {
        let mut entries = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                entries.push((c, r, v.conj()));
            }
        }
        Csr::from_triplets(self.dim, entries)
    }

    fn matmul(&self, other: &Csr) -> Csr {
        let n = self.dim;
        let mut acc = vec![ZERO; n];
        let mut mark = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..n {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = ZERO;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                values.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        Csr { dim: n, indptr, indices, values }
    }

    fn combine(&self, alpha: C64, other: &Csr, beta: C64) -> Csr {
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            entries.extend(self.row(r).map(|(c, v)| (r, c, alpha * v)));
            entries.extend(other.row(r).map(|(c, v)| (r, c, beta * v)));
        }
        Csr::from_triplets(self.dim, entries)
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(DMatrix<C64>),
    Sparse(Csr),
}

/// A dense-or-sparse complex square matrix with a cached Hermiticity flag.
#[derive(Clone, Debug)]
pub struct MatrixOperator {
    storage: Storage,
    hermitian: bool,
}

impl MatrixOperator {
    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let entries = diag.iter().enumerate().map(|(i, &d)| (i, i, C64::new(d, 0.0))).collect();
        let mut op = Self::from_triplets(diag.len(), entries);
        op.hermitian = true;
        op
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let entries = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        Self::from_triplets(diag.len(), entries)
    }

    /// Duplicate coordinates are summed.
    pub fn from_triplets(dim: usize, entries: Vec<(usize, usize, C64)>) -> Self {
        assert!(dim >= 1, "operators need dimension >= 1");
        let mut op = MatrixOperator { storage: Storage::Sparse(Csr::from_triplets(dim, entries)), hermitian: false };
        op.hermitian = op.hermitian_defect() == 0.0;
        op
    }

    pub fn from_dense(m: DMatrix<C64>) -> Self {
        assert!(m.nrows() == m.ncols() && m.nrows() >= 1, "operators are square with dim >= 1");
        let mut op = MatrixOperator { storage: Storage::Dense(m), hermitian: false };
        op.hermitian = op.hermitian_defect() == 0.0;
        op
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_dense(DMatrix::from_fn(dim, dim, f))
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(s) => s.dim,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.len(),
            Storage::Sparse(s) => s.nnz(),
        }
    }

    /// Cached flag: true when the matrix was built or verified Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sets the Hermitian flag after checking the asymmetry is at most `tol`.
    pub fn assert_hermitian(mut self, tol: f64) -> Result<Self> {
        let asymmetry = self.hermitian_defect();
        if asymmetry > tol {
            return Err(SgeoError::NotHermitian { asymmetry });
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Replaces the matrix by its Hermitian part and flags it.
    pub fn hermitian_part(&self) -> Self {
        let mut h = self.add(&self.adjoint()).scale_real(0.5);
        h.hermitian = true;
        h
    }

    /// max |a_ij - conj(a_ji)|
    pub fn hermitian_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in i..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            }
            Storage::Sparse(s) => {
                let diff = s.combine(ONE, &s.adjoint(), -ONE);
                diff.values.iter().fold(0.0f64, |w, v| w.max(v.norm()))
            }
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(r, c)],
            Storage::Sparse(s) => {
                let span = s.indptr[r]..s.indptr[r + 1];
                match s.indices[span.clone()].binary_search(&c) {
                    Ok(k) => s.values[span.start + k],
                    Err(_) => ZERO,
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    /// Nonzero entries as (row, col, value); dense storage reports every
    /// entry with |value| > 0.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut out = Vec::new();
                for r in 0..n {
                    for c in 0..n {
                        if m[(r, c)] != ZERO {
                            out.push((r, c, m[(r, c)]));
                        }
                    }
                }
                out
            }
            Storage::Sparse(s) => {
                let mut out = Vec::with_capacity(s.nnz());
                for r in 0..s.dim {
                    out.extend(s.row(r).map(|(c, v)| (r, c, v)));
                }
                out
            }
        }
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
    }

    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(s) => Storage::Sparse(s.adjoint()),
        };
        MatrixOperator { storage, hermitian: self.hermitian }
    }

    /// alpha * self + beta * other
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        self.check_dim(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.combine(alpha, b, beta)),
            _ => Storage::Dense(self.to_dense() * alpha + other.to_dense() * beta),
        };
        let hermitian = self.hermitian && other.hermitian && alpha.im == 0.0 && beta.im == 0.0;
        MatrixOperator { storage, hermitian }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(ONE, other, ONE)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(ONE, other, -ONE)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * alpha),
            Storage::Sparse(s) => {
                let mut s = s.clone();
                s.values.iter_mut().for_each(|v| *v *= alpha);
                Storage::Sparse(s)
            }
        };
        MatrixOperator { storage, hermitian: self.hermitian && alpha.im == 0.0 }
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(C64::new(alpha, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_dim(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                let prod = a.matmul(b);
                let n = prod.dim;
                if prod.nnz() * 3 > n * n && n > 64 {
                    Storage::Dense(prod.to_dense())
                } else {
                    Storage::Sparse(prod)
                }
            }
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(dense_mul(a, b)),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(sparse_dense(a, b)),
            (Storage::Dense(a), Storage::Sparse(b)) => {
                // (A B) = (B* A*)*
                Storage::Dense(sparse_dense(&b.adjoint(), &a.adjoint()).adjoint())
            }
        };
        MatrixOperator { storage, hermitian: false }
    }

    /// self * other - other * self
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// self * other + other * self
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// P X P for the coordinate projection P onto `mask`.
    pub fn compress(&self, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), self.dim());
        let entries = self.triplets().into_iter().filter(|&(r, c, _)| mask[r] && mask[c]).collect();
        let mut out = Self::from_triplets(self.dim(), entries);
        out.hermitian = self.hermitian;
        out
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim());
        match &self.storage {
            Storage::Sparse(s) => s.apply(x),
            Storage::Dense(m) => {
                let mut out = vec![ZERO; m.nrows()];
                for (c, col) in m.column_iter().enumerate() {
                    let xc = x[c];
                    out.iter_mut().zip(col.iter()).for_each(|(o, v)| *o += v * xc);
                }
                out
            }
        }
    }

    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim());
        match &self.storage {
            Storage::Sparse(s) => {
                let mut out = vec![ZERO; s.dim];
                for r in 0..s.dim {
                    for (c, v) in s.row(r) {
                        out[c] += v.conj() * x[r];
                    }
                }
                out
            }
            Storage::Dense(m) => m.column_iter().map(|col| col.iter().zip(x).map(|(v, xr)| v.conj() * xr).sum()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            Storage::Sparse(s) => s.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().fold(0.0f64, |w, v| w.max(v.norm())),
            Storage::Sparse(s) => s.values.iter().fold(0.0f64, |w, v| w.max(v.norm())),
        }
    }

    /// Singular values in descending order (full SVD).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.frobenius() == 0.0 {
            return vec![0.0; self.dim()];
        }
        let mut s: Vec<f64> = self.to_dense().singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Largest singular value by full SVD.
    pub fn op_norm_exact(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Largest singular value: exact below [`EXACT_NORM_DIM`], power
    /// iteration on X*X above.
    pub fn op_norm(&self) -> f64 {
        if self.dim() <= EXACT_NORM_DIM {
            return self.op_norm_exact();
        }
        self.top_singular_triplet().0
    }

    /// (sigma_1, left vector, right vector) by power iteration on X*X.
    pub fn top_singular_triplet(&self) -> (f64, Vec<C64>, Vec<C64>) {
        self.top_singular_triplet_from(None)
    }

    /// Restarted Lanczos on X*X from `start` (mixed with a fixed random
    /// vector so no component is missing).
    pub fn top_singular_triplet_from(&self, start: Option<&[C64]>) -> (f64, Vec<C64>, Vec<C64>) {
        let n = self.dim();
        if self.frobenius() == 0.0 {
            let mut e = vec![ZERO; n];
            e[0] = ONE;
            return (0.0, e.clone(), e);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_0b);
        let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        if let Some(w) = start.filter(|w| w.len() == n && vec_norm(w) > 0.0) {
            normalize(&mut v);
            let scale = 1e3 / vec_norm(w);
            v.iter_mut().zip(w).for_each(|(a, b)| *a += b * scale);
        }
        normalize(&mut v);
        let steps = n.min(48);
        for _ in 0..60 {
            let (theta, ritz, residual) = self.lanczos_top(&v, steps);
            v = ritz;
            if residual <= 1e-9 * theta.max(1e-300) || steps == n {
                break;
            }
        }
        let mut u = self.apply(&v);
        let s = vec_norm(&u);
        if s > 0.0 {
            u.iter_mut().for_each(|x| *x /= s);
        }
        (s, u, v)
    }

    /// `steps` Lanczos steps on X*X with full reorthogonalization; returns
    /// the top Ritz value, its vector and the residual norm.
    fn lanczos_top(&self, v0: &[C64], steps: usize) -> (f64, Vec<C64>, f64) {
        let mut basis: Vec<Vec<C64>> = vec![v0.to_vec()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        let mut tail = 0.0;
        for j in 0..steps {
            let mut w = self.apply_adjoint(&self.apply(&basis[j]));
            alpha.push(inner(&basis[j], &w).re);
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nb = vec_norm(&w);
            if j + 1 == steps || nb <= 1e-14 * alpha[0].abs().max(1e-300) {
                tail = nb;
                break;
            }
            beta.push(nb);
            w.iter_mut().for_each(|x| *x /= nb);
            basis.push(w);
        }
        let m = alpha.len();
        let tri = DMatrix::<f64>::from_fn(m, m, |i, k| {
            if i == k {
                alpha[i]
            } else if i + 1 == k {
                beta[i]
            } else if k + 1 == i {
                beta[k]
            } else {
                0.0
            }
        });
        let eig = nalgebra::SymmetricEigen::new(tri);
        let top = (0..m).max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()).unwrap();
        let y = eig.eigenvectors.column(top);
        let mut ritz = vec![ZERO; v0.len()];
        for (b, &c) in basis.iter().zip(y.iter()) {
            ritz.iter_mut().zip(b).for_each(|(r, x)| *r += x * c);
        }
        normalize(&mut ritz);
        let residual = (tail * y[m - 1]).abs();
        (eig.eigenvalues[top].max(0.0), ritz, residual)
    }

    /// Frobenius-based check that is cheap on large sparse matrices.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius() <= tol
    }
}

fn sparse_dense(a: &Csr, b: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.dim;
    let mut out = DMatrix::zeros(n, b.ncols());
    // column-major: walk one column of b and of the output at a time
    for c in 0..b.ncols() {
        let src = b.column(c);
        let mut dst = out.column_mut(c);
        for r in 0..n {
            let mut acc = ZERO;
            for (k, v) in a.row(r) {
                acc += v * src[k];
            }
            dst[r] = acc;
        }
    }
    out
}

/// Complex product through four real products, which take the blocked
/// real kernel (the generic complex one is about ten times slower).
pub fn dense_mul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C64::new)
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &mut [C64]) {
    let n = vec_norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// <x, y> conjugate-linear in the first slot.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Kronecker product of two small dense matrices.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Deterministic random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, seed: u64) -> MatrixOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    MatrixOperator::from_dense(h)
}

/// Deterministic random matrix with entries of order one.
pub fn random_matrix(dim: usize, seed: u64) -> MatrixOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MatrixOperator::from_fn(dim, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

/// Deterministic Haar-ish unitary from the QR factorisation of a random matrix.
pub fn random_unitary(dim: usize, seed: u64) -> MatrixOperator {
    let m = random_matrix(dim, seed).to_dense();
    MatrixOperator::from_dense(m.qr().q())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_norm_matches_svd() {
        for seed in 0..4 {
            let x = random_matrix(400, seed);
            let (s, u, v) = x.top_singular_triplet();
            assert!((s - x.op_norm_exact()).abs() <= 1e-10 * s, "seed {seed}");
            let xv = x.apply(&v);
            assert!(xv.iter().zip(&u).all(|(a, b)| (a - b * s).norm() < 1e-6 * s));
        }
        let d = MatrixOperator::from_real_diagonal(&[1.0, -3.0, 2.0, 0.5]);
        assert!((d.top_singular_triplet().0 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let a = random_matrix(12, 1);
        let b = random_matrix(12, 2);
        let a_sparse = MatrixOperator::from_triplets(12, a.triplets());
        let b_sparse = MatrixOperator::from_triplets(12, b.triplets());
        let reference = a.mul(&b);
        for prod in [a_sparse.mul(&b_sparse), a_sparse.mul(&b), a.mul(&b_sparse)] {
            assert!(prod.sub(&reference).max_abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let op = MatrixOperator::from_triplets(2, vec![(0, 1, ONE), (0, 1, ONE), (1, 0, ONE)]);
        assert_eq!(op.get(0, 1), C64::new(2.0, 0.0));
        assert!(!op.is_hermitian());
    }

    #[test]
    fn power_iteration_matches_svd() {
        let x = random_matrix(60, 7);
        let exact = x.op_norm_exact();
        let (power, _, _) = x.top_singular_triplet();
        assert!((exact - power).abs() < 1e-8 * exact);
    }

    #[test]
    fn compress_keeps_only_masked_block() {
        let x = random_matrix(5, 3);
        let mask = [true, false, true, false, false];
        let c = x.compress(&mask);
        assert_eq!(c.get(1, 1), ZERO);
        assert_eq!(c.get(0, 2), x.get(0, 2));
    }

    #[test]
    fn adjoint_of_apply() {
        let x = random_matrix(9, 4);
        let u: Vec<C64> = (0..9).map(|i| C64::new(i as f64, 1.0)).collect();
        let v: Vec<C64> = (0..9).map(|i| C64::new(1.0, -(i as f64))).collect();
        let lhs = inner(&u, &x.apply(&v));
        let rhs = inner(&x.apply_adjoint(&u), &v);
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
