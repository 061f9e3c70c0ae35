use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};

/// Eigen-decomposition H = basis · diag(values) · basis*, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub basis: MatrixOperator,
}

impl Eigen {
    /// basis · diag(f(values)) · basis*
    pub fn map(&self, f: impl Fn(f64) -> f64) -> MatrixOperator {
        let diag: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let out = self.basis.mul(&MatrixOperator::from_real_diagonal(&diag)).mul(&self.basis.adjoint());
        out.hermitian_part()
    }

    /// Nonzero entries of every basis column, as (row, value) lists.
    pub fn sparse_columns(&self) -> Vec<Vec<(usize, C64)>> {
        let mut cols = vec![Vec::new(); self.basis.dim()];
        for (r, c, v) in self.basis.triplets() {
            if v.norm_sqr() > 0.0 {
                cols[c].push((r, v));
            }
        }
        cols
    }

    /// Column `k` of the basis.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.basis.dim();
        (0..n).map(|r| self.basis.get(r, k)).collect()
    }
}

/// Tolerance on the asymmetry accepted as "Hermitian" by the decomposition.
fn hermitian_tolerance(h: &MatrixOperator) -> f64 {
    1e-10 * h.max_abs().max(1.0)
}

/// Hermitian eigen-decomposition.
///
/// The sparsity graph is split into connected components first, so block
/// diagonal operators (Dirac operators in a mode basis) are diagonalised one
/// small block at a time and keep a sparse eigenbasis.
pub fn eigendecompose(h: &MatrixOperator) -> Result<Eigen> {
    let asymmetry = h.hermitian_defect();
    if asymmetry > hermitian_tolerance(h) {
        return Err(SgeoError::NotHermitian { asymmetry });
    }
    let n = h.dim();
    let triplets = h.triplets();
    let blocks = components(n, &triplets);

    // (eigenvalue, block id, index within block)
    let mut pairs: Vec<(f64, Vec<(usize, C64)>)> = Vec::with_capacity(n);
    let mut local = vec![usize::MAX; n];
    let mut block_entries: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); blocks.len()];
    let mut block_of = vec![0usize; n];
    for (b, members) in blocks.iter().enumerate() {
        for (k, &g) in members.iter().enumerate() {
            local[g] = k;
            block_of[g] = b;
        }
    }
    for &(r, c, v) in &triplets {
        let b = block_of[r];
        block_entries[b].push((local[r], local[c], v));
    }
    for (b, members) in blocks.iter().enumerate() {
        let m = members.len();
        let mut dense = DMatrix::<C64>::zeros(m, m);
        for &(r, c, v) in &block_entries[b] {
            dense[(r, c)] += v;
        }
        let herm = (&dense + dense.adjoint()) * C64::new(0.5, 0.0);
        if m == 1 {
            pairs.push((herm[(0, 0)].re, vec![(members[0], C64::new(1.0, 0.0))]));
            continue;
        }
        let eig = SymmetricEigen::new(herm);
        for k in 0..m {
            let col: Vec<(usize, C64)> =
                (0..m).map(|r| (members[r], eig.eigenvectors[(r, k)])).filter(|(_, v)| v.norm() > 0.0).collect();
            pairs.push((eig.eigenvalues[k], col));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1[0].0.cmp(&b.1[0].0)));

    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let largest_block = blocks.iter().map(Vec::len).max().unwrap_or(1);
    let basis = if largest_block * 4 >= n && n > 64 {
        let mut dense = DMatrix::<C64>::zeros(n, n);
        for (k, (_, col)) in pairs.iter().enumerate() {
            for &(r, v) in col {
                dense[(r, k)] = v;
            }
        }
        MatrixOperator::from_dense(dense)
    } else {
        let mut entries = Vec::new();
        for (k, (_, col)) in pairs.iter().enumerate() {
            entries.extend(col.iter().map(|&(r, v)| (r, k, v)));
        }
        MatrixOperator::from_triplets(n, entries)
    };
    Ok(Eigen { values, basis })
}

/// f(H) through the eigen-decomposition of H.
pub fn functional_calculus(h: &MatrixOperator, f: impl Fn(f64) -> f64) -> Result<MatrixOperator> {
    Ok(eigendecompose(h)?.map(f))
}

fn components(n: usize, triplets: &[(usize, usize, C64)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(r, c, v) in triplets {
        if r != c && v.norm() > 0.0 {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}
