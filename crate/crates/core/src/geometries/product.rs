use nalgebra::DMatrix;

use super::Geometry;
use crate::error::{Result, SgeoError};
use crate::operator::{kron, MatrixOperator, C64};
use crate::triple::{Element, TripleParts, TruncatedTriple};

/// D'' = D ⊗ 1 + γ ⊗ D' with D' = diag(ladder), acting on H ⊗ C^L.
/// Basis order keeps the mode index slowest, so the new spinor dimension is
/// spinor_dim · L.
pub fn product(t: &TruncatedTriple, ladder: &[f64]) -> Result<Geometry> {
    let gamma = t.grading().ok_or_else(|| SgeoError::InvalidArgument("product needs an even triple".into()))?;
    if ladder.is_empty() {
        return Err(SgeoError::InvalidArgument("empty D' ladder".into()));
    }
    let l = ladder.len();
    let id_l = MatrixOperator::identity(l);
    let dprime = MatrixOperator::from_real_diagonal(ladder);
    let lift = |a: &MatrixOperator| tensor(a, &id_l);
    let dirac = lift(t.dirac()).add(&tensor(gamma, &dprime));
    let src = t.parts();
    let generators = src
        .generators
        .iter()
        .map(|(k, e)| (k.clone(), Element { op: lift(&e.op), symbol: e.symbol.clone() }))
        .collect();
    let id_small = DMatrix::<C64>::identity(l, l);
    let mut provenance = src.provenance.clone();
    provenance.push(format!("product with D' ladder {ladder:?}"));
    let parts = TripleParts {
        name: format!("{} x ladder({l})", src.name),
        dirac: dirac.hermitian_part(),
        generators,
        unitary_pairs: src.unitary_pairs.clone(),
        grading: None,
        p: src.p,
        mode_labels: src.mode_labels.clone(),
        spinor_dim: src.spinor_dim * l,
        band: src.band,
        kernel_shift: src.kernel_shift,
        clifford: src.clifford.iter().map(|g| kron(g, &id_small)).collect(),
        sampling: src.sampling.clone(),
        provenance,
    };
    Ok(Geometry { triple: TruncatedTriple::new(parts)?, cycle: None })
}

/// a ⊗ b with a's index slowest.
fn tensor(a: &MatrixOperator, b: &MatrixOperator) -> MatrixOperator {
    let nb = b.dim();
    let bt = b.triplets();
    let mut entries = Vec::with_capacity(a.nnz() * bt.len());
    for (r, c, v) in a.triplets() {
        for &(rb, cb, w) in &bt {
            entries.push((r * nb + rb, c * nb + cb, v * w));
        }
    }
    MatrixOperator::from_triplets(a.dim() * nb, entries)
}
