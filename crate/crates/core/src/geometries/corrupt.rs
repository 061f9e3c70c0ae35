use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Geometry;
use crate::error::{Result, SgeoError};
use crate::operator::{random_hermitian, MatrixOperator, C64};
use crate::triple::{mode_norm, TruncatedTriple};

/// Deterministic perturbations used as negative-test fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    /// D += ε·X with X a random Hermitian coupling of neighbouring modes.
    OrderOneBreak,
    /// γ → γ + 0.1 σ₁ ⊗ 1; rejected at construction.
    GradingBreak,
    /// Orientation cycle multiplied by 2.
    CycleScale,
    /// D += ε·R with R a random dense Hermitian matrix.
    #[serde(rename = "dense_D", alias = "dense_d")]
    DenseD,
}

pub const CORRUPTION_STRENGTH: f64 = 0.05;

impl Corruption {
    pub const ALL: [Corruption; 4] =
        [Corruption::OrderOneBreak, Corruption::GradingBreak, Corruption::CycleScale, Corruption::DenseD];

    pub fn name(self) -> &'static str {
        match self {
            Corruption::OrderOneBreak => "order_one_break",
            Corruption::GradingBreak => "grading_break",
            Corruption::CycleScale => "cycle_scale",
            Corruption::DenseD => "dense_D",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Corruption::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SgeoError::InvalidArgument(format!("unknown corruption mode `{s}`")))
    }

    /// Checks this corruption is expected to fail. A perturbation of D also
    /// moves π_D and [D, h], so it breaks orientability and the symbol
    /// identities along with the order-one condition; "construction" means
    /// the triple is rejected before any check runs.
    pub fn expected_failures(self) -> &'static [&'static str] {
        match self {
            Corruption::OrderOneBreak | Corruption::DenseD => {
                &["order_one", "orientability", "symbol_commutation", "double_identity"]
            }
            Corruption::GradingBreak => &["construction"],
            Corruption::CycleScale => &["orientability"],
        }
    }
}

/// Applies `mode` to a geometry; the seed fixes the random perturbations.
pub fn corrupt(g: &Geometry, mode: Corruption, seed: u64) -> Result<Geometry> {
    let t = &g.triple;
    let mut parts = t.parts().clone();
    parts.provenance.push(format!("corruption {} seed={seed}", mode.name()));
    let mut cycle = g.cycle.clone();
    match mode {
        Corruption::OrderOneBreak => {
            let x = neighbour_coupling(t, seed);
            parts.dirac = parts.dirac.add(&odd_part(t, &x).scale_real(CORRUPTION_STRENGTH)).hermitian_part();
        }
        Corruption::DenseD => {
            let n = t.hilbert_dim();
            if n > 2048 {
                return Err(SgeoError::Unsupported(format!("dense_D on a {n}-dimensional space")));
            }
            let r = random_hermitian(n, seed);
            let r = odd_part(t, &r);
            let scale = CORRUPTION_STRENGTH / r.op_norm().max(1e-300) * 4.0;
            parts.dirac = parts.dirac.add(&r.scale_real(scale)).hermitian_part();
        }
        Corruption::GradingBreak => {
            let g = parts
                .grading
                .as_ref()
                .ok_or_else(|| SgeoError::Unsupported("grading_break needs a graded triple".into()))?;
            let s = t.spinor_dim();
            let mut sigma1 = nalgebra::DMatrix::<C64>::zeros(s, s);
            for a in 0..s / 2 {
                sigma1[(2 * a, 2 * a + 1)] = C64::new(1.0, 0.0);
                sigma1[(2 * a + 1, 2 * a)] = C64::new(1.0, 0.0);
            }
            parts.grading = Some(g.add(&t.spinor_operator(&sigma1).scale_real(0.1)));
        }
        Corruption::CycleScale => {
            cycle = cycle.map(|c| c.scale(C64::new(2.0, 0.0)));
            if cycle.is_none() {
                return Err(SgeoError::Unsupported("cycle_scale needs an orientation cycle".into()));
            }
        }
    }
    Ok(Geometry { triple: TruncatedTriple::new(parts)?, cycle })
}

/// X ↦ (X - γXγ)/2, which anticommutes with γ (identity without grading).
fn odd_part(t: &TruncatedTriple, x: &MatrixOperator) -> MatrixOperator {
    match t.grading() {
        Some(g) => x.sub(&g.mul(x).mul(g)).scale_real(0.5),
        None => x.clone(),
    }
}

/// Random Hermitian operator coupling modes at |k - k'|_inf <= 1, with
/// entries of order one and a mode-independent size.
fn neighbour_coupling(t: &TruncatedTriple, seed: u64) -> MatrixOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = t.mode_labels();
    let s = t.spinor_dim();
    let mut index = std::collections::HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        index.insert(l.clone(), i);
    }
    let p = labels[0].len();
    let mut entries = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        for off in 0..3usize.pow(p as u32) {
            let mut k = l.clone();
            let mut o = off;
            for c in k.iter_mut() {
                *c += (o % 3) as i64 - 1;
                o /= 3;
            }
            let diff: Vec<i64> = k.iter().zip(l).map(|(a, b)| a - b).collect();
            if mode_norm(&diff) == 0 {
                continue;
            }
            if let Some(&j) = index.get(&k) {
                if j < i {
                    continue;
                }
                for a in 0..s {
                    for b in 0..s {
                        let v = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                        entries.push((i * s + a, j * s + b, v));
                        entries.push((j * s + b, i * s + a, v.conj()));
                    }
                }
            }
        }
    }
    MatrixOperator::from_triplets(t.hilbert_dim(), entries)
}
