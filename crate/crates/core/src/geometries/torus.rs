use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{finish, Geometry};
use crate::error::{Result, SgeoError};
use crate::hochschild::{signed_permutations, word, HochschildChain, Word};
use crate::operator::{MatrixOperator, C64};
use crate::triple::sampling::{Coefficients, ModeBox};
use crate::triple::{BandPolicy, Element, Sampling, TripleParts, TruncatedTriple};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusVariant {
    /// Pauli spinors, γ^μ = -iσ_μ.
    #[default]
    Dirac,
    /// Forms ∧*R^p with Clifford action v∧ξ - i_v ξ (p = 2 only).
    Signature,
}

pub fn pauli() -> [DMatrix<C64>; 3] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

/// Clifford action of e_mu on ∧*R^p, basis indexed by bitmasks (bit μ set
/// when e_μ is present), ordered by increasing mask.
pub fn form_clifford(p: usize, mu: usize) -> DMatrix<f64> {
    let n = 1 << p;
    let mut m = DMatrix::zeros(n, n);
    for mask in 0..n {
        // sign of moving e_mu past the lower-index factors
        let sign = if (mask & ((1 << mu) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let target = mask ^ (1 << mu);
        if mask & (1 << mu) == 0 {
            m[(target, mask)] += sign; // wedge
        } else {
            m[(target, mask)] -= sign; // contraction
        }
    }
    m
}

/// Signed Hodge star (-1)^{k(p-k)+k(k+1)/2} ⋆ on ∧*R^p (flat, standard
/// orientation).
pub fn signed_hodge(p: usize) -> DMatrix<f64> {
    let n = 1 << p;
    let full = n - 1;
    let mut m = DMatrix::zeros(n, n);
    for mask in 0..n {
        let comp = full ^ mask;
        // e_I ∧ e_J = sign · e_1∧...∧e_p
        let mut sign_wedge = 1.0;
        for i in 0..p {
            if mask & (1 << i) != 0 {
                let below = (comp & ((1 << i) - 1)).count_ones();
                if below % 2 == 1 {
                    sign_wedge = -sign_wedge;
                }
            }
        }
        let k = mask.count_ones() as usize;
        let exp = k * (p - k) + k * (k + 1) / 2;
        let sign = if exp.is_multiple_of(2) { 1.0 } else { -1.0 };
        m[(comp, mask)] = sign * sign_wedge;
    }
    m
}

/// i^{-p(p+1)/2}.
pub fn orientation_phase(p: usize) -> C64 {
    C64::new(0.0, -1.0).powi((p * (p + 1) / 2) as i32)
}

/// Flat torus R^p / Z^p with modes |k|_inf <= Λ.
pub fn torus(p: usize, lambda: usize, variant: TorusVariant, kernel_shift: f64) -> Result<Geometry> {
    if !(2..=3).contains(&p) {
        return Err(SgeoError::InvalidArgument(format!("torus dimension {p} not in {{2, 3}}")));
    }
    if variant == TorusVariant::Signature && p != 2 {
        return Err(SgeoError::Unsupported("signature variant is built for p = 2 only".into()));
    }
    let (gammas, grading): (Vec<DMatrix<C64>>, Option<DMatrix<C64>>) = match variant {
        TorusVariant::Dirac => {
            let s = pauli();
            let g: Vec<DMatrix<C64>> = (0..p).map(|mu| s[mu].map(|v| v * C64::new(0.0, -1.0))).collect();
            (g, if p == 2 { Some(s[2].clone()) } else { None })
        }
        TorusVariant::Signature => {
            let g: Vec<DMatrix<C64>> = (0..p).map(|mu| form_clifford(p, mu).map(|v| C64::new(v, 0.0))).collect();
            let mut omega = DMatrix::<C64>::identity(1 << p, 1 << p);
            for gm in &g {
                omega *= gm;
            }
            (g, Some(omega * orientation_phase(p)))
        }
    };
    let s = gammas[0].nrows();
    let modes = ModeBox::new(p, lambda);
    let mut entries = Vec::new();
    for m in 0..modes.len() {
        let k = modes.label(m);
        // D = Σ_μ γ^μ ∂_μ with ∂_μ = 2πi k_μ on the mode
        let mut block = DMatrix::<C64>::zeros(s, s);
        for (mu, g) in gammas.iter().enumerate() {
            block += g * C64::new(0.0, 2.0 * PI * k[mu] as f64);
        }
        for a in 0..s {
            for b in 0..s {
                if block[(a, b)] != C64::new(0.0, 0.0) {
                    entries.push((m * s + a, m * s + b, block[(a, b)]));
                }
            }
        }
    }
    let dim = modes.len() * s;
    let parts = TripleParts {
        name: format!("torus(p={p}, Λ={lambda}, {variant:?})"),
        dirac: MatrixOperator::from_triplets(dim, entries),
        generators: BTreeMap::new(),
        unitary_pairs: (1..=p).map(|mu| (format!("u{mu}"), format!("u{mu}*"))).collect(),
        grading: None,
        p,
        mode_labels: modes.labels(),
        spinor_dim: s,
        band: BandPolicy { lambda_full: lambda, generator_bandwidth: 1 },
        kernel_shift,
        clifford: gammas,
        sampling: Sampling::Fourier { modes, period: 1.0 },
        provenance: vec![format!("torus p={p} lambda={lambda} variant={variant:?} kernel_shift={kernel_shift}")],
    };
    let mut base = TruncatedTriple::new(parts)?;
    if let Some(g) = grading {
        let lifted = base.spinor_operator(&g);
        let mut parts = base.into_parts();
        parts.grading = Some(lifted);
        base = TruncatedTriple::new(parts)?;
    }

    let m1 = ModeBox::new(p, 1);
    let unit_vec = |mu: usize, sign: i64| {
        let mut k = vec![0i64; p];
        k[mu] = sign;
        m1.index(&k).unwrap()
    };
    let mut gens: Vec<(String, Element)> = Vec::new();
    for mu in 0..p {
        let mut up = Coefficients::zeros(m1);
        up.values[unit_vec(mu, 1)] = C64::new(1.0, 0.0);
        let mut down = Coefficients::zeros(m1);
        down.values[unit_vec(mu, -1)] = C64::new(1.0, 0.0);
        let mut cos = Coefficients::zeros(m1);
        cos.values[unit_vec(mu, 1)] = C64::new(0.5, 0.0);
        cos.values[unit_vec(mu, -1)] = C64::new(0.5, 0.0);
        let mut sin = Coefficients::zeros(m1);
        sin.values[unit_vec(mu, 1)] = C64::new(0.0, -0.5);
        sin.values[unit_vec(mu, -1)] = C64::new(0.0, 0.5);
        gens.push((format!("u{}", mu + 1), base.element_from_coefficients(&up)?));
        gens.push((format!("u{}*", mu + 1), base.element_from_coefficients(&down)?));
        gens.push((format!("cos{}", mu + 1), base.element_from_coefficients(&cos)?));
        gens.push((format!("sin{}", mu + 1), base.element_from_coefficients(&sin)?));
    }
    let triple = finish(base, gens)?;
    let cycle = volume_cycle(p, 1.0)?;
    Ok(Geometry { triple, cycle: Some(cycle) })
}

/// c = κ Σ_σ ε(σ) u_1*⋯u_p* ⊗ u_σ(1) ⊗ ⋯ ⊗ u_σ(p) with κ chosen so that
/// π_D(c) = γ (p even) or 1 (p odd) when [D, u_μ] = iω γ^μ u_μ and
/// [γ^1, ..., γ^p] = p! i^{p(p+1)/2} γ.
pub fn volume_cycle(p: usize, period: f64) -> Result<HochschildChain> {
    let omega = 2.0 * PI / period;
    let factorial: f64 = (1..=p).map(|v| v as f64).product();
    let denom = C64::new(0.0, omega).powi(p as i32) * factorial * C64::new(0.0, 1.0).powi((p * (p + 1) / 2) as i32);
    let kappa = C64::new(1.0, 0.0) / denom;
    let head: Word = {
        let names: Vec<String> = (1..=p).map(|mu| format!("u{mu}*")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        word(&refs)
    };
    let mut c = HochschildChain::zero(p);
    for (perm, sign) in signed_permutations(p) {
        let mut f = vec![head.clone()];
        f.extend(perm.iter().map(|&j| word(&[format!("u{}", j + 1).as_str()])));
        c.add_term(kappa * sign, f)?;
    }
    Ok(c)
}
