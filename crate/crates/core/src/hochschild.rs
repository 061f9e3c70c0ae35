//! Hochschild chains over the commutative generator algebra, the boundary
//! map, the antisymmetrizer, π_D and the orientability check.
//!
//! A factor is a commutative monomial in the named generators (a word); a
//! declared unitary pair (u, u*) cancels inside a word. Products in the
//! boundary are therefore symbolic and exact, and only π_D touches matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgeoError};
use crate::operator::{MatrixOperator, C64};
use crate::report::CheckReport;
use crate::triple::{grading_relations, TruncatedTriple};

/// A commutative monomial: generator name → positive exponent. The empty
/// word is the unit.
pub type Word = BTreeMap<String, u32>;

pub fn word(names: &[&str]) -> Word {
    let mut w = Word::new();
    for n in names {
        *w.entry(n.to_string()).or_insert(0) += 1;
    }
    w
}

pub fn word_name(w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|(n, &e)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect::<Vec<_>>()
        .join("·")
}

/// Product of two words with unitary pairs cancelled.
pub fn word_product(a: &Word, b: &Word, pairs: &[(String, String)]) -> Word {
    let mut w = a.clone();
    for (n, &e) in b {
        *w.entry(n.clone()).or_insert(0) += e;
    }
    for (u, v) in pairs {
        let (eu, ev) = (w.get(u).copied().unwrap_or(0), w.get(v).copied().unwrap_or(0));
        let k = eu.min(ev);
        if k > 0 {
            for (n, e) in [(u, eu - k), (v, ev - k)] {
                if e == 0 {
                    w.remove(n);
                } else {
                    w.insert(n.clone(), e);
                }
            }
        }
    }
    w
}

pub fn word_degree(w: &Word) -> usize {
    w.values().map(|&e| e as usize).sum()
}

/// A formal complex combination of elementary tensors a⁰ ⊗ ... ⊗ a^p.
#[derive(Clone, Debug, PartialEq)]
pub struct HochschildChain {
    pub degree: usize,
    pub terms: BTreeMap<Vec<Word>, C64>,
}

/// Serializable form of one chain term; `coeff` is [re, im].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTerm {
    pub coeff: [f64; 2],
    pub factors: Vec<Word>,
}

impl Serialize for HochschildChain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<ChainTerm> = self
            .terms
            .iter()
            .map(|(f, c)| ChainTerm { coeff: [c.re, c.im], factors: f.clone() })
            .collect();
        (self.degree, terms).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HochschildChain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (degree, terms): (usize, Vec<ChainTerm>) = Deserialize::deserialize(d)?;
        let mut c = HochschildChain::zero(degree);
        for t in terms {
            c.add_term(C64::new(t.coeff[0], t.coeff[1]), t.factors).map_err(serde::de::Error::custom)?;
        }
        Ok(c)
    }
}

impl HochschildChain {
    pub fn zero(degree: usize) -> Self {
        HochschildChain { degree, terms: BTreeMap::new() }
    }

    /// Adds coeff · (f⁰ ⊗ ... ⊗ f^p); zero coefficients are pruned.
    pub fn add_term(&mut self, coeff: C64, factors: Vec<Word>) -> Result<()> {
        if factors.len() != self.degree + 1 {
            return Err(SgeoError::InvalidArgument(format!(
                "a degree {} chain needs {} factors, got {}",
                self.degree,
                self.degree + 1,
                factors.len()
            )));
        }
        let slot = self.terms.entry(factors).or_insert(C64::new(0.0, 0.0));
        *slot += coeff;
        self.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(())
    }

    pub fn term(coeff: C64, factors: Vec<Word>) -> Result<Self> {
        let mut c = HochschildChain::zero(factors.len().saturating_sub(1));
        c.add_term(coeff, factors)?;
        Ok(c)
    }

    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        if self.degree != other.degree {
            return Err(SgeoError::InvalidArgument("chains of different degree".into()));
        }
        let mut out = HochschildChain::zero(self.degree);
        for (f, c) in &self.terms {
            out.add_term(alpha * c, f.clone())?;
        }
        for (f, c) in &other.terms {
            out.add_term(beta * c, f.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = HochschildChain::zero(self.degree);
        for (f, c) in &self.terms {
            out.add_term(alpha * c, f.clone()).unwrap();
        }
        out
    }

    /// Σ |coefficients|.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Hochschild boundary b, with products taken in the commutative word algebra.
pub fn boundary_with(c: &HochschildChain, pairs: &[(String, String)]) -> Result<HochschildChain> {
    if c.degree == 0 {
        return Err(SgeoError::InvalidArgument("boundary of a degree 0 chain".into()));
    }
    let p = c.degree;
    let mut out = HochschildChain::zero(p - 1);
    for (f, &coeff) in &c.terms {
        for i in 0..p {
            let mut g: Vec<Word> = f[..i].to_vec();
            g.push(word_product(&f[i], &f[i + 1], pairs));
            g.extend_from_slice(&f[i + 2..]);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(coeff * sign, g)?;
        }
        let mut g = vec![word_product(&f[p], &f[0], pairs)];
        g.extend_from_slice(&f[1..p]);
        let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        out.add_term(coeff * sign, g)?;
    }
    Ok(out)
}

pub fn boundary(c: &HochschildChain, t: &TruncatedTriple) -> Result<HochschildChain> {
    boundary_with(c, t.unitary_pairs())
}

/// All permutations of 0..n with their signs.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..n {
            if !used[i] {
                // inversions added by placing i: number of unused smaller indices
                let inv = used[..i].iter().filter(|u| !**u).count();
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, if inv % 2 == 0 { sign } else { -sign }, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], 1.0, &mut out);
    out
}

/// P(a⁰ ⊗ a¹ ⊗ ... ⊗ a^p) = (1/p!) Σ_β ε(β) a⁰ ⊗ a^{β(1)} ⊗ ... ⊗ a^{β(p)}.
pub fn antisymmetrize(c: &HochschildChain) -> HochschildChain {
    let p = c.degree;
    let perms = signed_permutations(p);
    let norm = 1.0 / perms.len() as f64;
    let mut out = HochschildChain::zero(p);
    for (f, &coeff) in &c.terms {
        for (perm, sign) in &perms {
            let mut g = vec![f[0].clone()];
            g.extend(perm.iter().map(|&j| f[j + 1].clone()));
            out.add_term(coeff * (sign * norm), g).unwrap();
        }
    }
    out
}

/// Operator of a word: the product of its generators in name order.
pub fn word_operator(w: &Word, t: &TruncatedTriple) -> Result<MatrixOperator> {
    let mut op = MatrixOperator::identity(t.hilbert_dim());
    for (name, &e) in w {
        let g = &t.generator(name)?.op;
        for _ in 0..e {
            op = op.mul(g);
        }
    }
    Ok(op)
}

/// Band depth needed to read π_D(c) reliably: total generator count.
pub fn chain_depth(c: &HochschildChain) -> usize {
    c.terms.keys().map(|f| f.iter().map(word_degree).sum::<usize>()).max().unwrap_or(0)
}

/// π_D(c) = Σ coeff · a⁰ [D, a¹] ... [D, a^p].
pub fn pi_d(c: &HochschildChain, t: &TruncatedTriple) -> Result<MatrixOperator> {
    if c.degree != t.p() {
        return Err(SgeoError::InvalidArgument(format!(
            "π_D needs a chain of degree {}, got {}",
            t.p(),
            c.degree
        )));
    }
    let d = t.dirac();
    let mut total = MatrixOperator::zeros(t.hilbert_dim());
    for (f, &coeff) in &c.terms {
        let mut op = word_operator(&f[0], t)?;
        for w in &f[1..] {
            op = op.mul(&d.commutator(&word_operator(w, t)?));
        }
        total = total.combine(C64::new(1.0, 0.0), &op, coeff);
    }
    Ok(total)
}

/// Condition 4: b(c) = 0, c antisymmetric, and π_D(c) = γ (p even) or 1
/// (p odd) on the inner band.
pub fn orientability_check(t: &TruncatedTriple, c: &HochschildChain) -> CheckReport {
    let mut r = CheckReport::new("orientability");
    match boundary(c, t) {
        Ok(bc) => {
            r.bound("boundary_l1", bc.l1_norm(), 1e-9);
        }
        Err(e) => r.fail(format!("boundary: {e}")),
    }
    let asym = c.combine(C64::new(1.0, 0.0), &antisymmetrize(c), C64::new(-1.0, 0.0));
    match asym {
        Ok(diff) => {
            let worst = diff.terms.values().map(|v| v.norm()).fold(0.0, f64::max);
            r.bound("antisymmetry", worst, 1e-12);
        }
        Err(e) => r.fail(e.to_string()),
    }
    let n = t.hilbert_dim();
    let target = if t.p() % 2 == 1 {
        MatrixOperator::identity(n)
    } else {
        match t.grading() {
            Some(g) => {
                let (h, s, a) = grading_relations(g, t.dirac());
                r.bound("grading_hermitian", h, 1e-12);
                r.bound("grading_square", s, 1e-12);
                r.bound("grading_anticommutes", a, 1e-12 * t.dirac().max_abs().max(1.0));
                g.clone()
            }
            None => {
                r.fail("even dimension without a grading");
                return r;
            }
        }
    };
    let depth = chain_depth(c);
    let mask = match t.band_mask(depth) {
        Ok(m) => m,
        Err(e) => {
            r.inconclusive(e.to_string());
            return r;
        }
    };
    match pi_d(c, t) {
        Ok(pi) => {
            let res = pi.sub(&target).compress(&mask).op_norm();
            r.bound("pi_d_residual", res, 1e-9);
            r.metric("depth", depth as f64);
        }
        Err(e) => r.fail(e.to_string()),
    }
    r
}
