//! Model geometries: circle, flat tori, the interval counterexample, the
//! product with a finite ladder, and corruptions for negative tests.

mod circle;
mod corrupt;
mod interval;
mod product;
mod torus;

use serde::{Deserialize, Serialize};

pub use circle::circle;
pub use corrupt::{corrupt, Corruption, CORRUPTION_STRENGTH};
pub use interval::interval;
pub use product::product;
pub use torus::{form_clifford, orientation_phase, pauli, signed_hodge, torus, volume_cycle, TorusVariant};

use crate::error::{Result, SgeoError};
use crate::hochschild::HochschildChain;
use crate::triple::{Element, TruncatedTriple};

/// A triple together with its orientation cycle, when it has one.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub triple: TruncatedTriple,
    pub cycle: Option<HochschildChain>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Circle,
    Torus,
    Interval,
    Product,
}

/// Declarative description of a geometry (the unit of the run config).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Λ, or the number of positive modes N for the interval.
    pub lambda: usize,
    #[serde(default)]
    pub variant: TorusVariant,
    #[serde(default = "default_kernel_shift")]
    pub kernel_shift: f64,
    /// D' spectrum for the product geometry (built over the p = 2 torus).
    #[serde(default)]
    pub ladder: Vec<f64>,
    #[serde(default)]
    pub corrupt: Option<Corruption>,
}

fn default_p() -> usize {
    1
}

fn default_kernel_shift() -> f64 {
    1.0
}

impl GeometrySpec {
    pub fn circle(lambda: usize) -> Self {
        GeometrySpec {
            kind: GeometryKind::Circle,
            p: 1,
            lambda,
            variant: TorusVariant::Dirac,
            kernel_shift: 1.0,
            ladder: Vec::new(),
            corrupt: None,
        }
    }

    pub fn torus(p: usize, lambda: usize) -> Self {
        GeometrySpec { kind: GeometryKind::Torus, p, ..GeometrySpec::circle(lambda) }
    }

    pub fn interval(n: usize) -> Self {
        GeometrySpec { kind: GeometryKind::Interval, ..GeometrySpec::circle(n) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 8 {
            return Err(SgeoError::InvalidArgument(format!("lambda {} < 8", self.lambda)));
        }
        let p_ok = match self.kind {
            GeometryKind::Circle | GeometryKind::Interval => self.p == 1,
            GeometryKind::Torus => (2..=3).contains(&self.p),
            GeometryKind::Product => self.p == 2,
        };
        if !p_ok {
            return Err(SgeoError::InvalidArgument(format!("p = {} not valid for {:?}", self.p, self.kind)));
        }
        if self.kind == GeometryKind::Interval && self.lambda < 32 {
            return Err(SgeoError::InvalidArgument("interval needs N >= 32".into()));
        }
        if self.kernel_shift <= 0.0 || !self.kernel_shift.is_finite() {
            return Err(SgeoError::InvalidArgument("kernel_shift must be positive".into()));
        }
        Ok(())
    }

    /// Builds the geometry (and applies the corruption, seeded by `seed`).
    pub fn build(&self, seed: u64) -> Result<Geometry> {
        self.validate()?;
        let g = match self.kind {
            GeometryKind::Circle => circle(self.lambda, self.kernel_shift)?,
            GeometryKind::Torus => torus(self.p, self.lambda, self.variant, self.kernel_shift)?,
            GeometryKind::Interval => interval(self.lambda)?,
            GeometryKind::Product => {
                let base = torus(2, self.lambda, self.variant, self.kernel_shift)?;
                let ladder = if self.ladder.is_empty() { vec![0.0] } else { self.ladder.clone() };
                product(&base.triple, &ladder)?
            }
        };
        match self.corrupt {
            Some(mode) => corrupt(&g, mode, seed),
            None => Ok(g),
        }
    }
}

/// Registers generators on a triple built without them.
pub(crate) fn finish<S: Into<String>>(base: TruncatedTriple, gens: Vec<(S, Element)>) -> Result<TruncatedTriple> {
    let mut parts = base.into_parts();
    for (name, e) in gens {
        parts.generators.insert(name.into(), e);
    }
    TruncatedTriple::new(parts)
}
