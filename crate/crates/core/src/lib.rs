//! Finite-dimensional truncations of commutative spectral triples and
//! numerical checks of the reconstruction conditions.

pub mod calculus;
pub mod charts;
pub mod dixmier;
pub mod error;
pub mod geometries;
pub mod hochschild;
pub mod metric;
pub mod operator;
pub mod report;
pub mod spectral;
pub mod triple;
pub mod voiculescu;

pub use error::{Result, SgeoError};
pub use operator::{MatrixOperator, C64};
pub use triple::{BandPolicy, Element, TripleParts, TruncatedTriple};
pub use geometries::{Geometry, GeometrySpec};
pub use hochschild::HochschildChain;
pub use report::{CheckReport, LimitEstimate, Verdict};
