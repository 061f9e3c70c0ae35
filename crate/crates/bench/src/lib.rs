//! Fixtures shared by the benchmarks.

use sgeo_core::geometries::{circle, torus, TorusVariant};
use sgeo_core::TruncatedTriple;

pub fn circle_triple(lambda: usize) -> TruncatedTriple {
    circle(lambda, 1.0).expect("circle builds").triple
}

pub fn torus_triple(lambda: usize) -> TruncatedTriple {
    torus(2, lambda, TorusVariant::Dirac, 1.0).expect("torus builds").triple
}
