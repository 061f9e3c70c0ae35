//! The JSON run report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sgeo_core::{CheckReport, TruncatedTriple, Verdict};

use crate::config::RunConfig;

pub const SCHEMA: &str = "sgeo-report/1";

/// Eigenvalues listed in the report at most.
pub const EIGENVALUES_LISTED: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryInfo {
    pub name: String,
    pub hilbert_dim: usize,
    pub p: usize,
    pub spinor_dim: usize,
    pub provenance: Vec<String>,
}

/// The spectrum of D and the unitary taking generators to its eigenbasis:
/// together they determine the geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPieces {
    /// Eigenvalues of D in increasing |λ| (ties by λ), at most
    /// [`EIGENVALUES_LISTED`].
    pub eigenvalues: Vec<f64>,
    pub eigenvalue_count: usize,
    /// sha256 of the eigenbasis in the generator (mode) basis, each column
    /// phase-fixed and quantized to 1e-9.
    pub basis_fingerprint: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub jobs: usize,
    /// Wall time per check in seconds.
    pub timing: BTreeMap<String, f64>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: RunConfig,
    pub geometry: Option<GeometryInfo>,
    pub two_pieces: Option<TwoPieces>,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    /// sha256 of everything above (the environment block is excluded).
    pub determinism_hash: String,
    pub environment: Environment,
}

#[derive(Serialize)]
struct Hashed<'a> {
    schema: &'a str,
    config: &'a RunConfig,
    geometry: &'a Option<GeometryInfo>,
    two_pieces: &'a Option<TwoPieces>,
    checks: &'a [CheckReport],
    summary: &'a Summary,
}

impl RunReport {
    pub fn assemble(
        config: RunConfig,
        geometry: Option<GeometryInfo>,
        two_pieces: Option<TwoPieces>,
        checks: Vec<CheckReport>,
        environment: Environment,
    ) -> Self {
        let mut summary = Summary { total: checks.len(), ..Summary::default() };
        for c in &checks {
            match c.verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::Fail => summary.fail += 1,
                Verdict::Inconclusive => summary.inconclusive += 1,
            }
        }
        let mut report = RunReport {
            schema: SCHEMA.into(),
            config,
            geometry,
            two_pieces,
            checks,
            summary,
            determinism_hash: String::new(),
            environment,
        };
        report.determinism_hash = report.compute_hash();
        report
    }

    pub fn compute_hash(&self) -> String {
        let body = Hashed {
            schema: &self.schema,
            config: &self.config,
            geometry: &self.geometry,
            two_pieces: &self.two_pieces,
            checks: &self.checks,
            summary: &self.summary,
        };
        let bytes = serde_json::to_vec(&body).expect("report serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn geometry_info(t: &TruncatedTriple) -> GeometryInfo {
    GeometryInfo {
        name: t.name().to_string(),
        hilbert_dim: t.hilbert_dim(),
        p: t.p(),
        spinor_dim: t.spinor_dim(),
        provenance: t.provenance().to_vec(),
    }
}

pub fn two_pieces(t: &TruncatedTriple) -> TwoPieces {
    let eig = t.dirac_eigen();
    let mut values = eig.values.clone();
    values.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap().then(a.partial_cmp(b).unwrap()));
    let count = values.len();
    values.truncate(EIGENVALUES_LISTED);
    let mut hasher = Sha256::new();
    for (k, col) in eig.sparse_columns().iter().enumerate() {
        let top = col.iter().map(|(_, a)| a.norm()).fold(0.0, f64::max);
        // first entry within rounding of the largest fixes the phase
        let phase = col
            .iter()
            .find(|(_, a)| a.norm() >= top * (1.0 - 1e-6))
            .map(|(_, a)| a.conj() / a.norm())
            .unwrap_or(sgeo_core::C64::new(1.0, 0.0));
        hasher.update((k as u64).to_le_bytes());
        for &(r, a) in col {
            let z = a * phase;
            let q = |x: f64| ((x * 1e9).round() as i64).to_le_bytes();
            if z.norm() < 1e-9 {
                continue;
            }
            hasher.update((r as u64).to_le_bytes());
            hasher.update(q(z.re));
            hasher.update(q(z.im));
        }
    }
    TwoPieces { eigenvalues: values, eigenvalue_count: count, basis_fingerprint: hex::encode(hasher.finalize()) }
}
