//! The `analyze` pipeline and its JSON report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::classify::{classify, verify_corollaries, verify_veys, Classification, VeysReport};
use crate::graph::{canonical_cycle, GraphError, VertexId, WeightedDualGraph};
use crate::linalg::{rational_str, Rational};
use crate::plumbing::{build_certificate, BypassReason, CertifyOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub id: VertexId,
    #[serde(with = "rational_str")]
    pub k: Rational,
}

/// Condensed certify result for the report; the full certificate comes from
/// the `certify` command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertifySummary {
    Certificate { r: i64, checks: usize },
    ClassificationBypass { reason: BypassReason },
    Failure { kind: String, message: String },
}

impl From<&CertifyOutcome> for CertifySummary {
    fn from(o: &CertifyOutcome) -> Self {
        match o {
            CertifyOutcome::Certificate(c) => Self::Certificate {
                r: c.r,
                checks: c.transcript.len(),
            },
            CertifyOutcome::ClassificationBypass { reason, .. } => {
                Self::ClassificationBypass { reason: *reason }
            }
            CertifyOutcome::Failure(e) => Self::Failure {
                kind: e.kind().to_string(),
                message: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub graph: WeightedDualGraph,
    pub negative_definite: bool,
    pub discrepancies: Vec<Discrepancy>,
    pub topological_index: u64,
    pub classification: Classification,
    pub veys: VeysReport,
    pub corollaries: VeysReport,
    pub certify: CertifySummary,
}

/// Matrix, definiteness, canonical cycle, classification, structure checks
/// and a certify attempt. Fails only on disconnected or non negative definite
/// input.
pub fn analyze(g: &WeightedDualGraph) -> Result<AnalysisReport, GraphError> {
    let z = canonical_cycle(g)?;
    let discrepancies = z
        .discrepancies()
        .iter()
        .map(|(&id, k)| Discrepancy { id, k: k.clone() })
        .collect();
    Ok(AnalysisReport {
        graph: g.clone(),
        negative_definite: true,
        discrepancies,
        topological_index: z.topological_index(),
        classification: classify(g, &z),
        veys: verify_veys(g, &z),
        corollaries: verify_corollaries(g, &z),
        certify: CertifySummary::from(&build_certificate(g, &z)),
    })
}

impl AnalysisReport {
    pub fn discrepancy_map(&self) -> BTreeMap<VertexId, &Rational> {
        self.discrepancies.iter().map(|d| (d.id, &d.k)).collect()
    }
}
