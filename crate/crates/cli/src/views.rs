//! Serializable views of core reports and results.

use serde::Serialize;

use crate::format::{cmatrix_to_matrix, Matrix};
use qcoh_core::channel::ValidationReport;
use qcoh_core::coherence::CoherenceValue;
use qcoh_core::harness::PropertyReport;
use qcoh_core::incoherent::ConvexDecomposition;
use qcoh_core::superchannel::{SelectiveOutcome, SuperValidationReport};

#[derive(Serialize)]
pub struct ValidationView {
    pub kind: &'static str,
    pub is_hermitian: bool,
    pub min_eigenvalue: f64,
    pub trace_residual: f64,
    pub verdict: bool,
}

impl ValidationView {
    pub fn channel(report: &ValidationReport) -> Self {
        ValidationView {
            kind: "channel",
            is_hermitian: report.is_hermitian,
            min_eigenvalue: report.min_eigenvalue,
            trace_residual: report.trace_residual,
            verdict: report.verdict,
        }
    }
}

#[derive(Serialize)]
pub struct SuperValidationView {
    pub kind: &'static str,
    pub is_hermitian: bool,
    pub min_eigenvalue: f64,
    pub slice_residual: f64,
    pub completeness_residual: f64,
    pub trace_residual: f64,
    /// Reduced blocks indexed row-major by the input index pair.
    pub reduced_blocks: Vec<Matrix>,
    pub verdict: bool,
}

impl From<&SuperValidationReport> for SuperValidationView {
    fn from(report: &SuperValidationReport) -> Self {
        SuperValidationView {
            kind: "superchannel",
            is_hermitian: report.is_hermitian,
            min_eigenvalue: report.min_eigenvalue,
            slice_residual: report.slice_residual,
            completeness_residual: report.completeness_residual,
            trace_residual: report.trace_residual,
            reduced_blocks: report.reduced_blocks.iter().map(cmatrix_to_matrix).collect(),
            verdict: report.verdict,
        }
    }
}

#[derive(Serialize)]
pub struct CoherenceView {
    pub measure: &'static str,
    pub value: f64,
    pub normalization: f64,
}

impl From<&CoherenceValue> for CoherenceView {
    fn from(value: &CoherenceValue) -> Self {
        CoherenceView {
            measure: value.measure.name(),
            value: value.value,
            normalization: value.normalization,
        }
    }
}

#[derive(Serialize)]
pub struct DecompositionView {
    pub weights: Vec<f64>,
    pub assignments: Vec<Vec<usize>>,
}

impl From<&ConvexDecomposition> for DecompositionView {
    fn from(decomposition: &ConvexDecomposition) -> Self {
        DecompositionView {
            weights: decomposition.weights.clone(),
            assignments: decomposition
                .terms
                .iter()
                .map(|term| term.map().to_vec())
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct ClassifyView {
    pub incoherent: bool,
    pub mio_condition: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionView>,
}

#[derive(Serialize)]
pub struct OutcomeView {
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub choi: Option<Matrix>,
}

impl From<&SelectiveOutcome> for OutcomeView {
    fn from(outcome: &SelectiveOutcome) -> Self {
        OutcomeView {
            probability: outcome.probability,
            choi: outcome.choi.as_ref().map(cmatrix_to_matrix),
        }
    }
}

#[derive(Serialize)]
pub struct PropertyReportView {
    pub property: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub generator_failures: usize,
    pub worst_residual: f64,
    pub failing_seeds: Vec<u64>,
    pub pass: bool,
}

impl From<&PropertyReport> for PropertyReportView {
    fn from(report: &PropertyReport) -> Self {
        PropertyReportView {
            property: report.property,
            trials: report.trials,
            failures: report.failures,
            generator_failures: report.generator_failures,
            worst_residual: report.worst_residual,
            failing_seeds: report.failing_seeds.clone(),
            pass: report.pass,
        }
    }
}
