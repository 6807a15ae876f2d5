//! The eight-step due-diligence procedure.
//!
//! Steps 3–7 are independent analyses ([`compare_variance`], [`compare_rampup`],
//! [`track_record`], [`assess_risk_register`], [`expected_outcome`],
//! [`subgroup_analysis`]); [`conclude`] maps their findings onto red flags and
//! a verdict, and [`run_due_diligence`] runs the whole sequence.

mod outcome;
mod rampup;
mod report;
mod risk;
mod subgroup;
mod track;
mod variance;
mod verdict;

use alloc::string::String;

use serde::Serialize;

pub use outcome::{expected_outcome, AdjustedValue, OutcomeMode, OutcomeRow, OutcomeTable};
pub use rampup::{compare_rampup, RampUpComparison, RampUpYear};
pub use report::{
    run_due_diligence, BenchmarkInput, BenchmarkStep, BootstrapSummary, CommentsStep,
    DiligenceOptions, DueDiligenceReport, Identification, Provenance, RisksStep,
};
pub use risk::{
    assess_risk_register, NetDirection, RiskAssessment, RiskDirection, RiskRegisterEntry,
    RiskWeight, WeightCounts,
};
pub use subgroup::{
    subgroup_analysis, Reconciliation, SubgroupAnalysis, SubgroupAttribute, SubgroupFinding,
};
pub use track::{track_record, ProjectTrack, TrackRecordFinding};
pub use variance::{compare_variance, risk_ratio, VarianceComparison};
pub use verdict::{conclude, Conclusion, Findings, RedFlag, RedFlagCode, Verdict};

/// A report section: either its finding, or why it is absent.
///
/// `NotAssessed` means the inputs for the step were not supplied;
/// `NotAssessable` means they were, but the step could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Assessed(T),
    NotAssessed { reason: String },
    NotAssessable { reason: String },
}

impl<T> Section<T> {
    pub fn assessed(&self) -> Option<&T> {
        match self {
            Section::Assessed(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_assessed(&self) -> bool {
        matches!(self, Section::Assessed(_))
    }

    pub fn not_assessed(reason: impl Into<String>) -> Self {
        Section::NotAssessed {
            reason: reason.into(),
        }
    }

    pub fn not_assessable(reason: impl Into<String>) -> Self {
        Section::NotAssessable {
            reason: reason.into(),
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Section::Assessed(_) => "assessed",
            Section::NotAssessed { .. } => "not assessed",
            Section::NotAssessable { .. } => "not assessable",
        }
    }
}

impl<T> From<crate::Result<T>> for Section<T> {
    fn from(r: crate::Result<T>) -> Self {
        match r {
            Ok(t) => Section::Assessed(t),
            Err(e) => Section::not_assessable(alloc::format!("{e}")),
        }
    }
}
