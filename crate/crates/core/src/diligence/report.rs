use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use super::{
    assess_risk_register, compare_rampup, compare_variance, conclude, expected_outcome,
    subgroup_analysis, track_record, Conclusion, Findings, OutcomeMode, OutcomeTable,
    RampUpComparison, RiskAssessment, RiskRegisterEntry, Section, SubgroupAnalysis,
    SubgroupAttribute, TrackRecordFinding, VarianceComparison,
};
use crate::display;
use crate::empirics::{
    bias_percent, summarize, BenchmarkDistribution, ConditionalMean, Interval, Source,
    TailProbability,
};
use crate::empirics::{bootstrap_ci, Statistic};
use crate::forecast::ForecastUnderReview;
use crate::refclass::{Funding, OutlierPolicy, ReferenceClass};
use crate::{Error, Result};

/// Shortfall sizes tabulated in step 2.
pub const TABULATED_SHORTFALLS: [f64; 3] = [0.15, 0.25, 0.50];
pub const BOOTSTRAP_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiligenceOptions {
    pub levels: Vec<f64>,
    pub shortfall: f64,
    pub seed: u64,
    pub resamples: usize,
    pub outlier_policy: OutlierPolicy,
    pub outcome_mode: OutcomeMode,
    pub risk_register: Option<Vec<RiskRegisterEntry>>,
    pub forecaster_comments: Option<String>,
    pub claims_contradicted: bool,
    pub counter_evidence: bool,
}

impl Default for DiligenceOptions {
    fn default() -> Self {
        DiligenceOptions {
            levels: Vec::from([0.5, 0.8, 0.9]),
            shortfall: 0.15,
            seed: 42,
            resamples: 2000,
            outlier_policy: OutlierPolicy::Manual,
            outcome_mode: OutcomeMode::BenefitOfDoubt,
            risk_register: None,
            forecaster_comments: None,
            claims_contradicted: false,
            counter_evidence: false,
        }
    }
}

/// The benchmark evidence: raw records, a stored summary, or both. When both
/// are given the summary is the benchmark and the records feed the ramp-up,
/// track-record and subgroup steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkInput {
    pub class: Option<ReferenceClass>,
    pub summary: Option<BenchmarkDistribution>,
}

impl BenchmarkInput {
    pub fn class(class: ReferenceClass) -> Self {
        BenchmarkInput {
            class: Some(class),
            summary: None,
        }
    }

    pub fn summary(dist: BenchmarkDistribution) -> Self {
        BenchmarkInput {
            class: None,
            summary: Some(dist),
        }
    }

    pub fn with_summary(mut self, dist: BenchmarkDistribution) -> Self {
        self.summary = Some(dist);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub class_label: Option<String>,
    pub class_records: Option<usize>,
    pub rampup_projects: Option<usize>,
    pub benchmark_label: String,
    pub source: Source,
    pub outlier_policy: OutlierPolicy,
    pub levels: Vec<f64>,
    pub shortfall: f64,
    pub seed: u64,
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identification {
    pub forecast: ForecastUnderReview,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
    pub mean: Interval,
    pub median: Interval,
    pub sd: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkStep {
    pub distribution: BenchmarkDistribution,
    pub mean_bias_pct: Option<f64>,
    pub outliers_excluded: usize,
    pub adverse_probabilities: Vec<(f64, TailProbability)>,
    pub conditional_mean_adverse: Section<ConditionalMean>,
    pub bootstrap: Section<BootstrapSummary>,
    pub display: BTreeMap<&'static str, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RisksStep {
    pub register: Vec<RiskRegisterEntry>,
    pub assessment: RiskAssessment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommentsStep {
    pub by_funding: Section<SubgroupAnalysis>,
    pub by_category: Section<SubgroupAnalysis>,
    pub forecaster_response: Option<String>,
    pub claims_contradicted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DueDiligenceReport {
    pub step1_identification: Identification,
    pub step2_benchmark: BenchmarkStep,
    pub step3_variance: Section<VarianceComparison>,
    pub step3_rampup: Section<RampUpComparison>,
    pub step4_track_record: Section<TrackRecordFinding>,
    pub step5_risks: Section<RisksStep>,
    pub step6_outcome: Section<OutcomeTable>,
    pub step7_comments: CommentsStep,
    pub step8_conclusion: Conclusion,
}

fn bootstrap(dist: &BenchmarkDistribution, o: &DiligenceOptions) -> Result<BootstrapSummary> {
    let ci = |s| bootstrap_ci(dist, s, BOOTSTRAP_LEVEL, o.resamples, o.seed);
    Ok(BootstrapSummary {
        level: BOOTSTRAP_LEVEL,
        resamples: o.resamples,
        seed: o.seed,
        mean: ci(Statistic::Mean)?,
        median: ci(Statistic::Median)?,
        sd: ci(Statistic::Sd)?,
    })
}

fn benchmark_step(
    dist: BenchmarkDistribution,
    outliers: usize,
    o: &DiligenceOptions,
) -> BenchmarkStep {
    let mean_bias = bias_percent(dist.direction, dist.mean).ok();
    let adverse: Vec<(f64, TailProbability)> = TABULATED_SHORTFALLS
        .iter()
        .filter_map(|&s| dist.adverse_probability(s).ok().map(|p| (s, p)))
        .collect();
    let cond = match dist.source {
        Source::Summary => Section::not_assessable("needs project records"),
        Source::Records => dist.conditional_mean_adverse().into(),
    };
    let boot = match dist.source {
        Source::Summary => Section::not_assessable("bootstrap needs project records"),
        Source::Records => bootstrap(&dist, o).into(),
    };
    let mut d = BTreeMap::new();
    d.insert("mean", display::ratio(dist.mean));
    d.insert("median", display::ratio(dist.median));
    d.insert("sd", display::ratio(dist.sd));
    if let Some(b) = mean_bias {
        d.insert("mean_bias_pct", display::percent(b));
    }
    BenchmarkStep {
        distribution: dist,
        mean_bias_pct: mean_bias,
        outliers_excluded: outliers,
        adverse_probabilities: adverse,
        conditional_mean_adverse: cond,
        bootstrap: boot,
        display: d,
    }
}

/// Runs steps 1 to 8 in order.
///
/// A step whose inputs are missing is marked not assessed; a step that fails
/// is marked not assessable with the error. Only a missing benchmark is fatal.
pub fn run_due_diligence(
    fc: &ForecastUnderReview,
    input: &BenchmarkInput,
    options: &DiligenceOptions,
) -> Result<DueDiligenceReport> {
    fc.validate()?;
    let class = match &input.class {
        Some(c) => Some(c.flag_outliers(options.outlier_policy)?),
        None => None,
    };
    let exclude = options.outlier_policy != OutlierPolicy::None;

    // step 2
    let (dist, outliers) = match (&input.summary, &class) {
        (Some(s), _) => (s.clone(), 0),
        (None, Some(c)) => (
            summarize(c, exclude)?,
            if exclude { c.outlier_count() } else { 0 },
        ),
        (None, None) => return Err(Error::MissingCoreFindings),
    };
    let step2 = benchmark_step(dist, outliers, options);
    let dist = &step2.distribution;

    let step1 = Identification {
        forecast: fc.clone(),
        provenance: Provenance {
            class_label: class.as_ref().map(|c| String::from(c.label())),
            class_records: class.as_ref().map(|c| c.len()),
            rampup_projects: class.as_ref().map(|c| c.rampup_project_count()),
            benchmark_label: dist.label.clone(),
            source: dist.source,
            outlier_policy: options.outlier_policy,
            levels: options.levels.clone(),
            shortfall: options.shortfall,
            seed: options.seed,
            resamples: options.resamples,
        },
    };

    // step 3
    let variance: Section<_> = compare_variance(fc, dist, options.shortfall).into();
    let rampup = match (&fc.rampup_pct_of_forecast, &class) {
        (None, _) => Section::not_assessed("forecast has no ramp-up profile"),
        (Some(_), None) => Section::not_assessed("no reference class with ramp-up observations"),
        (Some(_), Some(c)) => compare_rampup(fc, c).into(),
    };

    // step 4
    let track = match (&fc.forecaster_id, &class) {
        (None, _) => Section::not_assessed("forecaster not identified"),
        (Some(_), None) => Section::not_assessed("no reference class records to search"),
        (Some(id), Some(c)) => Section::Assessed(track_record(c, id, dist)),
    };

    // step 5
    let risks = match &options.risk_register {
        None => Section::not_assessed("no risk register supplied"),
        Some(reg) => Section::Assessed(RisksStep {
            register: reg.clone(),
            assessment: assess_risk_register(reg),
        }),
    };

    // step 6
    let outcome: Section<_> =
        expected_outcome(fc, dist, &options.levels, options.outcome_mode).into();

    // step 7
    let subgroups = |attr| match &class {
        None => Section::not_assessed("no reference class records"),
        Some(c) => subgroup_analysis(c, attr, dist).into(),
    };
    let claims = if options.claims_contradicted {
        Some(true)
    } else {
        options.forecaster_comments.as_ref().map(|_| false)
    };
    let step7 = CommentsStep {
        by_funding: subgroups(SubgroupAttribute::Funding),
        by_category: subgroups(SubgroupAttribute::Category),
        forecaster_response: options.forecaster_comments.clone(),
        claims_contradicted: claims,
    };

    // step 8
    let relevant = match fc.funding {
        Funding::Unknown => None,
        f => step7
            .by_funding
            .assessed()
            .and_then(|s| s.finding(f.as_str())),
    };
    let conclusion = conclude(&Findings {
        benchmark: Some(dist),
        variance: variance.assessed(),
        rampup: rampup.assessed(),
        track_record: track.assessed(),
        relevant_subgroup: relevant,
        risks: risks.assessed().map(|r| &r.assessment),
        claims_contradicted: claims,
        counter_evidence: options.counter_evidence,
    })?;

    Ok(DueDiligenceReport {
        step1_identification: step1,
        step3_variance: variance,
        step3_rampup: rampup,
        step4_track_record: track,
        step5_risks: risks,
        step6_outcome: outcome,
        step7_comments: step7,
        step8_conclusion: conclusion,
        step2_benchmark: step2,
    })
}
