use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use super::{
    NetDirection, RampUpComparison, RiskAssessment, SubgroupFinding, TrackRecordFinding,
    VarianceComparison,
};
use crate::display;
use crate::empirics::{bias_percent, BenchmarkDistribution};
use crate::{Error, Result};

/// Benchmark bias (percent) above which RF1 is raised.
pub const BENCHMARK_BIAS_THRESHOLD_PCT: f64 = 25.0;
/// Year-1 ramp-up overestimate (percent) above which RF3 is raised.
pub const RAMPUP_YEAR1_THRESHOLD_PCT: f64 = 20.0;
pub const RISE_RATIO_THRESHOLD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RedFlagCode {
    RF1,
    RF2,
    RF3,
    RF4,
    RF5,
    RF6,
    RF7,
}

impl RedFlagCode {
    pub const ALL: [RedFlagCode; 7] = [
        RedFlagCode::RF1,
        RedFlagCode::RF2,
        RedFlagCode::RF3,
        RedFlagCode::RF4,
        RedFlagCode::RF5,
        RedFlagCode::RF6,
        RedFlagCode::RF7,
    ];

    pub fn title(self) -> &'static str {
        match self {
            RedFlagCode::RF1 => "benchmark shows systematic bias",
            RedFlagCode::RF2 => "claimed spread far narrower than benchmark",
            RedFlagCode::RF3 => "ramp-up more optimistic than benchmark",
            RedFlagCode::RF4 => "forecaster track record absent or poor",
            RedFlagCode::RF5 => "relevant subgroup worse than overall",
            RedFlagCode::RF6 => "case-specific risks point upward",
            RedFlagCode::RF7 => "forecaster claims contradicted by data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedFlag {
    pub code: RedFlagCode,
    pub triggered: bool,
    /// False when the inputs for this flag were not available.
    pub assessed: bool,
    pub detail: String,
}

impl RedFlag {
    fn new(code: RedFlagCode, triggered: bool, detail: String) -> Self {
        RedFlag {
            code,
            triggered,
            assessed: true,
            detail,
        }
    }

    fn not_assessed(code: RedFlagCode, why: &str) -> Self {
        RedFlag {
            code,
            triggered: false,
            assessed: false,
            detail: String::from(why),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NoMaterialBiasDetected,
    OverestimateLikely,
    OverestimateHighlyLikely,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoMaterialBiasDetected => "NO_MATERIAL_BIAS_DETECTED",
            Verdict::OverestimateLikely => "OVERESTIMATE_LIKELY",
            Verdict::OverestimateHighlyLikely => "OVERESTIMATE_HIGHLY_LIKELY",
        }
    }

    /// Highly likely on four or more flags, or on RF2 together with RF4;
    /// likely on two or three; otherwise no material bias.
    pub fn from_triggered(codes: &[RedFlagCode]) -> Verdict {
        let has = |c| codes.contains(&c);
        let n = RedFlagCode::ALL.iter().filter(|&&c| has(c)).count();
        if n >= 4 || (has(RedFlagCode::RF2) && has(RedFlagCode::RF4)) {
            Verdict::OverestimateHighlyLikely
        } else if n >= 2 {
            Verdict::OverestimateLikely
        } else {
            Verdict::NoMaterialBiasDetected
        }
    }
}

/// Everything [`conclude`] looks at. Only `benchmark` is required.
#[derive(Debug, Clone, Copy, Default)]
pub struct Findings<'a> {
    pub benchmark: Option<&'a BenchmarkDistribution>,
    pub variance: Option<&'a VarianceComparison>,
    pub rampup: Option<&'a RampUpComparison>,
    pub track_record: Option<&'a TrackRecordFinding>,
    /// The subgroup the forecast itself belongs to.
    pub relevant_subgroup: Option<&'a SubgroupFinding>,
    pub risks: Option<&'a RiskAssessment>,
    /// Operator assertion from reviewing the forecaster's comments.
    pub claims_contradicted: Option<bool>,
    /// Operator assertion that case evidence shows the forecast escapes the
    /// benchmark's bias.
    pub counter_evidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conclusion {
    pub verdict: Verdict,
    pub flags: Vec<RedFlag>,
    pub triggered_count: usize,
    pub assessed_count: usize,
    pub summary: String,
}

fn rf1(b: &BenchmarkDistribution, counter: bool) -> RedFlag {
    match bias_percent(b.direction, b.mean) {
        Ok(bias) => {
            let over = bias > BENCHMARK_BIAS_THRESHOLD_PCT;
            let detail = format!(
                "average bias in the benchmark {} (threshold {}){}",
                display::percent(bias),
                display::percent(BENCHMARK_BIAS_THRESHOLD_PCT),
                if over && counter {
                    "; offset by counter-evidence"
                } else {
                    ""
                }
            );
            RedFlag::new(RedFlagCode::RF1, over && !counter, detail)
        }
        Err(e) => RedFlag::not_assessed(RedFlagCode::RF1, &format!("{e}")),
    }
}

fn rf2(v: &VarianceComparison) -> RedFlag {
    RedFlag::new(
        RedFlagCode::RF2,
        v.claimed_sd < v.benchmark_sd / 2.0,
        format!(
            "claimed SD {} vs benchmark SD {}",
            display::percent_1dp(v.claimed_sd),
            display::fraction_pct(v.benchmark_sd)
        ),
    )
}

fn rf3(r: &RampUpComparison) -> RedFlag {
    let year1 = r
        .year1_overestimate_pct
        .is_some_and(|p| p > RAMPUP_YEAR1_THRESHOLD_PCT);
    let rise = r.rise_ratio.is_some_and(|x| x > RISE_RATIO_THRESHOLD);
    let flat = r.benchmark_rise_pp <= 0.0 && r.claimed_rise_pp > 0.0;
    let mut detail = format!(
        "year-1 overestimate {}, rise ratio {}",
        r.year1_overestimate_pct
            .map_or_else(|| String::from("n/a"), display::percent),
        r.rise_ratio
            .map_or_else(|| String::from("undefined"), display::ratio)
    );
    if flat {
        detail.push_str("; claimed profile rises where the benchmark does not");
    }
    RedFlag::new(RedFlagCode::RF3, year1 || rise || flat, detail)
}

fn rf4(t: &TrackRecordFinding) -> RedFlag {
    if t.n_found == 0 {
        return RedFlag::new(RedFlagCode::RF4, true, t.narrative.clone());
    }
    let worse = t.ratio_to_benchmark.is_some_and(|r| r > 1.0);
    RedFlag::new(RedFlagCode::RF4, worse, t.narrative.clone())
}

fn rf5(s: &SubgroupFinding) -> RedFlag {
    RedFlag::new(
        RedFlagCode::RF5,
        s.worse_than_overall,
        format!(
            "subgroup {} (n = {}) mean accuracy {}{}",
            s.key,
            s.n,
            display::ratio(s.mean),
            s.adverse_ratio_vs_overall
                .map(|r| format!(", {} times the overall shortfall", display::ratio(r)))
                .unwrap_or_default()
        ),
    )
}

fn rf6(r: &RiskAssessment) -> RedFlag {
    RedFlag::new(
        RedFlagCode::RF6,
        r.net_direction == NetDirection::IncreasesRisk,
        r.narrative.clone(),
    )
}

/// Maps the findings onto red flags RF1–RF7 and a verdict.
pub fn conclude(f: &Findings<'_>) -> Result<Conclusion> {
    let bench = f.benchmark.ok_or(Error::MissingCoreFindings)?;
    let flags = Vec::from([
        rf1(bench, f.counter_evidence),
        f.variance.map_or_else(
            || RedFlag::not_assessed(RedFlagCode::RF2, "no variance comparison"),
            rf2,
        ),
        f.rampup.map_or_else(
            || RedFlag::not_assessed(RedFlagCode::RF3, "no ramp-up comparison"),
            rf3,
        ),
        f.track_record.map_or_else(
            || RedFlag::not_assessed(RedFlagCode::RF4, "no forecaster identified"),
            rf4,
        ),
        f.relevant_subgroup.map_or_else(
            || RedFlag::not_assessed(RedFlagCode::RF5, "no subgroup matches the forecast"),
            rf5,
        ),
        f.risks.map_or_else(
            || RedFlag::not_assessed(RedFlagCode::RF6, "no risk register"),
            rf6,
        ),
        match f.claims_contradicted {
            Some(c) => RedFlag::new(
                RedFlagCode::RF7,
                c,
                String::from(if c {
                    "operator finds the forecaster's claims contradicted by the data"
                } else {
                    "operator finds no contradiction"
                }),
            ),
            None => RedFlag::not_assessed(RedFlagCode::RF7, "no forecaster comments reviewed"),
        },
    ]);
    let triggered: Vec<RedFlagCode> = flags
        .iter()
        .filter(|r| r.triggered)
        .map(|r| r.code)
        .collect();
    let verdict = Verdict::from_triggered(&triggered);
    let assessed = flags.iter().filter(|r| r.assessed).count();

    let mut summary = format!(
        "{}: {} of {} assessed red flags raised",
        verdict.as_str(),
        triggered.len(),
        assessed
    );
    if !triggered.is_empty() {
        let codes: Vec<String> = triggered.iter().map(|c| format!("{c:?}")).collect();
        summary.push_str(&format!(" ({})", codes.join(", ")));
    }
    if let Ok(b) = bias_percent(bench.direction, bench.mean) {
        summary.push_str(&format!(
            "; benchmark accuracy {} implies a typical bias of {}",
            display::ratio(bench.mean),
            display::percent(b)
        ));
    }

    Ok(Conclusion {
        verdict,
        triggered_count: triggered.len(),
        assessed_count: assessed,
        flags,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirics::from_summary;
    use crate::refclass::Direction;

    #[test]
    fn rubric() {
        use RedFlagCode::*;
        assert_eq!(
            Verdict::from_triggered(&[]),
            Verdict::NoMaterialBiasDetected
        );
        assert_eq!(
            Verdict::from_triggered(&[RF1]),
            Verdict::NoMaterialBiasDetected
        );
        assert_eq!(
            Verdict::from_triggered(&[RF2, RF3]),
            Verdict::OverestimateLikely
        );
        assert_eq!(
            Verdict::from_triggered(&[RF1, RF3, RF5]),
            Verdict::OverestimateLikely
        );
        assert_eq!(
            Verdict::from_triggered(&[RF2, RF4]),
            Verdict::OverestimateHighlyLikely
        );
        assert_eq!(
            Verdict::from_triggered(&[RF1, RF3, RF5, RF6]),
            Verdict::OverestimateHighlyLikely
        );
        assert_eq!(
            Verdict::from_triggered(&RedFlagCode::ALL),
            Verdict::OverestimateHighlyLikely
        );
    }

    #[test]
    fn requires_benchmark() {
        assert_eq!(
            conclude(&Findings::default()),
            Err(Error::MissingCoreFindings)
        );
    }

    #[test]
    fn unbiased_benchmark_alone() {
        let b = from_summary("b", 30, 1.0, 0.1, &[(0.5, 1.0)], Direction::BenefitLike).unwrap();
        let c = conclude(&Findings {
            benchmark: Some(&b),
            ..Findings::default()
        })
        .unwrap();
        assert_eq!(c.verdict, Verdict::NoMaterialBiasDetected);
        assert_eq!((c.triggered_count, c.assessed_count), (0, 1));
        assert_eq!(c.flags.len(), 7);
    }

    #[test]
    fn counter_evidence_clears_rf1() {
        let b = from_summary("b", 30, 0.59, 0.33, &[(0.5, 0.51)], Direction::BenefitLike).unwrap();
        let mut f = Findings {
            benchmark: Some(&b),
            claims_contradicted: Some(true),
            ..Findings::default()
        };
        assert_eq!(conclude(&f).unwrap().verdict, Verdict::OverestimateLikely);
        f.counter_evidence = true;
        let c = conclude(&f).unwrap();
        assert_eq!(c.verdict, Verdict::NoMaterialBiasDetected);
        assert!(c.flags[0].detail.contains("counter-evidence"));
    }
}
