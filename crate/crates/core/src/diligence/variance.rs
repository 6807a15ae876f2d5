use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::display;
use crate::empirics::{inverse_normal_cdf, BenchmarkDistribution};
use crate::forecast::{claimed_shortfall_probability, ForecastUnderReview};
use crate::refclass::Direction;
use crate::Result;

/// Claimed versus benchmark spread of outcomes.
///
/// For cost-like metrics "shortfall" reads as overrun throughout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceComparison {
    pub s: f64,
    pub claimed_sd: f64,
    pub benchmark_sd: f64,
    /// Adverse deviation at the 95% confidence level.
    pub claimed_q05_shortfall: f64,
    pub benchmark_q05_shortfall: f64,
    pub claimed_p_shortfall_s: f64,
    pub benchmark_p_shortfall_s: f64,
    /// `benchmark_p / claimed_p`; absent when the claim gives probability zero.
    pub risk_ratio: Option<f64>,
    pub warnings: Vec<String>,
    pub display: BTreeMap<&'static str, String>,
}

pub fn risk_ratio(benchmark_p: f64, claimed_p: f64) -> Option<f64> {
    (claimed_p > 0.0).then(|| benchmark_p / claimed_p)
}

pub fn compare_variance(
    fc: &ForecastUnderReview,
    dist: &BenchmarkDistribution,
    s: f64,
) -> Result<VarianceComparison> {
    let claimed_sd = fc.downside.sd()?;
    let z95 = inverse_normal_cdf(0.95)?;
    let claimed_q05 = claimed_sd * z95;
    let benchmark_q05 = match dist.direction {
        Direction::BenefitLike => 1.0 - dist.quantile(0.05)?,
        Direction::CostLike => dist.quantile(0.95)? - 1.0,
    };
    let claimed_p = claimed_shortfall_probability(&fc.downside, s)?;
    let bench = dist.adverse_probability(s)?;
    let mut warnings = Vec::new();
    if bench.span_clamped {
        warnings.push(alloc::format!(
            "benchmark probability for s = {s} clamped to the stored quantile table span"
        ));
    }
    let ratio = risk_ratio(bench.value, claimed_p);

    let mut d = BTreeMap::new();
    d.insert("claimed_sd", display::percent_1dp(claimed_sd));
    d.insert("benchmark_sd", display::fraction_pct(dist.sd));
    d.insert("claimed_q05_shortfall", display::fraction_pct(claimed_q05));
    d.insert(
        "benchmark_q05_shortfall",
        display::fraction_pct(benchmark_q05),
    );
    d.insert("claimed_p_shortfall_s", display::fraction_pct(claimed_p));
    d.insert(
        "benchmark_p_shortfall_s",
        display::fraction_pct(bench.value),
    );
    d.insert("s", display::fraction_pct(s));
    d.insert(
        "risk_ratio",
        ratio.map_or_else(|| String::from("n/a"), |r| alloc::format!("{r:.0}")),
    );

    Ok(VarianceComparison {
        s,
        claimed_sd,
        benchmark_sd: dist.sd,
        claimed_q05_shortfall: claimed_q05,
        benchmark_q05_shortfall: benchmark_q05,
        claimed_p_shortfall_s: claimed_p,
        benchmark_p_shortfall_s: bench.value,
        risk_ratio: ratio,
        warnings,
        display: d,
    })
}
