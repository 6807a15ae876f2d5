use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::display;
use crate::forecast::ForecastUnderReview;
use crate::refclass::ReferenceClass;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampUpYear {
    pub year: u32,
    pub claimed_pct: f64,
    pub benchmark_pct: f64,
    pub benchmark_projects: usize,
    /// 100·(claimed / benchmark − 1); absent when the benchmark level is zero.
    pub overestimate_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampUpComparison {
    pub per_year: Vec<RampUpYear>,
    /// Overestimate in the first overlapping year (year 1 when available).
    pub year1_overestimate_pct: Option<f64>,
    pub claimed_rise_pp: f64,
    pub benchmark_rise_pp: f64,
    /// claimed rise / benchmark rise over the overlapping span.
    pub rise_ratio: Option<f64>,
    pub zero_benchmark_rise: bool,
    pub benchmark_n: usize,
    pub warnings: Vec<String>,
    pub display: BTreeMap<&'static str, String>,
}

/// Compares the forecast's ramp-up profile with the per-year mean of the
/// reference class's observed ramp-up.
pub fn compare_rampup(
    fc: &ForecastUnderReview,
    class: &ReferenceClass,
) -> Result<RampUpComparison> {
    let profile = fc
        .rampup_pct_of_forecast
        .as_deref()
        .ok_or(Error::NoRampUpData)?;
    let means = class.rampup_year_means();
    let per_year: Vec<RampUpYear> = profile
        .iter()
        .enumerate()
        .filter_map(|(i, &claimed)| {
            let year = i as u32 + 1;
            means.get(&year).map(|&(bench, k)| RampUpYear {
                year,
                claimed_pct: claimed,
                benchmark_pct: bench,
                benchmark_projects: k,
                overestimate_pct: (bench > 0.0).then(|| 100.0 * (claimed / bench - 1.0)),
            })
        })
        .collect();
    let (Some(first), Some(last)) = (per_year.first(), per_year.last()) else {
        return Err(Error::NoRampUpData);
    };
    let claimed_rise = last.claimed_pct - first.claimed_pct;
    let bench_rise = last.benchmark_pct - first.benchmark_pct;
    let zero_rise = bench_rise.abs() < 1e-12;
    let rise_ratio = (!zero_rise).then(|| claimed_rise / bench_rise);

    let mut warnings = Vec::new();
    if first.year != 1 {
        warnings.push(alloc::format!(
            "benchmark has no year-1 data; comparison starts at year {}",
            first.year
        ));
    }
    if zero_rise {
        warnings.push(String::from(
            "benchmark shows no rise over the overlapping years; rise ratio undefined",
        ));
    }
    if per_year.len() < profile.len() {
        warnings.push(alloc::format!(
            "benchmark covers {} of {} claimed years",
            per_year.len(),
            profile.len()
        ));
    }

    let year1 = first.overestimate_pct;
    let mut d = BTreeMap::new();
    d.insert(
        "year1_overestimate_pct",
        year1.map_or_else(|| String::from("n/a"), display::percent),
    );
    d.insert("claimed_rise_pp", display::value(claimed_rise));
    d.insert("benchmark_rise_pp", display::value(bench_rise));
    d.insert(
        "rise_ratio",
        rise_ratio.map_or_else(|| String::from("n/a"), display::ratio),
    );

    Ok(RampUpComparison {
        year1_overestimate_pct: year1,
        claimed_rise_pp: claimed_rise,
        benchmark_rise_pp: bench_rise,
        rise_ratio,
        zero_benchmark_rise: zero_rise,
        benchmark_n: class.rampup_project_count(),
        per_year,
        warnings,
        display: d,
    })
}
