use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::display;
use crate::empirics::{bias_percent, BenchmarkDistribution};
use crate::refclass::{Direction, ReferenceClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectTrack {
    pub project_id: String,
    pub first_year_overestimate_pct: Option<f64>,
    pub later_year_index: Option<u32>,
    pub later_year_overestimate_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackRecordFinding {
    pub forecaster_id: String,
    pub n_found: usize,
    pub projects: Vec<ProjectTrack>,
    pub mean_first_year_overestimate_pct: Option<f64>,
    pub mean_later_year_overestimate_pct: Option<f64>,
    /// Range of later-year indices averaged, e.g. (4, 5).
    pub later_year_range: Option<(u32, u32)>,
    pub benchmark_overestimate_pct: Option<f64>,
    pub ratio_to_benchmark: Option<f64>,
    pub narrative: String,
    pub display: BTreeMap<&'static str, String>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Past accuracy of `forecaster_id` within the reference class.
///
/// First-year figures come from the records; later-year figures from each
/// project's latest ramp-up observation after year 1.
pub fn track_record(
    class: &ReferenceClass,
    forecaster_id: &str,
    dist: &BenchmarkDistribution,
) -> TrackRecordFinding {
    let direction = class.direction();
    let later_bias = |pct: f64| match direction {
        Direction::BenefitLike => (pct > 0.0).then(|| 100.0 * (100.0 / pct - 1.0)),
        Direction::CostLike => Some(pct - 100.0),
    };
    let projects: Vec<ProjectTrack> = class
        .records()
        .iter()
        .filter(|r| r.forecaster_id.as_deref() == Some(forecaster_id))
        .map(|r| {
            let later = class
                .rampups_for(&r.project_id)
                .into_iter()
                .rfind(|o| o.year_index >= 2);
            ProjectTrack {
                project_id: r.project_id.clone(),
                first_year_overestimate_pct: bias_percent(direction, r.accuracy()).ok(),
                later_year_index: later.map(|o| o.year_index),
                later_year_overestimate_pct: later
                    .and_then(|o| later_bias(o.actual_pct_of_forecast)),
            }
        })
        .collect();

    let first: Vec<f64> = projects
        .iter()
        .filter_map(|p| p.first_year_overestimate_pct)
        .collect();
    let later: Vec<f64> = projects
        .iter()
        .filter_map(|p| p.later_year_overestimate_pct)
        .collect();
    let later_years: Vec<u32> = projects
        .iter()
        .filter(|p| p.later_year_overestimate_pct.is_some())
        .filter_map(|p| p.later_year_index)
        .collect();
    let later_range = later_years
        .iter()
        .min()
        .zip(later_years.iter().max())
        .map(|(&a, &b)| (a, b));
    let mean_first = mean(&first);
    let mean_later = mean(&later);
    let bench = bias_percent(direction, dist.mean).ok();
    let ratio = match (mean_first, bench) {
        (Some(m), Some(b)) if b > 0.0 => Some(m / b),
        _ => None,
    };

    let n = projects.len();
    let narrative = if n == 0 {
        format!("no documented track record for forecaster {forecaster_id} in the reference class")
    } else {
        let mut s = format!(
            "{n} earlier forecast(s) by {forecaster_id} found; mean first-year overestimate {}",
            mean_first.map_or_else(|| String::from("n/a"), display::percent)
        );
        if let Some(r) = ratio {
            s.push_str(&format!(
                ", {} times the benchmark ({})",
                display::value(r),
                display::percent(bench.unwrap_or(f64::NAN))
            ));
        }
        if let (Some(m), Some((a, b))) = (mean_later, later_range) {
            let years = if a == b {
                format!("year {a}")
            } else {
                format!("years {a}-{b}")
            };
            s.push_str(&format!(
                "; later-year overestimate {} ({years})",
                display::percent(m)
            ));
        }
        s
    };
    let mut d = BTreeMap::new();
    if let Some(m) = mean_first {
        d.insert("mean_first_year_overestimate_pct", display::percent(m));
    }
    if let Some(m) = mean_later {
        d.insert("mean_later_year_overestimate_pct", display::percent(m));
    }
    if let Some(r) = ratio {
        d.insert("ratio_to_benchmark", display::value(r));
    }

    TrackRecordFinding {
        forecaster_id: String::from(forecaster_id),
        n_found: n,
        projects,
        mean_first_year_overestimate_pct: mean_first,
        mean_later_year_overestimate_pct: mean_later,
        later_year_range: later_range,
        benchmark_overestimate_pct: bench,
        ratio_to_benchmark: if n > 0 { ratio } else { None },
        narrative,
        display: d,
    }
}
