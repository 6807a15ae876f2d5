//! JSON files: class bundles, benchmark summaries, forecasts and risk
//! registers.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use outsideview_core::diligence::RiskRegisterEntry;
use outsideview_core::empirics::from_summary;
use outsideview_core::{BenchmarkDistribution, Direction, ForecastUnderReview, ReferenceClass};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// On-disk benchmark summary. Quantile keys are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryFile {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    #[serde(default)]
    pub direction: Direction,
    pub quantiles: BTreeMap<String, f64>,
}

/// `0.05` → `"0.05"`, `0.5` → `"0.50"`, `1` → `"1.00"`.
pub fn probability_key(p: f64) -> String {
    let s = format!("{p}");
    match s.split_once('.') {
        None => format!("{s}.00"),
        Some((_, frac)) if frac.len() < 2 => format!("{s}{}", "0".repeat(2 - frac.len())),
        Some(_) => s,
    }
}

impl SummaryFile {
    pub fn from_distribution(d: &BenchmarkDistribution) -> Self {
        SummaryFile {
            label: d.label.clone(),
            n: d.n,
            mean: d.mean,
            sd: d.sd,
            direction: d.direction,
            quantiles: d
                .quantiles
                .iter()
                .map(|q| (probability_key(q.p), q.q))
                .collect(),
        }
    }

    pub fn to_distribution(&self) -> Result<BenchmarkDistribution> {
        let table = self
            .quantiles
            .iter()
            .map(|(k, &v)| {
                k.trim()
                    .parse::<f64>()
                    .map(|p| (p, v))
                    .map_err(|_| Error::Usage(format!("quantile key `{k}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(from_summary(
            &self.label,
            self.n,
            self.mean,
            self.sd,
            &table,
            self.direction,
        )?)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn read_summary(path: &Path) -> Result<BenchmarkDistribution> {
    read_json::<SummaryFile>(path)?.to_distribution()
}

pub fn read_class(path: &Path) -> Result<ReferenceClass> {
    read_json(path)
}

pub fn read_forecast(path: &Path) -> Result<ForecastUnderReview> {
    read_json(path)
}

pub fn read_risk_register(path: &Path) -> Result<Vec<RiskRegisterEntry>> {
    read_json(path)
}
