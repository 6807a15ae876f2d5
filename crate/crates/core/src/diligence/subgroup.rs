use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::display;
use crate::empirics::{bias_percent, mean_sd, weighted_mean, BenchmarkDistribution};
use crate::refclass::{Direction, Funding, ProjectRecord, ReferenceClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupAttribute {
    Funding,
    Category,
}

impl SubgroupAttribute {
    pub fn as_str(self) -> &'static str {
        match self {
            SubgroupAttribute::Funding => "funding",
            SubgroupAttribute::Category => "category",
        }
    }
}

/// Inaccuracy of one subgroup, measured two ways.
///
/// `mean_bias_pct` averages the per-project overestimates;
/// `bias_of_mean_pct` converts the subgroup's mean accuracy. They differ
/// whenever accuracies vary, and both are reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupFinding {
    pub key: String,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub mean_bias_pct: Option<f64>,
    pub bias_of_mean_pct: Option<f64>,
    /// 1 − mean for benefit-like metrics, mean − 1 for cost-like.
    pub adverse_of_mean: f64,
    /// This group's adverse_of_mean over that of all other groups pooled.
    pub adverse_ratio_vs_rest: Option<f64>,
    pub bias_ratio_vs_rest: Option<f64>,
    pub adverse_ratio_vs_overall: Option<f64>,
    pub worse_than_overall: bool,
    pub display: BTreeMap<&'static str, String>,
}

/// Subgroup means weighted by size, against the pooled and benchmark means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconciliation {
    pub weighted_mean: f64,
    pub pooled_mean: f64,
    pub overall_mean: f64,
    pub display: BTreeMap<&'static str, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupAnalysis {
    pub attribute: SubgroupAttribute,
    pub findings: Vec<SubgroupFinding>,
    pub reconciliation: Reconciliation,
    /// Records left out because the attribute is unknown.
    pub excluded_unknown: usize,
    pub warnings: Vec<String>,
}

impl SubgroupAnalysis {
    pub fn finding(&self, key: &str) -> Option<&SubgroupFinding> {
        self.findings.iter().find(|f| f.key == key)
    }
}

fn adverse(direction: Direction, mean: f64) -> f64 {
    match direction {
        Direction::BenefitLike => 1.0 - mean,
        Direction::CostLike => mean - 1.0,
    }
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

/// Splits the class by `attribute` and compares each group with the rest
/// and with `overall`. Records flagged as outliers are left out.
pub fn subgroup_analysis(
    class: &ReferenceClass,
    attribute: SubgroupAttribute,
    overall: &BenchmarkDistribution,
) -> Result<SubgroupAnalysis> {
    let direction = class.direction();
    let mut groups: BTreeMap<String, Vec<&ProjectRecord>> = BTreeMap::new();
    let mut excluded_unknown = 0;
    for r in class.records().iter().filter(|r| !r.outlier_flag) {
        let key = match attribute {
            SubgroupAttribute::Funding if r.funding == Funding::Unknown => {
                excluded_unknown += 1;
                continue;
            }
            SubgroupAttribute::Funding => String::from(r.funding.as_str()),
            SubgroupAttribute::Category => r.category.clone(),
        };
        groups.entry(key).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }

    let all: Vec<f64> = groups.values().flatten().map(|r| r.accuracy()).collect();
    let total_sum: f64 = all.iter().sum();
    let total_n = all.len();
    let overall_adverse = adverse(direction, overall.mean);
    let mut warnings = Vec::new();

    let findings: Vec<SubgroupFinding> = groups
        .iter()
        .map(|(key, recs)| {
            let acc: Vec<f64> = recs.iter().map(|r| r.accuracy()).collect();
            let n = acc.len();
            let (mean, sd) = mean_sd(&acc);
            let biases: Option<Vec<f64>> = acc
                .iter()
                .map(|&a| bias_percent(direction, a).ok())
                .collect();
            let mean_bias = biases.map(|b| b.iter().sum::<f64>() / n as f64);
            let bias_of_mean = bias_percent(direction, mean).ok();
            let adv = adverse(direction, mean);

            let rest_n = total_n - n;
            let rest_mean =
                (rest_n > 0).then(|| (total_sum - acc.iter().sum::<f64>()) / rest_n as f64);
            let adverse_ratio_vs_rest = rest_mean.and_then(|m| ratio(adv, adverse(direction, m)));
            let bias_ratio_vs_rest = match (
                bias_of_mean,
                rest_mean.and_then(|m| bias_percent(direction, m).ok()),
            ) {
                (Some(a), Some(b)) => ratio(a, b),
                _ => None,
            };
            if n < 2 {
                warnings.push(format!(
                    "{} = {key}: single record, no spread",
                    attribute.as_str()
                ));
            }

            let mut d = BTreeMap::new();
            d.insert("mean", display::ratio(mean));
            d.insert("adverse_of_mean", display::fraction_pct(adv));
            if let Some(b) = mean_bias {
                d.insert("mean_bias_pct", display::percent(b));
            }
            if let Some(b) = bias_of_mean {
                d.insert("bias_of_mean_pct", display::percent(b));
            }
            if let Some(r) = adverse_ratio_vs_rest {
                d.insert("adverse_ratio_vs_rest", display::ratio(r));
            }
            if let Some(r) = bias_ratio_vs_rest {
                d.insert("bias_ratio_vs_rest", display::ratio(r));
            }

            SubgroupFinding {
                key: key.clone(),
                n,
                mean,
                sd: (n >= 2).then_some(sd),
                mean_bias_pct: mean_bias,
                bias_of_mean_pct: bias_of_mean,
                adverse_of_mean: adv,
                adverse_ratio_vs_rest,
                bias_ratio_vs_rest,
                adverse_ratio_vs_overall: ratio(adv, overall_adverse),
                worse_than_overall: adv > overall_adverse,
                display: d,
            }
        })
        .collect();

    let sizes: Vec<(usize, f64)> = findings.iter().map(|f| (f.n, f.mean)).collect();
    let wm = weighted_mean(&sizes);
    let mut d = BTreeMap::new();
    d.insert("weighted_mean", display::ratio(wm));
    d.insert("overall_mean", display::ratio(overall.mean));
    let reconciliation = Reconciliation {
        weighted_mean: wm,
        pooled_mean: total_sum / total_n as f64,
        overall_mean: overall.mean,
        display: d,
    };

    Ok(SubgroupAnalysis {
        attribute,
        findings,
        reconciliation,
        excluded_unknown,
        warnings,
    })
}
