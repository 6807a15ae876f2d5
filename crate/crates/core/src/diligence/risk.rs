use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskDirection {
    IncreasesRisk,
    DecreasesRisk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskWeight {
    Low,
    Medium,
    High,
}

/// One operator-supplied item of case-specific risk evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskRegisterEntry {
    pub id: String,
    pub description: String,
    pub direction: RiskDirection,
    pub weight: RiskWeight,
    #[serde(default)]
    pub evidence: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NetDirection {
    IncreasesRisk,
    DecreasesRisk,
    Neutral,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WeightCounts {
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

impl WeightCounts {
    fn add(&mut self, w: RiskWeight) {
        match w {
            RiskWeight::Low => self.low += 1,
            RiskWeight::Medium => self.medium += 1,
            RiskWeight::High => self.high += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.low + self.medium + self.high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskAssessment {
    pub net_direction: NetDirection,
    /// High-weight entries in either direction.
    pub high_count: usize,
    pub increasing: WeightCounts,
    pub decreasing: WeightCounts,
    pub narrative: String,
}

/// Net direction is decided by high-weight entries only.
pub fn assess_risk_register(entries: &[RiskRegisterEntry]) -> RiskAssessment {
    let mut inc = WeightCounts::default();
    let mut dec = WeightCounts::default();
    for e in entries {
        match e.direction {
            RiskDirection::IncreasesRisk => inc.add(e.weight),
            RiskDirection::DecreasesRisk => dec.add(e.weight),
        }
    }
    let net = match inc.high.cmp(&dec.high) {
        core::cmp::Ordering::Greater => NetDirection::IncreasesRisk,
        core::cmp::Ordering::Less => NetDirection::DecreasesRisk,
        core::cmp::Ordering::Equal => NetDirection::Neutral,
    };
    let narrative = if entries.is_empty() {
        String::from("empty risk register")
    } else {
        let lead = match net {
            NetDirection::IncreasesRisk => "risks beyond the benchmark average are likely higher",
            NetDirection::DecreasesRisk => "risks beyond the benchmark average are likely lower",
            NetDirection::Neutral => "no net direction among high-weight entries",
        };
        format!(
            "{lead}: {} entries raise risk ({} high), {} lower it ({} high)",
            inc.total(),
            inc.high,
            dec.total(),
            dec.high
        )
    };
    RiskAssessment {
        net_direction: net,
        high_count: inc.high + dec.high,
        increasing: inc,
        decreasing: dec,
        narrative,
    }
}
