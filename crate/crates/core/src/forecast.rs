//! The forecast under review and the statistical claims implied by it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::empirics::{inverse_normal_cdf, normal_sf};
use crate::refclass::Funding;
use crate::{Error, Result};

/// Tolerance for agreement between a stated SD and the (shortfall, confidence) pair.
pub const CLAIM_CONSISTENCY_TOL: f64 = 1e-3;

/// The forecaster's downside case.
///
/// Either a shortfall at a confidence level ("95% confident demand stays within
/// 15% of forecast"), a direct SD claim, or both. The claim is read through a
/// normal model on the accuracy ratio centred on the forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClaimRepr")]
pub struct DownsideClaim {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortfall_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_sd: Option<f64>,
}

#[derive(Deserialize)]
struct ClaimRepr {
    shortfall_fraction: Option<f64>,
    confidence: Option<f64>,
    claimed_sd: Option<f64>,
}

impl TryFrom<ClaimRepr> for DownsideClaim {
    type Error = Error;

    fn try_from(r: ClaimRepr) -> Result<Self> {
        let c = DownsideClaim {
            shortfall_fraction: r.shortfall_fraction,
            confidence: r.confidence,
            claimed_sd: r.claimed_sd,
        };
        c.validate()?;
        Ok(c)
    }
}

impl DownsideClaim {
    pub fn from_shortfall(shortfall_fraction: f64, confidence: f64) -> Result<Self> {
        let c = DownsideClaim {
            shortfall_fraction: Some(shortfall_fraction),
            confidence: Some(confidence),
            claimed_sd: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_sd(sd: f64) -> Result<Self> {
        let c = DownsideClaim {
            shortfall_fraction: None,
            confidence: None,
            claimed_sd: Some(sd),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_sd(mut self, sd: f64) -> Result<Self> {
        self.claimed_sd = Some(sd);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pair = match (self.shortfall_fraction, self.confidence) {
            (Some(s), Some(c)) => {
                if !(0.0..1.0).contains(&s) {
                    return Err(Error::InvalidClaim(format!(
                        "shortfall_fraction {s} outside [0, 1)"
                    )));
                }
                if !(c > 0.0 && c < 1.0) {
                    return Err(Error::InvalidClaim(format!(
                        "confidence {c} outside (0, 1)"
                    )));
                }
                Some((s, c))
            }
            (None, None) => None,
            _ => {
                return Err(Error::InvalidClaim(String::from(
                    "shortfall_fraction and confidence must be given together",
                )))
            }
        };
        if let Some(sd) = self.claimed_sd {
            if !(sd >= 0.0 && sd.is_finite()) {
                return Err(Error::InvalidClaim(format!(
                    "claimed_sd {sd} must be non-negative"
                )));
            }
        }
        match (pair, self.claimed_sd) {
            (None, None) => Err(Error::InvalidClaim(String::from(
                "need a shortfall/confidence pair or a claimed_sd",
            ))),
            (Some((s, c)), Some(sd)) => {
                let z = inverse_normal_cdf(c)?;
                if (sd * z - s).abs() > CLAIM_CONSISTENCY_TOL {
                    return Err(Error::InvalidClaim(format!(
                        "claimed_sd {sd} inconsistent with {s} shortfall at {c} confidence (sd·z = {:.4})",
                        sd * z
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The SD to use: stated directly, or implied by the shortfall pair.
    pub fn sd(&self) -> Result<f64> {
        match self.claimed_sd {
            Some(sd) => Ok(sd),
            None => implied_sd(self),
        }
    }
}

/// SD implied by a shortfall at a confidence level under a normal model:
/// shortfall / Φ⁻¹(confidence).
pub fn implied_sd(claim: &DownsideClaim) -> Result<f64> {
    let (Some(s), Some(c)) = (claim.shortfall_fraction, claim.confidence) else {
        return Err(Error::InvalidClaim(String::from(
            "implied SD needs shortfall_fraction and confidence",
        )));
    };
    if c <= 0.5 {
        return Err(Error::DegenerateConfidence(c));
    }
    Ok(s / inverse_normal_cdf(c)?)
}

/// Probability the claim assigns to a shortfall of `s` or more: 1 − Φ(s / sd).
pub fn claimed_shortfall_probability(claim: &DownsideClaim, s: f64) -> Result<f64> {
    let sd = claim.sd()?;
    if s == 0.0 {
        return Ok(0.5);
    }
    if sd == 0.0 {
        return Ok(if s > 0.0 { 0.0 } else { 1.0 });
    }
    Ok(normal_sf(s / sd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampUpMetrics {
    pub year1_level: f64,
    pub total_rise_pp: f64,
    pub final_level: f64,
}

/// First level, last level and the rise between them in percentage points.
pub fn rampup_metrics(profile: &[f64]) -> Option<RampUpMetrics> {
    let (&first, &last) = (profile.first()?, profile.last()?);
    Some(RampUpMetrics {
        year1_level: first,
        total_rise_pp: last - first,
        final_level: last,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForecastRepr")]
pub struct ForecastUnderReview {
    pub name: String,
    pub unit: String,
    pub first_year_forecast: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub later_year_forecast: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub later_year_index: Option<u32>,
    pub downside: DownsideClaim,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rampup_pct_of_forecast: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forecaster_id: Option<String>,
    pub funding: Funding,
}

#[derive(Deserialize)]
struct ForecastRepr {
    name: String,
    #[serde(default)]
    unit: String,
    first_year_forecast: f64,
    later_year_forecast: Option<f64>,
    later_year_index: Option<u32>,
    downside: DownsideClaim,
    rampup_pct_of_forecast: Option<Vec<f64>>,
    forecaster_id: Option<String>,
    #[serde(default)]
    funding: Funding,
}

impl TryFrom<ForecastRepr> for ForecastUnderReview {
    type Error = Error;

    fn try_from(r: ForecastRepr) -> Result<Self> {
        let f = ForecastUnderReview {
            name: r.name,
            unit: r.unit,
            first_year_forecast: r.first_year_forecast,
            later_year_forecast: r.later_year_forecast,
            later_year_index: r.later_year_index,
            downside: r.downside,
            rampup_pct_of_forecast: r.rampup_pct_of_forecast,
            forecaster_id: r.forecaster_id,
            funding: r.funding,
        };
        f.validate()?;
        Ok(f)
    }
}

impl ForecastUnderReview {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        first_year_forecast: f64,
        downside: DownsideClaim,
    ) -> Result<Self> {
        let f = ForecastUnderReview {
            name: name.into(),
            unit: unit.into(),
            first_year_forecast,
            later_year_forecast: None,
            later_year_index: None,
            downside,
            rampup_pct_of_forecast: None,
            forecaster_id: None,
            funding: Funding::Unknown,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.first_year_forecast > 0.0 && self.first_year_forecast.is_finite()) {
            return Err(Error::InvalidForecast(format!(
                "first_year_forecast must be positive, got {}",
                self.first_year_forecast
            )));
        }
        if let Some(v) = self.later_year_forecast {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidForecast(format!(
                    "later_year_forecast must be positive, got {v}"
                )));
            }
        }
        if let Some(i) = self.later_year_index {
            if i < 2 {
                return Err(Error::InvalidForecast(format!(
                    "later_year_index must be >= 2, got {i}"
                )));
            }
        }
        if let Some(p) = &self.rampup_pct_of_forecast {
            if p.is_empty() {
                return Err(Error::InvalidForecast(String::from(
                    "ramp-up profile is empty",
                )));
            }
            if let Some(bad) = p.iter().find(|v| !(0.0..=200.0).contains(*v)) {
                return Err(Error::InvalidPercent {
                    value: *bad,
                    reason: "ramp-up levels must lie in [0, 200]",
                });
            }
        }
        self.downside.validate()
    }

    pub fn with_rampup(mut self, profile: Vec<f64>) -> Result<Self> {
        self.rampup_pct_of_forecast = Some(profile);
        self.validate()?;
        Ok(self)
    }

    pub fn with_forecaster(mut self, id: impl Into<String>) -> Self {
        self.forecaster_id = Some(id.into());
        self
    }

    pub fn with_funding(mut self, funding: Funding) -> Self {
        self.funding = funding;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn implied_sd_values() {
        let a = implied_sd(&DownsideClaim::from_shortfall(0.15, 0.95).unwrap()).unwrap();
        assert!((a - 0.0912).abs() < 5e-5, "{a}");
        assert_eq!(
            implied_sd(&DownsideClaim::from_shortfall(0.0, 0.95).unwrap()).unwrap(),
            0.0
        );
        let b = implied_sd(&DownsideClaim::from_shortfall(0.20, 0.95).unwrap()).unwrap();
        assert!((b - 0.121_591_366_382_353_84).abs() < 1e-9);
        assert_eq!(
            implied_sd(&DownsideClaim::from_shortfall(0.15, 0.5).unwrap()),
            Err(Error::DegenerateConfidence(0.5))
        );
    }

    #[test]
    fn shortfall_probabilities() {
        let claim = DownsideClaim::from_shortfall(0.15, 0.95).unwrap();
        assert!((claimed_shortfall_probability(&claim, 0.15).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(claimed_shortfall_probability(&claim, 0.0).unwrap(), 0.5);
        let sd = DownsideClaim::from_sd(0.0912).unwrap();
        // 1 − Φ(0.30 / 0.0912)
        let p = claimed_shortfall_probability(&sd, 0.30).unwrap();
        assert!((p - 0.000_501_874_711_253_805_3).abs() < 1e-8, "{p}");
        let zero = DownsideClaim::from_sd(0.0).unwrap();
        assert_eq!(claimed_shortfall_probability(&zero, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn claim_consistency() {
        let c = DownsideClaim::from_shortfall(0.15, 0.95).unwrap();
        assert!(c.with_sd(0.091).is_ok());
        assert!(matches!(c.with_sd(0.2), Err(Error::InvalidClaim(_))));
        let lone = DownsideClaim {
            shortfall_fraction: Some(0.15),
            confidence: None,
            claimed_sd: None,
        };
        assert!(lone.validate().is_err());
        let empty = DownsideClaim {
            shortfall_fraction: None,
            confidence: None,
            claimed_sd: None,
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn rampup_profiles() {
        let planned = rampup_metrics(&[60.0, 75.0, 85.0, 95.0, 100.0]).unwrap();
        assert_eq!(
            (
                planned.year1_level,
                planned.total_rise_pp,
                planned.final_level
            ),
            (60.0, 40.0, 100.0)
        );
        let flat = rampup_metrics(&[100.0]).unwrap();
        assert_eq!(
            (flat.year1_level, flat.total_rise_pp, flat.final_level),
            (100.0, 0.0, 100.0)
        );
        let actual = rampup_metrics(&[41.0, 49.0, 68.0, 51.0, 55.0]).unwrap();
        assert_eq!(
            (actual.year1_level, actual.total_rise_pp, actual.final_level),
            (41.0, 14.0, 55.0)
        );
        assert!(rampup_metrics(&[]).is_none());
    }

    #[test]
    fn forecast_validation() {
        let claim = DownsideClaim::from_shortfall(0.15, 0.95).unwrap();
        assert!(ForecastUnderReview::new("x", "u", 0.0, claim).is_err());
        let f = ForecastUnderReview::new("x", "u", 14.1, claim).unwrap();
        assert!(f.clone().with_rampup(vec![]).is_err());
        assert!(f.clone().with_rampup(vec![60.0, 250.0]).is_err());
        assert!(f.with_rampup(vec![60.0, 120.0, 90.0]).is_ok());
    }
}
