//! Empirical accuracy distributions.
//!
//! A [`BenchmarkDistribution`] is either computed from the raw accuracies of a
//! reference class or rebuilt from a published summary (mean, SD and a
//! quantile table). Operations that need raw samples reject the latter.

mod bootstrap;
mod normal;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::refclass::{Direction, ReferenceClass};
use crate::{Error, Result};

pub use bootstrap::{bootstrap_ci, Statistic};
pub use normal::{inverse_normal_cdf, normal_cdf, normal_sf};

/// Probability grid stored by [`summarize`].
pub const STANDARD_PROBABILITIES: [f64; 9] = [0.0, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 1.0];

/// Below this many records a summary carries a small-sample warning.
pub const SMALL_SAMPLE: usize = 20;

/// Slack for reading probabilities that were computed in floating point,
/// e.g. `(1.0 - 0.9) / 2.0` for a stored `0.05`.
const P_SNAP: f64 = 1e-9;

/// Slack for inclusive threshold comparisons on accuracies.
const VALUE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Records,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// True when `self` lies within `outer`.
    pub fn nested_in(&self, outer: &Interval) -> bool {
        outer.lower <= self.lower && self.upper <= outer.upper
    }
}

/// Probability read from a distribution's tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub value: f64,
    /// Set when a summary-mode read fell outside the stored table and was
    /// clamped to its span instead of extrapolated.
    pub span_clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMean {
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkDistribution {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub quantiles: Vec<QuantilePoint>,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    pub direction: Direction,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// Mean and sample SD (n − 1 denominator; zero for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

/// Inclusive linear-interpolation quantile of sorted data at position
/// h = (n − 1)·p. Returns NaN for empty input.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let p = p.clamp(0.0, 1.0);
    let mut h = (n - 1) as f64 * p;
    let nearest = libm::round(h);
    if (h - nearest).abs() < P_SNAP {
        h = nearest;
    }
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Summary of the accuracies in `class`, optionally dropping flagged outliers.
pub fn summarize(class: &ReferenceClass, exclude_outliers: bool) -> Result<BenchmarkDistribution> {
    let mut samples = class.accuracies(exclude_outliers);
    if samples.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let (mean, sd) = mean_sd(&samples);
    let grid: &[f64] = if n >= 3 {
        &STANDARD_PROBABILITIES
    } else {
        &[0.0, 0.5, 1.0]
    };
    let quantiles = grid
        .iter()
        .map(|&p| QuantilePoint {
            p,
            q: sample_quantile(&samples, p),
        })
        .collect();
    let mut warnings = Vec::new();
    if n < SMALL_SAMPLE {
        warnings.push(format!("small reference class: n = {n} (< {SMALL_SAMPLE})"));
    }
    Ok(BenchmarkDistribution {
        label: String::from(class.label()),
        n,
        mean,
        median: sample_quantile(&samples, 0.5),
        sd,
        quantiles,
        source: Source::Records,
        samples: Some(samples),
        direction: class.direction(),
        warnings,
    })
}

/// Rebuilds a distribution from published summary figures.
///
/// The table is sorted by probability; quantile values must be non-decreasing.
pub fn from_summary(
    label: impl Into<String>,
    n: usize,
    mean: f64,
    sd: f64,
    table: &[(f64, f64)],
    direction: Direction,
) -> Result<BenchmarkDistribution> {
    if n == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    if table.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    if sd.is_nan() || sd < 0.0 || !mean.is_finite() {
        return Err(Error::OutOfDomain {
            value: sd,
            domain: "finite mean and sd >= 0",
        });
    }
    let mut points: Vec<QuantilePoint> =
        table.iter().map(|&(p, q)| QuantilePoint { p, q }).collect();
    for pt in &points {
        if !(0.0..=1.0).contains(&pt.p) || !pt.q.is_finite() {
            return Err(Error::OutOfDomain {
                value: pt.p,
                domain: "quantile probabilities in [0, 1] with finite values",
            });
        }
    }
    points.sort_by(|a, b| a.p.total_cmp(&b.p));
    for w in points.windows(2) {
        if w[1].q < w[0].q || w[1].p == w[0].p {
            return Err(Error::NonMonotoneQuantiles { p: w[1].p });
        }
    }
    let mut dist = BenchmarkDistribution {
        label: label.into(),
        n,
        mean,
        median: mean,
        sd,
        quantiles: points,
        source: Source::Summary,
        samples: None,
        direction,
        warnings: Vec::new(),
    };
    match dist.quantile(0.5) {
        Ok(m) => dist.median = m,
        Err(_) => dist.warnings.push(String::from(
            "median not in quantile table; mean used in its place",
        )),
    }
    if n < SMALL_SAMPLE {
        dist.warnings
            .push(format!("small reference class: n = {n} (< {SMALL_SAMPLE})"));
    }
    Ok(dist)
}

impl BenchmarkDistribution {
    pub fn samples(&self) -> Result<&[f64]> {
        self.samples
            .as_deref()
            .ok_or(Error::SummaryOnlyDistribution)
    }

    fn table_span(&self) -> (f64, f64) {
        (
            self.quantiles.first().map_or(f64::NAN, |q| q.p),
            self.quantiles.last().map_or(f64::NAN, |q| q.p),
        )
    }

    /// Accuracy at cumulative probability `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfDomain {
                value: p,
                domain: "[0, 1]",
            });
        }
        if let Some(s) = &self.samples {
            return Ok(sample_quantile(s, p));
        }
        let (min, max) = self.table_span();
        if p < min - P_SNAP || p > max + P_SNAP {
            return Err(Error::OutOfTableRange { p, min, max });
        }
        let t = &self.quantiles;
        if let Some(pt) = t.iter().find(|pt| (pt.p - p).abs() <= P_SNAP) {
            return Ok(pt.q);
        }
        let i = t.iter().position(|pt| pt.p > p).unwrap_or(t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        Ok(a.q + (p - a.p) / (b.p - a.p) * (b.q - a.q))
    }

    /// Probability of an accuracy at or below `value`.
    fn cdf_at_or_below(&self, value: f64) -> TailProbability {
        if let Some(s) = &self.samples {
            let k = s.iter().filter(|&&a| a <= value + VALUE_EPS).count();
            return TailProbability {
                value: k as f64 / s.len() as f64,
                span_clamped: false,
            };
        }
        let t = &self.quantiles;
        let (first, last) = (t[0], t[t.len() - 1]);
        if value < first.q {
            return TailProbability {
                value: first.p,
                span_clamped: true,
            };
        }
        if value > last.q {
            return TailProbability {
                value: last.p,
                span_clamped: true,
            };
        }
        // Largest stored p whose quantile equals `value`, else interpolate.
        if let Some(pt) = t.iter().rev().find(|pt| (pt.q - value).abs() <= VALUE_EPS) {
            return TailProbability {
                value: pt.p,
                span_clamped: false,
            };
        }
        let i = t.iter().position(|pt| pt.q > value).unwrap_or(t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        TailProbability {
            value: a.p + (value - a.q) / (b.q - a.q) * (b.p - a.p),
            span_clamped: false,
        }
    }

    /// Probability of an accuracy at or above `value`.
    fn sf_at_or_above(&self, value: f64) -> TailProbability {
        if let Some(s) = &self.samples {
            let k = s.iter().filter(|&&a| a >= value - VALUE_EPS).count();
            return TailProbability {
                value: k as f64 / s.len() as f64,
                span_clamped: false,
            };
        }
        let t = &self.quantiles;
        let (first, last) = (t[0], t[t.len() - 1]);
        if value < first.q {
            return TailProbability {
                value: 1.0 - first.p,
                span_clamped: true,
            };
        }
        if value > last.q {
            return TailProbability {
                value: 1.0 - last.p,
                span_clamped: true,
            };
        }
        // Smallest stored p whose quantile equals `value`, else interpolate.
        if let Some(pt) = t.iter().find(|pt| (pt.q - value).abs() <= VALUE_EPS) {
            return TailProbability {
                value: 1.0 - pt.p,
                span_clamped: false,
            };
        }
        let i = t.iter().position(|pt| pt.q > value).unwrap_or(t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        TailProbability {
            value: 1.0 - (a.p + (value - a.q) / (b.q - a.q) * (b.p - a.p)),
            span_clamped: false,
        }
    }

    /// Probability of a shortfall of `s` or more, i.e. accuracy ≤ 1 − s.
    pub fn shortfall_probability(&self, s: f64) -> Result<TailProbability> {
        if self.direction != Direction::BenefitLike {
            return Err(Error::WrongDirection {
                expected: "benefit_like",
            });
        }
        Ok(self.cdf_at_or_below(1.0 - s))
    }

    /// Probability of an overrun of `s` or more, i.e. accuracy ≥ 1 + s.
    pub fn overrun_probability(&self, s: f64) -> Result<TailProbability> {
        if self.direction != Direction::CostLike {
            return Err(Error::WrongDirection {
                expected: "cost_like",
            });
        }
        Ok(self.sf_at_or_above(1.0 + s))
    }

    /// Probability of a bad outcome of relative size `s` or more, in
    /// whichever direction is bad for this metric.
    pub fn adverse_probability(&self, s: f64) -> Result<TailProbability> {
        match self.direction {
            Direction::BenefitLike => self.shortfall_probability(s),
            Direction::CostLike => self.overrun_probability(s),
        }
    }

    /// Mean accuracy over samples below 1, with their count.
    pub fn conditional_mean_overestimated(&self) -> Result<ConditionalMean> {
        let s = self.samples()?;
        let low: Vec<f64> = s.iter().copied().filter(|&a| a < 1.0).collect();
        if low.is_empty() {
            return Err(Error::NoOverestimatedSamples);
        }
        Ok(ConditionalMean {
            mean: low.iter().sum::<f64>() / low.len() as f64,
            count: low.len(),
        })
    }

    /// Mean accuracy over the samples on the bad side of 1.0 for this
    /// direction: below 1 for benefit-like, above 1 for cost-like.
    pub fn conditional_mean_adverse(&self) -> Result<ConditionalMean> {
        match self.direction {
            Direction::BenefitLike => self.conditional_mean_overestimated(),
            Direction::CostLike => {
                let s = self.samples()?;
                let high: Vec<f64> = s.iter().copied().filter(|&a| a > 1.0).collect();
                if high.is_empty() {
                    return Err(Error::NoOverestimatedSamples);
                }
                Ok(ConditionalMean {
                    mean: high.iter().sum::<f64>() / high.len() as f64,
                    count: high.len(),
                })
            }
        }
    }
}

/// Percent by which the forecast exceeded the actual: 100·(1/a − 1).
pub fn overestimate_from_accuracy(a: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::ZeroAccuracy);
    }
    if a < 0.0 || !a.is_finite() {
        return Err(Error::OutOfDomain {
            value: a,
            domain: "accuracy > 0",
        });
    }
    Ok(100.0 * (1.0 / a - 1.0))
}

/// Inverse of [`overestimate_from_accuracy`].
pub fn accuracy_from_overestimate(pct: f64) -> f64 {
    1.0 / (1.0 + pct / 100.0)
}

/// Size of the optimism embodied by an accuracy, in percent: the overestimate
/// for benefit-like metrics, the overrun 100·(a − 1) for cost-like ones.
pub fn bias_percent(direction: Direction, a: f64) -> Result<f64> {
    match direction {
        Direction::BenefitLike => overestimate_from_accuracy(a),
        Direction::CostLike => Ok(100.0 * (a - 1.0)),
    }
}

/// Record-count-weighted mean of group means.
pub fn weighted_mean(groups: &[(usize, f64)]) -> f64 {
    let n: usize = groups.iter().map(|g| g.0).sum();
    groups.iter().map(|&(k, m)| k as f64 * m).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refclass::ProjectRecord;
    use alloc::vec;

    pub(crate) fn atrain_summary() -> BenchmarkDistribution {
        from_summary(
            "rail",
            61,
            0.59,
            0.33,
            &[
                (0.05, 0.15),
                (0.10, 0.23),
                (0.25, 0.35),
                (0.50, 0.51),
                (0.75, 0.78),
                (0.80, 0.85),
                (0.90, 1.01),
                (0.95, 1.10),
            ],
            Direction::BenefitLike,
        )
        .unwrap()
    }

    fn from_accs(accs: &[f64], direction: Direction) -> BenchmarkDistribution {
        let recs = accs
            .iter()
            .enumerate()
            .map(|(i, &a)| ProjectRecord::new(format!("p{i}"), "x", 1.0, a).unwrap())
            .collect();
        summarize(&ReferenceClass::new("t", direction, recs).unwrap(), false).unwrap()
    }

    #[test]
    fn single_record_summary() {
        let d = from_accs(&[1.0], Direction::BenefitLike);
        assert_eq!((d.mean, d.median, d.sd, d.n), (1.0, 1.0, 0.0, 1));
        assert_eq!(d.quantiles.len(), 3);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn empty_summary_is_insufficient() {
        let c = ReferenceClass::new("t", Direction::BenefitLike, vec![]).unwrap();
        assert!(matches!(
            summarize(&c, false),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn record_quantiles() {
        let d = from_accs(&[1.0, 0.2, 0.8, 0.4, 0.6], Direction::BenefitLike);
        assert!((d.quantile(0.25).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(d.quantile(0.0).unwrap(), 0.2);
        assert_eq!(d.quantile(1.0).unwrap(), 1.0);
        assert!((d.quantile(0.125).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(d.median, d.quantile(0.5).unwrap());
    }

    #[test]
    fn summary_quantiles() {
        let d = atrain_summary();
        assert_eq!(d.quantile(0.50).unwrap(), 0.51);
        assert_eq!(d.quantile(0.05).unwrap(), 0.15);
        assert_eq!(d.quantile((1.0 - 0.9) / 2.0).unwrap(), 0.15);
        assert_eq!(d.median, 0.51);
        assert!((d.quantile(0.85).unwrap() - 0.93).abs() < 1e-12);
        assert!(matches!(
            d.quantile(0.01),
            Err(Error::OutOfTableRange { .. })
        ));
        assert!(matches!(
            d.quantile(0.99),
            Err(Error::OutOfTableRange { .. })
        ));
        assert!(matches!(d.samples(), Err(Error::SummaryOnlyDistribution)));
    }

    #[test]
    fn summary_validation() {
        let e = from_summary(
            "x",
            10,
            0.6,
            0.1,
            &[(0.5, 0.6), (0.25, 0.7)],
            Direction::BenefitLike,
        );
        assert!(matches!(e, Err(Error::NonMonotoneQuantiles { .. })));
        let d = from_summary("x", 1, 1.0, 0.0, &[(0.5, 1.0)], Direction::BenefitLike).unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 1.0);
        assert!(from_summary("x", 1, 1.0, 0.0, &[], Direction::BenefitLike).is_err());
    }

    #[test]
    fn shortfall_reads() {
        let d = atrain_summary();
        let p = d.shortfall_probability(0.15).unwrap();
        assert_eq!(p.value, 0.80);
        assert!(!p.span_clamped);
        let clamped = d.shortfall_probability(0.95).unwrap();
        assert!(clamped.span_clamped);
        assert_eq!(clamped.value, 0.05);

        let r = from_accs(&[0.5, 1.5], Direction::BenefitLike);
        assert_eq!(r.shortfall_probability(0.4).unwrap().value, 0.5);
        let all_low = from_accs(&[0.2, 0.7, 0.99], Direction::BenefitLike);
        assert_eq!(all_low.shortfall_probability(0.0).unwrap().value, 1.0);
        assert!(matches!(
            r.overrun_probability(0.1),
            Err(Error::WrongDirection { .. })
        ));
    }

    #[test]
    fn overrun_reads() {
        let d = from_accs(&[1.2, 0.9, 1.5], Direction::CostLike);
        assert!((d.overrun_probability(0.1).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        let d = from_accs(&[1.2, 1.1, 1.5], Direction::CostLike);
        assert_eq!(d.overrun_probability(0.0).unwrap().value, 1.0);
        let d = from_accs(&[1.0], Direction::CostLike);
        assert_eq!(d.overrun_probability(0.5).unwrap().value, 0.0);
    }

    #[test]
    fn conversions() {
        let cases = [(0.59, 69.0), (0.51, 96.0), (0.35, 186.0), (1.0, 0.0)];
        for (a, pct) in cases {
            let got = overestimate_from_accuracy(a).unwrap();
            assert!((got - pct).abs() <= 1.0, "{a}: {got}");
        }
        assert!((overestimate_from_accuracy(0.59).unwrap() - 69.49).abs() < 0.01);
        assert!(overestimate_from_accuracy(1.25).unwrap() < 0.0);
        assert_eq!(overestimate_from_accuracy(0.0), Err(Error::ZeroAccuracy));
        assert_eq!(
            bias_percent(Direction::CostLike, 1.4).unwrap().round(),
            40.0
        );
    }

    #[test]
    fn conditional_mean() {
        let d = from_accs(&[0.5, 1.5], Direction::BenefitLike);
        assert_eq!(
            d.conditional_mean_overestimated().unwrap(),
            ConditionalMean {
                mean: 0.5,
                count: 1
            }
        );
        let d = from_accs(&[1.2, 1.3], Direction::BenefitLike);
        assert_eq!(
            d.conditional_mean_overestimated(),
            Err(Error::NoOverestimatedSamples)
        );
        assert_eq!(
            atrain_summary().conditional_mean_overestimated(),
            Err(Error::SummaryOnlyDistribution)
        );
    }

    #[test]
    fn weighted_mean_reconciles_published_subgroups() {
        let m = weighted_mean(&[(5, 0.30), (56, 0.62)]);
        assert!((m - 0.5938).abs() < 1e-4);
    }
}
