use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::display;
use crate::empirics::{BenchmarkDistribution, Interval};
use crate::forecast::ForecastUnderReview;
use crate::refclass::Direction;
use crate::{Error, Result};

/// Which benchmark statistic sets the expected outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeMode {
    /// The forecast is taken to be as accurate as the average in the class.
    #[default]
    BenefitOfDoubt,
    /// The forecast is taken to be as accurate as the average forecast that
    /// erred on the bad side.
    Pessimistic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub level: f64,
    pub accuracy: Interval,
    pub value: Interval,
    pub display: BTreeMap<&'static str, String>,
}

/// One-sided adjustment: the value reached with probability `level`
/// (benefit-like), or the budget not exceeded with probability `level`
/// (cost-like).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedValue {
    pub level: f64,
    pub accuracy: f64,
    pub value: f64,
    pub adjustment_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeTable {
    pub mode: OutcomeMode,
    pub forecast: f64,
    pub unit: String,
    pub expected_accuracy: f64,
    pub expected_value: f64,
    pub rows: Vec<OutcomeRow>,
    pub adjusted: Vec<AdjustedValue>,
    pub warnings: Vec<String>,
    pub display: BTreeMap<&'static str, String>,
}

pub fn expected_outcome(
    fc: &ForecastUnderReview,
    dist: &BenchmarkDistribution,
    levels: &[f64],
    mode: OutcomeMode,
) -> Result<OutcomeTable> {
    for &l in levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::OutOfDomain {
                value: l,
                domain: "level in (0, 1)",
            });
        }
    }
    let f = fc.first_year_forecast;
    let mut warnings = Vec::new();
    let expected_accuracy = match mode {
        OutcomeMode::BenefitOfDoubt => dist.mean,
        OutcomeMode::Pessimistic => {
            let c = dist.conditional_mean_adverse()?;
            warnings.push(format!(
                "pessimistic mode: mean of the {} adverse outcomes",
                c.count
            ));
            c.mean
        }
    };

    let mut rows = Vec::with_capacity(levels.len());
    for &l in levels {
        let lo = dist.quantile((1.0 - l) / 2.0)?;
        let hi = dist.quantile((1.0 + l) / 2.0)?;
        let accuracy = Interval {
            lower: lo,
            upper: hi,
            level: l,
        };
        let value = Interval {
            lower: f * lo,
            upper: f * hi,
            level: l,
        };
        let mut d = BTreeMap::new();
        d.insert("level", display::level(l));
        d.insert(
            "accuracy",
            format!("{}-{}", display::ratio(lo), display::ratio(hi)),
        );
        d.insert(
            "value",
            format!("{}-{}", display::value(f * lo), display::value(f * hi)),
        );
        rows.push(OutcomeRow {
            level: l,
            accuracy,
            value,
            display: d,
        });
    }

    let mut adjusted = Vec::new();
    for &l in levels {
        let p = match dist.direction {
            Direction::BenefitLike => 1.0 - l,
            Direction::CostLike => l,
        };
        match dist.quantile(p) {
            Ok(q) => adjusted.push(AdjustedValue {
                level: l,
                accuracy: q,
                value: f * q,
                adjustment_pct: 100.0 * (q - 1.0),
            }),
            Err(e) => warnings.push(format!("no adjusted value at {}: {e}", display::level(l))),
        }
    }

    let mut d = BTreeMap::new();
    d.insert("expected_accuracy", display::ratio(expected_accuracy));
    d.insert("expected_value", display::value(f * expected_accuracy));
    d.insert("forecast", display::value(f));

    Ok(OutcomeTable {
        mode,
        forecast: f,
        unit: fc.unit.clone(),
        expected_accuracy,
        expected_value: f * expected_accuracy,
        rows,
        adjusted,
        warnings,
        display: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirics::{from_summary, summarize};
    use crate::forecast::DownsideClaim;
    use crate::refclass::{ProjectRecord, ReferenceClass};

    const TABLE: [(f64, f64); 8] = [
        (0.05, 0.15),
        (0.10, 0.23),
        (0.25, 0.35),
        (0.50, 0.51),
        (0.75, 0.78),
        (0.80, 0.85),
        (0.90, 1.01),
        (0.95, 1.10),
    ];

    fn fc(f: f64) -> ForecastUnderReview {
        ForecastUnderReview::new(
            "A",
            "m",
            f,
            DownsideClaim::from_shortfall(0.15, 0.95).unwrap(),
        )
        .unwrap()
    }

    fn bench() -> BenchmarkDistribution {
        from_summary("b", 61, 0.59, 0.33, &TABLE, Direction::BenefitLike).unwrap()
    }

    #[test]
    fn summary_table() {
        let t = expected_outcome(
            &fc(14.1),
            &bench(),
            &[0.9, 0.8, 0.5],
            OutcomeMode::BenefitOfDoubt,
        )
        .unwrap();
        assert_eq!(t.display["expected_value"], "8.3");
        let cells: Vec<_> = t
            .rows
            .iter()
            .map(|r| (r.display["accuracy"].clone(), r.display["value"].clone()))
            .collect();
        assert_eq!(cells[0], ("0.15-1.10".into(), "2.1-15.5".into()));
        assert_eq!(cells[1], ("0.23-1.01".into(), "3.2-14.2".into()));
        assert_eq!(cells[2], ("0.35-0.78".into(), "4.9-11.0".into()));
        assert!(t.rows[2].accuracy.nested_in(&t.rows[1].accuracy));
        assert!(t.rows[1].accuracy.nested_in(&t.rows[0].accuracy));
        assert_eq!(t.adjusted.len(), 3);
        assert!((t.adjusted[0].accuracy - 0.23).abs() < 1e-12);
    }

    #[test]
    fn scales_with_forecast() {
        let a = expected_outcome(
            &fc(14.1),
            &bench(),
            &[0.9, 0.5],
            OutcomeMode::BenefitOfDoubt,
        )
        .unwrap();
        let b = expected_outcome(
            &fc(28.2),
            &bench(),
            &[0.9, 0.5],
            OutcomeMode::BenefitOfDoubt,
        )
        .unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((2.0 * x.value.lower - y.value.lower).abs() < 1e-9);
            assert!((2.0 * x.value.upper - y.value.upper).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_distribution() {
        let recs = (0..10)
            .map(|i| ProjectRecord::new(format!("p{i}"), "x", 3.0, 3.0).unwrap())
            .collect();
        let d = summarize(
            &ReferenceClass::new("c", Direction::BenefitLike, recs).unwrap(),
            false,
        )
        .unwrap();
        let t = expected_outcome(&fc(1.0), &d, &[0.5, 0.9], OutcomeMode::BenefitOfDoubt).unwrap();
        assert_eq!(t.expected_value, 1.0);
        for r in &t.rows {
            assert_eq!((r.value.lower, r.value.upper), (1.0, 1.0));
        }
        assert_eq!(
            expected_outcome(&fc(1.0), &d, &[0.5], OutcomeMode::Pessimistic),
            Err(Error::NoOverestimatedSamples)
        );
    }

    #[test]
    fn missing_quantile() {
        let short =
            from_summary("b", 61, 0.59, 0.33, &TABLE[2..5], Direction::BenefitLike).unwrap();
        assert!(matches!(
            expected_outcome(&fc(14.1), &short, &[0.9], OutcomeMode::BenefitOfDoubt),
            Err(Error::OutOfTableRange { .. })
        ));
        assert!(
            expected_outcome(&fc(14.1), &bench(), &[1.0], OutcomeMode::BenefitOfDoubt).is_err()
        );
    }
}
