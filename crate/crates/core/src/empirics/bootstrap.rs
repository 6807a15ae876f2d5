//! Percentile bootstrap for benchmark statistics.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mean_sd, sample_quantile, BenchmarkDistribution, Interval};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "p")]
pub enum Statistic {
    Mean,
    Median,
    Sd,
    Quantile(f64),
}

impl Statistic {
    fn eval(self, sample: &mut [f64]) -> f64 {
        match self {
            Statistic::Mean => mean_sd(sample).0,
            Statistic::Sd => mean_sd(sample).1,
            Statistic::Median => {
                sample.sort_by(f64::total_cmp);
                sample_quantile(sample, 0.5)
            }
            Statistic::Quantile(p) => {
                sample.sort_by(f64::total_cmp);
                sample_quantile(sample, p)
            }
        }
    }
}

/// Percentile-method confidence interval for `statistic`.
///
/// Resample `k` draws from its own ChaCha stream `(seed, k)`, so the result
/// depends only on `(samples, statistic, level, resamples, seed)` and not on
/// evaluation order.
pub fn bootstrap_ci(
    dist: &BenchmarkDistribution,
    statistic: Statistic,
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<Interval> {
    let data = dist.samples()?;
    if data.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            found: data.len(),
        });
    }
    if resamples < 1000 {
        return Err(Error::OutOfDomain {
            value: resamples as f64,
            domain: "resamples >= 1000",
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::OutOfDomain {
            value: level,
            domain: "level in (0, 1)",
        });
    }
    if let Statistic::Quantile(p) = statistic {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfDomain {
                value: p,
                domain: "[0, 1]",
            });
        }
    }

    let n = data.len();
    let mut buf = Vec::with_capacity(n);
    let mut stats: Vec<f64> = (0..resamples)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            buf.clear();
            buf.extend((0..n).map(|_| data[rng.gen_range(0..n)]));
            statistic.eval(&mut buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(Interval {
        lower: sample_quantile(&stats, alpha),
        upper: sample_quantile(&stats, 1.0 - alpha),
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirics::{from_summary, summarize};
    use crate::refclass::{Direction, ProjectRecord, ReferenceClass};
    use alloc::format;
    use alloc::vec;

    fn dist(accs: &[f64]) -> BenchmarkDistribution {
        let recs = accs
            .iter()
            .enumerate()
            .map(|(i, &a)| ProjectRecord::new(format!("p{i}"), "x", 1.0, a).unwrap())
            .collect();
        summarize(
            &ReferenceClass::new("t", Direction::BenefitLike, recs).unwrap(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_for_seed() {
        let d = dist(&[0.2, 0.5, 0.9, 1.3, 0.4, 0.7, 0.6]);
        let a = bootstrap_ci(&d, Statistic::Mean, 0.95, 2000, 42).unwrap();
        let b = bootstrap_ci(&d, Statistic::Mean, 0.95, 2000, 42).unwrap();
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.upper.to_bits(), b.upper.to_bits());
        let c = bootstrap_ci(&d, Statistic::Mean, 0.95, 2000, 43).unwrap();
        assert_ne!((a.lower, a.upper), (c.lower, c.upper));
    }

    #[test]
    fn constant_samples_collapse() {
        let d = dist(&[0.5; 20]);
        for s in [Statistic::Mean, Statistic::Median, Statistic::Quantile(0.9)] {
            let ci = bootstrap_ci(&d, s, 0.9, 1000, 7).unwrap();
            assert_eq!((ci.lower, ci.upper), (0.5, 0.5));
        }
        let sd = bootstrap_ci(&d, Statistic::Sd, 0.9, 1000, 7).unwrap();
        assert_eq!((sd.lower, sd.upper), (0.0, 0.0));
    }

    #[test]
    fn preconditions() {
        let small = dist(&[0.5, 0.6, 0.7]);
        assert!(matches!(
            bootstrap_ci(&small, Statistic::Mean, 0.95, 1000, 1),
            Err(Error::InsufficientData {
                needed: 5,
                found: 3
            })
        ));
        let d = dist(&[0.5, 0.6, 0.7, 0.8, 0.9]);
        assert!(bootstrap_ci(&d, Statistic::Mean, 0.95, 999, 1).is_err());
        assert!(bootstrap_ci(&d, Statistic::Mean, 1.0, 1000, 1).is_err());
        let summary =
            from_summary("s", 61, 0.59, 0.33, &[(0.5, 0.51)], Direction::BenefitLike).unwrap();
        assert_eq!(
            bootstrap_ci(&summary, Statistic::Mean, 0.95, 1000, 1),
            Err(Error::SummaryOnlyDistribution)
        );
    }

    #[test]
    fn interval_brackets_point_estimate() {
        let accs: vec::Vec<f64> = (0..40).map(|i| 0.2 + 0.03 * i as f64).collect();
        let d = dist(&accs);
        let ci = bootstrap_ci(&d, Statistic::Mean, 0.95, 4000, 11).unwrap();
        assert!(ci.contains(d.mean) && ci.width() > 0.0);
    }
}
