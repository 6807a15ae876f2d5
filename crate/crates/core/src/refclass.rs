//! Reference classes: completed projects with forecast and actual outcomes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Funding {
    Public,
    Private,
    #[default]
    Unknown,
}

impl Funding {
    pub fn as_str(self) -> &'static str {
        match self {
            Funding::Public => "public",
            Funding::Private => "private",
            Funding::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "public" => Some(Funding::Public),
            "private" => Some(Funding::Private),
            "unknown" | "" => Some(Funding::Unknown),
            _ => None,
        }
    }
}

/// Which side of 1.0 a bad outcome falls on.
///
/// For benefit-like metrics (demand, revenue) a bad outcome is accuracy below
/// one; for cost-like metrics (capital cost, duration) it is accuracy above one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    BenefitLike,
    CostLike,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::BenefitLike => "benefit_like",
            Direction::CostLike => "cost_like",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "benefit_like" => Some(Direction::BenefitLike),
            "cost_like" => Some(Direction::CostLike),
            _ => None,
        }
    }
}

/// One completed project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub category: String,
    pub forecast_first_year: f64,
    pub actual_first_year: f64,
    #[serde(default)]
    pub forecaster_id: Option<String>,
    #[serde(default)]
    pub funding: Funding,
    #[serde(default)]
    pub open_year: Option<i32>,
    #[serde(default)]
    pub outlier_flag: bool,
    #[serde(default)]
    pub notes: Option<String>,
}

impl ProjectRecord {
    pub fn new(
        project_id: impl Into<String>,
        category: impl Into<String>,
        forecast_first_year: f64,
        actual_first_year: f64,
    ) -> Result<Self> {
        let rec = ProjectRecord {
            project_id: project_id.into(),
            category: category.into(),
            forecast_first_year,
            actual_first_year,
            forecaster_id: None,
            funding: Funding::Unknown,
            open_year: None,
            outlier_flag: false,
            notes: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn with_funding(mut self, funding: Funding) -> Self {
        self.funding = funding;
        self
    }

    pub fn with_forecaster(mut self, id: impl Into<String>) -> Self {
        self.forecaster_id = Some(id.into());
        self
    }

    pub fn with_open_year(mut self, year: i32) -> Self {
        self.open_year = Some(year);
        self
    }

    pub fn flagged(mut self, flag: bool) -> Self {
        self.outlier_flag = flag;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.project_id.is_empty() {
            return Err(Error::EmptyProjectId);
        }
        // NaN fails both comparisons, so it is rejected too.
        if !(self.forecast_first_year > 0.0 && self.forecast_first_year.is_finite()) {
            return Err(Error::NonPositiveForecast {
                project_id: self.project_id.clone(),
                value: self.forecast_first_year,
            });
        }
        if !(self.actual_first_year >= 0.0 && self.actual_first_year.is_finite()) {
            return Err(Error::NegativeActual {
                project_id: self.project_id.clone(),
                value: self.actual_first_year,
            });
        }
        Ok(())
    }

    /// Actual divided by forecast; 1.0 is a perfect forecast.
    pub fn accuracy(&self) -> f64 {
        accuracy(self)
    }
}

/// Actual divided by forecast.
pub fn accuracy(record: &ProjectRecord) -> f64 {
    record.actual_first_year / record.forecast_first_year
}

/// Actual outcome in year `year_index` of operations, as a percent of forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampUpObservation {
    pub project_id: String,
    pub year_index: u32,
    pub actual_pct_of_forecast: f64,
}

impl RampUpObservation {
    pub fn new(
        project_id: impl Into<String>,
        year_index: u32,
        actual_pct_of_forecast: f64,
    ) -> Self {
        RampUpObservation {
            project_id: project_id.into(),
            year_index,
            actual_pct_of_forecast,
        }
    }
}

/// A validated set of comparable completed projects for one metric.
///
/// Immutable after construction: every operation returns a new class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassRepr")]
pub struct ReferenceClass {
    label: String,
    direction: Direction,
    records: Vec<ProjectRecord>,
    rampups: Vec<RampUpObservation>,
}

#[derive(Deserialize)]
struct ClassRepr {
    label: String,
    #[serde(default)]
    direction: Direction,
    records: Vec<ProjectRecord>,
    #[serde(default)]
    rampups: Vec<RampUpObservation>,
}

impl TryFrom<ClassRepr> for ReferenceClass {
    type Error = Error;

    fn try_from(r: ClassRepr) -> Result<Self> {
        ReferenceClass::new(r.label, r.direction, r.records)?.with_rampups(r.rampups)
    }
}

impl ReferenceClass {
    /// Validates every record and project-id uniqueness. An empty record list
    /// is a valid class; statistical operations reject it later.
    pub fn new(
        label: impl Into<String>,
        direction: Direction,
        records: Vec<ProjectRecord>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            r.validate()?;
            if !seen.insert(r.project_id.as_str()) {
                return Err(Error::DuplicateProjectId(r.project_id.clone()));
            }
        }
        Ok(ReferenceClass {
            label: label.into(),
            direction,
            records,
            rampups: Vec::new(),
        })
    }

    /// Attaches ramp-up observations, appended after any already present.
    pub fn with_rampups(mut self, obs: Vec<RampUpObservation>) -> Result<Self> {
        let ids: BTreeSet<&str> = self.records.iter().map(|r| r.project_id.as_str()).collect();
        let mut keys: BTreeSet<(String, u32)> = self
            .rampups
            .iter()
            .map(|o| (o.project_id.clone(), o.year_index))
            .collect();
        for o in &obs {
            if !ids.contains(o.project_id.as_str()) {
                return Err(Error::UnknownProjectId(o.project_id.clone()));
            }
            if o.year_index < 1 {
                return Err(Error::InvalidYearIndex(o.project_id.clone()));
            }
            if !(o.actual_pct_of_forecast >= 0.0 && o.actual_pct_of_forecast.is_finite()) {
                return Err(Error::InvalidPercent {
                    value: o.actual_pct_of_forecast,
                    reason: "ramp-up percent must be finite and non-negative",
                });
            }
            if !keys.insert((o.project_id.clone(), o.year_index)) {
                return Err(Error::DuplicateYearIndex {
                    project_id: o.project_id.clone(),
                    year_index: o.year_index,
                });
            }
        }
        self.rampups.extend(obs);
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn records(&self) -> &[ProjectRecord] {
        &self.records
    }

    pub fn rampups(&self) -> &[RampUpObservation] {
        &self.rampups
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, project_id: &str) -> Option<&ProjectRecord> {
        self.records.iter().find(|r| r.project_id == project_id)
    }

    /// Accuracies in record order, optionally skipping flagged outliers.
    pub fn accuracies(&self, exclude_outliers: bool) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| !(exclude_outliers && r.outlier_flag))
            .map(accuracy)
            .collect()
    }

    pub fn outlier_count(&self) -> usize {
        self.records.iter().filter(|r| r.outlier_flag).count()
    }

    /// Ramp-up observations for one project, ordered by year.
    pub fn rampups_for(&self, project_id: &str) -> Vec<&RampUpObservation> {
        let mut v: Vec<_> = self
            .rampups
            .iter()
            .filter(|o| o.project_id == project_id)
            .collect();
        v.sort_by_key(|o| o.year_index);
        v
    }

    /// Per-year mean of `actual_pct_of_forecast` and the number of projects
    /// reporting that year.
    pub fn rampup_year_means(&self) -> BTreeMap<u32, (f64, usize)> {
        let mut acc: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for o in &self.rampups {
            let e = acc.entry(o.year_index).or_insert((0.0, 0));
            e.0 += o.actual_pct_of_forecast;
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(y, (sum, n))| (y, (sum / n as f64, n)))
            .collect()
    }

    /// Distinct projects with at least one ramp-up observation.
    pub fn rampup_project_count(&self) -> usize {
        self.rampups
            .iter()
            .map(|o| o.project_id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Records matching `filter`, with their ramp-up observations.
    pub fn filter(&self, filter: &RecordFilter) -> ReferenceClass {
        let records: Vec<ProjectRecord> = self
            .records
            .iter()
            .filter(|r| filter.matches(r))
            .cloned()
            .collect();
        let ids: BTreeSet<&str> = records.iter().map(|r| r.project_id.as_str()).collect();
        let rampups = self
            .rampups
            .iter()
            .filter(|o| ids.contains(o.project_id.as_str()))
            .cloned()
            .collect();
        ReferenceClass {
            label: self.label.clone(),
            direction: self.direction,
            records,
            rampups,
        }
    }

    /// Returns a copy with outlier flags set according to `policy`.
    ///
    /// `Auto` flags records whose log-accuracy lies more than three median
    /// absolute deviations from the median log-accuracy. Zero accuracies are
    /// always flagged under `Auto`. A MAD of zero flags nothing else.
    pub fn flag_outliers(&self, policy: OutlierPolicy) -> Result<ReferenceClass> {
        let mut out = self.clone();
        match policy {
            OutlierPolicy::Manual => {}
            OutlierPolicy::None => out.records.iter_mut().for_each(|r| r.outlier_flag = false),
            OutlierPolicy::Auto => {
                if self.records.len() < 5 {
                    return Err(Error::InsufficientData {
                        needed: 5,
                        found: self.records.len(),
                    });
                }
                let logs: Vec<Option<f64>> = self
                    .records
                    .iter()
                    .map(|r| {
                        let a = accuracy(r);
                        (a > 0.0).then(|| libm::log(a))
                    })
                    .collect();
                let finite: Vec<f64> = logs.iter().flatten().copied().collect();
                let (median, mad) = if finite.is_empty() {
                    (0.0, 0.0)
                } else {
                    let med = median(&finite);
                    let dev: Vec<f64> = finite.iter().map(|l| (l - med).abs()).collect();
                    (med, median(&dev))
                };
                for (r, l) in out.records.iter_mut().zip(&logs) {
                    r.outlier_flag = match l {
                        None => true,
                        Some(l) => mad > 0.0 && (l - median).abs() > 3.0 * mad,
                    };
                }
            }
        }
        Ok(out)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierPolicy {
    /// Clear all flags.
    None,
    /// Keep flags as ingested.
    #[default]
    Manual,
    /// Recompute flags with the 3×MAD rule on log-accuracy.
    Auto,
}

impl OutlierPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OutlierPolicy::None => "none",
            OutlierPolicy::Manual => "manual",
            OutlierPolicy::Auto => "auto",
        }
    }
}

/// Attribute filter over records. Unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordFilter {
    pub category: Option<String>,
    pub funding: Option<Funding>,
    pub forecaster_id: Option<String>,
    pub open_year_min: Option<i32>,
    pub open_year_max: Option<i32>,
}

impl RecordFilter {
    pub fn matches(&self, r: &ProjectRecord) -> bool {
        if let Some(c) = &self.category {
            if &r.category != c {
                return false;
            }
        }
        if let Some(f) = self.funding {
            if r.funding != f {
                return false;
            }
        }
        if let Some(id) = &self.forecaster_id {
            if r.forecaster_id.as_deref() != Some(id.as_str()) {
                return false;
            }
        }
        if self.open_year_min.is_some() || self.open_year_max.is_some() {
            let Some(y) = r.open_year else { return false };
            if self.open_year_min.is_some_and(|lo| y < lo)
                || self.open_year_max.is_some_and(|hi| y > hi)
            {
                return false;
            }
        }
        true
    }

    /// Conjunction of two filters; conflicting equality constraints match nothing.
    pub fn and(&self, other: &RecordFilter) -> Option<RecordFilter> {
        fn merge<T: PartialEq + Clone>(a: &Option<T>, b: &Option<T>) -> Option<Option<T>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => None,
                (Some(x), _) | (None, Some(x)) => Some(Some(x.clone())),
                (None, None) => Some(None),
            }
        }
        Some(RecordFilter {
            category: merge(&self.category, &other.category)?,
            funding: merge(&self.funding, &other.funding)?,
            forecaster_id: merge(&self.forecaster_id, &other.forecaster_id)?,
            open_year_min: match (self.open_year_min, other.open_year_min) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            open_year_max: match (self.open_year_max, other.open_year_max) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(id: &str, f: f64, a: f64) -> ProjectRecord {
        ProjectRecord::new(id, "rail", f, a).unwrap()
    }

    #[test]
    fn accuracy_values() {
        assert!((rec("a", 14.1, 8.3).accuracy() - 0.589).abs() < 0.001);
        assert_eq!(rec("b", 100.0, 100.0).accuracy(), 1.0);
        assert_eq!(rec("c", 10.0, 0.0).accuracy(), 0.0);
    }

    #[test]
    fn record_validation() {
        assert!(matches!(
            ProjectRecord::new("x", "rail", 0.0, 1.0),
            Err(Error::NonPositiveForecast { .. })
        ));
        assert!(matches!(
            ProjectRecord::new("x", "rail", f64::NAN, 1.0),
            Err(Error::NonPositiveForecast { .. })
        ));
        assert!(matches!(
            ProjectRecord::new("x", "rail", 1.0, -0.5),
            Err(Error::NegativeActual { .. })
        ));
        assert_eq!(
            ProjectRecord::new("", "rail", 1.0, 1.0),
            Err(Error::EmptyProjectId)
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = ReferenceClass::new(
            "t",
            Direction::BenefitLike,
            vec![rec("P1", 1.0, 1.0), rec("P1", 2.0, 1.0)],
        );
        assert_eq!(err, Err(Error::DuplicateProjectId("P1".into())));
    }

    #[test]
    fn rampup_validation() {
        let c =
            ReferenceClass::new("t", Direction::BenefitLike, vec![rec("P1", 1.0, 0.4)]).unwrap();
        let ok = c
            .clone()
            .with_rampups(vec![
                RampUpObservation::new("P1", 1, 41.0),
                RampUpObservation::new("P1", 2, 49.0),
            ])
            .unwrap();
        assert_eq!(ok.rampups_for("P1").len(), 2);
        assert_eq!(
            c.clone()
                .with_rampups(vec![RampUpObservation::new("PX", 1, 41.0)]),
            Err(Error::UnknownProjectId("PX".into()))
        );
        assert!(matches!(
            c.clone().with_rampups(vec![
                RampUpObservation::new("P1", 1, 41.0),
                RampUpObservation::new("P1", 1, 42.0)
            ]),
            Err(Error::DuplicateYearIndex { .. })
        ));
        assert!(matches!(
            c.with_rampups(vec![RampUpObservation::new("P1", 0, 41.0)]),
            Err(Error::InvalidYearIndex(_))
        ));
    }

    fn mixed() -> ReferenceClass {
        let recs = vec![
            rec("a", 10.0, 3.0)
                .with_funding(Funding::Private)
                .with_forecaster("F1"),
            rec("b", 10.0, 6.0)
                .with_funding(Funding::Public)
                .with_open_year(1999),
            rec("c", 10.0, 7.0).with_funding(Funding::Public),
            ProjectRecord::new("d", "airport_link", 10.0, 4.0).unwrap(),
        ];
        ReferenceClass::new("m", Direction::BenefitLike, recs)
            .unwrap()
            .with_rampups(vec![
                RampUpObservation::new("a", 1, 30.0),
                RampUpObservation::new("b", 1, 60.0),
            ])
            .unwrap()
    }

    #[test]
    fn filter_subsets() {
        let c = mixed();
        let private = c.filter(&RecordFilter {
            funding: Some(Funding::Private),
            ..Default::default()
        });
        assert_eq!(private.len(), 1);
        assert_eq!(private.rampups().len(), 1);
        let none = c.filter(&RecordFilter {
            category: Some("no-such".into()),
            ..Default::default()
        });
        assert!(none.is_empty());
        let years = c.filter(&RecordFilter {
            open_year_min: Some(1990),
            open_year_max: Some(2000),
            ..Default::default()
        });
        assert_eq!(years.len(), 1);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn outlier_policies() {
        let mut recs: Vec<_> = (0..9)
            .map(|i| rec(&alloc::format!("p{i}"), 100.0, 50.0 + i as f64))
            .collect();
        recs.push(rec("big", 100.0, 900.0).flagged(false));
        recs[0].outlier_flag = true;
        let c = ReferenceClass::new("o", Direction::BenefitLike, recs).unwrap();
        let auto = c.flag_outliers(OutlierPolicy::Auto).unwrap();
        let flagged: Vec<_> = auto
            .records()
            .iter()
            .filter(|r| r.outlier_flag)
            .map(|r| r.project_id.as_str())
            .collect();
        assert_eq!(flagged, ["big"]);
        assert_eq!(
            c.flag_outliers(OutlierPolicy::None)
                .unwrap()
                .outlier_count(),
            0
        );
        assert_eq!(
            c.flag_outliers(OutlierPolicy::Manual)
                .unwrap()
                .outlier_count(),
            1
        );
        // input untouched
        assert_eq!(c.outlier_count(), 1);
    }

    #[test]
    fn outliers_degenerate_spread_and_zero() {
        let recs: Vec<_> = (0..6)
            .map(|i| rec(&alloc::format!("p{i}"), 10.0, 5.0))
            .collect();
        let c = ReferenceClass::new("o", Direction::BenefitLike, recs.clone()).unwrap();
        assert_eq!(
            c.flag_outliers(OutlierPolicy::Auto)
                .unwrap()
                .outlier_count(),
            0
        );

        let mut with_zero = recs;
        with_zero.push(rec("z", 10.0, 0.0));
        let c = ReferenceClass::new("o", Direction::BenefitLike, with_zero).unwrap();
        let f = c.flag_outliers(OutlierPolicy::Auto).unwrap();
        assert_eq!(f.outlier_count(), 1);
        assert!(f.get("z").unwrap().outlier_flag);

        let small =
            ReferenceClass::new("s", Direction::BenefitLike, vec![rec("a", 1.0, 1.0)]).unwrap();
        assert!(matches!(
            small.flag_outliers(OutlierPolicy::Auto),
            Err(Error::InsufficientData {
                needed: 5,
                found: 1
            })
        ));
    }

    #[test]
    fn year_means() {
        let m = mixed().rampup_year_means();
        assert_eq!(m[&1], (45.0, 2));
    }
}
