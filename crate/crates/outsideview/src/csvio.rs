//! Reference-class and ramp-up CSV files.

use std::io::{Read, Write};

use outsideview_core::{Direction, Funding, ProjectRecord, RampUpObservation, ReferenceClass};

use crate::{Error, Result};

/// Column order of the reference-class CSV. Files may stop after
/// `actual_first_year`; trailing columns are optional.
pub const RECORD_COLUMNS: [&str; 9] = [
    "project_id",
    "category",
    "forecast_first_year",
    "actual_first_year",
    "forecaster_id",
    "funding",
    "outlier_flag",
    "open_year",
    "notes",
];
const REQUIRED_RECORD_COLUMNS: usize = 4;

pub const RAMPUP_COLUMNS: [&str; 3] = ["project_id", "year_index", "actual_pct_of_forecast"];

fn check_header(header: &csv::StringRecord, expected: &[&str], required: usize) -> Result<usize> {
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got.len() < required || got.len() > expected.len() || got[..] != expected[..got.len()] {
        return Err(Error::Header(format!(
            "expected `{}` (trailing columns optional), got `{}`",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(got.len())
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

struct Row<'a> {
    line: usize,
    cols: &'a [&'a str],
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    fn get(&self, i: usize) -> Option<&str> {
        self.rec.get(i).filter(|s| !s.is_empty())
    }

    fn bad(&self, i: usize, message: impl Into<String>) -> Error {
        Error::MalformedRow {
            row: self.line,
            column: self.cols[i].to_string(),
            message: message.into(),
        }
    }

    fn required(&self, i: usize) -> Result<&str> {
        self.get(i).ok_or_else(|| self.bad(i, "missing value"))
    }

    fn number<T: std::str::FromStr>(&self, i: usize) -> Result<Option<T>> {
        self.get(i)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| self.bad(i, format!("not a number: `{s}`")))
            })
            .transpose()
    }
}

fn line_of(rec: &csv::StringRecord, fallback: usize) -> usize {
    rec.position().map_or(fallback, |p| p.line() as usize)
}

/// Parses a reference-class CSV. Row numbers in errors are file line numbers.
pub fn parse_reference_csv<R: Read>(
    input: R,
    label: &str,
    direction: Direction,
) -> Result<ReferenceClass> {
    let mut rdr = reader(input);
    let width = check_header(rdr.headers()?, &RECORD_COLUMNS, REQUIRED_RECORD_COLUMNS)?;
    let cols = &RECORD_COLUMNS[..width];
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, i + 2);
        if rec.len() > width {
            return Err(Error::MalformedRow {
                row: line,
                column: format!("#{}", width + 1),
                message: format!("{} fields, header has {width}", rec.len()),
            });
        }
        let row = Row {
            line,
            cols,
            rec: &rec,
        };
        let forecast = row
            .number::<f64>(2)?
            .ok_or_else(|| row.bad(2, "missing value"))?;
        let actual = row
            .number::<f64>(3)?
            .ok_or_else(|| row.bad(3, "missing value"))?;
        let mut r =
            ProjectRecord::new(row.required(0)?, row.get(1).unwrap_or(""), forecast, actual)
                .map_err(|source| Error::InvalidRecord { row: line, source })?;
        if width > 4 {
            r.forecaster_id = row.get(4).map(str::to_string);
        }
        if let Some(f) = row.get(5) {
            r.funding = Funding::parse(f).ok_or_else(|| {
                row.bad(5, format!("expected public, private or unknown, got `{f}`"))
            })?;
        }
        if let Some(flag) = row.get(6) {
            r.outlier_flag = match flag {
                "0" => false,
                "1" => true,
                other => return Err(row.bad(6, format!("expected 0 or 1, got `{other}`"))),
            };
        }
        r.open_year = row.number::<i32>(7)?;
        r.notes = row.get(8).map(str::to_string);
        records.push(r);
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(ReferenceClass::new(label, direction, records)?)
}

/// Parses a ramp-up CSV and attaches the observations to `class`.
pub fn parse_rampup_csv<R: Read>(input: R, class: ReferenceClass) -> Result<ReferenceClass> {
    let mut rdr = reader(input);
    check_header(rdr.headers()?, &RAMPUP_COLUMNS, RAMPUP_COLUMNS.len())?;
    let mut obs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line_of(&rec, i + 2);
        let row = Row {
            line,
            cols: &RAMPUP_COLUMNS,
            rec: &rec,
        };
        if rec.len() != RAMPUP_COLUMNS.len() {
            return Err(row.bad(
                rec.len().min(2),
                format!("{} fields, expected 3", rec.len()),
            ));
        }
        let year = row
            .number::<u32>(1)?
            .ok_or_else(|| row.bad(1, "missing value"))?;
        let pct = row
            .number::<f64>(2)?
            .ok_or_else(|| row.bad(2, "missing value"))?;
        obs.push(RampUpObservation::new(row.required(0)?, year, pct));
    }
    Ok(class.with_rampups(obs)?)
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Writes the records with the full column set.
pub fn write_reference_csv<W: Write>(class: &ReferenceClass, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in class.records() {
        w.write_record([
            r.project_id.clone(),
            r.category.clone(),
            r.forecast_first_year.to_string(),
            r.actual_first_year.to_string(),
            fmt_opt(&r.forecaster_id),
            r.funding.as_str().to_string(),
            String::from(if r.outlier_flag { "1" } else { "0" }),
            fmt_opt(&r.open_year),
            fmt_opt(&r.notes),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_rampup_csv<W: Write>(class: &ReferenceClass, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAMPUP_COLUMNS)?;
    for o in class.rampups() {
        w.write_record([
            o.project_id.clone(),
            o.year_index.to_string(),
            o.actual_pct_of_forecast.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
