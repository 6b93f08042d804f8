//! CSV ingestion. One schema per data shape:
//!
//! * regression: `y,x1,…,xp`
//! * survival: `time,event,x1,…,xp` with `event` in {0, 1}
//! * series: `value`

use std::fs::File;
use std::path::Path;

use nestspec::cox::{SurvivalData, SurvivalRecord};
use nestspec::glm::GlmFamily;
use nestspec::harness::Dataset;
use nestspec::timeseries::TimeSeriesSample;
use nestspec::Matrix;

use crate::failure::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// Regression data; the family (if any) restricts the response support.
    Regression(Option<GlmFamily>),
    Survival,
    Series,
}

impl Schema {
    pub fn header(self, p: usize) -> Vec<String> {
        let covariates = (1..=p).map(|j| format!("x{j}"));
        match self {
            Schema::Regression(_) => std::iter::once("y".to_string()).chain(covariates).collect(),
            Schema::Survival => ["time".to_string(), "event".to_string()].into_iter().chain(covariates).collect(),
            Schema::Series => vec!["value".to_string()],
        }
    }

    fn leading(self) -> usize {
        match self {
            Schema::Regression(_) => 1,
            Schema::Survival => 2,
            Schema::Series => 1,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Schema::Regression(_) => "y,x1,...,xp",
            Schema::Survival => "time,event,x1,...,xp",
            Schema::Series => "value",
        }
    }
}

fn check_header(path: &Path, header: &csv::StringRecord, schema: Schema) -> Result<usize, CliError> {
    let fields: Vec<&str> = header.iter().collect();
    let p = match schema {
        Schema::Series => 0,
        _ => fields.len().saturating_sub(schema.leading()),
    };
    let expected = schema.header(p);
    if matches!(schema, Schema::Regression(_) | Schema::Survival) && p == 0 {
        return Err(CliError::parse(
            path,
            1,
            None,
            format!("header needs at least one covariate column; expected {}", schema.describe()),
        ));
    }
    for (k, want) in expected.iter().enumerate() {
        match fields.get(k) {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(CliError::parse(
                    path,
                    1,
                    Some(k + 1),
                    format!("expected header field '{want}', found '{got}' (schema {})", schema.describe()),
                ))
            }
            None => {
                return Err(CliError::parse(path, 1, None, format!("header must be {}", schema.describe())))
            }
        }
    }
    if fields.len() > expected.len() {
        return Err(CliError::parse(
            path,
            1,
            Some(expected.len() + 1),
            format!("unexpected header field '{}' (schema {})", fields[expected.len()], schema.describe()),
        ));
    }
    Ok(p)
}

fn number(path: &Path, line: u64, column: usize, text: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .parse()
        .map_err(|_| CliError::parse(path, line, Some(column), format!("'{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::parse(path, line, Some(column), format!("'{text}' is not finite")));
    }
    Ok(v)
}

fn check_response(path: &Path, line: u64, family: Option<GlmFamily>, y: f64) -> Result<(), CliError> {
    let bad = match family {
        Some(GlmFamily::Binomial) if y != 0.0 && y != 1.0 => Some("binomial response must be 0 or 1"),
        Some(GlmFamily::Poisson) if y < 0.0 || y.fract() != 0.0 => {
            Some("poisson response must be a non-negative integer")
        }
        _ => None,
    };
    match bad {
        Some(m) => Err(CliError::parse(path, line, Some(1), format!("{m}, found {y}"))),
        None => Ok(()),
    }
}

/// Reads `path` under `schema`. Every content error carries its line (the
/// header is line 1) and, where it applies, its 1-based column.
pub fn read_dataset(path: &Path, schema: Schema) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(CliError::parse(path, 1, None, format!("missing header; expected {}", schema.describe())));
    }
    let p = check_header(path, &header, schema)?;
    let width = schema.leading() + p;

    let mut leading: Vec<Vec<f64>> = Vec::new();
    let mut covariates: Vec<f64> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != width {
            return Err(CliError::parse(
                path,
                line,
                Some(row.len().min(width) + 1),
                format!("expected {width} fields, found {}", row.len()),
            ));
        }
        let values = row
            .iter()
            .enumerate()
            .map(|(k, text)| number(path, line, k + 1, text))
            .collect::<Result<Vec<f64>, _>>()?;
        match schema {
            Schema::Regression(family) => check_response(path, line, family, values[0])?,
            Schema::Survival => {
                if values[0] <= 0.0 {
                    return Err(CliError::parse(path, line, Some(1), format!("time must be positive, found {}", values[0])));
                }
                if values[1] != 0.0 && values[1] != 1.0 {
                    return Err(CliError::parse(path, line, Some(2), format!("event must be 0 or 1, found {}", values[1])));
                }
            }
            Schema::Series => {}
        }
        covariates.extend_from_slice(&values[schema.leading()..]);
        leading.push(values[..schema.leading()].to_vec());
    }
    if leading.is_empty() {
        return Err(CliError::parse(path, 2, None, "no data rows after the header"));
    }

    let n = leading.len();
    let dataset = match schema {
        Schema::Regression(_) => Dataset::Regression {
            x: Matrix::new(n, p, covariates)?,
            y: leading.iter().map(|r| r[0]).collect(),
        },
        Schema::Survival => Dataset::Survival(SurvivalData::new(
            leading
                .iter()
                .zip(covariates.chunks(p))
                .map(|(r, x)| SurvivalRecord {
                    time: r[0],
                    event: r[1] == 1.0,
                    covariates: x.to_vec(),
                })
                .collect(),
        )?),
        Schema::Series => Dataset::Series(TimeSeriesSample::new(leading.iter().map(|r| r[0]).collect())?),
    };
    Ok(dataset)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        csv::ErrorKind::Utf8 { err, .. } => CliError::parse(path, line, Some(err.field() + 1), "invalid UTF-8"),
        other => CliError::parse(path, line, None, format!("{other:?}")),
    }
}
