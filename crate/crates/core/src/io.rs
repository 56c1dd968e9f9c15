//! File interchange: population and rate tables in, allocations and
//! reports out.
//!
//! Formats:
//!
//! * population CSV — header `region,<group1>,<group2>,...`, one row per
//!   region, integer cells;
//! * exposure CSV — header `group,rate`, rates in `[0, 1]`;
//! * case-count CSV — header `group,infected,population`;
//! * allocation CSV — header `region,population,exposed,<scenario...>`
//!   for comparisons, or `region,allocation` for a single run;
//! * report JSON — the full [`ComparisonReport`];
//! * sweep TSV — `epsilon_d<TAB>epsilon_f<TAB>model<TAB>feasible`.
//!
//! Writers are deterministic: fixed field order and shortest round-trip
//! decimal formatting, so identical inputs produce byte-identical files.
//! The city rate tables shipped under `fixtures/` parse with their printed
//! digits preserved exactly.

use crate::domain::{
    Allocation, DomainError, ExposureRates, GroupId, PopulationMatrix, ProblemInstance, RegionId,
};
use crate::exposure::{CaseCounts, GroupCases};
use crate::scenarios::ComparisonReport;
use crate::tuner::{EpsilonSweep, SweepModel};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoIngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row}, column `{column}`: cannot parse `{token}`")]
    Parse {
        row: usize,
        column: String,
        token: String,
    },
    #[error("row {row}, column `{column}`: negative cell")]
    NegativeCell { row: usize, column: String },
    #[error("duplicate region `{0}`")]
    DuplicateRegion(String),
    #[error("duplicate group `{0}`")]
    DuplicateGroup(String),
    #[error("rate {rate} for group `{group}` is outside [0, 1]")]
    RateOutOfRange { group: String, rate: f64 },
    #[error("expected header to start with `{0}`")]
    MissingColumn(&'static str),
    #[error("file contains no data rows")]
    Empty,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("allocation file does not cover region `{0}`")]
    MissingRegion(String),
    #[error("allocation file names unknown region `{0}`")]
    UnknownRegion(String),
}

/// Reads a region-by-group population table.
pub fn read_population_csv(path: impl AsRef<Path>) -> Result<PopulationMatrix, IoIngestError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let mut columns = headers.iter();
    if columns.next() != Some("region") {
        return Err(IoIngestError::MissingColumn("region"));
    }
    let groups: Vec<GroupId> = columns
        .map(GroupId::new)
        .collect::<Result<_, _>>()?;

    let mut regions: Vec<RegionId> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 2; // 1-based, counting the header line
        let record = record?;
        let region = record.get(0).unwrap_or_default();
        if !seen.insert(region.to_owned()) {
            return Err(IoIngestError::DuplicateRegion(region.to_owned()));
        }
        regions.push(RegionId::new(region)?);
        let mut cells = Vec::with_capacity(groups.len());
        for (k, group) in groups.iter().enumerate() {
            let token = record.get(k + 1).unwrap_or_default();
            let value: i64 = token.trim().parse().map_err(|_| IoIngestError::Parse {
                row: row_no,
                column: group.as_str().to_owned(),
                token: token.to_owned(),
            })?;
            if value < 0 {
                return Err(IoIngestError::NegativeCell {
                    row: row_no,
                    column: group.as_str().to_owned(),
                });
            }
            cells.push(value);
        }
        rows.push(cells);
    }
    if regions.is_empty() {
        return Err(IoIngestError::Empty);
    }
    // The file is region-major; the matrix wants group-major.
    let mut counts = Vec::with_capacity(groups.len() * regions.len());
    for i in 0..groups.len() {
        for row in &rows {
            counts.push(row[i]);
        }
    }
    Ok(PopulationMatrix::new(groups, regions, counts)?)
}

/// Reads a `group,rate` table.
pub fn read_exposure_csv(path: impl AsRef<Path>) -> Result<ExposureRates, IoIngestError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("group") || headers.get(1) != Some("rate") {
        return Err(IoIngestError::MissingColumn("group,rate"));
    }
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 2;
        let record = record?;
        let group = record.get(0).unwrap_or_default().to_owned();
        if !seen.insert(group.clone()) {
            return Err(IoIngestError::DuplicateGroup(group));
        }
        let token = record.get(1).unwrap_or_default();
        let rate: f64 = token.trim().parse().map_err(|_| IoIngestError::Parse {
            row: row_no,
            column: "rate".to_owned(),
            token: token.to_owned(),
        })?;
        if !(0.0..=1.0).contains(&rate) {
            return Err(IoIngestError::RateOutOfRange { group, rate });
        }
        pairs.push((GroupId::new(group)?, rate));
    }
    if pairs.is_empty() {
        return Err(IoIngestError::Empty);
    }
    Ok(ExposureRates::new(pairs)?)
}

/// Reads a `group,infected,population` table into count-form case data.
pub fn read_case_counts_csv(path: impl AsRef<Path>) -> Result<CaseCounts, IoIngestError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("group")
        || headers.get(1) != Some("infected")
        || headers.get(2) != Some("population")
    {
        return Err(IoIngestError::MissingColumn("group,infected,population"));
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 2;
        let record = record?;
        let group = record.get(0).unwrap_or_default().to_owned();
        if !seen.insert(group.clone()) {
            return Err(IoIngestError::DuplicateGroup(group));
        }
        let parse_u64 = |column: &'static str, pos: usize| -> Result<u64, IoIngestError> {
            let token = record.get(pos).unwrap_or_default();
            token.trim().parse().map_err(|_| IoIngestError::Parse {
                row: row_no,
                column: column.to_owned(),
                token: token.to_owned(),
            })
        };
        let infected = parse_u64("infected", 1)?;
        let population = parse_u64("population", 2)?;
        rows.push(GroupCases {
            group: GroupId::new(group)?,
            infected,
            population,
        });
    }
    if rows.is_empty() {
        return Err(IoIngestError::Empty);
    }
    Ok(CaseCounts::Counts(rows))
}

/// Reads a `region,allocation` file into amounts aligned with the
/// instance's region order. Every instance region must appear exactly once.
pub fn read_allocation_csv(
    path: impl AsRef<Path>,
    instance: &ProblemInstance,
) -> Result<Allocation, IoIngestError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("region") {
        return Err(IoIngestError::MissingColumn("region"));
    }
    let mut amounts = vec![None; instance.num_regions()];
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 2;
        let record = record?;
        let region = record.get(0).unwrap_or_default();
        let id = RegionId::new(region)?;
        let Some(pos) = instance.matrix().region_position(&id) else {
            return Err(IoIngestError::UnknownRegion(region.to_owned()));
        };
        if amounts[pos].is_some() {
            return Err(IoIngestError::DuplicateRegion(region.to_owned()));
        }
        let token = record.get(1).unwrap_or_default();
        let value: f64 = token.trim().parse().map_err(|_| IoIngestError::Parse {
            row: row_no,
            column: "allocation".to_owned(),
            token: token.to_owned(),
        })?;
        amounts[pos] = Some(value);
    }
    let mut resolved = Vec::with_capacity(amounts.len());
    for (j, a) in amounts.into_iter().enumerate() {
        match a {
            Some(v) => resolved.push(v),
            None => {
                return Err(IoIngestError::MissingRegion(
                    instance.regions()[j].as_str().to_owned(),
                ))
            }
        }
    }
    Ok(Allocation::fractional(resolved)?)
}

/// Comparison table as CSV text: `region,population,exposed,<scenarios>`.
pub fn comparison_csv_string(report: &ComparisonReport) -> String {
    let mut out = String::from("region,population,exposed");
    for label in &report.scenario_labels {
        let _ = write!(out, ",{label}");
    }
    out.push('\n');
    for row in &report.rows {
        let _ = write!(out, "{},{},{}", row.region, row.population, row.exposed);
        for a in &row.allocations {
            let _ = write!(out, ",{a}");
        }
        out.push('\n');
    }
    out
}

pub fn write_allocation_csv(
    path: impl AsRef<Path>,
    report: &ComparisonReport,
) -> Result<(), IoIngestError> {
    std::fs::write(path, comparison_csv_string(report))?;
    Ok(())
}

/// Single-run allocation as CSV text: `region,allocation`.
pub fn single_allocation_csv_string(instance: &ProblemInstance, x: &Allocation) -> String {
    let mut out = String::from("region,allocation\n");
    for (j, region) in instance.regions().iter().enumerate() {
        match x {
            Allocation::Integral(v) => {
                let _ = writeln!(out, "{},{}", region, v[j]);
            }
            Allocation::Fractional(v) => {
                let _ = writeln!(out, "{},{}", region, v[j]);
            }
        }
    }
    out
}

pub fn report_json_string(report: &ComparisonReport) -> Result<String, IoIngestError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn write_report_json(
    path: impl AsRef<Path>,
    report: &ComparisonReport,
) -> Result<(), IoIngestError> {
    std::fs::write(path, report_json_string(report)?)?;
    Ok(())
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<ComparisonReport, IoIngestError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Sweep as TSV text, one line per (cell, model).
pub fn sweep_tsv_string(sweep: &EpsilonSweep) -> String {
    let mut out = String::from("epsilon_d\tepsilon_f\tmodel\tfeasible\n");
    for cell in &sweep.cells {
        for model in SweepModel::ALL {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                cell.epsilon_d,
                cell.epsilon_f,
                model.name(),
                cell.feasible_for(model)
            );
        }
    }
    out
}

pub fn emit_sweep_tsv(path: impl AsRef<Path>, sweep: &EpsilonSweep) -> Result<(), IoIngestError> {
    std::fs::write(path, sweep_tsv_string(sweep))?;
    Ok(())
}

/// Rates as CSV text (`group,rate`), groups in sorted order.
pub fn rates_csv_string(rates: &ExposureRates) -> String {
    let mut out = String::from("group,rate\n");
    for (group, rate) in rates.iter() {
        let _ = writeln!(out, "{group},{rate}");
    }
    out
}

pub fn write_rates_csv(
    path: impl AsRef<Path>,
    rates: &ExposureRates,
) -> Result<(), IoIngestError> {
    std::fs::write(path, rates_csv_string(rates))?;
    Ok(())
}
