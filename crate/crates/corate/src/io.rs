//! CSV and JSON file formats.
//!
//! Tidy input CSVs have the header `user,item,rating` with an optional
//! group column carried as opaque per-user metadata. Missing ratings are
//! absent rows, not sentinel values.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{EvaluationReport, GroupSummaryRow, SummaryRow};
use crate::ratings::RatingRecord;
use crate::similarity::SimilarityMatrix;

/// Parsed tidy CSV: the records plus any per-user group labels found.
#[derive(Debug, Clone)]
pub struct TidyData {
    pub records: Vec<RatingRecord>,
    pub groups: HashMap<String, String>,
}

/// Read a tidy CSV with header `user,item,rating[,<group_column>]`.
///
/// A user appearing with two different group labels is an error.
pub fn read_tidy_csv(path: &Path, group_column: Option<&str>) -> Result<TidyData> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let user_col = col("user").ok_or_else(|| missing_column(path, "user"))?;
    let item_col = col("item").ok_or_else(|| missing_column(path, "item"))?;
    let rating_col = col("rating").ok_or_else(|| missing_column(path, "rating"))?;
    let group_col = match group_column {
        Some(name) => Some(col(name).ok_or_else(|| missing_column(path, name))?),
        None => None,
    };

    let mut records = Vec::new();
    let mut groups: HashMap<String, String> = HashMap::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let user = row
            .get(user_col)
            .ok_or_else(|| bad_row(path, line))?
            .to_string();
        let item = row
            .get(item_col)
            .ok_or_else(|| bad_row(path, line))?
            .to_string();
        let rating: f64 = row
            .get(rating_col)
            .ok_or_else(|| bad_row(path, line))?
            .trim()
            .parse()
            .map_err(|_| {
                Error::Config(format!(
                    "{}: row {}: rating is not a number",
                    path.display(),
                    line + 2
                ))
            })?;
        if let Some(gc) = group_col {
            let group = row.get(gc).ok_or_else(|| bad_row(path, line))?.to_string();
            if let Some(prev) = groups.insert(user.clone(), group.clone()) {
                if prev != group {
                    return Err(Error::Config(format!(
                        "{}: user `{user}` has conflicting group labels `{prev}` and `{group}`",
                        path.display()
                    )));
                }
            }
        }
        records.push(RatingRecord::new(user, item, rating));
    }
    Ok(TidyData { records, groups })
}

fn missing_column(path: &Path, name: &str) -> Error {
    Error::Config(format!(
        "{}: missing required column `{name}`",
        path.display()
    ))
}

fn bad_row(path: &Path, line: usize) -> Error {
    Error::Config(format!("{}: row {} is malformed", path.display(), line + 2))
}

/// Write tidy records, optionally with a group column.
pub fn write_tidy_csv(
    path: &Path,
    records: &[RatingRecord],
    groups: Option<&HashMap<String, String>>,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    match groups {
        Some(groups) => {
            writer.write_record(["user", "item", "rating", "group"])?;
            for r in records {
                let group = groups.get(&r.user_id).map(String::as_str).unwrap_or("");
                writer.write_record([
                    r.user_id.as_str(),
                    r.item_id.as_str(),
                    &format_float(r.rating),
                    group,
                ])?;
            }
        }
        None => {
            writer.write_record(["user", "item", "rating"])?;
            for r in records {
                writer.write_record([
                    r.user_id.as_str(),
                    r.item_id.as_str(),
                    &format_float(r.rating),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Shortest round-trip float formatting (what `ryu` produces), used in all
/// CSV output so reruns are byte-identical.
fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    // Trim a trailing ".0" for integer values to keep files readable.
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // csv's internal serializer uses ryu; `{}` on f64 matches its shortest
    // representation for finite values.
    format!("{v}")
}

/// Completion output row for `complete`: one previously missing cell.
#[derive(Debug, Clone, Serialize)]
pub struct CompletionRow {
    pub user: String,
    pub item: String,
    pub prediction: f64,
    pub clipped: bool,
}

pub fn write_completions_csv(path: &Path, rows: &[CompletionRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["user", "item", "prediction", "clipped"])?;
    for r in rows {
        writer.write_record([
            r.user.as_str(),
            r.item.as_str(),
            &format_float(r.prediction),
            if r.clipped { "true" } else { "false" },
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write the per-(estimator, sparsity, iteration, user) record table.
pub fn write_report_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "estimator",
        "sparsity",
        "iteration",
        "user",
        "group",
        "rmse",
        "normalized_error",
        "n_test_cells",
    ])?;
    for r in &report.records {
        writer.write_record([
            r.estimator.as_str(),
            &format_float(r.sparsity),
            &r.iteration.to_string(),
            r.user.as_str(),
            r.group.as_deref().unwrap_or(""),
            &format_float(r.rmse),
            &format_float(r.normalized_error),
            &r.n_test_cells.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write per-(estimator, sparsity) grand means with bootstrap bounds.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "estimator",
        "sparsity",
        "normalized_error",
        "ci_low",
        "ci_high",
        "n_users",
    ])?;
    for r in rows {
        writer.write_record([
            r.estimator.as_str(),
            &format_float(r.sparsity),
            &format_float(r.normalized_error),
            &format_float(r.ci_low),
            &format_float(r.ci_high),
            &r.n_users.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_group_summary_csv(path: &Path, rows: &[GroupSummaryRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "group",
        "estimator",
        "sparsity",
        "normalized_error",
        "n_users",
    ])?;
    for r in rows {
        writer.write_record([
            r.group.as_str(),
            r.estimator.as_str(),
            &format_float(r.sparsity),
            &format_float(r.normalized_error),
            &r.n_users.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Dump a similarity matrix with user labels on both axes; undefined entries
/// are empty fields.
pub fn write_similarity_csv(
    path: &Path,
    sim: &SimilarityMatrix,
    user_labels: &[String],
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["user".to_string()];
    header.extend(user_labels.iter().cloned());
    writer.write_record(&header)?;
    for (u, label) in user_labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        for v in 0..user_labels.len() {
            row.push(match sim.get(u, v) {
                Some(s) => format_float(s),
                None => String::new(),
            });
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Serialize any JSON-able document to a file with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}
