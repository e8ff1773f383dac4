//! CSV ingestion and output for prediction and training files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use mcdp_core::difftrain::Dataset;
use mcdp_core::GroupedPredictions;

use crate::CliError;

fn open(path: &Path) -> Result<csv::Reader<File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
}

fn headers(reader: &mut csv::Reader<File>) -> Result<Vec<String>, CliError> {
    let h = reader
        .headers()
        .map_err(|e| CliError::Schema(format!("line 1: unreadable header: {e}")))?;
    Ok(h.iter().map(str::to_owned).collect())
}

fn parse_real(field: &str, name: &str, line: u64) -> Result<f64, CliError> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Schema(format!("line {line}: {name} {field:?} is not a decimal number")))
}

fn parse_binary(field: &str, name: &str, line: u64) -> Result<u8, CliError> {
    match field {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(CliError::Schema(format!("line {line}: {name} must be 0 or 1, got {field:?}"))),
    }
}

/// Rows of `records`, each with its 1-based file line number.
fn records(
    reader: &mut csv::Reader<File>,
    width: usize,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), CliError>> + '_ {
    reader.records().map(move |r| {
        let rec = r.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Schema(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(CliError::Schema(format!(
                "line {line}: expected {width} fields, found {}",
                rec.len()
            )));
        }
        Ok((line, rec))
    })
}

/// Read `prediction,group[,label]`.
pub fn read_predictions(path: &Path) -> Result<GroupedPredictions, CliError> {
    let mut reader = open(path)?;
    let header = headers(&mut reader)?;
    let with_labels = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["prediction", "group"] => false,
        ["prediction", "group", "label"] => true,
        _ => {
            return Err(CliError::Schema(format!(
                "line 1: header must be `prediction,group` or `prediction,group,label`, got `{}`",
                header.join(",")
            )))
        }
    };

    let (mut scores, mut groups, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for rec in records(&mut reader, header.len()) {
        let (line, rec) = rec?;
        let score = parse_real(&rec[0], "prediction", line)?;
        if !(0.0..=1.0).contains(&score) {
            return Err(CliError::Schema(format!("line {line}: prediction {score} is outside [0, 1]")));
        }
        scores.push(score);
        groups.push(parse_binary(&rec[1], "group", line)?);
        if with_labels {
            labels.push(parse_binary(&rec[2], "label", line)?);
        }
    }
    GroupedPredictions::new(&scores, &groups, with_labels.then_some(labels.as_slice()))
        .map_err(|e| CliError::Schema(e.to_string()))
}

/// Read `label,group,f1,f2,...`.
pub fn read_training(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = open(path)?;
    let header = headers(&mut reader)?;
    if header.len() < 3 || header[0] != "label" || header[1] != "group" {
        return Err(CliError::Schema(format!(
            "line 1: header must be `label,group,f1,...` with at least one feature, got `{}`",
            header.join(",")
        )));
    }
    let n_features = header.len() - 2;
    let (mut features, mut labels, mut groups) = (Vec::new(), Vec::new(), Vec::new());
    for rec in records(&mut reader, header.len()) {
        let (line, rec) = rec?;
        labels.push(parse_binary(&rec[0], "label", line)?);
        groups.push(parse_binary(&rec[1], "group", line)?);
        for (j, field) in rec.iter().skip(2).enumerate() {
            features.push(parse_real(field, &header[j + 2], line)?);
        }
    }
    Dataset::new(n_features, features, labels, groups).map_err(|e| CliError::Schema(e.to_string()))
}

pub fn write_training(path: &Path, data: &Dataset) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str("label,group");
    for j in 1..=data.n_features() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for i in 0..data.len() {
        out.push_str(&format!("{},{}", data.labels()[i], data.groups()[i]));
        for v in data.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
