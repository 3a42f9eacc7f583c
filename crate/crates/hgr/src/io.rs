use std::path::Path;

use hgr_core::datagen::{generate, to_csv, SyntheticSpec};
use hgr_core::fairtrain::RawTable;
use hgr_core::{HgrError, SampleVector};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses CSV bytes with a mandatory header row. Cells are trimmed.
pub fn parse_table(bytes: &[u8]) -> Result<RawTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::Input("csv has no header row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    Ok(RawTable { headers, rows })
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn numeric_column(table: &RawTable, name: &str) -> Result<Vec<f64>, CliError> {
    let idx = table
        .headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| HgrError::MissingColumn(name.to_string()))?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(row, cells)| {
            let cell = cells.get(idx).map(String::as_str).unwrap_or("");
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    HgrError::NonNumericValue {
                        column: name.to_string(),
                        row,
                        value: cell.to_string(),
                    }
                    .into()
                })
        })
        .collect()
}

/// Two named columns (the first two when `columns` is `None`) as a pair.
pub fn pair_from_table(
    table: &RawTable,
    columns: Option<(&str, &str)>,
) -> Result<(SampleVector, SampleVector), CliError> {
    if table.rows.is_empty() {
        return Err(HgrError::EmptyDataset.into());
    }
    let (ca, cb) = match columns {
        Some(c) => c,
        None => {
            if table.headers.len() < 2 {
                return Err(CliError::Input("csv needs at least two columns".into()));
            }
            (table.headers[0].as_str(), table.headers[1].as_str())
        }
    };
    let a = SampleVector::new(numeric_column(table, ca)?)?.with_name(ca);
    let b = SampleVector::new(numeric_column(table, cb)?)?.with_name(cb);
    Ok((a, b))
}

/// A pair of variables with the fingerprint of the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedPair {
    pub a: SampleVector,
    pub b: SampleVector,
    pub sha256: String,
    pub spec: Option<SyntheticSpec>,
}

/// Reads `--input` (with optional `--columns a,b`) or generates `--synthetic`.
/// Exactly one source must be given.
pub fn load_pair(
    input: Option<&Path>,
    columns: Option<&str>,
    synthetic: Option<&str>,
) -> Result<LoadedPair, CliError> {
    match (input, synthetic) {
        (Some(path), None) => {
            let bytes = read_file(path)?;
            let table = parse_table(&bytes)?;
            let cols = columns
                .map(|c| {
                    c.split_once(',')
                        .map(|(x, y)| (x.trim(), y.trim()))
                        .ok_or_else(|| CliError::Input(format!("--columns expects A,B, got {c:?}")))
                })
                .transpose()?;
            let (a, b) = pair_from_table(&table, cols)?;
            Ok(LoadedPair {
                a,
                b,
                sha256: sha256_hex(&bytes),
                spec: None,
            })
        }
        (None, Some(text)) => {
            let spec = SyntheticSpec::parse(text)?;
            let (a, b) = generate(&spec)?;
            let sha256 = sha256_hex(to_csv(&a, &b).as_bytes());
            Ok(LoadedPair {
                a,
                b,
                sha256,
                spec: Some(spec),
            })
        }
        (None, None) => Err(CliError::Input(
            "one of --input or --synthetic is required".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Input(
            "--input and --synthetic are mutually exclusive".into(),
        )),
    }
}

/// Writes rows of numbers as CSV with a `.` decimal separator and
/// round-trip precision.
pub fn write_numeric_csv(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}
