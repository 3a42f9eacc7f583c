use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HgrError, Result};
use crate::linalg::Matrix;
use crate::stats;

/// String cells with a header row, as read from a CSV file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HgrError::MissingColumn(name.to_string()))
    }

    fn numeric_column(&self, idx: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(row, cells)| {
                let cell = cells.get(idx).map(String::as_str).unwrap_or("");
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| HgrError::NonNumericValue {
                        column: self.headers[idx].clone(),
                        row,
                        value: cell.to_string(),
                    })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[default]
    Regression,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// Names the target, the protected attribute and the categorical inputs;
/// every other column is treated as a continuous input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub target: String,
    pub protected: String,
    pub categorical: Vec<String>,
    pub task: Task,
}

impl Schema {
    /// Parses `target=NAME,protected=NAME[,categorical=NAME...][,task=regression|binary]`.
    pub fn parse(text: &str) -> Result<Schema> {
        let mut target = None;
        let mut protected = None;
        let mut categorical = Vec::new();
        let mut task = Task::Regression;
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                HgrError::InvalidConfig(format!("schema item {item:?} is not key=value"))
            })?;
            let value = value.trim().to_string();
            match key.trim() {
                "target" => target = Some(value),
                "protected" => protected = Some(value),
                "categorical" => categorical.push(value),
                "task" => {
                    task = match value.as_str() {
                        "regression" => Task::Regression,
                        "binary" => Task::Binary,
                        _ => {
                            return Err(HgrError::InvalidConfig(format!("unknown task {value:?}")))
                        }
                    }
                }
                other => {
                    return Err(HgrError::InvalidConfig(format!(
                        "unknown schema key {other:?}"
                    )))
                }
            }
        }
        Ok(Schema {
            target: target.ok_or_else(|| HgrError::InvalidConfig("schema needs target=".into()))?,
            protected: protected
                .ok_or_else(|| HgrError::InvalidConfig("schema needs protected=".into()))?,
            categorical,
            task,
        })
    }
}

/// Model-ready data: standardized continuous inputs, one-hot categorical
/// groups, a target scaled to `[0, 1]` and the raw protected attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    pub target: Vec<f64>,
    pub protected: Vec<f64>,
    pub feature_names: Vec<String>,
    pub column_kinds: Vec<ColumnKind>,
    /// Continuous columns dropped because they had zero variance.
    pub dropped: Vec<String>,
    pub task: Task,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Rows at `indices`, in that order. Preprocessing is not recomputed.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let m = self.features.cols();
        let mut data = Vec::with_capacity(indices.len() * m);
        for &i in indices {
            data.extend_from_slice(self.features.row(i));
        }
        Dataset {
            features: Matrix::from_row_major(indices.len(), m, data),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            protected: indices.iter().map(|&i| self.protected[i]).collect(),
            feature_names: self.feature_names.clone(),
            column_kinds: self.column_kinds.clone(),
            dropped: self.dropped.clone(),
            task: self.task,
        }
    }
}

/// Normalizes the target, standardizes continuous inputs and one-hot encodes
/// categorical ones. The protected attribute stays among the inputs.
pub fn preprocess(table: &RawTable, schema: &Schema) -> Result<Dataset> {
    if table.rows.is_empty() {
        return Err(HgrError::EmptyDataset);
    }
    let target_idx = table.column_index(&schema.target)?;
    let protected_idx = table.column_index(&schema.protected)?;
    for name in &schema.categorical {
        table.column_index(name)?;
    }
    if schema.categorical.contains(&schema.protected) {
        return Err(HgrError::InvalidConfig(
            "protected attribute must be continuous".into(),
        ));
    }

    let raw_target = table.numeric_column(target_idx)?;
    let target = normalize_target(&raw_target, schema.task)?;
    let protected = table.numeric_column(protected_idx)?;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut dropped = Vec::new();
    for (idx, header) in table.headers.iter().enumerate() {
        if idx == target_idx {
            continue;
        }
        if schema.categorical.contains(header) {
            let levels: BTreeMap<&str, usize> = {
                let mut set: Vec<&str> = table
                    .rows
                    .iter()
                    .map(|r| r.get(idx).map(|s| s.trim()).unwrap_or(""))
                    .collect();
                set.sort_unstable();
                set.dedup();
                set.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
            };
            let mut onehot = alloc::vec![alloc::vec![0.0; table.rows.len()]; levels.len()];
            for (row, cells) in table.rows.iter().enumerate() {
                let level = cells.get(idx).map(|s| s.trim()).unwrap_or("");
                onehot[levels[level]][row] = 1.0;
            }
            for (level, col) in levels.keys().zip(onehot) {
                names.push(format!("{header}={level}"));
                kinds.push(ColumnKind::Categorical);
                columns.push(col);
            }
        } else {
            let values = table.numeric_column(idx)?;
            let sd = stats::std_dev(&values);
            if !(sd > 0.0) {
                dropped.push(header.clone());
                continue;
            }
            names.push(header.clone());
            kinds.push(ColumnKind::Continuous);
            columns.push(stats::standardized(&values));
        }
    }
    if columns.is_empty() {
        return Err(HgrError::EmptyDataset);
    }
    Ok(Dataset {
        features: Matrix::from_columns(&columns),
        target,
        protected,
        feature_names: names,
        column_kinds: kinds,
        dropped,
        task: schema.task,
    })
}

fn normalize_target(y: &[f64], task: Task) -> Result<Vec<f64>> {
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(HgrError::ZeroVariance);
    }
    if task == Task::Binary && y.iter().any(|v| *v != min && *v != max) {
        return Err(HgrError::InvalidConfig(
            "binary target must take exactly two values".into(),
        ));
    }
    Ok(y.iter().map(|v| (v - min) / (max - min)).collect())
}

/// Synthetic fairness benchmark: three Gaussian inputs, a three-level group
/// and a protected attribute `z ~ U[-1, 1]` that enters the target through
/// `3 z^2`, so the target depends on `z` non-linearly but barely linearly.
pub fn synthetic_fairness(n: usize, seed: u64) -> (RawTable, Schema) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let headers = ["x1", "x2", "x3", "group", "z", "y"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let groups = ["a", "b", "c"];
    let effects = [0.0, 0.5, -0.5];
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let x2: f64 = StandardNormal.sample(&mut rng);
        let x3: f64 = StandardNormal.sample(&mut rng);
        let g = rng.random_range(0..3usize);
        let z: f64 = rng.random_range(-1.0..1.0);
        let e: f64 = StandardNormal.sample(&mut rng);
        let y = x1 + 0.5 * x2 - 0.25 * x3 + effects[g] + 3.0 * z * z + 0.3 * e;
        rows.push(alloc::vec![
            format!("{x1:?}"),
            format!("{x2:?}"),
            format!("{x3:?}"),
            groups[g].to_string(),
            format!("{z:?}"),
            format!("{y:?}"),
        ]);
    }
    let schema = Schema {
        target: "y".into(),
        protected: "z".into(),
        categorical: alloc::vec!["group".into()],
        task: Task::Regression,
    };
    (RawTable { headers, rows }, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(headers: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn continuous_columns_are_standardized() {
        let t = table(
            &["u", "z", "y"],
            &[&["1", "0.5", "3"], &["2", "0.1", "1"], &["4", "0.9", "2"]],
        );
        let schema = Schema::parse("target=y,protected=z").unwrap();
        let d = preprocess(&t, &schema).unwrap();
        for j in 0..d.features.cols() {
            let col = d.features.column(j);
            assert!(stats::mean(&col).abs() < 1e-8);
            assert!((stats::variance(&col) - 1.0).abs() < 1e-8);
        }
        assert_eq!(d.target, vec![1.0, 0.0, 0.5]);
        assert_eq!(d.protected, vec![0.5, 0.1, 0.9]);
    }

    #[test]
    fn categorical_one_hot() {
        let t = table(
            &["c", "z", "y"],
            &[
                &["red", "1", "0"],
                &["blue", "2", "1"],
                &["green", "3", "1"],
                &["red", "0", "0"],
            ],
        );
        let schema = Schema::parse("target=y,protected=z,categorical=c").unwrap();
        let d = preprocess(&t, &schema).unwrap();
        assert_eq!(&d.feature_names[..3], &["c=blue", "c=green", "c=red"]);
        for i in 0..d.len() {
            let s: f64 = d.features.row(i)[..3].iter().sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn missing_and_non_numeric_columns() {
        let t = table(&["u", "z", "y"], &[&["1", "0.5", "3"], &["x", "0.1", "1"]]);
        let schema = Schema::parse("target=y,protected=w").unwrap();
        assert_eq!(
            preprocess(&t, &schema),
            Err(HgrError::MissingColumn("w".into()))
        );
        let schema = Schema::parse("target=y,protected=z").unwrap();
        assert!(matches!(
            preprocess(&t, &schema),
            Err(HgrError::NonNumericValue { row: 1, .. })
        ));
        let empty = table(&["z", "y"], &[]);
        assert_eq!(preprocess(&empty, &schema), Err(HgrError::EmptyDataset));
    }

    #[test]
    fn binary_target_must_have_two_values() {
        let t = table(&["z", "y"], &[&["1", "0"], &["2", "1"], &["3", "2"]]);
        let schema = Schema::parse("target=y,protected=z,task=binary").unwrap();
        assert!(preprocess(&t, &schema).is_err());
    }

    #[test]
    fn synthetic_fairness_is_seeded() {
        let (t1, s) = synthetic_fairness(50, 3);
        let (t2, _) = synthetic_fairness(50, 3);
        assert_eq!(t1, t2);
        let d = preprocess(&t1, &s).unwrap();
        assert_eq!(d.features.cols(), 3 + 3 + 1);
    }
}
