//! CSV schema: one header row, numeric feature columns, a label column and an
//! optional 0/1 noise column. Decimal point is `.`, encoding UTF-8.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "label";
pub const NOISE_COLUMN: &str = "noise_flag";

pub fn load_csv(path: &Path, label_column: &str, noise_column: Option<&str>) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Schema(format!("missing label column `{label_column}`")))?;
    let noise_idx = match noise_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("missing noise column `{name}`")))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| c != label_idx && Some(c) != noise_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Schema("no feature columns".into()));
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut flags = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: headers[c].clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
        raw_labels.push(record.get(label_idx).unwrap_or("").trim().to_string());
        if let Some(ni) = noise_idx {
            let cell = record.get(ni).unwrap_or("").trim();
            let flag = match cell {
                "1" | "true" | "True" | "TRUE" => true,
                "0" | "false" | "False" | "FALSE" => false,
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: headers[ni].clone(),
                        message: format!("`{cell}` is not a 0/1 flag"),
                    })
                }
            };
            flags.push(flag);
        }
    }

    let n = raw_labels.len();
    let features = Array2::from_shape_vec((n, feature_cols.len()), values)
        .map_err(|e| Error::Shape(e.to_string()))?;

    let mut distinct: Vec<String> = raw_labels.clone();
    distinct.sort_by(compare_labels);
    distinct.dedup();
    let code: BTreeMap<&str, usize> = distinct
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let labels = raw_labels.iter().map(|l| code[l.as_str()]).collect();

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    let n_classes = distinct.len();
    Dataset::with_class_names(
        features,
        labels,
        noise_idx.map(|_| flags),
        n_classes,
        name,
        distinct,
    )
}

/// Numeric labels sort by value, anything else lexicographically.
fn compare_labels(a: &String, b: &String) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Writes `features..., label, noise_flag` (the last column only when flags exist).
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..dataset.n_features()).map(|j| format!("f{j}")).collect();
    header.push(LABEL_COLUMN.into());
    if dataset.noise_flags().is_some() {
        header.push(NOISE_COLUMN.into());
    }
    writer.write_record(&header)?;
    let features = dataset.features();
    for i in 0..dataset.n_samples() {
        let mut row: Vec<String> = features.row(i).iter().map(|v| v.to_string()).collect();
        row.push(dataset.class_names()[dataset.labels()[i]].clone());
        if let Some(flags) = dataset.noise_flags() {
            row.push(if flags[i] { "1" } else { "0" }.into());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn encodes_string_labels_in_sorted_order() {
        let f = write_tmp("x,y,label\n0,1,b\n1,2,a\n2,3,b\n3,4,a\n");
        let d = load_csv(f.path(), "label", None).unwrap();
        assert_eq!(d.labels(), &[1, 0, 1, 0]);
        assert_eq!(d.n_classes(), 2);
        assert_eq!(d.class_names(), &["a".to_string(), "b".to_string()]);
        assert!(d.noise_flags().is_none());
    }

    #[test]
    fn spec_example_labels() {
        let f = write_tmp("x,label\n0,a\n1,b\n2,a\n3,b\n");
        let d = load_csv(f.path(), "label", None).unwrap();
        assert_eq!(d.labels(), &[0, 1, 0, 1]);
    }

    #[test]
    fn numeric_labels_sort_by_value() {
        let f = write_tmp("x,label\n0,10\n1,2\n2,10\n");
        let d = load_csv(f.path(), "label", None).unwrap();
        assert_eq!(d.labels(), &[1, 0, 1]);
    }

    #[test]
    fn reads_noise_column() {
        let f = write_tmp("x,label,noisy\n0,a,1\n1,b,0\n2,a,0\n3,b,1\n");
        let d = load_csv(f.path(), "label", Some("noisy")).unwrap();
        assert_eq!(d.noise_flags().unwrap(), &[true, false, false, true]);
        assert_eq!(d.n_features(), 1);
    }

    #[test]
    fn nan_cell_is_a_parse_error() {
        let f = write_tmp("x,y,label\n0,1,a\nNaN,2,b\n");
        match load_csv(f.path(), "label", None).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_a_parse_error() {
        let f = write_tmp("x,label\nabc,a\n1,b\n");
        assert!(matches!(load_csv(f.path(), "label", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_label_column_is_a_schema_error() {
        let f = write_tmp("x,y\n0,1\n");
        assert!(matches!(load_csv(f.path(), "label", None), Err(Error::Schema(_))));
    }

    #[test]
    fn write_then_load_preserves_dataset() {
        let (data, _) = super::super::make_noisy_blobs_with_layout(&super::super::BlobConfig {
            n_samples: 50,
            n_features: 3,
            n_classes: 3,
            n_blobs: 6,
            n_noisy_blobs: 2,
            seed: 5,
            ..super::super::BlobConfig::low_dimensional(0)
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("blobs.csv");
        write_csv(&data, &path).unwrap();
        let back = load_csv(&path, LABEL_COLUMN, Some(NOISE_COLUMN)).unwrap();
        assert_eq!(back.features(), data.features());
        assert_eq!(back.labels(), data.labels());
        assert_eq!(back.noise_flags(), data.noise_flags());
    }
}
