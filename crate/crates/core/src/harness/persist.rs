//! On-disk layout of a run:
//! `config.json`, `records.csv`, `timings.csv`, `aggregates.json`, `curves.csv`
//! and, when ranking is possible, `rank_report.json` plus `rank_report.txt`.
//!
//! `records.csv` is a deterministic function of config and seed. Wall-clock
//! durations live in `timings.csv` so that reruns stay byte-identical.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::al_loop::IterationRecord;
use super::experiment::{CellFailure, ConfigEcho, RunLog, RunSummary, StrategyAggregate};
use crate::error::{Error, Result};
use crate::evaluation::{mean, quantile, std_dev};
use crate::strategies::Strategy;

pub const SCHEMA_VERSION: u32 = 1;
pub const RANK_ALPHA: f64 = 0.05;

const RECORD_HEADER: [&str; 11] = [
    "strategy",
    "repeat",
    "fold",
    "iteration",
    "batch",
    "accuracy",
    "batch_nsr",
    "cumulative_noisy",
    "cumulative_selected",
    "batch_rba",
    "truncated",
];

#[derive(Serialize, Deserialize)]
struct ConfigFile {
    schema_version: u32,
    #[serde(flatten)]
    echo: ConfigEcho,
}

#[derive(Serialize, Deserialize)]
struct AggregatesFile {
    schema_version: u32,
    aggregates: Vec<StrategyAggregate>,
    runs: Vec<RunSummary>,
    failures: Vec<CellFailure>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

pub fn persist_runlog(log: &RunLog, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let config = ConfigFile {
        schema_version: SCHEMA_VERSION,
        echo: log.config.clone(),
    };
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
    let aggregates = AggregatesFile {
        schema_version: SCHEMA_VERSION,
        aggregates: log.aggregates.clone(),
        runs: log.runs.clone(),
        failures: log.failures.clone(),
    };
    fs::write(
        dir.join("aggregates.json"),
        serde_json::to_string_pretty(&aggregates)? + "\n",
    )?;
    write_records(&log.records, &dir.join("records.csv"))?;
    write_timings(&log.records, &dir.join("timings.csv"))?;
    write_curves(log, &dir.join("curves.csv"))?;
    let rank_path = dir.join("rank_report.json");
    match log.rank_report(RANK_ALPHA) {
        Ok(report) => {
            fs::write(&rank_path, serde_json::to_string_pretty(&report)? + "\n")?;
            fs::write(dir.join("rank_report.txt"), report.summary())?;
        }
        Err(_) => {
            // Too few strategies or blocks; drop stale reports from earlier runs.
            let _ = fs::remove_file(&rank_path);
            let _ = fs::remove_file(dir.join("rank_report.txt"));
        }
    }
    Ok(())
}

pub fn load_runlog(dir: &Path) -> Result<RunLog> {
    let config_path = dir.join("config.json");
    if !config_path.is_file() {
        return Err(Error::NotFound(config_path));
    }
    let config_text = fs::read_to_string(&config_path)?;
    check_version(&config_text)?;
    let config: ConfigFile = serde_json::from_str(&config_text)?;

    let agg_path = dir.join("aggregates.json");
    if !agg_path.is_file() {
        return Err(Error::NotFound(agg_path));
    }
    let agg_text = fs::read_to_string(&agg_path)?;
    check_version(&agg_text)?;
    let aggregates: AggregatesFile = serde_json::from_str(&agg_text)?;

    let mut records = read_records(&dir.join("records.csv"))?;
    let timings_path = dir.join("timings.csv");
    if timings_path.is_file() {
        read_timings(&timings_path, &mut records)?;
    }
    Ok(RunLog {
        config: config.echo,
        records,
        runs: aggregates.runs,
        aggregates: aggregates.aggregates,
        failures: aggregates.failures,
    })
}

fn check_version(text: &str) -> Result<()> {
    let probe: VersionProbe = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("missing schema_version: {e}")))?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: probe.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_records(records: &[IterationRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let batch: Vec<String> = r.batch.iter().map(usize::to_string).collect();
        w.write_record([
            r.strategy.name().to_string(),
            r.repeat.to_string(),
            r.fold.to_string(),
            r.iteration.to_string(),
            batch.join(" "),
            r.accuracy.to_string(),
            opt(r.batch_nsr),
            opt(r.cumulative_noisy),
            r.cumulative_selected.to_string(),
            r.batch_rba.to_string(),
            u8::from(r.truncated).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, row: usize, col: usize) -> Result<&str> {
    rec.get(col).ok_or_else(|| Error::Parse {
        row,
        column: RECORD_HEADER[col].to_string(),
        message: "missing value".into(),
    })
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, row: usize, col: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = field(rec, row, col)?;
    s.parse().map_err(|e: T::Err| Error::Parse {
        row,
        column: RECORD_HEADER[col].to_string(),
        message: format!("`{s}`: {e}"),
    })
}

fn parse_opt<T: std::str::FromStr>(rec: &csv::StringRecord, row: usize, col: usize) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if field(rec, row, col)?.is_empty() {
        Ok(None)
    } else {
        parse(rec, row, col).map(Some)
    }
}

pub fn read_records(path: &Path) -> Result<Vec<IterationRecord>> {
    if !path.is_file() {
        return Err(Error::NotFound(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Schema(format!("unexpected records.csv header: {header:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let batch_text = field(&rec, row, 4)?;
        let batch = batch_text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|e| Error::Parse {
                    row,
                    column: "batch".into(),
                    message: format!("`{t}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(IterationRecord {
            strategy: parse::<Strategy>(&rec, row, 0)?,
            repeat: parse(&rec, row, 1)?,
            fold: parse(&rec, row, 2)?,
            iteration: parse(&rec, row, 3)?,
            batch,
            accuracy: parse(&rec, row, 5)?,
            batch_nsr: parse_opt(&rec, row, 6)?,
            cumulative_noisy: parse_opt(&rec, row, 7)?,
            cumulative_selected: parse(&rec, row, 8)?,
            batch_rba: parse(&rec, row, 9)?,
            truncated: parse::<u8>(&rec, row, 10)? != 0,
            duration_secs: 0.0,
        });
    }
    Ok(out)
}

fn write_timings(records: &[IterationRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["strategy", "repeat", "fold", "iteration", "duration_secs"])?;
    for r in records {
        w.write_record([
            r.strategy.name().to_string(),
            r.repeat.to_string(),
            r.fold.to_string(),
            r.iteration.to_string(),
            r.duration_secs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_timings(path: &Path, records: &mut [IterationRecord]) -> Result<()> {
    let mut rdr = csv::Reader::from_path(path)?;
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() != records.len() {
        return Err(Error::Schema(format!(
            "timings.csv has {} rows for {} records",
            rows.len(),
            records.len()
        )));
    }
    for (i, (row, rec)) in rows.iter().zip(records.iter_mut()).enumerate() {
        let key = format!("{},{},{},{}", rec.strategy, rec.repeat, rec.fold, rec.iteration);
        let got = format!(
            "{},{},{},{}",
            &row[0], &row[1], &row[2], &row[3]
        );
        if key != got {
            return Err(Error::Schema(format!("timings.csv row {} is `{got}`, expected `{key}`", i + 1)));
        }
        rec.duration_secs = row[4].parse().map_err(|e| Error::Parse {
            row: i + 1,
            column: "duration_secs".into(),
            message: format!("{e}"),
        })?;
    }
    Ok(())
}

type MetricFn = fn(&IterationRecord) -> Option<f64>;

const CURVE_METRICS: [(&str, MetricFn); 4] = [
    ("accuracy", |r| Some(r.accuracy)),
    ("batch_nsr", |r| r.batch_nsr),
    ("cumulative_nsr", |r| r.cumulative_nsr()),
    ("batch_rba", |r| Some(r.batch_rba)),
];

/// Per strategy and iteration: mean, std and 10th/90th percentiles, once over
/// all runs pooled (`pooled`) and once over per-repeat means across folds
/// (`repeat_mean`).
pub fn write_curves(log: &RunLog, path: &Path) -> Result<()> {
    let cfg = &log.config.config;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["strategy", "iteration", "metric", "variant", "n", "mean", "std", "q10", "q90"])?;
    for &strategy in &cfg.strategies {
        for iteration in 1..=cfg.n_iterations {
            let at: Vec<&IterationRecord> = log
                .records
                .iter()
                .filter(|r| r.strategy == strategy && r.iteration == iteration)
                .collect();
            if at.is_empty() {
                continue;
            }
            for (metric, get) in CURVE_METRICS {
                let pooled: Option<Vec<f64>> = at.iter().map(|r| get(r)).collect();
                let Some(pooled) = pooled else { continue };
                let by_repeat: Vec<f64> = (0..cfg.n_repeats)
                    .filter_map(|rep| {
                        let v: Vec<f64> =
                            at.iter().filter(|r| r.repeat == rep).filter_map(|r| get(r)).collect();
                        mean(&v)
                    })
                    .collect();
                for (variant, values) in [("pooled", &pooled), ("repeat_mean", &by_repeat)] {
                    let stats = [
                        mean(values),
                        std_dev(values),
                        quantile(values, 0.1),
                        quantile(values, 0.9),
                    ];
                    let mut row = vec![
                        strategy.name().to_string(),
                        iteration.to_string(),
                        metric.to_string(),
                        variant.to_string(),
                        values.len().to_string(),
                    ];
                    row.extend(stats.iter().map(|s| opt(*s)));
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
