//! CSV and JSON outputs of a campaign.
//!
//! | file           | columns                                                            |
//! |----------------|--------------------------------------------------------------------|
//! | `traces.csv`   | `run_id,algo,lambda,n,monitor1,monitor2,gap,error`                 |
//! | `finals.csv`   | `run_id,algo,lambda,final_gap,final_error,iters,stop_reason,cluster` |
//! | `chain.csv`    | `seed,cp_gap,dr_gap` (chain campaigns only)                        |
//! | `summary.json` | [`CampaignSummary`]                                                |
//!
//! `monitor1` is the shadow difference, `monitor2` the gap difference. Values
//! that were not computed are empty cells.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use feasilab_core::StopReason;

use crate::campaign::{summarize_runs, Algo, CampaignOutcome, CampaignSummary, ChainRow, RunRecord};
use crate::error::{HarnessError, Result};

pub const TRACES_FILE: &str = "traces.csv";
pub const FINALS_FILE: &str = "finals.csv";
pub const CHAIN_FILE: &str = "chain.csv";
pub const SUMMARY_FILE: &str = "summary.json";

const TRACES_HEADER: [&str; 8] = ["run_id", "algo", "lambda", "n", "monitor1", "monitor2", "gap", "error"];
const FINALS_HEADER: [&str; 8] = [
    "run_id",
    "algo",
    "lambda",
    "final_gap",
    "final_error",
    "iters",
    "stop_reason",
    "cluster",
];
const CHAIN_HEADER: [&str; 3] = ["seed", "cp_gap", "dr_gap"];

/// Shortest round-tripping decimal, switching to exponent form for very
/// small or very large magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

struct Table {
    path: PathBuf,
    out: csv::Writer<BufWriter<File>>,
}

impl Table {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let file = File::create(&path).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        let mut t = Self {
            out: csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(BufWriter::new(file)),
            path,
        };
        t.row(header)?;
        Ok(t)
    }

    fn row<I, T>(&mut self, cells: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.out.write_record(cells).map_err(|source| HarnessError::Csv {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|source| HarnessError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_traces(dir: &Path, records: &[RunRecord], traces: &[Vec<feasilab_core::TraceRow>]) -> Result<()> {
    let mut t = Table::create(dir.join(TRACES_FILE), &TRACES_HEADER)?;
    for (r, rows) in records.iter().zip(traces) {
        for row in rows {
            t.row([
                r.run_id.to_string(),
                r.algo.label().to_owned(),
                opt_float(r.lambda),
                row.n.to_string(),
                format_float(row.monitor_shadow),
                opt_float(row.monitor_gap),
                opt_float(row.gap),
                opt_float(row.error),
            ])?;
        }
    }
    t.finish()
}

pub fn write_finals(dir: &Path, records: &[RunRecord]) -> Result<()> {
    let mut t = Table::create(dir.join(FINALS_FILE), &FINALS_HEADER)?;
    for r in records {
        t.row([
            r.run_id.to_string(),
            r.algo.label().to_owned(),
            opt_float(r.lambda),
            format_float(r.final_gap),
            opt_float(r.final_error),
            r.iters.to_string(),
            r.stop_reason.label().to_owned(),
            r.cluster.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_chain(dir: &Path, rows: &[ChainRow]) -> Result<()> {
    let mut t = Table::create(dir.join(CHAIN_FILE), &CHAIN_HEADER)?;
    for r in rows {
        t.row([r.seed.to_string(), format_float(r.cp_gap), format_float(r.dr_gap)])?;
    }
    t.finish()
}

pub fn write_summary(dir: &Path, summary: &CampaignSummary) -> Result<()> {
    let path = dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(summary).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    text.push('\n');
    fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })
}

/// Writes all tables of a campaign into `dir`, creating it if needed.
pub fn emit_tables(outcome: &CampaignOutcome, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    write_traces(dir, &outcome.records, &outcome.traces)?;
    write_finals(dir, &outcome.records)?;
    if let Some(chain) = &outcome.chain {
        write_chain(dir, chain)?;
    }
    write_summary(dir, &outcome.summary)
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    rdr.records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|source| HarnessError::Csv {
            path: path.to_path_buf(),
            source,
        })
}

fn cell<'a>(path: &Path, row: &'a csv::StringRecord, i: usize) -> Result<&'a str> {
    row.get(i)
        .ok_or_else(|| HarnessError::Table(format!("{}: short row {row:?}", path.display())))
}

fn parse<T: std::str::FromStr>(path: &Path, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| HarnessError::Table(format!("{}: bad {what} {s:?}", path.display())))
}

fn parse_opt(path: &Path, s: &str, what: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(path, s, what).map(Some)
    }
}

pub fn read_finals(dir: &Path) -> Result<Vec<RunRecord>> {
    let path = dir.join(FINALS_FILE);
    read_rows(&path)?
        .iter()
        .map(|row| {
            let algo = cell(&path, row, 1)?;
            let stop = cell(&path, row, 6)?;
            Ok(RunRecord {
                run_id: parse(&path, cell(&path, row, 0)?, "run_id")?,
                algo: Algo::from_label(algo)
                    .ok_or_else(|| HarnessError::Table(format!("{}: unknown algo {algo:?}", path.display())))?,
                lambda: parse_opt(&path, cell(&path, row, 2)?, "lambda")?,
                seed: None,
                u0_sha256: None,
                final_gap: parse(&path, cell(&path, row, 3)?, "final_gap")?,
                final_error: parse_opt(&path, cell(&path, row, 4)?, "final_error")?,
                iters: parse(&path, cell(&path, row, 5)?, "iters")?,
                stop_reason: StopReason::from_label(stop).ok_or_else(|| {
                    HarnessError::Table(format!("{}: unknown stop reason {stop:?}", path.display()))
                })?,
                cluster: parse(&path, cell(&path, row, 7)?, "cluster")?,
                wall_time: Default::default(),
            })
        })
        .collect()
}

pub fn read_chain(dir: &Path) -> Result<Option<Vec<ChainRow>>> {
    let path = dir.join(CHAIN_FILE);
    if !path.exists() {
        return Ok(None);
    }
    read_rows(&path)?
        .iter()
        .map(|row| {
            Ok(ChainRow {
                seed: parse(&path, cell(&path, row, 0)?, "seed")?,
                cp_gap: parse(&path, cell(&path, row, 1)?, "cp_gap")?,
                dr_gap: parse(&path, cell(&path, row, 2)?, "dr_gap")?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

pub fn read_summary(dir: &Path) -> Result<CampaignSummary> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path, source })
}

/// Re-clusters the finals in `dir` with `clusters` centers and rewrites
/// `finals.csv` and `summary.json`. Traces are left untouched.
pub fn resummarize(dir: &Path, clusters: usize) -> Result<CampaignSummary> {
    let mut records = read_finals(dir)?;
    let chain = read_chain(dir)?;
    let starts = if dir.join(SUMMARY_FILE).exists() {
        read_summary(dir)?.starts
    } else {
        Vec::new()
    };
    let mut summary = summarize_runs(&mut records, clusters, chain.as_deref())?;
    summary.starts = starts;
    write_finals(dir, &records)?;
    write_summary(dir, &summary)?;
    Ok(summary)
}
