//! Benchmark runs: dataset loading, parallel grid evaluation, tables and metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use diffgsp_core::experiments::{gen_synthetic, run_cell, GridSpec, GsoChoice, ResultRow, ResultTable};
use diffgsp_core::{Graph, Matrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, DatasetSpec};
use crate::data::load_sensor_dataset;
use crate::error::{Error, Result};

/// Version of the on-disk table and sidecar layout.
pub const FORMAT_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 8] = ["dataset", "gso", "tau", "t", "ree", "nrmse", "iters", "converged"];

/// Ground truth, signals and notes describing how they were produced.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub signals: Matrix,
    pub notes: Vec<String>,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    match spec {
        DatasetSpec::Synthetic(o) => {
            let (graph, signals) = gen_synthetic(o)?;
            let notes = vec![
                format!("random sensor graph: n = {}, avg_degree = {}, seed = {}", o.n, o.avg_degree, o.seed),
                format!(
                    "signals: sin(a <c, theta> + b) + N(0, {}^2), a ~ U[{}, {}], theta uniform direction, b ~ U[0, 2pi)",
                    o.noise_std, o.freq_range.0, o.freq_range.1
                ),
            ];
            Ok(Dataset { graph, signals, notes })
        }
        DatasetSpec::SensorCsv { coords_path, signals_path, radius_km } => {
            let d = load_sensor_dataset(coords_path, signals_path, *radius_km)?;
            let mut notes = vec![
                format!(
                    "radius graph: {} stations, edges up to {} km apart, kernel sigma = {}",
                    d.stations.len(),
                    radius_km,
                    d.sigma
                ),
                "signals: first differences of the hourly series".to_owned(),
            ];
            if !d.dropped.is_empty() {
                notes.push(format!("dropped stations with missing hours: {}", d.dropped.join(", ")));
            }
            Ok(Dataset { graph: d.graph, signals: d.signals, notes })
        }
    }
}

/// Evaluate every cell on a pool of `jobs` threads; rows come back in cell order.
pub fn run_grid_parallel(spec: &GridSpec, g: &Graph, x: &Matrix, jobs: Option<usize>) -> Result<ResultTable> {
    spec.validate()?;
    if x.ncols() != g.n() {
        return Err(diffgsp_core::Error::DimensionMismatch { expected: g.n(), found: x.ncols() }.into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let cells = spec.cells();
    let rows = pool.install(|| cells.par_iter().map(|&c| run_cell(spec, g, x, c)).collect());
    Ok(ResultTable { rows })
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// CSV with header `dataset,gso,tau,t,ree,nrmse,iters,converged`; NaN is an empty field.
pub fn table_to_csv(table: &ResultTable) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &table.rows {
        w.write_record([
            r.dataset.clone(),
            r.gso.label().to_owned(),
            fmt_float(r.tau),
            r.t.to_string(),
            fmt_float(r.ree),
            fmt_float(r.nrmse),
            r.iters.to_string(),
            r.converged.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parse a table written by [`table_to_csv`].
pub fn table_from_csv(text: &str) -> Result<ResultTable> {
    let origin = PathBuf::from("<table>");
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let head = rdr.headers().map_err(|e| Error::parse(&origin, 1, e.to_string()))?.clone();
    if head.iter().ne(CSV_HEADER) {
        return Err(Error::parse(&origin, 1, "unexpected header"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(&origin, 0, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |what: &str| Error::parse(&origin, line, format!("bad {what}"));
        let float = |s: &str, what: &str| if s.is_empty() { Ok(f64::NAN) } else { s.parse().map_err(|_| err(what)) };
        rows.push(ResultRow {
            dataset: rec[0].to_owned(),
            gso: GsoChoice::parse(&rec[1]).ok_or_else(|| err("gso"))?,
            tau: float(&rec[2], "tau")?,
            t: rec[3].parse().map_err(|_| err("t"))?,
            ree: float(&rec[4], "ree")?,
            nrmse: float(&rec[5], "nrmse")?,
            iters: rec[6].parse().map_err(|_| err("iters"))?,
            converged: rec[7].parse().map_err(|_| err("converged"))?,
        });
    }
    Ok(ResultTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ree,
    Nrmse,
}

/// Tau x GSO pivot of one metric, one section per (dataset, t).
pub fn table_to_markdown(table: &ResultTable, metric: Metric) -> String {
    let mut sections: Vec<(String, u32)> = Vec::new();
    let mut gsos: Vec<GsoChoice> = Vec::new();
    for r in &table.rows {
        if !sections.contains(&(r.dataset.clone(), r.t)) {
            sections.push((r.dataset.clone(), r.t));
        }
        if !gsos.contains(&r.gso) {
            gsos.push(r.gso);
        }
    }
    let name = match metric {
        Metric::Ree => "REE",
        Metric::Nrmse => "NRMSE",
    };
    let mut out = String::new();
    for (dataset, t) in sections {
        let _ = writeln!(out, "### {name}: {dataset}, t = {t}\n");
        let _ = write!(out, "| tau |");
        for g in &gsos {
            let _ = write!(out, " {} |", g.label());
        }
        let _ = write!(out, "\n|---|");
        for _ in &gsos {
            let _ = write!(out, "---|");
        }
        out.push('\n');
        let mut taus: Vec<f64> = Vec::new();
        for r in table.rows.iter().filter(|r| r.dataset == dataset && r.t == t) {
            if !taus.iter().any(|v| v.to_bits() == r.tau.to_bits()) {
                taus.push(r.tau);
            }
        }
        for tau in taus {
            let _ = write!(out, "| {tau} |");
            for g in &gsos {
                let v = table
                    .rows
                    .iter()
                    .find(|r| r.dataset == dataset && r.t == t && r.gso == *g && r.tau.to_bits() == tau.to_bits())
                    .map(|r| match metric {
                        Metric::Ree => r.ree,
                        Metric::Nrmse => r.nrmse,
                    });
                match v {
                    Some(v) if !v.is_nan() => {
                        let _ = write!(out, " {v:.4} |");
                    }
                    Some(_) => out.push_str(" NaN |"),
                    None => out.push_str("  |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Sidecar written next to every table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub format_version: u32,
    pub seed: u64,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub dataset_notes: Vec<String>,
    pub timestamp: String,
}

impl RunMetadata {
    pub fn new(cfg: &BenchConfig, notes: Vec<String>) -> Self {
        RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            format_version: FORMAT_VERSION,
            seed: cfg.seed,
            config_hash: cfg.hash(),
            config: cfg.resolved.clone(),
            dataset_notes: notes,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub table: ResultTable,
    pub metadata: RunMetadata,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutput> {
    let data = load_dataset(&cfg.dataset)?;
    log::info!("running {} cells on {} nodes", cfg.grid.cells().len(), data.graph.n());
    let table = run_grid_parallel(&cfg.grid, &data.graph, &data.signals, cfg.jobs)?;
    Ok(BenchOutput { table, metadata: RunMetadata::new(cfg, data.notes) })
}

/// Write `results.csv`, the two markdown pivots and `results.meta.json`.
pub fn write_bench(cfg: &BenchConfig, out: &BenchOutput) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = serde_json::to_string_pretty(&out.metadata).expect("metadata serializes");
    let files = [
        ("results.csv", table_to_csv(&out.table)),
        ("results_ree.md", table_to_markdown(&out.table, Metric::Ree)),
        ("results_nrmse.md", table_to_markdown(&out.table, Metric::Nrmse)),
        ("results.meta.json", meta + "\n"),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
