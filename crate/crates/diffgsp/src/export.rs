//! CSV and JSON writers for embeddings, learned graphs, property reports and lattice frames.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use diffgsp_core::diffusion::DiffusionMapEmbedding;
use diffgsp_core::gso::PropertyReport;
use diffgsp_core::learning::LearnResult;
use diffgsp_core::{Matrix, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// Embedding rows with a leading `#` comment recording `t`, `l` and the bandwidth.
pub fn embedding_csv(emb: &DiffusionMapEmbedding, sigma: f64) -> String {
    let mut out = format!("# t = {}, l = {}, sigma = {}\n", emb.t, emb.l, sigma);
    let head: Vec<String> = (1..=emb.l).map(|j| format!("psi_{j}")).collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for row in emb.coords.row_iter() {
        push_row(&mut out, row.iter().copied());
    }
    out
}

pub fn write_embedding(path: &Path, emb: &DiffusionMapEmbedding, sigma: f64) -> Result<()> {
    write(path, &embedding_csv(emb, sigma))
}

/// `i,j,weight` for every positive weight with `i < j`.
pub fn edge_list_csv(w: &Matrix) -> String {
    let mut out = String::from("i,j,weight\n");
    let n = w.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] > 0.0 {
                let _ = writeln!(out, "{i},{j},{}", w[(i, j)]);
            }
        }
    }
    out
}

/// Run summary stored next to a learned edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSidecar {
    pub iterations: usize,
    pub converged: bool,
    pub constraint_violation: f64,
    pub raw_violation: f64,
    pub objective_trace: Vec<f64>,
    pub settings: Vec<(String, String)>,
}

/// Write the edge list and a `.json` sidecar with the same stem.
pub fn write_learn_result(path: &Path, res: &LearnResult, settings: Vec<(String, String)>) -> Result<()> {
    write(path, &edge_list_csv(&res.w_est))?;
    let meta = LearnSidecar {
        iterations: res.iterations,
        converged: res.converged,
        constraint_violation: res.constraint_violation,
        raw_violation: res.raw_violation,
        objective_trace: res.objective_trace.clone(),
        settings,
    };
    let json = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    write(&path.with_extension("json"), &(json + "\n"))
}

/// `property,residual,pass` rows.
pub fn property_report_csv(r: &PropertyReport) -> String {
    let mut out = String::from("property,residual,pass\n");
    for (name, residual, pass) in r.rows() {
        let _ = writeln!(out, "{name},{residual},{pass}");
    }
    out
}

/// One `t,row,col,value` line per node and frame.
pub fn lattice_csv(frames: &[Vector], side: usize) -> String {
    let mut out = String::from("t,row,col,value\n");
    for (t, f) in frames.iter().enumerate() {
        for (u, v) in f.iter().enumerate() {
            let _ = writeln!(out, "{t},{},{},{v}", u / side, u % side);
        }
    }
    out
}

/// Signals one per row with `node_<k>` columns.
pub fn signals_csv(x: &Matrix) -> String {
    let head: Vec<String> = (0..x.ncols()).map(|k| format!("node_{k}")).collect();
    let mut out = head.join(",");
    out.push('\n');
    for row in x.row_iter() {
        push_row(&mut out, row.iter().copied());
    }
    out
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    write(path, body)
}
