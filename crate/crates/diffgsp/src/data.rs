//! CSV ingestion: coordinates, hourly signal tables, numeric matrices and edge lists.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use diffgsp_core::graph::{pairwise_distances, radius_graph, DistanceMetric};
use diffgsp_core::{build_graph, Graph, Matrix};

use crate::error::{Error, Result};

/// Node positions keyed by station id.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    pub ids: Vec<String>,
    /// One row per station: `(lat, lon)` in degrees or `(x, y)`.
    pub points: Matrix,
    pub metric: DistanceMetric,
}

/// Hourly readings, one column per station; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub timestamps: Vec<String>,
    pub stations: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone)]
pub struct SensorDataset {
    pub graph: Graph,
    /// First differences, rows = hours, columns = kept stations.
    pub signals: Matrix,
    pub stations: Vec<String>,
    /// Stations removed because of missing hours.
    pub dropped: Vec<String>,
    /// Kernel bandwidth used for the edge weights.
    pub sigma: f64,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::parse(path, line, e.to_string())
}

fn headers(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    Ok(rdr.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_owned).collect())
}

fn number(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::parse(path, line, format!("`{field}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(path, line, format!("`{field}` is not finite")))
    }
}

/// Read `id,lat,lon` (great-circle) or `id,x,y` (Euclidean) rows.
pub fn read_coordinates(path: &Path) -> Result<Coordinates> {
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    let lower: Vec<String> = head.iter().map(|h| h.to_ascii_lowercase()).collect();
    let metric = match lower.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["id", "lat", "lon"] => DistanceMetric::GreatCircle,
        ["id", "x", "y"] => DistanceMetric::Euclidean,
        _ => return Err(Error::parse(path, 1, "expected header `id,lat,lon` or `id,x,y`")),
    };
    let mut ids = Vec::new();
    let mut flat = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        ids.push(rec[0].to_owned());
        flat.push(number(path, line, &rec[1])?);
        flat.push(number(path, line, &rec[2])?);
    }
    let points = Matrix::from_row_slice(ids.len(), 2, &flat);
    Ok(Coordinates { ids, points, metric })
}

fn check_timestamp(path: &Path, line: u64, s: &str) -> Result<()> {
    let ok = DateTime::parse_from_rfc3339(s).is_ok()
        || ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"]
            .iter()
            .any(|f| NaiveDateTime::parse_from_str(s, f).is_ok())
        || NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok();
    if ok {
        Ok(())
    } else {
        Err(Error::parse(path, line, format!("`{s}` is not an ISO-8601 timestamp")))
    }
}

/// Read a `timestamp,station_1,...` table; empty fields are missing values.
pub fn read_signals(path: &Path) -> Result<SignalTable> {
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    if head.len() < 2 || !head[0].eq_ignore_ascii_case("timestamp") {
        return Err(Error::parse(path, 1, "expected header `timestamp,station_1,...`"));
    }
    let stations = head[1..].to_vec();
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        check_timestamp(path, line, &rec[0])?;
        timestamps.push(rec[0].to_owned());
        let row = rec
            .iter()
            .skip(1)
            .map(|f| if f.is_empty() { Ok(None) } else { number(path, line, f).map(Some) })
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    Ok(SignalTable { timestamps, stations, values })
}

/// Median of the strict upper triangle of a distance matrix.
pub fn median_distance(d: &Matrix) -> Option<f64> {
    let n = d.nrows();
    let mut v: Vec<f64> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| d[(i, j)]).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
}

/// Build the ground-truth radius graph and differenced signals of a sensor network.
///
/// Stations with any missing hour are dropped and reported. Edge weights use a
/// Gaussian kernel whose bandwidth is the median pairwise distance.
pub fn load_sensor_dataset(coords_path: &Path, signals_path: &Path, radius: f64) -> Result<SensorDataset> {
    let coords = read_coordinates(coords_path)?;
    let table = read_signals(signals_path)?;
    let index: HashMap<&str, usize> = coords.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (col, name) in table.stations.iter().enumerate() {
        let row = *index.get(name.as_str()).ok_or_else(|| Error::StationMismatch(name.clone()))?;
        if table.values.iter().any(|r| r[col].is_none()) {
            log::warn!("dropping station `{name}`: missing hours");
            dropped.push(name.clone());
        } else {
            kept.push((col, row));
        }
    }
    if kept.len() < 2 {
        return Err(diffgsp_core::Error::TooSmall(kept.len()).into());
    }
    let hours = table.values.len();
    if hours < 3 {
        return Err(diffgsp_core::Error::TooFewObservations(hours.saturating_sub(1)).into());
    }
    let points = Matrix::from_fn(kept.len(), 2, |i, k| coords.points[(kept[i].1, k)]);
    let dist = pairwise_distances(&points, coords.metric)?;
    let sigma = median_distance(&dist).filter(|s| *s > 0.0).ok_or(diffgsp_core::Error::DegenerateData)?;
    let graph = radius_graph(&points, radius, coords.metric, sigma)?;
    let signals = Matrix::from_fn(hours - 1, kept.len(), |h, i| {
        let col = kept[i].0;
        table.values[h + 1][col].unwrap_or(f64::NAN) - table.values[h][col].unwrap_or(f64::NAN)
    });
    let stations = kept.iter().map(|&(col, _)| table.stations[col].clone()).collect();
    Ok(SensorDataset { graph, signals, stations, dropped, sigma })
}

/// Numeric CSV with a header row; returns column names and the data.
pub fn read_matrix(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    let mut flat = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != head.len() {
            return Err(Error::parse(path, line, format!("expected {} fields, found {}", head.len(), rec.len())));
        }
        for f in rec.iter() {
            flat.push(number(path, line, f)?);
        }
        rows += 1;
    }
    Ok((head, Matrix::from_row_slice(rows, flat.len().checked_div(rows).unwrap_or(0), &flat)))
}

/// Edge list `i,j,weight` (0-based, each undirected edge once) into a graph.
pub fn read_edge_list(path: &Path, nodes: Option<usize>) -> Result<Graph> {
    let mut rdr = reader(path)?;
    let head = headers(path, &mut rdr)?;
    if head != ["i", "j", "weight"] {
        return Err(Error::parse(path, 1, "expected header `i,j,weight`"));
    }
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let idx = |f: &str| f.parse::<usize>().map_err(|_| Error::parse(path, line, format!("bad node index `{f}`")));
        edges.push((idx(&rec[0])?, idx(&rec[1])?, number(path, line, &rec[2])?));
    }
    let n = nodes.unwrap_or_else(|| edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0));
    let mut w = Matrix::zeros(n, n);
    for (i, j, v) in edges {
        if i >= n || j >= n {
            return Err(diffgsp_core::Error::NodeOutOfRange(i.max(j)).into());
        }
        w[(i, j)] = v;
        w[(j, i)] = v;
    }
    Ok(build_graph(w, None)?)
}
