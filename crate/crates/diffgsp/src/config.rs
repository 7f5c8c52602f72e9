//! Flat `key = value` benchmark configuration.
//!
//! Lines starting with `#` are comments. Lists are comma separated. Every key
//! can also be given on the command line as `--set key=value`, which wins over
//! the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use diffgsp_core::experiments::{FilterFamily, GridSpec, GsoChoice, SyntheticOptions};
use diffgsp_core::gso::{DmMode, TikhonovSign};
use diffgsp_core::learning::LearnMethod;
use diffgsp_core::metrics::ReeMode;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Keys accepted in config files, in rendering order.
pub const KEYS: &[&str] = &[
    "dataset",
    "name",
    "n",
    "m_signals",
    "seed",
    "avg_degree",
    "noise_std",
    "coords_path",
    "signals_path",
    "radius_km",
    "gso_list",
    "tau_grid",
    "t_grid",
    "filter",
    "tikhonov_sign",
    "method",
    "alpha",
    "dm_l",
    "dm_time",
    "dm_mode",
    "max_iters",
    "tol",
    "step",
    "projection_iters",
    "ree_mode",
    "eig_floor",
    "ree_k",
    "output_dir",
    "jobs",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Synthetic(SyntheticOptions),
    SensorCsv { coords_path: PathBuf, signals_path: PathBuf, radius_km: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dataset: DatasetSpec,
    pub grid: GridSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every available core.
    pub jobs: Option<usize>,
    /// Resolved `key = value` pairs, used for hashing and the metadata record.
    pub resolved: BTreeMap<String, String>,
}

/// Parse `key = value` lines into a map, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::parse(origin, no as u64 + 1, "expected `key = value`"))?;
        let key = k.trim().to_owned();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::parse(origin, no as u64 + 1, format!("unknown key `{key}`")));
        }
        if out.insert(key.clone(), v.trim().to_owned()).is_some() {
            return Err(Error::parse(origin, no as u64 + 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

/// Split a `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Usage(format!("override `{s}` is not key=value")))?;
    let key = k.trim().to_owned();
    if !KEYS.contains(&key.as_str()) {
        return Err(Error::Usage(format!("unknown key `{key}`")));
    }
    Ok((key, v.trim().to_owned()))
}

fn bad(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.into(), msg: msg.into() }
}

struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Fields<'_> {
    fn raw(&mut self, key: &str, default: &str) -> String {
        let v = self.map.get(key).cloned().unwrap_or_else(|| default.to_owned());
        self.resolved.insert(key.to_owned(), v.clone());
        v
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: &str) -> Result<T> {
        let v = self.raw(key, default);
        v.parse().map_err(|_| bad(key, format!("cannot parse `{v}`")))
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, default: &str) -> Result<Vec<T>> {
        let v = self.raw(key, default);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| bad(key, format!("cannot parse `{s}`"))))
            .collect()
    }

    fn auto(&mut self, key: &str) -> Result<Option<usize>> {
        let v = self.raw(key, "auto");
        if v == "auto" {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| bad(key, format!("expected `auto` or an integer, got `{v}`")))
        }
    }
}

impl BenchConfig {
    /// Resolve a key map (file values with overrides applied) into a config.
    ///
    /// Relative data paths are resolved against `base`.
    pub fn from_pairs(map: &BTreeMap<String, String>, base: &Path) -> Result<Self> {
        let mut f = Fields { map, resolved: BTreeMap::new() };
        let kind = f.raw("dataset", "synthetic");
        let seed: u64 = f.parse("seed", "0")?;
        let dataset = match kind.as_str() {
            "synthetic" => {
                let mut o = SyntheticOptions::new(f.parse("n", "30")?, seed, f.parse("m_signals", "200")?);
                o.avg_degree = f.parse("avg_degree", "6")?;
                o.noise_std = f.parse("noise_std", "0.05")?;
                DatasetSpec::Synthetic(o)
            }
            "sensor_csv" => {
                let coords = f.raw("coords_path", "");
                let signals = f.raw("signals_path", "");
                if coords.is_empty() || signals.is_empty() {
                    return Err(bad("dataset", "sensor_csv needs coords_path and signals_path"));
                }
                DatasetSpec::SensorCsv {
                    coords_path: base.join(coords),
                    signals_path: base.join(signals),
                    radius_km: f.parse("radius_km", "50")?,
                }
            }
            other => return Err(bad("dataset", format!("unknown dataset `{other}`"))),
        };
        let name = f.raw("name", &kind);
        let mut grid = GridSpec::new(&name);
        let gsos: Vec<String> = f.list("gso_list", "A,L,P,DM")?;
        grid.gso_list = gsos
            .iter()
            .map(|s| GsoChoice::parse(s).ok_or_else(|| bad("gso_list", format!("unknown GSO `{s}`"))))
            .collect::<Result<_>>()?;
        grid.tau_grid = f.list("tau_grid", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")?;
        grid.t_grid = f.list("t_grid", "1")?;
        let sign = match f.raw("tikhonov_sign", "plus").as_str() {
            "plus" => TikhonovSign::Plus,
            "minus" => TikhonovSign::Minus,
            other => return Err(bad("tikhonov_sign", format!("expected plus or minus, got `{other}`"))),
        };
        grid.filter = match f.raw("filter", "tikhonov").as_str() {
            "tikhonov" => FilterFamily::Tikhonov(sign),
            "heat" => FilterFamily::Heat,
            other => return Err(bad("filter", format!("unknown filter `{other}`"))),
        };
        let alpha: f64 = f.parse("alpha", "0.1")?;
        grid.method = match f.raw("method", "mv").as_str() {
            "mv" => LearnMethod::MarkovVariation,
            "tv" => LearnMethod::TotalVariation { alpha },
            other => return Err(bad("method", format!("expected mv or tv, got `{other}`"))),
        };
        grid.dm_l = f.auto("dm_l")?;
        grid.dm_time = f.parse("dm_time", "1")?;
        grid.dm_mode = match f.raw("dm_mode", "truncated").as_str() {
            "truncated" => DmMode::TruncatedSpectral,
            "identity_minus_power" => DmMode::IdentityMinusPower,
            other => return Err(bad("dm_mode", format!("unknown mode `{other}`"))),
        };
        grid.learn.max_iters = f.parse("max_iters", "2000")?;
        grid.learn.tol = f.parse("tol", "1e-8")?;
        grid.learn.step = f.parse("step", "0.01")?;
        grid.learn.projection_iters = f.parse("projection_iters", "50")?;
        grid.metrics.ree_mode = match f.raw("ree_mode", "signed").as_str() {
            "signed" => ReeMode::Signed,
            "absolute" => ReeMode::Absolute,
            other => return Err(bad("ree_mode", format!("expected signed or absolute, got `{other}`"))),
        };
        grid.metrics.eig_floor = f.parse("eig_floor", "1e-9")?;
        grid.metrics.k = f.auto("ree_k")?;
        let output_dir = PathBuf::from(f.raw("output_dir", "results"));
        let jobs = f.auto("jobs")?;
        grid.validate()?;
        let mut resolved = f.resolved;
        // Neither changes the table, so both stay out of the hash.
        resolved.remove("jobs");
        resolved.remove("output_dir");
        Ok(BenchConfig { dataset, grid, seed, output_dir, jobs, resolved })
    }

    /// Read a config file and apply overrides on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = parse_pairs(&text, path)?;
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        BenchConfig::from_pairs(&map, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sorted `key = value` lines of every resolved setting.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.resolved {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Hex SHA-256 of [`BenchConfig::render`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
