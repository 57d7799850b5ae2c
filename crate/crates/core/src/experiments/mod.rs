//! Reproducible studies: ε-scaling, the lift-off/IWC dichotomy, post-G-spot
//! stick versus lift-off, and the impact-oscillator verification.
//!
//! Configuration is flat `key = value` text mirroring the CLI flags. Every
//! study writes CSVs plus a `manifest.txt` carrying a content hash of the
//! canonical configuration; CSV bytes depend only on the configuration.

mod dichotomy;
mod oscillator;
mod post_gspot;
mod scaling;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::canard::CanardError;
use crate::contact::{make_extended_example, make_impact_oscillator, make_simple_example, BuiltinSystem};
use crate::ring::Real;
use crate::gspot::GspotError;
use crate::hypergeo::HypergeoError;
use crate::sim::{SimError, Trajectory};

pub use dichotomy::{dichotomy_run, run_dichotomy, DichotomyReport, DichotomyRow, Side, SideSummary};
pub use oscillator::{oscillator_initial_state, run_oscillator_verify, OscillatorCase, OscillatorReport};
pub use post_gspot::{post_gspot_initial_state, post_gspot_run, post_gspot_system, run_post_gspot, PostGspotReport, PostGspotRow, Termination};
pub use scaling::{fit_power_law, run_scaling_study, scaling_point, ExponentFit, ScalingPoint, ScalingReport};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Gspot(#[from] GspotError),
    #[error(transparent)]
    Canard(#[from] CanardError),
    #[error(transparent)]
    Hypergeo(#[from] HypergeoError),
    #[error("regression needs at least 4 points in the fit window, got {0}")]
    InsufficientPoints(usize),
    #[error("{0}")]
    Numerical(String),
}

impl ExperimentError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemId {
    Simple,
    Extended,
    Oscillator,
}

impl SystemId {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemId::Simple => "simple",
            SystemId::Extended => "extended",
            SystemId::Oscillator => "oscillator",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "simple" => Ok(SystemId::Simple),
            "extended" => Ok(SystemId::Extended),
            "oscillator" => Ok(SystemId::Oscillator),
            other => Err(ExperimentError::Config(format!("unknown system `{other}`"))),
        }
    }
}

/// Parameters shared by every study; list-valued keys take comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemId,
    pub beta: Vec<f64>,
    pub kappa: f64,
    pub chi: Vec<f64>,
    /// Sorted descending.
    pub eps: Vec<f64>,
    pub nu: Vec<f64>,
    pub order: usize,
    pub t_end: Option<f64>,
    pub out: PathBuf,
    pub p0: f64,
    pub u0: f64,
    /// Initial angular rate of the oscillator in `simulate`.
    pub phi_dot: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemId::Simple,
            beta: vec![0.5, 1.5, 2.5],
            kappa: 0.0,
            chi: vec![0.0, 1.0],
            eps: vec![1e-3],
            nu: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            order: 15,
            t_end: None,
            out: PathBuf::from("out"),
            p0: 0.5,
            u0: 70.0,
            phi_dot: -0.9,
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

/// The four sweeps, each with its own default configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Scaling,
    Dichotomy,
    PostGspot,
    Oscillator,
}

impl ExperimentConfig {
    /// Defaults for one study; flags and config files are applied on top.
    pub fn preset(study: Study) -> Self {
        let base = ExperimentConfig::default();
        match study {
            Study::Scaling => ExperimentConfig {
                eps: (0..=12).map(|k| 10f64.powf(-3.0 - 0.25 * k as f64)).collect(),
                nu: vec![2.0],
                ..base
            },
            Study::Dichotomy => base,
            Study::PostGspot => ExperimentConfig {
                system: SystemId::Extended,
                beta: vec![0.5],
                nu: vec![0.25, 4.0],
                ..base
            },
            Study::Oscillator => ExperimentConfig {
                system: SystemId::Oscillator,
                beta: vec![7.0 / 3.0],
                eps: vec![1e-6],
                ..base
            },
        }
    }
}

const KEYS: [&str; 14] = [
    "system", "beta", "kappa", "chi", "eps", "nu", "order", "t_end", "out", "p0", "u0", "phi_dot", "rtol", "atol",
];

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ExperimentError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_num(key: &str, s: &str) -> Result<f64, ExperimentError> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (parse_num(key, a)?, parse_num(key, b)?);
        return Ok(a / b);
    }
    s.parse()
        .map_err(|_| ExperimentError::Config(format!("{key}: `{s}` is not a number")))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let v = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "system" => self.system = v.parse()?,
            "beta" => self.beta = parse_list("beta", v)?,
            "kappa" => self.kappa = parse_num("kappa", v)?,
            "chi" => self.chi = parse_list("chi", v)?,
            "eps" => self.eps = parse_list("eps", v)?,
            "nu" => self.nu = parse_list("nu", v)?,
            "order" => {
                self.order = v
                    .parse()
                    .map_err(|_| ExperimentError::Config(format!("order: `{v}` is not an integer")))?
            }
            "t_end" if v == "default" => self.t_end = None,
            "t_end" => self.t_end = Some(parse_num("t_end", v)?),
            "out" => self.out = PathBuf::from(v),
            "p0" => self.p0 = parse_num("p0", v)?,
            "u0" => self.u0 = parse_num("u0", v)?,
            "phi_dot" => self.phi_dot = parse_num("phi_dot", v)?,
            "rtol" => self.rtol = parse_num("rtol", v)?,
            "atol" => self.atol = parse_num("atol", v)?,
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown key `{other}` (expected one of {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` lines onto the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = ExperimentConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<(), ExperimentError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExperimentError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        ExperimentConfig::parse(&text)
    }

    /// Schema checks, run before any computation. Sorts ε descending.
    pub fn validate(&mut self) -> Result<(), ExperimentError> {
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(ExperimentError::Config("eps values must be positive and finite".into()));
        }
        self.eps.sort_by(|a, b| b.total_cmp(a));
        self.eps.dedup();
        if self.nu.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
            return Err(ExperimentError::Config("nu values must be positive".into()));
        }
        if self.beta.iter().any(|b| !b.is_finite()) || self.chi.iter().any(|c| !c.is_finite()) {
            return Err(ExperimentError::Config("beta and chi must be finite".into()));
        }
        if self.order == 0 {
            return Err(ExperimentError::Config("order must be at least 1".into()));
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return Err(ExperimentError::Config("t_end must be positive".into()));
            }
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(ExperimentError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Canonical text form, the input of the manifest hash.
    pub fn canonical(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("system", self.system.to_string());
        map.insert("beta", fmt_list(&self.beta));
        map.insert("kappa", format!("{:e}", self.kappa));
        map.insert("chi", fmt_list(&self.chi));
        map.insert("eps", fmt_list(&self.eps));
        map.insert("nu", fmt_list(&self.nu));
        map.insert("order", self.order.to_string());
        map.insert("t_end", self.t_end.map_or("default".into(), |t| format!("{t:e}")));
        map.insert("out", self.out.display().to_string());
        map.insert("p0", format!("{:e}", self.p0));
        map.insert("u0", format!("{:e}", self.u0));
        map.insert("phi_dot", format!("{:e}", self.phi_dot));
        map.insert("rtol", format!("{:e}", self.rtol));
        map.insert("atol", format!("{:e}", self.atol));
        map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// sha256 over `blob <len>\0<canonical>`, the object-hash layout of git.
    pub fn content_hash(&self) -> String {
        let body = self.canonical();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Exact fraction when `x` is p/q with q ≤ 1000, else a float.
pub fn exact_or_float(x: f64) -> Real {
    (1..=1000i64)
        .find_map(|q| {
            let p = (x * q as f64).round();
            ((x * q as f64 - p).abs() < 1e-12 * q as f64 && p.abs() < 1e15).then(|| Real::ratio(p as i64, q))
        })
        .unwrap_or(Real::float(x))
}

/// Built-in model for one (β, κ, χ) choice: the two examples take α₁ = α₂ = −1,
/// α₃ = −β; the oscillator uses unit mass, length and gravity.
pub fn build_system(id: SystemId, beta: f64, kappa: f64, chi: f64) -> BuiltinSystem {
    let a3 = exact_or_float(-beta);
    match id {
        SystemId::Simple => BuiltinSystem::Simple(make_simple_example(Real::int(-1), Real::int(-1), a3)),
        SystemId::Extended => {
            BuiltinSystem::Extended(make_extended_example(exact_or_float(chi), Real::int(-1), Real::int(-1), a3))
        }
        SystemId::Oscillator => BuiltinSystem::Oscillator(make_impact_oscillator(beta, kappa, 1.0, 1.0, 1.0)),
    }
}

/// Newton starting point for the G-spot of a built-in.
pub fn gspot_guess(sys: &BuiltinSystem) -> Vec<f64> {
    match sys {
        BuiltinSystem::Simple(_) => vec![0.0; 4],
        BuiltinSystem::Extended(_) => vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        BuiltinSystem::Oscillator(o) => o.gspot_state().to_vec(),
    }
}

/// Fixed float formatting used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))
}

/// Writes a CSV with the given header and pre-formatted rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| ExperimentError::io(path, e.into()))?;
    let wrap = |e: csv::Error| ExperimentError::io(path, e.into());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

/// `manifest.txt`: experiment id, canonical parameters, config hash and produced files.
pub fn write_manifest(dir: &Path, experiment: &str, cfg: &ExperimentConfig, files: &[String]) -> Result<PathBuf, ExperimentError> {
    ensure_dir(dir)?;
    let mut text = format!("experiment: {experiment}\nconfig_hash: {}\n", cfg.content_hash());
    for line in cfg.canonical().lines() {
        text.push_str(&format!("param.{line}\n"));
    }
    for f in files {
        text.push_str(&format!("file: {f}\n"));
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, text).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

/// Trajectory samples and events as `<stem>.csv` and `<stem>_events.csv`.
pub fn emit_plotdata(traj: &Trajectory, dir: &Path, stem: &str) -> Result<Vec<String>, ExperimentError> {
    ensure_dir(dir)?;
    let main = dir.join(format!("{stem}.csv"));
    let events = dir.join(format!("{stem}_events.csv"));
    let f = fs::File::create(&main).map_err(|e| ExperimentError::io(&main, e))?;
    traj.write_csv(f)?;
    let f = fs::File::create(&events).map_err(|e| ExperimentError::io(&events, e))?;
    traj.write_events_csv(f)?;
    Ok(vec![format!("{stem}.csv"), format!("{stem}_events.csv")])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let mut cfg = ExperimentConfig::parse(
            "# study\nsystem = oscillator\nbeta = 7/3\neps = 1e-6, 1e-3\nnu=2\norder = 15\nt-end = 0.2\n",
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.system, SystemId::Oscillator);
        assert!((cfg.beta[0] - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(cfg.eps, vec![1e-3, 1e-6]);
        assert_eq!(cfg.t_end, Some(0.2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("beta 1").is_err());
        let mut cfg = ExperimentConfig::parse("eps = -1").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        b.kappa = 0.5;
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
