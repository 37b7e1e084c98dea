use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use losmimo::channel::{ArrayLinkGeometry, UlaChannelSpec};
use losmimo::transceiver::{ChannelModel, Interference};
use losmimo::units::db_grid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    BoundSweep,
    EtaSweep,
    Plan,
    Transceive,
    Table1,
    Polarization,
    SurrogateScaling,
    ThreeSpacing,
}

/// Either a full physical geometry or the `(n_tx, n_rx, eta)` shorthand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySource {
    Physical(ArrayLinkGeometry),
    Shorthand { n_tx: usize, n_rx: usize, eta: f64 },
}

impl GeometrySource {
    pub fn counts(&self) -> (usize, usize) {
        match *self {
            Self::Physical(g) => (g.n_tx, g.n_rx),
            Self::Shorthand { n_tx, n_rx, .. } => (n_tx, n_rx),
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match *self {
            Self::Physical(_) => None,
            Self::Shorthand { eta, .. } => Some(eta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Physical(g) => g.validate()?,
            Self::Shorthand { n_tx, n_rx, eta } => UlaChannelSpec::new(eta, n_tx, n_rx).map(|_| ())?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Self {
        Self { start_db, stop_db, step_db }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if ![self.start_db, self.stop_db, self.step_db].iter().all(|v| v.is_finite()) {
            bail!("SNR grid bounds must be finite");
        }
        if self.step_db <= 0.0 {
            bail!("SNR grid step must be positive, got {}", self.step_db);
        }
        let points = db_grid(self.start_db, self.stop_db, self.step_db);
        if points.is_empty() {
            bail!("SNR grid {}..{} dB is empty", self.start_db, self.stop_db);
        }
        Ok(points)
    }
}

/// Experiment parameters. Each command reads the fields it needs and falls
/// back to its own defaults for the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    pub geometry: Option<GeometrySource>,
    /// Geometry file (TOML or JSON), resolved relative to the config file.
    pub geometry_file: Option<PathBuf>,
    pub snr: Option<SnrGrid>,
    pub output: Option<PathBuf>,
    pub plot_script: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub n_tx: Option<usize>,
    pub n_rx: Option<usize>,
    pub eta: Option<f64>,
    pub etas: Option<Vec<f64>>,
    pub eta_points: Option<usize>,
    pub envelope: Option<bool>,
    pub sizes: Option<Vec<usize>>,
    pub ratio: Option<f64>,
    pub snr_min_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub epsilon: Option<f64>,
    pub bins: Option<usize>,
    pub upper: Option<f64>,
    pub streams: Option<usize>,
    pub sweep_streams: Option<bool>,
    pub model: Option<ChannelModel>,
    pub interference: Option<Interference>,
}

fn parse_by_extension<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "json" => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())),
        "toml" => toml::from_str(&text).with_context(|| format!("parsing {}", path.display())),
        _ => bail!("{}: expected a .toml or .json file", path.display()),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = parse_by_extension(path)?;
        if let (Some(file), Some(dir)) = (cfg.geometry_file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Resolves `geometry_file` into `geometry`; a file wins over an inline table.
    pub fn resolve_geometry(&mut self) -> Result<()> {
        if let Some(path) = &self.geometry_file {
            if !path.exists() {
                bail!("geometry file {} does not exist", path.display());
            }
            self.geometry = Some(parse_by_extension(path)?);
        }
        if let Some(g) = &self.geometry {
            g.validate().context("invalid geometry")?;
        }
        Ok(())
    }

    pub fn snr_points(&self, default: SnrGrid) -> Result<Vec<f64>> {
        self.snr.unwrap_or(default).points()
    }

    /// Antenna counts from explicit fields, then the geometry, then `n`, then `default`.
    pub fn counts(&self, default: usize) -> (usize, usize) {
        let from_geometry = self.geometry.map(|g| g.counts());
        let n = self.n.unwrap_or(default);
        let n_tx = self.n_tx.or(from_geometry.map(|c| c.0)).unwrap_or(n);
        let n_rx = self.n_rx.or(from_geometry.map(|c| c.1)).unwrap_or(n);
        (n_tx, n_rx)
    }
}
