//! Run configuration with the precedence flags > config file > defaults.

use crate::{exit_code, CliError};
use regionkit::integrator::ToleranceSettings;
use regionkit::region::SamplingConfig;
use regionkit::system::{Parameters, State};
use serde::Deserialize;
use std::path::PathBuf;

/// Optional overrides loadable from a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub e: Option<f64>,
    pub d: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed_x1: Option<f64>,
    pub seed_x2: Option<f64>,
    pub horizon: Option<f64>,
}

/// Parse a TOML config file body.
pub fn parse_config_toml(text: &str) -> Result<FileConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Flag-level overrides; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub e: Option<f64>,
    pub d: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub seed_x1: Option<f64>,
    pub seed_x2: Option<f64>,
    pub horizon: Option<f64>,
}

/// The fully resolved run configuration.
///
/// Defaults mirror the reference experiments: the demonstrated parameter
/// tuple, `rel = 1e-13`, `abs = 1e-12`, piece time budget 100, 2000 samples
/// per piece.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    pub nu: f64,
    pub e: f64,
    pub d: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max_piece: f64,
    pub samples_per_piece: usize,
    pub output_dir: PathBuf,
    pub seed: State,
    pub horizon: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            nu: 0.1,
            e: 3.5,
            d: 4.0,
            rel_tol: 1e-13,
            abs_tol: 1e-12,
            t_max_piece: 100.0,
            samples_per_piece: 2000,
            output_dir: PathBuf::from("."),
            seed: State::new(0.1, 0.0),
            horizon: 200.0,
        }
    }
}

impl RunConfig {
    /// Apply the precedence chain: defaults, then the config file (if any),
    /// then command-line flags.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("config {}: {e}", path.display())))?;
            let file = parse_config_toml(&text)
                .map_err(|e| CliError::io(format!("config {}: {e}", path.display())))?;
            cfg.apply_file(&file);
        }
        cfg.apply_flags(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, f: &FileConfig) {
        if let Some(v) = f.alpha {
            self.alpha = v;
        }
        if let Some(v) = f.nu {
            self.nu = v;
        }
        if let Some(v) = f.e {
            self.e = v;
        }
        if let Some(v) = f.d {
            self.d = v;
        }
        if let Some(v) = f.rel_tol {
            self.rel_tol = v;
        }
        if let Some(v) = f.abs_tol {
            self.abs_tol = v;
        }
        if let Some(v) = f.t_max {
            self.t_max_piece = v;
        }
        if let Some(v) = f.samples {
            self.samples_per_piece = v;
        }
        if let Some(v) = &f.out {
            self.output_dir = v.clone();
        }
        if let Some(v) = f.seed_x1 {
            self.seed.x1 = v;
        }
        if let Some(v) = f.seed_x2 {
            self.seed.x2 = v;
        }
        if let Some(v) = f.horizon {
            self.horizon = v;
        }
    }

    fn apply_flags(&mut self, f: &Overrides) {
        if let Some(v) = f.alpha {
            self.alpha = v;
        }
        if let Some(v) = f.nu {
            self.nu = v;
        }
        if let Some(v) = f.e {
            self.e = v;
        }
        if let Some(v) = f.d {
            self.d = v;
        }
        if let Some(v) = f.rel_tol {
            self.rel_tol = v;
        }
        if let Some(v) = f.abs_tol {
            self.abs_tol = v;
        }
        if let Some(v) = f.t_max {
            self.t_max_piece = v;
        }
        if let Some(v) = f.samples {
            self.samples_per_piece = v;
        }
        if let Some(v) = &f.out {
            self.output_dir = v.clone();
        }
        if let Some(v) = f.seed_x1 {
            self.seed.x1 = v;
        }
        if let Some(v) = f.seed_x2 {
            self.seed.x2 = v;
        }
        if let Some(v) = f.horizon {
            self.horizon = v;
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(CliError::new(
                exit_code::INVALID_PARAMETERS,
                "tolerances must be positive",
            ));
        }
        if !(self.t_max_piece > 0.0 && self.horizon > 0.0) {
            return Err(CliError::new(
                exit_code::INVALID_PARAMETERS,
                "time horizons must be positive",
            ));
        }
        if self.samples_per_piece < 2 {
            return Err(CliError::new(
                exit_code::INVALID_PARAMETERS,
                "samples per piece must be at least 2",
            ));
        }
        Ok(())
    }

    pub fn parameters(&self) -> Result<Parameters, CliError> {
        Ok(Parameters::new(self.alpha, self.nu, self.e, self.d)?)
    }

    pub fn tolerances(&self) -> ToleranceSettings {
        ToleranceSettings {
            relative: self.rel_tol,
            absolute: self.abs_tol,
            ..ToleranceSettings::default()
        }
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            samples_per_piece: self.samples_per_piece,
            t_max_piece: self.t_max_piece,
            tolerances: self.tolerances(),
        }
    }
}
