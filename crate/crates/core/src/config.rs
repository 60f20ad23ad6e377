//! Run configuration: file loading, command-line overrides and validation.
//!
//! Config files are TOML or JSON (chosen by extension). Every field is
//! optional; unset fields fall back to per-experiment defaults when the run
//! is dispatched.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ScanGrid;
use crate::model::{BasisConfig, ChainSpec};

/// Environment variable read when no thread count is configured.
pub const THREADS_ENV: &str = "FRAGSIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Sectors,
    Evolve,
    Scan,
    Sweep,
    Periods,
    Fit,
    Secondary,
    Graph,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sectors => "sectors",
            Experiment::Evolve => "evolve",
            Experiment::Scan => "scan",
            Experiment::Sweep => "sweep",
            Experiment::Periods => "periods",
            Experiment::Fit => "fit",
            Experiment::Secondary => "secondary",
            Experiment::Graph => "graph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorKind {
    #[default]
    Exact,
    Stepped,
}

/// Everything a run needs. Physical values are in units of Ω.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,

    pub n_sites: Option<usize>,
    pub rabi: Option<f64>,
    pub delta: Option<f64>,
    pub v: Option<f64>,
    pub v_control: Option<f64>,
    pub control_excited: Option<bool>,

    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub delta_step: Option<f64>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub v_step: Option<f64>,
    pub horizon: Option<f64>,
    pub sample_step: Option<f64>,

    pub k: Option<usize>,
    pub method: Option<PropagatorKind>,
    /// Initial configuration as a bit string, site 1 first.
    pub initial: Option<String>,
    /// Configurations whose populations are written out individually.
    pub track: Vec<String>,
    pub resonant_only: Option<bool>,
    pub refine_resonance: Option<bool>,

    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads and validates a TOML or JSON config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let config: RunConfig = match ext.as_deref() {
        Some("toml") => toml::from_str(&text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}: ")
                })
                .unwrap_or_default();
            parse_error(path, format!("{at}{}", e.message()))
        })?,
        Some("json") => serde_json::from_str(&text).map_err(|e| {
            parse_error(path, format!("line {} column {}: {e}", e.line(), e.column()))
        })?,
        _ => {
            return Err(parse_error(
                path,
                "unknown config format (expected .toml or .json)",
            ))
        }
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// Fills every field that `overrides` sets.
    pub fn merge(&mut self, overrides: RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if overrides.$f.is_some() { self.$f = overrides.$f; } )* };
        }
        take!(
            experiment, n_sites, rabi, delta, v, v_control, control_excited, delta_min, delta_max,
            delta_step, v_min, v_max, v_step, horizon, sample_step, k, method, initial,
            resonant_only, refine_resonance, input, out, threads
        );
        if !overrides.track.is_empty() {
            self.track = overrides.track;
        }
    }

    pub fn n_sites_or(&self, default: usize) -> usize {
        self.n_sites.unwrap_or(default)
    }

    /// Chain parameters, defaulting to a bare 5-site chain on resonance.
    pub fn chain_spec(&self, default_sites: usize) -> ChainSpec {
        let mut spec = ChainSpec::new(
            self.n_sites_or(default_sites),
            self.delta.unwrap_or(0.0),
            self.v.unwrap_or(0.0),
        );
        spec.rabi = self.rabi.unwrap_or(1.0);
        if let Some(v_control) = self.v_control {
            spec = spec.with_control(v_control, self.control_excited.unwrap_or(true));
        }
        spec
    }

    /// Scan grid over the default Δ–V window, with `horizon` and
    /// `sample_step` falling back to 30 and 0.01 cycles.
    pub fn scan_grid(&self) -> ScanGrid {
        let d = ScanGrid::default();
        ScanGrid {
            delta_min: self.delta_min.unwrap_or(d.delta_min),
            delta_max: self.delta_max.unwrap_or(d.delta_max),
            delta_step: self.delta_step.unwrap_or(d.delta_step),
            v_min: self.v_min.unwrap_or(d.v_min),
            v_max: self.v_max.unwrap_or(d.v_max),
            v_step: self.v_step.unwrap_or(d.v_step),
            n_sites: self.n_sites_or(d.n_sites),
            horizon_cycles: self.horizon.unwrap_or(d.horizon_cycles),
            sample_step_cycles: self.sample_step.unwrap_or(d.sample_step_cycles),
        }
    }

    pub fn initial_config(&self, n_sites: usize) -> Result<BasisConfig> {
        match &self.initial {
            None => Ok(BasisConfig::vacuum(n_sites)),
            Some(s) => parse_config(s, n_sites, "initial"),
        }
    }

    pub fn tracked_configs(&self, n_sites: usize) -> Result<Vec<BasisConfig>> {
        self.track
            .iter()
            .map(|s| parse_config(s, n_sites, "track"))
            .collect()
    }

    /// Explicit thread count: config value, else `FRAGSIM_THREADS`.
    pub fn resolved_threads(&self) -> Result<Option<usize>> {
        if let Some(t) = self.threads {
            return Ok(Some(t));
        }
        match std::env::var(THREADS_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::config("threads", format!("{THREADS_ENV}={s:?} is not a count"))),
            Err(_) => Ok(None),
        }
    }

    /// Checks every field that is set, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites_or(5);
        self.chain_spec(5).validate()?;
        self.scan_grid().validate()?;
        if let Some(k) = self.k {
            if k == 0 || k > n {
                return Err(Error::config("k", format!("must be in 1..={n}, got {k}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        self.initial_config(n)?;
        self.tracked_configs(n)?;
        Ok(())
    }
}

fn parse_config(s: &str, n_sites: usize, field: &str) -> Result<BasisConfig> {
    let c: BasisConfig = s
        .parse()
        .map_err(|e: Error| Error::config(field, e.to_string()))?;
    if c.n_sites() != n_sites {
        return Err(Error::config(
            field,
            format!("{s} has {} sites, chain has {n_sites}", c.n_sites()),
        ));
    }
    Ok(c)
}
