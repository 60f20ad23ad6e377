use serde::{Deserialize, Serialize};

use crate::constraints::decompose;
use crate::error::{Error, Result};
use crate::evolution::{evolve, Method, StateVector, TimeSeries};
use crate::model::{resonance_detuning, BasisConfig, ChainSpec, SectorLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SecondaryParams {
    pub n_sites: usize,
    pub v0: f64,
    /// Control-atom shift on site 1. `0` switches the coupling off;
    /// otherwise it must exceed `v0`.
    pub v1: f64,
    pub control_excited: bool,
    pub horizon_cycles: f64,
    pub sample_step_cycles: f64,
}

impl Default for SecondaryParams {
    fn default() -> Self {
        SecondaryParams {
            n_sites: 6,
            v0: 7.0,
            v1: 35.0,
            control_excited: true,
            horizon_cycles: 30.0,
            sample_step_cycles: 0.005,
        }
    }
}

impl SecondaryParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::config("n_sites", "needs at least 2 sites for a 2-run"));
        }
        if !(self.v0.is_finite() && self.v0 > 0.0) {
            return Err(Error::config("v", "v0 must be positive"));
        }
        if !(self.v1 == 0.0 || (self.v1.is_finite() && self.v1 > self.v0)) {
            return Err(Error::config(
                "v_control",
                format!("v1 = {} must exceed v0 = {} (or be 0 to disable)", self.v1, self.v0),
            ));
        }
        Ok(())
    }

    pub fn spec(&self, control_excited: bool) -> Result<ChainSpec> {
        let delta = resonance_detuning(2, self.v0)?;
        Ok(ChainSpec::new(self.n_sites, delta, self.v0).with_control(self.v1, control_excited))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigPeak {
    pub config: String,
    pub max_population: f64,
}

/// Maxima over the horizon, with and without the control excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    pub n_sites: usize,
    pub v0: f64,
    pub v1: f64,
    pub delta: f64,
    pub control_excited: bool,
    /// `Uniform(2)` configurations with site 1 excited.
    pub forbidden: Vec<String>,
    pub accessible: Vec<String>,
    pub forbidden_max: f64,
    pub accessible_max: f64,
    /// Forbidden-set maximum of the control-ground reference run.
    pub forbidden_max_reference: f64,
    /// `forbidden_max / forbidden_max_reference`.
    pub suppression_ratio: f64,
    pub per_config: Vec<ConfigPeak>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryRun {
    pub series: TimeSeries,
    pub forbidden_total: Vec<f64>,
    pub accessible_total: Vec<f64>,
    pub report: SuppressionReport,
}

fn totals(series: &TimeSeries, set: &[BasisConfig]) -> Vec<f64> {
    (0..series.len())
        .map(|i| {
            set.iter()
                .map(|c| series.config_series(c).expect("tracked")[i])
                .sum()
        })
        .collect()
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

/// Evolves the vacuum at the 2-run resonance of `v0`, with the control atom
/// in the requested state, and compares against the control-ground run.
pub fn secondary_fragmentation_run(params: &SecondaryParams) -> Result<SecondaryRun> {
    params.validate()?;
    let decomposition = decompose(params.n_sites)?;
    let uniform2 = decomposition.sector(SectorLabel::Uniform(2)).to_vec();
    let (forbidden, accessible): (Vec<BasisConfig>, Vec<BasisConfig>) =
        uniform2.iter().partition(|c| c.is_excited(0));

    let run = |excited: bool| -> Result<TimeSeries> {
        evolve(
            &params.spec(excited)?,
            &StateVector::vacuum(params.n_sites),
            params.horizon_cycles,
            params.sample_step_cycles,
            Method::Exact,
            &uniform2,
        )
    };
    let series = run(params.control_excited)?;
    let forbidden_total = totals(&series, &forbidden);
    let accessible_total = totals(&series, &accessible);

    let forbidden_max = max_of(&forbidden_total);
    let forbidden_max_reference = if params.control_excited {
        max_of(&totals(&run(false)?, &forbidden))
    } else {
        forbidden_max
    };

    let report = SuppressionReport {
        n_sites: params.n_sites,
        v0: params.v0,
        v1: params.v1,
        delta: resonance_detuning(2, params.v0)?,
        control_excited: params.control_excited,
        forbidden: forbidden.iter().map(|c| c.to_string()).collect(),
        accessible: accessible.iter().map(|c| c.to_string()).collect(),
        forbidden_max,
        accessible_max: max_of(&accessible_total),
        forbidden_max_reference,
        suppression_ratio: forbidden_max / forbidden_max_reference,
        per_config: uniform2
            .iter()
            .map(|c| ConfigPeak {
                config: c.to_string(),
                max_population: max_of(series.config_series(c).expect("tracked")),
            })
            .collect(),
    };
    Ok(SecondaryRun {
        series,
        forbidden_total,
        accessible_total,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_weak_control() {
        let p = SecondaryParams {
            v1: 5.0,
            ..SecondaryParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("v_control"));
        let off = SecondaryParams {
            v1: 0.0,
            ..SecondaryParams::default()
        };
        assert!(off.validate().is_ok());
    }

    #[test]
    fn forbidden_set_for_six_sites() {
        let run = secondary_fragmentation_run(&SecondaryParams {
            horizon_cycles: 1.0,
            ..SecondaryParams::default()
        })
        .unwrap();
        let mut f = run.report.forbidden.clone();
        f.sort();
        assert_eq!(f, ["110000", "110011", "110110"]);
        assert_eq!(run.report.accessible.len(), 5);
        assert_eq!(run.forbidden_total.len(), run.series.len());
    }
}
