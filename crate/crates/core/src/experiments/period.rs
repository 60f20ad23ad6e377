use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, PeriodFit, PeriodPoint};
use super::scan::with_threads;
use crate::error::{Error, Result};
use crate::evolution::{sample_times, ExactPropagator, StateVector, TimeSeries};
use crate::model::{build_hamiltonian, classify, resonance_detuning, BasisConfig, ChainSpec, SectorLabel};

/// Signal whose dominant period is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodTarget {
    Sector(SectorLabel),
    Config(BasisConfig),
}

const ZERO_PAD_FACTOR: usize = 8;

/// Dominant period (in units of `step`) of a uniformly sampled signal.
///
/// The mean is removed, a Hann window applied and the record zero-padded
/// before the FFT. The largest spectral peak above two cycles per record is
/// refined by a parabola through the log magnitudes of its three bins.
pub fn dominant_period(signal: &[f64], step: f64) -> Result<f64> {
    let n = signal.len();
    if n < 16 {
        return Err(Error::Extraction(format!("{n} samples are too few")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Extraction(format!("sample step {step} must be positive")));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let swing = signal.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    if swing.is_nan() || swing <= 1e-10 * mean.abs().max(1.0) {
        return Err(Error::Extraction("signal is flat".into()));
    }

    let len = n.next_power_of_two() * ZERO_PAD_FACTOR;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let denom = (n - 1) as f64;
    for (i, (b, x)) in buf.iter_mut().zip(signal).enumerate() {
        let w = 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / denom).cos());
        *b = Complex64::new((x - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..=len / 2].iter().map(|c| c.norm()).collect();

    // the Hann main lobe around DC spans two record frequencies
    let lo = (2 * len).div_ceil(n).max(1);
    let hi = len / 2 - 1;
    if lo >= hi {
        return Err(Error::Extraction("record too short".into()));
    }
    let m = (lo..hi)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .expect("non-empty range");
    if !(mag[m] > mag[m - 1] && mag[m] >= mag[m + 1]) {
        return Err(Error::Extraction(
            "no spectral peak above the record frequency".into(),
        ));
    }
    let (a, b, c) = (mag[m - 1].ln(), mag[m].ln(), mag[m + 1].ln());
    let curvature = a - 2.0 * b + c;
    let offset = if curvature < 0.0 { 0.5 * (a - c) / curvature } else { 0.0 };
    let freq = (m as f64 + offset) / (len as f64 * step);
    Ok(1.0 / freq)
}

/// Dominant period of `target` in `series`, in Rabi cycles.
pub fn extract_period(series: &TimeSeries, target: PeriodTarget) -> Result<f64> {
    let signal = match target {
        PeriodTarget::Sector(label) => series
            .sector_series(label)
            .ok_or_else(|| Error::input(format!("sector {label} not in series")))?,
        PeriodTarget::Config(c) => series
            .config_series(&c)
            .ok_or_else(|| Error::input(format!("configuration {c} is not tracked")))?
            .to_vec(),
    };
    dominant_period(&signal, series.step())
}

/// Settings for period measurements along a resonance line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodOptions {
    pub n_sites: usize,
    /// Minimum number of periods the horizon must contain.
    pub min_periods: f64,
    /// Starting horizon, in cycles.
    pub base_horizon: f64,
    /// Horizons longer than this are refused.
    pub max_horizon: f64,
    /// Measure at the light-shifted resonance found by
    /// [`locate_resonance`] instead of the bare `(k−1)V/k`.
    pub refine_resonance: bool,
    /// Half-width of the detuning window searched around the bare value.
    pub resonance_window: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            n_sites: 5,
            min_periods: 5.0,
            base_horizon: 30.0,
            max_horizon: 20_000.0,
            refine_resonance: true,
            resonance_window: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodMeasurement {
    pub k: usize,
    pub v: f64,
    /// Detuning the period was measured at.
    pub delta: f64,
    /// `(k−1)V/k`.
    pub bare_delta: f64,
    pub period_cycles: f64,
    pub horizon_cycles: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodScan {
    pub measurements: Vec<PeriodMeasurement>,
    pub fit: PeriodFit,
}

/// Rough period of the `k`-run sector oscillation, `c_k·(Δ/Ω)^{k−1}`,
/// used only to size the first horizon.
pub fn estimated_period(k: usize, delta: f64) -> f64 {
    // prefactors measured on the N = 5 chain
    let c = match k {
        1 => 1.0,
        2 => 1.5,
        3 => 0.5,
        _ => 1.0,
    };
    c * delta.abs().max(1.0).powi(k as i32 - 1)
}

fn uniform_members(n_sites: usize, k: usize) -> Result<Vec<usize>> {
    let members: Vec<usize> = BasisConfig::all(n_sites)
        .filter(|c| classify(c) == SectorLabel::Uniform(k))
        .map(|c| c.index())
        .collect();
    if members.is_empty() {
        return Err(Error::input(format!("no {k}-runs fit in {n_sites} sites")));
    }
    Ok(members)
}

fn averaged_sector_weight(n_sites: usize, delta: f64, v: f64, members: &[usize]) -> Result<f64> {
    let h = build_hamiltonian(&ChainSpec::new(n_sites, delta, v))?;
    let prop = ExactPropagator::new(&h)?;
    let coeffs = prop.coefficients(&StateVector::vacuum(n_sites));
    Ok(prop.time_averaged_population(&coeffs, members))
}

/// Detuning of the light-shifted `k`-run resonance at interaction `v`.
///
/// The drive shifts the vacuum and the `k`-run states by different amounts,
/// so the true multi-photon resonance sits slightly off `(k−1)V/k`. It is
/// located as the maximum of the time-averaged `Uniform(k)` population from
/// the vacuum, first on a grid of `window/60` spacing within `±window` of
/// the bare value, then by golden-section search around the best grid point.
pub fn locate_resonance(k: usize, v: f64, n_sites: usize, window: f64) -> Result<f64> {
    let bare = resonance_detuning(k, v)?;
    let members = uniform_members(n_sites, k)?;
    let weight = |d: f64| averaged_sector_weight(n_sites, d, v, &members);

    let spacing = window / 60.0;
    let mut best = (bare, weight(bare)?);
    for i in -60i32..=60 {
        let d = bare + i as f64 * spacing;
        let w = weight(d)?;
        if w > best.1 {
            best = (d, w);
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.0 - spacing, best.0 + spacing);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (weight(x1)?, weight(x2)?);
    while hi - lo > 1e-7 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = weight(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = weight(x2)?;
        }
    }
    let refined = 0.5 * (lo + hi);
    Ok(if weight(refined)? >= best.1 { refined } else { best.0 })
}

/// Period of the `Uniform(k)` sector population starting from the vacuum,
/// at the `k`-run resonance of interaction `v`. The horizon grows until it
/// holds `options.min_periods` periods.
pub fn measure_period(k: usize, v: f64, options: &PeriodOptions) -> Result<PeriodMeasurement> {
    let bare_delta = resonance_detuning(k, v)?;
    let delta = if options.refine_resonance {
        locate_resonance(k, v, options.n_sites, options.resonance_window)?
    } else {
        bare_delta
    };
    let members = uniform_members(options.n_sites, k)?;
    let spec = ChainSpec::new(options.n_sites, delta, v);
    let h = build_hamiltonian(&spec)?;
    let prop = ExactPropagator::new(&h)?;
    let coeffs = prop.coefficients(&StateVector::vacuum(options.n_sites));

    let energies = prop.energies();
    let span = energies.iter().fold(f64::NEG_INFINITY, |m, &e| m.max(e))
        - energies.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    let step = (0.25 / span.max(1.0)).min(0.01);

    let mut horizon = options
        .base_horizon
        .max(1.2 * options.min_periods * estimated_period(k, delta));
    let mut psi = vec![Complex64::new(0.0, 0.0); prop.dim()];
    for _ in 0..6 {
        if horizon > options.max_horizon {
            break;
        }
        let signal: Vec<f64> = sample_times(horizon, step)?
            .into_iter()
            .map(|t| {
                prop.evolve_into(&coeffs, t, &mut psi);
                members.iter().map(|&c| psi[c].norm_sqr()).sum()
            })
            .collect();
        let period = dominant_period(&signal, step)?;
        if horizon >= options.min_periods * period {
            return Ok(PeriodMeasurement {
                k,
                v,
                delta,
                bare_delta,
                period_cycles: period,
                horizon_cycles: horizon,
            });
        }
        horizon = 1.2 * options.min_periods * period;
    }
    Err(Error::Extraction(format!(
        "period at k={k}, v={v} needs a horizon beyond {} cycles",
        options.max_horizon
    )))
}

/// Periods along the `k`-run resonance line for each interaction in `vs`,
/// plus the log–log power-law fit of period against detuning.
pub fn period_scaling_run(
    k: usize,
    vs: &[f64],
    options: &PeriodOptions,
    threads: Option<usize>,
) -> Result<PeriodScan> {
    if k < 2 {
        return Err(Error::input("period scaling needs k >= 2 (k = 1 is resonant at zero detuning)"));
    }
    let measurements = with_threads(threads, || {
        vs.par_iter()
            .map(|&v| {
                measure_period(k, v, options)
                    .map_err(|e| Error::Extraction(format!("v={v}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let points: Vec<PeriodPoint> = measurements
        .iter()
        .map(|m| PeriodPoint {
            delta_over_omega: m.delta,
            period_cycles: m.period_cycles,
        })
        .collect();
    let fit = fit_power_law(k, &points)?;
    Ok(PeriodScan { measurements, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn synthetic_sine_squared() {
        let step = 0.005;
        let signal: Vec<f64> = (0..8000)
            .map(|i| (PI * i as f64 * step / 4.0).sin().powi(2))
            .collect();
        let t = dominant_period(&signal, step).unwrap();
        assert!((t - 4.0).abs() < 0.04, "{t}");
    }

    #[test]
    fn two_tone_picks_stronger() {
        let step = 0.01;
        let signal: Vec<f64> = (0..20000)
            .map(|i| {
                let t = i as f64 * step;
                (2.0 * PI * t / 7.0).cos() + 0.3 * (2.0 * PI * t / 1.3).cos()
            })
            .collect();
        let t = dominant_period(&signal, step).unwrap();
        assert!((t - 7.0).abs() < 0.07, "{t}");
    }

    #[test]
    fn flat_signal_is_an_error() {
        let err = dominant_period(&[0.25; 1000], 0.01).unwrap_err();
        assert!(matches!(err, Error::Extraction(_)));
        assert!(dominant_period(&[0.0, 1.0], 0.01).is_err());
    }

    #[test]
    fn monotone_ramp_has_no_period() {
        let ramp: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert!(dominant_period(&ramp, 0.01).is_err());
    }
}
