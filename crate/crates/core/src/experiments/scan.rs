use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{sample_times, ExactPropagator, StateVector};
use crate::model::{build_hamiltonian, ChainSpec};

/// Rectangular `(Δ, V)` grid with the evolution settings used at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanGrid {
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_step: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_step: f64,
    pub n_sites: usize,
    pub horizon_cycles: f64,
    pub sample_step_cycles: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            delta_min: -2.0,
            delta_max: 10.0,
            delta_step: 0.05,
            v_min: 0.0,
            v_max: 12.0,
            v_step: 0.1,
            n_sites: 5,
            horizon_cycles: 30.0,
            sample_step_cycles: 0.01,
        }
    }
}

/// Grid values `min + i·step`, rounded to 12 decimals so that nominal
/// values such as 5.0 come out exact.
pub fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta_min", self.delta_min),
            ("delta_max", self.delta_max),
            ("v_min", self.v_min),
            ("v_max", self.v_max),
        ];
        for (field, x) in finite {
            if !x.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        for (field, x) in [
            ("delta_step", self.delta_step),
            ("v_step", self.v_step),
            ("horizon", self.horizon_cycles),
            ("sample_step", self.sample_step_cycles),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {x}")));
            }
        }
        if self.delta_min > self.delta_max {
            return Err(Error::config("delta_min", "must not exceed delta_max"));
        }
        if self.v_min > self.v_max {
            return Err(Error::config("v_min", "must not exceed v_max"));
        }
        if self.v_min < 0.0 {
            return Err(Error::config("v_min", "interaction must be non-negative"));
        }
        if self.n_sites == 0 {
            return Err(Error::config("n_sites", "must be at least 1"));
        }
        Ok(())
    }

    pub fn deltas(&self) -> Vec<f64> {
        axis(self.delta_min, self.delta_max, self.delta_step)
    }

    pub fn vs(&self) -> Vec<f64> {
        axis(self.v_min, self.v_max, self.v_step)
    }

    /// Points in output order: V-major, Δ ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let deltas = self.deltas();
        self.vs()
            .into_iter()
            .flat_map(|v| deltas.iter().map(move |&d| (d, v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub delta: f64,
    pub v: f64,
    pub peak_n_r: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub peak_n_r: f64,
}

/// Maximum over the sampled horizon of `n_R(t)` starting from the vacuum.
pub fn peak_density(n_sites: usize, delta: f64, v: f64, horizon: f64, step: f64) -> Result<f64> {
    let spec = ChainSpec::new(n_sites, delta, v);
    let h = build_hamiltonian(&spec)?;
    let prop = ExactPropagator::new(&h)?;
    let coeffs = prop.coefficients(&StateVector::vacuum(n_sites));
    let weights: Vec<f64> = (0..spec.dim())
        .map(|c| (c as u64).count_ones() as f64 / n_sites as f64)
        .collect();
    let mut psi = vec![num_complex::Complex64::new(0.0, 0.0); spec.dim()];
    let mut peak = 0.0f64;
    for t in sample_times(horizon, step)? {
        prop.evolve_into(&coeffs, t, &mut psi);
        let n_r: f64 = psi.iter().zip(&weights).map(|(a, w)| a.norm_sqr() * w).sum();
        peak = peak.max(n_r);
    }
    Ok(peak.min(1.0))
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn point_error(delta: f64, v: f64, e: Error) -> Error {
    Error::Numerical(format!("grid point (delta={delta}, v={v}): {e}"))
}

/// Peak excitation density over the whole grid. Points are independent and
/// evaluated in parallel; row order does not depend on the thread count.
pub fn phase_diagram_scan(grid: &ScanGrid, threads: Option<usize>) -> Result<ScanResult> {
    grid.validate()?;
    let points = grid.points();
    let rows = with_threads(threads, || {
        points
            .par_iter()
            .map(|&(delta, v)| {
                peak_density(grid.n_sites, delta, v, grid.horizon_cycles, grid.sample_step_cycles)
                    .map(|peak_n_r| ScanRow { delta, v, peak_n_r })
                    .map_err(|e| point_error(delta, v, e))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ScanResult { rows })
}

/// One fixed-`V` slice of the scan, over the Δ axis of `grid`.
pub fn detuning_sweep(v: f64, grid: &ScanGrid, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let slice = ScanGrid {
        v_min: v,
        v_max: v,
        ..grid.clone()
    };
    Ok(phase_diagram_scan(&slice, threads)?
        .rows
        .into_iter()
        .map(|r| SweepRow {
            delta: r.delta,
            peak_n_r: r.peak_n_r,
        })
        .collect())
}

/// Indices of strict-on-the-left local maxima (`y[i-1] < y[i] >= y[i+1]`).
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i - 1] < values[i] && values[i] >= values[i + 1])
        .collect()
}
