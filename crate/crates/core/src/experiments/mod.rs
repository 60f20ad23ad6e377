//! The numerical experiments: phase-diagram scans and detuning sweeps,
//! oscillation periods along resonance lines with power-law fits, and
//! secondary fragmentation by a control atom.

mod fit;
mod period;
mod scan;
mod secondary;

pub use fit::{fit_power_law, PeriodFit, PeriodPoint};
pub use period::{
    dominant_period, estimated_period, extract_period, locate_resonance, measure_period,
    period_scaling_run,
    PeriodMeasurement, PeriodOptions, PeriodScan, PeriodTarget,
};
pub use scan::{
    axis, detuning_sweep, local_maxima, peak_density, phase_diagram_scan, ScanGrid, ScanResult,
    ScanRow, SweepRow,
};
pub use secondary::{
    secondary_fragmentation_run, ConfigPeak, SecondaryParams, SecondaryRun, SuppressionReport,
};
