//! Runs one experiment from a validated [`RunConfig`] and writes its files.

use std::path::{Path, PathBuf};

use crate::config::{Experiment, PropagatorKind, RunConfig};
use crate::constraints::decompose;
use crate::error::{Error, Result};
use crate::evolution::{evolve, Method, StateVector, DEFAULT_HORIZON, DEFAULT_SAMPLE_STEP};
use crate::experiments::{
    axis, detuning_sweep, fit_power_law, period_scaling_run, phase_diagram_scan,
    secondary_fragmentation_run, PeriodOptions, PeriodPoint, SecondaryParams,
};
use crate::graph::{build_graph, GraphReport};
use crate::io::{self, PeriodRow, SecondaryTable};

fn out_path(config: &RunConfig, experiment: Experiment, ext: &str) -> PathBuf {
    config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{ext}", experiment.name())))
}

/// `runs/p3.csv` → `runs/p3.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Runs `experiment`, writes its outputs and returns a one-line summary.
pub fn dispatch(experiment: Experiment, config: &RunConfig) -> Result<String> {
    config.validate()?;
    let threads = config.resolved_threads()?;
    match experiment {
        Experiment::Sectors => {
            let n = config.n_sites_or(5);
            let d = decompose(n)?;
            let path = out_path(config, experiment, "csv");
            io::write_sectors(io::create(&path)?, &d)?;
            Ok(format!(
                "sectors: {} configurations of {n} sites ({} hybrid) -> {}",
                d.dim(),
                d.hybrid_count(),
                path.display()
            ))
        }
        Experiment::Evolve => {
            let spec = config.chain_spec(5);
            let psi0 = StateVector::basis(&config.initial_config(spec.n_sites)?);
            let tracked = config.tracked_configs(spec.n_sites)?;
            let method = match config.method.unwrap_or_default() {
                PropagatorKind::Exact => Method::Exact,
                PropagatorKind::Stepped => Method::Stepped,
            };
            let series = evolve(
                &spec,
                &psi0,
                config.horizon.unwrap_or(DEFAULT_HORIZON),
                config.sample_step.unwrap_or(DEFAULT_SAMPLE_STEP),
                method,
                &tracked,
            )?;
            let path = out_path(config, experiment, "csv");
            io::write_evolve(io::create(&path)?, &series)?;
            Ok(format!(
                "evolve: {} samples, peak n_r = {:.6} -> {}",
                series.len(),
                series.peak_n_r(),
                path.display()
            ))
        }
        Experiment::Scan => {
            let grid = config.scan_grid();
            let scan = phase_diagram_scan(&grid, threads)?;
            let path = out_path(config, experiment, "csv");
            io::write_scan(io::create(&path)?, &scan)?;
            let max = scan.rows.iter().map(|r| r.peak_n_r).fold(0.0, f64::max);
            Ok(format!(
                "scan: {} grid points, max peak n_r = {max:.6} -> {}",
                scan.rows.len(),
                path.display()
            ))
        }
        Experiment::Sweep => {
            let v = config.v.unwrap_or(10.0);
            let rows = detuning_sweep(v, &config.scan_grid(), threads)?;
            let path = out_path(config, experiment, "csv");
            io::write_sweep(io::create(&path)?, &rows)?;
            Ok(format!("sweep: v = {v}, {} detunings -> {}", rows.len(), path.display()))
        }
        Experiment::Periods => {
            let k = config.k.unwrap_or(2);
            let vs = axis(
                config.v_min.unwrap_or(6.0),
                config.v_max.unwrap_or(12.0),
                config.v_step.unwrap_or(1.0),
            );
            let options = PeriodOptions {
                n_sites: config.n_sites_or(5),
                refine_resonance: config.refine_resonance.unwrap_or(true),
                ..PeriodOptions::default()
            };
            let scan = period_scaling_run(k, &vs, &options, threads)?;
            let path = out_path(config, experiment, "csv");
            let rows: Vec<PeriodRow> = scan.measurements.iter().map(PeriodRow::from).collect();
            io::write_periods(io::create(&path)?, &rows)?;
            let fit_path = sibling(&path, "fit.json");
            io::write_json(io::create(&fit_path)?, &scan.fit)?;
            Ok(format!(
                "periods: k = {k}, {} points, T ~ {:.4}·Δ^{:.4} (r² = {:.4}) -> {}, {}",
                rows.len(),
                scan.fit.prefactor,
                scan.fit.exponent,
                scan.fit.r_squared,
                path.display(),
                fit_path.display()
            ))
        }
        Experiment::Fit => {
            let input = config
                .input
                .as_ref()
                .ok_or_else(|| Error::config("input", "fit needs a periods CSV (--in)"))?;
            let rows = io::read_periods(io::open(input)?)?;
            let k = rows.first().map(|r| r.k).ok_or_else(|| Error::input("periods CSV is empty"))?;
            if rows.iter().any(|r| r.k != k) {
                return Err(Error::input("periods CSV mixes several k"));
            }
            let points: Vec<PeriodPoint> = rows
                .iter()
                .map(|r| PeriodPoint {
                    delta_over_omega: r.delta,
                    period_cycles: r.period_cycles,
                })
                .collect();
            let fit = fit_power_law(k, &points)?;
            let path = out_path(config, experiment, "json");
            io::write_json(io::create(&path)?, &fit)?;
            Ok(format!(
                "fit: k = {k}, exponent {:.4}, prefactor {:.4}, r² = {:.4} -> {}",
                fit.exponent,
                fit.prefactor,
                fit.r_squared,
                path.display()
            ))
        }
        Experiment::Secondary => {
            let defaults = SecondaryParams::default();
            let v0 = config.v.unwrap_or(defaults.v0);
            let params = SecondaryParams {
                n_sites: config.n_sites_or(defaults.n_sites),
                v0,
                v1: config.v_control.unwrap_or(5.0 * v0),
                control_excited: config.control_excited.unwrap_or(defaults.control_excited),
                horizon_cycles: config.horizon.unwrap_or(defaults.horizon_cycles),
                sample_step_cycles: config.sample_step.unwrap_or(defaults.sample_step_cycles),
            };
            let run = secondary_fragmentation_run(&params)?;
            let path = out_path(config, experiment, "csv");
            io::write_secondary(io::create(&path)?, &SecondaryTable::from(&run))?;
            let report_path = sibling(&path, "report.json");
            io::write_json(io::create(&report_path)?, &run.report)?;
            Ok(format!(
                "secondary: forbidden max {:.3e}, accessible max {:.4}, suppression ratio {:.3e} -> {}, {}",
                run.report.forbidden_max,
                run.report.accessible_max,
                run.report.suppression_ratio,
                path.display(),
                report_path.display()
            ))
        }
        Experiment::Graph => {
            let spec = config.chain_spec(5);
            let k = config.k.unwrap_or(2);
            let graph = build_graph(&spec, k, config.resonant_only.unwrap_or(true))?;
            let report = GraphReport::new(&spec, &graph)?;
            let path = out_path(config, experiment, "json");
            io::write_json(io::create(&path)?, &report)?;
            Ok(format!(
                "graph: {} nodes, {} edges, {} components, vacuum component of size {} -> {}",
                report.nodes.len(),
                report.edges.len(),
                report.component_sizes.len(),
                report.vacuum_component.len(),
                path.display()
            ))
        }
    }
}
