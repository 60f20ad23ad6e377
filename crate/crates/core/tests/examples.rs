use fragsim::evolution::{evolve, Method, StateVector};
use fragsim::experiments::{
    detuning_sweep, dominant_period, extract_period, peak_density, phase_diagram_scan, PeriodTarget,
    ScanGrid,
};
use fragsim::model::resonance_detuning;
use fragsim::{BasisConfig, ChainSpec, SectorLabel};

fn small_grid() -> ScanGrid {
    ScanGrid {
        delta_min: 0.0,
        delta_max: 8.0,
        delta_step: 0.5,
        v_min: 0.0,
        v_max: 10.0,
        v_step: 2.5,
        horizon_cycles: 10.0,
        ..ScanGrid::default()
    }
}

#[test]
fn resonant_vacuum_dynamics_stay_in_two_runs() {
    let spec = ChainSpec::new(5, 3.5, 7.0);
    let series = evolve(&spec, &StateVector::vacuum(5), 30.0, 0.005, Method::Exact, &[]).unwrap();
    let vacuum = series.sector_series(SectorLabel::Vacuum).unwrap();
    let uniform = series.sector_series(SectorLabel::Uniform(2)).unwrap();
    let leak = vacuum.iter().zip(&uniform).map(|(a, b)| 1.0 - a - b).fold(0.0, f64::max);
    let reached = uniform.iter().copied().fold(0.0, f64::max);
    assert!(leak < 0.4, "leakage {leak}");
    assert!(reached > 0.5, "uniform(2) peak {reached}");
}

#[test]
fn free_resonant_atoms_fully_invert() {
    let peak = peak_density(5, 0.0, 0.0, 30.0, 0.01).unwrap();
    assert!((peak - 1.0).abs() < 1e-6, "{peak}");
}

#[test]
fn halving_sample_step_barely_moves_scan() {
    let coarse = phase_diagram_scan(&small_grid(), None).unwrap();
    let fine = phase_diagram_scan(&ScanGrid { sample_step_cycles: 0.005, ..small_grid() }, None).unwrap();
    for (a, b) in coarse.rows.iter().zip(&fine.rows) {
        assert!((a.peak_n_r - b.peak_n_r).abs() < 1e-3, "{a:?} vs {b:?}");
    }
}

#[test]
fn sweep_is_a_slice_of_the_scan() {
    let grid = small_grid();
    let scan = phase_diagram_scan(&grid, None).unwrap();
    let sweep = detuning_sweep(5.0, &grid, None).unwrap();
    let slice: Vec<_> = scan.rows.iter().filter(|r| r.v == 5.0).collect();
    assert_eq!(slice.len(), sweep.len());
    for (s, r) in sweep.iter().zip(slice) {
        assert_eq!((s.delta, s.peak_n_r), (r.delta, r.peak_n_r));
    }
}

#[test]
fn free_atom_sweep_is_even_in_detuning() {
    let grid = ScanGrid {
        delta_min: -3.0,
        delta_max: 3.0,
        delta_step: 0.25,
        horizon_cycles: 10.0,
        ..ScanGrid::default()
    };
    let rows = detuning_sweep(0.0, &grid, None).unwrap();
    let n = rows.len();
    for i in 0..n {
        assert_eq!(rows[i].delta, -rows[n - 1 - i].delta);
        assert!((rows[i].peak_n_r - rows[n - 1 - i].peak_n_r).abs() < 1e-9);
    }
}

/// Mean spacing between the maxima of successive excursions above half the
/// trace maximum. An excursion only ends once the trace drops below a
/// quarter of the maximum, so small fast wiggles are not counted as peaks.
fn peak_to_peak(signal: &[f64], step: f64) -> f64 {
    let top = signal.iter().copied().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    let mut current: Option<usize> = None;
    for (i, &x) in signal.iter().enumerate() {
        match current {
            Some(best) if x < 0.25 * top => {
                peaks.push(best);
                current = None;
            }
            Some(best) if x > signal[best] => current = Some(i),
            None if x > 0.5 * top => current = Some(i),
            _ => {}
        }
    }
    (peaks[peaks.len() - 1] - peaks[0]) as f64 * step / (peaks.len() - 1) as f64
}

#[test]
fn pair_period_matches_peak_spacing() {
    let v = 10.0;
    let spec = ChainSpec::new(2, resonance_detuning(2, v).unwrap(), v);
    let rr: BasisConfig = "11".parse().unwrap();
    let series = evolve(&spec, &StateVector::vacuum(2), 60.0, 0.005, Method::Exact, &[rr]).unwrap();
    let fft = extract_period(&series, PeriodTarget::Config(rr)).unwrap();
    let direct = peak_to_peak(series.config_series(&rr).unwrap(), series.step());
    assert!((fft - direct).abs() / direct < 0.02, "fft {fft} vs peaks {direct}");
}

#[test]
fn synthetic_period() {
    let step = 0.001;
    let signal: Vec<f64> = (0..40_000)
        .map(|i| (std::f64::consts::PI * i as f64 * step / 4.0).sin().powi(2))
        .collect();
    let t = dominant_period(&signal, step).unwrap();
    assert!((t - 4.0).abs() < 0.04, "{t}");
}
