//! Closed-system evolution of pure states.
//!
//! Times are in Rabi cycles throughout (`Ωt/2π`). Two propagators are
//! provided: [`ExactPropagator`] diagonalizes the dense Hamiltonian once and
//! evaluates `U e^{−iEt} Uᵀ ψ₀` at arbitrary times, and
//! [`propagate_stepped`] integrates with a truncated Taylor series of the
//! matrix-free Hamiltonian, checking norm drift at every step.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::constraints::SectorDecomposition;
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, BasisConfig, ChainSpec, Hamiltonian, SectorLabel};

/// Default sampling step for dynamics runs, in Rabi cycles.
pub const DEFAULT_SAMPLE_STEP: f64 = 0.005;
/// Default evolution horizon, in Rabi cycles.
pub const DEFAULT_HORIZON: f64 = 30.0;

const NORMALIZATION_TOLERANCE: f64 = 1e-10;
/// Largest norm drift tolerated by the stepped propagator.
pub const STEPPED_NORM_TOLERANCE: f64 = 1e-8;
const TAYLOR_ORDER: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(config: &BasisConfig) -> Self {
        let mut amplitudes = vec![ZERO; 1 << config.n_sites()];
        amplitudes[config.index()] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes }
    }

    pub fn vacuum(n_sites: usize) -> Self {
        Self::basis(&BasisConfig::vacuum(n_sites))
    }

    /// Wraps amplitudes of a normalized state over `2^N` configurations.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() || !amplitudes.len().is_power_of_two() || amplitudes.len() < 2 {
            return Err(Error::input(format!(
                "state dimension {} is not 2^N",
                amplitudes.len()
            )));
        }
        let state = StateVector { amplitudes };
        let drift = (state.norm() - 1.0).abs();
        if drift > NORMALIZATION_TOLERANCE {
            return Err(Error::input(format!("state is not normalized (|norm - 1| = {drift:e})")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        StateVector { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_sites(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, config: &BasisConfig) -> f64 {
        self.amplitudes[config.index()].norm_sqr()
    }

    /// Largest absolute amplitude difference.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Uniform sample times `0, step, 2·step, …` up to `horizon` (in cycles).
pub fn sample_times(horizon: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::input(format!("sample step {step} must be positive")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::input(format!("horizon {horizon} must be positive")));
    }
    let count = (horizon / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

fn cycles_to_time(cycles: f64, rabi: f64) -> f64 {
    TAU * cycles / rabi
}

/// Eigendecomposition of a dense Hamiltonian, reusable for any number of
/// initial states and times.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    rabi: f64,
    energies: Vec<f64>,
    // columns are eigenvectors
    vectors: DMatrix<f64>,
}

impl ExactPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let dense = h.to_dense()?;
        let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
        if eig.eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        Ok(ExactPropagator {
            rabi: h.rabi(),
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Infinite-time average of the total population on `members`
    /// (configuration indices), neglecting interference between degenerate
    /// eigenstates.
    pub fn time_averaged_population(&self, coeffs: &[Complex64], members: &[usize]) -> f64 {
        let dim = self.dim();
        let u = self.vectors.as_slice();
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let col = &u[j * dim..(j + 1) * dim];
                c.norm_sqr() * members.iter().map(|&m| col[m] * col[m]).sum::<f64>()
            })
            .sum()
    }

    /// Eigenbasis coefficients `Uᵀψ`.
    pub fn coefficients(&self, psi: &StateVector) -> Vec<Complex64> {
        let dim = self.dim();
        let u = self.vectors.as_slice();
        (0..dim)
            .map(|j| {
                u[j * dim..(j + 1) * dim]
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(&v, &a)| a * v)
                    .sum()
            })
            .collect()
    }

    /// Writes `ψ(t)` for eigenbasis coefficients `coeffs` into `out`.
    pub fn evolve_into(&self, coeffs: &[Complex64], t_cycles: f64, out: &mut [Complex64]) {
        let dim = self.dim();
        let t = cycles_to_time(t_cycles, self.rabi);
        let u = self.vectors.as_slice();
        out.fill(ZERO);
        for (j, (&c, &e)) in coeffs.iter().zip(&self.energies).enumerate() {
            if c == ZERO {
                continue;
            }
            let phase = c * Complex64::from_polar(1.0, -e * t);
            for (o, &v) in out.iter_mut().zip(&u[j * dim..(j + 1) * dim]) {
                *o += phase * v;
            }
        }
    }

    pub fn propagate(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        if psi0.dim() != self.dim() {
            return Err(Error::input(format!(
                "state dimension {} does not match Hamiltonian dimension {}",
                psi0.dim(),
                self.dim()
            )));
        }
        check_normalized(psi0)?;
        let coeffs = self.coefficients(psi0);
        Ok(times
            .iter()
            .map(|&t| {
                let mut out = vec![ZERO; self.dim()];
                self.evolve_into(&coeffs, t, &mut out);
                StateVector::from_raw(out)
            })
            .collect())
    }
}

fn check_normalized(psi: &StateVector) -> Result<()> {
    let drift = (psi.norm() - 1.0).abs();
    if drift > NORMALIZATION_TOLERANCE {
        return Err(Error::input(format!("initial state is not normalized (|norm - 1| = {drift:e})")));
    }
    Ok(())
}

/// `ψ(t) = e^{−iHt}ψ₀` at each of `times` (Rabi cycles), by full
/// diagonalization.
pub fn propagate_exact(h: &Hamiltonian, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    ExactPropagator::new(h)?.propagate(psi0, times)
}

/// Fixed-step integration with a 16th-order Taylor expansion of `e^{−iHτ}`,
/// using only matrix-vector products. Returns states at `0, dt, 2dt, …,
/// t_end` (cycles). The norm is never renormalized: if it drifts by more
/// than [`STEPPED_NORM_TOLERANCE`] the step was too large and an error is
/// returned.
pub fn propagate_stepped(
    h: &Hamiltonian,
    psi0: &StateVector,
    t_end: f64,
    dt: f64,
) -> Result<Vec<StateVector>> {
    if psi0.dim() != h.dim() {
        return Err(Error::input(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            psi0.dim(),
            h.dim()
        )));
    }
    check_normalized(psi0)?;
    let times = sample_times(t_end, dt)?;
    let tau = cycles_to_time(dt, h.rabi());
    let norm0 = psi0.norm();

    let dim = h.dim();
    let mut psi = psi0.amplitudes().to_vec();
    let mut term = vec![ZERO; dim];
    let mut next = vec![ZERO; dim];
    let mut out = Vec::with_capacity(times.len());
    out.push(psi0.clone());
    for (step, &t) in times.iter().enumerate().skip(1) {
        term.copy_from_slice(&psi);
        for m in 1..=TAYLOR_ORDER {
            h.apply(&term, &mut next);
            let scale = Complex64::new(0.0, -tau / m as f64);
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * scale;
            }
            for (p, t) in psi.iter_mut().zip(&term) {
                *p += t;
            }
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - norm0).abs();
        if !drift.is_finite() || drift > STEPPED_NORM_TOLERANCE {
            return Err(Error::Numerical(format!(
                "norm drift {drift:e} exceeds {STEPPED_NORM_TOLERANCE:e} at t = {t} cycles \
                 (step {step}, dt = {dt} cycles, ||H|| <= {:.3}); reduce the step",
                h.norm_bound()
            )));
        }
        out.push(StateVector::from_raw(psi.clone()));
    }
    Ok(out)
}

/// Which propagator to use for a dynamics run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Exact,
    Stepped,
}

/// Sampled observables of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub n_sites: usize,
    /// Sample times in Rabi cycles.
    pub times: Vec<f64>,
    /// `⟨n_i⟩` per sample, one column per site.
    pub site_populations: Vec<Vec<f64>>,
    /// `Σᵢ⟨nᵢ⟩/N` per sample.
    pub n_r: Vec<f64>,
    /// Column order of `sector_populations`.
    pub sector_labels: Vec<SectorLabel>,
    pub sector_populations: Vec<Vec<f64>>,
    /// Populations of individually tracked configurations.
    pub config_populations: Vec<(BasisConfig, Vec<f64>)>,
    pub energy: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn peak_n_r(&self) -> f64 {
        self.n_r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sector_series(&self, label: SectorLabel) -> Option<Vec<f64>> {
        let col = self.sector_labels.iter().position(|&l| l == label)?;
        Some(self.sector_populations.iter().map(|row| row[col]).collect())
    }

    pub fn config_series(&self, config: &BasisConfig) -> Option<&[f64]> {
        self.config_populations
            .iter()
            .find(|(c, _)| c == config)
            .map(|(_, p)| p.as_slice())
    }

    /// Uniform sample spacing, in cycles.
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// Evaluates every [`TimeSeries`] field for a sequence of states.
pub fn observables(
    states: &[StateVector],
    times: &[f64],
    spec: &ChainSpec,
    decomposition: &SectorDecomposition,
    tracked: &[BasisConfig],
) -> Result<TimeSeries> {
    if states.is_empty() {
        return Err(Error::input("no states to evaluate"));
    }
    if states.len() != times.len() {
        return Err(Error::input(format!(
            "{} states but {} sample times",
            states.len(),
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("sample times must be strictly increasing"));
    }
    let n = spec.n_sites;
    let dim = spec.dim();
    if decomposition.n_sites() != n {
        return Err(Error::input(format!(
            "decomposition has {} sites, chain has {n}",
            decomposition.n_sites()
        )));
    }
    if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::input(format!(
            "state dimension {} does not match 2^{n} = {dim}",
            bad.dim()
        )));
    }
    if let Some(bad) = tracked.iter().find(|c| c.n_sites() != n) {
        return Err(Error::input(format!("tracked configuration {bad} has the wrong length")));
    }

    let h = build_hamiltonian(spec)?;
    let sector_labels = decomposition.all_labels();
    // column of each configuration in `sector_labels`
    let column: Vec<usize> = decomposition
        .labels()
        .iter()
        .map(|l| match l {
            SectorLabel::Vacuum => 0,
            SectorLabel::Uniform(k) => *k,
            SectorLabel::Hybrid => n + 1,
        })
        .collect();

    let mut series = TimeSeries {
        n_sites: n,
        times: times.to_vec(),
        site_populations: Vec::with_capacity(states.len()),
        n_r: Vec::with_capacity(states.len()),
        sector_labels,
        sector_populations: Vec::with_capacity(states.len()),
        config_populations: tracked.iter().map(|c| (*c, Vec::with_capacity(states.len()))).collect(),
        energy: Vec::with_capacity(states.len()),
    };

    for psi in states {
        let mut sites = vec![0.0; n];
        let mut sectors = vec![0.0; n + 2];
        for (c, a) in psi.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            sectors[column[c]] += p;
            let mut bits = c;
            while bits != 0 {
                let site = bits.trailing_zeros() as usize;
                sites[site] += p;
                bits &= bits - 1;
            }
        }
        series.n_r.push(sites.iter().sum::<f64>() / n as f64);
        series.site_populations.push(sites);
        series.sector_populations.push(sectors);
        for (c, pops) in series.config_populations.iter_mut() {
            pops.push(psi.probability(c));
        }
        series.energy.push(h.expectation(psi.amplitudes()));
    }
    Ok(series)
}

/// Evolves `psi0` under `spec` and samples observables every `step` cycles.
pub fn evolve(
    spec: &ChainSpec,
    psi0: &StateVector,
    horizon: f64,
    step: f64,
    method: Method,
    tracked: &[BasisConfig],
) -> Result<TimeSeries> {
    let decomposition = crate::constraints::decompose(spec.n_sites)?;
    let h = build_hamiltonian(spec)?;
    let times = sample_times(horizon, step)?;
    let states = match method {
        Method::Exact => propagate_exact(&h, psi0, &times)?,
        Method::Stepped => propagate_stepped(&h, psi0, horizon, step)?,
    };
    observables(&states, &times, spec, &decomposition, tracked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::decompose;

    fn rabi_formula(delta: f64, t_cycles: f64) -> f64 {
        let w = (1.0 + delta * delta).sqrt();
        (1.0 / (w * w)) * (w * TAU * t_cycles / 2.0).sin().powi(2)
    }

    #[test]
    fn single_atom_rabi_exact() {
        for delta in [0.0, 0.8, -2.5] {
            let h = build_hamiltonian(&ChainSpec::new(1, delta, 0.0)).unwrap();
            let times = sample_times(5.0, 0.01).unwrap();
            let states = propagate_exact(&h, &StateVector::vacuum(1), &times).unwrap();
            for (t, s) in times.iter().zip(&states) {
                let p = s.amplitudes()[1].norm_sqr();
                assert!((p - rabi_formula(delta, *t)).abs() < 1e-12, "delta={delta} t={t}");
            }
        }
    }

    #[test]
    fn single_atom_rabi_stepped() {
        let h = build_hamiltonian(&ChainSpec::new(1, 0.0, 0.0)).unwrap();
        let states = propagate_stepped(&h, &StateVector::vacuum(1), 30.0, DEFAULT_SAMPLE_STEP).unwrap();
        for (i, s) in states.iter().enumerate() {
            let t = i as f64 * DEFAULT_SAMPLE_STEP;
            assert!((s.amplitudes()[1].norm_sqr() - rabi_formula(0.0, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn stepped_rejects_large_step() {
        let h = build_hamiltonian(&ChainSpec::new(5, 3.5, 7.0)).unwrap();
        let err = propagate_stepped(&h, &StateVector::vacuum(5), 30.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err}");
    }

    #[test]
    fn unnormalized_input_rejected() {
        let h = build_hamiltonian(&ChainSpec::new(1, 0.0, 0.0)).unwrap();
        let bad = StateVector::from_raw(vec![Complex64::new(2.0, 0.0), ZERO]);
        assert!(matches!(propagate_exact(&h, &bad, &[0.0]), Err(Error::Input(_))));
        assert!(matches!(propagate_stepped(&h, &bad, 1.0, 0.01), Err(Error::Input(_))));
        assert!(StateVector::from_amplitudes(vec![Complex64::new(2.0, 0.0), ZERO]).is_err());
    }

    #[test]
    fn vacuum_stays_put_without_drive_coupling() {
        // a frozen vacuum: evaluate observables on a constant state
        let spec = ChainSpec::new(5, 0.0, 0.0);
        let d = decompose(5).unwrap();
        let states = vec![StateVector::vacuum(5); 4];
        let ts = observables(&states, &[0.0, 1.0, 2.0, 3.0], &spec, &d, &[]).unwrap();
        assert!(ts.n_r.iter().all(|&x| x == 0.0));
        assert!(ts.sector_populations.iter().all(|row| row[0] == 1.0));
    }

    #[test]
    fn free_atoms_reach_full_inversion() {
        let spec = ChainSpec::new(5, 0.0, 0.0);
        let ts = evolve(&spec, &StateVector::vacuum(5), 1.0, 0.005, Method::Exact, &[]).unwrap();
        for (t, nr) in ts.times.iter().zip(&ts.n_r) {
            assert!((nr - rabi_formula(0.0, *t)).abs() < 1e-10);
        }
        assert!((ts.peak_n_r() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observables_dimension_checks() {
        let spec = ChainSpec::new(3, 0.0, 0.0);
        let d = decompose(3).unwrap();
        let states = vec![StateVector::vacuum(2)];
        assert!(observables(&states, &[0.0], &spec, &d, &[]).is_err());
        assert!(observables(&[], &[], &spec, &d, &[]).is_err());
        let d4 = decompose(4).unwrap();
        assert!(observables(&[StateVector::vacuum(3)], &[0.0], &spec, &d4, &[]).is_err());
    }

    #[test]
    fn two_atom_anti_blockade() {
        let spec = ChainSpec::new(2, 3.5, 7.0);
        let rr: BasisConfig = "11".parse().unwrap();
        let exact = evolve(&spec, &StateVector::vacuum(2), 10.0, 0.005, Method::Exact, &[rr]).unwrap();
        let stepped = evolve(&spec, &StateVector::vacuum(2), 10.0, 0.005, Method::Stepped, &[rr]).unwrap();
        let p_rr = exact.config_series(&rr).unwrap();
        let max_rr = p_rr.iter().copied().fold(0.0, f64::max);
        assert!(max_rr > 0.9, "rr population only reaches {max_rr}");
        let singles = exact.sector_series(SectorLabel::Uniform(1)).unwrap();
        assert!(singles.iter().all(|&p| p < 0.15));
        for (a, b) in p_rr.iter().zip(stepped.config_series(&rr).unwrap()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_times_are_uniform() {
        let t = sample_times(30.0, 0.005).unwrap();
        assert_eq!(t.len(), 6001);
        assert_eq!(t[6000], 30.0);
        assert!(sample_times(1.0, 0.0).is_err());
        assert!(sample_times(-1.0, 0.1).is_err());
    }
}
