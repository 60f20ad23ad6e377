//! Chain parameters, configurations and the Hamiltonian.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain for which the matrix-free Hamiltonian is built.
pub const MAX_SITES: usize = 24;

/// Dense matrices are limited to this dimension (N = 12).
pub const DENSE_DIM_LIMIT: usize = 4096;

/// A static control atom to the left of site 1.
///
/// Only its interaction with site 1 matters: when `excited`, every
/// configuration with site 1 in `|r⟩` is shifted up by `v_control`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlAtom {
    pub v_control: f64,
    pub excited: bool,
}

/// Physical parameters of the chain, all in units of the Rabi frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub rabi: f64,
    pub detuning: f64,
    pub interaction: f64,
    pub control: Option<ControlAtom>,
}

impl ChainSpec {
    /// Chain with `rabi = 1` and no control atom.
    pub fn new(n_sites: usize, detuning: f64, interaction: f64) -> Self {
        ChainSpec {
            n_sites,
            rabi: 1.0,
            detuning,
            interaction,
            control: None,
        }
    }

    pub fn with_control(mut self, v_control: f64, excited: bool) -> Self {
        self.control = Some(ControlAtom { v_control, excited });
        self
    }

    /// Checks every invariant, including `v_control > interaction`.
    pub fn validate(&self) -> Result<()> {
        self.check_structure()?;
        if let Some(c) = &self.control {
            if c.v_control <= self.interaction {
                return Err(Error::config(
                    "v_control",
                    format!(
                        "control shift {} must exceed the chain interaction {}",
                        c.v_control, self.interaction
                    ),
                ));
            }
        }
        Ok(())
    }

    /// The subset of invariants the Hamiltonian itself needs. A zero or weak
    /// control shift is allowed here so that it can be compared against the
    /// bare chain.
    pub fn check_structure(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::config("n_sites", "must be at least 1"));
        }
        if self.n_sites > MAX_SITES {
            return Err(Error::Capacity {
                what: "chain length",
                requested: self.n_sites,
                limit: MAX_SITES,
            });
        }
        if !(self.rabi.is_finite() && self.rabi > 0.0) {
            return Err(Error::config("rabi", "must be finite and positive"));
        }
        if !self.detuning.is_finite() {
            return Err(Error::config("delta", "must be finite"));
        }
        if !(self.interaction.is_finite() && self.interaction >= 0.0) {
            return Err(Error::config("v", "must be finite and non-negative"));
        }
        if let Some(c) = &self.control {
            if !(c.v_control.is_finite() && c.v_control >= 0.0) {
                return Err(Error::config(
                    "v_control",
                    "must be finite and non-negative",
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    fn control_shift(&self) -> f64 {
        match self.control {
            Some(ControlAtom {
                v_control,
                excited: true,
            }) => v_control,
            _ => 0.0,
        }
    }
}

/// A computational basis configuration. Site 1 is the lowest-order bit of
/// the integer encoding and the leftmost character of the bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisConfig {
    n_sites: usize,
    bits: u64,
}

impl BasisConfig {
    pub fn new(n_sites: usize, bits: u64) -> Result<Self> {
        if n_sites == 0 || n_sites > 63 {
            return Err(Error::input(format!("unsupported chain length {n_sites}")));
        }
        if bits >> n_sites != 0 {
            return Err(Error::input(format!(
                "configuration {bits} does not fit in {n_sites} sites"
            )));
        }
        Ok(BasisConfig { n_sites, bits })
    }

    pub(crate) fn from_raw(n_sites: usize, bits: u64) -> Self {
        debug_assert!(bits >> n_sites == 0);
        BasisConfig { n_sites, bits }
    }

    pub fn vacuum(n_sites: usize) -> Self {
        BasisConfig { n_sites, bits: 0 }
    }

    /// Iterates over all `2^n` configurations in integer order.
    pub fn all(n_sites: usize) -> impl Iterator<Item = BasisConfig> {
        (0..1u64 << n_sites).map(move |bits| BasisConfig { n_sites, bits })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Occupation of site `i`, 0-based.
    pub fn is_excited(&self, site: usize) -> bool {
        (self.bits >> site) & 1 == 1
    }

    pub fn excitations(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn adjacent_pairs(&self) -> u32 {
        (self.bits & (self.bits >> 1)).count_ones()
    }

    pub fn flip(&self, site: usize) -> Self {
        BasisConfig {
            n_sites: self.n_sites,
            bits: self.bits ^ (1 << site),
        }
    }

    pub fn reflect(&self) -> Self {
        let bits = self.bits.reverse_bits() >> (64 - self.n_sites);
        BasisConfig {
            n_sites: self.n_sites,
            bits,
        }
    }
}

impl fmt::Display for BasisConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_sites {
            f.write_str(if self.is_excited(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BasisConfig {
    type Err = Error;

    /// Parses a string like `11010`, site 1 first.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' | 'g' => {}
                '1' | 'r' => bits |= 1 << i,
                _ => {
                    return Err(Error::input(format!(
                        "invalid character {ch:?} in configuration {s:?}"
                    )))
                }
            }
        }
        BasisConfig::new(s.chars().count(), bits)
    }
}

/// Fragmentation class of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "label", content = "k", rename_all = "snake_case")]
pub enum SectorLabel {
    Vacuum,
    /// Every run of excitations has the same length `k`.
    Uniform(usize),
    /// Runs of at least two different lengths.
    Hybrid,
}

impl SectorLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SectorLabel::Vacuum => "vacuum",
            SectorLabel::Uniform(_) => "uniform",
            SectorLabel::Hybrid => "hybrid",
        }
    }

    /// `k` for uniform sectors, 0 otherwise.
    pub fn run_length(&self) -> usize {
        match self {
            SectorLabel::Uniform(k) => *k,
            _ => 0,
        }
    }

    pub fn from_parts(name: &str, k: usize) -> Result<Self> {
        match (name, k) {
            ("vacuum", 0) => Ok(SectorLabel::Vacuum),
            ("hybrid", 0) => Ok(SectorLabel::Hybrid),
            ("uniform", k) if k > 0 => Ok(SectorLabel::Uniform(k)),
            _ => Err(Error::input(format!("unknown sector label {name:?} with k={k}"))),
        }
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorLabel::Uniform(k) => write!(f, "uniform({k})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Lengths of the maximal blocks of excited sites, left to right.
pub fn run_lengths(config: &BasisConfig) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut bits = config.bits;
    while bits != 0 {
        bits >>= bits.trailing_zeros();
        let len = bits.trailing_ones();
        runs.push(len as usize);
        // len < 64 since at most 63 sites
        bits >>= len;
    }
    runs
}

pub fn classify(config: &BasisConfig) -> SectorLabel {
    let runs = run_lengths(config);
    match runs.split_first() {
        None => SectorLabel::Vacuum,
        Some((&first, rest)) if rest.iter().all(|&r| r == first) => SectorLabel::Uniform(first),
        Some(_) => SectorLabel::Hybrid,
    }
}

/// Detuning at which a single run of `k` excitations is degenerate with the
/// vacuum: `kΔ = (k−1)V`.
pub fn resonance_detuning(k: usize, interaction: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::input("run length k must be at least 1"));
    }
    if !(interaction.is_finite() && interaction >= 0.0) {
        return Err(Error::input(format!("interaction {interaction} must be non-negative")));
    }
    Ok((k - 1) as f64 * interaction / k as f64)
}

/// Energy of one run of length `len`, snapped to zero when the two terms
/// cancel to within rounding.
fn run_energy(len: usize, detuning: f64, interaction: f64) -> f64 {
    let gain = (len - 1) as f64 * interaction;
    let cost = len as f64 * detuning;
    let e = gain - cost;
    if e.abs() <= 4.0 * f64::EPSILON * gain.abs().max(cost.abs()) {
        0.0
    } else {
        e
    }
}

fn energy_unchecked(config: &BasisConfig, spec: &ChainSpec) -> f64 {
    let mut counts = [0u32; 64];
    for len in run_lengths(config) {
        counts[len] += 1;
    }
    let mut e = 0.0;
    for (len, &m) in counts.iter().enumerate().skip(1) {
        if m > 0 {
            e += m as f64 * run_energy(len, spec.detuning, spec.interaction);
        }
    }
    if config.is_excited(0) {
        e += spec.control_shift();
    }
    e
}

/// Diagonal matrix element `⟨c|H|c⟩ = −Δ·#excited + V·#adjacent pairs
/// (+ V₁ if the control atom is excited and site 1 is excited)`.
pub fn diagonal_energy(config: &BasisConfig, spec: &ChainSpec) -> Result<f64> {
    if config.n_sites() != spec.n_sites {
        return Err(Error::input(format!(
            "configuration has {} sites, chain has {}",
            config.n_sites(),
            spec.n_sites
        )));
    }
    Ok(energy_unchecked(config, spec))
}

/// Hamiltonian of the driven chain in the configuration basis.
///
/// Stored as its diagonal plus the uniform transverse drive `Ω/2` between
/// configurations one bit flip apart, which is enough to apply it to a
/// vector without forming the matrix. The matrix is real symmetric.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_sites: usize,
    half_rabi: f64,
    diagonal: Vec<f64>,
}

pub fn build_hamiltonian(spec: &ChainSpec) -> Result<Hamiltonian> {
    spec.check_structure()?;
    let diagonal = BasisConfig::all(spec.n_sites)
        .map(|c| energy_unchecked(&c, spec))
        .collect();
    Ok(Hamiltonian {
        n_sites: spec.n_sites,
        half_rabi: 0.5 * spec.rabi,
        diagonal,
    })
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn rabi(&self) -> f64 {
        2.0 * self.half_rabi
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for site in 0..self.n_sites {
                acc += x[c ^ (1 << site)];
            }
            *o = x[c] * self.diagonal[c] + acc * self.half_rabi;
        }
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(psi, &mut h_psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let max_diag = self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        max_diag + self.n_sites as f64 * self.half_rabi
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::Capacity {
                what: "dense Hamiltonian dimension",
                requested: dim,
                limit: DENSE_DIM_LIMIT,
            });
        }
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for c in 0..dim {
            for site in 0..self.n_sites {
                h[(c, c ^ (1 << site))] = self.half_rabi;
            }
        }
        Ok(h)
    }
}
