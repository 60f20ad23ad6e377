//! Simulation of a driven one-dimensional Rydberg chain in the anti-blockade
//! regime.
//!
//! The chain Hamiltonian (units of the Rabi frequency, `hbar = 1`) is
//!
//! ```text
//! H = (Ω/2) Σ_i σˣ_i − Δ Σ_i n_i + V Σ_i n_i n_{i+1}
//! ```
//!
//! with open boundaries and nearest-neighbour interaction only. When
//! `kΔ = (k−1)V` a contiguous block of `k` excitations is degenerate with the
//! vacuum, and the dynamics started from the vacuum stay (approximately)
//! inside the sector of configurations whose excitation runs all have
//! length `k`. The crate enumerates those sectors, evolves states exactly,
//! and runs the parameter scans built on top of that.
//!
//! Modules:
//! - [`model`]: configurations, chain parameters, Hamiltonian, resonances.
//! - [`constraints`]: kinetic projectors and the sector decomposition.
//! - [`evolution`]: exact and stepped propagation plus observables.
//! - [`graph`]: block-flip connectivity of configuration space.
//! - [`experiments`]: phase-diagram scans, sweeps, period fits, control atom.
//! - [`io`] and [`config`]: file formats and run configuration.

pub mod cli;
pub mod config;
pub mod constraints;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod model;

pub use error::{Error, Result};
pub use model::{BasisConfig, ChainSpec, ControlAtom, Hamiltonian, SectorLabel};
