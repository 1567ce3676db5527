//! Desk-scale simulator for photon-pair generation by spontaneous four-wave
//! mixing (SFWM) in a χ(3) waveguide, pumped either by a coherent laser or by
//! temporally incoherent (ASE-like) light.
//!
//! The crate covers the full chain from pump spectra to measurable statistics:
//!
//! * [`grid`] — uniform angular-frequency grids, band geometry, boundary
//!   symmetrization around the pump;
//! * [`pump`] — coherent amplitude-density and incoherent discrete-component
//!   pump models, normalization and optical power;
//! * [`measured`] — ingestion of measured wavelength spectra and resampling
//!   onto frequency grids;
//! * [`waveguide`] — Taylor dispersion, phase mismatch, sinc phase matching
//!   and loss-aware split-step accumulation of the biphoton amplitude;
//! * [`biphoton`] — discretized joint spectral amplitudes, filtering, Schmidt
//!   purity and channelized joint spectral intensities;
//! * [`rates`] — closed-form generation rates per detuning interval and their
//!   quadrature/Monte-Carlo counterparts;
//! * [`channels`] — DWDM channel banks on the ITU grid;
//! * [`counting`] — the channelized counting pipeline, noise and efficiency
//!   models, CAR analysis and Poissonian count simulation;
//! * [`entangle`] — the Sagnac-loop polarization-entangled state, fringes,
//!   CHSH, fidelity and linear tomography.
//!
//! All simulation quantities are kept in "simulation units": angular
//! frequencies in rad/s, lengths in m, and a configurable power prefactor κ
//! standing in for the bundled field constants. Every operation is pure given
//! its inputs (and an explicit seed where randomness is involved), so values
//! can be shared freely across threads. The grid-sized inner loops are
//! data-parallel; they run on rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential iteration otherwise.

pub mod biphoton;
pub mod channels;
pub mod counting;
pub mod entangle;
pub mod error;
pub mod exec;
pub mod grid;
pub mod measured;
pub mod pump;
pub mod quad;
pub mod rates;
pub mod waveguide;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
