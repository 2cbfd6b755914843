//! Casimir interaction between two identical freestanding films.
//!
//! The crate computes
//!
//! * the zero-temperature Lifshitz pressure from the imaginary-frequency
//!   integral ([`imaginary::total_pressure`]),
//! * the spectral distribution of that pressure over real frequencies,
//!   split into evanescent/propagating and TE/TM channels
//!   ([`real::force_spectrum`]),
//! * resonant peak-valley pairs in those spectra, their labels (ENZ,
//!   short-range SPP, SPP) and band-integrated contributions
//!   ([`modes`]),
//! * the averaged force density |P|/t versus thickness and separation
//!   ([`fom`]).
//!
//! Energies are photon energies in eV, lengths are nm and pressures are Pa
//! (negative = attractive).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fom;
pub mod imaginary;
pub mod materials;
pub mod modes;
pub mod optics;
pub mod quad;
pub mod real;
pub mod units;

pub use error::{Error, Result};
pub use fom::{
    asymptote_check, default_thickness_grid, fom, optimal_thickness_curve, pearson, sweep_fom, AsymptoteFit, FomPoint,
    FomScanResult,
};
pub use imaginary::{total_pressure, CavityConfig, PressureResult};
pub use materials::{
    find_enz_frequency, find_spp_frequency, load_nk_table, Extrapolation, LowFrequencyTail, Material,
    MaterialModel, PowerLawDecay, TabulatedMaterial,
};
pub use modes::{
    analyze_spectrum, band_contribution, detect_pairs, label_pairs, slab_mode_dispersion, track_modes, ModeContribution, ModeLabel,
    PeakValleyPair,
};
pub use optics::{Polarization, SlabGeometry};
pub use quad::QuadratureSettings;
pub use real::{
    force_spectrum, integrate_spectrum, spectral_density, Channel, ForceSpectrum, GridPolicy, SpectralDensity,
    SpectrumIntegral, SpectrumOptions,
};
