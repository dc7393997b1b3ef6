//! Simulation of a two-photon polarization-parity gate driven through a
//! ring cavity with a cross-Kerr medium.
//!
//! The closed-form layers ([`cavity`], [`states`], [`analysis`] and the
//! lossy-bus part of [`gate`]) are generic over the scalar type; the
//! Monte Carlo sampler, the Fock-space [`oracle`] and the [`cli`] run in `f64`.

pub mod analysis;
pub mod cavity;
pub mod cli;
pub mod error;
pub mod gate;
pub mod matrix;
pub mod oracle;
pub mod scalar;
pub mod states;

pub use cavity::{
    approx_magnitudes, lossy_mode_matrix, lossy_transfer_coefficients, mode_unitary, transfer_coefficients,
    CavityParams, LossyTransferCoefficients, TransferCoefficients,
};
pub use error::{GateError, Result};
pub use gate::{evolve_lossless, evolve_lossy, DetectorModel, GateOutcome, OutputMode};
pub use scalar::Real;
pub use states::{Component, HybridState, Parity, ParityState, PolarizationState};

pub type C32 = num_complex::Complex32;
pub type C64 = num_complex::Complex64;

pub type CavityParamsF32 = CavityParams<f32>;
pub type CavityParamsF64 = CavityParams<f64>;
pub type PolarizationStateF32 = PolarizationState<f32>;
pub type PolarizationStateF64 = PolarizationState<f64>;
pub type OddDensityF32 = gate::OddDensity<f32>;
pub type OddDensityF64 = gate::OddDensity<f64>;
