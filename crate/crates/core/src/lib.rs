//! Numerical engine for a one-dimensional array of delta barriers placed at
//! `x_n = x0 lambda^n` with strengths falling off as `1 / x_n`.
//!
//! The array is invariant under `x -> lambda x`. The crate builds the
//! zero-energy mode from transfer matrices and exposes its scaling exponent
//! and log-periodic profile. It propagates negative- and positive-energy
//! solutions across barriers and evaluates the cutoff momentum-space
//! transform in all three small-momentum regimes. The `oracle` module holds
//! independent brute-force checks of these results.

pub mod error;
pub mod fit;
pub mod logspace;
pub mod model;
pub mod momentum;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod spectrum;
pub mod zero_mode;

pub use error::{Error, Result};
pub use logspace::SignedLog;
pub use model::{
    barrier_position, interval_index, jump_coefficient, spacing, IntervalIndex, ModelParams,
};
pub use momentum::{CutoffSpec, ModeTable, MomentumSample, Regime};
pub use spectrum::{EvanescentCoeffs, PlaneWaveCoeffs};
pub use zero_mode::{
    initial_b0, roots_generic, roots_special, step_matrix, Direction, RootData, SegmentCoeffs,
    Transfer2, ZeroModeState, DEFAULT_A0,
};

/// The golden ratio, where the `mu = 1` scaling exponent crosses 1.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;
