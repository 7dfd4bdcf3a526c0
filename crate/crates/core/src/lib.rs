//! Driven cycle-graph oscillator networks in the harmonic and Duffing regimes,
//! with the spectral readouts built on top of them.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod classify;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod integrate;
pub mod readout;
pub mod seeds;
pub mod shape;
pub mod substrate;

pub use drive::{DriveSpec, NoiseSpec, SampledNoise, SnrConvention};
pub use dynamics::{CouplingTensorView, RegimeParams};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentKind, RunManifest};
pub use integrate::{integrate, IntegratorConfig, Method, Trajectory};
pub use shape::{PhiEstimate, ShapeProtocol};
pub use substrate::{ModeIndex, Parity, RingSubstrate};
