//! Entanglement temperature of a free scalar field on a radial lattice.
//!
//! A massless scalar in a static black-hole background is written on a
//! fixed-time slice of Lemaitre coordinates as a flat-space chain of coupled
//! oscillators per angular channel, perturbed to second order in the
//! Lemaitre time offset `eps`. The ground state of each channel is
//! Gaussian, so the entropy across a radial cut and the ground energy follow
//! from dense linear algebra. The ratio of their `eps` slopes is the
//! entanglement temperature, which is compared against the Hawking value.

// `!(x > y)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fit;
pub mod gaussian;
pub mod lattice;
pub mod metric;
pub mod oracle;
pub mod runner;
pub mod thermo;

pub use config::{RawConfig, RunConfig};
pub use error::{Error, ErrorClass, Result};
pub use gaussian::{
    entanglement_entropy, partition_entropy, ChannelSum, ChannelSumParams, GroundState, ReducedSpectrum,
};
pub use lattice::{assemble, build_k0, CouplingMatrix, LatticeConfig};
pub use metric::{hawking_temperature, MetricKind, MetricSpec};
pub use oracle::{brute_force_entropy, GridOracleConfig};
pub use thermo::{area_law_fit, epsilon_sweep, temperature_report, SweepParams, SweepResult, TemperatureReport};
