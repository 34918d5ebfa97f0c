//! Entanglement propagation in a spin-1/2 XX chain with one-qubit sender and
//! receiver: excitation-sector dynamics, pairwise concurrence, relay
//! entanglement, entangled clusters and the parameter searches built on them.

pub mod cluster;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod field;
pub mod oracle;
pub mod relay;
pub mod search;
pub mod spectral;
pub mod state;
pub mod stats;
pub mod sweep;

/// Double-precision complex scalar used throughout.
pub type Complex = nalgebra::Complex<f64>;

pub use config::ChainConfig;
pub use error::{Coordinate, Error, Result};
pub use spectral::{ChainModel, Label, SectorBasis};
pub use state::{BlockDensityMatrix, InitialStateParams, QubitParams};
