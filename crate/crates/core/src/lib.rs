//! Type 1,1 pseudo-differential operators on band-limited periodic grids.
//!
//! The torus `[0, 2π)ⁿ` with its integer frequency lattice stands in for `ℝⁿ`:
//! operators, spectral supports and norms are computed exactly on the lattice.

pub mod error;
pub mod lp;
pub mod operator;
pub mod pointwise;
pub mod spaces;
pub mod symbols;
pub mod torus;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{LabError, Result};
pub use lp::{LPPartition, ModulationFunction, PartitionParams};
pub use symbols::{DiscreteSymbol, SymbolClass};
pub use torus::{Direction, Freq, FreqSet, SpectralField, TorusGrid};
