//! Correlation propagation in quantum spin chains.
//!
//! A single spin flip is injected at one end of an open chain polarized
//! along the transverse field; the crate evolves it, builds the reduced state
//! of the two end spins and measures how fast correlations between them
//! switch on as the chain grows.

pub mod analysis;
pub mod chain;
pub mod density;
pub mod error;
pub mod fit;
pub mod full;
pub mod measures;

pub use chain::{build_mode_table, end_amplitudes, ChainSpec, EndPropagator, ModeTable, Model};
pub use error::{Error, Result};
pub use measures::{end_pair_state, sample_all, CorrelationSample, EndPairState, Measure};
