//! Numerical toolkit for entanglement in lattice ground states: regions and
//! buffers, pure states and their amplitude/phase decomposition, the
//! transverse-field Ising model, classical decorrelation measures, Markov-type
//! reconstructions and the entropy/spectral-tail bounds built from them.

pub mod approximation;
pub mod audit;
pub mod bounds;
pub mod decorrelation;
pub mod error;
pub mod generators;
pub mod ising;
pub mod lattice;
pub mod registry;
pub mod states;

pub use error::{Error, Result};
