//! Exactly reproducible simulation and analysis of cyclic particle systems
//! on a ring, together with the cellular automaton and ballistic annihilation
//! models they are compared against.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod raster;
pub mod rng;
pub mod verify;

pub use error::{CpsError, Result};
pub use lattice::{embed, reconstruct, Coloring, EdgeConfig, EdgeKind};
pub use rng::RngStream;
