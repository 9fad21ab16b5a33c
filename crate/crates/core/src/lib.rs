//! Generate new songs in the style of a single seed song.

pub mod bassgen;
pub mod bundled;
pub mod chordgen;
pub mod corpusstats;
pub mod error;
pub mod evalharness;
pub mod melodygen;
pub mod pipeline;
pub mod rng;
pub mod songmodel;
pub mod structuregen;

pub use error::{Error, Result};
