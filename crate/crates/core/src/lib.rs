pub mod carver;
pub mod channels;
pub mod coherence;
pub mod error;
pub mod group_rep;
pub mod numerics;
pub mod purification;
pub mod star_algebra;

pub use error::{Error, Result};
