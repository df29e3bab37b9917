pub mod bits;
pub mod error;
pub mod finmod;
pub mod finring;
pub mod instance;
pub mod laws;
pub mod par;
pub mod predicates;
pub mod zlattice;

pub use error::{Error, Result};
