//! Synchronous non-local games: rules, correlations, products, and exact and numerical
//! bounds on their local, non-signalling, quantum and quantum-commuting values.

pub mod catalog;
pub mod checks;
pub mod correlation;
pub mod error;
pub mod exact;
pub mod game;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod nc;
pub mod quantum;
pub mod rational;
pub mod sdp;

pub use error::{Error, Result};
