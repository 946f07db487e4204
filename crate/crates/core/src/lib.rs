//! Gabidulin, Kötter–Kschischang and Mahdavifar–Vardy codes for random
//! linear network coding, the packet-level union codes they induce, and a
//! two-tier (packet, then subspace/rank) decoding pipeline with a seeded
//! network simulator.

pub mod codes;
pub mod config;
pub mod decoders;
pub mod error;
pub mod gf;
pub mod gfp;
pub mod linpoly;
pub mod metrics;
pub mod sim;
pub mod union;

pub use error::{Error, Result};
pub use gf::{FieldContext, FieldElement};

/// Toolkit version stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
