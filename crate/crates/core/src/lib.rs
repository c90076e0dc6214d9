//! Achievable delivery times, converse bounds and simulators for the symmetric
//! cache-aided MISO broadcast channel with partial channel knowledge at the
//! transmitter.
//!
//! * [`analytics`]: closed-form centralized and decentralized GNDT/GDoF.
//! * [`bounds`]: the cut-set style lower bound and gap scans.
//! * [`scheme`]: bit-exact placement, XOR multicast delivery and decoding.
//! * [`phy`]: Monte Carlo check of the common/private rate-splitting GDoF.

pub mod analytics;
pub mod bounds;
mod error;
pub mod model;
pub mod phy;
pub mod rng;
pub mod scheme;

pub use error::{Error, Result};
pub use model::{GndtKind, GndtPoint, OperatingPoint, SystemParams};
