//! Achievable rates of mixed partial decode-and-forward and
//! compress-and-forward strategies over Gaussian relay networks.

pub mod config;
pub mod discrete;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod network;
pub mod optimize;
pub mod protocol;
pub mod signal;
pub mod verify;

pub use error::{Error, Result};
pub use network::{Channel, Ordering, Owner, Param, PowerAllocation, Topology};
