//! Core library of `remsim`: a desk-scale system simulator for the downlink of
//! a user-centric cell-free massive MIMO network, plus a radio environment map
//! (REM) that learns which serving-cluster size maximizes energy efficiency
//! for a given UE layout and amplifier hardware.
//!
//! The crate is organized as a pipeline:
//!
//! * [`scenario`] - deployment geometry, radio and energy parameters, UE layouts
//! * [`channel`] - distance-based path loss, shadowing, Rayleigh fading
//! * [`pa`] - soft-limiter power amplifier model and consumption laws
//! * [`precoding`] - serving clusters, per-AP zero-forcing, SINR, spectral efficiency
//! * [`simulator`] - round-robin scheduler, per-drop bit/energy accounting
//! * [`rem`] - pattern-keyed store of energy-efficiency statistics and the
//!   epsilon-greedy action selector built on top of it
//!
//! Every random quantity is derived from an explicit `u64` seed through a
//! counter-based ChaCha generator, so any result in this crate can be
//! reproduced bit for bit from its inputs.

pub mod channel;
pub mod error;
pub mod pa;
pub mod precoding;
pub mod rem;
pub mod scenario;
pub mod simulator;

pub use channel::ChannelRealization;
pub use error::Error;
pub use pa::{OperatingPoint, PaClass};
pub use precoding::ClusterAssignment;
pub use rem::{PatternKey, RemStore};
pub use scenario::{ApConfig, Scenario, UeLocationPattern};
pub use simulator::{DropResult, Schedule};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
