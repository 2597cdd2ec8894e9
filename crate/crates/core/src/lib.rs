//! Closed-loop simulation of profile obfuscation on a social network.
//!
//! A noise bot interacts with a simulated network whose recommender builds
//! a recency-weighted interest profile of the account. Privacy is measured
//! two ways: from the like history (theoretical privacy) and from what the
//! recommender actually shows on four feed surfaces (effective privacy).
//!
//! Modules:
//! - [`world`]: network state, content publishing, search and the interaction log.
//! - [`recommender`]: interest profile and feed assembly.
//! - [`bot`]: keyword expansion, noise allocation and the bot loop.
//! - [`metrics`]: feed classification and the privacy formulas.
//! - [`harness`]: scenario files, runs, reports and plots.

pub mod bot;
pub mod harness;
pub mod metrics;
pub mod recommender;
pub mod rng;
pub mod text;
pub mod world;

pub use world::{create_network, NetworkConfig, World};
