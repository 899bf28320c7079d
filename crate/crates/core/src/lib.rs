//! Seedable simulator of multi-channel wireless jamming.
//!
//! A scripted sender hops over `N` channels while adversaries choose
//! `(channel, power)` pairs to push the receiver's SINR down. The crate
//! ships the environment ([`env`]), the adversaries ([`agents`]), a small
//! Double-DQN learner with prioritized replay ([`dqn`]), and the Monte Carlo
//! harness that turns trials into success-rate tables ([`experiment`]).
//!
//! ```
//! use jamsim::experiment::{run_trial, ScenarioConfig};
//! use jamsim::agents::{AgentConfig, AgentKind};
//! use jamsim::env::{SenderProfile, SenderStrategy};
//!
//! let mut config = ScenarioConfig::new(
//!     SenderProfile::single(SenderStrategy::Constant),
//!     AgentConfig::of_kind(AgentKind::Random),
//! );
//! config.horizon = 500;
//! let record = run_trial(&config, 7).unwrap();
//! let sra = record.sra(0.5, config.sra_window).unwrap();
//! assert!((0.0..=1.0).contains(&sra));
//! ```
//!
//! The `book/` directory next to the workspace walks through the model in
//! more detail; its code listings are compiled as doctests of this crate.

// Negated comparisons double as NaN rejection in validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod config;
pub mod dqn;
pub mod env;
mod error;
pub mod experiment;
pub mod report;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};

/// Default channel bandwidth in the capacity term of the reward.
pub const DEFAULT_BANDWIDTH: f64 = 20.0;

/// Default discount factor for the learning adversaries.
pub const DEFAULT_GAMMA: f64 = 0.2;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/adversaries.md")]
    mod adversaries {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
