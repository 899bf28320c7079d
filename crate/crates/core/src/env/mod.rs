//! Discrete-time jamming environment.
//!
//! A single sender transmits on one or more of `N` channels at fixed power
//! while `M` adversaries each pick `(channel, power)` pairs. The receiver
//! quality is the per-channel SINR; an attack succeeds when the SINR drops
//! below `tau` times the interference-free SNR.

mod channel;
mod reward;
mod scenario;
mod sender;

pub use channel::{compute_sinr, ChannelModel, Fading, FadingDraws};
pub use reward::{attack_success, capacity_drop, individual_reward, success_rate, team_reward};
pub use scenario::{Environment, StepOutcome};
pub use sender::{ArParams, InitialChannel, Sender, SenderProfile, SenderStrategy};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// One-based channel index in `1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(usize);

impl ChannelId {
    pub fn new(index: usize, n_channels: usize) -> Result<Self> {
        if index == 0 || index > n_channels {
            return Err(Error::ChannelOutOfRange { index, n_channels });
        }
        Ok(ChannelId(index))
    }

    /// Builds an id without a range check. Callers must keep `index` within `1..=N`.
    pub(crate) fn new_unchecked(index: usize) -> Self {
        debug_assert!(index >= 1);
        ChannelId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Zero-based position, handy for indexing per-channel arrays.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Transmit power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerLevel(pub f64);

impl PowerLevel {
    pub fn watts(self) -> f64 {
        self.0
    }
}

/// The discrete set `P_0 < P_1 < ... ` of selectable power levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PowerSet(Vec<f64>);

impl PowerSet {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidPowerSet("no power levels".into()));
        }
        if levels.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidPowerSet(
                "power levels must be finite and non-negative".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPowerSet(
                "power levels must be strictly increasing".into(),
            ));
        }
        Ok(PowerSet(levels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn level(&self, i: usize) -> PowerLevel {
        PowerLevel(self.0[i])
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn contains(&self, p: PowerLevel) -> bool {
        self.0.contains(&p.0)
    }
}

impl TryFrom<Vec<f64>> for PowerSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        PowerSet::new(v)
    }
}

impl From<PowerSet> for Vec<f64> {
    fn from(p: PowerSet) -> Self {
        p.0
    }
}

/// A single jamming transmission: one channel at one power level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub channel: ChannelId,
    pub power: PowerLevel,
}

impl Action {
    pub fn new(channel: ChannelId, power: PowerLevel) -> Self {
        Action { channel, power }
    }
}

/// Everything one adversary transmits in one step. Single-channel adversaries
/// emit one `Action`; an `X`-channel adversary emits `X` of them.
pub type JointAction = Vec<Action>;

/// Lagged per-sender-channel SINR used as the learning state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub sinr_lagged: Vec<f64>,
}

impl Observation {
    pub fn new(sinr_lagged: Vec<f64>) -> Self {
        Observation { sinr_lagged }
    }

    pub fn len(&self) -> usize {
        self.sinr_lagged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sinr_lagged.is_empty()
    }
}
