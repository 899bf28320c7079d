//! Scripted senders: constant, sweep, pulse and AR-type channel hopping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelId, PowerLevel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenderStrategy {
    Constant,
    Sweep,
    Pulse,
    #[serde(rename = "ar")]
    ArType,
}

impl SenderStrategy {
    pub fn label(self) -> &'static str {
        match self {
            SenderStrategy::Constant => "constant",
            SenderStrategy::Sweep => "sweep",
            SenderStrategy::Pulse => "pulse",
            SenderStrategy::ArType => "ar",
        }
    }
}

/// Boundary probabilities of the AR-type sender. When the hop overshoots `N`
/// the sender lands on channel 1 with probability `p_high_boundary` (else `N`);
/// when it undershoots 1 it lands on channel 1 with probability
/// `p_low_boundary` (else `N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArParams {
    pub p_high_boundary: f64,
    pub p_low_boundary: f64,
}

impl Default for ArParams {
    fn default() -> Self {
        ArParams {
            p_high_boundary: 0.1,
            p_low_boundary: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniformRandom {
    #[serde(rename = "uniform-random")]
    UniformRandom,
}

/// Starting channel for the constant and AR-type senders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialChannel {
    Fixed(usize),
    Random(UniformRandom),
}

impl InitialChannel {
    pub const UNIFORM: InitialChannel = InitialChannel::Random(UniformRandom::UniformRandom);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenderProfile {
    pub strategy: SenderStrategy,
    #[serde(default = "one")]
    pub channels_used: usize,
    /// Transmit power on each used channel.
    pub powers: Vec<f64>,
    #[serde(default)]
    pub ar_params: ArParams,
    #[serde(default = "uniform")]
    pub initial_channel: InitialChannel,
}

fn one() -> usize {
    1
}

fn uniform() -> InitialChannel {
    InitialChannel::UNIFORM
}

impl SenderProfile {
    /// Single-channel sender at 5 W.
    pub fn single(strategy: SenderStrategy) -> Self {
        SenderProfile {
            strategy,
            channels_used: 1,
            powers: vec![5.0],
            ar_params: ArParams::default(),
            initial_channel: InitialChannel::UNIFORM,
        }
    }

    /// Two-channel sender at 1 W and 5 W.
    pub fn multi(strategy: SenderStrategy) -> Self {
        SenderProfile {
            channels_used: 2,
            powers: vec![1.0, 5.0],
            ..SenderProfile::single(strategy)
        }
    }

    pub fn validate(&self, n_channels: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSender(m));
        if self.channels_used == 0 || self.channels_used > n_channels {
            return bad(format!(
                "channels_used = {} must lie in 1..={n_channels}",
                self.channels_used
            ));
        }
        if self.powers.len() != self.channels_used {
            return bad(format!(
                "{} powers given for {} channels",
                self.powers.len(),
                self.channels_used
            ));
        }
        if self.powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("sender powers must be finite and non-negative".into());
        }
        let ArParams {
            p_high_boundary,
            p_low_boundary,
        } = self.ar_params;
        if !(0.0..=1.0).contains(&p_high_boundary) || !(0.0..=1.0).contains(&p_low_boundary) {
            return bad("ar_params probabilities must lie in [0, 1]".into());
        }
        if let InitialChannel::Fixed(c) = self.initial_channel {
            ChannelId::new(c, n_channels)?;
        }
        if self.strategy == SenderStrategy::Pulse && n_channels < 5 {
            return bad("the pulse sender hops between channels 5 and 1 and needs N >= 5".into());
        }
        Ok(())
    }

    pub fn power_levels(&self) -> Vec<PowerLevel> {
        self.powers.iter().copied().map(PowerLevel).collect()
    }

    /// Scenario label such as `pulse-single` or `sweep-multi`.
    pub fn scenario_label(&self) -> String {
        let mode = if self.channels_used == 1 {
            "single"
        } else {
            "multi"
        };
        format!("{}-{}", self.strategy.label(), mode)
    }
}

/// Stateful sender. Call [`Sender::channels`] once per step with increasing `t`.
#[derive(Debug, Clone)]
pub struct Sender {
    profile: SenderProfile,
    n_channels: usize,
    current: Option<usize>,
}

impl Sender {
    pub fn new(profile: SenderProfile, n_channels: usize) -> Result<Self> {
        profile.validate(n_channels)?;
        Ok(Sender {
            profile,
            n_channels,
            current: None,
        })
    }

    pub fn profile(&self) -> &SenderProfile {
        &self.profile
    }

    /// Channels used at step `t`. Additional channels follow the primary one
    /// consecutively, wrapping from `N` back to 1.
    pub fn channels<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Vec<ChannelId> {
        let primary = self.primary(t, rng);
        let n = self.n_channels;
        (0..self.profile.channels_used)
            .map(|k| ChannelId::new_unchecked((primary - 1 + k) % n + 1))
            .collect()
    }

    fn initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self.profile.initial_channel {
            InitialChannel::Fixed(c) => c,
            InitialChannel::Random(_) => rng.gen_range(1..=self.n_channels),
        }
    }

    fn primary<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> usize {
        let n = self.n_channels;
        match self.profile.strategy {
            SenderStrategy::Constant => match self.current {
                Some(c) => c,
                None => {
                    let c = self.initial(rng);
                    self.current = Some(c);
                    c
                }
            },
            SenderStrategy::Sweep => 1 + (t % n as u64) as usize,
            SenderStrategy::Pulse => {
                if t % n as u64 <= 2 {
                    5
                } else {
                    1
                }
            }
            SenderStrategy::ArType => {
                let next = match self.current {
                    None => self.initial(rng),
                    Some(prev) => ar_next(prev, t, n, self.profile.ar_params, rng),
                };
                self.current = Some(next);
                next
            }
        }
    }
}

/// One AR-type hop. The hop size is `t mod N`; even channels move up, odd
/// channels move down, and overshoots are resolved by the boundary draw.
fn ar_next<R: Rng + ?Sized>(prev: usize, t: u64, n: usize, ar: ArParams, rng: &mut R) -> usize {
    let step = (t % n as u64) as i64;
    let prev = prev as i64;
    let raw = if prev % 2 == 0 {
        prev + step
    } else {
        prev - step
    };
    if raw > n as i64 {
        if rng.gen_bool(ar.p_high_boundary) {
            1
        } else {
            n
        }
    } else if raw < 1 {
        if rng.gen_bool(ar.p_low_boundary) {
            1
        } else {
            n
        }
    } else {
        raw as usize
    }
}
