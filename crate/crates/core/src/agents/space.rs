use crate::env::{Action, ChannelId, JointAction, PowerSet};
use crate::error::{Error, Result};

/// Default limit on how many joint actions may be materialized.
pub const DEFAULT_SPACE_CAP: u64 = 1 << 20;

/// `(n * k)^x`, the number of joint actions for an adversary that picks `x`
/// (channel, power) pairs out of `n` channels and `k` power levels.
pub fn action_space_size(n: u64, k: u64, x: u32) -> Result<u64> {
    if n == 0 || k == 0 || x == 0 {
        return Err(Error::InvalidAgent(
            "n, k and x must all be at least 1".into(),
        ));
    }
    n.checked_mul(k)
        .and_then(|nk| nk.checked_pow(x))
        .ok_or(Error::ActionSpaceOverflow)
}

/// Every joint action of an `x`-channel adversary, ordered lexicographically
/// (first pair most significant; within a pair, channel then power).
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpace {
    n_channels: usize,
    powers: PowerSet,
    x: usize,
    entries: Vec<JointAction>,
}

impl ActionSpace {
    pub fn build(n_channels: usize, powers: PowerSet, x: usize, cap: u64) -> Result<Self> {
        let size = action_space_size(n_channels as u64, powers.len() as u64, x as u32)?;
        if size > cap {
            return Err(Error::ActionSpaceTooLarge {
                size: size as u128,
                cap,
            });
        }
        let k = powers.len();
        let pairs = n_channels * k;
        let pair = |p: usize| Action::new(ChannelId::new_unchecked(p / k + 1), powers.level(p % k));
        let entries = (0..size as usize)
            .map(|mut idx| {
                let mut joint = vec![pair(0); x];
                for slot in joint.iter_mut().rev() {
                    *slot = pair(idx % pairs);
                    idx /= pairs;
                }
                joint
            })
            .collect();
        Ok(ActionSpace {
            n_channels,
            powers,
            x,
            entries,
        })
    }

    pub fn single(n_channels: usize, powers: PowerSet) -> Result<Self> {
        ActionSpace::build(n_channels, powers, 1, DEFAULT_SPACE_CAP)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn channels_per_action(&self) -> usize {
        self.x
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn powers(&self) -> &PowerSet {
        &self.powers
    }

    pub fn entry(&self, i: usize) -> &JointAction {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[JointAction] {
        &self.entries
    }

    pub fn index_of(&self, joint: &JointAction) -> Option<usize> {
        self.entries.iter().position(|e| e == joint)
    }
}
