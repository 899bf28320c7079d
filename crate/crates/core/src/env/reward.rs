use super::ChannelModel;
use crate::error::{Error, Result};

/// Binary attack outcome for one step.
///
/// With several sender channels the aggregate SINR is compared against the
/// aggregate SNR, which reduces to the per-channel test for a single channel.
pub fn attack_success(sinr: &[f64], snr: &[f64], tau: f64) -> Result<bool> {
    if sinr.len() != snr.len() {
        return Err(Error::LengthMismatch {
            expected: snr.len(),
            actual: sinr.len(),
        });
    }
    if sinr.is_empty() {
        return Err(Error::Empty("sinr"));
    }
    let total_sinr: f64 = sinr.iter().sum();
    let total_snr: f64 = snr.iter().sum();
    Ok(total_sinr < tau * total_snr)
}

/// Fraction of successful attacks.
pub fn success_rate(sa: &[bool]) -> Result<f64> {
    if sa.is_empty() {
        return Err(Error::Empty("success flags"));
    }
    Ok(sa.iter().filter(|&&s| s).count() as f64 / sa.len() as f64)
}

/// Shannon capacity lost to interference, summed over sender channels
/// (bits/s/Hz, before scaling by bandwidth).
pub fn capacity_drop(sinr: &[f64], snr: &[f64]) -> f64 {
    sinr.iter()
        .zip(snr)
        .map(|(&i, &n)| (1.0 + n).log2() - (1.0 + i).log2())
        .sum()
}

/// Reward shared by the whole adversary system: capacity drop minus the
/// cost of every adversary's power.
pub fn team_reward(
    model: &ChannelModel,
    sinr: &[f64],
    snr: &[f64],
    adversary_powers: &[f64],
) -> f64 {
    let total_power: f64 = adversary_powers.iter().sum();
    model.bandwidth * capacity_drop(sinr, snr) - model.power_cost * total_power
}

/// Reward seen by one adversary: the shared capacity drop minus its own power cost.
pub fn individual_reward(model: &ChannelModel, sinr: &[f64], snr: &[f64], power_j: f64) -> f64 {
    model.bandwidth * capacity_drop(sinr, snr) - model.power_cost * power_j
}
