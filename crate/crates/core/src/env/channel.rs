use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelId, JointAction, PowerLevel};
use crate::error::{Error, Result};

/// Per-link gain model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Fading {
    /// All multiplicative draws equal 1.
    Constant,
    /// Each link is scaled by an independent Rayleigh draw every step.
    Rayleigh { scale: f64 },
}

impl Fading {
    /// Rayleigh fading with `E[beta^2] = 1`.
    pub fn unit_rayleigh() -> Self {
        Fading::Rayleigh {
            scale: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Fading::Constant => "constant",
            Fading::Rayleigh { .. } => "rayleigh",
        }
    }
}

/// Gains, noise and reward constants shared by every link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub n_channels: usize,
    pub noise: f64,
    pub gain_sender: f64,
    /// Power gain per adversary. A single entry applies to every adversary.
    pub gain_adversary: Vec<f64>,
    pub bandwidth: f64,
    pub power_cost: f64,
    pub fading: Fading,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidChannelModel(m.to_string()));
        if self.n_channels == 0 {
            return bad("n_channels must be at least 1");
        }
        if !(self.noise > 0.0) || !self.noise.is_finite() {
            return bad("noise must be positive");
        }
        if !(self.gain_sender > 0.0) {
            return bad("sender gain must be positive");
        }
        if self.gain_adversary.is_empty() || self.gain_adversary.iter().any(|g| !(*g > 0.0)) {
            return bad("adversary gains must be positive");
        }
        if !(self.bandwidth > 0.0) {
            return bad("bandwidth must be positive");
        }
        if !(self.power_cost >= 0.0) {
            return bad("power cost must be non-negative");
        }
        if let Fading::Rayleigh { scale } = self.fading {
            if !(scale > 0.0) {
                return bad("rayleigh scale must be positive");
            }
        }
        Ok(())
    }

    pub fn adversary_gain(&self, j: usize) -> f64 {
        if self.gain_adversary.len() == 1 {
            self.gain_adversary[0]
        } else {
            self.gain_adversary[j]
        }
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            n_channels: 5,
            noise: 1.0,
            gain_sender: 1.0,
            gain_adversary: vec![1.0],
            bandwidth: crate::DEFAULT_BANDWIDTH,
            power_cost: 1.0,
            fading: Fading::Constant,
        }
    }
}

/// Multiplicative link draws for one step: one per sender channel and one
/// per adversary transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraws {
    pub sender: Vec<f64>,
    pub adversary: Vec<Vec<f64>>,
}

impl FadingDraws {
    /// Draws Rayleigh factors shaped like the given sender and adversary links.
    pub fn sample<R: Rng + ?Sized>(
        scale: f64,
        n_sender: usize,
        adversary_actions: &[JointAction],
        rng: &mut R,
    ) -> Self {
        let sender = (0..n_sender).map(|_| rayleigh(scale, rng)).collect();
        let adversary = adversary_actions
            .iter()
            .map(|a| a.iter().map(|_| rayleigh(scale, rng)).collect())
            .collect();
        FadingDraws { sender, adversary }
    }
}

/// Inverse-CDF Rayleigh sample.
pub(crate) fn rayleigh<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u: f64 = rng.gen();
    scale * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Per-sender-channel SINR and SNR.
///
/// `sinr[c] = P_c h_S b_S / (eta + sum_j P_j h_j b_j [C_j = C_c])` and
/// `snr[c] = P_c h_S b_S / eta`, where the `b` factors come from `fading`
/// (all 1 for constant gains).
pub fn compute_sinr(
    model: &ChannelModel,
    sender_channels: &[ChannelId],
    sender_powers: &[PowerLevel],
    adversary_actions: &[JointAction],
    fading: Option<&FadingDraws>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    model.validate()?;
    if sender_channels.len() != sender_powers.len() {
        return Err(Error::LengthMismatch {
            expected: sender_channels.len(),
            actual: sender_powers.len(),
        });
    }
    if matches!(model.fading, Fading::Rayleigh { .. }) && fading.is_none() {
        return Err(Error::MissingFading);
    }
    if let Some(f) = fading {
        if f.sender.len() != sender_channels.len() {
            return Err(Error::LengthMismatch {
                expected: sender_channels.len(),
                actual: f.sender.len(),
            });
        }
        if f.adversary.len() != adversary_actions.len() {
            return Err(Error::LengthMismatch {
                expected: adversary_actions.len(),
                actual: f.adversary.len(),
            });
        }
    }
    if model.gain_adversary.len() != 1 && model.gain_adversary.len() != adversary_actions.len() {
        return Err(Error::LengthMismatch {
            expected: adversary_actions.len(),
            actual: model.gain_adversary.len(),
        });
    }

    let n = model.n_channels;
    for &c in sender_channels {
        ChannelId::new(c.index(), n)?;
    }

    let mut interference = vec![0.0; n];
    for (j, joint) in adversary_actions.iter().enumerate() {
        let h = model.adversary_gain(j);
        if let Some(f) = fading {
            if f.adversary[j].len() != joint.len() {
                return Err(Error::LengthMismatch {
                    expected: joint.len(),
                    actual: f.adversary[j].len(),
                });
            }
        }
        for (k, a) in joint.iter().enumerate() {
            ChannelId::new(a.channel.index(), n)?;
            let beta = fading.map_or(1.0, |f| f.adversary[j][k]);
            interference[a.channel.zero_based()] += a.power.watts() * h * beta;
        }
    }

    let mut sinr = Vec::with_capacity(sender_channels.len());
    let mut snr = Vec::with_capacity(sender_channels.len());
    for (c, (ch, p)) in sender_channels.iter().zip(sender_powers).enumerate() {
        let beta = fading.map_or(1.0, |f| f.sender[c]);
        let signal = p.watts() * model.gain_sender * beta;
        sinr.push(signal / (model.noise + interference[ch.zero_based()]));
        snr.push(signal / model.noise);
    }
    Ok((sinr, snr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Action;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ch(i: usize) -> ChannelId {
        ChannelId::new(i, 5).unwrap()
    }

    fn jam(c: usize, p: f64) -> JointAction {
        vec![Action::new(ch(c), PowerLevel(p))]
    }

    fn unit_model() -> ChannelModel {
        ChannelModel {
            bandwidth: 1.0,
            ..ChannelModel::default()
        }
    }

    #[test]
    fn same_channel_jammer() {
        let (sinr, snr) = compute_sinr(
            &unit_model(),
            &[ch(3)],
            &[PowerLevel(5.0)],
            &[jam(3, 5.0)],
            None,
        )
        .unwrap();
        assert_relative_eq!(sinr[0], 5.0 / 6.0, epsilon = 1e-12);
        assert_relative_eq!(snr[0], 5.0);
    }

    #[test]
    fn other_channel_jammer() {
        let (sinr, snr) = compute_sinr(
            &unit_model(),
            &[ch(3)],
            &[PowerLevel(5.0)],
            &[jam(1, 5.0)],
            None,
        )
        .unwrap();
        assert_eq!(sinr, snr);
        assert_eq!(sinr[0], 5.0);
    }

    #[test]
    fn two_jammers_sum() {
        let (sinr, _) = compute_sinr(
            &unit_model(),
            &[ch(2)],
            &[PowerLevel(5.0)],
            &[jam(2, 3.0), jam(2, 3.0)],
            None,
        )
        .unwrap();
        assert_relative_eq!(sinr[0], 5.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_noise() {
        let model = ChannelModel {
            noise: 0.0,
            ..unit_model()
        };
        let err = compute_sinr(&model, &[ch(1)], &[PowerLevel(5.0)], &[], None).unwrap_err();
        assert!(matches!(err, Error::InvalidChannelModel(_)));
    }

    #[test]
    fn rayleigh_requires_draws() {
        let model = ChannelModel {
            fading: Fading::unit_rayleigh(),
            ..unit_model()
        };
        let err = compute_sinr(&model, &[ch(1)], &[PowerLevel(5.0)], &[jam(1, 1.0)], None);
        assert_eq!(err.unwrap_err(), Error::MissingFading);
    }

    #[test]
    fn rayleigh_draws_scale_links() {
        let model = ChannelModel {
            fading: Fading::unit_rayleigh(),
            ..unit_model()
        };
        let draws = FadingDraws {
            sender: vec![2.0],
            adversary: vec![vec![0.5]],
        };
        let (sinr, snr) = compute_sinr(
            &model,
            &[ch(1)],
            &[PowerLevel(5.0)],
            &[jam(1, 4.0)],
            Some(&draws),
        )
        .unwrap();
        assert_relative_eq!(snr[0], 10.0);
        assert_relative_eq!(sinr[0], 10.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rayleigh_second_moment_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let n = 100_000;
        let m2: f64 = (0..n)
            .map(|_| rayleigh(scale, &mut rng).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((m2 - 1.0).abs() < 0.02, "E[beta^2] = {m2}");
    }
}
