use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    attack_success, compute_sinr, individual_reward, team_reward, ChannelId, ChannelModel, Fading,
    FadingDraws, JointAction, Observation, PowerLevel, Sender, SenderProfile,
};
use crate::error::{Error, Result};

/// Everything produced by one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub t: u64,
    pub sender_channels: Vec<ChannelId>,
    pub sinr: Vec<f64>,
    pub snr: Vec<f64>,
    pub team_reward: f64,
    /// One entry per adversary, in roster order.
    pub individual_rewards: Vec<f64>,
    /// Attack success, one flag per configured threshold.
    pub sa: Vec<bool>,
    pub observation_next: Observation,
}

/// One running scenario. The environment owns the random stream that drives
/// the sender and fading draws; agents carry their own streams.
#[derive(Debug, Clone)]
pub struct Environment {
    model: ChannelModel,
    sender: Sender,
    sender_powers: Vec<PowerLevel>,
    n_adversaries: usize,
    taus: Vec<f64>,
    rng: ChaCha8Rng,
    t: u64,
}

impl Environment {
    pub fn new(
        model: ChannelModel,
        profile: SenderProfile,
        n_adversaries: usize,
        taus: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        model.validate()?;
        if n_adversaries == 0 {
            return Err(Error::InvalidScenario(
                "at least one adversary is required".into(),
            ));
        }
        if model.gain_adversary.len() != 1 && model.gain_adversary.len() != n_adversaries {
            return Err(Error::LengthMismatch {
                expected: n_adversaries,
                actual: model.gain_adversary.len(),
            });
        }
        if let Some(tau) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidScenario(format!("tau {tau} outside (0, 1)")));
        }
        let sender_powers = profile.power_levels();
        let sender = Sender::new(profile, model.n_channels)?;
        Ok(Environment {
            model,
            sender,
            sender_powers,
            n_adversaries,
            taus,
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 0,
        })
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Length of every observation this scenario produces.
    pub fn observation_len(&self) -> usize {
        self.sender_powers.len()
    }

    /// Interference-free SNR of the strongest sender channel under unit
    /// fading; used to scale observations.
    pub fn max_snr(&self) -> f64 {
        self.sender_powers
            .iter()
            .map(|p| p.watts() * self.model.gain_sender / self.model.noise)
            .fold(0.0, f64::max)
    }

    /// Index of the next step to be played.
    pub fn time(&self) -> u64 {
        self.t
    }

    /// Advances the sender, draws fading, and scores the adversaries' moves.
    pub fn step(&mut self, actions: &[JointAction]) -> Result<StepOutcome> {
        if actions.len() != self.n_adversaries {
            return Err(Error::LengthMismatch {
                expected: self.n_adversaries,
                actual: actions.len(),
            });
        }
        let t = self.t;
        let sender_channels = self.sender.channels(t, &mut self.rng);
        let draws = match self.model.fading {
            Fading::Constant => None,
            Fading::Rayleigh { scale } => Some(FadingDraws::sample(
                scale,
                sender_channels.len(),
                actions,
                &mut self.rng,
            )),
        };
        let (sinr, snr) = compute_sinr(
            &self.model,
            &sender_channels,
            &self.sender_powers,
            actions,
            draws.as_ref(),
        )?;

        let powers: Vec<f64> = actions
            .iter()
            .map(|joint| joint.iter().map(|a| a.power.watts()).sum())
            .collect();
        let team = team_reward(&self.model, &sinr, &snr, &powers);
        let individual_rewards = powers
            .iter()
            .map(|&p| individual_reward(&self.model, &sinr, &snr, p))
            .collect();
        let sa = self
            .taus
            .iter()
            .map(|&tau| attack_success(&sinr, &snr, tau))
            .collect::<Result<Vec<_>>>()?;

        self.t += 1;
        Ok(StepOutcome {
            t,
            sender_channels,
            observation_next: Observation::new(sinr.clone()),
            sinr,
            snr,
            team_reward: team,
            individual_rewards,
            sa,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{capacity_drop, Action, InitialChannel, SenderStrategy};
    use approx::assert_relative_eq;

    fn constant_on(c: usize) -> SenderProfile {
        let mut p = SenderProfile::single(SenderStrategy::Constant);
        p.initial_channel = InitialChannel::Fixed(c);
        p
    }

    fn unit() -> ChannelModel {
        ChannelModel {
            bandwidth: 1.0,
            ..ChannelModel::default()
        }
    }

    fn act(c: usize, p: f64) -> JointAction {
        vec![Action::new(ChannelId::new(c, 5).unwrap(), PowerLevel(p))]
    }

    #[test]
    fn hit_on_sender_channel() {
        let mut env = Environment::new(unit(), constant_on(3), 1, vec![0.5], 0).unwrap();
        let out = env.step(&[act(3, 5.0)]).unwrap();
        assert_eq!(out.sa, vec![true]);
        assert_relative_eq!(out.sinr[0], 5.0 / 6.0);
        assert_eq!(out.observation_next.sinr_lagged, out.sinr);
    }

    #[test]
    fn miss_costs_power() {
        let mut env = Environment::new(unit(), constant_on(3), 1, vec![0.5], 0).unwrap();
        let out = env.step(&[act(1, 5.0)]).unwrap();
        assert_eq!(out.sa, vec![false]);
        assert_relative_eq!(out.individual_rewards[0], -5.0);
    }

    #[test]
    fn wrong_action_count() {
        let mut env = Environment::new(unit(), constant_on(3), 2, vec![0.5], 0).unwrap();
        assert!(matches!(
            env.step(&[act(1, 5.0)]),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn aggregation_identity() {
        let model = ChannelModel::default();
        let mut env = Environment::new(model.clone(), constant_on(2), 3, vec![0.5], 0).unwrap();
        let out = env.step(&[act(2, 3.0), act(2, 1.0), act(4, 5.0)]).unwrap();
        let lhs: f64 = out.individual_rewards.iter().sum();
        let rhs = out.team_reward + 2.0 * model.bandwidth * capacity_drop(&out.sinr, &out.snr);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn time_advances() {
        let mut env = Environment::new(unit(), constant_on(1), 1, vec![0.5], 0).unwrap();
        for t in 0..4 {
            assert_eq!(env.step(&[act(1, 0.0)]).unwrap().t, t);
        }
        assert_eq!(env.time(), 4);
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(Environment::new(unit(), constant_on(1), 1, vec![1.5], 0).is_err());
    }
}
