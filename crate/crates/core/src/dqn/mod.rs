//! Double DQN with proportional prioritized replay, written against a small
//! dense network and a hand-rolled Adam optimizer.

mod adam;
mod network;
mod replay;

pub use adam::{adam_step, AdamState};
pub use network::{argmax, ForwardCache, LayerSnapshot, NetworkSnapshot, QNetwork};
pub use replay::ReplayMemory;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Observation;
use crate::error::{Error, Result};

/// Learning hyperparameters for one Q-learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnParams {
    pub hidden_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Priority exponent.
    pub per_alpha: f64,
    /// Starting importance-sampling exponent, annealed linearly to 1.
    pub per_beta0: f64,
    /// Added to `|td error|` so no priority reaches zero.
    pub per_eps: f64,
    /// Filled in from the scenario when the agent is built.
    #[serde(skip_serializing)]
    pub input_dim: usize,
    #[serde(skip_serializing)]
    pub output_dim: usize,
}

impl Default for DqnParams {
    fn default() -> Self {
        DqnParams {
            hidden_sizes: vec![128, 128],
            learning_rate: 1e-4,
            batch_size: 32,
            buffer_capacity: 2000,
            per_alpha: 0.6,
            per_beta0: 0.4,
            per_eps: 1e-6,
            input_dim: 0,
            output_dim: 0,
        }
    }
}

impl DqnParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDqn(m.to_string()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return bad("batch_size must lie in 1..=buffer_capacity");
        }
        if !(self.per_alpha >= 0.0) {
            return bad("per_alpha must be non-negative");
        }
        if !(self.per_beta0 > 0.0 && self.per_beta0 <= 1.0) {
            return bad("per_beta0 must lie in (0, 1]");
        }
        if !(self.per_eps > 0.0) {
            return bad("per_eps must be positive");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_sizes.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend(&self.hidden_sizes);
        sizes.push(self.output_dim);
        sizes
    }
}

/// `(s, a, r, s')` transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Observation,
    pub action_index: usize,
    pub reward: f64,
    pub next_state: Observation,
}

/// Bootstrap target: the actor picks the next action, the target network
/// scores it.
pub fn double_dqn_target(
    actor: &QNetwork,
    target: &QNetwork,
    reward: f64,
    next_input: &[f64],
    gamma: f64,
) -> Result<f64> {
    if gamma == 0.0 {
        return Ok(reward);
    }
    let best = argmax(&actor.forward(next_input)?);
    Ok(reward + gamma * target.forward(next_input)?[best])
}

/// `target <- alpha * actor + (1 - alpha) * target`, elementwise.
pub fn soft_update(target: &mut QNetwork, actor: &QNetwork, alpha: f64) -> Result<()> {
    if !target.same_architecture(actor) {
        return Err(Error::ArchitectureMismatch);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidDqn(format!(
            "target shift {alpha} outside (0, 1]"
        )));
    }
    if alpha == 1.0 {
        target.params_mut().copy_from_slice(actor.params());
        return Ok(());
    }
    for (t, a) in target.params_mut().iter_mut().zip(actor.params()) {
        *t = alpha * a + (1.0 - alpha) * *t;
    }
    Ok(())
}

/// One element of a training batch with its bootstrap target already fixed.
#[derive(Debug, Clone)]
pub struct TrainingSample<'a> {
    pub input: &'a [f64],
    pub action: usize,
    pub target: f64,
    pub weight: f64,
}

/// Weighted squared TD loss `mean_i w_i (Q(s_i)[a_i] - y_i)^2`, its gradient
/// with respect to every network parameter, and the per-sample TD errors
/// `y_i - Q(s_i)[a_i]`.
pub fn batch_loss_and_grad(
    net: &QNetwork,
    batch: &[TrainingSample<'_>],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    let n = batch.len() as f64;
    let mut grad = vec![0.0; net.params().len()];
    let mut loss = 0.0;
    let mut td = Vec::with_capacity(batch.len());
    let mut d_out = vec![0.0; net.output_dim()];
    for s in batch {
        if s.action >= net.output_dim() {
            return Err(Error::LengthMismatch {
                expected: net.output_dim(),
                actual: s.action,
            });
        }
        let cache = net.forward_cached(s.input)?;
        let delta = s.target - cache.output()[s.action];
        loss += s.weight * delta * delta / n;
        d_out[s.action] = -2.0 * s.weight * delta / n;
        net.backward(&cache, &d_out, &mut grad);
        d_out[s.action] = 0.0;
        td.push(delta);
    }
    Ok((loss, grad, td))
}

/// Actor/target pair, optimizer state and replay memory of one learner.
#[derive(Debug, Clone)]
pub struct DoubleDqn {
    pub actor: QNetwork,
    pub target: QNetwork,
    pub memory: ReplayMemory,
    adam: AdamState,
    params: DqnParams,
    input_scale: f64,
}

impl DoubleDqn {
    /// Builds randomly initialized networks (the target starts as a copy of
    /// the actor). Observations are divided by `input_scale` before they
    /// reach either network.
    pub fn new<R: Rng + ?Sized>(params: DqnParams, input_scale: f64, rng: &mut R) -> Result<Self> {
        params.validate()?;
        if params.input_dim == 0 || params.output_dim == 0 {
            return Err(Error::InvalidDqn(
                "input and output dimensions must be set".into(),
            ));
        }
        if !(input_scale > 0.0) {
            return Err(Error::InvalidDqn("input scale must be positive".into()));
        }
        let actor = QNetwork::he_uniform(params.layer_sizes(), rng)?;
        let target = actor.clone();
        Ok(DoubleDqn {
            adam: AdamState::new(actor.params().len()),
            memory: ReplayMemory::new(params.buffer_capacity, params.per_alpha)?,
            actor,
            target,
            params,
            input_scale,
        })
    }

    pub fn params(&self) -> &DqnParams {
        &self.params
    }

    pub fn input(&self, obs: &Observation) -> Vec<f64> {
        obs.sinr_lagged
            .iter()
            .map(|x| x / self.input_scale)
            .collect()
    }

    pub fn q_values(&self, obs: &Observation) -> Result<Vec<f64>> {
        self.actor.forward(&self.input(obs))
    }

    pub fn remember(&mut self, exp: Experience) -> Result<()> {
        if exp.action_index >= self.params.output_dim {
            return Err(Error::LengthMismatch {
                expected: self.params.output_dim,
                actual: exp.action_index,
            });
        }
        self.memory.push(exp);
        Ok(())
    }

    /// Samples a prioritized batch, takes one Adam step on the actor and
    /// refreshes the sampled priorities. Returns the weighted loss measured
    /// before the step.
    pub fn train_batch<R: Rng + ?Sized>(
        &mut self,
        gamma: f64,
        beta: f64,
        rng: &mut R,
    ) -> Result<f64> {
        let needed = self.params.batch_size;
        if self.memory.len() < needed {
            return Err(Error::InsufficientMemory {
                size: self.memory.len(),
                needed,
            });
        }
        let indices = self.memory.sample(needed, rng)?;
        let weights = self.memory.importance_weights(&indices, beta);

        let mut inputs = Vec::with_capacity(needed);
        let mut targets = Vec::with_capacity(needed);
        for &i in &indices {
            let exp = self.memory.get(i);
            let next = self.input(&exp.next_state);
            targets.push(double_dqn_target(
                &self.actor,
                &self.target,
                exp.reward,
                &next,
                gamma,
            )?);
            inputs.push(self.input(&exp.state));
        }
        let batch: Vec<TrainingSample<'_>> = indices
            .iter()
            .zip(&inputs)
            .zip(&targets)
            .zip(&weights)
            .map(|(((&i, input), &target), &weight)| TrainingSample {
                input,
                action: self.memory.get(i).action_index,
                target,
                weight,
            })
            .collect();

        let (loss, grad, td) = batch_loss_and_grad(&self.actor, &batch)?;
        adam_step(
            self.actor.params_mut(),
            &grad,
            &mut self.adam,
            self.params.learning_rate,
        )?;
        for (&i, delta) in indices.iter().zip(td) {
            self.memory
                .set_priority(i, delta.abs() + self.params.per_eps)?;
        }
        Ok(loss)
    }

    pub fn soft_update(&mut self, alpha: f64) -> Result<()> {
        soft_update(&mut self.target, &self.actor, alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bandit_net(q: [f64; 3]) -> QNetwork {
        // 1 -> 1 -> 3 network with Q(x=1) = q, hidden unit passes x through.
        let mut net = QNetwork::zeros(vec![1, 1, 3]).unwrap();
        net.layer_mut(0).0[0] = 1.0;
        net.layer_mut(1).1.copy_from_slice(&q);
        net
    }

    #[test]
    fn target_uses_actor_choice_and_target_value() {
        let actor = bandit_net([0.0, 5.0, 1.0]);
        let target = bandit_net([10.0, 2.0, 30.0]);
        let y = double_dqn_target(&actor, &target, 1.0, &[1.0], 0.9).unwrap();
        assert_relative_eq!(y, 2.8, epsilon = 1e-12);
        assert_eq!(
            double_dqn_target(&actor, &target, 1.0, &[1.0], 0.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn identical_nets_match_max_target() {
        for q in [[0.5, -1.0, 2.0], [3.0, 3.0, 1.0], [-2.0, -0.5, -1.0]] {
            let net = bandit_net(q);
            let ddqn = double_dqn_target(&net, &net, 0.3, &[1.0], 0.7).unwrap();
            let max = q.iter().copied().fold(f64::MIN, f64::max);
            assert_relative_eq!(ddqn, 0.3 + 0.7 * max, epsilon = 1e-12);
        }
    }

    #[test]
    fn soft_update_blends() {
        let mut target = QNetwork::zeros(vec![1, 1]).unwrap();
        let mut actor = target.clone();
        actor.params_mut().iter_mut().for_each(|p| *p = 1.0);
        soft_update(&mut target, &actor, 0.01).unwrap();
        assert!(target.params().iter().all(|&p| (p - 0.01).abs() < 1e-15));
        soft_update(&mut target, &actor, 1.0).unwrap();
        assert_eq!(target, actor);
    }

    #[test]
    fn soft_update_converges_geometrically() {
        let mut target = QNetwork::zeros(vec![1, 1]).unwrap();
        let mut actor = target.clone();
        actor.params_mut().iter_mut().for_each(|p| *p = 1.0);
        let mut gap = 1.0;
        for _ in 0..10 {
            soft_update(&mut target, &actor, 0.2).unwrap();
            let new_gap = (target.params()[0] - 1.0).abs();
            assert_relative_eq!(new_gap, 0.8 * gap, max_relative = 1e-12);
            gap = new_gap;
        }
    }

    #[test]
    fn soft_update_rejects_mismatch() {
        let mut a = QNetwork::zeros(vec![1, 2]).unwrap();
        let b = QNetwork::zeros(vec![1, 3]).unwrap();
        assert_eq!(
            soft_update(&mut a, &b, 0.5),
            Err(Error::ArchitectureMismatch)
        );
    }

    fn learner(batch: usize) -> DoubleDqn {
        let params = DqnParams {
            hidden_sizes: vec![8],
            batch_size: batch,
            buffer_capacity: 16,
            input_dim: 1,
            output_dim: 3,
            ..DqnParams::default()
        };
        DoubleDqn::new(params, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    fn transition(action: usize, reward: f64) -> Experience {
        Experience {
            state: Observation::new(vec![0.5]),
            action_index: action,
            reward,
            next_state: Observation::new(vec![0.5]),
        }
    }

    #[test]
    fn warm_up_gate() {
        let mut l = learner(4);
        l.remember(transition(0, 1.0)).unwrap();
        let err = l.train_batch(0.5, 0.4, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(err, Err(Error::InsufficientMemory { size: 1, needed: 4 }));
    }

    #[test]
    fn zero_td_error_gives_zero_loss() {
        let mut l = learner(2);
        let q = l.q_values(&Observation::new(vec![0.5])).unwrap();
        for (a, &v) in q.iter().enumerate().take(3) {
            l.remember(transition(a, v)).unwrap();
        }
        let loss = l
            .train_batch(0.0, 0.4, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        assert!(loss.abs() < 1e-24);
        assert!(l.memory.priorities().contains(&1e-6));
        assert!(l.memory.priorities().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn training_fits_a_bandit() {
        let mut l = learner(8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..16 {
            l.remember(transition(i % 3, [0.0, 2.0, -1.0][i % 3]))
                .unwrap();
        }
        for _ in 0..3000 {
            l.params.learning_rate = 1e-2;
            l.train_batch(0.0, 1.0, &mut rng).unwrap();
        }
        let q = l.q_values(&Observation::new(vec![0.5])).unwrap();
        assert_eq!(argmax(&q), 1);
        assert!((q[1] - 2.0).abs() < 0.05, "{q:?}");
    }

    #[test]
    fn rejects_out_of_range_action() {
        let mut l = learner(2);
        assert!(l.remember(transition(3, 0.0)).is_err());
    }

    #[test]
    fn params_validation() {
        let bad = [
            DqnParams {
                batch_size: 5000,
                ..Default::default()
            },
            DqnParams {
                per_beta0: 0.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err());
        }
    }
}
