//! Adversaries: uniform random, greedy bandit, and Double-DQN jammers that
//! attack one channel (SSRL), several channels (MSRL), or operate as a team
//! of independent single-channel learners (MAAS).

mod greedy;
mod space;

pub use greedy::{act_greedy, GreedyStats};
pub use space::{action_space_size, ActionSpace, DEFAULT_SPACE_CAP};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::{argmax, DoubleDqn, DqnParams, Experience};
use crate::env::{JointAction, Observation, PowerSet};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Random,
    Greedy,
    Ssrl,
    Msrl,
    Maas,
}

impl AgentKind {
    pub fn label(self) -> &'static str {
        match self {
            AgentKind::Random => "Random",
            AgentKind::Greedy => "Greedy",
            AgentKind::Ssrl => "SSRL",
            AgentKind::Msrl => "MSRL",
            AgentKind::Maas => "MAAS",
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, AgentKind::Ssrl | AgentKind::Msrl | AgentKind::Maas)
    }
}

/// Adversary configuration. Exploration and target-shift fields only matter
/// for the learning kinds; `m_agents` only for MAAS and `x_channels` only for
/// MSRL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub epsilon0: f64,
    pub decay: f64,
    pub target_shift: f64,
    pub gamma: f64,
    pub dqn: DqnParams,
    pub m_agents: usize,
    pub x_channels: usize,
    /// Divide observations by the largest sender SNR before the network sees them.
    pub normalize_inputs: bool,
    /// Rewards are multiplied by this before they enter replay memory.
    pub reward_scale: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            kind: AgentKind::Maas,
            epsilon0: 1.0,
            decay: 0.996,
            target_shift: 0.01,
            gamma: crate::DEFAULT_GAMMA,
            dqn: DqnParams::default(),
            m_agents: 2,
            x_channels: 2,
            normalize_inputs: true,
            reward_scale: 0.1,
        }
    }
}

impl AgentConfig {
    pub fn of_kind(kind: AgentKind) -> Self {
        AgentConfig {
            kind,
            ..AgentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidAgent(m.to_string()));
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return bad("epsilon0 must lie in [0, 1]");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad("decay must lie in (0, 1]");
        }
        if !(self.target_shift > 0.0 && self.target_shift <= 1.0) {
            return bad("target_shift must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.reward_scale > 0.0 && self.reward_scale.is_finite()) {
            return bad("reward_scale must be positive");
        }
        if self.m_agents == 0 {
            return bad("m_agents must be at least 1");
        }
        if self.x_channels == 0 {
            return bad("x_channels must be at least 1");
        }
        if self.kind.is_learning() {
            self.dqn.validate()?;
        }
        Ok(())
    }

    /// Number of independent adversaries this config puts on the air.
    pub fn n_adversaries(&self) -> usize {
        match self.kind {
            AgentKind::Maas => self.m_agents,
            _ => 1,
        }
    }

    /// Channels each adversary attacks per step.
    pub fn channels_per_adversary(&self) -> usize {
        match self.kind {
            AgentKind::Msrl => self.x_channels,
            _ => 1,
        }
    }
}

/// Uniform draw over a non-empty action space.
pub fn act_random<R: Rng + ?Sized>(n_actions: usize, rng: &mut R) -> Result<usize> {
    if n_actions == 0 {
        return Err(Error::Empty("action space"));
    }
    Ok(rng.gen_range(0..n_actions))
}

/// Exploits the actor's argmax when `uniform(0, 1) >= epsilon`, otherwise
/// explores uniformly.
pub fn act_epsilon_greedy<R: Rng + ?Sized>(
    learner: &DoubleDqn,
    obs: &Observation,
    epsilon: f64,
    n_actions: usize,
    rng: &mut R,
) -> Result<usize> {
    if rng.gen::<f64>() >= epsilon {
        Ok(argmax(&learner.q_values(obs)?))
    } else {
        act_random(n_actions, rng)
    }
}

pub fn decay_epsilon(epsilon: f64, decay: f64) -> f64 {
    epsilon * decay
}

/// Double-DQN jammer with its exploration schedule.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub learner: DoubleDqn,
    pub epsilon: f64,
    decay: f64,
    gamma: f64,
    target_shift: f64,
    reward_scale: f64,
    anneal_steps: u64,
    updates: u64,
}

impl DqnAgent {
    fn beta(&self) -> f64 {
        let beta0 = self.learner.params().per_beta0;
        let frac = (self.updates as f64 / self.anneal_steps.max(1) as f64).min(1.0);
        beta0 + (1.0 - beta0) * frac
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }
}

#[derive(Debug, Clone)]
pub enum Policy {
    Random,
    Greedy(GreedyStats),
    Dqn(Box<DqnAgent>),
}

/// One adversary: a policy over an action space plus its own random stream.
#[derive(Debug, Clone)]
pub struct Agent {
    pub space: Arc<ActionSpace>,
    pub policy: Policy,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(space: Arc<ActionSpace>, policy: Policy, seed: u64) -> Self {
        Agent {
            space,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Initial move: uniformly random for every kind.
    pub fn act_initial(&mut self) -> Result<usize> {
        act_random(self.space.len(), &mut self.rng)
    }

    pub fn act(&mut self, obs: &Observation) -> Result<usize> {
        let n = self.space.len();
        match &self.policy {
            Policy::Random => act_random(n, &mut self.rng),
            Policy::Greedy(stats) => Ok(act_greedy(stats)),
            Policy::Dqn(d) => act_epsilon_greedy(&d.learner, obs, d.epsilon, n, &mut self.rng),
        }
    }

    /// Feeds one transition back. Random ignores it, Greedy updates its
    /// running mean, and DQN agents store it and train once warm.
    pub fn learn(&mut self, exp: Experience) -> Result<()> {
        match &mut self.policy {
            Policy::Random => Ok(()),
            Policy::Greedy(stats) => {
                stats.record(exp.action_index, exp.reward);
                Ok(())
            }
            Policy::Dqn(d) => {
                let reward = exp.reward * d.reward_scale;
                d.learner.remember(Experience { reward, ..exp })?;
                if d.learner.memory.len() >= d.learner.params().batch_size {
                    let beta = d.beta();
                    d.learner.train_batch(d.gamma, beta, &mut self.rng)?;
                    d.learner.soft_update(d.target_shift)?;
                    d.updates += 1;
                }
                Ok(())
            }
        }
    }

    pub fn decay_epsilon(&mut self) {
        if let Policy::Dqn(d) = &mut self.policy {
            d.epsilon = decay_epsilon(d.epsilon, d.decay);
        }
    }

    /// Current exploration rate; 1 for Random and 0 for Greedy.
    pub fn epsilon(&self) -> f64 {
        match &self.policy {
            Policy::Random => 1.0,
            Policy::Greedy(_) => 0.0,
            Policy::Dqn(d) => d.epsilon,
        }
    }
}

/// Everything a roster needs to know about the scenario it attacks.
#[derive(Debug, Clone)]
pub struct RosterSpec<'a> {
    pub n_channels: usize,
    pub powers: &'a PowerSet,
    pub observation_len: usize,
    /// Observations are divided by this when `normalize_inputs` is set.
    pub max_snr: f64,
    pub horizon: u64,
    pub seed: u64,
}

/// The adversaries of one trial, stepped in index order.
#[derive(Debug, Clone)]
pub struct Roster {
    kind: AgentKind,
    agents: Vec<Agent>,
}

impl Roster {
    pub fn build(config: &AgentConfig, spec: &RosterSpec<'_>) -> Result<Self> {
        config.validate()?;
        let space = Arc::new(ActionSpace::build(
            spec.n_channels,
            spec.powers.clone(),
            config.channels_per_adversary(),
            DEFAULT_SPACE_CAP,
        )?);
        let agents = (0..config.n_adversaries())
            .map(|j| {
                let seed = derive_seed(spec.seed, &[j as u64]);
                let policy = match config.kind {
                    AgentKind::Random => Policy::Random,
                    AgentKind::Greedy => Policy::Greedy(GreedyStats::new(space.len())),
                    _ => {
                        let params = DqnParams {
                            input_dim: spec.observation_len,
                            output_dim: space.len(),
                            ..config.dqn.clone()
                        };
                        let scale = if config.normalize_inputs {
                            spec.max_snr
                        } else {
                            1.0
                        };
                        let mut init_rng =
                            ChaCha8Rng::seed_from_u64(derive_seed(seed, &[u64::MAX]));
                        let learner = DoubleDqn::new(params, scale, &mut init_rng)?;
                        Policy::Dqn(Box::new(DqnAgent {
                            learner,
                            epsilon: config.epsilon0,
                            decay: config.decay,
                            gamma: config.gamma,
                            target_shift: config.target_shift,
                            reward_scale: config.reward_scale,
                            anneal_steps: spec.horizon,
                            updates: 0,
                        }))
                    }
                };
                Ok(Agent::new(space.clone(), policy, seed))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Roster {
            kind: config.kind,
            agents,
        })
    }

    pub fn from_agents(kind: AgentKind, agents: Vec<Agent>) -> Self {
        Roster { kind, agents }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn act_initial(&mut self) -> Result<Vec<usize>> {
        self.agents.iter_mut().map(Agent::act_initial).collect()
    }

    /// Every agent picks from the shared observation on its own; no
    /// information passes between agents.
    pub fn act(&mut self, obs: &Observation) -> Result<Vec<usize>> {
        maas_act(&mut self.agents, obs)
    }

    pub fn joint_actions(&self, indices: &[usize]) -> Vec<JointAction> {
        self.agents
            .iter()
            .zip(indices)
            .map(|(a, &i)| a.space.entry(i).clone())
            .collect()
    }

    pub fn learn(
        &mut self,
        state: &Observation,
        actions: &[usize],
        rewards: &[f64],
        next_state: &Observation,
    ) -> Result<()> {
        for ((agent, &a), &r) in self.agents.iter_mut().zip(actions).zip(rewards) {
            agent.learn(Experience {
                state: state.clone(),
                action_index: a,
                reward: r,
                next_state: next_state.clone(),
            })?;
        }
        Ok(())
    }

    pub fn decay_epsilon(&mut self) {
        self.agents.iter_mut().for_each(Agent::decay_epsilon);
    }

    pub fn mean_epsilon(&self) -> f64 {
        self.agents.iter().map(Agent::epsilon).sum::<f64>() / self.agents.len() as f64
    }
}

/// Independent per-agent action selection, returned in agent order.
pub fn maas_act(agents: &mut [Agent], obs: &Observation) -> Result<Vec<usize>> {
    agents.iter_mut().map(|a| a.act(obs)).collect()
}
