//! Monte Carlo harness: runs trials, scores them, and aggregates them into
//! success-rate tables and reward curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, Roster, RosterSpec};
use crate::env::{
    attack_success, success_rate, ChannelId, ChannelModel, Environment, JointAction, PowerSet,
    SenderProfile, StepOutcome,
};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::stats::{mean, sample_std};

/// Which acted steps count towards the reported success rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum SraWindow {
    /// The last `ceil(fraction * T)` steps.
    FinalFraction(f64),
    /// Every acted step.
    #[default]
    Full,
    /// Steps `start..end` (0-based positions among the acted steps).
    Range { start: usize, end: usize },
}

impl SraWindow {
    /// Resolves the window against a horizon of `len` acted steps.
    pub fn bounds(self, len: usize) -> Result<(usize, usize)> {
        let (start, end) = match self {
            SraWindow::Full => (0, len),
            SraWindow::FinalFraction(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::InvalidScenario(format!(
                        "window fraction {f} outside (0, 1]"
                    )));
                }
                let n = ((f * len as f64).ceil() as usize).min(len);
                (len - n, len)
            }
            SraWindow::Range { start, end } => (start, end),
        };
        if start >= end || end > len {
            return Err(Error::Empty("sra window"));
        }
        Ok((start, end))
    }
}

/// One scenario cell: a sender, a channel, an adversary and the run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sender: SenderProfile,
    pub channel_model: ChannelModel,
    pub adversary_powers: PowerSet,
    pub adversary: AgentConfig,
    pub horizon: u64,
    pub taus: Vec<f64>,
    pub n_trials: usize,
    pub base_seed: u64,
    pub sra_window: SraWindow,
    pub smoothing: usize,
}

impl ScenarioConfig {
    /// Defaults: five channels, powers {0, 1, 3, 5}, unit gains and noise,
    /// 2000 steps, thresholds 0.2 and 0.5, eight trials.
    pub fn new(sender: SenderProfile, adversary: AgentConfig) -> Self {
        ScenarioConfig {
            sender,
            channel_model: ChannelModel::default(),
            adversary_powers: PowerSet::new(vec![0.0, 1.0, 3.0, 5.0]).expect("valid power set"),
            adversary,
            horizon: 2000,
            taus: vec![0.2, 0.5],
            n_trials: 8,
            base_seed: 0,
            sra_window: SraWindow::default(),
            smoothing: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel_model.validate()?;
        self.sender.validate(self.channel_model.n_channels)?;
        self.adversary.validate()?;
        if self.horizon == 0 {
            return Err(Error::InvalidScenario("horizon must be at least 1".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidScenario("n_trials must be at least 1".into()));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidScenario(format!("tau {t} outside (0, 1)")));
        }
        if self.smoothing == 0 {
            return Err(Error::InvalidScenario(
                "smoothing window must be at least 1".into(),
            ));
        }
        self.sra_window.bounds(self.horizon as usize)?;
        Ok(())
    }

    pub fn scenario_label(&self) -> String {
        self.sender.scenario_label()
    }

    pub fn channel_mode(&self) -> &'static str {
        self.channel_model.fading.label()
    }

    /// Seed of trial `i`.
    pub fn trial_seed(&self, i: usize) -> u64 {
        derive_seed(self.base_seed, &[i as u64])
    }
}

/// Log of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub t: u64,
    pub actions: Vec<JointAction>,
    pub sender_channels: Vec<ChannelId>,
    pub sinr: Vec<f64>,
    pub snr: Vec<f64>,
    /// Attack success per configured threshold.
    pub sa: Vec<bool>,
    pub team_reward: f64,
    pub individual_rewards: Vec<f64>,
    /// Mean exploration rate of the adversaries when they acted.
    pub epsilon: f64,
}

impl StepLog {
    fn new(out: StepOutcome, actions: Vec<JointAction>, epsilon: f64) -> Self {
        StepLog {
            t: out.t,
            actions,
            sender_channels: out.sender_channels,
            sinr: out.sinr,
            snr: out.snr,
            sa: out.sa,
            team_reward: out.team_reward,
            individual_rewards: out.individual_rewards,
            epsilon,
        }
    }

    pub fn success_at(&self, tau: f64) -> bool {
        attack_success(&self.sinr, &self.snr, tau).expect("logged vectors have equal length")
    }
}

/// Full history of one trial: the random initial step plus `horizon` acted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub taus: Vec<f64>,
    pub initial: StepLog,
    pub steps: Vec<StepLog>,
}

impl TrialRecord {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    /// Attack-success flags of the acted steps at threshold `tau`.
    pub fn sa_flags(&self, tau: f64) -> Vec<bool> {
        match self.taus.iter().position(|&t| t == tau) {
            Some(k) => self.steps.iter().map(|s| s.sa[k]).collect(),
            None => self.steps.iter().map(|s| s.success_at(tau)).collect(),
        }
    }

    pub fn sra(&self, tau: f64, window: SraWindow) -> Result<f64> {
        evaluate_sra(self, tau, window)
    }

    pub fn team_rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.team_reward).collect()
    }
}

/// Success rate over the given window of acted steps.
pub fn evaluate_sra(record: &TrialRecord, tau: f64, window: SraWindow) -> Result<f64> {
    let (start, end) = window.bounds(record.horizon())?;
    success_rate(&record.sa_flags(tau)[start..end])
}

/// Plays one trial: a random initial move, then `horizon` rounds of
/// act, step, learn and epsilon decay.
pub fn run_trial(config: &ScenarioConfig, seed: u64) -> Result<TrialRecord> {
    config.validate()?;
    let mut env = Environment::new(
        config.channel_model.clone(),
        config.sender.clone(),
        config.adversary.n_adversaries(),
        config.taus.clone(),
        derive_seed(seed, &[0]),
    )?;
    let mut roster = Roster::build(
        &config.adversary,
        &RosterSpec {
            n_channels: config.channel_model.n_channels,
            powers: &config.adversary_powers,
            observation_len: env.observation_len(),
            max_snr: env.max_snr(),
            horizon: config.horizon,
            seed: derive_seed(seed, &[1]),
        },
    )?;

    let first = roster.act_initial()?;
    let actions = roster.joint_actions(&first);
    let out = env.step(&actions)?;
    let mut obs = out.observation_next.clone();
    let initial = StepLog::new(out, actions, roster.mean_epsilon());

    let mut steps = Vec::with_capacity(config.horizon as usize);
    for _ in 0..config.horizon {
        let epsilon = roster.mean_epsilon();
        let chosen = roster.act(&obs)?;
        let actions = roster.joint_actions(&chosen);
        let out = env.step(&actions)?;
        roster.learn(
            &obs,
            &chosen,
            &out.individual_rewards,
            &out.observation_next,
        )?;
        roster.decay_epsilon();
        obs = out.observation_next.clone();
        steps.push(StepLog::new(out, actions, epsilon));
    }
    Ok(TrialRecord {
        seed,
        taus: config.taus.clone(),
        initial,
        steps,
    })
}

/// Runs `config.n_trials` trials on up to `parallel` threads (0 = all cores).
/// Results come back in trial order regardless of scheduling.
pub fn run_trials(config: &ScenarioConfig, parallel: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let run = || {
        (0..config.n_trials)
            .into_par_iter()
            .map(|i| run_trial(config, config.trial_seed(i)))
            .collect::<Result<Vec<_>>>()
    };
    if parallel == 1 {
        return (0..config.n_trials)
            .map(|i| run_trial(config, config.trial_seed(i)))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::InvalidScenario(format!("thread pool: {e}")))?;
    pool.install(run)
}

/// Per-step team reward averaged over trials, then smoothed with a trailing
/// moving average of `window` steps (shorter at the start).
pub fn reward_curve(records: &[TrialRecord], window: usize) -> Result<Vec<f64>> {
    let first = records.first().ok_or(Error::Empty("trial records"))?;
    if window == 0 {
        return Err(Error::InvalidScenario(
            "smoothing window must be at least 1".into(),
        ));
    }
    let horizon = first.horizon();
    if let Some(r) = records.iter().find(|r| r.horizon() != horizon) {
        return Err(Error::LengthMismatch {
            expected: horizon,
            actual: r.horizon(),
        });
    }
    let avg: Vec<f64> = (0..horizon)
        .map(|t| records.iter().map(|r| r.steps[t].team_reward).sum::<f64>() / records.len() as f64)
        .collect();
    let mut out = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    for t in 0..horizon {
        acc += avg[t];
        if t >= window {
            acc -= avg[t - window];
        }
        out.push(acc / window.min(t + 1) as f64);
    }
    Ok(out)
}

/// Mean and spread of the success rate across trials at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SraSummary {
    pub tau: f64,
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

pub fn summarize_sra(records: &[TrialRecord], tau: f64, window: SraWindow) -> Result<SraSummary> {
    if records.is_empty() {
        return Err(Error::Empty("trial records"));
    }
    let per_trial = records
        .iter()
        .map(|r| evaluate_sra(r, tau, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(SraSummary {
        tau,
        mean: mean(&per_trial),
        std: sample_std(&per_trial),
        per_trial,
    })
}

/// A scenario together with its trial records.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub config: ScenarioConfig,
    pub records: Vec<TrialRecord>,
}

impl CellResult {
    pub fn run(config: ScenarioConfig, parallel: usize) -> Result<Self> {
        let records = run_trials(&config, parallel)?;
        Ok(CellResult { config, records })
    }

    pub fn agent_label(&self) -> &'static str {
        self.config.adversary.kind.label()
    }

    pub fn summary(&self, tau: f64) -> Result<SraSummary> {
        summarize_sra(&self.records, tau, self.config.sra_window)
    }

    pub fn curve(&self) -> Result<Vec<f64>> {
        reward_curve(&self.records, self.config.smoothing)
    }
}
