//! JSON experiment files. One file describes a full grid: every sender
//! profile is crossed with every adversary config.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::{action_space_size, AgentConfig, DEFAULT_SPACE_CAP};
use crate::env::{ChannelModel, Fading, PowerSet, SenderProfile};
use crate::error::{Error, Result};
use crate::experiment::{ScenarioConfig, SraWindow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    pub sender: f64,
    pub adversary: Vec<f64>,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            sender: 1.0,
            adversary: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub noise: f64,
    pub gains: Gains,
    pub bandwidth: f64,
    pub power_cost: f64,
    /// Power levels available to the adversaries.
    pub powers: Vec<f64>,
    pub fading: Fading,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let m = ChannelModel::default();
        ChannelSection {
            n: m.n_channels,
            noise: m.noise,
            gains: Gains::default(),
            bandwidth: m.bandwidth,
            power_cost: m.power_cost,
            powers: vec![0.0, 1.0, 3.0, 5.0],
            fading: Fading::Constant,
        }
    }
}

impl ChannelSection {
    pub fn model(&self) -> ChannelModel {
        ChannelModel {
            n_channels: self.n,
            noise: self.noise,
            gain_sender: self.gains.sender,
            gain_adversary: self.gains.adversary.clone(),
            bandwidth: self.bandwidth,
            power_cost: self.power_cost,
            fading: self.fading,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub horizon: u64,
    pub n_trials: usize,
    pub base_seed: u64,
    pub taus: Vec<f64>,
    pub sra_window: SraWindow,
    /// Trailing window of the reward curves.
    pub smoothing: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            horizon: 2000,
            n_trials: 8,
            base_seed: 0,
            taus: vec![0.2, 0.5],
            sra_window: SraWindow::default(),
            smoothing: 50,
        }
    }
}

/// Parsed and validated experiment file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentFile {
    pub channel: ChannelSection,
    pub sender: Vec<SenderProfile>,
    pub agents: Vec<AgentConfig>,
    pub run: RunSection,
    /// Per-trial seeds; written to manifests and checked when read back.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    channel: Option<Value>,
    sender: Value,
    agents: Value,
    #[serde(default)]
    run: Option<Value>,
    #[serde(default)]
    seeds: Option<Value>,
}

fn section<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            prefix.to_string()
        } else if prefix == "$" {
            inner
        } else if inner.starts_with('[') {
            format!("{prefix}{inner}")
        } else {
            format!("{prefix}.{inner}")
        };
        Error::config(path, e.into_inner().to_string())
    })
}

impl ExperimentFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawFile = section(
            serde_json::from_str::<Value>(text).map_err(|e| Error::config("$", e.to_string()))?,
            "$",
        )?;
        let channel = match raw.channel {
            Some(v) => section(v, "channel")?,
            None => ChannelSection::default(),
        };
        let sender = match raw.sender {
            Value::Array(items) => items
                .into_iter()
                .enumerate()
                .map(|(i, v)| section(v, &format!("sender[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            single => vec![section(single, "sender")?],
        };
        let agents: Vec<AgentConfig> = section(raw.agents, "agents")?;
        let run = match raw.run {
            Some(v) => section(v, "run")?,
            None => RunSection::default(),
        };
        let seeds = raw.seeds.map(|v| section(v, "seeds")).transpose()?;
        let file = ExperimentFile {
            channel,
            sender,
            agents,
            run,
            seeds,
        };
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Field-level checks, reported with the JSON path of the offending value.
    pub fn validate(&self) -> Result<()> {
        let c = &self.channel;
        if c.n == 0 {
            return Err(Error::config("channel.N", "must be at least 1"));
        }
        if !(c.noise > 0.0 && c.noise.is_finite()) {
            return Err(Error::config("channel.noise", "must be positive"));
        }
        if !(c.gains.sender > 0.0) {
            return Err(Error::config("channel.gains.sender", "must be positive"));
        }
        if c.gains.adversary.is_empty() {
            return Err(Error::config(
                "channel.gains.adversary",
                "needs at least one gain",
            ));
        }
        for (i, g) in c.gains.adversary.iter().enumerate() {
            if !(*g > 0.0) {
                return Err(Error::config(
                    format!("channel.gains.adversary[{i}]"),
                    "must be positive",
                ));
            }
        }
        if !(c.bandwidth > 0.0) {
            return Err(Error::config("channel.bandwidth", "must be positive"));
        }
        if !(c.power_cost >= 0.0) {
            return Err(Error::config("channel.power_cost", "must be non-negative"));
        }
        PowerSet::new(c.powers.clone())
            .map_err(|e| Error::config("channel.powers", e.to_string()))?;
        if let Fading::Rayleigh { scale } = c.fading {
            if !(scale > 0.0) {
                return Err(Error::config("channel.fading.scale", "must be positive"));
            }
        }

        if self.sender.is_empty() {
            return Err(Error::config("sender", "needs at least one sender profile"));
        }
        for (i, s) in self.sender.iter().enumerate() {
            s.validate(c.n)
                .map_err(|e| Error::config(format!("sender[{i}]"), e.to_string()))?;
        }

        if self.agents.is_empty() {
            return Err(Error::config("agents", "needs at least one adversary"));
        }
        for (i, a) in self.agents.iter().enumerate() {
            validate_agent(a, &format!("agents[{i}]"), c)?;
        }

        let r = &self.run;
        if r.horizon == 0 {
            return Err(Error::config("run.horizon", "must be at least 1"));
        }
        if r.n_trials == 0 {
            return Err(Error::config("run.n_trials", "must be at least 1"));
        }
        if r.taus.is_empty() {
            return Err(Error::config("run.taus", "needs at least one threshold"));
        }
        for (i, t) in r.taus.iter().enumerate() {
            if !(*t > 0.0 && *t < 1.0) {
                return Err(Error::config(
                    format!("run.taus[{i}]"),
                    format!("{t} outside (0, 1)"),
                ));
            }
        }
        r.sra_window
            .bounds(r.horizon as usize)
            .map_err(|e| Error::config("run.sra_window", e.to_string()))?;
        if r.smoothing == 0 {
            return Err(Error::config("run.smoothing", "must be at least 1"));
        }
        if let Some(seeds) = &self.seeds {
            if seeds != &self.trial_seeds() {
                return Err(Error::config(
                    "seeds",
                    "do not match run.base_seed and run.n_trials",
                ));
            }
        }
        Ok(())
    }

    /// Every (sender, adversary) pair, senders outermost.
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let powers = PowerSet::new(self.channel.powers.clone()).expect("validated");
        self.sender
            .iter()
            .flat_map(|s| self.agents.iter().map(move |a| (s, a)))
            .map(|(s, a)| ScenarioConfig {
                sender: s.clone(),
                channel_model: self.channel.model(),
                adversary_powers: powers.clone(),
                adversary: a.clone(),
                horizon: self.run.horizon,
                taus: self.run.taus.clone(),
                n_trials: self.run.n_trials,
                base_seed: self.run.base_seed,
                sra_window: self.run.sra_window,
                smoothing: self.run.smoothing,
            })
            .collect()
    }

    pub fn trial_seeds(&self) -> Vec<u64> {
        (0..self.run.n_trials)
            .map(|i| crate::seed::derive_seed(self.run.base_seed, &[i as u64]))
            .collect()
    }

    /// Copy with seeds filled in, as written to `manifest.json`.
    pub fn resolved(&self) -> Self {
        ExperimentFile {
            seeds: Some(self.trial_seeds()),
            ..self.clone()
        }
    }
}

fn validate_agent(a: &AgentConfig, path: &str, c: &ChannelSection) -> Result<()> {
    let field = |f: &str, msg: &str| Err(Error::config(format!("{path}.{f}"), msg.to_string()));
    if !(0.0..=1.0).contains(&a.epsilon0) {
        return field("epsilon0", "must lie in [0, 1]");
    }
    if !(a.decay > 0.0 && a.decay <= 1.0) {
        return field("decay", "must lie in (0, 1]");
    }
    if !(a.target_shift > 0.0 && a.target_shift <= 1.0) {
        return field("target_shift", "must lie in (0, 1]");
    }
    if !(0.0..1.0).contains(&a.gamma) {
        return field("gamma", "must lie in [0, 1)");
    }
    if !(a.reward_scale > 0.0 && a.reward_scale.is_finite()) {
        return field("reward_scale", "must be positive");
    }
    if a.m_agents == 0 {
        return field("m_agents", "must be at least 1");
    }
    if a.x_channels == 0 {
        return field("x_channels", "must be at least 1");
    }
    let n_adv = a.n_adversaries();
    if c.gains.adversary.len() != 1 && c.gains.adversary.len() != n_adv {
        return Err(Error::config(
            "channel.gains.adversary",
            format!(
                "{} gains given for {n_adv} adversaries",
                c.gains.adversary.len()
            ),
        ));
    }
    match action_space_size(
        c.n as u64,
        c.powers.len() as u64,
        a.channels_per_adversary() as u32,
    ) {
        Ok(size) if size <= DEFAULT_SPACE_CAP => {}
        _ => return field("x_channels", "action space too large to materialize"),
    }
    if a.kind.is_learning() {
        a.dqn
            .validate()
            .map_err(|e| Error::config(format!("{path}.dqn"), e.to_string()))?;
    }
    Ok(())
}
