//! Randomized invariant checks shared by the property tests and the
//! acceptance report. Each returns `Err` with a description of the first
//! violation.

#![allow(dead_code)]

use jamsim::agents::ActionSpace;
use jamsim::dqn::Experience;
use jamsim::dqn::{batch_loss_and_grad, soft_update, QNetwork, ReplayMemory, TrainingSample};
use jamsim::env::{
    compute_sinr, individual_reward, team_reward, Action, ChannelId, ChannelModel, JointAction,
    Observation, PowerLevel, PowerSet,
};
use jamsim::stats::paired_t_test;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

/// A random scenario snapshot: sender channels and powers plus jammer moves.
pub struct RandomStep {
    pub model: ChannelModel,
    pub sender_channels: Vec<ChannelId>,
    pub sender_powers: Vec<PowerLevel>,
    pub actions: Vec<JointAction>,
}

pub fn random_step(rng: &mut ChaCha8Rng) -> RandomStep {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=4);
    let model = ChannelModel {
        n_channels: n,
        noise: rng.gen_range(0.1..3.0),
        gain_sender: rng.gen_range(0.1..3.0),
        gain_adversary: (0..m).map(|_| rng.gen_range(0.1..3.0)).collect(),
        bandwidth: rng.gen_range(0.5..30.0),
        power_cost: rng.gen_range(0.0..2.0),
        ..ChannelModel::default()
    };
    let used = rng.gen_range(1..=n.min(2));
    let first = rng.gen_range(0..n);
    let sender_channels = (0..used)
        .map(|k| ChannelId::new((first + k) % n + 1, n).unwrap())
        .collect();
    let sender_powers = (0..used)
        .map(|_| PowerLevel(rng.gen_range(0.1..10.0)))
        .collect();
    let actions = (0..m)
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    Action::new(
                        ChannelId::new(rng.gen_range(1..=n), n).unwrap(),
                        PowerLevel([0.0, 1.0, 3.0, 5.0][rng.gen_range(0..4)]),
                    )
                })
                .collect()
        })
        .collect();
    RandomStep {
        model,
        sender_channels,
        sender_powers,
        actions,
    }
}

/// `sum_j individual_j = team + (M - 1) * B * capacity_drop` on random steps.
pub fn reward_aggregation(steps: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..steps {
        let s = random_step(&mut rng);
        let (sinr, snr) = compute_sinr(
            &s.model,
            &s.sender_channels,
            &s.sender_powers,
            &s.actions,
            None,
        )
        .map_err(|e| e.to_string())?;
        let powers: Vec<f64> = s
            .actions
            .iter()
            .map(|ja| ja.iter().map(|a| a.power.0).sum())
            .collect();
        let team = team_reward(&s.model, &sinr, &snr, &powers);
        let individual: f64 = powers
            .iter()
            .map(|&p| individual_reward(&s.model, &sinr, &snr, p))
            .sum();
        let drop: f64 = sinr
            .iter()
            .zip(&snr)
            .map(|(i, n)| (1.0 + n).log2() - (1.0 + i).log2())
            .sum();
        let m = powers.len() as f64;
        let rhs = team + (m - 1.0) * s.model.bandwidth * drop;
        let scale = 1.0 + individual.abs().max(rhs.abs());
        if (individual - rhs).abs() > 1e-12 * scale {
            return Err(format!(
                "step {i}: sum of individual rewards {individual} != {rhs}"
            ));
        }
    }
    Ok(())
}

/// `0 <= sinr <= snr`, and raising one jammer's power strictly lowers the
/// SINR of the channel it sits on while leaving other channels untouched.
pub fn sinr_bounds_and_monotonicity(configs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..configs {
        let s = random_step(&mut rng);
        let (sinr, snr) = compute_sinr(
            &s.model,
            &s.sender_channels,
            &s.sender_powers,
            &s.actions,
            None,
        )
        .map_err(|e| e.to_string())?;
        for (c, (&x, &n)) in sinr.iter().zip(&snr).enumerate() {
            if !(x >= 0.0 && x <= n) {
                return Err(format!(
                    "config {i}: channel {c} has sinr {x} outside [0, {n}]"
                ));
            }
        }
        let j = rng.gen_range(0..s.actions.len());
        let k = rng.gen_range(0..s.actions[j].len());
        let mut louder = s.actions.clone();
        louder[j][k].power.0 += rng.gen_range(0.1..5.0);
        let (sinr2, _) = compute_sinr(
            &s.model,
            &s.sender_channels,
            &s.sender_powers,
            &louder,
            None,
        )
        .map_err(|e| e.to_string())?;
        let hit = louder[j][k].channel;
        for (c, ch) in s.sender_channels.iter().enumerate() {
            let ok = if *ch == hit {
                sinr2[c] < sinr[c]
            } else {
                sinr2[c] == sinr[c]
            };
            if !ok {
                return Err(format!(
                    "config {i}: raising jammer power on {hit:?} moved channel {ch:?} from {} to {}",
                    sinr[c], sinr2[c]
                ));
            }
        }
    }
    Ok(())
}

/// Largest relative error between the analytic gradient of the weighted TD
/// loss and central finite differences with step `h`.
pub fn gradient_check(sizes: Vec<usize>, h: f64, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = QNetwork::he_uniform(sizes.clone(), &mut rng).map_err(|e| e.to_string())?;
    for b in net.params_mut() {
        *b += rng.gen_range(-0.1..0.1);
    }
    let inputs: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let out = *sizes.last().unwrap();
    let meta: Vec<(usize, f64, f64)> = (0..inputs.len())
        .map(|_| {
            (
                rng.gen_range(0..out),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.2..1.0),
            )
        })
        .collect();
    let batch = |_: &QNetwork| -> Vec<TrainingSample<'_>> {
        inputs
            .iter()
            .zip(&meta)
            .map(|(x, &(action, target, weight))| TrainingSample {
                input: x,
                action,
                target,
                weight,
            })
            .collect()
    };
    let (_, grad, _) = batch_loss_and_grad(&net, &batch(&net)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (p, &g) in grad.iter().enumerate() {
        let orig = net.params()[p];
        net.params_mut()[p] = orig + h;
        let up = batch_loss_and_grad(&net, &batch(&net)).unwrap().0;
        net.params_mut()[p] = orig - h;
        let down = batch_loss_and_grad(&net, &batch(&net)).unwrap().0;
        net.params_mut()[p] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = g.abs().max(numeric.abs());
        if denom > 1e-7 {
            worst = worst.max((g - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

/// Chi-square statistic of `draws` prioritized samples over entries with the
/// given priorities, plus the largest deviation in binomial standard errors.
pub fn per_sampling(
    priorities: &[f64],
    alpha: f64,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64), String> {
    let mut mem = ReplayMemory::new(priorities.len(), alpha).map_err(|e| e.to_string())?;
    for (i, &p) in priorities.iter().enumerate() {
        mem.push(Experience {
            state: Observation::new(vec![0.0]),
            action_index: 0,
            reward: i as f64,
            next_state: Observation::new(vec![0.0]),
        });
        mem.set_priority(i, p).map_err(|e| e.to_string())?;
    }
    let total: f64 = priorities.iter().map(|p| p.powf(alpha)).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; priorities.len()];
    for i in mem.sample(draws, &mut rng).map_err(|e| e.to_string())? {
        counts[i] += 1;
    }
    let mut chi2 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    for (i, &p) in priorities.iter().enumerate() {
        let prob = p.powf(alpha) / total;
        let expected = prob * draws as f64;
        let diff = counts[i] as f64 - expected;
        chi2 += diff * diff / expected;
        worst_sigma = worst_sigma.max(diff.abs() / (expected * (1.0 - prob)).sqrt());
    }
    Ok((chi2, worst_sigma))
}

/// The blended target equals `alpha * actor + (1 - alpha) * target` bit for bit.
pub fn soft_update_exact(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..trials {
        let sizes = vec![
            rng.gen_range(1..5),
            rng.gen_range(1..10),
            rng.gen_range(1..6),
        ];
        let actor = QNetwork::he_uniform(sizes.clone(), &mut rng).unwrap();
        let mut target = QNetwork::he_uniform(sizes, &mut rng).unwrap();
        let before = target.clone();
        let alpha = if i == 0 {
            1.0
        } else {
            rng.gen_range(1e-4..1.0)
        };
        soft_update(&mut target, &actor, alpha).map_err(|e| e.to_string())?;
        for ((t, b), a) in target
            .params()
            .iter()
            .zip(before.params())
            .zip(actor.params())
        {
            let want = if alpha == 1.0 {
                *a
            } else {
                alpha * a + (1.0 - alpha) * b
            };
            if *t != want {
                return Err(format!("alpha {alpha}: blended {t}, expected {want}"));
            }
        }
    }
    Ok(())
}

/// Paired t-tests against reference values computed with an independent
/// statistics package.
pub fn t_test_references() -> Check {
    let cases: [(&[f64], &[f64], f64, f64); 3] = [
        (
            &[2.0, 3.0, 4.0],
            &[1.0, 1.0, 1.0],
            3.464_101_615_137_754_6,
            0.074_179_900_227_448_53,
        ),
        (
            &[0.94, 0.91, 0.97, 0.88, 0.95, 0.93, 0.9, 0.96],
            &[0.93, 0.92, 0.95, 0.9, 0.94, 0.91, 0.92, 0.95],
            0.423_659_272_868_159_5,
            0.684_528_335_560_529_8,
        ),
        (
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[1.5, 2.1, 3.9, 4.2, 6.3],
            -2.683_281_572_999_748,
            0.055_040_608_952_499_44,
        ),
    ];
    for (a, b, t, p) in cases {
        let r = paired_t_test(a, b).map_err(|e| e.to_string())?;
        if (r.t - t).abs() > 1e-9 * t.abs() || (r.p_value - p).abs() > 1e-9 {
            return Err(format!(
                "t = {}, p = {}; expected t = {t}, p = {p}",
                r.t, r.p_value
            ));
        }
        if r.df != a.len() - 1 {
            return Err(format!("df {} for {} pairs", r.df, a.len()));
        }
    }
    match paired_t_test(&[1.5, 2.5, 3.5], &[1.0, 2.0, 3.0]) {
        Err(_) => {}
        Ok(r) => {
            return Err(format!(
                "constant differences should be degenerate, got p = {}",
                r.p_value
            ))
        }
    }
    Ok(())
}

/// Sizes of the enumerated action spaces used by the acceptance report.
pub fn space_len(n: usize, powers: &[f64], x: usize) -> usize {
    ActionSpace::build(n, PowerSet::new(powers.to_vec()).unwrap(), x, 1 << 20)
        .unwrap()
        .len()
}
