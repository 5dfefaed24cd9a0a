//! Training loop: parallel rollout workers, Monte-Carlo advantages,
//! clipped-surrogate optimization of the argument network, and
//! reward-signed schedule updates between rounds.
//!
//! Collection and optimization strictly alternate. Workers own their
//! environment and RNG streams and are advanced independently, so a round's
//! batch is bitwise identical no matter how many threads execute it;
//! results merge in worker order.

use crate::envs::{self, obs::observe, Encoding, Tolerances, WorldState};
use crate::nn::{self, AdamState, GradBuf};
use crate::pamdp::TaskSpec;
use crate::policy::{DiscreteHead, Policy};
use crate::rng::stream_rng;
use crate::schema::{SchemaError, SchemaLogits};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Hyperparameters for one training run.
#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub grad_clip: f64,
    pub steps_per_worker: usize,
    pub minibatches: usize,
    pub epochs: usize,
    pub workers: usize,
    /// Schedule logit increment on success.
    pub alpha: f64,
    /// Schedule logit decrement on failure.
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub episode_budget: usize,
    /// Run rollout workers on the rayon pool. Results are identical either
    /// way; this only changes wall-clock time.
    pub parallel_workers: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            learning_rate: 0.001,
            clip: 0.2,
            entropy_coef: 0.01,
            value_coef: 0.5,
            grad_clip: 0.5,
            steps_per_worker: 10,
            minibatches: 4,
            epochs: 4,
            workers: 8,
            alpha: 0.1,
            beta: 0.02,
            gamma: 1.0,
            seed: 0,
            episode_budget: 50_000,
            parallel_workers: false,
        }
    }
}

impl TrainerConfig {
    /// Schedule-step sizes tuned per family. Families whose goal sequence
    /// has viable same-length siblings (padded or staggered orderings) need
    /// a strong failure decrement so no sibling locks in off one lucky
    /// success; families whose goal sequence is the unique workable one
    /// never race, and instead need rare successes to persist until the
    /// next one arrives.
    pub fn for_family(family: crate::pamdp::TaskFamily) -> TrainerConfig {
        use crate::pamdp::TaskFamily::*;
        let (alpha, beta) = match family {
            LateralLifting => (0.35, 0.12),
            Opening => (0.45, 0.05),
            Picking | Rotating => (1.0, 0.001),
        };
        TrainerConfig {
            alpha,
            beta,
            ..TrainerConfig::default()
        }
    }
}

/// Success-rate window mirroring the stop criterion: at least 90% over the
/// trailing 100 episodes.
pub const TRAILING_WINDOW: usize = 100;
pub const SUCCESS_THRESHOLD: f64 = 0.9;

/// One stored environment transition.
#[derive(Debug, Clone)]
pub struct TrajStep {
    pub obs: Vec<f64>,
    pub t: usize,
    pub joint_index: usize,
    pub raw: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
}

/// A complete episode with its terminal reward.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub steps: Vec<TrajStep>,
    pub reward: f64,
}

impl Trajectory {
    pub fn executed_indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.joint_index).collect()
    }
}

/// A rollout worker: one environment plus its private RNG streams and the
/// partial episode carried across round boundaries.
#[derive(Debug, Clone)]
pub struct Worker {
    state: WorldState,
    partial: Vec<TrajStep>,
    env_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
}

impl Worker {
    pub fn new(spec: &TaskSpec, tol: &Tolerances, seed: u64, index: u64) -> Worker {
        let mut env_rng = stream_rng(seed, &[0xe1, index]);
        let act_rng = stream_rng(seed, &[0xac, index]);
        let state = envs::reset(spec, env_rng.gen(), tol);
        Worker {
            state,
            partial: Vec::new(),
            env_rng,
            act_rng,
        }
    }

    /// Advance `steps` environment steps under a frozen policy snapshot;
    /// returns episodes completed along the way.
    fn advance(
        &mut self,
        policy: &Policy,
        spec: &TaskSpec,
        encoding: Encoding,
        tol: &Tolerances,
        steps: usize,
    ) -> Vec<Trajectory> {
        let mut done_eps = Vec::new();
        for _ in 0..steps {
            let obs = observe(&self.state, encoding, tol);
            let t = self.state.timestep;
            let sampled = policy.sample_action(spec, &obs.data, t, &mut self.act_rng);
            let (next, reward, done) = envs::step(&self.state, &sampled.action, tol)
                .expect("sampled actions are always well-formed");
            self.partial.push(TrajStep {
                obs: obs.data,
                t,
                joint_index: sampled.joint_index,
                raw: sampled.raw,
                log_prob: sampled.log_prob,
                value: sampled.value,
            });
            if done {
                done_eps.push(Trajectory {
                    steps: std::mem::take(&mut self.partial),
                    reward,
                });
                self.state = envs::reset(spec, self.env_rng.gen(), tol);
            } else {
                self.state = next;
            }
        }
        done_eps
    }
}

/// Collect one round of rollouts across all workers. Bitwise reproducible
/// for fixed inputs regardless of physical parallelism; trajectories come
/// back in worker order.
pub fn collect_rollouts(
    policy: &Policy,
    spec: &TaskSpec,
    encoding: Encoding,
    tol: &Tolerances,
    cfg: &TrainerConfig,
    workers: &mut [Worker],
) -> Vec<Trajectory> {
    let steps = cfg.steps_per_worker;
    let per_worker: Vec<Vec<Trajectory>> = if cfg.parallel_workers {
        workers
            .par_iter_mut()
            .map(|w| w.advance(policy, spec, encoding, tol, steps))
            .collect()
    } else {
        workers
            .iter_mut()
            .map(|w| w.advance(policy, spec, encoding, tol, steps))
            .collect()
    };
    per_worker.into_iter().flatten().collect()
}

/// Per-step returns and raw advantages. With terminal-only reward and no
/// discounting, every step's return is the episode outcome; the advantage
/// is the return minus the stored value estimate.
pub fn advantage_targets(batch: &[Trajectory]) -> (Vec<f64>, Vec<f64>) {
    let mut returns = Vec::new();
    let mut advantages = Vec::new();
    for traj in batch {
        for step in &traj.steps {
            returns.push(traj.reward);
            advantages.push(traj.reward - step.value);
        }
    }
    (returns, advantages)
}

/// Returns plus batch-normalized advantages (zero mean, unit variance, with
/// a small guard so an all-equal batch normalizes to exact zeros).
pub fn compute_advantages(batch: &[Trajectory]) -> (Vec<f64>, Vec<f64>) {
    let (returns, mut advantages) = advantage_targets(batch);
    let lo = advantages.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = advantages.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        // Degenerate batch: no preference signal at all.
        advantages.iter_mut().for_each(|a| *a = 0.0);
        return (returns, advantages);
    }
    let n = advantages.len().max(1) as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in &mut advantages {
        *a = (*a - mean) / (std + 1e-8);
    }
    (returns, advantages)
}

/// Diagnostics from one optimization round.
#[derive(Debug, Clone, Default)]
pub struct LossDiag {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Largest |ratio - 1| observed in the first minibatch of the first
    /// epoch, before any parameter step.
    pub first_ratio_dev: f64,
    /// Mean value loss per epoch.
    pub value_loss_per_epoch: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("non-finite loss in round {round}; parameters rolled back")]
    NonFinite { round: usize },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Transfer(#[from] crate::schema::TransferError),
    #[error("transfer mode requires a schema file")]
    MissingSchema,
}

/// One clipped-surrogate optimization pass over a collected batch.
///
/// Schedule logits are constants here: only the network weights and the
/// log-spread vector receive gradient. On a non-finite loss the parameters
/// and optimizer state roll back and an error is returned.
pub fn ppo_update(
    policy: &mut Policy,
    spec: &TaskSpec,
    batch: &[Trajectory],
    cfg: &TrainerConfig,
    adam: &mut AdamState,
    rng: &mut ChaCha8Rng,
) -> Result<LossDiag, TrainError> {
    if batch.is_empty() {
        return Ok(LossDiag::default());
    }
    let (returns, mut advantages) = compute_advantages(batch);
    // A batch whose episodes all ended the same way carries no preference
    // signal: normalizing would just amplify critic noise. Freeze the
    // policy terms and let the value head keep regressing.
    let has_signal = returns.windows(2).any(|w| w[0] != w[1]);
    if !has_signal {
        advantages.iter_mut().for_each(|a| *a = 0.0);
    }
    let entropy_coef = if has_signal { cfg.entropy_coef } else { 0.0 };
    let steps: Vec<&TrajStep> = batch.iter().flat_map(|t| t.steps.iter()).collect();
    let n = steps.len();

    let snapshot = (policy.net.clone(), adam.clone());
    let mut diag = LossDiag::default();
    let mut total = (0.0, 0.0, 0.0, 0usize);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut epoch_value_loss = (0.0, 0usize);
        for mb in 0..cfg.minibatches {
            let lo = mb * n / cfg.minibatches;
            let hi = (mb + 1) * n / cfg.minibatches;
            if lo == hi {
                continue;
            }
            let idxs = &order[lo..hi];
            let scale = 1.0 / idxs.len() as f64;
            let mut grads = GradBuf::zeros_like(&policy.net);
            let mut mb_policy_loss = 0.0;
            let mut mb_value_loss = 0.0;
            let mut mb_entropy = 0.0;

            for &i in idxs {
                let step = steps[i];
                let adv = advantages[i];
                let ret = returns[i];
                let eval = policy.evaluate(spec, &step.obs, step.t, step.joint_index, &step.raw);
                let ratio = (eval.log_prob - step.log_prob).exp();
                if epoch == 0 && mb == 0 {
                    diag.first_ratio_dev = diag.first_ratio_dev.max((ratio - 1.0).abs());
                }
                let clipped = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
                let surrogate = (ratio * adv).min(clipped * adv);
                mb_policy_loss += -surrogate;
                let verr = eval.value - ret;
                mb_value_loss += verr * verr;
                mb_entropy += eval.entropy;

                // d(-min)/d(log prob): zero when the clipped branch is
                // active and saturated.
                let pg_active = if adv >= 0.0 {
                    ratio <= 1.0 + cfg.clip
                } else {
                    ratio >= 1.0 - cfg.clip
                };
                let dloss_dlp = if pg_active { -adv * ratio } else { 0.0 };

                let mut out_grad = vec![0.0; policy.net.output_dim()];
                // Value head.
                out_grad[policy.value_index()] = cfg.value_coef * 2.0 * verr * scale;
                // Argument means and log-spread.
                for d in &eval.selected {
                    let z = (d.raw - d.mean) / d.sigma;
                    let dlp_dmean = z / d.sigma;
                    out_grad[d.head_index] += dloss_dlp * dlp_dmean * scale;
                    let dlp_dls = z * z - 1.0;
                    grads.log_spread[d.spread_index] +=
                        (dloss_dlp * dlp_dls - entropy_coef) * scale;
                }
                // Baseline discrete head.
                if let Some(probs) = &eval.probs {
                    let h_cat: f64 = -probs
                        .iter()
                        .filter(|&&p| p > 0.0)
                        .map(|&p| p * p.ln())
                        .sum::<f64>();
                    for (j, &p) in probs.iter().enumerate() {
                        let one_hot = if j == eval.joint_index { 1.0 } else { 0.0 };
                        let dlp = one_hot - p;
                        let dh = if p > 0.0 { -p * (p.ln() + h_cat) } else { 0.0 };
                        out_grad[j] += (dloss_dlp * dlp - entropy_coef * dh) * scale;
                    }
                }
                nn::backward(&policy.net, &eval.cache, &out_grad, &mut grads);
            }

            let mb_len = idxs.len() as f64;
            mb_policy_loss /= mb_len;
            mb_value_loss /= mb_len;
            mb_entropy /= mb_len;
            let loss =
                mb_policy_loss + cfg.value_coef * mb_value_loss - entropy_coef * mb_entropy;
            if !loss.is_finite() || !grads.is_finite() {
                policy.net = snapshot.0;
                *adam = snapshot.1;
                return Err(TrainError::NonFinite { round: 0 });
            }
            nn::clip_global_norm(&mut grads, cfg.grad_clip);
            nn::adam_step(&mut policy.net, &grads, adam);

            total.0 += mb_policy_loss;
            total.1 += mb_value_loss;
            total.2 += mb_entropy;
            total.3 += 1;
            epoch_value_loss.0 += mb_value_loss;
            epoch_value_loss.1 += 1;
        }
        diag.value_loss_per_epoch
            .push(epoch_value_loss.0 / epoch_value_loss.1.max(1) as f64);
    }

    let k = total.3.max(1) as f64;
    diag.policy_loss = total.0 / k;
    diag.value_loss = total.1 / k;
    diag.entropy = total.2 / k;
    Ok(diag)
}

/// Training mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Baseline,
    Schema,
    Oracle,
    /// Frozen schedule imported from a file; only arguments are learned.
    Transfer,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Schema => "schema",
            Mode::Oracle => "oracle",
            Mode::Transfer => "transfer",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        match s {
            "baseline" => Some(Mode::Baseline),
            "schema" => Some(Mode::Schema),
            "oracle" => Some(Mode::Oracle),
            "transfer" => Some(Mode::Transfer),
            _ => None,
        }
    }
}

/// Per-round log record; the CSV mirrors these fields.
#[derive(Debug, Clone)]
pub struct RoundLog {
    pub round: usize,
    pub episodes: usize,
    pub trailing_success_rate: f64,
    pub mean_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub argmax_schema: String,
}

pub const CSV_HEADER: &str =
    "round,episodes,trailing_success_rate,mean_return,policy_loss,value_loss,entropy,argmax_schema";

/// Output of a full training run.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub policy: Policy,
    pub rounds: Vec<RoundLog>,
    pub episodes: usize,
    /// Episodes seen when the trailing success rate first reached the
    /// threshold; `None` when the budget ran out first.
    pub episodes_to_threshold: Option<usize>,
}

impl TrainOutput {
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rounds {
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{:.6e},{:.6e},{:.6e},{}",
                r.round,
                r.episodes,
                r.trailing_success_rate,
                r.mean_return,
                r.policy_loss,
                r.value_loss,
                r.entropy,
                r.argmax_schema
            );
        }
        out
    }

    /// The learned schedule, if this run trained one.
    pub fn schema(&self) -> Option<&SchemaLogits> {
        self.policy.schedule()
    }
}

/// Success-rate bookkeeping over the trailing window.
#[derive(Debug, Clone, Default)]
pub struct TrailingRate {
    window: std::collections::VecDeque<bool>,
    successes: usize,
}

impl TrailingRate {
    pub fn push(&mut self, success: bool) {
        self.window.push_back(success);
        if success {
            self.successes += 1;
        }
        if self.window.len() > TRAILING_WINDOW && self.window.pop_front() == Some(true) {
            self.successes -= 1;
        }
    }

    /// Rate over the window; defined once the window is full.
    pub fn rate(&self) -> f64 {
        if self.window.len() < TRAILING_WINDOW {
            0.0
        } else {
            self.successes as f64 / self.window.len() as f64
        }
    }
}

/// Run a full training job. The schema for `Transfer` mode must be supplied
/// pre-imported (already checked for compatibility).
pub fn train(
    spec: &TaskSpec,
    mode: Mode,
    encoding: Encoding,
    cfg: &TrainerConfig,
    transfer_schema: Option<SchemaLogits>,
    tol: &Tolerances,
) -> Result<TrainOutput, TrainError> {
    let mut init_rng = stream_rng(cfg.seed, &[0x1417]);
    let obs_dim = encoding.len();
    let mut policy = match mode {
        Mode::Baseline => Policy::baseline(spec, obs_dim, &mut init_rng),
        Mode::Schema => Policy::fresh_schedule(spec, obs_dim, &mut init_rng),
        Mode::Oracle => Policy::oracle(spec, obs_dim, &mut init_rng),
        Mode::Transfer => {
            let schema = transfer_schema.ok_or(TrainError::MissingSchema)?;
            Policy::with_schedule(spec, obs_dim, schema, &mut init_rng)
        }
    };
    let mut adam = AdamState::new(&policy.net, cfg.learning_rate);
    let mut workers: Vec<Worker> = (0..cfg.workers)
        .map(|i| Worker::new(spec, tol, cfg.seed, i as u64))
        .collect();

    let mut trailing = TrailingRate::default();
    let mut episodes = 0usize;
    let mut episodes_to_threshold = None;
    let mut rounds = Vec::new();
    let mut round = 0usize;

    while episodes < cfg.episode_budget && episodes_to_threshold.is_none() {
        let batch = collect_rollouts(&policy, spec, encoding, tol, cfg, &mut workers);
        let mut round_return = 0.0;
        for traj in &batch {
            episodes += 1;
            trailing.push(traj.reward > 0.0);
            round_return += traj.reward;
            if episodes_to_threshold.is_none() && trailing.rate() >= SUCCESS_THRESHOLD {
                episodes_to_threshold = Some(episodes);
            }
        }
        let mean_return = if batch.is_empty() {
            0.0
        } else {
            round_return / batch.len() as f64
        };

        let mut update_rng = stream_rng(cfg.seed, &[0x0bda, round as u64]);
        let diag = match ppo_update(&mut policy, spec, &batch, cfg, &mut adam, &mut update_rng) {
            Ok(d) => d,
            Err(TrainError::NonFinite { .. }) => {
                // Parameters were rolled back; record and continue.
                LossDiag::default()
            }
            Err(e) => return Err(e),
        };

        // Schedule updates follow the network update, one per trajectory.
        if mode == Mode::Schema {
            if let Some(schedule) = policy.schedule_mut() {
                for traj in &batch {
                    schedule.update(
                        &traj.executed_indices(),
                        traj.reward > 0.0,
                        cfg.alpha,
                        cfg.beta,
                    )?;
                }
            }
        }

        let argmax = match &policy.head {
            DiscreteHead::Schedule(s) => s.argmax_display(),
            DiscreteHead::Oracle(seq) => seq
                .iter()
                .map(|j| format!("{}:{}", j.left.name(), j.right.name()))
                .collect::<Vec<_>>()
                .join("|"),
            DiscreteHead::Baseline => "-".to_string(),
        };
        rounds.push(RoundLog {
            round,
            episodes,
            trailing_success_rate: trailing.rate(),
            mean_return,
            policy_loss: diag.policy_loss,
            value_loss: diag.value_loss,
            entropy: diag.entropy,
            argmax_schema: argmax,
        });
        round += 1;
    }

    Ok(TrainOutput {
        policy,
        rounds,
        episodes,
        episodes_to_threshold,
    })
}
