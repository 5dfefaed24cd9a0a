//! Policies over the hybrid discrete-continuous action space.
//!
//! Three discrete heads share one continuous machinery:
//!
//! * `Baseline`: the network predicts joint-skill logits from the
//!   observation, alongside argument means and a value estimate.
//! * `Schedule`: the discrete choice comes from a state-independent
//!   logits array (one categorical per timestep); the network predicts
//!   only argument means and value. The array is never differentiated:
//!   gradient steps reach the network and log-spread alone.
//! * `Oracle`: the skill sequence is fixed; only arguments are learned.
//!
//! Continuous arguments are sampled per selected skill slice from
//! Gaussians with state-dependent means and a state-independent learned
//! log-spread, clamped to [-1, 1] and mapped to physical ranges. Densities
//! are evaluated at the pre-clamp sample.

use crate::nn::{self, Cache, NetworkParams};
use crate::pamdp::{denormalize, Arm, JointAction, JointSkill, TaskSpec};
use crate::schema::SchemaLogits;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone)]
pub enum DiscreteHead {
    Baseline,
    Schedule(SchemaLogits),
    Oracle(Vec<JointSkill>),
}

#[derive(Debug, Clone)]
pub struct Policy {
    pub head: DiscreteHead,
    pub net: NetworkParams,
    pub obs_dim: usize,
    pub vocab_len: usize,
    pub per_arm_dim: usize,
}

/// Everything recorded about one sampled action.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub action: JointAction,
    pub joint_index: usize,
    /// Pre-clamp raw samples for the selected dims, left block then right.
    pub raw: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
}

/// One selected continuous dimension, with the pieces gradient assembly
/// needs.
#[derive(Debug, Clone, Copy)]
pub struct SelectedDim {
    /// Index into the network output vector (argument-mean head).
    pub head_index: usize,
    /// Index into `log_spread` (position in the two-arm argument block).
    pub spread_index: usize,
    pub raw: f64,
    pub mean: f64,
    pub sigma: f64,
}

/// Recomputed quantities for a stored (observation, action) pair.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub log_prob: f64,
    pub entropy: f64,
    pub value: f64,
    pub cache: Cache,
    /// Baseline softmax over joint skills (empty for schedule/oracle heads).
    pub probs: Option<Vec<f64>>,
    pub joint_index: usize,
    pub selected: Vec<SelectedDim>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    probs
}

fn sample_categorical(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Standard normal draw (Box-Muller; two uniforms per call).
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn normal_log_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * LN_2PI
}

/// Default initial log-spread. The perception-guided skills put most of
/// the competence in their anchors, so exploration noise starts small and
/// the entropy bonus widens it only where the reward signal allows.
pub const INIT_LOG_SPREAD: f64 = -1.9;

impl Policy {
    pub fn baseline(spec: &TaskSpec, obs_dim: usize, rng: &mut ChaCha8Rng) -> Policy {
        Policy::build(DiscreteHead::Baseline, spec, obs_dim, rng)
    }

    pub fn fresh_schedule(spec: &TaskSpec, obs_dim: usize, rng: &mut ChaCha8Rng) -> Policy {
        Policy::build(
            DiscreteHead::Schedule(crate::schema::init_schema(spec)),
            spec,
            obs_dim,
            rng,
        )
    }

    /// Schedule head seeded from an imported logits array (transfer).
    pub fn with_schedule(
        spec: &TaskSpec,
        obs_dim: usize,
        schema: SchemaLogits,
        rng: &mut ChaCha8Rng,
    ) -> Policy {
        assert_eq!(schema.vocab_len(), spec.vocab_len());
        Policy::build(DiscreteHead::Schedule(schema), spec, obs_dim, rng)
    }

    pub fn oracle(spec: &TaskSpec, obs_dim: usize, rng: &mut ChaCha8Rng) -> Policy {
        Policy::build(
            DiscreteHead::Oracle(crate::envs::solver::oracle_schema(spec)),
            spec,
            obs_dim,
            rng,
        )
    }

    fn build(head: DiscreteHead, spec: &TaskSpec, obs_dim: usize, rng: &mut ChaCha8Rng) -> Policy {
        let vocab_len = spec.vocab_len();
        let per_arm_dim = spec.per_arm_param_dim;
        let arg_dims = 2 * per_arm_dim;
        let out_dim = match head {
            DiscreteHead::Baseline => vocab_len + arg_dims + 1,
            _ => arg_dims + 1,
        };
        let net = nn::init_mlp(obs_dim, out_dim, arg_dims, INIT_LOG_SPREAD, rng);
        Policy {
            head,
            net,
            obs_dim,
            vocab_len,
            per_arm_dim,
        }
    }

    /// Offset of the argument-mean block in the network output.
    pub fn arg_base(&self) -> usize {
        match self.head {
            DiscreteHead::Baseline => self.vocab_len,
            _ => 0,
        }
    }

    pub fn value_index(&self) -> usize {
        self.net.output_dim() - 1
    }

    pub fn schedule(&self) -> Option<&SchemaLogits> {
        match &self.head {
            DiscreteHead::Schedule(s) => Some(s),
            _ => None,
        }
    }

    pub fn schedule_mut(&mut self) -> Option<&mut SchemaLogits> {
        match &mut self.head {
            DiscreteHead::Schedule(s) => Some(s),
            _ => None,
        }
    }

    /// The selected continuous dims for a joint skill, left block then right.
    fn selected_dims(&self, spec: &TaskSpec, joint: JointSkill) -> Vec<(usize, usize)> {
        // (head index, spread index)
        let base = self.arg_base();
        let mut dims = Vec::new();
        for arm in Arm::BOTH {
            let skill = match arm {
                Arm::Left => joint.left,
                Arm::Right => joint.right,
            };
            let offset = arm.index() * self.per_arm_dim;
            for i in spec.param_slice(skill) {
                dims.push((base + offset + i, offset + i));
            }
        }
        dims
    }

    /// Distribution over joint skills at timestep `t` given a forward pass.
    fn discrete_probs(&self, out: &[f64], t: usize) -> Option<Vec<f64>> {
        match &self.head {
            DiscreteHead::Baseline => Some(softmax(&out[..self.vocab_len])),
            DiscreteHead::Schedule(s) => Some(s.row_probs(t)),
            DiscreteHead::Oracle(_) => None,
        }
    }

    /// Sample an action for `obs` at timestep `t`.
    pub fn sample_action(
        &self,
        spec: &TaskSpec,
        obs: &[f64],
        t: usize,
        rng: &mut ChaCha8Rng,
    ) -> Sampled {
        assert!(t < spec.horizon, "timestep beyond horizon");
        let cache = nn::forward(&self.net, obs);
        let out = cache.output();

        let (joint_index, discrete_lp) = match &self.head {
            DiscreteHead::Oracle(schedule) => (schedule[t].index, 0.0),
            _ => {
                let probs = self.discrete_probs(out, t).expect("non-oracle head");
                let x = sample_categorical(&probs, rng);
                (x, probs[x].ln())
            }
        };
        let joint = spec.joint_vocab[joint_index];

        let mut raw = Vec::new();
        let mut log_prob = discrete_lp;
        let mut left_args = Vec::new();
        let mut right_args = Vec::new();
        for arm in Arm::BOTH {
            let skill = match arm {
                Arm::Left => joint.left,
                Arm::Right => joint.right,
            };
            let offset = arm.index() * self.per_arm_dim;
            let params = skill.params();
            for (k, i) in spec.param_slice(skill).enumerate() {
                let mean = out[self.arg_base() + offset + i];
                let sigma = self.net.log_spread[offset + i].exp();
                let x = mean + sigma * gaussian(rng);
                log_prob += normal_log_pdf(x, mean, sigma);
                raw.push(x);
                let physical = denormalize(x, &params[k]);
                match arm {
                    Arm::Left => left_args.push(physical),
                    Arm::Right => right_args.push(physical),
                }
            }
        }

        Sampled {
            action: JointAction {
                joint_skill: joint,
                left_args,
                right_args,
            },
            joint_index,
            raw,
            log_prob,
            value: out[self.value_index()],
        }
    }

    /// Recompute log-probability, entropy, and value for a stored step
    /// under the current parameters.
    pub fn evaluate(
        &self,
        spec: &TaskSpec,
        obs: &[f64],
        t: usize,
        joint_index: usize,
        raw: &[f64],
    ) -> Evaluation {
        let cache = nn::forward(&self.net, obs);
        let out = cache.output();
        let joint = spec.joint_vocab[joint_index];

        let (probs, mut log_prob, mut entropy) = match &self.head {
            DiscreteHead::Oracle(_) => (None, 0.0, 0.0),
            _ => {
                let p = self.discrete_probs(out, t).expect("non-oracle head");
                let lp = p[joint_index].ln();
                let h = -p
                    .iter()
                    .filter(|&&v| v > 0.0)
                    .map(|&v| v * v.ln())
                    .sum::<f64>();
                (
                    matches!(self.head, DiscreteHead::Baseline).then(|| p),
                    lp,
                    h,
                )
            }
        };

        let dims = self.selected_dims(spec, joint);
        assert_eq!(
            dims.len(),
            raw.len(),
            "stored raw arguments do not match the joint skill's slices"
        );
        let mut selected = Vec::with_capacity(dims.len());
        for ((head_index, spread_index), &x) in dims.into_iter().zip(raw.iter()) {
            let mean = out[head_index];
            let sigma = self.net.log_spread[spread_index].exp();
            log_prob += normal_log_pdf(x, mean, sigma);
            entropy += 0.5 * (LN_2PI + 1.0) + self.net.log_spread[spread_index];
            selected.push(SelectedDim {
                head_index,
                spread_index,
                raw: x,
                mean,
                sigma,
            });
        }

        Evaluation {
            log_prob,
            entropy,
            value: out[self.value_index()],
            cache,
            probs,
            joint_index,
            selected,
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pamdp::{build_task_spec, Skill, TaskFamily};
    use crate::rng::stream_rng;

    fn opening_policy(kind: &str) -> (crate::pamdp::TaskSpec, Policy) {
        let spec = build_task_spec(TaskFamily::Opening);
        let mut rng = stream_rng(42, &[1]);
        let p = match kind {
            "baseline" => Policy::baseline(&spec, 19, &mut rng),
            "schedule" => Policy::fresh_schedule(&spec, 19, &mut rng),
            "oracle" => Policy::oracle(&spec, 19, &mut rng),
            _ => unreachable!(),
        };
        (spec, p)
    }

    fn any_obs() -> Vec<f64> {
        let mut rng = stream_rng(9, &[3]);
        use rand::Rng;
        (0..19).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn uniform_schedule_samples_uniformly() {
        let (spec, policy) = opening_policy("schedule");
        let obs = any_obs();
        let mut rng = stream_rng(7, &[4]);
        let n = 10_000;
        let mut counts = vec![0usize; 16];
        for _ in 0..n {
            let s = policy.sample_action(&spec, &obs, 0, &mut rng);
            counts[s.joint_index] += 1;
        }
        // Chi-squared against uniform: 15 dof, 0.001 critical value 37.70.
        let expect = n as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        assert!(chi2 < 37.70, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn sampling_frequencies_track_softmax() {
        let (spec, mut policy) = opening_policy("schedule");
        if let Some(s) = policy.schedule_mut() {
            s.values[0][1] = 1.2;
            s.values[0][5] = -0.8;
        }
        let probs = policy.schedule().unwrap().row_probs(0);
        let obs = any_obs();
        let mut rng = stream_rng(19, &[14]);
        let n = 20_000;
        let mut counts = vec![0usize; 16];
        for _ in 0..n {
            counts[policy.sample_action(&spec, &obs, 0, &mut rng).joint_index] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 15 dof, 0.001 critical value 37.70.
        assert!(chi2 < 37.70, "chi2 = {chi2}");
    }

    #[test]
    fn sampled_log_prob_matches_evaluation_exactly() {
        for kind in ["baseline", "schedule", "oracle"] {
            let (spec, policy) = opening_policy(kind);
            let obs = any_obs();
            let mut rng = stream_rng(11, &[5]);
            for t in 0..3 {
                let s = policy.sample_action(&spec, &obs, t, &mut rng);
                let e = policy.evaluate(&spec, &obs, t, s.joint_index, &s.raw);
                assert!(
                    (s.log_prob - e.log_prob).abs() < 1e-12,
                    "{kind}: {} vs {}",
                    s.log_prob,
                    e.log_prob
                );
                assert_eq!(s.value, e.value);
            }
        }
    }

    #[test]
    fn continuous_log_prob_at_mean() {
        // At the head mean with spread sigma per dim, the density of k dims
        // is -k/2 ln(2 pi sigma^2).
        let (spec, mut policy) = opening_policy("oracle");
        let sigma = 0.37f64;
        for v in &mut policy.net.log_spread {
            *v = sigma.ln();
        }
        let obs = any_obs();
        let cache = crate::nn::forward(&policy.net, &obs);
        let out = cache.output();
        // Oracle step 0 selects top-grasp (3 dims) and side-grasp (3 dims).
        let joint = spec.joint_index(Skill::TopGrasp, Skill::SideGrasp).unwrap();
        let dims = policy.selected_dims(&spec, spec.joint_vocab[joint]);
        assert_eq!(dims.len(), 6);
        let raw: Vec<f64> = dims.iter().map(|&(h, _)| out[h]).collect();
        let e = policy.evaluate(&spec, &obs, 0, joint, &raw);
        let k = raw.len() as f64;
        let want = -k / 2.0 * (2.0 * std::f64::consts::PI * sigma * sigma).ln();
        assert!((e.log_prob - want).abs() < 1e-10);
    }

    #[test]
    fn oracle_always_follows_its_schedule() {
        let (spec, policy) = opening_policy("oracle");
        let obs = any_obs();
        let mut rng = stream_rng(13, &[6]);
        let schedule = crate::envs::solver::oracle_schema(&spec);
        for t in 0..3 {
            for _ in 0..20 {
                let s = policy.sample_action(&spec, &obs, t, &mut rng);
                assert_eq!(s.joint_index, schedule[t].index);
            }
        }
    }

    #[test]
    fn uniform_categorical_entropy_is_log_16() {
        let (spec, policy) = opening_policy("schedule");
        let obs = any_obs();
        let e = policy.evaluate(&spec, &obs, 0, 0, &[0.0; 6]);
        let diff_part: f64 = e
            .selected
            .iter()
            .map(|d| 0.5 * (LN_2PI + 1.0) + d.sigma.ln())
            .sum();
        let cat = e.entropy - diff_part;
        assert!((cat - 16f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn entropy_tracks_log_spread() {
        let (spec, mut policy) = opening_policy("schedule");
        let obs = any_obs();
        let e_wide = policy.evaluate(&spec, &obs, 0, 0, &[0.0; 6]);
        for v in &mut policy.net.log_spread {
            *v -= 1.0;
        }
        let e_narrow = policy.evaluate(&spec, &obs, 0, 0, &[0.0; 6]);
        assert!(e_narrow.entropy < e_wide.entropy);
    }

    #[test]
    fn sampled_actions_respect_parameter_bounds() {
        let (spec, policy) = opening_policy("schedule");
        let obs = any_obs();
        let mut rng = stream_rng(17, &[8]);
        for _ in 0..500 {
            let s = policy.sample_action(&spec, &obs, 0, &mut rng);
            s.action.validate().unwrap();
            for arm in Arm::BOTH {
                let skill = s.action.skill(arm);
                for (arg, p) in s.action.args(arm).iter().zip(skill.params().iter()) {
                    assert!(*arg >= p.lower - 1e-12 && *arg <= p.upper + 1e-12);
                }
            }
        }
    }
}
