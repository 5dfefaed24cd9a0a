//! A desk-scale laboratory for bimanual manipulation with parameterized
//! skills and sparse rewards.
//!
//! The policy over the hybrid discrete-continuous action space is factored
//! into a state-independent skill schedule (a `horizon x vocabulary` array
//! of logits, one categorical distribution per timestep) and a
//! state-dependent network that predicts continuous skill arguments. The
//! schedule is trained by simple reward-signed logit steps, the argument
//! network by clipped-surrogate policy optimization, and trained schedules
//! can be exported and reused on tasks with a different observation space.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `schema-rl` binary for full experiments.

pub mod chart;
pub mod cli;
pub mod envs;
pub mod nn;
pub mod policy;
pub mod schema;
pub mod trainer;
pub mod pamdp;
pub mod rng;

pub use pamdp::{
    build_task_spec, Arm, JointAction, JointSkill, ParamSpec, Skill, TaskFamily, TaskSpec,
};
