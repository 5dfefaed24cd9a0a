//! Episode trace dumps: one episode per file, one text line per step.

use super::WorldState;
use crate::pamdp::JointAction;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub timestep: usize,
    pub left_skill: String,
    pub right_skill: String,
    pub left_args: Vec<f64>,
    pub right_args: Vec<f64>,
    pub base_held: bool,
    pub support_formed: bool,
    pub reward: f64,
}

impl StepRecord {
    pub fn capture(before: &WorldState, action: &JointAction, after: &WorldState, reward: f64) -> Self {
        StepRecord {
            timestep: before.timestep,
            left_skill: action.joint_skill.left.name().to_string(),
            right_skill: action.joint_skill.right.name().to_string(),
            left_args: action.left_args.clone(),
            right_args: action.right_args.clone(),
            base_held: after.base_held(),
            support_formed: after.support_formed(),
            reward,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct EpisodeTrace {
    pub steps: Vec<StepRecord>,
}

impl EpisodeTrace {
    pub fn push(&mut self, record: StepRecord) {
        self.steps.push(record);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let fmt_args = |args: &[f64]| {
                args.iter()
                    .map(|a| format!("{a:.4}"))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let _ = writeln!(
                out,
                "t={} left={}({}) right={}({}) base_held={} support={} reward={}",
                s.timestep,
                s.left_skill,
                fmt_args(&s.left_args),
                s.right_skill,
                fmt_args(&s.right_args),
                s.base_held,
                s.support_formed,
                s.reward,
            );
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render())
    }
}
