//! Vocabulary for parameterized-action tasks: skills, their continuous
//! parameter spaces, two-arm joint actions, and per-family task specs.
//!
//! Everything here is immutable after construction and shared read-only by
//! environments, policies, and the trainer.

use std::fmt;
use std::ops::Range;

pub const HORIZON: usize = 3;

/// A discrete skill primitive executed by one arm in one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Skill {
    TopGrasp,
    SideGrasp,
    GoToPose,
    Lift,
    Twist,
    Rotate,
    NoOp,
}

impl Skill {
    pub const ALL: [Skill; 7] = [
        Skill::TopGrasp,
        Skill::SideGrasp,
        Skill::GoToPose,
        Skill::Lift,
        Skill::Twist,
        Skill::Rotate,
        Skill::NoOp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Skill::TopGrasp => "top-grasp",
            Skill::SideGrasp => "side-grasp",
            Skill::GoToPose => "go-to-pose",
            Skill::Lift => "lift",
            Skill::Twist => "twist",
            Skill::Rotate => "rotate",
            Skill::NoOp => "no-op",
        }
    }

    pub fn from_name(name: &str) -> Option<Skill> {
        Skill::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Continuous parameters of this skill, in canonical order.
    pub fn params(self) -> Vec<ParamSpec> {
        let pos = 0.1; // positional arguments are offsets from a perceived anchor
        match self {
            Skill::TopGrasp => vec![
                ParamSpec::new("x", -pos, pos),
                ParamSpec::new("y", -pos, pos),
                ParamSpec::new("z-orientation", 0.0, std::f64::consts::TAU),
            ],
            Skill::SideGrasp => vec![
                ParamSpec::new("x", -pos, pos),
                ParamSpec::new("y", -pos, pos),
                ParamSpec::new(
                    "approach-angle",
                    -std::f64::consts::FRAC_PI_2,
                    std::f64::consts::FRAC_PI_2,
                ),
            ],
            Skill::GoToPose => vec![
                ParamSpec::new("x", -pos, pos),
                ParamSpec::new("y", -pos, pos),
                ParamSpec::new("roll", 0.0, std::f64::consts::TAU),
                ParamSpec::new("pitch", 0.0, std::f64::consts::TAU),
                ParamSpec::new("yaw", 0.0, std::f64::consts::TAU),
            ],
            Skill::Lift => vec![ParamSpec::new("distance", 0.0, 0.5)],
            Skill::Twist => vec![],
            Skill::Rotate => vec![
                ParamSpec::new("axis-x", -pos, pos),
                ParamSpec::new("axis-y", -pos, pos),
                ParamSpec::new("radius", 0.0, 0.2),
            ],
            Skill::NoOp => vec![],
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            Skill::TopGrasp | Skill::SideGrasp | Skill::Rotate => 3,
            Skill::GoToPose => 5,
            Skill::Lift => 1,
            Skill::Twist | Skill::NoOp => 0,
        }
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bounds of one continuous skill parameter, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSpec {
    pub fn new(name: &'static str, lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "degenerate parameter bounds for {name}");
        ParamSpec { name, lower, upper }
    }
}

/// Map a raw network output in [-1, 1] onto a parameter's physical range.
/// Values outside [-1, 1] are clamped before mapping.
pub fn denormalize(raw: f64, spec: &ParamSpec) -> f64 {
    let r = raw.clamp(-1.0, 1.0);
    spec.lower + (r + 1.0) / 2.0 * (spec.upper - spec.lower)
}

/// One of the four task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskFamily {
    LateralLifting,
    Picking,
    Opening,
    Rotating,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 4] = [
        TaskFamily::LateralLifting,
        TaskFamily::Picking,
        TaskFamily::Opening,
        TaskFamily::Rotating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskFamily::LateralLifting => "lateral-lifting",
            TaskFamily::Picking => "picking",
            TaskFamily::Opening => "opening",
            TaskFamily::Rotating => "rotating",
        }
    }

    pub fn from_name(name: &str) -> Option<TaskFamily> {
        TaskFamily::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Per-arm skill set for this family (identical for both arms),
    /// no-op included, in canonical skill order.
    pub fn allowed_skills(self) -> Vec<Skill> {
        match self {
            TaskFamily::LateralLifting => vec![Skill::TopGrasp, Skill::Lift, Skill::NoOp],
            TaskFamily::Picking => {
                vec![Skill::TopGrasp, Skill::GoToPose, Skill::Lift, Skill::NoOp]
            }
            TaskFamily::Opening => {
                vec![Skill::TopGrasp, Skill::SideGrasp, Skill::Twist, Skill::NoOp]
            }
            TaskFamily::Rotating => {
                vec![Skill::SideGrasp, Skill::GoToPose, Skill::Rotate, Skill::NoOp]
            }
        }
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which arm a per-arm quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn index(self) -> usize {
        match self {
            Arm::Left => 0,
            Arm::Right => 1,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }
}

/// A pair of per-arm skills executed together in one timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointSkill {
    pub left: Skill,
    pub right: Skill,
    /// Position in the owning task's joint vocabulary.
    pub index: usize,
}

impl fmt::Display for JointSkill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.left.name(), self.right.name())
    }
}

/// A fully specified two-arm action: a joint skill plus each arm's
/// continuous arguments in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction {
    pub joint_skill: JointSkill,
    pub left_args: Vec<f64>,
    pub right_args: Vec<f64>,
}

impl JointAction {
    pub fn args(&self, arm: Arm) -> &[f64] {
        match arm {
            Arm::Left => &self.left_args,
            Arm::Right => &self.right_args,
        }
    }

    pub fn skill(&self, arm: Arm) -> Skill {
        match arm {
            Arm::Left => self.joint_skill.left,
            Arm::Right => self.joint_skill.right,
        }
    }

    /// Check argument vector lengths against the skills' parameter counts.
    pub fn validate(&self) -> Result<(), ActionError> {
        for arm in Arm::BOTH {
            let want = self.skill(arm).param_count();
            let got = self.args(arm).len();
            if want != got {
                return Err(ActionError::ArgLength {
                    arm,
                    skill: self.skill(arm),
                    want,
                    got,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActionError {
    #[error("{arm:?} {skill} expects {want} arguments, got {got}")]
    ArgLength {
        arm: Arm,
        skill: Skill,
        want: usize,
        got: usize,
    },
    #[error("joint skill index {index} out of range for vocabulary of {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Immutable description of one task family instance: horizon, joint skill
/// vocabulary, and the per-arm continuous parameter layout.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub family: TaskFamily,
    pub horizon: usize,
    pub allowed: Vec<Skill>,
    pub joint_vocab: Vec<JointSkill>,
    pub per_arm_param_dim: usize,
}

impl TaskSpec {
    pub fn vocab_len(&self) -> usize {
        self.joint_vocab.len()
    }

    /// Index range of `skill`'s arguments inside one arm's parameter block.
    /// Both arms share the same layout; zero-parameter skills get an empty
    /// range at their offset.
    pub fn param_slice(&self, skill: Skill) -> Range<usize> {
        let mut offset = 0;
        for s in &self.allowed {
            if *s == skill {
                return offset..offset + s.param_count();
            }
            offset += s.param_count();
        }
        // Skill not allowed for this family: empty range at the end.
        offset..offset
    }

    /// All (arm, skill) slices. Per arm, the ranges partition
    /// `[0, per_arm_param_dim)` following the allowed-skill order.
    pub fn param_slices(&self) -> Vec<(Arm, Skill, Range<usize>)> {
        let mut out = Vec::new();
        for arm in Arm::BOTH {
            for &s in &self.allowed {
                out.push((arm, s, self.param_slice(s)));
            }
        }
        out
    }

    /// Look up the joint skill for a (left, right) pair.
    pub fn joint_index(&self, left: Skill, right: Skill) -> Option<usize> {
        self.joint_vocab
            .iter()
            .position(|j| j.left == left && j.right == right)
    }

    pub fn joint(&self, index: usize) -> Result<JointSkill, ActionError> {
        self.joint_vocab
            .get(index)
            .copied()
            .ok_or(ActionError::IndexOutOfRange {
                index,
                len: self.joint_vocab.len(),
            })
    }

    /// Ordered (left-name, right-name) pairs; schema files use this as the
    /// compatibility fingerprint.
    pub fn vocab_fingerprint(&self) -> Vec<(String, String)> {
        self.joint_vocab
            .iter()
            .map(|j| (j.left.name().to_string(), j.right.name().to_string()))
            .collect()
    }
}

/// Build the task spec for a family: cross-product joint vocabulary
/// enumerated left-major, fixed horizon, parameter layout from the
/// allowed-skill order.
pub fn build_task_spec(family: TaskFamily) -> TaskSpec {
    let allowed = family.allowed_skills();
    let mut joint_vocab = Vec::with_capacity(allowed.len() * allowed.len());
    for &left in &allowed {
        for &right in &allowed {
            let index = joint_vocab.len();
            joint_vocab.push(JointSkill { left, right, index });
        }
    }
    let per_arm_param_dim = allowed.iter().map(|s| s.param_count()).sum();
    TaskSpec {
        family,
        horizon: HORIZON,
        allowed,
        joint_vocab,
        per_arm_param_dim,
    }
}
