//! Analytic desk-scale simulators for the four bimanual task families.
//!
//! There is no contact dynamics here: each skill resolves through a
//! perception-guided servo model (commanded arguments refine an anchor pose
//! proposed from the object's perceived geometry), and task success is a
//! predicate over the resulting geometric state. Episodes are short
//! (horizon 3) and reward is binary and terminal.
//!
//! Tick resolution order, identical for every family:
//!
//! 1. Motion skills (lift, twist, rotate, go-to-pose) execute against the
//!    holds that existed when the tick began. A hold only supports a
//!    same-tick dependent motion if its arm does nothing that breaks the
//!    grip this tick (re-grasping fumbles, go-to-pose releases).
//! 2. Grasp skills then resolve against the post-motion object pose; new
//!    holds become usable from the next tick.
//! 3. The family's success predicate is evaluated on the end-of-tick state.

pub mod geom;
mod grasp;
mod motion;
pub mod obs;
pub mod solver;
pub mod trace;

use crate::pamdp::{ActionError, Arm, JointAction, Skill, TaskFamily, TaskSpec};
use crate::rng::stream_rng;
use geom::{wrap_pi, Vec2};
use rand::Rng;

pub use obs::{Encoding, Observation, RASTER_CHANNELS, RASTER_LEN, RASTER_SIDE};

/// Workspace is the unit square; arms face each other across it.
pub const WORKSPACE: (f64, f64) = (0.0, 1.0);

/// Every tolerance, servo constant, and perturbation magnitude in one record.
#[derive(Debug, Clone)]
pub struct Tolerances {
    // Success-predicate constants.
    pub grasp_yaw_tol: f64,
    pub lever_min: f64,
    pub lever_balance_frac: f64,
    pub lift_threshold: f64,
    pub lift_balance: f64,
    pub engage_band: f64,
    pub support_yaw_tol: f64,
    pub approach_angle_tol: f64,
    pub side_grasp_pad: f64,
    pub tip_tol: f64,
    pub tip_approach: f64,
    pub tip_yaw_tol: f64,
    pub axis_tol: f64,
    pub radius_tol: f64,
    pub pose_pos_tol: f64,
    pub pose_yaw_tol: f64,

    // Servo execution model.
    pub capture_radius: f64,
    pub grasp_gain: f64,
    pub goto_gain: f64,
    pub yaw_gain: f64,
    pub axis_gain: f64,
    pub grasp_yaw_basin: f64,
    pub ball_standoff: f64,
    pub tip_standoff: f64,
    pub lift_coord_window: f64,
    /// The lift controller's default clearance; commands trim around it.
    pub lift_anchor: f64,
    pub lift_gain: f64,

    // Perturbations of mishandled objects.
    pub roll_displace: f64,
    pub fumble_pos: f64,
    pub fumble_yaw: f64,
    pub spin_touch: f64,
    pub scuff_yaw: f64,

    // Fixed geometry.
    pub bar_width: f64,
    pub corkscrew_base_radius: f64,
    pub home_left: Vec2,
    pub home_right: Vec2,
    pub home_z: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            grasp_yaw_tol: 20f64.to_radians(),
            lever_min: 0.05,
            lever_balance_frac: 0.1,
            lift_threshold: 0.25,
            lift_balance: 0.05,
            engage_band: 0.03,
            support_yaw_tol: 30f64.to_radians(),
            approach_angle_tol: std::f64::consts::FRAC_PI_3,
            side_grasp_pad: 0.02,
            tip_tol: 0.03,
            tip_approach: 0.1,
            tip_yaw_tol: 30f64.to_radians(),
            axis_tol: 0.03,
            radius_tol: 0.03,
            pose_pos_tol: 0.02,
            pose_yaw_tol: 0.1,

            capture_radius: 0.05,
            grasp_gain: 0.35,
            goto_gain: 0.15,
            yaw_gain: 0.15,
            axis_gain: 0.15,
            grasp_yaw_basin: 60f64.to_radians(),
            ball_standoff: 1.75,
            tip_standoff: 0.065,
            lift_coord_window: 0.15,
            lift_anchor: 0.27,
            lift_gain: 0.3,

            roll_displace: 0.05,
            fumble_pos: 0.03,
            fumble_yaw: 0.15,
            spin_touch: 0.3,
            scuff_yaw: 0.15,

            bar_width: 0.12,
            corkscrew_base_radius: 0.05,
            home_left: Vec2::new(0.1, 0.5),
            home_right: Vec2::new(0.9, 0.5),
            home_z: 0.3,
        }
    }
}

impl Tolerances {
    pub fn home(&self, arm: Arm) -> Vec2 {
        match arm {
            Arm::Left => self.home_left,
            Arm::Right => self.home_right,
        }
    }
}

/// What an arm's gripper is currently holding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hold {
    /// Two-finger grip across the bar. `lever` is the signed distance of the
    /// grasp point from the bar center along its axis; `yaw` is the jaw
    /// orientation.
    Bar { point: Vec2, lever: f64, yaw: f64 },
    /// Pinch on the ball from above.
    Ball { point: Vec2 },
    /// Grip on the bottle cap from above.
    Cap { point: Vec2 },
    /// Side grip on a base (bottle or corkscrew).
    Base { point: Vec2 },
}

/// One end effector.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub pos: Vec2,
    pub z: f64,
    pub yaw: f64,
    pub hold: Option<Hold>,
    /// A staging go-to-pose near the object has been completed.
    pub approached: bool,
    /// Support contact formed against the held ball (picking).
    pub support: bool,
    /// Grip on the corkscrew handle tip (rotating).
    pub engaged: bool,
    /// Executed lift distance, recorded by the most recent lift.
    pub lifted: f64,
}

impl ArmState {
    fn at_home(arm: Arm, tol: &Tolerances) -> ArmState {
        ArmState {
            pos: tol.home(arm),
            z: tol.home_z,
            yaw: if arm == Arm::Left {
                0.0
            } else {
                std::f64::consts::PI
            },
            hold: None,
            approached: false,
            support: false,
            engaged: false,
            lifted: 0.0,
        }
    }
}

/// Family-specific object record with its sampled variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectState {
    Bar {
        center: Vec2,
        yaw: f64,
        length: f64,
        width: f64,
        mass: f64,
    },
    Ball {
        center: Vec2,
        radius: f64,
        friction: f64,
    },
    Bottle {
        center: Vec2,
        base_radius: f64,
        cap_radius: f64,
        /// Cap rotation relative to the base.
        cap_angle: f64,
        /// Accumulated base orientation drift from its initial pose.
        yaw_drift: f64,
        /// Accumulated base position drift from its initial pose.
        pos_drift: f64,
    },
    Corkscrew {
        center: Vec2,
        handle_len: f64,
        /// Current world direction of the handle arm.
        handle_yaw: f64,
        /// Crank progress of the handle relative to the base.
        crank: f64,
        yaw_drift: f64,
        pos_drift: f64,
    },
}

impl ObjectState {
    pub fn center(&self) -> Vec2 {
        match *self {
            ObjectState::Bar { center, .. }
            | ObjectState::Ball { center, .. }
            | ObjectState::Bottle { center, .. }
            | ObjectState::Corkscrew { center, .. } => center,
        }
    }
}

/// Complete environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub family: TaskFamily,
    pub object: ObjectState,
    pub left: ArmState,
    pub right: ArmState,
    pub timestep: usize,
}

impl WorldState {
    pub fn arm(&self, arm: Arm) -> &ArmState {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn arm_mut(&mut self, arm: Arm) -> &mut ArmState {
        match arm {
            Arm::Left => &mut self.left,
            Arm::Right => &mut self.right,
        }
    }

    /// Whether some arm holds a base grip (bottle / corkscrew).
    pub fn base_held(&self) -> bool {
        Arm::BOTH
            .iter()
            .any(|&a| matches!(self.arm(a).hold, Some(Hold::Base { .. })))
    }

    /// Whether some arm has formed support against the ball.
    pub fn support_formed(&self) -> bool {
        Arm::BOTH.iter().any(|&a| self.arm(a).support)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("episode already over (timestep {timestep} >= horizon {horizon})")]
    EpisodeOver { timestep: usize, horizon: usize },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("skill {skill} is not in the {family} vocabulary")]
    SkillNotAllowed { skill: Skill, family: TaskFamily },
}

/// Sample an initial state for `spec` from `seed`. Identical seeds give
/// bitwise-identical states.
pub fn reset(spec: &TaskSpec, seed: u64, tol: &Tolerances) -> WorldState {
    let mut rng = stream_rng(seed, &[0x5eed]);
    let center = Vec2::new(rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7));
    let object = match spec.family {
        TaskFamily::LateralLifting => ObjectState::Bar {
            center,
            yaw: rng.gen_range(0.0..std::f64::consts::PI),
            length: rng.gen_range(0.4..0.6),
            width: tol.bar_width,
            mass: rng.gen_range(2.0..6.0),
        },
        TaskFamily::Picking => ObjectState::Ball {
            center,
            radius: rng.gen_range(0.05..0.15),
            friction: rng.gen_range(0.05..0.3),
        },
        TaskFamily::Opening => ObjectState::Bottle {
            center,
            base_radius: rng.gen_range(0.04..0.08),
            cap_radius: rng.gen_range(0.02..0.04),
            cap_angle: 0.0,
            yaw_drift: 0.0,
            pos_drift: 0.0,
        },
        TaskFamily::Rotating => ObjectState::Corkscrew {
            center,
            handle_len: rng.gen_range(0.08..0.15),
            handle_yaw: rng.gen_range(0.0..std::f64::consts::TAU),
            crank: 0.0,
            yaw_drift: 0.0,
            pos_drift: 0.0,
        },
    };
    WorldState {
        family: spec.family,
        object,
        left: ArmState::at_home(Arm::Left, tol),
        right: ArmState::at_home(Arm::Right, tol),
        timestep: 0,
    }
}

/// Whether issuing `skill` lets the arm keep an existing hold through the
/// tick. Go-to-pose departs (release); grasp skills fumble an occupied
/// gripper; lift/twist/rotate carry or pivot in place.
pub(crate) fn hold_retained(skill: Skill) -> bool {
    matches!(
        skill,
        Skill::NoOp | Skill::Lift | Skill::Twist | Skill::Rotate
    )
}

/// Holds usable by dependent motions during this tick: the arm must have
/// held at tick start and not break the grip itself.
pub(crate) fn effective_hold(state: &WorldState, action: &JointAction, arm: Arm) -> Option<Hold> {
    if hold_retained(action.skill(arm)) {
        state.arm(arm).hold
    } else {
        None
    }
}

/// Advance one timestep. Both arms' skills are applied simultaneously;
/// the returned reward is 1.0 exactly when the episode ends in success.
pub fn step(
    state: &WorldState,
    action: &JointAction,
    tol: &Tolerances,
) -> Result<(WorldState, f64, bool), EnvError> {
    let spec_horizon = crate::pamdp::HORIZON;
    if state.timestep >= spec_horizon {
        return Err(EnvError::EpisodeOver {
            timestep: state.timestep,
            horizon: spec_horizon,
        });
    }
    action.validate()?;
    for arm in Arm::BOTH {
        let skill = action.skill(arm);
        if !state.family.allowed_skills().contains(&skill) {
            return Err(EnvError::SkillNotAllowed {
                skill,
                family: state.family,
            });
        }
    }

    let mut next = state.clone();

    // Phase 1: motions against tick-start holds.
    motion::apply(state, &mut next, action, tol);

    // Phase 2: grasps against the post-motion object pose.
    for arm in [Arm::Left, Arm::Right] {
        let skill = action.skill(arm);
        if matches!(skill, Skill::TopGrasp | Skill::SideGrasp) {
            grasp::apply(&mut next, arm, skill, action.args(arm), tol);
        }
    }

    next.timestep = state.timestep + 1;
    let success = is_success(&next, tol);
    let done = success || next.timestep >= spec_horizon;
    Ok((next, if success { 1.0 } else { 0.0 }, done))
}

/// Dispatch to the family's success predicate.
pub fn is_success(state: &WorldState, tol: &Tolerances) -> bool {
    match state.family {
        TaskFamily::LateralLifting => success_bar(state, tol),
        TaskFamily::Picking => success_ball(state, tol),
        TaskFamily::Opening => success_bottle(state, tol),
        TaskFamily::Rotating => success_corkscrew(state, tol),
    }
}

/// Bar lifted by both arms: valid grasps inside the bar, jaws aligned with
/// the bar cross-axis, lever arms on opposite sides of center, balanced,
/// and both executed lifts past the threshold with matched heights.
pub fn success_bar(state: &WorldState, tol: &Tolerances) -> bool {
    let ObjectState::Bar {
        center,
        yaw,
        length,
        width,
        ..
    } = state.object
    else {
        return false;
    };
    let axis = Vec2::from_angle(yaw);
    let mut levers = [0.0; 2];
    for (i, arm) in Arm::BOTH.iter().enumerate() {
        let Some(Hold::Bar {
            point,
            lever,
            yaw: grip_yaw,
        }) = state.arm(*arm).hold
        else {
            return false;
        };
        let rel = point - center;
        let along = rel.dot(axis);
        let across = rel.cross(axis);
        if along.abs() > length / 2.0 || across.abs() > width / 2.0 {
            return false;
        }
        let perp = yaw + std::f64::consts::FRAC_PI_2;
        if geom::line_ang_dist(grip_yaw, perp) > tol.grasp_yaw_tol {
            return false;
        }
        levers[i] = lever;
    }
    if levers[0] * levers[1] >= 0.0 {
        return false; // same side of center
    }
    if levers[0].abs() < tol.lever_min || levers[1].abs() < tol.lever_min {
        return false;
    }
    if (levers[0].abs() - levers[1].abs()).abs() > tol.lever_balance_frac * length {
        return false;
    }
    let (dl, dr) = (state.left.lifted, state.right.lifted);
    dl >= tol.lift_threshold && dr >= tol.lift_threshold && (dl - dr).abs() <= tol.lift_balance
}

/// Ball raised by a pinch from above plus a braced support hand, both
/// lifting together past the threshold.
pub fn success_ball(state: &WorldState, tol: &Tolerances) -> bool {
    let ObjectState::Ball {
        center,
        radius,
        friction,
    } = state.object
    else {
        return false;
    };
    let mut pinch_ok = false;
    for arm in Arm::BOTH {
        if let Some(Hold::Ball { point }) = state.arm(arm).hold {
            if point.dist(center) <= friction * radius {
                pinch_ok = true;
            }
        }
    }
    pinch_ok
        && state.support_formed()
        && state.left.lifted >= tol.lift_threshold
        && state.right.lifted >= tol.lift_threshold
}

/// Cap rotated a quarter turn relative to the base while the base kept its
/// pose.
pub fn success_bottle(state: &WorldState, tol: &Tolerances) -> bool {
    let ObjectState::Bottle {
        cap_angle,
        yaw_drift,
        pos_drift,
        ..
    } = state.object
    else {
        return false;
    };
    cap_angle >= std::f64::consts::FRAC_PI_2 - 1e-9
        && yaw_drift.abs() <= tol.pose_yaw_tol
        && pos_drift.abs() <= tol.pose_pos_tol
}

/// Handle cranked a half turn about the base while the base kept its pose.
pub fn success_corkscrew(state: &WorldState, tol: &Tolerances) -> bool {
    let ObjectState::Corkscrew {
        crank,
        yaw_drift,
        pos_drift,
        ..
    } = state.object
    else {
        return false;
    };
    crank >= std::f64::consts::PI - 1e-9
        && yaw_drift.abs() <= tol.pose_yaw_tol
        && pos_drift.abs() <= tol.pose_pos_tol
}

/// World-frame bearing from the object center toward the arm's home; a side
/// grasp is only stable when its commanded approach angle stays close to
/// this line (the gripper seats on the near side of the object).
pub(crate) fn side_grasp_bearing(center: Vec2, arm: Arm, tol: &Tolerances) -> f64 {
    (tol.home(arm) - center).angle()
}

/// Nudge the object in place (fumbled regrasp, jaw collision). Bottles and
/// corkscrews accumulate pose drift; bars and balls just move, unless
/// another gripper still pins them down.
pub(crate) fn nudge_object(state: &mut WorldState, away_from: Vec2, tol: &Tolerances) {
    let pinned = Arm::BOTH.iter().any(|&a| {
        matches!(
            state.arm(a).hold,
            Some(Hold::Bar { .. }) | Some(Hold::Ball { .. })
        )
    });
    let dir = away_from.dir_to(state.object.center());
    match &mut state.object {
        ObjectState::Bar { center, yaw, .. } => {
            if pinned {
                return;
            }
            *center = *center + dir * tol.fumble_pos;
            *yaw = wrap_pi(*yaw + tol.fumble_yaw);
        }
        ObjectState::Ball { center, .. } => {
            *center = *center + dir * tol.fumble_pos;
            clear_ball_staging(state);
        }
        ObjectState::Bottle {
            pos_drift,
            yaw_drift,
            ..
        }
        | ObjectState::Corkscrew {
            pos_drift,
            yaw_drift,
            ..
        } => {
            *pos_drift += tol.fumble_pos;
            *yaw_drift += tol.fumble_yaw;
        }
    }
}

/// Any displacement of the ball invalidates staged approaches and support.
pub(crate) fn clear_ball_staging(state: &mut WorldState) {
    for arm in Arm::BOTH {
        state.arm_mut(arm).approached = false;
        state.arm_mut(arm).support = false;
    }
}

#[cfg(test)]
mod tests;
