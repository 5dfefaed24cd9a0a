//! Scripted reference controller.
//!
//! Reads privileged state and emits, for any (arm, skill), arguments that
//! execute the skill as well as the servo model allows. Chaining these
//! through each family's known-good skill schedule solves every episode;
//! tests use the same argument oracle to probe arbitrary skill sequences.

use super::{side_grasp_bearing, ObjectState, Tolerances, WorldState};
use crate::pamdp::{Arm, JointAction, JointSkill, Skill, TaskFamily, TaskSpec, HORIZON};

/// The known-good joint-skill schedule for a family, padded to the horizon
/// with no-ops.
pub fn reference_schedule(family: TaskFamily) -> [(Skill, Skill); HORIZON] {
    use Skill::*;
    match family {
        TaskFamily::LateralLifting => [(TopGrasp, TopGrasp), (Lift, Lift), (NoOp, NoOp)],
        TaskFamily::Picking => [(TopGrasp, GoToPose), (NoOp, GoToPose), (Lift, Lift)],
        TaskFamily::Opening => [(TopGrasp, SideGrasp), (Twist, NoOp), (NoOp, NoOp)],
        TaskFamily::Rotating => [(GoToPose, SideGrasp), (GoToPose, NoOp), (Rotate, NoOp)],
    }
}

/// How many leading entries of the reference schedule do useful work; later
/// steps are free no-ops after early success.
pub fn reference_len(family: TaskFamily) -> usize {
    match family {
        TaskFamily::LateralLifting | TaskFamily::Opening => 2,
        TaskFamily::Picking | TaskFamily::Rotating => 3,
    }
}

/// The reference schedule as joint skills from `spec`'s vocabulary.
pub fn oracle_schema(spec: &TaskSpec) -> Vec<JointSkill> {
    reference_schedule(spec.family)
        .iter()
        .map(|&(l, r)| {
            let idx = spec
                .joint_index(l, r)
                .expect("reference schedule uses allowed skills");
            spec.joint_vocab[idx]
        })
        .collect()
}

/// Privileged best-effort arguments for one arm executing `skill` now.
pub fn best_args(state: &WorldState, arm: Arm, skill: Skill, tol: &Tolerances) -> Vec<f64> {
    match skill {
        // pi is the neutral wrist command (zero trim on the proposal).
        Skill::TopGrasp => vec![0.0, 0.0, std::f64::consts::PI],
        Skill::SideGrasp => {
            let bearing = side_grasp_bearing(state.object.center(), arm, tol);
            vec![
                0.0,
                0.0,
                bearing.clamp(
                    -std::f64::consts::FRAC_PI_2,
                    std::f64::consts::FRAC_PI_2,
                ),
            ]
        }
        // pi is the neutral orientation command (zero correction).
        Skill::GoToPose => vec![
            0.0,
            0.0,
            std::f64::consts::PI,
            std::f64::consts::PI,
            std::f64::consts::PI,
        ],
        Skill::Lift => vec![0.35],
        Skill::Rotate => {
            let len = match state.object {
                ObjectState::Corkscrew { handle_len, .. } => handle_len,
                _ => 0.1,
            };
            vec![0.0, 0.0, len]
        }
        Skill::Twist | Skill::NoOp => vec![],
    }
}

/// Assemble a joint action for `pair` with solver arguments.
pub fn action_for(
    state: &WorldState,
    spec: &TaskSpec,
    pair: (Skill, Skill),
    tol: &Tolerances,
) -> JointAction {
    let idx = spec
        .joint_index(pair.0, pair.1)
        .expect("pair must be in the vocabulary");
    JointAction {
        joint_skill: spec.joint_vocab[idx],
        left_args: best_args(state, Arm::Left, pair.0, tol),
        right_args: best_args(state, Arm::Right, pair.1, tol),
    }
}

/// The reference action for the episode's current timestep.
pub fn solve_step(state: &WorldState, spec: &TaskSpec, tol: &Tolerances) -> JointAction {
    let schedule = reference_schedule(spec.family);
    let pair = schedule[state.timestep.min(HORIZON - 1)];
    action_for(state, spec, pair, tol)
}

/// Run a full episode with solver arguments along `schedule`; returns the
/// terminal reward.
pub fn run_sequence(
    spec: &TaskSpec,
    schedule: &[(Skill, Skill)],
    seed: u64,
    tol: &Tolerances,
) -> f64 {
    let mut state = super::reset(spec, seed, tol);
    let mut reward = 0.0;
    for &pair in schedule {
        let action = action_for(&state, spec, pair, tol);
        let (next, r, done) = super::step(&state, &action, tol).expect("valid scripted action");
        state = next;
        reward = r;
        if done {
            break;
        }
    }
    reward
}

/// Run a full scripted reference episode; returns the terminal reward.
pub fn run_reference(spec: &TaskSpec, seed: u64, tol: &Tolerances) -> f64 {
    run_sequence(spec, &reference_schedule(spec.family), seed, tol)
}

/// Whether a three-step skill sequence contains every element the family's
/// goal predicate needs, in a workable order.
///
/// This is a skill-level hold/support state machine: no geometry and no
/// arguments, assuming solver-quality execution of each skill. Sequences it
/// rejects are guaranteed to score zero no matter the arguments; sequences
/// it accepts succeed under solver arguments. Placements where the left arm
/// could conceivably side-grasp (see [`left_side_grasp_conceivable`]) are
/// outside its model.
pub fn sequence_complete(family: TaskFamily, seq: &[(Skill, Skill); HORIZON]) -> bool {
    use Skill::*;
    // Whether issuing this skill keeps the arm's existing grip through the
    // tick (same rule as the simulator).
    let retained = |s: Skill| matches!(s, NoOp | Lift | Twist | Rotate);
    match family {
        TaskFamily::LateralLifting => {
            // Per-arm hold after each tick: top-grasp toggles (grip or
            // fumble), a non-winning lift always drops the bar.
            let held_after = |a0: Skill, a1: Skill| -> (bool, bool) {
                let h0 = a0 == TopGrasp;
                let h1 = match a1 {
                    TopGrasp => !h0,
                    Lift => false,
                    _ => h0,
                };
                (h0, h1)
            };
            let (l0, l1) = held_after(seq[0].0, seq[1].0);
            let (r0, r1) = held_after(seq[0].1, seq[1].1);
            (l0 && r0 && seq[1] == (Lift, Lift)) || (l1 && r1 && seq[2] == (Lift, Lift))
        }
        TaskFamily::Picking => {
            let mut pinch = false; // padded left jaws on the ball
            let mut approached = [false; 2];
            let mut support = false; // right-arm brace
            for t in 0..HORIZON {
                let pair = [seq[t].0, seq[t].1];
                let pinch_eff = pinch && retained(pair[0]);
                if pair == [Lift, Lift] && pinch && support {
                    return true;
                }
                // Non-winning lifts drop what they pull on.
                if pinch && pair[0] == Lift {
                    pinch = false;
                }
                if support && pair[1] == Lift {
                    support = false;
                }
                // Go-to staging / contact, left then right.
                for i in 0..2 {
                    if pair[i] != GoToPose {
                        continue;
                    }
                    if i == 0 {
                        pinch = false; // departing gripper releases
                    } else {
                        support = false;
                    }
                    if approached[i] {
                        if pinch_eff && i == 1 {
                            support = true;
                        } else {
                            // Contact rolls the loose ball.
                            approached = [false; 2];
                            support = false;
                        }
                    } else {
                        approached[i] = true;
                    }
                }
                // Grasps, left then right.
                for i in 0..2 {
                    if pair[i] != TopGrasp {
                        continue;
                    }
                    if i == 0 {
                        if pinch {
                            // Fumble nudges the ball and clears staging.
                            pinch = false;
                            approached = [false; 2];
                            support = false;
                        } else {
                            pinch = true;
                        }
                    } else if !pinch {
                        // Rigid jaws squirt the loose ball away.
                        approached = [false; 2];
                        support = false;
                    }
                }
            }
            false
        }
        TaskFamily::Opening => {
            let mut cap = [false; 2];
            let mut base = false; // only the right arm can seat a side grasp
            for t in 0..HORIZON {
                let pair = [seq[t].0, seq[t].1];
                let mut opened = false;
                for i in 0..2 {
                    if pair[i] != Twist {
                        continue;
                    }
                    if cap[i] {
                        // The twisting arm needs the other arm to pin the base.
                        let base_eff = i == 0 && base && retained(pair[1]);
                        if base_eff {
                            opened = true;
                        } else {
                            return false; // whole bottle turns: pose spoiled
                        }
                    } else if i == 1 && base {
                        return false; // cranking the gripped base
                    }
                }
                for i in 0..2 {
                    match pair[i] {
                        TopGrasp => {
                            if cap[i] || (i == 1 && base) {
                                return false; // fumble jostles the bottle
                            }
                            if cap[1 - i] {
                                return false; // jaw collision over the cap
                            }
                            cap[i] = true;
                        }
                        SideGrasp => {
                            if cap[i] || (i == 1 && base) {
                                return false;
                            }
                            if i == 1 {
                                base = true;
                            }
                            // Left side grasps never seat: nothing happens.
                        }
                        _ => {}
                    }
                }
                if opened {
                    return true;
                }
            }
            false
        }
        TaskFamily::Rotating => {
            let mut base = false; // right grip on the base
            let mut approached = [false; 2];
            let mut engaged = [false; 2];
            for t in 0..HORIZON {
                let pair = [seq[t].0, seq[t].1];
                let engaged_start = engaged;
                // Only the left arm can see a pinned base (the right holds it).
                let base_eff = [base && retained(pair[1]), false];
                let mut cranked = false;
                for i in 0..2 {
                    match pair[i] {
                        GoToPose => {
                            if i == 1 {
                                base = false; // departing hand releases the base
                            }
                            engaged[i] = false;
                            if approached[i] {
                                if base_eff[i] {
                                    engaged[i] = true;
                                } else {
                                    return false; // tip touch spins the body
                                }
                            } else {
                                approached[i] = true;
                            }
                        }
                        Rotate => {
                            if engaged_start[i] {
                                if base_eff[i] {
                                    cranked = true;
                                } else {
                                    return false; // whole corkscrew spins
                                }
                            } else if i == 1 && base {
                                return false; // cranking the gripped base
                            }
                        }
                        SideGrasp => {
                            engaged[i] = false;
                            if i == 1 {
                                if base {
                                    return false; // fumble jostles the base
                                }
                                base = true;
                            }
                        }
                        _ => {}
                    }
                }
                if cranked {
                    return true;
                }
            }
            false
        }
    }
}

/// Initial placements where the left arm could conceivably reach a side
/// grasp (its home line squeaks inside the approach window). Excluded from
/// exhaustive-failure sweeps so the remaining classification is two-valued.
pub fn left_side_grasp_conceivable(state: &WorldState, tol: &Tolerances) -> bool {
    let bearing = side_grasp_bearing(state.object.center(), Arm::Left, tol);
    // The approach parameter is capped at pi/2; reachable iff the bearing is
    // within tolerance of some representable angle.
    bearing.abs() <= std::f64::consts::FRAC_PI_2 + tol.approach_angle_tol + 0.02
}

/// Build one action from per-arm skills with solver arguments, for scripted
/// demos and traces.
pub fn scripted_action(
    state: &WorldState,
    spec: &TaskSpec,
    left: Skill,
    right: Skill,
    tol: &Tolerances,
) -> JointAction {
    action_for(state, spec, (left, right), tol)
}
