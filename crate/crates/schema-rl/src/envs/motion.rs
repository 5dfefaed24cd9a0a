//! Phase-1 tick resolution: motion skills executed against tick-start holds.

use super::geom::{wrap_pi, Vec2};
use super::{
    clear_ball_staging, effective_hold, Hold, ObjectState, Tolerances, WorldState,
};
use crate::pamdp::{Arm, JointAction, Skill, TaskFamily};

pub(crate) fn apply(
    begin: &WorldState,
    next: &mut WorldState,
    action: &JointAction,
    tol: &Tolerances,
) {
    let eff = |arm: Arm| effective_hold(begin, action, arm);
    let ball_eff_held = Arm::BOTH
        .iter()
        .any(|&a| matches!(eff(a), Some(Hold::Ball { .. })));
    let base_eff_held = Arm::BOTH
        .iter()
        .any(|&a| matches!(eff(a), Some(Hold::Base { .. })));

    // Lifts resolve as a pair: a single gripper cannot raise any of these
    // objects on its own.
    if Arm::BOTH.iter().any(|&a| action.skill(a) == Skill::Lift) {
        resolve_lifts(begin, next, action, tol);
    }

    // Remaining motions, left arm first.
    for arm in Arm::BOTH {
        match action.skill(arm) {
            Skill::GoToPose => {
                goto_pose(next, arm, action.args(arm), tol, ball_eff_held, base_eff_held)
            }
            Skill::Twist => twist(next, arm, eff(arm), eff(arm.other())),
            Skill::Rotate => rotate(begin, next, arm, action.args(arm), eff(arm), base_eff_held, tol),
            _ => {}
        }
    }
}

/// The lift controller moves to its default clearance trimmed by the
/// commanded distance.
fn lift_exec(action: &JointAction, arm: Arm, tol: &Tolerances) -> f64 {
    if action.skill(arm) == Skill::Lift {
        tol.lift_anchor + tol.lift_gain * (action.args(arm)[0] - tol.lift_anchor)
    } else {
        0.0
    }
}

fn resolve_lifts(
    begin: &WorldState,
    next: &mut WorldState,
    action: &JointAction,
    tol: &Tolerances,
) {
    let lifting_l = action.skill(Arm::Left) == Skill::Lift;
    let lifting_r = action.skill(Arm::Right) == Skill::Lift;
    let dl = lift_exec(action, Arm::Left, tol);
    let dr = lift_exec(action, Arm::Right, tol);

    match begin.family {
        TaskFamily::LateralLifting => {
            let holds_bar =
                |arm: Arm| matches!(begin.arm(arm).hold, Some(Hold::Bar { .. }));
            if lifting_l && lifting_r && holds_bar(Arm::Left) && holds_bar(Arm::Right) {
                if bar_levers_ok(begin, tol) && (dl - dr).abs() <= tol.lift_coord_window {
                    // The rigid bar couples the arms; the pair controller
                    // settles on the mean height.
                    let mean = 0.5 * (dl + dr);
                    for arm in Arm::BOTH {
                        let a = next.arm_mut(arm);
                        a.lifted = mean;
                        a.z = tol.home_z + mean;
                    }
                } else {
                    // Unbalanced pull: the bar tilts and slips from both jaws.
                    next.left.hold = None;
                    next.right.hold = None;
                }
            } else {
                // A lone gripper cannot carry the bar's mass.
                for arm in Arm::BOTH {
                    if action.skill(arm) == Skill::Lift && holds_bar(arm) {
                        next.arm_mut(arm).hold = None;
                    }
                }
            }
        }
        TaskFamily::Picking => {
            let pinch = Arm::BOTH
                .into_iter()
                .find(|&a| matches!(begin.arm(a).hold, Some(Hold::Ball { .. })));
            match pinch {
                Some(p) if lifting_l && lifting_r => {
                    let supported = begin.arm(p.other()).support;
                    if supported && (dl - dr).abs() <= tol.lift_coord_window {
                        let mean = 0.5 * (dl + dr);
                        for arm in Arm::BOTH {
                            let a = next.arm_mut(arm);
                            a.lifted = mean;
                            a.z = tol.home_z + mean;
                        }
                    } else {
                        // No brace (or mismatched pull): the ball slips out.
                        next.arm_mut(p).hold = None;
                    }
                }
                Some(p) => {
                    // One-sided lift of a slippery ball always fails.
                    if action.skill(p) == Skill::Lift {
                        next.arm_mut(p).hold = None;
                    }
                    for arm in Arm::BOTH {
                        if action.skill(arm) == Skill::Lift && begin.arm(arm).support {
                            next.arm_mut(arm).support = false;
                        }
                    }
                }
                None => {
                    // Air lifts; a rising support palm abandons its brace.
                    for arm in Arm::BOTH {
                        if action.skill(arm) == Skill::Lift && begin.arm(arm).support {
                            next.arm_mut(arm).support = false;
                        }
                    }
                }
            }
        }
        // Lift is not in the opening/rotating vocabularies.
        TaskFamily::Opening | TaskFamily::Rotating => {}
    }
}

/// Lever configuration for a two-handed bar carry: grips on opposite sides
/// of center, far enough out, and balanced.
fn bar_levers_ok(state: &WorldState, tol: &Tolerances) -> bool {
    let ObjectState::Bar { length, .. } = state.object else {
        return false;
    };
    let mut levers = [0.0; 2];
    for (i, arm) in Arm::BOTH.iter().enumerate() {
        match state.arm(*arm).hold {
            Some(Hold::Bar { lever, .. }) => levers[i] = lever,
            _ => return false,
        }
    }
    levers[0] * levers[1] < 0.0
        && levers[0].abs() >= tol.lever_min
        && levers[1].abs() >= tol.lever_min
        && (levers[0].abs() - levers[1].abs()).abs() <= tol.lever_balance_frac * length
}

fn goto_pose(
    next: &mut WorldState,
    arm: Arm,
    args: &[f64],
    tol: &Tolerances,
    ball_eff_held: bool,
    base_eff_held: bool,
) {
    // The gripper opens and departs: any hold, brace, or tip grip is gone.
    {
        let a = next.arm_mut(arm);
        a.hold = None;
        a.support = false;
        a.engaged = false;
    }
    let offset = Vec2::new(args[0], args[1]);
    let yaw_cmd = args[4];
    let approached = next.arm(arm).approached;
    let home = tol.home(arm);

    match next.object {
        ObjectState::Ball { center, radius, .. } => {
            // Stage at a standoff first; once staged, the servo proposes the
            // contact pose against the near side of the ball.
            let anchor = if approached {
                center + center.dir_to(home) * (radius + tol.engage_band / 2.0)
            } else {
                center + center.dir_to(home) * (tol.ball_standoff * radius)
            };
            let exec = anchor + offset * tol.goto_gain;
            let facing = exec.dir_to(center).angle();
            let exec_yaw = wrap_pi(facing + tol.yaw_gain * wrap_pi(yaw_cmd - std::f64::consts::PI));
            let d = exec.dist(center);
            if d <= radius + tol.engage_band {
                if ball_eff_held {
                    if d >= radius
                        && super::geom::ang_dist(exec_yaw, facing) <= tol.support_yaw_tol
                        && approached
                    {
                        next.arm_mut(arm).support = true;
                    }
                    // Touching a pinned ball never moves it.
                } else {
                    // A poked loose ball rolls away from the contact.
                    let dir = exec.dir_to(center);
                    if let ObjectState::Ball { center: c, .. } = &mut next.object {
                        *c = *c + dir * tol.roll_displace;
                    }
                    clear_ball_staging(next);
                }
            } else if d <= 2.0 * radius {
                next.arm_mut(arm).approached = true;
            }
            let a = next.arm_mut(arm);
            a.pos = exec;
            a.yaw = exec_yaw;
        }
        ObjectState::Corkscrew {
            center,
            handle_len,
            handle_yaw,
            ..
        } => {
            let tip = center + Vec2::from_angle(handle_yaw) * handle_len;
            let anchor = if approached {
                tip
            } else {
                tip + tip.dir_to(home) * tol.tip_standoff
            };
            let exec = anchor + offset * tol.goto_gain;
            let facing = exec.dir_to(tip).angle();
            let exec_yaw = wrap_pi(facing + tol.yaw_gain * wrap_pi(yaw_cmd - std::f64::consts::PI));
            let d = exec.dist(tip);
            if d <= tol.tip_tol {
                if base_eff_held {
                    if super::geom::ang_dist(exec_yaw, facing) <= tol.tip_yaw_tol && approached {
                        next.arm_mut(arm).engaged = true;
                    }
                } else {
                    // Pushing the free handle spins the whole corkscrew.
                    if let ObjectState::Corkscrew {
                        handle_yaw: hy,
                        yaw_drift,
                        ..
                    } = &mut next.object
                    {
                        *hy = wrap_pi(*hy + tol.spin_touch);
                        *yaw_drift += tol.spin_touch;
                    }
                    next.left.engaged = false;
                    next.right.engaged = false;
                }
            } else if d <= tol.tip_approach {
                next.arm_mut(arm).approached = true;
            }
            let a = next.arm_mut(arm);
            a.pos = exec;
            a.yaw = exec_yaw;
        }
        // Go-to-pose is not in the lifting/opening vocabularies.
        _ => {}
    }
}

fn twist(next: &mut WorldState, arm: Arm, eff_self: Option<Hold>, eff_other: Option<Hold>) {
    match eff_self {
        Some(Hold::Cap { .. }) => {
            if matches!(eff_other, Some(Hold::Base { .. })) {
                if let ObjectState::Bottle { cap_angle, .. } = &mut next.object {
                    *cap_angle += std::f64::consts::FRAC_PI_2;
                }
            } else {
                // With the base free the whole bottle turns; the jerk wrenches
                // the cap out of the jaws.
                if let ObjectState::Bottle { yaw_drift, .. } = &mut next.object {
                    *yaw_drift += std::f64::consts::FRAC_PI_2;
                }
                next.arm_mut(arm).hold = None;
            }
        }
        Some(Hold::Base { .. }) => {
            // Twisting the gripped base turns the base itself.
            if let ObjectState::Bottle { yaw_drift, .. } = &mut next.object {
                *yaw_drift += std::f64::consts::FRAC_PI_2;
            }
        }
        _ => {} // wrist spins in the air
    }
}

fn rotate(
    begin: &WorldState,
    next: &mut WorldState,
    arm: Arm,
    args: &[f64],
    eff_self: Option<Hold>,
    base_eff_held: bool,
    tol: &Tolerances,
) {
    let ObjectState::Corkscrew {
        center, handle_len, ..
    } = begin.object
    else {
        return;
    };
    if begin.arm(arm).engaged {
        let axis_exec = center + Vec2::new(args[0], args[1]) * tol.axis_gain;
        // The crank complies toward the actual grip distance from the
        // axis; the command only trims it.
        let grip = begin.arm(arm).pos;
        let radius_exec = 0.7 * grip.dist(axis_exec) + 0.3 * args[2];
        let valid = axis_exec.dist(center) <= tol.axis_tol
            && (radius_exec - handle_len).abs() <= tol.radius_tol;
        if let ObjectState::Corkscrew {
            handle_yaw,
            crank,
            yaw_drift,
            ..
        } = &mut next.object
        {
            if valid {
                if base_eff_held {
                    *crank += std::f64::consts::PI;
                    *handle_yaw = wrap_pi(*handle_yaw + std::f64::consts::PI);
                    let new_tip = center + Vec2::from_angle(*handle_yaw) * handle_len;
                    next.arm_mut(arm).pos = new_tip;
                } else {
                    // Free base: the whole corkscrew spins with the crank.
                    *yaw_drift += std::f64::consts::PI;
                    *handle_yaw = wrap_pi(*handle_yaw + std::f64::consts::PI);
                    next.arm_mut(arm).engaged = false;
                }
            } else {
                // Bad axis or radius: the grip skates off the tip.
                *handle_yaw = wrap_pi(*handle_yaw + tol.scuff_yaw);
                next.arm_mut(arm).engaged = false;
            }
        }
    } else if matches!(eff_self, Some(Hold::Base { .. })) {
        // Cranking the gripped base spins the base.
        if let ObjectState::Corkscrew { yaw_drift, .. } = &mut next.object {
            *yaw_drift += std::f64::consts::PI;
        }
    }
}
