//! Phase-2 tick resolution: grasp skills against the post-motion object pose.
//!
//! A grasp servo refines a perception-proposed anchor with the commanded
//! offset, then closes if the result lands inside the feature's capture
//! region. Grasping with an already occupied gripper fumbles: the hold is
//! lost and the object is jostled. Left jaws are padded, right jaws are
//! rigid; only the padded pair can pinch the slippery ball.

use super::geom::{line_ang_dist, Vec2};
use super::{clear_ball_staging, nudge_object, Hold, ObjectState, Tolerances, WorldState};
use crate::pamdp::{Arm, Skill};

pub(crate) fn apply(
    next: &mut WorldState,
    arm: Arm,
    skill: Skill,
    args: &[f64],
    tol: &Tolerances,
) {
    // The arm leaves whatever it was bracing or gripping at the tip.
    {
        let a = next.arm_mut(arm);
        a.support = false;
        a.engaged = false;
    }
    if next.arm(arm).hold.is_some() {
        // Fumble: the jaws reopen on a held object and lose it.
        next.arm_mut(arm).hold = None;
        let from = next.arm(arm).pos;
        nudge_object(next, from, tol);
        return;
    }
    match skill {
        Skill::TopGrasp => top_grasp(next, arm, args, tol),
        Skill::SideGrasp => side_grasp(next, arm, args, tol),
        _ => unreachable!("phase-2 only handles grasp skills"),
    }
}

fn top_grasp(next: &mut WorldState, arm: Arm, args: &[f64], tol: &Tolerances) {
    let offset = Vec2::new(args[0], args[1]);
    let yaw_cmd = args[2];
    match next.object {
        ObjectState::Bar {
            center,
            yaw,
            length,
            width,
            ..
        } => {
            // The perception system proposes one grasp site per gripper at
            // the bar quarter-points, assigned to minimize total travel so
            // the two arms never target the same site.
            let axis = Vec2::from_angle(yaw);
            let q_plus = center + axis * (length / 4.0);
            let q_minus = center - axis * (length / 4.0);
            let (hl, hr) = (tol.home(Arm::Left), tol.home(Arm::Right));
            let minus_to_left =
                q_minus.dist(hl) + q_plus.dist(hr) <= q_plus.dist(hl) + q_minus.dist(hr);
            let site = match (arm, minus_to_left) {
                (Arm::Left, true) | (Arm::Right, false) => q_minus,
                (Arm::Left, false) | (Arm::Right, true) => q_plus,
            };
            let target = site + offset * tol.grasp_gain;
            let rel = target - center;
            let along = rel.dot(axis);
            let across = rel.cross(axis);
            let perp = super::geom::wrap_pi(yaw + std::f64::consts::FRAC_PI_2);
            // The wrist command trims the proposed jaw alignment; inside
            // the basin the jaws seat exactly across the bar.
            let attempt = perp + tol.yaw_gain * super::geom::wrap_pi(yaw_cmd - std::f64::consts::PI);
            if across.abs() <= tol.capture_radius + width / 2.0
                && along.abs() <= length / 2.0
                && line_ang_dist(attempt, perp) <= tol.grasp_yaw_basin
            {
                // The jaws center on the bar and align with its cross-axis.
                let point = center + axis * along;
                let a = next.arm_mut(arm);
                a.hold = Some(Hold::Bar {
                    point,
                    lever: along,
                    yaw: perp,
                });
                a.pos = point;
                a.yaw = perp;
            }
        }
        ObjectState::Ball {
            center,
            radius,
            friction,
        } => {
            let target = center + offset * tol.grasp_gain;
            let held = Arm::BOTH
                .iter()
                .any(|&a| matches!(next.arm(a).hold, Some(Hold::Ball { .. })));
            if arm == Arm::Right {
                // Rigid jaws cannot pinch the slippery ball; a bare attempt
                // squirts it away.
                if !held && target.dist(center) <= radius + tol.engage_band {
                    let dir = target.dir_to(center);
                    if let ObjectState::Ball { center: c, .. } = &mut next.object {
                        *c = *c + dir * tol.roll_displace;
                    }
                    clear_ball_staging(next);
                }
                return;
            }
            // Slippier balls demand a tighter commanded pinch.
            let capture = tol.capture_radius + friction * radius;
            if target.dist(center) <= capture {
                let a = next.arm_mut(arm);
                a.hold = Some(Hold::Ball { point: center });
                a.pos = center;
            } else if !held && target.dist(center) <= radius + tol.engage_band {
                // Grazed the loose ball.
                let dir = target.dir_to(center);
                if let ObjectState::Ball { center: c, .. } = &mut next.object {
                    *c = *c + dir * tol.roll_displace;
                }
                clear_ball_staging(next);
            }
        }
        ObjectState::Bottle {
            center, cap_radius, ..
        } => {
            let other_on_cap =
                matches!(next.arm(arm.other()).hold, Some(Hold::Cap { .. }));
            if other_on_cap {
                // Jaw collision over the cap jostles the bottle.
                let from = next.arm(arm).pos;
                nudge_object(next, from, tol);
                return;
            }
            let target = center + offset * tol.grasp_gain;
            if target.dist(center) <= tol.capture_radius + cap_radius {
                let a = next.arm_mut(arm);
                a.hold = Some(Hold::Cap { point: center });
                a.pos = center;
            }
        }
        // Top grasp is not in the rotating vocabulary.
        ObjectState::Corkscrew { .. } => {}
    }
}

fn side_grasp(next: &mut WorldState, arm: Arm, args: &[f64], tol: &Tolerances) {
    let offset = Vec2::new(args[0], args[1]);
    let approach = args[2];
    let (center, base_radius) = match next.object {
        ObjectState::Bottle {
            center,
            base_radius,
            ..
        } => (center, base_radius),
        ObjectState::Corkscrew { center, .. } => (center, tol.corkscrew_base_radius),
        // Side grasp is not in the lifting/picking vocabularies.
        _ => return,
    };
    let other_on_base = matches!(next.arm(arm.other()).hold, Some(Hold::Base { .. }));
    if other_on_base {
        let from = next.arm(arm).pos;
        nudge_object(next, from, tol);
        return;
    }
    let target = center + offset * tol.grasp_gain;
    let bearing = super::side_grasp_bearing(center, arm, tol);
    if target.dist(center) <= tol.capture_radius + base_radius
        && super::geom::ang_dist(approach, bearing) <= tol.approach_angle_tol
    {
        // The grip seats on the near flank of the base.
        let point = center + Vec2::from_angle(bearing) * base_radius;
        let a = next.arm_mut(arm);
        a.hold = Some(Hold::Base { point });
        a.pos = point;
        a.yaw = approach;
    }
}
