//! Observation encodings.
//!
//! `LowDim` packs poses and geometry scalars into a fixed 19-vector scaled
//! to roughly [-1, 1]. `Raster` is a 4-channel 16x16 occupancy grid with no
//! explicit pose or geometry numbers, standing in for a camera view.

use super::geom::{segment_dist, wrap_pi, Vec2};
use super::{ObjectState, Tolerances, WorldState};
use crate::pamdp::{Arm, TaskFamily, HORIZON};

pub const LOW_DIM_LEN: usize = 19;
pub const RASTER_SIDE: usize = 16;
pub const RASTER_CHANNELS: usize = 4;
pub const RASTER_LEN: usize = RASTER_SIDE * RASTER_SIDE * RASTER_CHANNELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    LowDim,
    Raster,
}

#[allow(clippy::len_without_is_empty)]
impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::LowDim => "low-dim",
            Encoding::Raster => "raster",
        }
    }

    pub fn from_name(name: &str) -> Option<Encoding> {
        match name {
            "low-dim" => Some(Encoding::LowDim),
            "raster" => Some(Encoding::Raster),
            _ => None,
        }
    }

    pub fn len(self) -> usize {
        match self {
            Encoding::LowDim => LOW_DIM_LEN,
            Encoding::Raster => RASTER_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub encoding: Encoding,
    pub data: Vec<f64>,
}

fn unit_scale(v: f64, lo: f64, hi: f64) -> f64 {
    2.0 * (v - lo) / (hi - lo) - 1.0
}

pub fn observe(state: &WorldState, encoding: Encoding, tol: &Tolerances) -> Observation {
    let data = match encoding {
        Encoding::LowDim => low_dim(state),
        Encoding::Raster => raster(state, tol),
    };
    debug_assert_eq!(data.len(), encoding.len());
    Observation { encoding, data }
}

fn ee_block(out: &mut Vec<f64>, state: &WorldState, arm: Arm) {
    let a = state.arm(arm);
    out.push(unit_scale(a.pos.x, 0.0, 1.0));
    out.push(unit_scale(a.pos.y, 0.0, 1.0));
    out.push(unit_scale(a.z, 0.0, 0.8));
    out.push(wrap_pi(a.yaw) / std::f64::consts::PI);
}

fn low_dim(state: &WorldState) -> Vec<f64> {
    let mut out = Vec::with_capacity(LOW_DIM_LEN);
    ee_block(&mut out, state, Arm::Left);
    ee_block(&mut out, state, Arm::Right);
    out.push(unit_scale(state.timestep as f64, 0.0, HORIZON as f64));

    // Geometry scalars, zero-padded to three.
    match state.object {
        ObjectState::Bar { length, mass, .. } => {
            out.push(unit_scale(length, 0.4, 0.6));
            out.push(unit_scale(mass, 2.0, 6.0));
            out.push(0.0);
        }
        ObjectState::Ball {
            radius, friction, ..
        } => {
            out.push(unit_scale(radius, 0.05, 0.15));
            out.push(unit_scale(friction, 0.05, 0.3));
            out.push(0.0);
        }
        ObjectState::Bottle {
            base_radius,
            cap_radius,
            ..
        } => {
            out.push(unit_scale(base_radius, 0.04, 0.08));
            out.push(unit_scale(cap_radius, 0.02, 0.04));
            out.push(0.0);
        }
        ObjectState::Corkscrew { handle_len, .. } => {
            out.push(unit_scale(handle_len, 0.08, 0.15));
            out.push(0.0);
            out.push(0.0);
        }
    }

    // Object pose in the world frame.
    let center = state.object.center();
    let obj_yaw = match state.object {
        ObjectState::Bar { yaw, .. } => yaw,
        ObjectState::Ball { .. } => 0.0,
        ObjectState::Bottle { yaw_drift, .. } => yaw_drift,
        ObjectState::Corkscrew { handle_yaw, .. } => handle_yaw,
    };
    out.push(unit_scale(center.x, 0.0, 1.0));
    out.push(unit_scale(center.y, 0.0, 1.0));
    out.push(wrap_pi(obj_yaw) / std::f64::consts::PI);

    // Object position in each end effector's frame.
    for arm in Arm::BOTH {
        let a = state.arm(arm);
        let rel = (center - a.pos).rot(-a.yaw);
        out.push(rel.x / 1.42);
        out.push(rel.y / 1.42);
    }
    out
}

fn cell_center(gx: usize, gy: usize) -> Vec2 {
    Vec2::new(
        (gx as f64 + 0.5) / RASTER_SIDE as f64,
        (gy as f64 + 0.5) / RASTER_SIDE as f64,
    )
}

fn cell_of(p: Vec2) -> (usize, usize) {
    let gx = ((p.x * RASTER_SIDE as f64).floor() as isize).clamp(0, RASTER_SIDE as isize - 1);
    let gy = ((p.y * RASTER_SIDE as f64).floor() as isize).clamp(0, RASTER_SIDE as isize - 1);
    (gx as usize, gy as usize)
}

fn raster(state: &WorldState, tol: &Tolerances) -> Vec<f64> {
    let mut grid = vec![0.0; RASTER_LEN];
    let plane = RASTER_SIDE * RASTER_SIDE;
    let mut set = |ch: usize, gx: usize, gy: usize| {
        grid[ch * plane + gy * RASTER_SIDE + gx] = 1.0;
    };

    for gy in 0..RASTER_SIDE {
        for gx in 0..RASTER_SIDE {
            let p = cell_center(gx, gy);
            let (body, feature) = match state.object {
                ObjectState::Bar {
                    center,
                    yaw,
                    length,
                    width,
                    ..
                } => {
                    let axis = Vec2::from_angle(yaw);
                    let rel = p - center;
                    let along = rel.dot(axis);
                    let across = rel.cross(axis);
                    let body = along.abs() <= length / 2.0 && across.abs() <= width / 2.0;
                    let a = center - axis * (length / 2.0);
                    let b = center + axis * (length / 2.0);
                    (body, segment_dist(p, a, b) <= 0.025)
                }
                ObjectState::Ball { center, radius, .. } => {
                    (p.dist(center) <= radius, false)
                }
                ObjectState::Bottle {
                    center,
                    base_radius,
                    cap_radius,
                    ..
                } => (
                    p.dist(center) <= base_radius,
                    p.dist(center) <= cap_radius.max(0.035),
                ),
                ObjectState::Corkscrew {
                    center,
                    handle_len,
                    handle_yaw,
                    ..
                } => {
                    let tip = center + Vec2::from_angle(handle_yaw) * handle_len;
                    (
                        p.dist(center) <= tol.corkscrew_base_radius,
                        segment_dist(p, center, tip) <= 0.025,
                    )
                }
            };
            if body {
                set(0, gx, gy);
            }
            if feature {
                set(1, gx, gy);
            }
        }
    }

    // The ball's feature marker is its apex cell.
    if matches!(
        (state.family, &state.object),
        (TaskFamily::Picking, ObjectState::Ball { .. })
    ) {
        let (gx, gy) = cell_of(state.object.center());
        set(1, gx, gy);
    }

    let (lx, ly) = cell_of(state.left.pos);
    set(2, lx, ly);
    let (rx, ry) = cell_of(state.right.pos);
    set(3, rx, ry);
    grid
}
