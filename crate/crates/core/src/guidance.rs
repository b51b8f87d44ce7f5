//! Pure pursuit and constant-bearing guidance for a single pursuer.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::AgentState;

/// Line-of-sight lengths below this are treated as coincident.
pub const LOS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Law {
    #[serde(rename = "CB")]
    ConstantBearing,
    #[serde(rename = "PP")]
    PurePursuit,
    #[serde(rename = "CB_fallback_PP")]
    ConstantBearingFallback,
}

impl Law {
    pub fn as_str(self) -> &'static str {
        match self {
            Law::ConstantBearing => "CB",
            Law::PurePursuit => "PP",
            Law::ConstantBearingFallback => "CB_fallback_PP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceCommand {
    pub velocity: Vec2,
    pub law_used: Law,
}

/// Full speed along the line of sight.
pub fn pure_pursuit(pursuer: &AgentState, target_pos: Vec2) -> GuidanceCommand {
    let velocity = (target_pos - pursuer.position)
        .normalized(LOS_EPS)
        .map_or(Vec2::ZERO, |u| u * pursuer.max_speed);
    GuidanceCommand {
        velocity,
        law_used: Law::PurePursuit,
    }
}

/// Collision-course heading: match the target's velocity component across
/// the line of sight and spend the remaining speed closing along it.
/// Falls back to pure pursuit when no closing heading exists.
pub fn constant_bearing(
    pursuer: &AgentState,
    target_pos: Vec2,
    target_vel: Vec2,
) -> GuidanceCommand {
    let Some(los) = (target_pos - pursuer.position).normalized(LOS_EPS) else {
        return GuidanceCommand {
            velocity: Vec2::ZERO,
            law_used: Law::ConstantBearing,
        };
    };
    let across = los.perp();
    let target_across = target_vel.dot(across);
    let target_along = target_vel.dot(los);
    let speed = pursuer.max_speed;

    let fallback = || GuidanceCommand {
        law_used: Law::ConstantBearingFallback,
        ..pure_pursuit(pursuer, target_pos)
    };
    if target_across.abs() > speed {
        return fallback();
    }
    // Of the two headings cancelling the cross component, the forward one closes faster.
    let along = (speed * speed - target_across * target_across)
        .max(0.0)
        .sqrt();
    if along - target_along <= 0.0 {
        return fallback();
    }
    GuidanceCommand {
        velocity: los * along + across * target_across,
        law_used: Law::ConstantBearing,
    }
}

/// Earliest `t >= 0` with `|target + target_vel t - pursuer| = speed t`,
/// the apex of the collision triangle. `None` when the target cannot be reached.
pub fn intercept_time(
    pursuer_pos: Vec2,
    speed: f64,
    target_pos: Vec2,
    target_vel: Vec2,
) -> Option<f64> {
    let rel = target_pos - pursuer_pos;
    let c = rel.norm_sq();
    if c.sqrt() < LOS_EPS {
        return Some(0.0);
    }
    if speed <= 0.0 {
        return None;
    }
    if target_vel.norm() == 0.0 {
        return Some(c.sqrt() / speed);
    }
    let a = target_vel.norm_sq() - speed * speed;
    let b = 2.0 * rel.dot(target_vel);
    if a.abs() < 1e-12 {
        // Equal speeds: linear equation b t + c = 0.
        return (b < 0.0).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable roots of a t^2 + b t + c.
    let q = -0.5 * (b + b.signum() * sq);
    let roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .min_by(f64::total_cmp)
}
