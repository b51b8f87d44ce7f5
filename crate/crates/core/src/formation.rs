//! Circle and semicircle slot generation around the evader, slot
//! assignment, and the shrinking-radius schedule.

use std::f64::consts::{PI, TAU};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::payoff::UtilityParams;
use crate::world::{AgentState, Arena};

/// Largest team size assigned by exhaustive permutation search.
pub const EXACT_ASSIGNMENT_MAX: usize = 6;
/// Minimum separation kept between distinct slots after arena clamping.
pub const SLOT_SEPARATION: f64 = 1e-6;
/// Distance to the walls, in radii, beyond which the evader counts as central.
const CENTRAL_MARGIN_RADII: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormationError {
    #[error("{pursuers} pursuers for {slots} slots")]
    CountMismatch { pursuers: usize, slots: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formation {
    Circle,
    Semicircle,
}

impl Formation {
    pub const ALL: [Formation; 2] = [Formation::Circle, Formation::Semicircle];

    pub fn label(self) -> &'static str {
        match self {
            Formation::Circle => "Circle",
            Formation::Semicircle => "Semicircle",
        }
    }
}

impl fmt::Display for Formation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSet {
    pub points: Vec<Vec2>,
    pub shape: Formation,
    pub radius: f64,
    pub center: Vec2,
}

fn heading(evader: &AgentState) -> f64 {
    evader.velocity.normalized(1e-12).map_or(0.0, Vec2::angle)
}

fn place(
    center: Vec2,
    radius: f64,
    angles: impl Iterator<Item = f64>,
    arena: Option<&Arena>,
) -> Vec<Vec2> {
    let mut points: Vec<Vec2> = angles
        .map(|a| {
            let p = center + Vec2::from_angle(a) * radius;
            arena.map_or(p, |ar| ar.clamp(p))
        })
        .collect();
    if let Some(ar) = arena {
        separate(&mut points, ar);
    }
    points
}

/// Nudges slots that clamping merged onto the same wall point.
fn separate(points: &mut [Vec2], arena: &Arena) {
    for k in 1..points.len() {
        let mut step = 1;
        while points[..k]
            .iter()
            .any(|q| q.distance(points[k]) < SLOT_SEPARATION)
        {
            let offset = 2.0 * SLOT_SEPARATION * step as f64;
            let p = points[k];
            let candidates = [
                Vec2::new(p.x - offset, p.y),
                Vec2::new(p.x + offset, p.y),
                Vec2::new(p.x, p.y - offset),
                Vec2::new(p.x, p.y + offset),
            ];
            if let Some(c) = candidates.into_iter().find(|c| {
                arena.contains(*c)
                    && points[..k]
                        .iter()
                        .all(|q| q.distance(*c) >= SLOT_SEPARATION)
            }) {
                points[k] = c;
            }
            step += 1;
        }
    }
}

/// `n` slots evenly spaced on a full circle, the first one along the evader's heading.
pub fn circle_slots(evader: &AgentState, n: usize, radius: f64, arena: Option<&Arena>) -> SlotSet {
    let start = heading(evader);
    let center = evader.position;
    let angles = (0..n).map(|k| start + TAU * k as f64 / n as f64);
    SlotSet {
        points: place(center, radius, angles, arena),
        shape: Formation::Circle,
        radius,
        center,
    }
}

/// Direction from the evader to the middle of the semicircle arc.
fn arc_direction(evader: &AgentState, radius: f64, arena: Option<&Arena>) -> f64 {
    if let Some(ar) = arena {
        let dists = ar.wall_distances(evader.position);
        if dists.iter().any(|&d| d <= CENTRAL_MARGIN_RADII * radius) {
            let (nearest, _) = dists
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("four walls");
            // Open side toward the wall, so the arc sits on the inward side.
            return (-Arena::WALL_NORMALS[nearest]).angle();
        }
    }
    // Open side ahead: the arc trails the evader.
    heading(evader) + PI
}

/// `n` slots evenly spaced (endpoints included) on a half circle whose open
/// side faces the nearest wall, or the evader's heading when it is central.
pub fn semicircle_slots(
    evader: &AgentState,
    n: usize,
    radius: f64,
    arena: Option<&Arena>,
) -> SlotSet {
    let mid = arc_direction(evader, radius, arena);
    let center = evader.position;
    let angles = (0..n).map(move |k| {
        if n == 1 {
            mid
        } else {
            mid - PI / 2.0 + PI * k as f64 / (n - 1) as f64
        }
    });
    SlotSet {
        points: place(center, radius, angles, arena),
        shape: Formation::Semicircle,
        radius,
        center,
    }
}

/// Slot targets used by the pursuer team. A lone pursuer aims at the evader itself.
pub fn formation_targets(
    shape: Formation,
    evader: &AgentState,
    n: usize,
    radius: f64,
    arena: &Arena,
) -> SlotSet {
    if n == 1 {
        return SlotSet {
            points: vec![evader.position],
            shape,
            radius: 0.0,
            center: evader.position,
        };
    }
    match shape {
        Formation::Circle => circle_slots(evader, n, radius, Some(arena)),
        Formation::Semicircle => semicircle_slots(evader, n, radius, Some(arena)),
    }
}

fn total_distance(pursuers: &[AgentState], slots: &[Vec2], perm: &[usize]) -> f64 {
    pursuers
        .iter()
        .zip(perm)
        .map(|(p, &s)| p.position.distance(slots[s]))
        .sum()
}

/// `perm[i]` is the slot index given to pursuer `i`. Minimum total distance
/// by exhaustive search up to [`EXACT_ASSIGNMENT_MAX`] pursuers, nearest
/// available slot in pursuer order beyond that.
pub fn assign_slots(
    pursuers: &[AgentState],
    slots: &SlotSet,
) -> Result<Vec<usize>, FormationError> {
    let n = pursuers.len();
    if n != slots.points.len() {
        return Err(FormationError::CountMismatch {
            pursuers: n,
            slots: slots.points.len(),
        });
    }
    if n <= EXACT_ASSIGNMENT_MAX {
        Ok(exact_assignment(pursuers, &slots.points))
    } else {
        Ok(greedy_assignment(pursuers, &slots.points))
    }
}

pub fn exact_assignment(pursuers: &[AgentState], slots: &[Vec2]) -> Vec<usize> {
    let mut best: Vec<usize> = (0..pursuers.len()).collect();
    let mut best_cost = total_distance(pursuers, slots, &best);
    // Lexicographic permutation order, so ties keep the earliest.
    for perm in (0..pursuers.len()).permutations(pursuers.len()) {
        let cost = total_distance(pursuers, slots, &perm);
        if cost < best_cost {
            best_cost = cost;
            best = perm;
        }
    }
    best
}

pub fn greedy_assignment(pursuers: &[AgentState], slots: &[Vec2]) -> Vec<usize> {
    let mut taken = vec![false; slots.len()];
    pursuers
        .iter()
        .map(|p| {
            let (s, _) = slots
                .iter()
                .enumerate()
                .filter(|(s, _)| !taken[*s])
                .map(|(s, q)| (s, p.position.distance(*q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("slot count matches pursuer count");
            taken[s] = true;
            s
        })
        .collect()
}

pub fn assignment_cost(pursuers: &[AgentState], slots: &SlotSet, perm: &[usize]) -> f64 {
    total_distance(pursuers, &slots.points, perm)
}

/// Exponential contraction floored just below the capture distance.
pub fn shrink_radius(current: f64, params: &UtilityParams, dt: f64) -> f64 {
    let floor = params.d_capture * 0.9;
    (current * params.radius_shrink.powf(dt)).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Role;

    fn evader_at(x: f64, y: f64, v: Vec2) -> AgentState {
        AgentState::new(Role::Evader, Vec2::new(x, y), 1.0).with_velocity(v)
    }

    fn pursuer(i: usize, x: f64, y: f64) -> AgentState {
        AgentState::new(Role::Pursuer(i), Vec2::new(x, y), 1.0)
    }

    fn assert_close(a: Vec2, b: Vec2) {
        assert!((a - b).norm() < 1e-12, "{a:?} != {b:?}");
    }

    #[test]
    fn circle_four_slots() {
        let s = circle_slots(&evader_at(0.0, 0.0, Vec2::ZERO), 4, 1.0, None);
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, e) in s.points.iter().zip(expected) {
            assert_close(*p, e.into());
        }
    }

    #[test]
    fn circle_single_slot_along_heading() {
        let s = circle_slots(&evader_at(1.0, 1.0, Vec2::new(0.0, 0.3)), 1, 0.5, None);
        assert_close(s.points[0], Vec2::new(1.0, 1.5));
    }

    #[test]
    fn circle_clamped_into_arena() {
        let arena = Arena::default();
        let s = circle_slots(&evader_at(3.1, 1.0, Vec2::ZERO), 4, 0.5, Some(&arena));
        assert!(s.points.iter().all(|p| arena.contains(*p)));
        assert_eq!(s.points[0].x, 3.2);
    }

    #[test]
    fn semicircle_trails_central_evader() {
        // Arc centered at pi (behind), endpoints at pi/2 and 3pi/2.
        let arena = Arena::new(10.0, 10.0).unwrap();
        let e = evader_at(5.0, 5.0, Vec2::new(1.0, 0.0));
        let s = semicircle_slots(&e, 3, 1.0, Some(&arena));
        for (p, a) in s.points.iter().zip([PI / 2.0, PI, 3.0 * PI / 2.0]) {
            assert_close(*p, e.position + Vec2::from_angle(a));
        }
        let single = semicircle_slots(&e, 1, 1.0, Some(&arena));
        assert_close(single.points[0], Vec2::new(4.0, 5.0));
    }

    #[test]
    fn semicircle_open_toward_nearest_wall() {
        let arena = Arena::default();
        let e = evader_at(0.1, 1.0, Vec2::new(0.0, 1.0));
        let s = semicircle_slots(&e, 1, 0.3, Some(&arena));
        // The arc midpoint lies away from x = 0.
        assert_close(s.points[0], Vec2::new(0.4, 1.0));
        let s = semicircle_slots(&e, 3, 0.3, Some(&arena));
        assert!(s.points.iter().all(|p| p.x >= e.position.x - 1e-12));
    }

    #[test]
    fn clamped_corner_slots_stay_distinct() {
        let arena = Arena::default();
        let e = evader_at(3.2, 2.0, Vec2::ZERO);
        let s = circle_slots(&e, 5, 0.8, Some(&arena));
        for (i, a) in s.points.iter().enumerate() {
            assert!(arena.contains(*a));
            for b in &s.points[i + 1..] {
                assert!(a.distance(*b) >= SLOT_SEPARATION);
            }
        }
    }

    #[test]
    fn lone_pursuer_targets_evader() {
        let e = evader_at(1.0, 1.0, Vec2::new(0.1, 0.0));
        let s = formation_targets(Formation::Semicircle, &e, 1, 0.5, &Arena::default());
        assert_eq!(s.points, vec![e.position]);
    }

    fn slot_set(points: Vec<Vec2>) -> SlotSet {
        SlotSet {
            points,
            shape: Formation::Circle,
            radius: 1.0,
            center: Vec2::ZERO,
        }
    }

    #[test]
    fn assignment_examples() {
        let slots = slot_set(vec![Vec2::new(1.1, 0.0), Vec2::new(-1.1, 0.0)]);
        let ps = [pursuer(0, 1.0, 0.0), pursuer(1, -1.0, 0.0)];
        let perm = assign_slots(&ps, &slots).unwrap();
        assert_eq!(perm, vec![0, 1]);
        let swapped = [pursuer(0, -1.0, 0.0), pursuer(1, 1.0, 0.0)];
        let perm2 = assign_slots(&swapped, &slots).unwrap();
        assert_eq!(perm2, vec![1, 0]);
        assert!(
            (assignment_cost(&ps, &slots, &perm) - assignment_cost(&swapped, &slots, &perm2)).abs()
                < 1e-15
        );
        assert_eq!(
            assign_slots(&ps[..1], &slots),
            Err(FormationError::CountMismatch {
                pursuers: 1,
                slots: 2
            })
        );
    }

    #[test]
    fn shrink_radius_examples() {
        let mut params = UtilityParams::default();
        params.radius_shrink = 1.0;
        assert_eq!(shrink_radius(0.7, &params, 0.033), 0.7);
        params.radius_shrink = 0.5;
        let floor = params.d_capture * 0.9;
        assert_eq!(shrink_radius(floor, &params, 0.033), floor);
        assert!((shrink_radius(1.0, &params, 1.0) - 0.5).abs() < 1e-15);
    }
}
