//! Single-integrator kinematics for pursuers and one evader in a rectangular arena.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

/// Slack allowed on the speed limit after clamping.
pub const SPEED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("{got} pursuer velocities for {expected} pursuers")]
    LengthMismatch { got: usize, expected: usize },
    #[error("invalid world: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Pursuer(usize),
    Evader,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub max_speed: f64,
    pub role: Role,
    /// Accumulated `|v|^2 dt` (unit-mass kinetic proxy).
    pub energy: f64,
    /// Accumulated path length, logged alongside the energy proxy.
    pub distance: f64,
}

impl AgentState {
    pub fn new(role: Role, position: Vec2, max_speed: f64) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            max_speed,
            role,
            energy: 0.0,
            distance: 0.0,
        }
    }

    pub fn with_velocity(mut self, velocity: Vec2) -> Self {
        self.velocity = velocity;
        self
    }

    fn advance(&self, command: Vec2, arena: &Arena, dt: f64) -> AgentState {
        let mut v = command.clamp_norm(self.max_speed);
        let target = self.position + v * dt;
        let position = arena.clamp(target);
        // Zero the velocity component that pushed the agent through a wall.
        if target.x != position.x {
            v.x = 0.0;
        }
        if target.y != position.y {
            v.y = 0.0;
        }
        AgentState {
            position,
            velocity: v,
            max_speed: self.max_speed,
            role: self.role,
            energy: self.energy + v.norm_sq() * dt,
            distance: self.distance + self.position.distance(position),
        }
    }
}

/// The rectangle `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            width: 3.2,
            height: 2.0,
        }
    }
}

impl Arena {
    pub fn new(width: f64, height: f64) -> Result<Self, WorldError> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(WorldError::Invalid(format!("arena {width}x{height}")));
        }
        Ok(Self { width, height })
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width / 2.0, self.height / 2.0)
    }

    /// Distances to the walls `x = 0`, `x = width`, `y = 0`, `y = height`, in that order.
    pub fn wall_distances(&self, p: Vec2) -> [f64; 4] {
        [p.x, self.width - p.x, p.y, self.height - p.y]
    }

    /// Outward normals matching [`Arena::wall_distances`].
    pub const WALL_NORMALS: [Vec2; 4] = [
        Vec2::new(-1.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, -1.0),
        Vec2::new(0.0, 1.0),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureRule {
    /// Every pursuer within the capture distance.
    #[default]
    Max,
    /// Sum of pursuer distances within the capture distance.
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub pursuers: Vec<AgentState>,
    pub evader: AgentState,
    pub arena: Arena,
    pub dt: f64,
    steps: u64,
}

impl WorldState {
    pub fn new(
        pursuers: Vec<AgentState>,
        evader: AgentState,
        arena: Arena,
        dt: f64,
    ) -> Result<Self, WorldError> {
        if pursuers.is_empty() {
            return Err(WorldError::Invalid("no pursuers".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(WorldError::Invalid(format!("dt = {dt}")));
        }
        Ok(Self {
            pursuers,
            evader,
            arena,
            dt,
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Clamps each command to its agent's speed limit, integrates one `dt`,
    /// confines positions to the arena and accrues energy.
    pub fn step(
        &self,
        pursuer_velocities: &[Vec2],
        evader_velocity: Vec2,
    ) -> Result<WorldState, WorldError> {
        if pursuer_velocities.len() != self.pursuers.len() {
            return Err(WorldError::LengthMismatch {
                got: pursuer_velocities.len(),
                expected: self.pursuers.len(),
            });
        }
        let pursuers = self
            .pursuers
            .iter()
            .zip(pursuer_velocities)
            .map(|(p, &v)| p.advance(v, &self.arena, self.dt))
            .collect();
        Ok(WorldState {
            pursuers,
            evader: self.evader.advance(evader_velocity, &self.arena, self.dt),
            arena: self.arena,
            dt: self.dt,
            steps: self.steps + 1,
        })
    }

    pub fn pursuer_distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.pursuers
            .iter()
            .map(|p| p.position.distance(self.evader.position))
    }

    pub fn pursuer_centroid(&self) -> Vec2 {
        let sum = self
            .pursuers
            .iter()
            .fold(Vec2::ZERO, |acc, p| acc + p.position);
        sum / self.pursuers.len() as f64
    }
}

pub fn capture_check(world: &WorldState, d_capture: f64, rule: CaptureRule) -> bool {
    match rule {
        CaptureRule::Max => world.pursuer_distances().fold(0.0, f64::max) <= d_capture,
        CaptureRule::Sum => world.pursuer_distances().sum::<f64>() <= d_capture,
    }
}

pub fn average_energy(world: &WorldState) -> f64 {
    world.pursuers.iter().map(|p| p.energy).sum::<f64>() / world.pursuers.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_on_one(p: Vec2, e: Vec2, max_speed: f64, dt: f64) -> WorldState {
        WorldState::new(
            vec![AgentState::new(Role::Pursuer(0), p, max_speed)],
            AgentState::new(Role::Evader, e, 1.0),
            Arena::default(),
            dt,
        )
        .unwrap()
    }

    #[test]
    fn step_clamps_speed_then_integrates() {
        let w = one_on_one(Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), 1.0, 0.1);
        let next = w.step(&[Vec2::new(2.0, 0.0)], Vec2::ZERO).unwrap();
        let p = &next.pursuers[0];
        assert!((p.position.x - 0.1).abs() < 1e-15);
        assert_eq!(p.position.y, 0.0);
        assert!((p.energy - 0.1).abs() < 1e-15);
        assert!((next.time() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn step_stops_at_wall() {
        let w = one_on_one(Vec2::new(3.19, 1.0), Vec2::new(1.0, 1.0), 1.0, 0.1);
        let next = w.step(&[Vec2::new(1.0, 0.0)], Vec2::ZERO).unwrap();
        assert_eq!(next.pursuers[0].position, Vec2::new(3.2, 1.0));
        assert_eq!(next.pursuers[0].velocity.x, 0.0);
    }

    #[test]
    fn zero_command_is_identity() {
        let w = one_on_one(Vec2::new(1.0, 1.0), Vec2::new(2.0, 1.0), 1.0, 0.1);
        let next = w.step(&[Vec2::ZERO], Vec2::ZERO).unwrap();
        assert_eq!(next.pursuers[0].position, w.pursuers[0].position);
        assert_eq!(next.pursuers[0].energy, 0.0);
    }

    #[test]
    fn step_length_mismatch() {
        let w = one_on_one(Vec2::ZERO, Vec2::new(1.0, 1.0), 1.0, 0.1);
        assert_eq!(
            w.step(&[], Vec2::ZERO),
            Err(WorldError::LengthMismatch {
                got: 0,
                expected: 1
            })
        );
    }

    fn at_distances(ds: &[f64]) -> WorldState {
        let pursuers = ds
            .iter()
            .enumerate()
            .map(|(i, &d)| AgentState::new(Role::Pursuer(i), Vec2::new(1.0 + d, 1.0), 1.0))
            .collect();
        WorldState::new(
            pursuers,
            AgentState::new(Role::Evader, Vec2::new(1.0, 1.0), 1.0),
            Arena::default(),
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn capture_examples() {
        let w = one_on_one(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.05), 1.0, 0.1);
        assert!(capture_check(&w, 0.1, CaptureRule::Max));
        let three = at_distances(&[0.05, 0.05, 0.2]);
        assert!(!capture_check(&three, 0.1, CaptureRule::Max));
        assert!(capture_check(&three, 0.35, CaptureRule::Sum));
    }

    #[test]
    fn average_energy_examples() {
        let mut w = at_distances(&[0.5, 0.6]);
        assert_eq!(average_energy(&w), 0.0);
        w.pursuers[0].energy = 2.0;
        w.pursuers[1].energy = 4.0;
        assert_eq!(average_energy(&w), 3.0);

        let mut single = one_on_one(Vec2::new(0.5, 0.5), Vec2::new(2.5, 1.5), 0.2, 0.01);
        for _ in 0..100 {
            single = single.step(&[Vec2::new(0.2, 0.0)], Vec2::ZERO).unwrap();
        }
        // v^2 T = 0.04 * 1.0
        assert!((average_energy(&single) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn invalid_worlds() {
        assert!(Arena::new(0.0, 1.0).is_err());
        let e = AgentState::new(Role::Evader, Vec2::ZERO, 1.0);
        assert!(WorldState::new(vec![], e.clone(), Arena::default(), 0.1).is_err());
        let p = AgentState::new(Role::Pursuer(0), Vec2::ZERO, 1.0);
        assert!(WorldState::new(vec![p], e, Arena::default(), 0.0).is_err());
    }
}
