//! Scripted evader: infiltrate toward a goal or flee the pursuer centroid,
//! with Poisson-timed random heading and speed changes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::{Arena, WorldState};

/// Within this distance of a wall the escape heading slides along it.
pub const WALL_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaderMode {
    Infiltrate,
    Escape,
    /// Escape while any pursuer is closer than `switch_distance`, infiltrate otherwise.
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaderConfig {
    pub mode: EvaderMode,
    pub goal_point: Vec2,
    /// Random events per second.
    pub perturb_rate: f64,
    /// Half-width of the uniform heading offset, rad.
    pub direction_jitter: f64,
    pub speed_scale_range: (f64, f64),
    /// Mixed into the trial seed for the evader's own generator.
    pub seed: u64,
    /// m, used by [`EvaderMode::Alternating`].
    pub switch_distance: f64,
}

impl Default for EvaderConfig {
    fn default() -> Self {
        Self {
            mode: EvaderMode::Escape,
            goal_point: Vec2::new(0.2, 1.0),
            perturb_rate: 0.5,
            direction_jitter: 0.6,
            speed_scale_range: (0.5, 1.0),
            seed: 0,
            switch_distance: 0.5,
        }
    }
}

impl EvaderConfig {
    pub fn validate(&self, arena: &Arena) -> Result<(), String> {
        if !(self.perturb_rate >= 0.0 && self.perturb_rate.is_finite()) {
            return Err("perturb_rate must be >= 0".into());
        }
        if !(self.direction_jitter >= 0.0 && self.direction_jitter.is_finite()) {
            return Err("direction_jitter must be >= 0".into());
        }
        let (lo, hi) = self.speed_scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err("speed_scale_range must satisfy 0 < min <= max".into());
        }
        if !arena.contains(self.goal_point) {
            return Err("goal_point lies outside the arena".into());
        }
        if !(self.switch_distance >= 0.0) {
            return Err("switch_distance must be >= 0".into());
        }
        Ok(())
    }
}

/// Generator plus the persistent effect of the last random events.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaderState {
    rng: ChaCha8Rng,
    pub heading_offset: f64,
    pub speed_scale: f64,
    pub events: u64,
}

impl EvaderState {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            heading_offset: 0.0,
            speed_scale: 1.0,
            events: 0,
        }
    }

    fn perturb(&mut self, config: &EvaderConfig, dt: f64) {
        let fire_prob = 1.0 - (-config.perturb_rate * dt).exp();
        let roll: f64 = self.rng.random();
        if roll >= fire_prob {
            return;
        }
        self.events += 1;
        if self.rng.random_bool(0.5) {
            let j = config.direction_jitter;
            self.heading_offset = self.rng.random_range(-j..=j);
        } else {
            let (lo, hi) = config.speed_scale_range;
            self.speed_scale = self.rng.random_range(lo..=hi);
        }
    }
}

/// Removes heading components pointing into walls closer than [`WALL_MARGIN`].
fn deflect(dir: Vec2, position: Vec2, arena: &Arena) -> Vec2 {
    let mut d = dir;
    for (dist, normal) in arena
        .wall_distances(position)
        .into_iter()
        .zip(Arena::WALL_NORMALS)
    {
        if dist < WALL_MARGIN {
            let into = d.dot(normal);
            if into > 0.0 {
                d = d - normal * into;
            }
        }
    }
    d
}

fn flee_direction(world: &WorldState) -> Vec2 {
    let away = world.evader.position - world.pursuer_centroid();
    away.normalized(1e-12)
        .or_else(|| world.evader.velocity.normalized(1e-12))
        .unwrap_or(Vec2::new(1.0, 0.0))
}

/// Mode in effect for this step.
pub fn active_mode(world: &WorldState, config: &EvaderConfig) -> EvaderMode {
    match config.mode {
        EvaderMode::Alternating => {
            let nearest = world.pursuer_distances().fold(f64::INFINITY, f64::min);
            if nearest < config.switch_distance {
                EvaderMode::Escape
            } else {
                EvaderMode::Infiltrate
            }
        }
        m => m,
    }
}

/// One control step of the evader. Draws from and advances `state`.
pub fn evader_velocity(
    world: &WorldState,
    config: &EvaderConfig,
    mut state: EvaderState,
) -> (Vec2, EvaderState) {
    state.perturb(config, world.dt);
    let evader = &world.evader;
    let base = match active_mode(world, config) {
        EvaderMode::Infiltrate => (config.goal_point - evader.position).normalized(1e-9),
        _ => Some(flee_direction(world)),
    };
    let Some(base) = base else {
        return (Vec2::ZERO, state);
    };
    let heading = deflect(
        base.rotate(state.heading_offset),
        evader.position,
        &world.arena,
    );
    let speed = evader.max_speed * state.speed_scale.min(1.0);
    let velocity = heading
        .normalized(1e-9)
        .map_or(Vec2::ZERO, |u| (u * speed).clamp_norm(evader.max_speed));
    (velocity, state)
}

/// Owns the evader configuration and its generator for one trial.
#[derive(Debug, Clone)]
pub struct EvaderController {
    pub config: EvaderConfig,
    state: Option<EvaderState>,
}

impl EvaderController {
    pub fn new(config: EvaderConfig, trial_seed: u64) -> Self {
        let state = EvaderState::new(trial_seed ^ config.seed);
        Self {
            config,
            state: Some(state),
        }
    }

    pub fn velocity(&mut self, world: &WorldState) -> Vec2 {
        let state = self.state.take().expect("state restored after every step");
        let (v, next) = evader_velocity(world, &self.config, state);
        self.state = Some(next);
        v
    }

    pub fn state(&self) -> &EvaderState {
        self.state
            .as_ref()
            .expect("state restored after every step")
    }
}
