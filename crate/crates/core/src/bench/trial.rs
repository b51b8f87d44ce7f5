use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, Strategy};
use super::BenchError;
use crate::evader::EvaderController;
use crate::formation::{assign_slots, formation_targets, shrink_radius, Formation};
use crate::geom::Vec2;
use crate::guidance::{constant_bearing, pure_pursuit, GuidanceCommand};
use crate::gut::{build_pursuit_gut, Decision, DecisionLoop, Tactic};
use crate::world::{capture_check, AgentState, Role, WorldState};

/// Finalizer of the splitmix64 generator.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`. Independent of strategy so every strategy faces
/// the same evader randomness for a given index.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    base_seed ^ splitmix64(index as u64)
}

const EVADER_STREAM: u64 = 0x45_5641_4445_52;
const GUT_STREAM: u64 = 0x47_5554;

/// One GUT decision, compact enough to keep for every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub time: f64,
    pub formation: Formation,
    pub tactic: Tactic,
    pub level1_pair: (usize, usize),
    pub level2_pair: (usize, usize),
    pub level1_gap: f64,
    pub level2_gap: f64,
    pub level1_payoff_a: [f64; 4],
    pub level2_payoff_a: [f64; 4],
}

impl DecisionRecord {
    fn from_decision(d: &Decision) -> Self {
        let payoff = |k: usize| {
            let g = &d.levels[k].game;
            [g.a(0, 0), g.a(0, 1), g.a(1, 0), g.a(1, 1)]
        };
        Self {
            time: d.epoch_time,
            formation: d.formation,
            tactic: d.tactic,
            level1_pair: d.levels[0].pair,
            level2_pair: d.levels[1].pair,
            level1_gap: d.levels[0].gap,
            level2_gap: d.levels[1].gap,
            level1_payoff_a: payoff(0),
            level2_payoff_a: payoff(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub time: f64,
    /// `P<i>` for pursuers, `E` for the evader.
    pub agent: String,
    pub position: Vec2,
    pub velocity: Vec2,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub pursuers: usize,
    pub speed_ratio: f64,
    pub captured: bool,
    /// Capture time, or `max_time` for a timeout.
    pub capture_time: f64,
    pub avg_energy: f64,
    pub per_pursuer_energy: Vec<f64>,
    pub per_pursuer_distance: Vec<f64>,
    pub steps: u64,
    /// GUT only.
    pub decision_log: Vec<DecisionRecord>,
    pub final_world: WorldState,
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOptions {
    pub record_trajectory: bool,
    pub record_decisions: bool,
}

/// Starting world: pursuers lined up at x = 0.2 on the left edge, evader at
/// the arena center with a random heading.
pub fn initial_world(config: &ScenarioConfig, seed: u64) -> Result<WorldState, BenchError> {
    let v_p = config.pursuer_speed();
    let v_e = config.evader_speed;
    let n = config.pursuer_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_heading: f64 = rng.random_range(0.0..TAU);
    let (pursuer_pos, evader_pos, heading) = match &config.placement {
        Some(pl) => (
            pl.pursuers.clone(),
            pl.evader,
            pl.evader_heading.unwrap_or(random_heading),
        ),
        None => {
            let h = config.arena.height;
            let ps = (0..n)
                .map(|i| Vec2::new(0.2, h * (i + 1) as f64 / (n + 1) as f64))
                .collect();
            (ps, config.arena.center(), random_heading)
        }
    };
    let pursuers = pursuer_pos
        .into_iter()
        .enumerate()
        .map(|(i, p)| AgentState::new(Role::Pursuer(i), p, v_p))
        .collect();
    let evader = AgentState::new(Role::Evader, evader_pos, v_e)
        .with_velocity(Vec2::from_angle(heading) * v_e);
    WorldState::new(pursuers, evader, config.arena, config.dt)
        .map_err(|e| BenchError::Config(e.to_string()))
}

fn guide(tactic: Tactic, pursuer: &AgentState, target: Vec2, target_vel: Vec2) -> GuidanceCommand {
    match tactic {
        Tactic::ConstantBearing => constant_bearing(pursuer, target, target_vel),
        Tactic::PurePursuit => pure_pursuit(pursuer, target),
    }
}

/// Pursuer team policy for one strategy.
enum Team {
    Fixed(Tactic),
    Gut(Box<DecisionLoop>),
}

impl Team {
    fn new(config: &ScenarioConfig, seed: u64) -> Result<Self, BenchError> {
        Ok(match config.strategy {
            Strategy::Cb => Team::Fixed(Tactic::ConstantBearing),
            Strategy::Pp => Team::Fixed(Tactic::PurePursuit),
            Strategy::Gut => {
                let tree = build_pursuit_gut(&config.gut)
                    .map_err(|e| BenchError::Config(e.to_string()))?;
                let dl = DecisionLoop::new(
                    tree,
                    config.utility_params(),
                    config.replan,
                    config.capture_rule,
                )
                .with_rng(config.gut.selection, splitmix64(seed ^ GUT_STREAM));
                Team::Gut(Box::new(dl))
            }
        })
    }

    fn commands(
        &mut self,
        world: &WorldState,
        radius: f64,
    ) -> Result<(Vec<Vec2>, Option<Decision>), BenchError> {
        let evader = &world.evader;
        match self {
            Team::Fixed(tactic) => {
                let v = world
                    .pursuers
                    .iter()
                    .map(|p| guide(*tactic, p, evader.position, evader.velocity).velocity)
                    .collect();
                Ok((v, None))
            }
            Team::Gut(dl) => {
                let Some(decision) = dl.next_decision(world, radius)? else {
                    return Ok((vec![Vec2::ZERO; world.pursuers.len()], None));
                };
                let n = world.pursuers.len();
                let slots = formation_targets(decision.formation, evader, n, radius, &world.arena);
                let perm = assign_slots(&world.pursuers, &slots)
                    .map_err(|e| BenchError::Config(e.to_string()))?;
                let v = world
                    .pursuers
                    .iter()
                    .zip(&perm)
                    .map(|(p, &k)| {
                        let slot = slots.points[k];
                        let cmd = guide(decision.tactic, p, slot, evader.velocity).velocity;
                        if n == 1 {
                            cmd
                        } else {
                            // Stop on the slot rather than overshoot it.
                            cmd.clamp_norm(p.position.distance(slot) / world.dt)
                        }
                    })
                    .collect();
                Ok((v, Some(decision)))
            }
        }
    }
}

fn snapshot(world: &WorldState, out: &mut Vec<TrajectoryRow>) {
    let t = world.time();
    for (i, p) in world.pursuers.iter().enumerate() {
        out.push(TrajectoryRow {
            time: t,
            agent: format!("P{i}"),
            position: p.position,
            velocity: p.velocity,
            energy: p.energy,
        });
    }
    let e = &world.evader;
    out.push(TrajectoryRow {
        time: t,
        agent: "E".into(),
        position: e.position,
        velocity: e.velocity,
        energy: e.energy,
    });
}

/// Runs trial `index` of a scenario with its derived seed.
pub fn run_trial(
    config: &ScenarioConfig,
    index: usize,
    options: TrialOptions,
) -> Result<TrialResult, BenchError> {
    run_trial_seeded(config, index, trial_seed(config.base_seed, index), options)
}

pub fn run_trial_seeded(
    config: &ScenarioConfig,
    index: usize,
    seed: u64,
    options: TrialOptions,
) -> Result<TrialResult, BenchError> {
    config.validate()?;
    let mut world = initial_world(config, seed)?;
    let params = config.utility_params();
    let mut evader = EvaderController::new(config.evader.clone(), splitmix64(seed ^ EVADER_STREAM));
    let mut team = Team::new(config, seed)?;
    let mut radius = params.formation_radius_init;
    let max_steps = (config.max_time / config.dt + 1e-9).floor() as u64;
    let mut decision_log = Vec::new();
    let mut trajectory = options.record_trajectory.then(Vec::new);
    if let Some(rows) = trajectory.as_mut() {
        snapshot(&world, rows);
    }

    let mut captured = false;
    loop {
        if capture_check(&world, config.d_capture, config.capture_rule) {
            captured = true;
            break;
        }
        if world.steps() >= max_steps {
            break;
        }
        let ev = evader.velocity(&world);
        let (cmds, decision) = team.commands(&world, radius)?;
        if let (true, Some(d)) = (options.record_decisions, &decision) {
            decision_log.push(DecisionRecord::from_decision(d));
        }
        world = world
            .step(&cmds, ev)
            .map_err(|e| BenchError::Config(e.to_string()))?;
        radius = shrink_radius(radius, &params, config.dt);
        if let Some(rows) = trajectory.as_mut() {
            snapshot(&world, rows);
        }
    }

    let capture_time = if captured {
        world.time()
    } else {
        config.max_time
    };
    Ok(TrialResult {
        trial_index: index,
        seed,
        strategy: config.strategy,
        pursuers: config.pursuer_count,
        speed_ratio: config.speed_ratio,
        captured,
        capture_time,
        avg_energy: crate::world::average_energy(&world),
        per_pursuer_energy: world.pursuers.iter().map(|p| p.energy).collect(),
        per_pursuer_distance: world.pursuers.iter().map(|p| p.distance).collect(),
        steps: world.steps(),
        decision_log,
        final_world: world,
        trajectory,
    })
}
