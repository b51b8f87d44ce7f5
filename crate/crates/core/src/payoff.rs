//! Level payoff matrices built from energy and distance utility expectations.
//!
//! Every entry is a coefficient times a distance: the level-one coefficient
//! models the evader's Infiltrate/Escape choice and scales the pursuers'
//! travel to their formation slots, the level-two coefficient models the
//! evader's direction/speed changes and scales the distance each guidance law
//! needs to reach its targets. Payoffs are negated weighted costs, so the
//! pursuer side prefers the cheaper row.
//!
//! The coefficient means below are configuration defaults, not measured
//! values.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::formation::{assign_slots, assignment_cost, formation_targets, Formation, SlotSet};
use crate::guidance::intercept_time;
use crate::matgame::BimatrixGame;
use crate::world::WorldState;

pub const LEVEL1_ROWS: [&str; 2] = ["Circle", "Semicircle"];
pub const LEVEL1_COLS: [&str; 2] = ["Infiltrate", "Escape"];
pub const LEVEL2_ROWS: [&str; 2] = ["CB", "PP"];
pub const LEVEL2_COLS: [&str; 2] = ["ΔDirection", "ΔSpeed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    /// Distribution means: payoffs are a deterministic function of the world.
    #[default]
    Mean,
    /// One draw per payoff construction from each normal, clamped at zero.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilityParams {
    pub alpha_inf_mean: f64,
    pub alpha_inf_std: f64,
    pub alpha_esc_mean: f64,
    pub alpha_esc_std: f64,
    pub beta_dir_mean: f64,
    pub beta_dir_std: f64,
    pub beta_spd_mean: f64,
    pub beta_spd_std: f64,
    pub w_energy: f64,
    pub w_distance: f64,
    /// m
    pub formation_radius_init: f64,
    /// Per-second contraction factor in (0, 1].
    pub radius_shrink: f64,
    /// m
    pub d_capture: f64,
    pub zero_sum: bool,
    pub coefficient_mode: CoefficientMode,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self {
            alpha_inf_mean: 1.2,
            alpha_inf_std: 0.1,
            alpha_esc_mean: 0.8,
            alpha_esc_std: 0.1,
            beta_dir_mean: 1.1,
            beta_dir_std: 0.1,
            beta_spd_mean: 0.9,
            beta_spd_std: 0.1,
            w_energy: 1.0,
            w_distance: 1.0,
            formation_radius_init: 0.6,
            radius_shrink: 0.93,
            d_capture: 0.15,
            zero_sum: true,
            coefficient_mode: CoefficientMode::Mean,
        }
    }
}

impl UtilityParams {
    pub fn validate(&self) -> Result<(), String> {
        let stds = [
            self.alpha_inf_std,
            self.alpha_esc_std,
            self.beta_dir_std,
            self.beta_spd_std,
        ];
        if stds.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err("coefficient standard deviations must be finite and >= 0".into());
        }
        let means = [
            self.alpha_inf_mean,
            self.alpha_esc_mean,
            self.beta_dir_mean,
            self.beta_spd_mean,
        ];
        if means.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err("coefficient means must be finite and > 0".into());
        }
        if !(self.w_energy >= 0.0
            && self.w_distance >= 0.0
            && self.w_energy + self.w_distance > 0.0)
        {
            return Err("weights must be >= 0 with a positive sum".into());
        }
        if !(self.formation_radius_init > 0.0 && self.formation_radius_init.is_finite()) {
            return Err("formation_radius_init must be > 0".into());
        }
        if !(self.radius_shrink > 0.0 && self.radius_shrink <= 1.0) {
            return Err("radius_shrink must lie in (0, 1]".into());
        }
        if !(self.d_capture > 0.0 && self.d_capture.is_finite()) {
            return Err("d_capture must be > 0".into());
        }
        Ok(())
    }
}

/// Coefficients actually used to fill one pair of level games.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha_inf: f64,
    pub alpha_esc: f64,
    pub beta_dir: f64,
    pub beta_spd: f64,
}

impl Coefficients {
    pub fn means(params: &UtilityParams) -> Self {
        Self {
            alpha_inf: params.alpha_inf_mean,
            alpha_esc: params.alpha_esc_mean,
            beta_dir: params.beta_dir_mean,
            beta_spd: params.beta_spd_mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(params: &UtilityParams, rng: &mut R) -> Self {
        let mut draw = |mean: f64, std: f64| {
            Normal::new(mean, std)
                .map_or(mean, |d| d.sample(rng))
                .max(0.0)
        };
        Self {
            alpha_inf: draw(params.alpha_inf_mean, params.alpha_inf_std),
            alpha_esc: draw(params.alpha_esc_mean, params.alpha_esc_std),
            beta_dir: draw(params.beta_dir_mean, params.beta_dir_std),
            beta_spd: draw(params.beta_spd_mean, params.beta_spd_std),
        }
    }
}

/// Team-summed distances feeding the level games (metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSummary {
    pub d_cir: f64,
    pub d_sem: f64,
    pub d_cb: f64,
    pub d_pp: f64,
}

fn assigned_targets(world: &WorldState, slots: &SlotSet) -> Vec<crate::geom::Vec2> {
    let perm = assign_slots(&world.pursuers, slots).expect("slot count equals pursuer count");
    perm.iter().map(|&s| slots.points[s]).collect()
}

fn formation_cost(world: &WorldState, shape: Formation, radius: f64) -> f64 {
    let slots = formation_targets(
        shape,
        &world.evader,
        world.pursuers.len(),
        radius,
        &world.arena,
    );
    let perm = assign_slots(&world.pursuers, &slots).expect("slot count equals pursuer count");
    assignment_cost(&world.pursuers, &slots, &perm)
}

/// Formation travel at `radius` for both shapes, plus the per-law distance
/// to the targets: the slots of `formation` when given, the evader otherwise.
/// Targets move with the evader's velocity for the collision-course estimate.
pub fn distance_summary(
    world: &WorldState,
    radius: f64,
    formation: Option<Formation>,
) -> DistanceSummary {
    let d_cir = formation_cost(world, Formation::Circle, radius);
    let d_sem = formation_cost(world, Formation::Semicircle, radius);
    let targets = match formation {
        Some(shape) => {
            let slots = formation_targets(
                shape,
                &world.evader,
                world.pursuers.len(),
                radius,
                &world.arena,
            );
            assigned_targets(world, &slots)
        }
        None => vec![world.evader.position; world.pursuers.len()],
    };
    let mut d_cb = 0.0;
    let mut d_pp = 0.0;
    for (p, &target) in world.pursuers.iter().zip(&targets) {
        let straight = p.position.distance(target);
        d_pp += straight;
        d_cb += intercept_time(p.position, p.max_speed, target, world.evader.velocity)
            .map_or(straight, |t| p.max_speed * t);
    }
    DistanceSummary {
        d_cir,
        d_sem,
        d_cb,
        d_pp,
    }
}

fn cost_game(
    row_costs: [f64; 2],
    col_coeffs: [f64; 2],
    weight: f64,
    zero_sum: bool,
    rows: [&str; 2],
    cols: [&str; 2],
) -> BimatrixGame {
    let a: Vec<Vec<f64>> = row_costs
        .iter()
        .map(|d| col_coeffs.iter().map(|c| -(weight * c * d)).collect())
        .collect();
    let b: Vec<Vec<f64>> = if zero_sum {
        a.iter().map(|r| r.iter().map(|v| -v).collect()).collect()
    } else {
        row_costs
            .iter()
            .map(|d| col_coeffs.iter().map(|c| c * d).collect())
            .collect()
    };
    BimatrixGame::with_labels(
        a,
        b,
        rows.iter().map(|s| s.to_string()).collect(),
        cols.iter().map(|s| s.to_string()).collect(),
    )
    .expect("finite distances give a valid 2x2 game")
}

/// Formation game: rows (Circle, Semicircle), columns (Infiltrate, Escape).
pub fn level1_payoffs(world: &WorldState, params: &UtilityParams, radius: f64) -> BimatrixGame {
    level1_payoffs_with(world, params, radius, &Coefficients::means(params))
}

pub fn level1_payoffs_with(
    world: &WorldState,
    params: &UtilityParams,
    radius: f64,
    coeffs: &Coefficients,
) -> BimatrixGame {
    let d = distance_summary(world, radius, None);
    level1_from_distances(&d, params, coeffs)
}

pub fn level1_from_distances(
    d: &DistanceSummary,
    params: &UtilityParams,
    coeffs: &Coefficients,
) -> BimatrixGame {
    cost_game(
        [d.d_cir, d.d_sem],
        [coeffs.alpha_inf, coeffs.alpha_esc],
        params.w_energy,
        params.zero_sum,
        LEVEL1_ROWS,
        LEVEL1_COLS,
    )
}

/// Tactic game for a chosen formation: rows (CB, PP), columns (ΔDirection, ΔSpeed).
pub fn level2_payoffs(
    world: &WorldState,
    params: &UtilityParams,
    formation: Formation,
    radius: f64,
) -> BimatrixGame {
    level2_payoffs_with(
        world,
        params,
        formation,
        radius,
        &Coefficients::means(params),
    )
}

pub fn level2_payoffs_with(
    world: &WorldState,
    params: &UtilityParams,
    formation: Formation,
    radius: f64,
    coeffs: &Coefficients,
) -> BimatrixGame {
    let d = distance_summary(world, radius, Some(formation));
    level2_from_distances(&d, params, coeffs)
}

pub fn level2_from_distances(
    d: &DistanceSummary,
    params: &UtilityParams,
    coeffs: &Coefficients,
) -> BimatrixGame {
    cost_game(
        [d.d_cb, d.d_pp],
        [coeffs.beta_dir, coeffs.beta_spd],
        params.w_distance,
        params.zero_sum,
        LEVEL2_ROWS,
        LEVEL2_COLS,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::world::{AgentState, Arena, Role};

    fn world(
        pursuers: &[(f64, f64, f64)],
        evader: (f64, f64),
        evader_vel: Vec2,
        arena: Arena,
    ) -> WorldState {
        let ps = pursuers
            .iter()
            .enumerate()
            .map(|(i, &(x, y, s))| AgentState::new(Role::Pursuer(i), Vec2::new(x, y), s))
            .collect();
        let e = AgentState::new(Role::Evader, evader.into(), 1.0).with_velocity(evader_vel);
        WorldState::new(ps, e, arena, 0.033).unwrap()
    }

    fn big_arena() -> Arena {
        Arena::new(40.0, 40.0).unwrap()
    }

    #[test]
    fn stationary_target_collapses_laws() {
        let w = world(&[(21.0, 20.0, 1.0)], (20.0, 20.0), Vec2::ZERO, big_arena());
        let d = distance_summary(&w, 1e-3, None);
        assert_eq!(d.d_pp, 1.0);
        assert_eq!(d.d_cb, 1.0);
    }

    #[test]
    fn pursuers_on_circle_slots_travel_nothing() {
        let w = world(
            &[(21.0, 20.0, 1.0), (19.0, 20.0, 1.0)],
            (20.0, 20.0),
            Vec2::ZERO,
            big_arena(),
        );
        let d = distance_summary(&w, 1.0, None);
        assert!(d.d_cir < 1e-12);
    }

    #[test]
    fn intercept_distance_for_crossing_target() {
        // Shifted copy of pursuer (0,0) speed 2 vs evader (10,0) moving (0,1).
        let w = world(
            &[(5.0, 20.0, 2.0)],
            (15.0, 20.0),
            Vec2::new(0.0, 1.0),
            big_arena(),
        );
        let d = distance_summary(&w, 0.5, None);
        assert!((d.d_cb - 20.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!((d.d_pp - 10.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_intercept_falls_back() {
        let w = world(
            &[(5.0, 20.0, 0.5)],
            (15.0, 20.0),
            Vec2::new(0.0, 1.0),
            big_arena(),
        );
        let d = distance_summary(&w, 0.5, None);
        assert_eq!(d.d_cb, d.d_pp);
        let g = level2_from_distances(
            &d,
            &UtilityParams::default(),
            &Coefficients::means(&UtilityParams::default()),
        );
        assert_eq!(g.payoff_a()[0], g.payoff_a()[1]);
    }

    #[test]
    fn level1_substitution() {
        let params = UtilityParams {
            alpha_inf_mean: 1.0,
            alpha_esc_mean: 1.0,
            ..UtilityParams::default()
        };
        let d = DistanceSummary {
            d_cir: 2.0,
            d_sem: 3.0,
            d_cb: 0.0,
            d_pp: 0.0,
        };
        let g = level1_from_distances(&d, &params, &Coefficients::means(&params));
        assert_eq!(g.payoff_a(), vec![vec![-2.0, -2.0], vec![-3.0, -3.0]]);
        assert_eq!(g.payoff_b(), vec![vec![2.0, 2.0], vec![3.0, 3.0]]);
        assert_eq!(g.row_labels(), ["Circle", "Semicircle"]);
        assert_eq!(g.col_labels(), ["Infiltrate", "Escape"]);
    }

    #[test]
    fn level2_substitution() {
        let params = UtilityParams {
            beta_dir_mean: 2.0,
            beta_spd_mean: 1.0,
            ..UtilityParams::default()
        };
        let d = DistanceSummary {
            d_cir: 0.0,
            d_sem: 0.0,
            d_cb: 1.0,
            d_pp: 1.0,
        };
        let g = level2_from_distances(&d, &params, &Coefficients::means(&params));
        assert_eq!(g.payoff_a(), vec![vec![-2.0, -1.0], vec![-2.0, -1.0]]);
        assert_eq!(g.row_labels(), ["CB", "PP"]);
    }

    #[test]
    fn general_sum_evader_payoff() {
        let params = UtilityParams {
            zero_sum: false,
            ..UtilityParams::default()
        };
        let d = DistanceSummary {
            d_cir: 2.0,
            d_sem: 1.0,
            d_cb: 0.0,
            d_pp: 0.0,
        };
        let g = level1_from_distances(&d, &params, &Coefficients::means(&params));
        assert_eq!(g.payoff_b()[0][0], 1.2 * 2.0);
        assert_eq!(g.payoff_b()[1][1], 0.8 * 1.0);
    }

    #[test]
    fn sampled_coefficients_are_nonnegative() {
        use rand::SeedableRng;
        let params = UtilityParams {
            alpha_inf_mean: 0.01,
            alpha_inf_std: 1.0,
            ..UtilityParams::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let c = Coefficients::sample(&params, &mut rng);
            assert!(c.alpha_inf >= 0.0 && c.beta_spd >= 0.0);
        }
    }

    #[test]
    fn validation() {
        assert!(UtilityParams::default().validate().is_ok());
        let bad = UtilityParams {
            radius_shrink: 1.5,
            ..UtilityParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = UtilityParams {
            w_energy: 0.0,
            w_distance: 0.0,
            ..UtilityParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
