use gut_core::bench::{run_trial, ScenarioConfig, Strategy as Team, TrialOptions};
use gut_core::formation::{
    assignment_cost, circle_slots, exact_assignment, formation_targets, greedy_assignment,
    semicircle_slots, Formation,
};
use gut_core::guidance::{constant_bearing, intercept_time, pure_pursuit};
use gut_core::gut::{build_pursuit_gut, decide, select_pair, GutConfig, Selection};
use gut_core::matgame::{best_response_gap, mixed_nash, pure_nash, BimatrixGame};
use gut_core::payoff::{
    distance_summary, level1_from_distances, level2_from_distances, Coefficients, DistanceSummary,
};
use gut_core::{AgentState, Arena, Role, UtilityParams, Vec2, WorldState};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn game_strategy(max_dim: usize) -> impl Strategy<Value = BimatrixGame> {
    (2..=max_dim, 2..=max_dim).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-5i32..=5, m), n),
            prop::collection::vec(prop::collection::vec(-5i32..=5, m), n),
        )
            .prop_map(|(a, b)| {
                let f = |x: Vec<Vec<i32>>| {
                    x.into_iter()
                        .map(|r| r.into_iter().map(f64::from).collect())
                        .collect()
                };
                BimatrixGame::new(f(a), f(b)).unwrap()
            })
    })
}

fn pt(lo: f64, hi: f64) -> impl Strategy<Value = Vec2> {
    (lo..hi, lo..hi).prop_map(|(x, y)| Vec2::new(x, y))
}

fn world_strategy() -> impl Strategy<Value = WorldState> {
    (
        prop::collection::vec((0.05f64..3.15, 0.05f64..1.95), 1..=5),
        (0.3f64..2.9, 0.3f64..1.7),
        -3.2f64..3.2,
    )
        .prop_map(|(ps, e, heading)| {
            let pursuers = ps
                .into_iter()
                .enumerate()
                .map(|(i, p)| AgentState::new(Role::Pursuer(i), p.into(), 0.15))
                .collect();
            let evader = AgentState::new(Role::Evader, e.into(), 0.1)
                .with_velocity(Vec2::from_angle(heading) * 0.1);
            WorldState::new(pursuers, evader, Arena::default(), 0.033).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_game_has_an_equilibrium(game in game_strategy(4)) {
        let eqs = mixed_nash(&game).unwrap();
        prop_assert!(!eqs.is_empty());
        for p in &eqs {
            prop_assert!(best_response_gap(&game, p).unwrap() <= 1e-9);
        }
    }

    /// Positive affine transforms of either payoff leave the equilibrium set unchanged.
    #[test]
    fn equilibria_invariant_under_affine_maps(game in game_strategy(3), s in 0.5f64..4.0, t in -10.0f64..10.0) {
        let mapped = game.map_payoffs(|a| 2.0 * a + 1.0, |b| s * b + t).unwrap();
        prop_assert_eq!(pure_nash(&game), pure_nash(&mapped));
        let a = mixed_nash(&game).unwrap();
        let b = mixed_nash(&mapped).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            for (u, v) in x.row_dist.iter().zip(&y.row_dist).chain(x.col_dist.iter().zip(&y.col_dist)) {
                prop_assert!((u - v).abs() < 1e-7);
            }
        }
    }

    /// Adding a column-wise constant to the pursuer payoff never changes the played pair.
    #[test]
    fn selection_ignores_column_shift(d in prop::collection::vec(0.1f64..5.0, 2), c0 in -3.0f64..3.0, c1 in -3.0f64..3.0) {
        let params = UtilityParams::default();
        let coeffs = Coefficients::means(&params);
        let ds = DistanceSummary { d_cir: d[0], d_sem: d[1], d_cb: d[0], d_pp: d[1] };
        let g = level1_from_distances(&ds, &params, &coeffs);
        let shifted = g.map_payoffs(|a| a, |b| b).unwrap();
        let a: Vec<Vec<f64>> = (0..2).map(|i| vec![g.a(i, 0) + c0, g.a(i, 1) + c1]).collect();
        let b: Vec<Vec<f64>> = (0..2).map(|i| vec![g.b(i, 0) - c0, g.b(i, 1) - c1]).collect();
        let moved = BimatrixGame::new(a, b).unwrap();
        let pick = |g: &BimatrixGame| select_pair::<ChaCha8Rng>(g, Selection::Argmax, None).unwrap().1.0;
        prop_assert_eq!(pick(&shifted), pick(&moved));
    }

    #[test]
    fn payoff_rows_fall_as_distance_grows(d in prop::collection::vec(0.0f64..5.0, 4), bump in 0.01f64..2.0) {
        let params = UtilityParams::default();
        let coeffs = Coefficients::means(&params);
        let base = DistanceSummary { d_cir: d[0], d_sem: d[1], d_cb: d[2], d_pp: d[3] };
        let l1 = level1_from_distances(&base, &params, &coeffs);
        let l2 = level2_from_distances(&base, &params, &coeffs);
        let more_cir = DistanceSummary { d_cir: d[0] + bump, ..base };
        let more_pp = DistanceSummary { d_pp: d[3] + bump, ..base };
        let l1b = level1_from_distances(&more_cir, &params, &coeffs);
        let l2b = level2_from_distances(&more_pp, &params, &coeffs);
        for c in 0..2 {
            prop_assert!(l1b.a(0, c) < l1.a(0, c));
            prop_assert_eq!(l1b.a(1, c), l1.a(1, c));
            prop_assert!(l2b.a(1, c) < l2.a(1, c));
            prop_assert_eq!(l2b.a(0, c), l2.a(0, c));
        }
    }

    #[test]
    fn payoffs_finite_and_zero_sum(world in world_strategy(), radius in 0.14f64..1.0) {
        let params = UtilityParams::default();
        let s = distance_summary(&world, radius, Some(Formation::Circle));
        for v in [s.d_cir, s.d_sem, s.d_cb, s.d_pp] {
            prop_assert!(v.is_finite() && v >= 0.0);
        }
        let tree = build_pursuit_gut(&GutConfig::default()).unwrap();
        let d = decide(&tree, &world, &params, radius).unwrap();
        for level in &d.levels {
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!(level.game.a(i, j).is_finite());
                    prop_assert_eq!(level.game.b(i, j), -level.game.a(i, j));
                }
            }
        }
    }

    #[test]
    fn decide_is_deterministic(world in world_strategy()) {
        let tree = build_pursuit_gut(&GutConfig::default()).unwrap();
        let params = UtilityParams::default();
        prop_assert_eq!(decide(&tree, &world, &params, 0.5).unwrap(), decide(&tree, &world, &params, 0.5).unwrap());
    }

    #[test]
    fn cb_velocity_is_full_speed_and_cancels_cross_motion(p in pt(-5.0, 5.0), e in pt(-5.0, 5.0), v in pt(-1.0, 1.0), speed in 1.5f64..3.0) {
        prop_assume!(p.distance(e) > 0.1);
        let agent = AgentState::new(Role::Pursuer(0), p, speed);
        let cmd = constant_bearing(&agent, e, v);
        prop_assert!((cmd.velocity.norm() - speed).abs() < 1e-9);
        let los = (e - p).normalized(1e-12).unwrap();
        // Relative velocity has no component across the line of sight.
        prop_assert!((v - cmd.velocity).cross(los).abs() < 1e-9);
        prop_assert!(intercept_time(p, speed, e, v).is_some());
    }

    #[test]
    fn pure_pursuit_points_at_target(p in pt(-5.0, 5.0), e in pt(-5.0, 5.0), speed in 0.1f64..3.0) {
        prop_assume!(p.distance(e) > 1e-6);
        let cmd = pure_pursuit(&AgentState::new(Role::Pursuer(0), p, speed), e);
        let los = (e - p).normalized(1e-12).unwrap();
        prop_assert!((cmd.velocity - los * speed).norm() < 1e-12);
    }

    #[test]
    fn intercept_time_satisfies_collision_equation(p in pt(-5.0, 5.0), e in pt(-5.0, 5.0), v in pt(-1.0, 1.0), speed in 0.2f64..3.0) {
        if let Some(t) = intercept_time(p, speed, e, v) {
            prop_assert!(t >= 0.0);
            let miss = (e + v * t - p).norm() - speed * t;
            prop_assert!(miss.abs() < 1e-6 * (1.0 + speed * t));
        } else {
            prop_assert!(v.norm() >= speed);
        }
    }

    #[test]
    fn slots_lie_in_arena_and_are_distinct(e in pt(0.0, 2.0), n in 1usize..7, r in 0.1f64..1.0, heading in -3.2f64..3.2, shape in 0usize..2) {
        let arena = Arena::default();
        let evader = AgentState::new(Role::Evader, e, 0.1).with_velocity(Vec2::from_angle(heading) * 0.1);
        let slots = formation_targets(Formation::ALL[shape], &evader, n, r, &arena);
        prop_assert_eq!(slots.points.len(), n);
        for (i, a) in slots.points.iter().enumerate() {
            prop_assert!(arena.contains(*a));
            for b in &slots.points[i + 1..] {
                prop_assert!(a.distance(*b) >= 1e-6 - 1e-12);
            }
        }
    }

    #[test]
    fn circle_slots_equidistant_before_clamp(e in pt(-5.0, 5.0), n in 1usize..9, r in 0.1f64..2.0, heading in -3.2f64..3.2) {
        let evader = AgentState::new(Role::Evader, e, 0.1).with_velocity(Vec2::from_angle(heading) * 0.1);
        for slots in [circle_slots(&evader, n, r, None), semicircle_slots(&evader, n, r, None)] {
            for s in &slots.points {
                prop_assert!((s.distance(e) - r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_assignment_never_worse_than_greedy(ps in prop::collection::vec(pt(0.0, 3.0), 2..=6), e in pt(0.5, 1.5), r in 0.14f64..0.8) {
        let pursuers: Vec<AgentState> = ps.iter().enumerate().map(|(i, p)| AgentState::new(Role::Pursuer(i), *p, 0.1)).collect();
        let evader = AgentState::new(Role::Evader, e, 0.1);
        let slots = circle_slots(&evader, pursuers.len(), r, None);
        let exact = exact_assignment(&pursuers, &slots.points);
        let greedy = greedy_assignment(&pursuers, &slots.points);
        prop_assert!(assignment_cost(&pursuers, &slots, &exact) <= assignment_cost(&pursuers, &slots, &greedy) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Same seed, same trial, for every strategy.
    #[test]
    fn trials_are_reproducible(index in 0usize..1000, strategy in 0usize..3) {
        let cfg = ScenarioConfig { strategy: Team::ALL[strategy], max_time: 15.0, ..ScenarioConfig::default() };
        let a = run_trial(&cfg, index, TrialOptions { record_decisions: true, record_trajectory: true }).unwrap();
        let b = run_trial(&cfg, index, TrialOptions { record_decisions: true, record_trajectory: true }).unwrap();
        prop_assert_eq!(a, b);
    }
}
