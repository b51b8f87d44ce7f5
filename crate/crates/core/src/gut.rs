//! Two-level game-theoretic utility tree for the pursuer team.
//!
//! Level one picks a formation (Circle or Semicircle) against the evader's
//! Infiltrate/Escape model; the child reached by the chosen pair holds the
//! level-two game, which picks a guidance tactic (CB or PP) against the
//! evader's direction/speed-change model. Both games are bimatrix games solved
//! for Nash equilibria; each node also carries a distribution over its
//! strategy pairs that is conditioned on the parent pair when descending.
//!
//! [`DecisionLoop`] runs the state machine: level one is solved once, then
//! only level two is re-solved every control epoch until capture. Periodic
//! level-one replanning is available but off by default.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::Formation;
use crate::matgame::{
    best_response_gap, mixed_nash, BimatrixGame, GameError, MixedProfile, EQUILIBRIUM_TOL,
};
use crate::payoff::{
    level1_payoffs_with, level2_payoffs_with, CoefficientMode, Coefficients, UtilityParams,
    LEVEL1_COLS, LEVEL1_ROWS, LEVEL2_COLS, LEVEL2_ROWS,
};
use crate::world::{capture_check, CaptureRule, WorldState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GutError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("situation probabilities {0:?} are not a distribution over 4 pairs")]
    SituationProbs(Vec<f64>),
    #[error("level {level} produced no equilibrium")]
    NoEquilibrium { level: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tactic {
    #[serde(rename = "CB")]
    ConstantBearing,
    #[serde(rename = "PP")]
    PurePursuit,
}

impl Tactic {
    pub const ALL: [Tactic; 2] = [Tactic::ConstantBearing, Tactic::PurePursuit];

    pub fn label(self) -> &'static str {
        match self {
            Tactic::ConstantBearing => "CB",
            Tactic::PurePursuit => "PP",
        }
    }
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How a node's game is built from the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameBuilder {
    Formation,
    Tactic(Formation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GutNode {
    pub level: usize,
    pub builder: GameBuilder,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub children: BTreeMap<(usize, usize), GutNode>,
    /// Row-major over (row, col) strategy pairs.
    pub situation_probs: Vec<f64>,
}

impl GutNode {
    fn new(
        level: usize,
        builder: GameBuilder,
        rows: [&str; 2],
        cols: [&str; 2],
        probs: Vec<f64>,
    ) -> Self {
        Self {
            level,
            builder,
            row_labels: rows.iter().map(|s| s.to_string()).collect(),
            col_labels: cols.iter().map(|s| s.to_string()).collect(),
            children: BTreeMap::new(),
            situation_probs: probs,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn build_game(
        &self,
        world: &WorldState,
        params: &UtilityParams,
        radius: f64,
        coeffs: &Coefficients,
    ) -> BimatrixGame {
        match self.builder {
            GameBuilder::Formation => level1_payoffs_with(world, params, radius, coeffs),
            GameBuilder::Tactic(f) => level2_payoffs_with(world, params, f, radius, coeffs),
        }
    }

    /// Expected pursuer utility of this node's game under its situation distribution.
    pub fn situation_utility(&self, game: &BimatrixGame) -> f64 {
        let cols = game.cols();
        self.situation_probs
            .iter()
            .enumerate()
            .map(|(k, p)| p * game.a(k / cols, k % cols))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GutTree {
    pub root: GutNode,
}

impl GutTree {
    pub fn depth(&self) -> usize {
        let mut depth = 1;
        let mut node = &self.root;
        while let Some(child) = node.children.values().next() {
            depth += 1;
            node = child;
        }
        depth
    }

    pub fn leaves(&self) -> impl Iterator<Item = &GutNode> {
        self.root.children.values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Best pure equilibrium for the pursuers, else the modes of the first mixed one.
    #[default]
    Argmax,
    /// Draw the pair from the selected equilibrium's distributions.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GutConfig {
    pub selection: Selection,
    /// Level-one situation probabilities; uniform when absent.
    pub level1_situation_probs: Option<Vec<f64>>,
    /// Level-two situation probabilities for every leaf; uniform when absent.
    pub level2_situation_probs: Option<Vec<f64>>,
}

fn situation_probs(given: &Option<Vec<f64>>) -> Result<Vec<f64>, GutError> {
    match given {
        None => Ok(vec![0.25; 4]),
        Some(p) => {
            let sum: f64 = p.iter().sum();
            if p.len() != 4 || p.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(GutError::SituationProbs(p.clone()));
            }
            Ok(p.clone())
        }
    }
}

/// Root formation game over four tactic leaves, one per level-one pair.
pub fn build_pursuit_gut(config: &GutConfig) -> Result<GutTree, GutError> {
    let probs1 = situation_probs(&config.level1_situation_probs)?;
    let probs2 = situation_probs(&config.level2_situation_probs)?;
    let mut root = GutNode::new(1, GameBuilder::Formation, LEVEL1_ROWS, LEVEL1_COLS, probs1);
    for (i, formation) in Formation::ALL.into_iter().enumerate() {
        for j in 0..LEVEL1_COLS.len() {
            let leaf = GutNode::new(
                2,
                GameBuilder::Tactic(formation),
                LEVEL2_ROWS,
                LEVEL2_COLS,
                probs2.clone(),
            );
            root.children.insert((i, j), leaf);
        }
    }
    Ok(GutTree { root })
}

/// Conditions a node's situation distribution on the probability of the
/// parent pair that led to it. A zero-probability parent yields uniform.
pub fn propagate_cp(parent_pair_prob: f64, node: &GutNode) -> Vec<f64> {
    let n = node.situation_probs.len();
    let joint: Vec<f64> = node
        .situation_probs
        .iter()
        .map(|p| p * parent_pair_prob)
        .collect();
    let total: f64 = joint.iter().sum();
    if parent_pair_prob <= 0.0 || total <= 0.0 {
        return vec![1.0 / n as f64; n];
    }
    joint.into_iter().map(|p| p / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub game: BimatrixGame,
    pub profile: MixedProfile,
    pub pair: (usize, usize),
    pub gap: f64,
    /// Situation distribution after conditioning on the parent pair.
    pub situation_probs: Vec<f64>,
    pub situation_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyPath(pub Vec<(String, String)>);

impl fmt::Display for StrategyPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(a, b)| format!("{a}/{b}")).collect();
        f.write_str(&parts.join(">"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub formation: Formation,
    pub tactic: Tactic,
    pub path: StrategyPath,
    pub levels: Vec<LevelOutcome>,
    pub epoch_time: f64,
}

impl Decision {
    pub fn profiles(&self) -> impl Iterator<Item = &MixedProfile> {
        self.levels.iter().map(|l| &l.profile)
    }
}

fn argmax(d: &[f64]) -> usize {
    // First index wins ties.
    d.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| {
            if p > best.1 {
                (i, p)
            } else {
                best
            }
        })
        .0
}

fn sample_index<R: Rng + ?Sized>(d: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in d.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    argmax(d)
}

/// Solves `game` and picks the strategy pair to play.
pub fn select_pair<R: Rng + ?Sized>(
    game: &BimatrixGame,
    selection: Selection,
    rng: Option<&mut R>,
) -> Result<(MixedProfile, (usize, usize)), GutError> {
    let equilibria = mixed_nash(game)?;
    let mut pure = equilibria
        .iter()
        .filter_map(|p| p.as_pure().map(|c| (p, c)));
    let chosen = match pure.next() {
        Some(first) => {
            pure.fold(first, |best, cand| {
                if cand.0.value_a > best.0.value_a {
                    cand
                } else {
                    best
                }
            })
            .0
        }
        None => equilibria
            .first()
            .ok_or(GutError::NoEquilibrium { level: 0 })?,
    };
    let pair = match (selection, rng) {
        (Selection::Sample, Some(rng)) => (
            sample_index(&chosen.row_dist, rng),
            sample_index(&chosen.col_dist, rng),
        ),
        _ => (argmax(&chosen.row_dist), argmax(&chosen.col_dist)),
    };
    Ok((chosen.clone(), pair))
}

fn solve_node<R: Rng + ?Sized>(
    node: &GutNode,
    game: BimatrixGame,
    parent_pair_prob: f64,
    selection: Selection,
    rng: Option<&mut R>,
) -> Result<LevelOutcome, GutError> {
    let (profile, pair) = select_pair(&game, selection, rng).map_err(|e| match e {
        GutError::NoEquilibrium { .. } => GutError::NoEquilibrium { level: node.level },
        other => other,
    })?;
    let gap = best_response_gap(&game, &profile)?;
    let situation_probs = propagate_cp(parent_pair_prob, node);
    let conditioned = GutNode {
        situation_probs: situation_probs.clone(),
        children: BTreeMap::new(),
        ..node.clone()
    };
    Ok(LevelOutcome {
        situation_utility: conditioned.situation_utility(&game),
        game,
        profile,
        pair,
        gap,
        situation_probs,
    })
}

fn pair_prob(outcome: &LevelOutcome) -> f64 {
    outcome.profile.row_dist[outcome.pair.0] * outcome.profile.col_dist[outcome.pair.1]
}

fn assemble(
    tree: &GutTree,
    level1: LevelOutcome,
    level2: LevelOutcome,
    epoch_time: f64,
) -> Decision {
    let leaf = &tree.root.children[&level1.pair];
    let path = StrategyPath(vec![
        (
            tree.root.row_labels[level1.pair.0].clone(),
            tree.root.col_labels[level1.pair.1].clone(),
        ),
        (
            leaf.row_labels[level2.pair.0].clone(),
            leaf.col_labels[level2.pair.1].clone(),
        ),
    ]);
    Decision {
        formation: Formation::ALL[level1.pair.0],
        tactic: Tactic::ALL[level2.pair.0],
        path,
        levels: vec![level1, level2],
        epoch_time,
    }
}

/// Solves both levels for the current world with mean coefficients.
pub fn decide(
    tree: &GutTree,
    world: &WorldState,
    params: &UtilityParams,
    radius: f64,
) -> Result<Decision, GutError> {
    let coeffs = Coefficients::means(params);
    let game1 = tree.root.build_game(world, params, radius, &coeffs);
    let level1 = solve_node::<ChaCha8Rng>(&tree.root, game1, 1.0, Selection::Argmax, None)?;
    let leaf = &tree.root.children[&level1.pair];
    let game2 = leaf.build_game(world, params, radius, &coeffs);
    let level2 =
        solve_node::<ChaCha8Rng>(leaf, game2, pair_prob(&level1), Selection::Argmax, None)?;
    Ok(assemble(tree, level1, level2, world.time()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplanConfig {
    /// Re-solve level one every this many seconds; never when absent.
    pub level1_period: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LoopState {
    LevelOne,
    LevelTwo,
}

/// Stateful driver producing one [`Decision`] per control epoch.
#[derive(Debug, Clone)]
pub struct DecisionLoop {
    tree: GutTree,
    params: UtilityParams,
    replan: ReplanConfig,
    capture_rule: CaptureRule,
    selection: Selection,
    rng: ChaCha8Rng,
    state: LoopState,
    level1: Option<(LevelOutcome, f64)>,
    level1_solves: usize,
    level2_solves: usize,
}

impl DecisionLoop {
    pub fn new(
        tree: GutTree,
        params: UtilityParams,
        replan: ReplanConfig,
        capture_rule: CaptureRule,
    ) -> Self {
        Self {
            tree,
            params,
            replan,
            capture_rule,
            selection: Selection::Argmax,
            rng: ChaCha8Rng::seed_from_u64(0),
            state: LoopState::LevelOne,
            level1: None,
            level1_solves: 0,
            level2_solves: 0,
        }
    }

    /// Seeds the generator used by sampled selection and sampled coefficients.
    pub fn with_rng(mut self, selection: Selection, seed: u64) -> Self {
        self.selection = selection;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn level1_solves(&self) -> usize {
        self.level1_solves
    }

    pub fn level2_solves(&self) -> usize {
        self.level2_solves
    }

    pub fn tree(&self) -> &GutTree {
        &self.tree
    }

    fn coefficients(&mut self) -> Coefficients {
        match self.params.coefficient_mode {
            CoefficientMode::Mean => Coefficients::means(&self.params),
            CoefficientMode::Sample => Coefficients::sample(&self.params, &mut self.rng),
        }
    }

    fn replan_due(&self, now: f64) -> bool {
        match (self.replan.level1_period, &self.level1) {
            (Some(period), Some((_, solved_at))) if period > 0.0 => {
                now - solved_at >= period - 1e-9
            }
            _ => false,
        }
    }

    /// `None` once the capture condition holds.
    pub fn next_decision(
        &mut self,
        world: &WorldState,
        radius: f64,
    ) -> Result<Option<Decision>, GutError> {
        if capture_check(world, self.params.d_capture, self.capture_rule) {
            return Ok(None);
        }
        let now = world.time();
        let coeffs = self.coefficients();
        if self.state == LoopState::LevelOne || self.replan_due(now) {
            let game = self
                .tree
                .root
                .build_game(world, &self.params, radius, &coeffs);
            let outcome = solve_node(
                &self.tree.root,
                game,
                1.0,
                self.selection,
                Some(&mut self.rng),
            )?;
            self.level1_solves += 1;
            let child = self
                .tree
                .root
                .children
                .get_mut(&outcome.pair)
                .expect("child per pair");
            child.situation_probs = propagate_cp(pair_prob(&outcome), child);
            self.level1 = Some((outcome, now));
            self.state = LoopState::LevelTwo;
        }
        let (level1, _) = self.level1.clone().expect("level one solved");
        let leaf = &self.tree.root.children[&level1.pair];
        let game = leaf.build_game(world, &self.params, radius, &coeffs);
        let level2 = solve_node(
            leaf,
            game,
            pair_prob(&level1),
            self.selection,
            Some(&mut self.rng),
        )?;
        self.level2_solves += 1;
        debug_assert!(level1.gap <= EQUILIBRIUM_TOL && level2.gap <= EQUILIBRIUM_TOL);
        Ok(Some(assemble(&self.tree, level1, level2, now)))
    }
}
