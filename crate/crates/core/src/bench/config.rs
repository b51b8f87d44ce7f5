use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::evader::EvaderConfig;
use crate::geom::Vec2;
use crate::gut::{GutConfig, ReplanConfig};
use crate::payoff::UtilityParams;
use crate::world::{Arena, CaptureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Cb,
    Pp,
    Gut,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Cb, Strategy::Pp, Strategy::Gut];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Cb => "CB",
            Strategy::Pp => "PP",
            Strategy::Gut => "GUT",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cb" => Ok(Strategy::Cb),
            "pp" => Ok(Strategy::Pp),
            "gut" => Ok(Strategy::Gut),
            _ => Err(BenchError::Config(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Explicit starting geometry, replacing the default left-edge line-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub pursuers: Vec<Vec2>,
    pub evader: Vec2,
    /// Initial evader heading in rad; drawn from the trial seed when absent.
    #[serde(default)]
    pub evader_heading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub pursuer_count: usize,
    /// Pursuer max speed over evader max speed.
    pub speed_ratio: f64,
    /// m/s
    pub evader_speed: f64,
    pub strategy: Strategy,
    pub arena: Arena,
    /// m
    pub d_capture: f64,
    pub capture_rule: CaptureRule,
    /// s
    pub dt: f64,
    /// s
    pub max_time: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub utility: UtilityParams,
    pub evader: EvaderConfig,
    pub replan: ReplanConfig,
    pub gut: GutConfig,
    pub placement: Option<Placement>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            pursuer_count: 3,
            speed_ratio: 1.5,
            evader_speed: 0.1,
            strategy: Strategy::Gut,
            arena: Arena::default(),
            d_capture: 0.15,
            capture_rule: CaptureRule::Max,
            dt: 0.033,
            max_time: 300.0,
            trials: 10,
            base_seed: 1,
            utility: UtilityParams::default(),
            evader: EvaderConfig::default(),
            replan: ReplanConfig::default(),
            gut: GutConfig::default(),
            placement: None,
        }
    }
}

impl ScenarioConfig {
    pub fn pursuer_speed(&self) -> f64 {
        self.speed_ratio * self.evader_speed
    }

    /// Utility parameters with the scenario's capture distance applied.
    pub fn utility_params(&self) -> UtilityParams {
        UtilityParams {
            d_capture: self.d_capture,
            ..self.utility.clone()
        }
    }

    pub fn with_cell(&self, strategy: Strategy, pursuers: usize, speed_ratio: f64) -> Self {
        Self {
            strategy,
            pursuer_count: pursuers,
            speed_ratio,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let invalid = |msg: &str| Err(BenchError::Config(msg.to_string()));
        if self.pursuer_count == 0 {
            return invalid("pursuer_count must be >= 1");
        }
        // A zero ratio is allowed and models immobile pursuers.
        if !(self.speed_ratio >= 0.0 && self.speed_ratio.is_finite()) {
            return invalid("speed_ratio must be finite and >= 0");
        }
        if !(self.evader_speed >= 0.0 && self.evader_speed.is_finite()) {
            return invalid("evader_speed must be finite and >= 0");
        }
        Arena::new(self.arena.width, self.arena.height)
            .map_err(|e| BenchError::Config(e.to_string()))?;
        if !(self.d_capture > 0.0 && self.d_capture.is_finite()) {
            return invalid("d_capture must be > 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("dt must be > 0");
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return invalid("max_time must be > 0");
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        self.utility_params()
            .validate()
            .map_err(BenchError::Config)?;
        self.evader
            .validate(&self.arena)
            .map_err(BenchError::Config)?;
        if let Some(p) = self.replan.level1_period {
            if !(p > 0.0) {
                return invalid("replan.level1_period must be > 0");
            }
        }
        if let Some(pl) = &self.placement {
            if pl.pursuers.len() != self.pursuer_count {
                return invalid("placement.pursuers must list pursuer_count positions");
            }
            if !pl
                .pursuers
                .iter()
                .chain([&pl.evader])
                .all(|p| self.arena.contains(*p))
            {
                return invalid("placement positions must lie inside the arena");
            }
        }
        crate::gut::build_pursuit_gut(&self.gut).map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Grid axes for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub strategies: Vec<Strategy>,
    pub pursuer_counts: Vec<usize>,
    pub speed_ratios: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            strategies: Strategy::ALL.to_vec(),
            pursuer_counts: vec![1, 3, 5],
            speed_ratios: vec![0.8, 1.05, 1.5],
        }
    }
}

/// Contents of a configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            BenchError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// A set of scenario cells sharing one base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub base: ScenarioConfig,
    pub strategies: Vec<Strategy>,
    pub pursuer_counts: Vec<usize>,
    pub speed_ratios: Vec<f64>,
}

impl Experiment {
    /// Only the base scenario's own cell.
    pub fn single(base: ScenarioConfig) -> Self {
        Self {
            strategies: vec![base.strategy],
            pursuer_counts: vec![base.pursuer_count],
            speed_ratios: vec![base.speed_ratio],
            base,
        }
    }

    pub fn grid(base: ScenarioConfig, sweep: &SweepConfig) -> Self {
        Self {
            base,
            strategies: sweep.strategies.clone(),
            pursuer_counts: sweep.pursuer_counts.clone(),
            speed_ratios: sweep.speed_ratios.clone(),
        }
    }

    /// Cells in (pursuer count, speed ratio, strategy) order.
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for &n in &self.pursuer_counts {
            for &r in &self.speed_ratios {
                for &s in &self.strategies {
                    out.push(self.base.with_cell(s, n, r));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.strategies.is_empty() {
            return Err(BenchError::Config("strategy list is empty".into()));
        }
        if self.pursuer_counts.is_empty() || self.speed_ratios.is_empty() {
            return Err(BenchError::Config(
                "pursuer count and speed ratio lists must be non-empty".into(),
            ));
        }
        self.cells().iter().try_for_each(ScenarioConfig::validate)
    }
}
