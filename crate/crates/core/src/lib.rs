//! Multi-pursuer single-evader pursuit in a bounded arena, coordinated by a
//! two-level tree of bimatrix games.

pub mod bench;
pub mod evader;
pub mod formation;
pub mod geom;
pub mod guidance;
pub mod gut;
pub mod matgame;
pub mod payoff;
pub mod world;

pub use evader::{EvaderConfig, EvaderController, EvaderMode};
pub use formation::{Formation, SlotSet};
pub use geom::Vec2;
pub use guidance::{GuidanceCommand, Law};
pub use gut::{
    Decision, DecisionLoop, GutConfig, GutError, GutTree, ReplanConfig, Selection, Tactic,
};
pub use matgame::{BimatrixGame, GameError, MixedProfile};
pub use payoff::{CoefficientMode, UtilityParams};
pub use world::{AgentState, Arena, CaptureRule, Role, WorldState};
