//! Deterministic text-world state machine.
//!
//! A [`WorldSpec`] declares rooms, items, characters, actions, quests and
//! failure predicates. [`WorldSpec::reset`] and [`WorldSpec::step`] run an
//! episode; [`WorldSpec::enumerate_reachable`] explores every reachable state
//! breadth-first, branching over the random choices penalty hooks make.

mod encode;
mod graph;
mod spec;
mod state;

use thiserror::Error;

pub use encode::Encoder;
pub use graph::{Edge, EnumerateOptions, ExportEdge, ExportNode, GraphExport, Node, NodeKind, StateGraph};
pub use spec::{
    ActionDef, Condition, Effect, Exit, FlagDef, Item, Npc, PenaltyEffect, PenaltyHook, QuestDef, RawWorld, Room, Tag,
    WorldSpec, WORLD_SCHEMA_VERSION,
};
pub use state::{AdmissibleAction, Bits, ItemPlace, Observation, StateKey, StepOutcome, Transition, WorldState};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("world spec parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid world spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("action `{action}` is not admissible in room `{room}`")]
    Inadmissible { action: String, room: String },
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("episode is over")]
    EpisodeOver,
    #[error("no admissible action in non-terminal state (room `{0}`)")]
    DeadEnd(String),
    #[error("observation does not match world: unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

/// Parses and validates a world definition.
pub fn load_world(spec_text: &str) -> Result<WorldSpec, SpecError> {
    WorldSpec::from_json(spec_text)
}
