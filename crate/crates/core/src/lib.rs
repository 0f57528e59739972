//! Text-world reinforcement learning with normative shaping.
//!
//! [`engine`] runs deterministic text worlds, [`worlds`] bundles three of
//! them with action elaborations, [`prior`] judges elaborations, [`neural`]
//! holds the actor-critic network, [`agent`] trains it and [`harness`]
//! runs the experiments and computes metrics.

pub mod agent;
pub mod engine;
pub mod harness;
pub mod neural;
pub mod prior;
pub mod worlds;
