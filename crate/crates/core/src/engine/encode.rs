//! Fixed-length feature vectors for observations.
//!
//! Layout: room one-hot, carried items, flag facts, completed quests, lapsed
//! quests, visible items, visible characters.

use std::collections::HashMap;

use super::spec::WorldSpec;
use super::state::{fact_for_completed, fact_for_lapsed, ItemPlace, WorldState};
use super::{EngineError, Observation};

/// Precomputed name lookups for decoding observations.
#[derive(Debug, Clone)]
pub struct Encoder {
    rooms: HashMap<String, usize>,
    items: HashMap<String, usize>,
    facts: HashMap<String, usize>,
    visible: HashMap<String, usize>,
    offsets: Offsets,
}

#[derive(Debug, Clone, Copy)]
struct Offsets {
    inventory: usize,
    facts: usize,
    visible: usize,
    len: usize,
}

impl Offsets {
    fn of(spec: &WorldSpec) -> Offsets {
        let inventory = spec.rooms.len();
        let facts = inventory + spec.items.len();
        let visible = facts + spec.flags.len() + 2 * spec.quests.len();
        let len = visible + spec.items.len() + spec.npcs.len();
        Offsets { inventory, facts, visible, len }
    }
}

impl Encoder {
    pub fn new(spec: &WorldSpec) -> Encoder {
        let offsets = Offsets::of(spec);
        let rooms = spec.rooms.iter().enumerate().map(|(i, r)| (r.name.clone(), i)).collect();
        let items = spec.items.iter().enumerate().map(|(i, it)| (it.name.clone(), i)).collect();
        let nf = spec.flags.len();
        let nq = spec.quests.len();
        let facts = spec
            .flags
            .iter()
            .enumerate()
            .map(|(i, f)| (f.fact.clone(), i))
            .chain(spec.quests.iter().enumerate().map(|(i, q)| (fact_for_completed(&q.name), nf + i)))
            .chain(spec.quests.iter().enumerate().map(|(i, q)| (fact_for_lapsed(&q.name), nf + nq + i)))
            .collect();
        let ni = spec.items.len();
        let visible = spec
            .items
            .iter()
            .enumerate()
            .map(|(i, it)| (it.name.clone(), i))
            .chain(spec.npcs.iter().enumerate().map(|(i, n)| (n.name.clone(), ni + i)))
            .collect();
        Encoder { rooms, items, facts, visible, offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.len == 0
    }

    /// Encodes an observation produced by the same world.
    pub fn encode(&self, obs: &Observation) -> Result<Vec<f64>, EngineError> {
        let o = self.offsets;
        let mut x = vec![0.0; o.len];
        let room = self
            .rooms
            .get(&obs.room_name)
            .ok_or_else(|| EngineError::UnknownName { kind: "room", name: obs.room_name.clone() })?;
        x[*room] = 1.0;
        for name in &obs.inventory_names {
            let i = self
                .items
                .get(name)
                .ok_or_else(|| EngineError::UnknownName { kind: "item", name: name.clone() })?;
            x[o.inventory + i] = 1.0;
        }
        for fact in &obs.facts {
            let i = self
                .facts
                .get(fact)
                .ok_or_else(|| EngineError::UnknownName { kind: "fact", name: fact.clone() })?;
            x[o.facts + i] = 1.0;
        }
        for name in &obs.visible {
            let i = self
                .visible
                .get(name)
                .ok_or_else(|| EngineError::UnknownName { kind: "entity", name: name.clone() })?;
            x[o.visible + i] = 1.0;
        }
        Ok(x)
    }

    /// Same vector as `encode(&spec.observe(state))` without building strings.
    pub fn encode_state(&self, spec: &WorldSpec, state: &WorldState) -> Vec<f64> {
        let o = self.offsets;
        let key = &state.key;
        let mut x = vec![0.0; o.len];
        x[key.agent_room] = 1.0;
        for (i, place) in key.item_locations.iter().enumerate() {
            match place {
                ItemPlace::Carried => x[o.inventory + i] = 1.0,
                ItemPlace::Room(r) if *r == key.agent_room => x[o.visible + i] = 1.0,
                _ => {}
            }
        }
        let nf = spec.flags.len();
        let nq = spec.quests.len();
        for f in key.flags.iter() {
            x[o.facts + f] = 1.0;
        }
        for q in key.completed_quests.iter() {
            x[o.facts + nf + q] = 1.0;
        }
        for q in key.invalidated_quests.iter() {
            x[o.facts + nf + nq + q] = 1.0;
        }
        let ni = spec.items.len();
        for (n, npc) in spec.npcs.iter().enumerate() {
            if npc.location == key.agent_room {
                x[o.visible + ni + n] = 1.0;
            }
        }
        x
    }
}

impl WorldSpec {
    pub fn encoder(&self) -> Encoder {
        Encoder::new(self)
    }

    pub fn encoding_len(&self) -> usize {
        Offsets::of(self).len
    }

    pub fn encode_observation(&self, obs: &Observation) -> Result<Vec<f64>, EngineError> {
        Encoder::new(self).encode(obs)
    }
}
