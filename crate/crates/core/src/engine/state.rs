use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{Condition, Effect, PenaltyEffect, WorldSpec};
use super::EngineError;

/// Fixed-width set of indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(pub u64);

impl Bits {
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |i| self.contains(*i))
    }

    pub fn is_disjoint(self, other: Bits) -> bool {
        self.0 & other.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ItemPlace {
    Room(usize),
    Carried,
    Gone,
}

/// The deterministic part of a world state: everything except the step
/// counter and the random stream. Two states with equal keys behave
/// identically for every future action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub agent_room: usize,
    pub item_locations: Vec<ItemPlace>,
    pub flags: Bits,
    pub completed_quests: Bits,
    pub invalidated_quests: Bits,
}

impl StateKey {
    pub fn initial(spec: &WorldSpec) -> StateKey {
        StateKey {
            agent_room: spec.start_room,
            item_locations: spec.items.iter().map(|i| ItemPlace::Room(i.location)).collect(),
            flags: Bits::default(),
            completed_quests: Bits::default(),
            invalidated_quests: Bits::default(),
        }
    }

    pub fn carries(&self, item: usize) -> bool {
        self.item_locations[item] == ItemPlace::Carried
    }

    pub fn inventory(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.item_locations.len()).filter(|i| self.carries(*i))
    }

    fn resolved(&self, quest: usize) -> bool {
        self.completed_quests.contains(quest) || self.invalidated_quests.contains(quest)
    }
}

/// A running episode.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub key: StateKey,
    pub step_count: u32,
    pub done: bool,
    pub failed: bool,
    pub last_message: Option<String>,
    rng: ChaCha8Rng,
}

impl WorldState {
    /// Draw index of the episode's random stream, for reproducibility checks.
    pub fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleAction {
    pub index: usize,
    pub id: String,
    pub command: String,
}

/// What the agent can see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub room_name: String,
    pub room_description: String,
    pub inventory_names: Vec<String>,
    /// Set flags, then completed quests, then lapsed quests.
    pub facts: Vec<String>,
    /// Items lying in the room and characters present.
    pub visible: Vec<String>,
    pub reactive_text: Option<String>,
    pub admissible: Vec<AdmissibleAction>,
}

impl Observation {
    pub fn admissible_indices(&self) -> Vec<usize> {
        self.admissible.iter().map(|a| a.index).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward_env: f64,
    pub done: bool,
    pub failed: bool,
}

/// Result of applying one action to a [`StateKey`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next: StateKey,
    pub reward: f64,
    pub failed: bool,
    pub goal_reached: bool,
    pub invalidated: Option<usize>,
}

pub(crate) fn fact_for_completed(name: &str) -> String {
    format!("Done: {name}")
}

pub(crate) fn fact_for_lapsed(name: &str) -> String {
    format!("Lapsed: {name}")
}

impl WorldSpec {
    pub fn holds(&self, key: &StateKey, c: &Condition) -> bool {
        match *c {
            Condition::InRoom(r) => key.agent_room == r,
            Condition::HasItem(i) => key.carries(i),
            Condition::LacksItem(i) => !key.carries(i),
            Condition::ItemIn { item, room } => key.item_locations[item] == ItemPlace::Room(room),
            Condition::Flag(f) => key.flags.contains(f),
            Condition::NotFlag(f) => !key.flags.contains(f),
            Condition::QuestDone(q) => key.completed_quests.contains(q),
            Condition::QuestNotDone(q) => !key.completed_quests.contains(q),
        }
    }

    pub fn all_hold(&self, key: &StateKey, cs: &[Condition]) -> bool {
        cs.iter().all(|c| self.holds(key, c))
    }

    fn open_exit(&self, key: &StateKey, direction: &str) -> Option<usize> {
        self.rooms[key.agent_room]
            .exits
            .iter()
            .find(|e| e.direction == direction && self.all_hold(key, &e.requires))
            .map(|e| e.to)
    }

    pub fn is_admissible(&self, key: &StateKey, action: usize) -> bool {
        let a = &self.actions[action];
        if let Some(dir) = &a.direction {
            if self.open_exit(key, dir).is_none() {
                return false;
            }
        }
        self.all_hold(key, &a.preconditions)
    }

    /// Indices of every action whose preconditions hold, in vocabulary order.
    pub fn admissible(&self, key: &StateKey) -> Vec<usize> {
        (0..self.actions.len()).filter(|a| self.is_admissible(key, *a)).collect()
    }

    pub fn is_failed(&self, key: &StateKey) -> bool {
        self.failure_states.iter().any(|f| self.all_hold(key, f))
    }

    pub fn is_goal(&self, key: &StateKey) -> bool {
        self.all_hold(key, &self.goal)
    }

    /// Quests a penalty hook may invalidate.
    pub fn eligible_subgoals(&self, key: &StateKey) -> Vec<usize> {
        (0..self.quests.len())
            .filter(|q| self.quests[*q].reward > 0.0 && !key.resolved(*q))
            .collect()
    }

    /// Reward still obtainable from `key`, assuming completion is reachable.
    pub fn remaining_reward(&self, key: &StateKey) -> f64 {
        self.eligible_subgoals(key).iter().map(|q| self.quests[*q].reward).sum::<f64>() + self.final_reward
    }

    /// Applies an admissible action. `pick` chooses among eligible subgoals
    /// when a penalty hook fires and receives their count.
    pub fn transition(
        &self,
        key: &StateKey,
        action: usize,
        pick: &mut dyn FnMut(usize) -> usize,
    ) -> Transition {
        let mut next = key.clone();
        let a = &self.actions[action];
        if let Some(dir) = &a.direction {
            if let Some(to) = self.open_exit(key, dir) {
                next.agent_room = to;
            }
        }
        for e in &a.effects {
            match *e {
                Effect::Take(i) => next.item_locations[i] = ItemPlace::Carried,
                Effect::Consume(i) => next.item_locations[i] = ItemPlace::Gone,
                Effect::SetFlag(f) => next.flags.insert(f),
                Effect::ClearFlag(f) => next.flags.remove(f),
                Effect::MoveTo(r) => next.agent_room = r,
            }
        }

        let mut invalidated = None;
        if let Some(h) = self.hook_of[action] {
            match self.penalty_hooks[h].effect {
                PenaltyEffect::InvalidateRandomSubgoal => {
                    let eligible = self.eligible_subgoals(&next);
                    if !eligible.is_empty() {
                        let q = eligible[pick(eligible.len())];
                        next.invalidated_quests.insert(q);
                        invalidated = Some(q);
                    }
                }
            }
        }

        if self.is_failed(&next) {
            return Transition { next, reward: 0.0, failed: true, goal_reached: false, invalidated };
        }

        let mut reward = 0.0;
        loop {
            let mut changed = false;
            for (qi, q) in self.quests.iter().enumerate() {
                if next.completed_quests.contains(qi)
                    || !q.after.iter().all(|p| next.resolved(*p))
                    || !self.all_hold(&next, &q.conditions)
                {
                    continue;
                }
                if next.invalidated_quests.contains(qi) {
                    continue;
                }
                next.completed_quests.insert(qi);
                reward += q.reward;
                changed = true;
            }
            if !changed {
                break;
            }
        }

        let goal_reached = self.is_goal(&next);
        if goal_reached {
            reward += self.final_reward;
        }
        Transition { next, reward, failed: false, goal_reached, invalidated }
    }

    /// Every possible result of `action`, one per penalty-hook choice.
    pub fn outcomes(&self, key: &StateKey, action: usize) -> Vec<Transition> {
        // effects never touch quest status, so eligibility can be read off `key`
        let n = if self.hook_of[action].is_some() {
            self.eligible_subgoals(key).len().max(1)
        } else {
            1
        };
        (0..n)
            .map(|choice| self.transition(key, action, &mut |_| choice))
            .collect()
    }

    pub fn reset(&self, seed: u64) -> (WorldState, Observation) {
        let state = WorldState {
            key: StateKey::initial(self),
            step_count: 0,
            done: false,
            failed: false,
            last_message: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let obs = self.observe(&state);
        (state, obs)
    }

    pub fn step(&self, state: &mut WorldState, action: usize) -> Result<StepOutcome, EngineError> {
        if state.done {
            return Err(EngineError::EpisodeOver);
        }
        if action >= self.actions.len() {
            return Err(EngineError::UnknownAction(action.to_string()));
        }
        if !self.is_admissible(&state.key, action) {
            return Err(EngineError::Inadmissible {
                action: self.actions[action].id.clone(),
                room: self.rooms[state.key.agent_room].id.clone(),
            });
        }
        let rng = &mut state.rng;
        let t = self.transition(&state.key, action, &mut |n| rng.gen_range(0..n));
        state.key = t.next;
        state.step_count += 1;
        state.failed = t.failed;
        state.done = t.failed || t.goal_reached || state.step_count >= self.max_steps;
        state.last_message = self.actions[action].message.clone();
        if !state.done && self.admissible(&state.key).is_empty() {
            return Err(EngineError::DeadEnd(self.rooms[state.key.agent_room].id.clone()));
        }
        Ok(StepOutcome {
            observation: self.observe(state),
            reward_env: t.reward,
            done: state.done,
            failed: state.failed,
        })
    }

    pub fn step_id(&self, state: &mut WorldState, action: &str) -> Result<StepOutcome, EngineError> {
        let ix = self
            .action_index(action)
            .ok_or_else(|| EngineError::UnknownAction(action.to_string()))?;
        self.step(state, ix)
    }

    pub fn observe(&self, state: &WorldState) -> Observation {
        let key = &state.key;
        let room = &self.rooms[key.agent_room];
        let mut facts: Vec<String> = key.flags.iter().map(|f| self.flags[f].fact.clone()).collect();
        facts.extend(key.completed_quests.iter().map(|q| fact_for_completed(&self.quests[q].name)));
        facts.extend(key.invalidated_quests.iter().map(|q| fact_for_lapsed(&self.quests[q].name)));
        let visible = self
            .items
            .iter()
            .enumerate()
            .filter(|(i, _)| key.item_locations[*i] == ItemPlace::Room(key.agent_room))
            .map(|(_, it)| it.name.clone())
            .chain(
                self.npcs
                    .iter()
                    .filter(|n| n.location == key.agent_room)
                    .map(|n| n.name.clone()),
            )
            .collect();
        let admissible = if state.done {
            Vec::new()
        } else {
            self.admissible(key)
                .into_iter()
                .map(|a| AdmissibleAction {
                    index: a,
                    id: self.actions[a].id.clone(),
                    command: self.actions[a].command_text.clone(),
                })
                .collect()
        };
        Observation {
            room_name: room.name.clone(),
            room_description: room.description.clone(),
            inventory_names: key.inventory().map(|i| self.items[i].name.clone()).collect(),
            facts,
            visible,
            reactive_text: state.last_message.clone(),
            admissible,
        }
    }
}
