//! World definition schema and validation.
//!
//! A world is authored as JSON ([`RawWorld`]) using string identifiers and
//! compiled into a [`WorldSpec`] whose conditions and effects refer to
//! entities by index.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::SpecError;

/// Highest supported `schema_version` for world files.
pub const WORLD_SCHEMA_VERSION: u32 = 1;

/// Bitsets in the engine are `u64`, which bounds these counts.
const MAX_BITSET: usize = 64;

/// Ground-truth labels attached to actions. Agents never see these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Task,
    Normative,
    NonNormative,
    Altruistic,
    FailureInducing,
    Neutral,
}

impl Tag {
    pub const ALL: [Tag; 6] = [
        Tag::Task,
        Tag::Normative,
        Tag::NonNormative,
        Tag::Altruistic,
        Tag::FailureInducing,
        Tag::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Task => "task",
            Tag::Normative => "normative",
            Tag::NonNormative => "non-normative",
            Tag::Altruistic => "altruistic",
            Tag::FailureInducing => "failure-inducing",
            Tag::Neutral => "neutral",
        }
    }
}

// ---------------------------------------------------------------------------
// Raw (file) representation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWorld {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub note: Option<String>,
    pub start_room: String,
    pub rooms: Vec<RawRoom>,
    #[serde(default)]
    pub items: Vec<RawItem>,
    #[serde(default)]
    pub npcs: Vec<RawNpc>,
    #[serde(default)]
    pub flags: Vec<RawFlag>,
    pub actions: Vec<RawAction>,
    #[serde(default)]
    pub quests: Vec<RawQuest>,
    pub goal: Vec<RawCondition>,
    pub final_reward: f64,
    #[serde(default)]
    pub failure_states: Vec<Vec<RawCondition>>,
    #[serde(default)]
    pub penalty_hooks: Vec<RawPenaltyHook>,
    pub max_steps: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRoom {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub exits: Vec<RawExit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExit {
    pub direction: String,
    pub to: String,
    #[serde(default)]
    pub requires: Vec<RawCondition>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawItem {
    pub id: String,
    pub name: String,
    pub location: String,
    #[serde(default = "default_true")]
    pub portable: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNpc {
    pub id: String,
    pub name: String,
    pub location: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFlag {
    pub id: String,
    pub fact: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAction {
    pub id: String,
    pub command: String,
    /// Present for locomotion actions; the destination comes from the exits.
    #[serde(default)]
    pub direction: Option<String>,
    #[serde(default)]
    pub preconditions: Vec<RawCondition>,
    #[serde(default)]
    pub effects: Vec<RawEffect>,
    #[serde(default)]
    pub message: Option<String>,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQuest {
    pub id: String,
    pub name: String,
    pub reward: f64,
    #[serde(default)]
    pub after: Vec<String>,
    pub conditions: Vec<RawCondition>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPenaltyHook {
    pub triggers: Vec<String>,
    pub effect: PenaltyEffect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyEffect {
    /// One uniformly chosen rewarded, uncompleted, not yet invalidated quest
    /// stops paying out.
    InvalidateRandomSubgoal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawCondition {
    InRoom(String),
    HasItem(String),
    LacksItem(String),
    ItemIn { item: String, room: String },
    Flag(String),
    NotFlag(String),
    QuestDone(String),
    QuestNotDone(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawEffect {
    Take(String),
    Consume(String),
    SetFlag(String),
    ClearFlag(String),
    MoveTo(String),
}

// ---------------------------------------------------------------------------
// Compiled representation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    InRoom(usize),
    HasItem(usize),
    LacksItem(usize),
    ItemIn { item: usize, room: usize },
    Flag(usize),
    NotFlag(usize),
    QuestDone(usize),
    QuestNotDone(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Take(usize),
    Consume(usize),
    SetFlag(usize),
    ClearFlag(usize),
    MoveTo(usize),
}

#[derive(Debug, Clone)]
pub struct Exit {
    pub direction: String,
    pub to: usize,
    pub requires: Vec<Condition>,
}

#[derive(Debug, Clone)]
pub struct Room {
    pub id: String,
    pub name: String,
    pub description: String,
    pub exits: Vec<Exit>,
}

#[derive(Debug, Clone)]
pub struct Item {
    pub id: String,
    pub name: String,
    pub location: usize,
    pub portable: bool,
}

#[derive(Debug, Clone)]
pub struct Npc {
    pub id: String,
    pub name: String,
    pub location: usize,
}

#[derive(Debug, Clone)]
pub struct FlagDef {
    pub id: String,
    pub fact: String,
}

#[derive(Debug, Clone)]
pub struct ActionDef {
    pub id: String,
    pub command_text: String,
    pub direction: Option<String>,
    pub preconditions: Vec<Condition>,
    pub effects: Vec<Effect>,
    pub message: Option<String>,
    pub tags: BTreeSet<Tag>,
}

impl ActionDef {
    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

#[derive(Debug, Clone)]
pub struct QuestDef {
    pub id: String,
    pub name: String,
    pub reward: f64,
    pub after: Vec<usize>,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone)]
pub struct PenaltyHook {
    pub triggers: Vec<usize>,
    pub effect: PenaltyEffect,
}

/// A validated world definition.
#[derive(Debug, Clone)]
pub struct WorldSpec {
    pub schema_version: u32,
    pub name: String,
    pub start_room: usize,
    pub rooms: Vec<Room>,
    pub items: Vec<Item>,
    pub npcs: Vec<Npc>,
    pub flags: Vec<FlagDef>,
    pub actions: Vec<ActionDef>,
    pub quests: Vec<QuestDef>,
    pub goal: Vec<Condition>,
    pub final_reward: f64,
    pub failure_states: Vec<Vec<Condition>>,
    pub penalty_hooks: Vec<PenaltyHook>,
    pub max_steps: u32,
    /// `hook_of[action]` is the index into `penalty_hooks` fired by that action.
    pub(crate) hook_of: Vec<Option<usize>>,
    action_ix: HashMap<String, usize>,
}

fn opposite(direction: &str) -> Option<&'static str> {
    Some(match direction {
        "north" => "south",
        "south" => "north",
        "east" => "west",
        "west" => "east",
        "up" => "down",
        "down" => "up",
        "in" => "out",
        "out" => "in",
        "northeast" => "southwest",
        "southwest" => "northeast",
        "northwest" => "southeast",
        "southeast" => "northwest",
        _ => return None,
    })
}

fn invalid(msg: impl Into<String>) -> SpecError {
    SpecError::Invalid(msg.into())
}

fn index_of(kind: &str, ids: &[&str], what: &str) -> Result<HashMap<String, usize>, SpecError> {
    let mut map = HashMap::new();
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() {
            return Err(invalid(format!("{kind} ids must be non-empty ({what})")));
        }
        if map.insert((*id).to_string(), i).is_some() {
            return Err(invalid(format!("duplicate {kind} id `{id}`")));
        }
    }
    Ok(map)
}

struct Resolver {
    rooms: HashMap<String, usize>,
    items: HashMap<String, usize>,
    flags: HashMap<String, usize>,
    quests: HashMap<String, usize>,
}

impl Resolver {
    fn get(map: &HashMap<String, usize>, kind: &str, id: &str, ctx: &str) -> Result<usize, SpecError> {
        map.get(id)
            .copied()
            .ok_or_else(|| invalid(format!("{ctx} references undefined {kind} `{id}`")))
    }

    fn room(&self, id: &str, ctx: &str) -> Result<usize, SpecError> {
        Self::get(&self.rooms, "room", id, ctx)
    }

    fn item(&self, id: &str, ctx: &str) -> Result<usize, SpecError> {
        Self::get(&self.items, "item", id, ctx)
    }

    fn flag(&self, id: &str, ctx: &str) -> Result<usize, SpecError> {
        Self::get(&self.flags, "flag", id, ctx)
    }

    fn quest(&self, id: &str, ctx: &str) -> Result<usize, SpecError> {
        Self::get(&self.quests, "quest", id, ctx)
    }

    fn condition(&self, c: &RawCondition, ctx: &str) -> Result<Condition, SpecError> {
        Ok(match c {
            RawCondition::InRoom(r) => Condition::InRoom(self.room(r, ctx)?),
            RawCondition::HasItem(i) => Condition::HasItem(self.item(i, ctx)?),
            RawCondition::LacksItem(i) => Condition::LacksItem(self.item(i, ctx)?),
            RawCondition::ItemIn { item, room } => Condition::ItemIn {
                item: self.item(item, ctx)?,
                room: self.room(room, ctx)?,
            },
            RawCondition::Flag(f) => Condition::Flag(self.flag(f, ctx)?),
            RawCondition::NotFlag(f) => Condition::NotFlag(self.flag(f, ctx)?),
            RawCondition::QuestDone(q) => Condition::QuestDone(self.quest(q, ctx)?),
            RawCondition::QuestNotDone(q) => Condition::QuestNotDone(self.quest(q, ctx)?),
        })
    }

    fn conditions(&self, cs: &[RawCondition], ctx: &str) -> Result<Vec<Condition>, SpecError> {
        cs.iter().map(|c| self.condition(c, ctx)).collect()
    }

    fn effect(&self, e: &RawEffect, ctx: &str) -> Result<Effect, SpecError> {
        Ok(match e {
            RawEffect::Take(i) => Effect::Take(self.item(i, ctx)?),
            RawEffect::Consume(i) => Effect::Consume(self.item(i, ctx)?),
            RawEffect::SetFlag(f) => Effect::SetFlag(self.flag(f, ctx)?),
            RawEffect::ClearFlag(f) => Effect::ClearFlag(self.flag(f, ctx)?),
            RawEffect::MoveTo(r) => Effect::MoveTo(self.room(r, ctx)?),
        })
    }
}

fn check_reward(value: f64, ctx: &str) -> Result<(), SpecError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{ctx}: reward must be finite and >= 0, got {value}")))
    }
}

impl WorldSpec {
    /// Parses and validates a world file.
    pub fn from_json(text: &str) -> Result<WorldSpec, SpecError> {
        let raw: RawWorld = serde_json::from_str(text).map_err(|e| SpecError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        WorldSpec::compile(&raw)
    }

    /// Validates a parsed world and resolves identifiers to indices.
    pub fn compile(raw: &RawWorld) -> Result<WorldSpec, SpecError> {
        if raw.schema_version == 0 || raw.schema_version > WORLD_SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {} (expected 1..={WORLD_SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if raw.rooms.is_empty() {
            return Err(invalid("connected graph required: world has no rooms"));
        }
        if raw.max_steps == 0 {
            return Err(invalid("max_steps must be >= 1"));
        }
        for (kind, n) in [
            ("items", raw.items.len()),
            ("flags", raw.flags.len()),
            ("quests", raw.quests.len()),
        ] {
            if n > MAX_BITSET {
                return Err(invalid(format!("at most {MAX_BITSET} {kind} are supported")));
            }
        }

        let room_ids: Vec<&str> = raw.rooms.iter().map(|r| r.id.as_str()).collect();
        let item_ids: Vec<&str> = raw.items.iter().map(|r| r.id.as_str()).collect();
        let npc_ids: Vec<&str> = raw.npcs.iter().map(|r| r.id.as_str()).collect();
        let flag_ids: Vec<&str> = raw.flags.iter().map(|r| r.id.as_str()).collect();
        let action_ids: Vec<&str> = raw.actions.iter().map(|r| r.id.as_str()).collect();
        let quest_ids: Vec<&str> = raw.quests.iter().map(|r| r.id.as_str()).collect();
        let resolver = Resolver {
            rooms: index_of("room", &room_ids, "rooms")?,
            items: index_of("item", &item_ids, "items")?,
            flags: index_of("flag", &flag_ids, "flags")?,
            quests: index_of("quest", &quest_ids, "quests")?,
        };
        index_of("npc", &npc_ids, "npcs")?;
        let action_ix = index_of("action", &action_ids, "actions")?;

        // Observation decoding maps display strings back to indices.
        unique_strings("room name", raw.rooms.iter().map(|r| r.name.as_str()))?;
        unique_strings(
            "entity name",
            raw.items.iter().map(|i| i.name.as_str()).chain(raw.npcs.iter().map(|n| n.name.as_str())),
        )?;
        unique_strings(
            "fact",
            raw.flags
                .iter()
                .map(|f| f.fact.as_str())
                .chain(raw.quests.iter().map(|q| q.name.as_str())),
        )?;

        let start_room = resolver.room(&raw.start_room, "start_room")?;

        let mut rooms = Vec::with_capacity(raw.rooms.len());
        for r in &raw.rooms {
            let ctx = format!("room `{}`", r.id);
            let mut seen = HashSet::new();
            let mut exits = Vec::new();
            for e in &r.exits {
                if opposite(&e.direction).is_none() {
                    return Err(invalid(format!("{ctx}: unknown direction `{}`", e.direction)));
                }
                if !seen.insert(e.direction.as_str()) {
                    return Err(invalid(format!("{ctx}: duplicate exit `{}`", e.direction)));
                }
                exits.push(Exit {
                    direction: e.direction.clone(),
                    to: resolver.room(&e.to, &ctx)?,
                    requires: resolver.conditions(&e.requires, &ctx)?,
                });
            }
            rooms.push(Room {
                id: r.id.clone(),
                name: r.name.clone(),
                description: r.description.clone(),
                exits,
            });
        }
        check_connections(&rooms)?;

        let items = raw
            .items
            .iter()
            .map(|i| {
                Ok(Item {
                    id: i.id.clone(),
                    name: i.name.clone(),
                    location: resolver.room(&i.location, &format!("item `{}`", i.id))?,
                    portable: i.portable,
                })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        let npcs = raw
            .npcs
            .iter()
            .map(|n| {
                Ok(Npc {
                    id: n.id.clone(),
                    name: n.name.clone(),
                    location: resolver.room(&n.location, &format!("npc `{}`", n.id))?,
                })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        let flags = raw
            .flags
            .iter()
            .map(|f| {
                if f.fact.trim().is_empty() {
                    return Err(invalid(format!("flag `{}` needs a fact text", f.id)));
                }
                Ok(FlagDef { id: f.id.clone(), fact: f.fact.clone() })
            })
            .collect::<Result<Vec<_>, SpecError>>()?;

        let directions: BTreeSet<&str> =
            rooms.iter().flat_map(|r| r.exits.iter().map(|e| e.direction.as_str())).collect();
        let mut covered = BTreeSet::new();
        let mut actions = Vec::with_capacity(raw.actions.len());
        for a in &raw.actions {
            let ctx = format!("action `{}`", a.id);
            if a.command.trim().is_empty() {
                return Err(invalid(format!("{ctx}: empty command text")));
            }
            if let Some(dir) = &a.direction {
                if !directions.contains(dir.as_str()) {
                    return Err(invalid(format!("{ctx}: no room has a `{dir}` exit")));
                }
                if !covered.insert(dir.clone()) {
                    return Err(invalid(format!("{ctx}: second locomotion action for `{dir}`")));
                }
            }
            let effects = a
                .effects
                .iter()
                .map(|e| resolver.effect(e, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            for e in &effects {
                if let Effect::Take(i) = e {
                    if !raw.items[*i].portable {
                        return Err(invalid(format!("{ctx}: takes non-portable item `{}`", raw.items[*i].id)));
                    }
                }
            }
            actions.push(ActionDef {
                id: a.id.clone(),
                command_text: a.command.clone(),
                direction: a.direction.clone(),
                preconditions: resolver.conditions(&a.preconditions, &ctx)?,
                effects,
                message: a.message.clone(),
                tags: a.tags.clone(),
            });
        }
        if let Some(missing) = directions.iter().find(|d| !covered.contains(**d)) {
            return Err(invalid(format!("exit direction `{missing}` has no locomotion action")));
        }

        let mut quests = Vec::with_capacity(raw.quests.len());
        for (qi, q) in raw.quests.iter().enumerate() {
            let ctx = format!("quest `{}`", q.id);
            check_reward(q.reward, &ctx)?;
            let after = q
                .after
                .iter()
                .map(|p| {
                    let pi = resolver.quest(p, &ctx)?;
                    if pi >= qi {
                        return Err(invalid(format!("{ctx}: prerequisite `{p}` must be listed earlier")));
                    }
                    Ok(pi)
                })
                .collect::<Result<Vec<_>, _>>()?;
            quests.push(QuestDef {
                id: q.id.clone(),
                name: q.name.clone(),
                reward: q.reward,
                after,
                conditions: resolver.conditions(&q.conditions, &ctx)?,
            });
        }
        check_reward(raw.final_reward, "final_reward")?;
        if raw.goal.is_empty() {
            return Err(invalid("goal must contain at least one condition"));
        }
        let goal = resolver.conditions(&raw.goal, "goal")?;
        let failure_states = raw
            .failure_states
            .iter()
            .map(|f| {
                if f.is_empty() {
                    return Err(invalid("failure state with no conditions would always hold"));
                }
                resolver.conditions(f, "failure_states")
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut hook_of = vec![None; actions.len()];
        let mut penalty_hooks = Vec::new();
        for (hi, h) in raw.penalty_hooks.iter().enumerate() {
            let mut triggers = Vec::new();
            for t in &h.triggers {
                let ai = *action_ix
                    .get(t)
                    .ok_or_else(|| invalid(format!("penalty hook references undefined action `{t}`")))?;
                if hook_of[ai].replace(hi).is_some() {
                    return Err(invalid(format!("action `{t}` triggers more than one penalty hook")));
                }
                triggers.push(ai);
            }
            penalty_hooks.push(PenaltyHook { triggers, effect: h.effect });
        }

        Ok(WorldSpec {
            schema_version: raw.schema_version,
            name: raw.name.clone(),
            start_room,
            rooms,
            items,
            npcs,
            flags,
            actions,
            quests,
            goal,
            final_reward: raw.final_reward,
            failure_states,
            penalty_hooks,
            max_steps: raw.max_steps,
            hook_of,
            action_ix,
        })
    }

    pub fn action_index(&self, id: &str) -> Option<usize> {
        self.action_ix.get(id).copied()
    }

    pub fn action(&self, id: &str) -> Option<&ActionDef> {
        self.action_index(id).map(|i| &self.actions[i])
    }

    /// Size of the global action vocabulary.
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// Sum of every quest reward plus the completion reward.
    pub fn max_total_reward(&self) -> f64 {
        self.quests.iter().map(|q| q.reward).sum::<f64>() + self.final_reward
    }

    pub fn is_hook_trigger(&self, action: usize) -> bool {
        self.hook_of[action].is_some()
    }
}

fn unique_strings<'a>(kind: &str, values: impl Iterator<Item = &'a str>) -> Result<(), SpecError> {
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(v) {
            return Err(invalid(format!("duplicate {kind} `{v}`")));
        }
    }
    Ok(())
}

fn check_connections(rooms: &[Room]) -> Result<(), SpecError> {
    for (ri, room) in rooms.iter().enumerate() {
        for exit in &room.exits {
            let back = opposite(&exit.direction).expect("direction checked");
            let ok = rooms[exit.to].exits.iter().any(|e| e.direction == back && e.to == ri);
            if !ok {
                return Err(invalid(format!(
                    "asymmetric connection: `{}` {} -> `{}` has no {back} exit back",
                    room.id, exit.direction, rooms[exit.to].id
                )));
            }
        }
    }
    let mut seen = vec![false; rooms.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(r) = queue.pop_front() {
        for e in &rooms[r].exits {
            if !seen[e.to] {
                seen[e.to] = true;
                queue.push_back(e.to);
            }
        }
    }
    if let Some(lonely) = seen.iter().position(|s| !s) {
        return Err(invalid(format!(
            "connected graph required: room `{}` is unreachable",
            rooms[lonely].id
        )));
    }
    Ok(())
}
