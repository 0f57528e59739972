//! Bundled scenarios and action elaborations.
//!
//! Each scenario directory holds `world.json` (the [`WorldSpec`]),
//! `elaborations.json` (three descriptive phrases per action) and
//! `labels.json` (corrections to the derived metric labels).

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{SpecError, WorldSpec};

/// Phrases per action.
pub const PHRASES_PER_ACTION: usize = 3;
pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WorldsError {
    #[error("unknown scenario `{0}` (expected playground, superhero or clerk)")]
    UnknownScenario(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{file}: {message}")]
    Format { file: String, message: String },
    #[error("no elaboration for action `{0}`")]
    MissingElaboration(String),
    #[error("phrase index {0} out of range (0..{PHRASES_PER_ACTION})")]
    PhraseIndex(usize),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Playground,
    Superhero,
    Clerk,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Playground, Scenario::Superhero, Scenario::Clerk];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Playground => "playground",
            Scenario::Superhero => "superhero",
            Scenario::Clerk => "clerk",
        }
    }

    /// Episode budget used for each world's training runs.
    pub fn default_episodes(self) -> usize {
        match self {
            Scenario::Playground => 4000,
            Scenario::Superhero => 2500,
            Scenario::Clerk => 1000,
        }
    }

    fn sources(self) -> (&'static str, &'static str, &'static str) {
        match self {
            Scenario::Playground => (
                include_str!("../../data/playground/world.json"),
                include_str!("../../data/playground/elaborations.json"),
                include_str!("../../data/playground/labels.json"),
            ),
            Scenario::Superhero => (
                include_str!("../../data/superhero/world.json"),
                include_str!("../../data/superhero/elaborations.json"),
                include_str!("../../data/superhero/labels.json"),
            ),
            Scenario::Clerk => (
                include_str!("../../data/clerk/world.json"),
                include_str!("../../data/clerk/elaborations.json"),
                include_str!("../../data/clerk/labels.json"),
            ),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = WorldsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "playground" => Ok(Scenario::Playground),
            "superhero" => Ok(Scenario::Superhero),
            "clerk" => Ok(Scenario::Clerk),
            _ => Err(WorldsError::UnknownScenario(s.to_string())),
        }
    }
}

/// Metric label an action can be assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Task,
    Normative,
    Failure,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElaborationSet {
    pub action: usize,
    pub phrases: [String; PHRASES_PER_ACTION],
    /// Phrase indices deliberately worded against the action's intent.
    pub misleading: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub scenario: Option<Scenario>,
    pub spec: WorldSpec,
    /// Indexed by action.
    pub elaborations: Vec<ElaborationSet>,
    pub label_overrides: Vec<(usize, LabelClass)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElaborationMode {
    /// Draw one of the three phrases uniformly every time.
    Uniform,
    /// Always use phrase `k`.
    Fixed(usize),
}

impl fmt::Display for ElaborationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElaborationMode::Uniform => f.write_str("uniform"),
            ElaborationMode::Fixed(k) => write!(f, "fixed{k}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElaborationFile {
    schema_version: u32,
    #[allow(dead_code)]
    scenario: String,
    #[allow(dead_code)]
    note: Option<String>,
    elaborations: Vec<ElaborationRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ElaborationRecord {
    action: String,
    phrases: Vec<String>,
    #[serde(default)]
    misleading: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelFile {
    schema_version: u32,
    #[allow(dead_code)]
    scenario: String,
    #[serde(default)]
    overrides: Vec<LabelRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelRecord {
    action: String,
    label: LabelClass,
}

fn format_err(file: &str, message: impl Into<String>) -> WorldsError {
    WorldsError::Format { file: file.to_string(), message: message.into() }
}

impl ScenarioBundle {
    pub fn from_sources(world: &str, elaborations: &str, labels: &str) -> Result<ScenarioBundle, WorldsError> {
        let spec = WorldSpec::from_json(world)?;

        let file: ElaborationFile = serde_json::from_str(elaborations).map_err(|e| format_err("elaborations", e.to_string()))?;
        if file.schema_version != BUNDLE_SCHEMA_VERSION {
            return Err(format_err("elaborations", format!("unsupported schema_version {}", file.schema_version)));
        }
        let mut slots: Vec<Option<ElaborationSet>> = vec![None; spec.num_actions()];
        for rec in file.elaborations {
            let ix = spec
                .action_index(&rec.action)
                .ok_or_else(|| format_err("elaborations", format!("unknown action `{}`", rec.action)))?;
            if slots[ix].is_some() {
                return Err(format_err("elaborations", format!("duplicate entry for `{}`", rec.action)));
            }
            let phrases: [String; PHRASES_PER_ACTION] = rec.phrases.try_into().map_err(|p: Vec<String>| {
                format_err("elaborations", format!("`{}` has {} phrases, expected {PHRASES_PER_ACTION}", rec.action, p.len()))
            })?;
            if phrases.iter().any(|p| p.trim().is_empty()) {
                return Err(format_err("elaborations", format!("`{}` has an empty phrase", rec.action)));
            }
            if let Some(bad) = rec.misleading.iter().find(|k| **k >= PHRASES_PER_ACTION) {
                return Err(WorldsError::PhraseIndex(*bad));
            }
            slots[ix] = Some(ElaborationSet { action: ix, phrases, misleading: rec.misleading });
        }
        let elaborations = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| WorldsError::MissingElaboration(spec.actions[i].id.clone())))
            .collect::<Result<Vec<_>, _>>()?;

        let file: LabelFile = serde_json::from_str(labels).map_err(|e| format_err("labels", e.to_string()))?;
        if file.schema_version != BUNDLE_SCHEMA_VERSION {
            return Err(format_err("labels", format!("unsupported schema_version {}", file.schema_version)));
        }
        let label_overrides = file
            .overrides
            .into_iter()
            .map(|r| {
                spec.action_index(&r.action)
                    .map(|ix| (ix, r.label))
                    .ok_or_else(|| format_err("labels", format!("unknown action `{}`", r.action)))
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(ScenarioBundle { scenario: None, spec, elaborations, label_overrides })
    }

    /// Loads `world.json`, `elaborations.json` and `labels.json` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<ScenarioBundle, WorldsError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| WorldsError::Io { path: path.display().to_string(), source })
        };
        let mut bundle = Self::from_sources(&read("world.json")?, &read("elaborations.json")?, &read("labels.json")?)?;
        bundle.scenario = bundle.spec.name.parse().ok();
        Ok(bundle)
    }

    pub fn phrases(&self, action: usize) -> Result<&[String; PHRASES_PER_ACTION], WorldsError> {
        self.elaborations
            .get(action)
            .map(|e| &e.phrases)
            .ok_or_else(|| WorldsError::MissingElaboration(action.to_string()))
    }

    /// Every phrase in the bundle, in action order.
    pub fn all_phrases(&self) -> impl Iterator<Item = (usize, usize, &str)> {
        self.elaborations
            .iter()
            .flat_map(|e| e.phrases.iter().enumerate().map(move |(k, p)| (e.action, k, p.as_str())))
    }

    /// Phrases marked as worded against their action's intent.
    pub fn misleading_phrases(&self) -> Vec<&str> {
        self.elaborations
            .iter()
            .flat_map(|e| e.misleading.iter().map(move |k| e.phrases[*k].as_str()))
            .collect()
    }

    /// Misleading phrases at a single phrase index.
    pub fn misleading_at(&self, k: usize) -> Vec<&str> {
        self.elaborations
            .iter()
            .filter(|e| e.misleading.contains(&k))
            .map(|e| e.phrases[k].as_str())
            .collect()
    }

    /// Phrase index for `action` under `mode`.
    pub fn draw_index<R: Rng + ?Sized>(&self, mode: ElaborationMode, rng: &mut R) -> Result<usize, WorldsError> {
        match mode {
            ElaborationMode::Uniform => Ok(rng.gen_range(0..PHRASES_PER_ACTION)),
            ElaborationMode::Fixed(k) if k < PHRASES_PER_ACTION => Ok(k),
            ElaborationMode::Fixed(k) => Err(WorldsError::PhraseIndex(k)),
        }
    }
}

/// Returns a bundled scenario.
pub fn scenario(scenario: Scenario) -> ScenarioBundle {
    let (w, e, l) = scenario.sources();
    let mut bundle = ScenarioBundle::from_sources(w, e, l).expect("bundled scenario data is valid");
    bundle.scenario = Some(scenario);
    bundle
}

/// Looks up a bundled scenario by name.
pub fn scenario_by_name(name: &str) -> Result<ScenarioBundle, WorldsError> {
    Ok(scenario(name.parse()?))
}

/// Elaboration text for `action`.
pub fn elaborate<'a, R: Rng + ?Sized>(
    bundle: &'a ScenarioBundle,
    action: usize,
    mode: ElaborationMode,
    rng: &mut R,
) -> Result<&'a str, WorldsError> {
    let phrases = bundle.phrases(action)?;
    let k = bundle.draw_index(mode, rng)?;
    Ok(&phrases[k])
}
