//! Experiment orchestration: label derivation, metrics, multi-iteration
//! runs and plot-ready exports.
//!
//! [`run_experiment`] trains every (strategy, phrase set, iteration) job,
//! averages the per-episode series across iterations and smooths them with
//! a trailing window. [`ExperimentResult::write`] exports raw per-episode
//! records alongside the derived curves, so the curves can be recomputed
//! from the raw files.

mod export;
mod labels;
mod metrics;
mod play;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use labels::{derive_labels, label_report, ActionLabels, Disagreement, LabelReport, NamedLabels};
pub use play::play;
pub use metrics::{
    final_value, normalized_env_score, normative_ratio, pointwise_mean, present, ratio, sliding_window, LabelCounts,
    MetricsSeries, RatioKind, DEFAULT_WINDOW,
};

use crate::agent::{train, AgentConfig, AgentError, EpisodeSummary, ShapedGradient, ShapingStrategy, StrategyKind};
use crate::neural::ActorHead;
use crate::prior::{NormativePrior, OracleConfig, PriorChoice, PriorError, Valence};
use crate::worlds::{scenario, ElaborationMode, LabelClass, Scenario, ScenarioBundle, WorldsError, PHRASES_PER_ACTION};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("label derivation failed: {0}")]
    Labels(String),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Worlds(#[from] WorldsError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Learning rate the presets train with.
pub const PRESET_LR: f64 = 3e-4;
/// Shrinks rewards before they reach the loss.
pub const PRESET_REWARD_SCALE: f64 = 0.1;
/// Oracle pair for actions that are neither normative nor non-normative.
pub const PRESET_NEUTRAL: Valence = Valence::new(0.2, 0.0);

pub fn preset_oracle() -> OracleConfig {
    OracleConfig { neutral: PRESET_NEUTRAL, ..OracleConfig::default() }
}

/// Agent settings used by every experiment preset. Differs from
/// [`AgentConfig::default`] in learning rate, reward scale, actor head,
/// shaped gradient and oracle neutral pair.
pub fn preset_agent(scenario: Scenario, strategy: StrategyKind, seed: u64) -> AgentConfig {
    AgentConfig {
        lr: PRESET_LR,
        reward_scale: PRESET_REWARD_SCALE,
        head: ActorHead::Softplus,
        shaped_gradient: ShapedGradient::Raw,
        prior: PriorChoice::Oracle(preset_oracle()),
        ..AgentConfig::for_scenario(scenario, strategy, seed)
    }
}

pub fn default_ratio_kind(scenario: Option<Scenario>) -> RatioKind {
    match scenario {
        Some(Scenario::Superhero) => RatioKind::PathFamily,
        _ => RatioKind::Task,
    }
}

/// Parses `oracle`, `lexicon`, `lexicon:PATH` or `table:PATH`. `oracle`
/// means [`preset_oracle`].
pub fn parse_prior(s: &str) -> Result<PriorChoice, HarnessError> {
    let (mode, path) = match s.split_once(':') {
        Some((m, p)) => (m, Some(PathBuf::from(p))),
        None => (s, None),
    };
    match (mode, path) {
        ("oracle", None) => Ok(PriorChoice::Oracle(preset_oracle())),
        ("lexicon", path) => Ok(PriorChoice::Lexicon { path }),
        ("table", Some(path)) => Ok(PriorChoice::Table { path }),
        _ => Err(HarnessError::Config(format!("bad prior `{s}` (oracle, lexicon[:PATH] or table:PATH)"))),
    }
}

/// Parses `uniform` or a phrase index.
pub fn parse_phrase_set(s: &str) -> Result<ElaborationMode, HarnessError> {
    if s == "uniform" {
        return Ok(ElaborationMode::Uniform);
    }
    match s.parse::<usize>() {
        Ok(k) if k < PHRASES_PER_ACTION => Ok(ElaborationMode::Fixed(k)),
        Ok(k) => Err(WorldsError::PhraseIndex(k).into()),
        Err(_) => Err(HarnessError::Config(format!("bad phrase set `{s}` (uniform or 0..{PHRASES_PER_ACTION})"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseMode {
    Uniform,
    /// One group per phrase index, each always using that phrase.
    Sets(Vec<usize>),
}

fn default_iterations() -> usize {
    5
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub strategies: Vec<StrategyKind>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// One seed per iteration; empty means `0..iterations`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub prior: Option<PriorChoice>,
    #[serde(default = "phrase_uniform")]
    pub phrase: PhraseMode,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub episodes: Option<usize>,
    /// Hyperparameter template. Strategy kind, seed, prior and elaboration
    /// mode are set per job. `None` uses [`preset_agent`].
    #[serde(default)]
    pub agent: Option<AgentConfig>,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

fn phrase_uniform() -> PhraseMode {
    PhraseMode::Uniform
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, strategies: Vec<StrategyKind>) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            strategies,
            iterations: default_iterations(),
            seeds: Vec::new(),
            prior: None,
            phrase: PhraseMode::Uniform,
            window: DEFAULT_WINDOW,
            episodes: None,
            agent: None,
            out: None,
        }
    }

    /// Presets 1 and 2 train all four strategies on `scenario` (the first
    /// reads the score curves, the second the ratio curves). Preset 3 trains
    /// GgMix on each fixed phrase set with the oracle reversing every phrase
    /// marked misleading.
    pub fn preset(n: u8, scenario_: Scenario) -> Result<ExperimentConfig, HarnessError> {
        match n {
            1 | 2 => Ok(ExperimentConfig::new(scenario_, StrategyKind::ALL.to_vec())),
            3 => {
                let bundle = scenario(scenario_);
                let flip = bundle.misleading_phrases().into_iter().map(str::to_string).collect();
                Ok(ExperimentConfig {
                    prior: Some(PriorChoice::Oracle(OracleConfig { flip, ..preset_oracle() })),
                    phrase: PhraseMode::Sets((0..PHRASES_PER_ACTION).collect()),
                    ..ExperimentConfig::new(scenario_, vec![StrategyKind::GgMix])
                })
            }
            _ => Err(HarnessError::Config(format!("no preset {n} (expected 1, 2 or 3)"))),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.iterations as u64).collect()
        } else {
            self.seeds.clone()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        let seeds = self.seeds();
        if seeds.len() != self.iterations {
            return bad(format!("{} seeds for {} iterations", seeds.len(), self.iterations));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.strategies.is_empty() {
            return bad("no strategies".into());
        }
        if self.window == 0 {
            return bad("window must be at least 1".into());
        }
        if let PhraseMode::Sets(sets) = &self.phrase {
            if sets.is_empty() {
                return bad("empty phrase-set list".into());
            }
            if let Some(k) = sets.iter().find(|k| **k >= PHRASES_PER_ACTION) {
                return Err(WorldsError::PhraseIndex(*k).into());
            }
        }
        Ok(())
    }

    pub fn groups(&self) -> Vec<GroupKey> {
        let sets: Vec<Option<usize>> = match &self.phrase {
            PhraseMode::Uniform => vec![None],
            PhraseMode::Sets(s) => s.iter().map(|k| Some(*k)).collect(),
        };
        self.strategies
            .iter()
            .flat_map(|s| sets.iter().map(move |k| GroupKey { strategy: *s, phrase_set: *k }))
            .collect()
    }

    /// Agent config for one job.
    pub fn job_config(&self, group: GroupKey, seed: u64) -> AgentConfig {
        let template = self.agent.clone().unwrap_or_else(|| preset_agent(self.scenario, group.strategy, seed));
        let mut cfg = AgentConfig {
            seed,
            strategy: ShapingStrategy { kind: group.strategy, prior_scale: template.strategy.prior_scale },
            elaboration: group.phrase_set.map_or(ElaborationMode::Uniform, ElaborationMode::Fixed),
            ..template
        };
        if let Some(p) = &self.prior {
            cfg.prior = p.clone();
        }
        if let Some(e) = self.episodes {
            cfg.episodes = e;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupKey {
    pub strategy: StrategyKind,
    pub phrase_set: Option<usize>,
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.phrase_set {
            Some(k) => write!(f, "{}/set{k}", self.strategy),
            None => write!(f, "{}", self.strategy),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobResult {
    pub group: GroupKey,
    pub iteration: usize,
    pub seed: u64,
    pub episodes: Vec<EpisodeSummary>,
    pub evals: Vec<EpisodeSummary>,
    pub prior_calls: u64,
}

/// Iteration-averaged curves of one group.
#[derive(Debug, Clone)]
pub struct GroupCurves {
    pub key: GroupKey,
    pub mean: MetricsSeries,
    pub env_smoothed: Vec<Option<f64>>,
    /// Relative to the running maximum over every group.
    pub normalized: Vec<Option<f64>>,
    pub normalized_smoothed: Vec<Option<f64>>,
    pub ratio_smoothed: Vec<Option<f64>>,
    pub altruistic_smoothed: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub strategy: StrategyKind,
    pub phrase_set: Option<usize>,
    pub final_env_score: Option<f64>,
    pub final_normalized: Option<f64>,
    pub final_ratio: Option<f64>,
    pub final_altruistic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValenceRow {
    pub action: String,
    pub label: LabelClass,
    pub phrase: usize,
    pub misleading: bool,
    pub sentence: String,
    pub l_norm: f64,
    pub l_nonnorm: f64,
    pub score: f64,
    pub p_norm: f64,
}

/// Classifies every phrase of the bundle with a fresh prior.
pub fn valence_dump(
    bundle: &ScenarioBundle,
    prior: &mut dyn NormativePrior,
    labels: &ActionLabels,
) -> Result<Vec<ValenceRow>, HarnessError> {
    let mut rows = Vec::new();
    for (action, k, sentence) in bundle.all_phrases() {
        let v = prior.classify(sentence)?;
        rows.push(ValenceRow {
            action: bundle.spec.actions[action].id.clone(),
            label: labels.class(action),
            phrase: k,
            misleading: bundle.elaborations[action].misleading.contains(&k),
            sentence: sentence.to_string(),
            l_norm: v.l_norm,
            l_nonnorm: v.l_nonnorm,
            score: v.score(),
            p_norm: v.p_norm(),
        });
    }
    Ok(rows)
}

pub fn write_valence(path: &std::path::Path, rows: &[ValenceRow]) -> Result<(), HarnessError> {
    export::write_valence(path, rows)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub world: String,
    pub labels: LabelReport,
    pub ratio_kind: RatioKind,
    pub jobs: Vec<JobResult>,
    pub groups: Vec<GroupCurves>,
    pub valence: Vec<ValenceRow>,
}

impl ExperimentResult {
    pub fn group(&self, strategy: StrategyKind, phrase_set: Option<usize>) -> Option<&GroupCurves> {
        self.groups.iter().find(|g| g.key == GroupKey { strategy, phrase_set })
    }

    pub fn summary(&self) -> Vec<GroupSummary> {
        self.groups
            .iter()
            .map(|g| GroupSummary {
                strategy: g.key.strategy,
                phrase_set: g.key.phrase_set,
                final_env_score: final_value(&g.env_smoothed),
                final_normalized: final_value(&g.normalized_smoothed),
                final_ratio: final_value(&g.ratio_smoothed),
                final_altruistic: final_value(&g.altruistic_smoothed),
            })
            .collect()
    }

    pub fn summary_of(&self, strategy: StrategyKind, phrase_set: Option<usize>) -> Option<GroupSummary> {
        self.summary().into_iter().find(|s| s.strategy == strategy && s.phrase_set == phrase_set)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    run_experiment_with(&scenario(config.scenario), config)
}

/// Runs `config` against a caller-supplied bundle and writes the exports
/// when `config.out` is set.
pub fn run_experiment_with(bundle: &ScenarioBundle, config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let report = label_report(bundle)?;
    let kind = default_ratio_kind(bundle.scenario);
    let seeds = config.seeds();
    let groups = config.groups();
    let specs: Vec<(GroupKey, usize, u64)> = groups
        .iter()
        .flat_map(|g| seeds.iter().enumerate().map(move |(i, s)| (*g, i, *s)))
        .collect();

    let jobs = specs
        .par_iter()
        .map(|&(group, iteration, seed)| {
            let run = train(bundle, &config.job_config(group, seed))?;
            Ok(JobResult { group, iteration, seed, episodes: run.episodes, evals: run.evals, prior_calls: run.prior_calls })
        })
        .collect::<Result<Vec<JobResult>, HarnessError>>()?;

    let means: Vec<MetricsSeries> = groups
        .iter()
        .map(|g| {
            let runs: Vec<MetricsSeries> = jobs
                .iter()
                .filter(|j| j.group == *g)
                .map(|j| MetricsSeries::from_episodes(&j.episodes, &report.labels, &bundle.spec, kind))
                .collect();
            MetricsSeries::mean(&runs)
        })
        .collect();
    let scores: Vec<Vec<f64>> = means.iter().map(|m| m.env_score.clone()).collect();
    let normalized = normalized_env_score(&scores);
    let w = config.window;
    let curves = groups
        .iter()
        .zip(means)
        .zip(normalized)
        .map(|((key, mean), normalized)| GroupCurves {
            key: *key,
            env_smoothed: sliding_window(&present(&mean.env_score), w),
            normalized_smoothed: sliding_window(&normalized, w),
            ratio_smoothed: sliding_window(&mean.ratio, w),
            altruistic_smoothed: sliding_window(&present(&mean.n_altruistic), w),
            normalized,
            mean,
        })
        .collect();

    let mut prior = config.job_config(groups[0], seeds[0]).prior.build(bundle)?;
    let valence = valence_dump(bundle, &mut prior, &report.labels)?;

    let result = ExperimentResult {
        config: config.clone(),
        world: bundle.spec.name.clone(),
        labels: report,
        ratio_kind: kind,
        jobs,
        groups: curves,
        valence,
    };
    if let Some(dir) = &config.out {
        result.write(dir, &bundle.spec)?;
    }
    Ok(result)
}
