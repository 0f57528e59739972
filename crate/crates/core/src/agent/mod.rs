//! Training loop tying a world, a normative prior and the actor-critic
//! network together under one of four strategies.

mod strategy;

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use strategy::{
    argmax_masked, behaviour_logits, rerank_logits, sample_index, select_action, shape_reward, ShapingStrategy,
    StrategyKind,
};

use crate::engine::{EngineError, Tag};
use crate::neural::{a2c_update, ActorHead, AdamState, LossConfig, LossStats, NeuralError, PolicyNet, Step};
use crate::prior::{NormativePrior, PriorChoice, PriorError, Valence};
use crate::worlds::{ElaborationMode, Scenario, ScenarioBundle, WorldsError};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("unknown strategy `{0}` (expected baseline, gg-pos, gg-mix or gg-shaped)")]
    UnknownStrategy(String),
    #[error("length mismatch: {logits} logits, {valences} valences")]
    Length { logits: usize, valences: usize },
    #[error("no valence for admissible action {0}")]
    MissingValence(usize),
    #[error("no admissible action")]
    NoAdmissible,
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Worlds(#[from] WorldsError),
    #[error("training aborted at episode {episode} (seed {seed}): {source}")]
    Training { episode: usize, seed: u64, source: Box<AgentError> },
}

/// Which distribution the GgShaped policy gradient differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapedGradient {
    /// The reranked distribution actions were sampled from.
    Behaviour,
    /// The network's own softmax over raw logits.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub episodes: usize,
    /// Cut episodes short of the world's own step limit.
    pub max_steps: Option<u32>,
    pub gamma: f64,
    pub lr: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub hidden: usize,
    pub head: ActorHead,
    /// Multiplier applied to the shaped reward before it enters the loss.
    pub reward_scale: f64,
    pub seed: u64,
    pub elaboration: ElaborationMode,
    pub strategy: ShapingStrategy,
    pub prior: PriorChoice,
    pub shaped_gradient: ShapedGradient,
    /// Greedy evaluation period in episodes; 0 disables.
    pub eval_every: usize,
    /// Cache valences by sentence when the prior is deterministic.
    pub memoize: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            episodes: 1000,
            max_steps: None,
            gamma: 0.95,
            lr: 3e-5,
            value_coef: 0.5,
            entropy_coef: 0.01,
            hidden: 64,
            head: ActorHead::Linear,
            reward_scale: 1.0,
            seed: 0,
            elaboration: ElaborationMode::Uniform,
            strategy: ShapingStrategy::new(StrategyKind::Baseline),
            prior: PriorChoice::default(),
            shaped_gradient: ShapedGradient::Behaviour,
            eval_every: 50,
            memoize: true,
        }
    }
}

impl AgentConfig {
    pub fn for_scenario(scenario: Scenario, strategy: StrategyKind, seed: u64) -> AgentConfig {
        AgentConfig {
            episodes: scenario.default_episodes(),
            seed,
            strategy: ShapingStrategy::new(strategy),
            ..AgentConfig::default()
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig { gamma: self.gamma, value_coef: self.value_coef, entropy_coef: self.entropy_coef }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::Config(m.to_string()));
        if self.hidden == 0 {
            return bad("hidden must be positive");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !self.value_coef.is_finite() || !self.entropy_coef.is_finite() || !self.strategy.prior_scale.is_finite()
            || !self.reward_scale.is_finite()
        {
            return bad("coefficients must be finite");
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be positive");
        }
        if let ElaborationMode::Fixed(k) = self.elaboration {
            if k >= crate::worlds::PHRASES_PER_ACTION {
                return Err(WorldsError::PhraseIndex(k).into());
            }
        }
        Ok(())
    }
}

/// A prior plus an optional sentence cache and a call counter.
pub struct PriorSession {
    model: Box<dyn NormativePrior + Send>,
    memo: Option<HashMap<String, Valence>>,
    calls: u64,
}

impl PriorSession {
    pub fn new(model: Box<dyn NormativePrior + Send>, memoize: bool) -> PriorSession {
        let memo = (memoize && model.is_pure()).then(HashMap::new);
        PriorSession { model, memo, calls: 0 }
    }

    pub fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError> {
        self.calls += 1;
        match &mut self.memo {
            Some(memo) => {
                if let Some(v) = memo.get(sentence) {
                    return Ok(*v);
                }
                let v = self.model.classify(sentence)?;
                memo.insert(sentence.to_string(), v);
                Ok(v)
            }
            None => self.model.classify(sentence),
        }
    }

    /// Classification requests served so far, cached or not.
    pub fn calls(&self) -> u64 {
        self.calls
    }
}

/// Independent random streams used by one run.
#[derive(Debug, Clone)]
pub struct AgentRng {
    pub policy: ChaCha8Rng,
    pub phrase: ChaCha8Rng,
    pub env: ChaCha8Rng,
}

fn stream(seed: u64, n: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(n);
    r
}

impl AgentRng {
    pub fn training(seed: u64) -> AgentRng {
        AgentRng { policy: stream(seed, 1), phrase: stream(seed, 2), env: stream(seed, 3) }
    }

    pub fn evaluation(seed: u64) -> AgentRng {
        AgentRng { policy: stream(seed, 4), phrase: stream(seed, 5), env: stream(seed, 6) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub x: Vec<f64>,
    pub mask: Vec<bool>,
    pub action: usize,
    /// Phrase index of the elaboration describing the executed action.
    pub phrase: usize,
    pub valence: Option<Valence>,
    pub r_env: f64,
    pub r_train: f64,
    /// Scaled valence score per action, present for GgShaped.
    pub scores: Option<Vec<f64>>,
    pub next_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub steps: Vec<StepRecord>,
    pub env_score: f64,
    pub done: bool,
    pub failed: bool,
    pub goal_reached: bool,
    pub action_counts: Vec<u32>,
    pub tag_counts: BTreeMap<Tag, u32>,
    pub prior_calls: u64,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn train_return(&self) -> f64 {
        self.steps.iter().map(|s| s.r_train).sum()
    }

    fn into_a2c_steps(self, gradient: ShapedGradient, reward_scale: f64) -> Vec<Step> {
        self.steps
            .into_iter()
            .map(|s| Step {
                x: s.x,
                action: s.action,
                mask: s.mask,
                reward: s.r_train * reward_scale,
                next_value: s.next_value,
                logit_scale: match gradient {
                    ShapedGradient::Behaviour => s.scores,
                    ShapedGradient::Raw => None,
                },
            })
            .collect()
    }
}

fn admissible_mask(n: usize, admissible: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for a in admissible {
        mask[*a] = true;
    }
    mask
}

/// Plays one episode without learning. `prior` may be `None` only for
/// Baseline.
pub fn run_episode(
    bundle: &ScenarioBundle,
    net: &PolicyNet,
    mut prior: Option<&mut PriorSession>,
    config: &AgentConfig,
    rng: &mut AgentRng,
    greedy: bool,
) -> Result<EpisodeTrace, AgentError> {
    use rand::RngCore;

    let spec = &bundle.spec;
    let n = spec.num_actions();
    if net.n_actions != n || net.input_dim != spec.encoding_len() {
        return Err(NeuralError::Dimension { expected: n, got: net.n_actions }.into());
    }
    let strategy = config.strategy;
    let uses_prior = strategy.kind.uses_prior();
    if uses_prior && prior.is_none() {
        return Err(AgentError::Config(format!("{} needs a prior", strategy.kind)));
    }
    let encoder = spec.encoder();
    let limit = config.max_steps.unwrap_or(spec.max_steps).min(spec.max_steps) as usize;
    let calls_before = prior.as_ref().map_or(0, |p| p.calls());

    let (mut state, obs) = spec.reset(rng.env.next_u64());
    let mut admissible = obs.admissible_indices();
    let mut x = encoder.encode_state(spec, &state);
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut action_counts = vec![0u32; n];
    let mut env_score = 0.0;
    let mut valences: Vec<Option<Valence>> = vec![None; n];
    let mut phrases: Vec<usize> = vec![0; n];

    while !state.done && steps.len() < limit {
        let mask = admissible_mask(n, &admissible);
        let (logits, _) = net.forward(&x)?;

        let shaped = strategy.kind == StrategyKind::GgShaped;
        if shaped {
            let session = prior.as_deref_mut().expect("checked above");
            for &a in &admissible {
                let k = bundle.draw_index(config.elaboration, &mut rng.phrase)?;
                phrases[a] = k;
                valences[a] = Some(session.classify(&bundle.elaborations[a].phrases[k])?);
            }
        }
        let action = select_action(&logits, &mask, strategy, &valences, greedy, &mut rng.policy)?;
        let (phrase, valence) = if shaped {
            (phrases[action], valences[action])
        } else {
            let k = bundle.draw_index(config.elaboration, &mut rng.phrase)?;
            let v = match prior.as_deref_mut() {
                Some(session) if uses_prior => Some(session.classify(&bundle.elaborations[action].phrases[k])?),
                _ => None,
            };
            (k, v)
        };
        let scores = shaped.then(|| {
            (0..n)
                .map(|i| match (mask[i], valences[i]) {
                    (true, Some(v)) => strategy.prior_scale * v.score(),
                    _ => 1.0,
                })
                .collect::<Vec<f64>>()
        });

        let outcome = spec.step(&mut state, action)?;
        let r_env = outcome.reward_env;
        let r_train = shape_reward(r_env, valence.unwrap_or_default(), strategy);
        env_score += r_env;
        action_counts[action] += 1;

        let next_x = encoder.encode_state(spec, &state);
        let terminal = outcome.failed || spec.is_goal(&state.key);
        let next_value = if terminal { 0.0 } else { net.forward(&next_x)?.1 };
        steps.push(StepRecord {
            x: std::mem::replace(&mut x, next_x),
            mask,
            action,
            phrase,
            valence,
            r_env,
            r_train,
            scores,
            next_value,
        });
        admissible = outcome.observation.admissible_indices();
        for v in valences.iter_mut() {
            *v = None;
        }
    }

    let mut tag_counts = BTreeMap::new();
    for (a, c) in action_counts.iter().enumerate() {
        if *c > 0 {
            for t in &spec.actions[a].tags {
                *tag_counts.entry(*t).or_insert(0) += c;
            }
        }
    }
    Ok(EpisodeTrace {
        steps,
        env_score,
        done: state.done,
        failed: state.failed,
        goal_reached: spec.is_goal(&state.key),
        action_counts,
        tag_counts,
        prior_calls: prior.as_ref().map_or(0, |p| p.calls()) - calls_before,
    })
}

/// Per-episode numbers kept from a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episode: usize,
    pub env_score: f64,
    pub train_return: f64,
    pub steps: usize,
    pub failed: bool,
    pub goal_reached: bool,
    pub action_counts: Vec<u32>,
    pub loss: f64,
}

impl EpisodeSummary {
    fn of(episode: usize, trace: &EpisodeTrace, loss: &LossStats) -> EpisodeSummary {
        EpisodeSummary {
            episode,
            env_score: trace.env_score,
            train_return: trace.train_return(),
            steps: trace.len(),
            failed: trace.failed,
            goal_reached: trace.goal_reached,
            action_counts: trace.action_counts.clone(),
            loss: loss.total,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub config: AgentConfig,
    pub episodes: Vec<EpisodeSummary>,
    /// Greedy evaluations, tagged with the number of training episodes
    /// completed beforehand.
    pub evals: Vec<EpisodeSummary>,
    pub net: PolicyNet,
    pub prior_calls: u64,
}

impl TrainingRun {
    /// Mean environment score over the last `n` training episodes.
    pub fn final_mean(&self, n: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().map(|e| e.env_score).sum::<f64>() / tail.len() as f64
    }
}

/// Trains a fresh network, building the prior from `config.prior`.
pub fn train(bundle: &ScenarioBundle, config: &AgentConfig) -> Result<TrainingRun, AgentError> {
    let prior = if config.strategy.kind.uses_prior() {
        Some(PriorSession::new(Box::new(config.prior.build(bundle)?), config.memoize))
    } else {
        None
    };
    train_with(bundle, config, prior)
}

/// Trains a fresh network with a caller-supplied prior session.
pub fn train_with(
    bundle: &ScenarioBundle,
    config: &AgentConfig,
    mut prior: Option<PriorSession>,
) -> Result<TrainingRun, AgentError> {
    config.validate()?;
    let spec = &bundle.spec;
    let mut init_rng = stream(config.seed, 0);
    let mut net =
        PolicyNet::init(spec.encoding_len(), config.hidden, spec.num_actions(), &mut init_rng).with_head(config.head);
    let mut adam = AdamState::new(net.params.len());
    let mut rng = AgentRng::training(config.seed);
    let mut eval_rng = AgentRng::evaluation(config.seed);
    let loss_cfg = config.loss();
    let mut episodes = Vec::with_capacity(config.episodes);
    let mut evals = Vec::new();
    let abort = |episode: usize, e: AgentError| AgentError::Training { episode, seed: config.seed, source: Box::new(e) };

    for ep in 0..config.episodes {
        let trace = run_episode(bundle, &net, prior.as_mut(), config, &mut rng, false).map_err(|e| abort(ep, e))?;
        let summary = EpisodeSummary::of(ep, &trace, &LossStats::default());
        let steps = trace.into_a2c_steps(config.shaped_gradient, config.reward_scale);
        let stats = a2c_update(&mut net, &mut adam, &steps, &loss_cfg, config.lr).map_err(|e| abort(ep, e.into()))?;
        episodes.push(EpisodeSummary { loss: stats.total, ..summary });
        if config.eval_every > 0 && (ep + 1) % config.eval_every == 0 {
            let t = run_episode(bundle, &net, prior.as_mut(), config, &mut eval_rng, true).map_err(|e| abort(ep, e))?;
            evals.push(EpisodeSummary::of(ep + 1, &t, &LossStats::default()));
        }
    }
    Ok(TrainingRun {
        config: config.clone(),
        episodes,
        evals,
        net,
        prior_calls: prior.as_ref().map_or(0, |p| p.calls()),
    })
}
