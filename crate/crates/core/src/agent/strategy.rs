use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::neural::masked_softmax;
use crate::prior::Valence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Baseline,
    GgPos,
    GgMix,
    GgShaped,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] =
        [StrategyKind::Baseline, StrategyKind::GgPos, StrategyKind::GgMix, StrategyKind::GgShaped];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::GgPos => "gg-pos",
            StrategyKind::GgMix => "gg-mix",
            StrategyKind::GgShaped => "gg-shaped",
        }
    }

    pub fn uses_prior(self) -> bool {
        self != StrategyKind::Baseline
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match norm.as_str() {
            "baseline" | "a2c" => Ok(StrategyKind::Baseline),
            "ggpos" => Ok(StrategyKind::GgPos),
            "ggmix" => Ok(StrategyKind::GgMix),
            "ggshaped" => Ok(StrategyKind::GgShaped),
            _ => Err(AgentError::UnknownStrategy(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapingStrategy {
    pub kind: StrategyKind,
    /// Multiplier on every valence quantity the strategy consumes.
    pub prior_scale: f64,
}

impl ShapingStrategy {
    pub fn new(kind: StrategyKind) -> ShapingStrategy {
        ShapingStrategy { kind, prior_scale: 1.0 }
    }
}

impl From<StrategyKind> for ShapingStrategy {
    fn from(kind: StrategyKind) -> Self {
        ShapingStrategy::new(kind)
    }
}

/// Reward the learner sees for an environment reward `r_env` earned by an
/// action with valence `v`.
pub fn shape_reward(r_env: f64, v: Valence, strategy: ShapingStrategy) -> f64 {
    match strategy.kind {
        StrategyKind::Baseline | StrategyKind::GgShaped => r_env,
        StrategyKind::GgPos => r_env * (strategy.prior_scale * v.l_norm),
        StrategyKind::GgMix => r_env * (strategy.prior_scale * (v.l_norm - v.l_nonnorm)),
    }
}

/// `L'_i = L_i * prior_scale * (l_norm_i - l_nonnorm_i)`.
pub fn rerank_logits(logits: &[f64], valences: &[Valence], prior_scale: f64) -> Result<Vec<f64>, AgentError> {
    if logits.len() != valences.len() {
        return Err(AgentError::Length { logits: logits.len(), valences: valences.len() });
    }
    Ok(logits.iter().zip(valences).map(|(l, v)| l * (prior_scale * v.score())).collect())
}

/// Samples an index from `probs` by inverse CDF; zero-probability entries are
/// never returned.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(i);
        if u < acc {
            return i;
        }
    }
    last.expect("distribution has positive mass")
}

/// First index of the largest masked-in entry.
pub fn argmax_masked(values: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if mask[i] && best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Logits the action is drawn from: raw for every strategy except GgShaped,
/// which multiplies each admissible logit by its scaled valence score.
/// `valences` is indexed by action and read only where `mask` is true.
pub fn behaviour_logits(
    logits: &[f64],
    mask: &[bool],
    strategy: ShapingStrategy,
    valences: &[Option<Valence>],
) -> Result<Vec<f64>, AgentError> {
    if mask.len() != logits.len() {
        return Err(AgentError::Length { logits: logits.len(), valences: mask.len() });
    }
    if strategy.kind != StrategyKind::GgShaped {
        return Ok(logits.to_vec());
    }
    if valences.len() != logits.len() {
        return Err(AgentError::Length { logits: logits.len(), valences: valences.len() });
    }
    let mut out = logits.to_vec();
    for i in 0..logits.len() {
        if mask[i] {
            let v = valences[i].ok_or(AgentError::MissingValence(i))?;
            out[i] = logits[i] * (strategy.prior_scale * v.score());
        }
    }
    Ok(out)
}

/// Picks an action: a sample from the behaviour distribution, or its argmax
/// when `greedy`.
pub fn select_action<R: Rng + ?Sized>(
    logits: &[f64],
    mask: &[bool],
    strategy: ShapingStrategy,
    valences: &[Option<Valence>],
    greedy: bool,
    rng: &mut R,
) -> Result<usize, AgentError> {
    if !mask.iter().any(|m| *m) {
        return Err(AgentError::NoAdmissible);
    }
    let z = behaviour_logits(logits, mask, strategy, valences)?;
    if greedy {
        return Ok(argmax_masked(&z, mask).expect("mask is non-empty"));
    }
    let probs = masked_softmax(&z, mask)?;
    Ok(sample_index(&probs, rng))
}
