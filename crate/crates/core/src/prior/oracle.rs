use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{NormativePrior, PriorError, Valence};
use crate::engine::Tag;
use crate::worlds::ScenarioBundle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub magnitude: f64,
    pub sigma: f64,
    /// Pair emitted for actions tagged neither normative nor non-normative.
    pub neutral: Valence,
    /// Sentences whose pair is swapped.
    pub flip: Vec<String>,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { magnitude: 2.0, sigma: 0.0, neutral: Valence::new(0.0, 0.0), flip: Vec::new(), seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Positive,
    Negative,
    Neutral,
}

fn polarity(tags: &std::collections::BTreeSet<Tag>) -> Polarity {
    if tags.contains(&Tag::NonNormative) {
        Polarity::Negative
    } else if tags.contains(&Tag::Normative) || tags.contains(&Tag::Altruistic) {
        Polarity::Positive
    } else {
        Polarity::Neutral
    }
}

/// Ground-truth prior reading the tags of the action each sentence
/// describes.
#[derive(Debug, Clone)]
pub struct Oracle {
    bound: HashMap<String, Polarity>,
    flip: HashSet<String>,
    magnitude: f64,
    neutral: Valence,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
}

impl Oracle {
    pub fn new(bundle: &ScenarioBundle, cfg: OracleConfig) -> Result<Oracle, PriorError> {
        if !cfg.magnitude.is_finite() || !cfg.sigma.is_finite() || cfg.sigma < 0.0 || !cfg.neutral.is_finite() {
            return Err(PriorError::Schema("oracle magnitude, sigma and neutral pair must be finite, sigma >= 0".into()));
        }
        let mut bound = HashMap::new();
        for (action, _, phrase) in bundle.all_phrases() {
            let p = polarity(&bundle.spec.actions[action].tags);
            if let Some(prev) = bound.insert(phrase.to_string(), p) {
                if prev != p {
                    return Err(PriorError::Schema(format!("sentence `{phrase}` describes actions of opposite kinds")));
                }
            }
        }
        if let Some(s) = cfg.flip.iter().find(|s| !bound.contains_key(*s)) {
            return Err(PriorError::Unbound(s.clone()));
        }
        let noise = (cfg.sigma > 0.0).then(|| Normal::new(0.0, cfg.sigma).expect("sigma checked above"));
        Ok(Oracle {
            bound,
            flip: cfg.flip.into_iter().collect(),
            magnitude: cfg.magnitude,
            neutral: cfg.neutral,
            noise,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }
}

impl NormativePrior for Oracle {
    fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError> {
        if sentence.trim().is_empty() {
            return Err(PriorError::EmptySentence);
        }
        let p = *self.bound.get(sentence).ok_or_else(|| PriorError::Unbound(sentence.to_string()))?;
        let m = self.magnitude;
        let mut v = match p {
            Polarity::Positive => Valence::new(m, -m),
            Polarity::Negative => Valence::new(-m, m),
            Polarity::Neutral => self.neutral,
        };
        if let Some(n) = &self.noise {
            v.l_norm += n.sample(&mut self.rng);
            v.l_nonnorm += n.sample(&mut self.rng);
        }
        if self.flip.contains(sentence) {
            v = v.swapped();
        }
        Ok(v)
    }

    fn is_pure(&self) -> bool {
        self.noise.is_none()
    }
}
