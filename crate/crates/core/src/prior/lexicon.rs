use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use super::{NormativePrior, PriorError, Valence};

pub const LEXICON_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CueClass {
    Normative,
    NonNormative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    schema_version: u32,
    #[serde(default)]
    note: Option<String>,
    base: f64,
    cues: Vec<CueRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CueRecord {
    term: String,
    class: CueClass,
    weight: f64,
}

/// Bag-of-cues classifier over stemmed, lowercased tokens.
///
/// `l_norm = base + sum(normative cue weights)` and
/// `l_nonnorm = base + sum(non-normative cue weights)`, counting every
/// matching token.
#[derive(Clone)]
pub struct Lexicon {
    base: f64,
    cues: HashMap<String, (CueClass, f64)>,
    stemmer: std::sync::Arc<Stemmer>,
}

impl std::fmt::Debug for Lexicon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lexicon").field("base", &self.base).field("cues", &self.cues.len()).finish()
    }
}

impl Lexicon {
    pub fn new(base: f64, cues: impl IntoIterator<Item = (String, CueClass, f64)>) -> Result<Lexicon, PriorError> {
        if !base.is_finite() {
            return Err(PriorError::Schema("lexicon base must be finite".into()));
        }
        let stemmer = Stemmer::create(Algorithm::English);
        let mut map = HashMap::new();
        for (term, class, weight) in cues {
            if !weight.is_finite() {
                return Err(PriorError::Schema(format!("cue `{term}` has a non-finite weight")));
            }
            let stem = stemmer.stem(&term.to_lowercase()).into_owned();
            if map.contains_key(&stem) {
                return Err(PriorError::Schema(format!("cue `{term}` repeats stem `{stem}`")));
            }
            map.insert(stem, (class, weight));
        }
        Ok(Lexicon { base, cues: map, stemmer: std::sync::Arc::new(stemmer) })
    }

    pub fn from_json(text: &str) -> Result<Lexicon, PriorError> {
        let file: LexiconFile = serde_json::from_str(text).map_err(|e| PriorError::Schema(e.to_string()))?;
        if file.schema_version != LEXICON_SCHEMA_VERSION {
            return Err(PriorError::Schema(format!("unsupported lexicon schema_version {}", file.schema_version)));
        }
        Lexicon::new(file.base, file.cues.into_iter().map(|c| (c.term, c.class, c.weight)))
    }

    pub fn load(path: &Path) -> Result<Lexicon, PriorError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PriorError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Lexicon::from_json(&text)
    }

    /// The lexicon shipped in `data/lexicon.json`.
    pub fn bundled() -> Lexicon {
        Lexicon::from_json(include_str!("../../data/lexicon.json")).expect("bundled lexicon is valid")
    }

    fn tokens<'a>(&'a self, sentence: &'a str) -> impl Iterator<Item = String> + 'a {
        sentence
            .split(|c: char| !c.is_alphanumeric() && c != '\'')
            .filter(|t| !t.is_empty())
            .map(|t| self.stemmer.stem(&t.to_lowercase()).into_owned())
    }
}

impl NormativePrior for Lexicon {
    fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError> {
        if sentence.trim().is_empty() {
            return Err(PriorError::EmptySentence);
        }
        let mut v = Valence::new(self.base, self.base);
        for tok in self.tokens(sentence) {
            match self.cues.get(&tok) {
                Some((CueClass::Normative, w)) => v.l_norm += w,
                Some((CueClass::NonNormative, w)) => v.l_nonnorm += w,
                None => {}
            }
        }
        Ok(v)
    }
}
