//! Normative priors: models mapping an action elaboration to a pair of
//! unnormalized confidences `(l_norm, l_nonnorm)`.
//!
//! Three implementations ship here. [`Lexicon`] scores cue words,
//! [`LogitTable`] replays logits computed offline by any external classifier,
//! and [`Oracle`] reads the ground-truth tags of the action a sentence
//! describes.

mod lexicon;
mod oracle;
mod table;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{CueClass, Lexicon, LEXICON_SCHEMA_VERSION};
pub use oracle::{Oracle, OracleConfig};
pub use table::{load_table, LogitTable, TableEntry, TableFile, TABLE_SCHEMA_VERSION};

use crate::worlds::ScenarioBundle;

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("logit table has no entry for sentence `{0}`")]
    TableMiss(String),
    #[error("logit table is missing {} bundled sentence(s): {}", .0.len(), .0.join(" | "))]
    Coverage(Vec<String>),
    #[error("sentence `{0}` is not bound to any action")]
    Unbound(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Unnormalized confidences that a sentence describes normative and
/// non-normative behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Valence {
    pub l_norm: f64,
    pub l_nonnorm: f64,
}

impl Valence {
    pub const fn new(l_norm: f64, l_nonnorm: f64) -> Valence {
        Valence { l_norm, l_nonnorm }
    }

    /// `l_norm - l_nonnorm`.
    pub fn score(self) -> f64 {
        self.l_norm - self.l_nonnorm
    }

    /// Probability of the normative class after a two-way softmax.
    pub fn p_norm(self) -> f64 {
        1.0 / (1.0 + (self.l_nonnorm - self.l_norm).exp())
    }

    pub fn swapped(self) -> Valence {
        Valence { l_norm: self.l_nonnorm, l_nonnorm: self.l_norm }
    }

    pub fn is_finite(self) -> bool {
        self.l_norm.is_finite() && self.l_nonnorm.is_finite()
    }
}

pub fn valence_score(v: Valence) -> f64 {
    v.score()
}

/// Anything that can judge an elaboration sentence.
pub trait NormativePrior {
    fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError>;

    /// True when equal inputs always give equal outputs, so results may be
    /// memoized.
    fn is_pure(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub enum PriorModel {
    Lexicon(Lexicon),
    Table(LogitTable),
    Oracle(Oracle),
}

impl NormativePrior for PriorModel {
    fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError> {
        match self {
            PriorModel::Lexicon(m) => m.classify(sentence),
            PriorModel::Table(m) => m.classify(sentence),
            PriorModel::Oracle(m) => m.classify(sentence),
        }
    }

    fn is_pure(&self) -> bool {
        match self {
            PriorModel::Lexicon(m) => m.is_pure(),
            PriorModel::Table(m) => m.is_pure(),
            PriorModel::Oracle(m) => m.is_pure(),
        }
    }
}

pub fn classify(model: &mut dyn NormativePrior, sentence: &str) -> Result<Valence, PriorError> {
    model.classify(sentence)
}

/// Serializable recipe for building a prior against a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PriorChoice {
    /// Cue-word lexicon; `None` uses the bundled lexicon.
    Lexicon { path: Option<PathBuf> },
    /// Logit table imported from a file.
    Table { path: PathBuf },
    Oracle(OracleConfig),
}

impl Default for PriorChoice {
    fn default() -> Self {
        PriorChoice::Oracle(OracleConfig::default())
    }
}

impl PriorChoice {
    pub fn build(&self, bundle: &ScenarioBundle) -> Result<PriorModel, PriorError> {
        Ok(match self {
            PriorChoice::Lexicon { path: None } => PriorModel::Lexicon(Lexicon::bundled()),
            PriorChoice::Lexicon { path: Some(p) } => PriorModel::Lexicon(Lexicon::load(p)?),
            PriorChoice::Table { path } => {
                let table = load_table(path)?;
                table.check_coverage(bundle)?;
                PriorModel::Table(table)
            }
            PriorChoice::Oracle(cfg) => PriorModel::Oracle(Oracle::new(bundle, cfg.clone())?),
        })
    }

    pub fn label(&self) -> String {
        match self {
            PriorChoice::Lexicon { .. } => "lexicon".into(),
            PriorChoice::Table { .. } => "table".into(),
            PriorChoice::Oracle(_) => "oracle".into(),
        }
    }
}
