use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NormativePrior, PriorError, Valence};
use crate::worlds::ScenarioBundle;

pub const TABLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub schema_version: u32,
    #[serde(default)]
    pub source: Option<String>,
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub sentence: String,
    pub l_norm: f64,
    pub l_nonnorm: f64,
}

/// Precomputed logits keyed by exact sentence.
#[derive(Debug, Clone, Default)]
pub struct LogitTable {
    entries: HashMap<String, Valence>,
}

impl LogitTable {
    pub fn from_entries(entries: impl IntoIterator<Item = TableEntry>) -> Result<LogitTable, PriorError> {
        let mut map = HashMap::new();
        for e in entries {
            let v = Valence::new(e.l_norm, e.l_nonnorm);
            if !v.is_finite() {
                return Err(PriorError::Schema(format!("non-finite logits for `{}`", e.sentence)));
            }
            if map.insert(e.sentence.clone(), v).is_some() {
                return Err(PriorError::Schema(format!("duplicate sentence `{}`", e.sentence)));
            }
        }
        Ok(LogitTable { entries: map })
    }

    pub fn from_json(text: &str) -> Result<LogitTable, PriorError> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| PriorError::Schema(e.to_string()))?;
        if file.schema_version != TABLE_SCHEMA_VERSION {
            return Err(PriorError::Schema(format!("unsupported table schema_version {}", file.schema_version)));
        }
        LogitTable::from_entries(file.entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fails listing every bundled elaboration without an entry.
    pub fn check_coverage(&self, bundle: &ScenarioBundle) -> Result<(), PriorError> {
        let missing: Vec<String> = bundle
            .all_phrases()
            .filter(|(_, _, p)| !self.entries.contains_key(*p))
            .map(|(_, _, p)| p.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(PriorError::Coverage(missing))
        }
    }

    /// Table file contents, sorted by sentence.
    pub fn to_file(&self, source: Option<String>) -> TableFile {
        let mut entries: Vec<TableEntry> = self
            .entries
            .iter()
            .map(|(s, v)| TableEntry { sentence: s.clone(), l_norm: v.l_norm, l_nonnorm: v.l_nonnorm })
            .collect();
        entries.sort_by(|a, b| a.sentence.cmp(&b.sentence));
        TableFile { schema_version: TABLE_SCHEMA_VERSION, source, entries }
    }
}

impl NormativePrior for LogitTable {
    fn classify(&mut self, sentence: &str) -> Result<Valence, PriorError> {
        if sentence.trim().is_empty() {
            return Err(PriorError::EmptySentence);
        }
        self.entries.get(sentence).copied().ok_or_else(|| PriorError::TableMiss(sentence.to_string()))
    }
}

pub fn load_table(path: &Path) -> Result<LogitTable, PriorError> {
    let text =
        fs::read_to_string(path).map_err(|e| PriorError::Io { path: path.display().to_string(), message: e.to_string() })?;
    LogitTable::from_json(&text)
}
