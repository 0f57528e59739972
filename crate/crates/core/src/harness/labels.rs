use std::collections::BTreeSet;

use serde::Serialize;

use super::HarnessError;
use crate::engine::{EnumerateOptions, WorldSpec};
use crate::worlds::{LabelClass, ScenarioBundle};

/// Metric labels. Actions in none of the three sets are neutral.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ActionLabels {
    pub task_oriented: BTreeSet<usize>,
    pub normative: BTreeSet<usize>,
    pub failure: BTreeSet<usize>,
}

impl ActionLabels {
    pub fn class(&self, action: usize) -> LabelClass {
        if self.task_oriented.contains(&action) {
            LabelClass::Task
        } else if self.normative.contains(&action) {
            LabelClass::Normative
        } else if self.failure.contains(&action) {
            LabelClass::Failure
        } else {
            LabelClass::Neutral
        }
    }

    fn set(&mut self, action: usize, class: LabelClass) {
        self.task_oriented.remove(&action);
        self.normative.remove(&action);
        self.failure.remove(&action);
        match class {
            LabelClass::Task => self.task_oriented.insert(action),
            LabelClass::Normative => self.normative.insert(action),
            LabelClass::Failure => self.failure.insert(action),
            LabelClass::Neutral => false,
        };
    }

    /// Action ids per class, for printing.
    pub fn named(&self, spec: &WorldSpec) -> NamedLabels {
        let ids = |s: &BTreeSet<usize>| s.iter().map(|a| spec.actions[*a].id.clone()).collect();
        let neutral = (0..spec.num_actions())
            .filter(|a| self.class(*a) == LabelClass::Neutral)
            .map(|a| spec.actions[a].id.clone())
            .collect();
        NamedLabels {
            task_oriented: ids(&self.task_oriented),
            normative: ids(&self.normative),
            failure: ids(&self.failure),
            neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedLabels {
    pub task_oriented: Vec<String>,
    pub normative: Vec<String>,
    pub failure: Vec<String>,
    pub neutral: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub action: String,
    pub derived: LabelClass,
    pub assigned: LabelClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelReport {
    /// Derived labels with the bundle's overrides applied.
    pub labels: ActionLabels,
    pub derived: ActionLabels,
    pub disagreements: Vec<Disagreement>,
}

/// Derives labels from the state graph, then applies the bundle's overrides.
pub fn derive_labels(bundle: &ScenarioBundle) -> Result<ActionLabels, HarnessError> {
    Ok(label_report(bundle)?.labels)
}

/// Task actions lie on a shortest completion that never fires a penalty
/// hook; failure actions label an edge into a failed state; everything else
/// is normative until overridden.
pub fn label_report(bundle: &ScenarioBundle) -> Result<LabelReport, HarnessError> {
    let spec = &bundle.spec;
    let exclude: Vec<usize> = (0..spec.num_actions()).filter(|a| spec.is_hook_trigger(*a)).collect();
    let search = spec.enumerate_reachable(&EnumerateOptions { stop_at_goal: true, exclude, ..EnumerateOptions::default() });
    let path = search.shortest_completion.ok_or_else(|| HarnessError::Labels(format!("{} has no completion", spec.name)))?;
    let task: BTreeSet<usize> = path.into_iter().collect();

    // Without failure predicates no state can fail, so the full graph is not needed.
    let failure: BTreeSet<usize> = if spec.failure_states.is_empty() {
        BTreeSet::new()
    } else {
        let graph = spec.enumerate_reachable(&EnumerateOptions::default());
        if !graph.complete {
            return Err(HarnessError::Labels(format!("state graph of {} is incomplete", spec.name)));
        }
        graph.failure_actions().into_iter().filter(|a| !task.contains(a)).collect()
    };
    let normative = (0..spec.num_actions()).filter(|a| !task.contains(a) && !failure.contains(a)).collect();
    let derived = ActionLabels { task_oriented: task, normative, failure };

    let mut labels = derived.clone();
    let mut disagreements = Vec::new();
    for &(action, class) in &bundle.label_overrides {
        let was = derived.class(action);
        if was != class {
            disagreements.push(Disagreement { action: spec.actions[action].id.clone(), derived: was, assigned: class });
        }
        labels.set(action, class);
    }
    Ok(LabelReport { labels, derived, disagreements })
}
