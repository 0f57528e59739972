use serde::Serialize;

use super::labels::ActionLabels;
use crate::agent::{EpisodeSummary, EpisodeTrace};
use crate::engine::{Tag, WorldSpec};

/// Fig-style smoothing width.
pub const DEFAULT_WINDOW: usize = 20;

/// Action counts of one episode folded by label.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LabelCounts {
    pub n_task: u32,
    pub n_norm: u32,
    /// Actions tagged non-normative, whatever their label.
    pub n_nonnorm: u32,
    pub n_altruistic: u32,
}

impl LabelCounts {
    pub fn of(action_counts: &[u32], labels: &ActionLabels, spec: &WorldSpec) -> LabelCounts {
        let mut c = LabelCounts::default();
        for (a, n) in action_counts.iter().enumerate() {
            if labels.task_oriented.contains(&a) {
                c.n_task += n;
            }
            if labels.normative.contains(&a) {
                c.n_norm += n;
            }
            if spec.actions[a].has_tag(Tag::NonNormative) {
                c.n_nonnorm += n;
            }
            if spec.actions[a].has_tag(Tag::Altruistic) {
                c.n_altruistic += n;
            }
        }
        c
    }
}

/// Which denominator the normative ratio uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioKind {
    /// `n_norm / (n_norm + n_task)`.
    Task,
    /// `n_norm / (n_norm + n_nonnorm)`, comparing two path families.
    PathFamily,
}

impl RatioKind {
    pub fn apply(self, c: LabelCounts) -> Option<f64> {
        match self {
            RatioKind::Task => ratio(c.n_norm, c.n_task),
            RatioKind::PathFamily => ratio(c.n_norm, c.n_nonnorm),
        }
    }
}

/// `a / (a + b)`, absent when both are zero.
pub fn ratio(a: u32, b: u32) -> Option<f64> {
    let d = a + b;
    (d > 0).then(|| a as f64 / d as f64)
}

pub fn normative_ratio(trace: &EpisodeTrace, labels: &ActionLabels) -> Option<f64> {
    let n_norm: u32 = labels.normative.iter().map(|a| trace.action_counts[*a]).sum();
    let n_task: u32 = labels.task_oriented.iter().map(|a| trace.action_counts[*a]).sum();
    ratio(n_norm, n_task)
}

/// Divides every value by the running maximum over all series up to that
/// episode. Series are aligned by index; a non-positive running maximum
/// gives absent values.
pub fn normalized_env_score(series: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut out: Vec<Vec<Option<f64>>> = series.iter().map(|s| Vec::with_capacity(s.len())).collect();
    let mut running = f64::NEG_INFINITY;
    for i in 0..len {
        for s in series {
            if let Some(v) = s.get(i) {
                running = running.max(*v);
            }
        }
        for (s, o) in series.iter().zip(out.iter_mut()) {
            if let Some(v) = s.get(i) {
                o.push((running > 0.0).then(|| v / running));
            }
        }
    }
    out
}

/// Trailing mean over `min(w, i + 1)` values, skipping absent ones.
pub fn sliding_window(series: &[Option<f64>], w: usize) -> Vec<Option<f64>> {
    assert!(w >= 1, "window must be at least 1");
    (0..series.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            let present: Vec<f64> = series[lo..=i].iter().flatten().copied().collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        })
        .collect()
}

/// Pointwise mean across series, skipping absent values.
pub fn pointwise_mean(series: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let present: Vec<f64> = series.iter().filter_map(|s| s.get(i).copied().flatten()).collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        })
        .collect()
}

pub fn present(series: &[f64]) -> Vec<Option<f64>> {
    series.iter().map(|v| Some(*v)).collect()
}

/// Per-episode metrics of one run, or their pointwise mean over several.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsSeries {
    pub env_score: Vec<f64>,
    pub n_task: Vec<f64>,
    pub n_norm: Vec<f64>,
    pub n_nonnorm: Vec<f64>,
    pub n_altruistic: Vec<f64>,
    pub ratio: Vec<Option<f64>>,
    pub iterations: usize,
}

impl MetricsSeries {
    pub fn from_episodes(episodes: &[EpisodeSummary], labels: &ActionLabels, spec: &WorldSpec, kind: RatioKind) -> Self {
        let mut m = MetricsSeries { iterations: 1, ..Default::default() };
        for e in episodes {
            let c = LabelCounts::of(&e.action_counts, labels, spec);
            m.env_score.push(e.env_score);
            m.n_task.push(c.n_task as f64);
            m.n_norm.push(c.n_norm as f64);
            m.n_nonnorm.push(c.n_nonnorm as f64);
            m.n_altruistic.push(c.n_altruistic as f64);
            m.ratio.push(kind.apply(c));
        }
        m
    }

    /// Pointwise mean of `runs`, which must be non-empty.
    pub fn mean(runs: &[MetricsSeries]) -> MetricsSeries {
        let avg = |f: fn(&MetricsSeries) -> &Vec<f64>| -> Vec<f64> {
            let cols: Vec<Vec<Option<f64>>> = runs.iter().map(|r| present(f(r))).collect();
            pointwise_mean(&cols).into_iter().map(|v| v.unwrap_or(0.0)).collect()
        };
        let ratios: Vec<Vec<Option<f64>>> = runs.iter().map(|r| r.ratio.clone()).collect();
        MetricsSeries {
            env_score: avg(|r| &r.env_score),
            n_task: avg(|r| &r.n_task),
            n_norm: avg(|r| &r.n_norm),
            n_nonnorm: avg(|r| &r.n_nonnorm),
            n_altruistic: avg(|r| &r.n_altruistic),
            ratio: pointwise_mean(&ratios),
            iterations: runs.iter().map(|r| r.iterations).sum(),
        }
    }

    pub fn len(&self) -> usize {
        self.env_score.len()
    }

    pub fn is_empty(&self) -> bool {
        self.env_score.is_empty()
    }
}

/// Last value of a smoothed series.
pub fn final_value(series: &[Option<f64>]) -> Option<f64> {
    series.last().copied().flatten()
}
