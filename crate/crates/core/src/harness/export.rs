use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, ExperimentResult, HarnessError, JobResult, NamedLabels, RatioKind};
use crate::agent::EpisodeSummary;
use crate::engine::{WorldSpec, WORLD_SCHEMA_VERSION};
use crate::worlds::BUNDLE_SCHEMA_VERSION;

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    world: &'a str,
    world_schema_version: u32,
    bundle_schema_version: u32,
    ratio_kind: RatioKind,
    seeds: Vec<u64>,
    config: &'a ExperimentConfig,
    labels: NamedLabels,
    disagreements: &'a [super::Disagreement],
    files: BTreeMap<&'static str, &'static str>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn set_field(k: Option<usize>) -> String {
    k.map(|k| k.to_string()).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

fn episode_rows(
    w: &mut csv::Writer<fs::File>,
    spec: &WorldSpec,
    jobs: &[JobResult],
    pick: fn(&JobResult) -> &[EpisodeSummary],
) -> Result<(), HarnessError> {
    let mut header: Vec<String> = [
        "strategy", "phrase_set", "iteration", "seed", "episode", "env_score", "train_return", "steps", "failed",
        "goal_reached", "loss",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(spec.actions.iter().map(|a| a.id.clone()));
    w.write_record(&header)?;
    for j in jobs {
        for e in pick(j) {
            let mut row = vec![
                j.group.strategy.to_string(),
                set_field(j.group.phrase_set),
                j.iteration.to_string(),
                j.seed.to_string(),
                e.episode.to_string(),
                e.env_score.to_string(),
                e.train_return.to_string(),
                e.steps.to_string(),
                e.failed.to_string(),
                e.goal_reached.to_string(),
                e.loss.to_string(),
            ];
            row.extend(e.action_counts.iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))
}

impl ExperimentResult {
    /// Writes `manifest.json`, raw per-episode records (`raw.csv`,
    /// `evals.csv`), averaged curves (`curves.csv`), final values
    /// (`summary.csv`) and the valence dump (`valence.csv`) into `dir`.
    pub fn write(&self, dir: &Path, spec: &WorldSpec) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = |name: &str| dir.join(name);

        let mut files = BTreeMap::new();
        files.insert("raw.csv", "one row per training episode and job; action columns are execution counts");
        files.insert("evals.csv", "greedy evaluation episodes, episode = training episodes completed");
        files.insert("curves.csv", "iteration means per group with smoothed and normalized variants");
        files.insert("summary.csv", "last value of each smoothed curve");
        files.insert("valence.csv", "prior output for every elaboration");
        let manifest = Manifest {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            world: &self.world,
            world_schema_version: WORLD_SCHEMA_VERSION,
            bundle_schema_version: BUNDLE_SCHEMA_VERSION,
            ratio_kind: self.ratio_kind,
            seeds: self.config.seeds(),
            config: &self.config,
            labels: self.labels.labels.named(spec),
            disagreements: &self.labels.disagreements,
            files,
        };
        let p = path("manifest.json");
        fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n").map_err(io_err(&p))?;

        let mut w = csv::Writer::from_path(path("raw.csv"))?;
        episode_rows(&mut w, spec, &self.jobs, |j| &j.episodes)?;
        let mut w = csv::Writer::from_path(path("evals.csv"))?;
        episode_rows(&mut w, spec, &self.jobs, |j| &j.evals)?;

        let mut w = csv::Writer::from_path(path("curves.csv"))?;
        w.write_record([
            "strategy", "phrase_set", "episode", "env_score", "env_score_smoothed", "normalized",
            "normalized_smoothed", "ratio", "ratio_smoothed", "n_task", "n_norm", "n_nonnorm", "n_altruistic",
            "n_altruistic_smoothed",
        ])?;
        for g in &self.groups {
            let m = &g.mean;
            for i in 0..m.len() {
                w.write_record([
                    g.key.strategy.to_string(),
                    set_field(g.key.phrase_set),
                    i.to_string(),
                    m.env_score[i].to_string(),
                    opt(g.env_smoothed[i]),
                    opt(g.normalized[i]),
                    opt(g.normalized_smoothed[i]),
                    opt(m.ratio[i]),
                    opt(g.ratio_smoothed[i]),
                    m.n_task[i].to_string(),
                    m.n_norm[i].to_string(),
                    m.n_nonnorm[i].to_string(),
                    m.n_altruistic[i].to_string(),
                    opt(g.altruistic_smoothed[i]),
                ])?;
            }
        }
        w.flush().map_err(|e| HarnessError::Csv(e.into()))?;

        let mut w = csv::Writer::from_path(path("summary.csv"))?;
        w.write_record([
            "strategy", "phrase_set", "final_env_score", "final_normalized", "final_ratio", "final_altruistic",
        ])?;
        for s in self.summary() {
            w.write_record([
                s.strategy.to_string(),
                set_field(s.phrase_set),
                opt(s.final_env_score),
                opt(s.final_normalized),
                opt(s.final_ratio),
                opt(s.final_altruistic),
            ])?;
        }
        w.flush().map_err(|e| HarnessError::Csv(e.into()))?;

        write_valence(&path("valence.csv"), &self.valence)
    }
}

pub(super) fn write_valence(path: &Path, rows: &[super::ValenceRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))
}
