use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use normshape::agent::StrategyKind;
use normshape::harness::{
    self, parse_phrase_set, parse_prior, ExperimentConfig, ExperimentResult, PhraseMode,
};
use normshape::prior::PriorChoice;
use normshape::worlds::{scenario, ElaborationMode, Scenario};

#[derive(Parser)]
#[command(name = "normshape", version, about = "Train and inspect normatively shaped text-world agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "playground")]
    scenario: Scenario,
    /// oracle, lexicon, lexicon:PATH or table:PATH
    #[arg(long)]
    prior: Option<String>,
    /// uniform or a phrase index
    #[arg(long)]
    phrase_set: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One training run.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "baseline")]
        strategy: StrategyKind,
    },
    /// A preset experiment (1, 2 or 3) or one described by a JSON file.
    Experiment {
        preset: Option<u8>,
        #[command(flatten)]
        common: Common,
        /// Restrict the preset to one strategy.
        #[arg(long)]
        strategy: Option<StrategyKind>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Derived metric labels and override disagreements as JSON.
    Labels {
        #[command(flatten)]
        common: Common,
    },
    /// Prior output for every elaboration as CSV.
    ValenceDump {
        #[command(flatten)]
        common: Common,
    },
    /// Step through a world from stdin.
    Play {
        #[command(flatten)]
        common: Common,
    },
}

fn apply(config: &mut ExperimentConfig, c: &Common) -> Result<(), harness::HarnessError> {
    if let Some(p) = &c.prior {
        config.prior = Some(parse_prior(p)?);
    }
    if let Some(k) = &c.phrase_set {
        config.phrase = match parse_phrase_set(k)? {
            ElaborationMode::Uniform => PhraseMode::Uniform,
            ElaborationMode::Fixed(k) => PhraseMode::Sets(vec![k]),
        };
    }
    if let Some(base) = c.seed {
        config.seeds = (base..base + config.iterations as u64).collect();
    }
    if c.episodes.is_some() {
        config.episodes = c.episodes;
    }
    if c.out.is_some() {
        config.out = c.out.clone();
    }
    Ok(())
}

fn prior_of(c: &Common) -> Result<PriorChoice, harness::HarnessError> {
    parse_prior(c.prior.as_deref().unwrap_or("oracle"))
}

fn report(result: &ExperimentResult) {
    let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    println!("group,final_env_score,final_normalized,final_ratio,final_altruistic");
    for (g, s) in result.groups.iter().zip(result.summary()) {
        println!(
            "{},{},{},{},{}",
            g.key,
            f(s.final_env_score),
            f(s.final_normalized),
            f(s.final_ratio),
            f(s.final_altruistic)
        );
    }
}

fn main_inner(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { common, strategy } => {
            let mut config = ExperimentConfig { iterations: 1, ..ExperimentConfig::new(common.scenario, vec![strategy]) };
            apply(&mut config, &common)?;
            report(&harness::run_experiment(&config)?);
        }
        Command::Experiment { preset, common, strategy, config } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                (None, Some(n)) => ExperimentConfig::preset(n, common.scenario)?,
                (None, None) => return Err("give a preset number or --config".into()),
            };
            if let Some(s) = strategy {
                cfg.strategies = vec![s];
            }
            apply(&mut cfg, &common)?;
            report(&harness::run_experiment(&cfg)?);
        }
        Command::Labels { common } => {
            let bundle = scenario(common.scenario);
            let r = harness::label_report(&bundle)?;
            let json = serde_json::json!({
                "labels": r.labels.named(&bundle.spec),
                "derived": r.derived.named(&bundle.spec),
                "disagreements": r.disagreements,
            });
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::ValenceDump { common } => {
            let bundle = scenario(common.scenario);
            let labels = harness::derive_labels(&bundle)?;
            let mut prior = prior_of(&common)?.build(&bundle)?;
            let rows = harness::valence_dump(&bundle, &mut prior, &labels)?;
            match &common.out {
                Some(path) => harness::write_valence(path, &rows)?,
                None => {
                    let mut w = csv::Writer::from_writer(io::stdout());
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Play { common } => {
            let bundle = scenario(common.scenario);
            let mode = parse_phrase_set(common.phrase_set.as_deref().unwrap_or("uniform"))?;
            let mut prior = match &common.prior {
                Some(p) => Some(parse_prior(p)?.build(&bundle)?),
                None => None,
            };
            let prior_ref = prior.as_mut().map(|p| p as &mut dyn normshape::prior::NormativePrior);
            harness::play(&bundle, mode, common.seed.unwrap_or(0), prior_ref, io::stdin().lock(), io::stdout())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
