//! Builds a logit table from the lexicon's output, round-trips it through
//! JSON and trains against it, the path used to plug in an external
//! classifier's logits.

use normshape::agent::{train, AgentConfig, StrategyKind};
use normshape::prior::{Lexicon, LogitTable, NormativePrior, PriorChoice};
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = scenario(Scenario::Superhero);
    let mut lexicon = Lexicon::bundled();
    let entries = bundle
        .all_phrases()
        .map(|(_, _, s)| {
            let v = lexicon.classify(s)?;
            Ok(normshape::prior::TableEntry { sentence: s.to_string(), l_norm: v.l_norm, l_nonnorm: v.l_nonnorm })
        })
        .collect::<Result<Vec<_>, normshape::prior::PriorError>>()?;
    let table = LogitTable::from_entries(entries)?;
    table.check_coverage(&bundle)?;

    let path = std::env::temp_dir().join("superhero-logits.json");
    std::fs::write(&path, serde_json::to_string_pretty(&table.to_file(Some("bundled lexicon".into())))?)?;
    println!("wrote {} entries to {}", table.len(), path.display());

    let config = AgentConfig {
        episodes: 300,
        prior: PriorChoice::Table { path },
        ..AgentConfig::for_scenario(Scenario::Superhero, StrategyKind::GgMix, 0)
    };
    let run = train(&bundle, &config)?;
    println!("final 50-episode mean score {:.1}, {} prior calls", run.final_mean(50), run.prior_calls);
    Ok(())
}
