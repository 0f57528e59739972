//! Trains one agent with the preset hyperparameters and prints a coarse
//! learning curve plus the last greedy evaluation.
//!
//! ```text
//! cargo run --release --example train -- superhero gg-mix 0
//! ```

use normshape::agent::{train, StrategyKind};
use normshape::harness::preset_agent;
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let world: Scenario = args.next().as_deref().unwrap_or("playground").parse()?;
    let strategy: StrategyKind = args.next().as_deref().unwrap_or("gg-pos").parse()?;
    let seed: u64 = args.next().as_deref().unwrap_or("0").parse()?;

    let bundle = scenario(world);
    let config = preset_agent(world, strategy, seed);
    let run = train(&bundle, &config)?;

    let chunk = (run.episodes.len() / 10).max(1);
    for part in run.episodes.chunks(chunk) {
        let mean = part.iter().map(|e| e.env_score).sum::<f64>() / part.len() as f64;
        println!("episodes {:>5}..{:<5} mean score {mean:6.2}", part[0].episode, part[part.len() - 1].episode);
    }
    if let Some(last) = run.evals.last() {
        let taken: Vec<&str> = last
            .action_counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(a, _)| bundle.spec.actions[a].id.as_str())
            .collect();
        println!("greedy after {} episodes: score {} using {}", last.episode, last.env_score, taken.join(", "));
    }
    println!("prior calls: {}", run.prior_calls);
    Ok(())
}
