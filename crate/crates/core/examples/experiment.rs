//! Runs an experiment preset and prints the final value of every curve.
//!
//! ```text
//! cargo run --release --example experiment -- 1 clerk [out-dir]
//! ```

use normshape::harness::{run_experiment, ExperimentConfig};
use normshape::worlds::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let preset: u8 = args.next().as_deref().unwrap_or("1").parse()?;
    let scenario: Scenario = args.next().as_deref().unwrap_or("playground").parse()?;
    let mut config = ExperimentConfig::preset(preset, scenario)?;
    config.out = args.next().map(Into::into);

    let result = run_experiment(&config)?;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    println!("{:<16} {:>10} {:>10} {:>8} {:>10}", "group", "env_score", "normalized", "ratio", "altruistic");
    for (g, s) in result.groups.iter().zip(result.summary()) {
        println!(
            "{:<16} {:>10} {:>10} {:>8} {:>10}",
            g.key.to_string(),
            fmt(s.final_env_score),
            fmt(s.final_normalized),
            fmt(s.final_ratio),
            fmt(s.final_altruistic)
        );
    }
    Ok(())
}
