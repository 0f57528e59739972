//! Walks Playground along its shortest completion through the engine API
//! and prints each observation.

use normshape::engine::EnumerateOptions;
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = scenario(Scenario::Playground);
    let spec = &bundle.spec;
    let path = spec
        .enumerate_reachable(&EnumerateOptions { stop_at_goal: true, ..Default::default() })
        .shortest_completion
        .ok_or("no completion")?;

    let (mut state, mut obs) = spec.reset(0);
    let mut total = 0.0;
    for action in path {
        println!("[{}] can: {}", obs.room_name, obs.admissible.iter().map(|a| a.command.as_str()).collect::<Vec<_>>().join(" | "));
        let out = spec.step(&mut state, action)?;
        total += out.reward_env;
        println!("> {}  reward {}", spec.actions[action].command_text, out.reward_env);
        if let Some(msg) = &out.observation.reactive_text {
            println!("  {msg}");
        }
        obs = out.observation;
    }
    println!("done={} goal={} total={total}", state.done, spec.is_goal(&state.key));
    Ok(())
}
