//! Enumerates each world's reachable states and writes the graph as JSON.
//!
//! Clerk World is too large to enumerate fully, so its search skips the
//! penalty-hook actions and stops at the first goal.

use normshape::engine::EnumerateOptions;
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("normshape-graphs");
    std::fs::create_dir_all(&dir)?;
    for s in Scenario::ALL {
        let spec = scenario(s).spec;
        let mut opts = EnumerateOptions::default();
        if s == Scenario::Clerk {
            opts.stop_at_goal = true;
            opts.exclude = (0..spec.num_actions()).filter(|a| spec.is_hook_trigger(*a)).collect();
        }
        let g = spec.enumerate_reachable(&opts);
        let shortest: Vec<&str> = g
            .shortest_completion
            .iter()
            .flatten()
            .map(|a| spec.actions[*a].id.as_str())
            .collect();
        println!(
            "{s}: {} nodes, {} edges, complete={}, best reward {:?}\n  shortest: {}",
            g.nodes.len(),
            g.edges.len(),
            g.complete,
            g.best_completion_reward(&spec),
            shortest.join(" ")
        );
        let path = dir.join(format!("{s}.json"));
        std::fs::write(&path, serde_json::to_string(&g.to_export(&spec))?)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
