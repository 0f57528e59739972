use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::engine::Observation;
use crate::prior::NormativePrior;
use crate::worlds::{ElaborationMode, ScenarioBundle};

fn show(
    out: &mut impl Write,
    bundle: &ScenarioBundle,
    obs: &Observation,
    mode: ElaborationMode,
    rng: &mut ChaCha8Rng,
    prior: &mut Option<&mut dyn NormativePrior>,
) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io { path: "<stdout>".into(), source: e };
    if let Some(t) = &obs.reactive_text {
        writeln!(out, "{t}").map_err(io)?;
    }
    writeln!(out, "== {} ==\n{}", obs.room_name, obs.room_description).map_err(io)?;
    if !obs.visible.is_empty() {
        writeln!(out, "You see: {}", obs.visible.join(", ")).map_err(io)?;
    }
    if !obs.inventory_names.is_empty() {
        writeln!(out, "Carrying: {}", obs.inventory_names.join(", ")).map_err(io)?;
    }
    for f in &obs.facts {
        writeln!(out, "  * {f}").map_err(io)?;
    }
    for (n, a) in obs.admissible.iter().enumerate() {
        let k = bundle.draw_index(mode, rng)?;
        let phrase = &bundle.elaborations[a.index].phrases[k];
        match prior.as_deref_mut() {
            Some(p) => {
                let v = p.classify(phrase)?;
                writeln!(out, "  [{n}] {:<28} {phrase}  (score {:+.2})", a.command, v.score()).map_err(io)?
            }
            None => writeln!(out, "  [{n}] {:<28} {phrase}", a.command).map_err(io)?,
        }
    }
    Ok(())
}

/// Steps through a world by hand. Each input line is an option number, an
/// action id or a command; `quit` ends the session. Returns the total
/// environment reward collected.
pub fn play(
    bundle: &ScenarioBundle,
    mode: ElaborationMode,
    seed: u64,
    mut prior: Option<&mut dyn NormativePrior>,
    input: impl BufRead,
    mut out: impl Write,
) -> Result<f64, HarnessError> {
    let io = |e| HarnessError::Io { path: "<stdout>".into(), source: e };
    let spec = &bundle.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut state, mut obs) = spec.reset(seed);
    let mut total = 0.0;
    show(&mut out, bundle, &obs, mode, &mut rng, &mut prior)?;
    for line in input.lines() {
        let line = line.map_err(|e| HarnessError::Io { path: "<stdin>".into(), source: e })?;
        let cmd = line.trim();
        if cmd.is_empty() {
            continue;
        }
        if cmd == "quit" || cmd == "exit" {
            break;
        }
        let chosen = cmd
            .parse::<usize>()
            .ok()
            .and_then(|n| obs.admissible.get(n))
            .or_else(|| obs.admissible.iter().find(|a| a.id == cmd || a.command == cmd))
            .map(|a| a.index);
        let Some(action) = chosen else {
            writeln!(out, "Not an option here: {cmd}").map_err(io)?;
            continue;
        };
        let outcome = spec.step(&mut state, action)?;
        total += outcome.reward_env;
        obs = outcome.observation;
        if outcome.reward_env != 0.0 {
            writeln!(out, "Reward {:+} (total {total})", outcome.reward_env).map_err(io)?;
        }
        show(&mut out, bundle, &obs, mode, &mut rng, &mut prior)?;
        if outcome.done {
            let how = if outcome.failed {
                "failed"
            } else if spec.is_goal(&state.key) {
                "won"
            } else {
                "out of steps"
            };
            writeln!(out, "Game over ({how}) after {} steps, total reward {total}", state.step_count).map_err(io)?;
            break;
        }
    }
    Ok(total)
}
