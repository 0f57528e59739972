//! One line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use normshape::agent::{rerank_logits, sample_index, shape_reward, ShapingStrategy, StrategyKind};
use normshape::harness::{run_experiment, ExperimentConfig, ExperimentResult};
use normshape::neural::{masked_softmax, ActorHead, LossConfig, PolicyNet};
use normshape::prior::Valence;
use normshape::worlds::{scenario, ElaborationMode, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn gradient_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = LossConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let head = if i % 2 == 0 { ActorHead::Linear } else { ActorHead::Softplus };
        let (d, h, n) = (rng.gen_range(1..6), rng.gen_range(1..7), rng.gen_range(2..6));
        let net = PolicyNet::init(d, h, n, &mut rng).with_head(head);
        let steps = common::random_steps(&net, rng.gen_range(1..5), i % 3 == 0, &mut rng);
        worst = worst.max(common::fd_relative_error(&net, &steps, &cfg, 1e-4));
    }
    let secs = t.elapsed().as_secs_f64();
    (worst < 1e-4 && secs < 10.0, format!("100 nets, worst relative error {worst:.2e}, {secs:.2}s"))
}

fn engine_oracle() -> Outcome {
    let t = Instant::now();
    let tagged = common::tagged;
    let pg = scenario(Scenario::Playground).spec;
    let neutral = common::bfs_completion(&pg, |a| {
        !tagged(a, "normative") && !tagged(a, "non-normative") && !tagged(a, "altruistic")
    });
    let pg_ok = neutral.as_ref().is_some_and(|(_, r)| *r == pg.max_total_reward());

    let sh = scenario(Scenario::Superhero).spec;
    let any = common::bfs_completion(&sh, |_| true);
    let clean = common::bfs_completion(&sh, |a| !tagged(a, "non-normative"));
    let (short, long) = (any.map_or(0, |p| p.0.len()), clean.map_or(0, |p| p.0.len()));
    let uses_nonnorm = common::bfs_completion(&sh, |_| true)
        .is_some_and(|(p, _)| p.iter().any(|a| tagged(&sh.actions[*a], "non-normative")));
    let sh_ok = uses_nonnorm && short > 0 && long > short;

    let ck = scenario(Scenario::Clerk).spec;
    let selfish = common::bfs_completion(&ck, |a| !tagged(a, "altruistic"));
    let ck_reward = selfish.map_or(f64::NAN, |p| p.1);
    let ck_ok = ck_reward == ck.max_total_reward();

    let secs = t.elapsed().as_secs_f64();
    (
        pg_ok && sh_ok && ck_ok && secs < 30.0,
        format!(
            "playground neutral-only completion {pg_ok}; superhero {short} steps via non-normative vs {long} without; clerk {ck_reward} of {} without altruism; {secs:.1}s",
            ck.max_total_reward()
        ),
    )
}

fn convergence(results: &[(Scenario, &ExperimentResult)]) -> Outcome {
    let mut ok = true;
    let mut worst = Vec::new();
    for (s, r) in results {
        let max = scenario(*s).spec.max_total_reward();
        for strategy in StrategyKind::ALL {
            let low = r
                .jobs
                .iter()
                .filter(|j| j.group.strategy == strategy)
                .map(|j| {
                    let tail = &j.episodes[j.episodes.len().saturating_sub(100)..];
                    tail.iter().map(|e| e.env_score).sum::<f64>() / tail.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            ok &= low >= 0.95 * max;
            worst.push(format!("{s}/{strategy} {:.0}%", 100.0 * low / max));
        }
    }
    (ok, format!("lowest per-seed final-100 mean: {}", worst.join(", ")))
}

fn clerk_scores(r: &ExperimentResult) -> Outcome {
    let score = |k| r.summary_of(k, None).and_then(|s| s.final_env_score).unwrap_or(f64::NAN);
    let base = score(StrategyKind::Baseline);
    let highest = StrategyKind::ALL.iter().all(|k| *k == StrategyKind::Baseline || score(*k) < base);
    let shaped = r.summary_of(StrategyKind::GgShaped, None).and_then(|s| s.final_normalized).unwrap_or(f64::NAN);
    (
        highest && (0.25..=0.55).contains(&shaped),
        format!("baseline score {base:.1} highest {highest}; gg-shaped normalized {shaped:.3}"),
    )
}

fn ratios(pg: &ExperimentResult, sh: &ExperimentResult, ck: &ExperimentResult) -> Outcome {
    let ratio = |r: &ExperimentResult, k| r.summary_of(k, None).and_then(|s| s.final_ratio).unwrap_or(f64::NAN);
    let alt = |k| ck.summary_of(k, None).and_then(|s| s.final_altruistic).unwrap_or(f64::NAN);
    use StrategyKind::*;
    let pg_b = ratio(pg, Baseline);
    let pg_p = ratio(pg, GgPos);
    let pg_s = ratio(pg, GgShaped);
    let sh_b = ratio(sh, Baseline);
    let sh_p = ratio(sh, GgPos);
    let sh_m = ratio(sh, GgMix);
    let sh_s = ratio(sh, GgShaped);
    let band = 0.25..=0.55;
    let shaped_alt = alt(GgShaped);
    let others = [alt(Baseline), alt(GgPos), alt(GgMix)];
    let fold = others.iter().map(|o| shaped_alt / o).fold(f64::INFINITY, f64::min);
    let ok = pg_b < 0.05
        && band.contains(&pg_p)
        && band.contains(&pg_s)
        && sh_b < 0.3
        && sh_p > 0.9
        && sh_m > 0.9
        && sh_s > 0.5
        && others.iter().all(|o| shaped_alt >= 2.0 * o);
    (
        ok,
        format!(
            "playground {pg_b:.3}/{pg_p:.3}/{pg_s:.3} (baseline/gg-pos/gg-shaped); superhero {sh_b:.3}/{sh_p:.3}/{sh_m:.3}/{sh_s:.3}; clerk altruism gg-shaped {shaped_alt:.2}, {fold:.1}x the next"
        ),
    )
}

fn phrase_sets(r: &ExperimentResult) -> Outcome {
    let ratio = |k| r.summary_of(StrategyKind::GgMix, Some(k)).and_then(|s| s.final_ratio).unwrap_or(f64::NAN);
    let (a, b, c) = (ratio(0), ratio(1), ratio(2));
    (a > 0.9 && c > 0.9 && b < a.min(c) && b > 0.0, format!("set0 {a:.3}, set1 {b:.3}, set2 {c:.3}"))
}

fn equations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut bad = 0;
    for _ in 0..1000 {
        let r = rng.gen_range(-20.0..20.0);
        let (ln, lnn) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let k = rng.gen_range(0.1..3.0);
        for kind in StrategyKind::ALL {
            let got = shape_reward(r, Valence::new(ln, lnn), ShapingStrategy { kind, prior_scale: k });
            if (got - common::ref_shape(kind, r, ln, lnn, k)).abs() > 1e-12 * (1.0 + got.abs()) {
                bad += 1;
            }
        }
        let passthrough = shape_reward(r, Valence::new(ln, lnn), ShapingStrategy::new(StrategyKind::GgShaped));
        if passthrough != r {
            bad += 1;
        }
        let n = rng.gen_range(1..8);
        let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let vals: Vec<Valence> = (0..n).map(|_| Valence::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
        let out = rerank_logits(&logits, &vals, k).unwrap();
        for i in 0..n {
            let want = logits[i] * (k * (vals[i].l_norm - vals[i].l_nonnorm));
            if (out[i] - want).abs() > 1e-12 * (1.0 + want.abs()) {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("1000 random tuples, {bad} mismatches"))
}

fn same_files(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for n in &names {
        let x = std::fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{}: {e}", n.to_string_lossy()))?;
        if x != y {
            return Err(format!("{} differs", n.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut runs = 0;
    for s in Scenario::ALL {
        for kind in StrategyKind::ALL {
            for prior in ["oracle", "lexicon"] {
                let dirs = [root.path().join(format!("{s}-{kind}-{prior}-a")), root.path().join(format!("{s}-{kind}-{prior}-b"))];
                for d in &dirs {
                    let cfg = ExperimentConfig {
                        iterations: 2,
                        seeds: vec![11, 12],
                        episodes: Some(20),
                        prior: Some(normshape::harness::parse_prior(prior).unwrap()),
                        out: Some(d.clone()),
                        ..ExperimentConfig::new(s, vec![kind])
                    };
                    if let Err(e) = run_experiment(&cfg) {
                        return (false, format!("{s}/{kind}/{prior}: {e}"));
                    }
                }
                match same_files(&dirs[0], &dirs[1]) {
                    Ok(_) => runs += 1,
                    Err(e) => return (false, format!("{s}/{kind}/{prior}: {e}")),
                }
            }
        }
    }
    (true, format!("{runs} scenario/strategy/prior combinations exported byte-identically twice"))
}

fn samplers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 10_000;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let k = rng.gen_range(2..6);
        let logits: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.7)).collect();
        mask[0] = true;
        let p = masked_softmax(&logits, &mask).unwrap();
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[sample_index(&p, &mut rng)] += 1;
        }
        for (c, q) in counts.iter().zip(&p) {
            worst = worst.max((*c as f64 / n as f64 - q).abs());
        }
    }
    let b = scenario(Scenario::Superhero);
    let mut counts = [0usize; 3];
    for _ in 0..n {
        counts[b.draw_index(ElaborationMode::Uniform, &mut rng).unwrap()] += 1;
    }
    let phrase_worst = counts.iter().map(|c| (*c as f64 / n as f64 - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    (
        worst <= 0.02 && phrase_worst <= 0.02,
        format!("max action frequency error {worst:.4}, max phrase frequency error {phrase_worst:.4}"),
    )
}

fn report(n: usize, (ok, detail): Outcome, all: &mut bool) {
    *all &= ok;
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn preset(n: u8, s: Scenario) -> ExperimentResult {
    run_experiment(&ExperimentConfig::preset(n, s).unwrap()).unwrap_or_else(|e| panic!("preset {n} on {s}: {e}"))
}

fn main() -> ExitCode {
    let mut all = true;
    report(1, gradient_oracle(), &mut all);
    report(2, engine_oracle(), &mut all);
    let t = Instant::now();
    let pg = preset(1, Scenario::Playground);
    let sh = preset(1, Scenario::Superhero);
    let ck = preset(1, Scenario::Clerk);
    report(3, convergence(&[(Scenario::Playground, &pg), (Scenario::Superhero, &sh)]), &mut all);
    report(4, clerk_scores(&ck), &mut all);
    report(5, ratios(&pg, &sh, &ck), &mut all);
    report(6, phrase_sets(&preset(3, Scenario::Superhero)), &mut all);
    eprintln!("training criteria took {:.0}s", t.elapsed().as_secs_f64());
    report(7, equations(), &mut all);
    report(8, determinism(), &mut all);
    report(9, samplers(), &mut all);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
