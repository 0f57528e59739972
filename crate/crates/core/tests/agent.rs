mod common;

use normshape::agent::{
    argmax_masked, behaviour_logits, rerank_logits, run_episode, sample_index, select_action, shape_reward, train,
    AgentConfig, AgentError, AgentRng, PriorSession, ShapingStrategy, StrategyKind,
};
use normshape::engine::Tag;
use normshape::harness::{derive_labels, preset_agent, LabelCounts, RatioKind};
use normshape::neural::{masked_softmax, PolicyNet};
use normshape::prior::{OracleConfig, PriorChoice, Valence};
use normshape::worlds::{scenario, Scenario};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn s(kind: StrategyKind) -> ShapingStrategy {
    ShapingStrategy::new(kind)
}

#[test]
fn shape_reward_examples() {
    assert_eq!(shape_reward(10.0, Valence::new(2.0, -1.0), s(StrategyKind::GgPos)), 20.0);
    assert_eq!(shape_reward(10.0, Valence::new(1.5, 2.5), s(StrategyKind::GgMix)), -10.0);
    assert_eq!(shape_reward(10.0, Valence::new(-7.0, 3.0), s(StrategyKind::GgShaped)), 10.0);
    assert_eq!(shape_reward(10.0, Valence::new(-7.0, 3.0), s(StrategyKind::Baseline)), 10.0);
    let scaled = ShapingStrategy { kind: StrategyKind::GgMix, prior_scale: 0.5 };
    assert_eq!(shape_reward(10.0, Valence::new(2.0, -2.0), scaled), 20.0);
}

#[test]
fn rerank_examples() {
    let v = |x: f64| Valence::new(x, 0.0);
    assert_eq!(rerank_logits(&[1.0, 2.0], &[v(2.0), v(-1.0)], 1.0).unwrap(), vec![2.0, -2.0]);
    assert_eq!(rerank_logits(&[1.0, -2.0, 0.5], &[v(1.0); 3], 1.0).unwrap(), vec![1.0, -2.0, 0.5]);
    assert_eq!(rerank_logits(&[1.0, -2.0], &[v(0.0); 2], 1.0).unwrap(), vec![0.0, 0.0]);
    assert!(matches!(rerank_logits(&[1.0], &[v(1.0); 2], 1.0), Err(AgentError::Length { .. })));
}

#[test]
fn zero_scores_give_a_uniform_shaped_policy() {
    let mask = [true, true, false, true];
    let vals = vec![Some(Valence::new(0.0, 0.0)); 4];
    let z = behaviour_logits(&[3.0, -1.0, 9.0, 0.2], &mask, s(StrategyKind::GgShaped), &vals).unwrap();
    let p = masked_softmax(&z, &mask).unwrap();
    for (i, x) in p.iter().enumerate() {
        assert!((x - if mask[i] { 1.0 / 3.0 } else { 0.0 }).abs() < 1e-12);
    }
}

#[test]
fn other_strategies_ignore_valences_when_selecting() {
    let mask = [true, true];
    let z = behaviour_logits(&[1.0, 2.0], &mask, s(StrategyKind::GgMix), &[None, None]).unwrap();
    assert_eq!(z, vec![1.0, 2.0]);
    let err = behaviour_logits(&[1.0, 2.0], &mask, s(StrategyKind::GgShaped), &[None, None]);
    assert!(matches!(err, Err(AgentError::MissingValence(0))));
}

#[test]
fn single_admissible_action_is_always_chosen() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let a = select_action(&[5.0, -3.0, 1.0], &[false, true, false], s(StrategyKind::Baseline), &[], false, &mut rng);
        assert_eq!(a.unwrap(), 1);
    }
    let none = select_action(&[0.0], &[false], s(StrategyKind::Baseline), &[], false, &mut rng);
    assert!(matches!(none, Err(AgentError::NoAdmissible)));
}

#[test]
fn shaped_selection_favours_high_valence_when_logits_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vals = [Some(Valence::new(3.0, 0.0)), Some(Valence::new(-3.0, 0.0))];
    let picks = (0..2000)
        .filter(|_| {
            select_action(&[1.0, 1.0], &[true, true], s(StrategyKind::GgShaped), &vals, false, &mut rng).unwrap() == 0
        })
        .count();
    assert!(picks > 1900, "{picks}");
}

#[test]
fn zero_logits_are_fixed_points_of_the_rerank() {
    let vals = [Some(Valence::new(3.0, 0.0)), Some(Valence::new(-3.0, 0.0))];
    let z = behaviour_logits(&[0.0, 0.0], &[true, true], s(StrategyKind::GgShaped), &vals).unwrap();
    assert_eq!(masked_softmax(&z, &[true, true]).unwrap(), vec![0.5, 0.5]);
}

#[test]
fn greedy_selection_is_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = select_action(&[1.0, 7.0, 3.0], &[true, false, true], s(StrategyKind::Baseline), &[], true, &mut rng);
    assert_eq!(a.unwrap(), 2);
}

#[test]
fn sampling_frequencies_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10_000;
    let hits = (0..n).filter(|_| sample_index(&[0.7, 0.3], &mut rng) == 0).count();
    assert!((hits as f64 / n as f64 - 0.7).abs() < 0.02);
}

fn short(scenario_: Scenario, kind: StrategyKind, seed: u64) -> AgentConfig {
    AgentConfig { episodes: 30, eval_every: 10, ..preset_agent(scenario_, kind, seed) }
}

#[test]
fn baseline_never_consults_the_prior() {
    let b = scenario(Scenario::Playground);
    let run = train(&b, &short(Scenario::Playground, StrategyKind::Baseline, 0)).unwrap();
    assert_eq!(run.prior_calls, 0);
    let run = train(&b, &short(Scenario::Playground, StrategyKind::GgMix, 0)).unwrap();
    assert!(run.prior_calls > 0);
}

#[test]
fn shaped_agent_classifies_every_admissible_action() {
    let b = scenario(Scenario::Superhero);
    let cfg = short(Scenario::Superhero, StrategyKind::GgShaped, 2);
    let net = PolicyNet::init(b.spec.encoding_len(), 8, b.spec.num_actions(), &mut ChaCha8Rng::seed_from_u64(0));
    let mut session = PriorSession::new(Box::new(cfg.prior.build(&b).unwrap()), false);
    let trace = run_episode(&b, &net, Some(&mut session), &cfg, &mut AgentRng::training(2), false).unwrap();
    let admissible: usize = trace.steps.iter().map(|s| s.mask.iter().filter(|m| **m).count()).sum();
    assert_eq!(trace.prior_calls, admissible as u64);
    for st in &trace.steps {
        assert!(st.valence.is_some());
        assert_eq!(st.r_train, st.r_env);
    }
}

#[test]
fn prior_strategies_need_a_prior() {
    let b = scenario(Scenario::Playground);
    let cfg = short(Scenario::Playground, StrategyKind::GgPos, 0);
    let net = PolicyNet::init(b.spec.encoding_len(), 8, b.spec.num_actions(), &mut ChaCha8Rng::seed_from_u64(0));
    assert!(run_episode(&b, &net, None, &cfg, &mut AgentRng::training(0), false).is_err());
}

#[test]
fn traces_respect_the_step_limit_and_sum_rewards() {
    for sc in Scenario::ALL {
        let b = scenario(sc);
        for kind in StrategyKind::ALL {
            let cfg = AgentConfig { max_steps: Some(12), ..short(sc, kind, 3) };
            let net = PolicyNet::init(b.spec.encoding_len(), 8, b.spec.num_actions(), &mut ChaCha8Rng::seed_from_u64(1));
            let mut session = PriorSession::new(Box::new(cfg.prior.build(&b).unwrap()), true);
            let prior = kind.uses_prior().then_some(&mut session);
            let trace = run_episode(&b, &net, prior, &cfg, &mut AgentRng::training(3), false).unwrap();
            assert!(trace.len() <= 12);
            let total: f64 = trace.steps.iter().map(|s| s.r_env).sum();
            assert!((total - trace.env_score).abs() < 1e-12);
            assert_eq!(trace.action_counts.iter().sum::<u32>() as usize, trace.len());
        }
    }
}

#[test]
fn training_is_deterministic() {
    let b = scenario(Scenario::Superhero);
    for kind in StrategyKind::ALL {
        let cfg = short(Scenario::Superhero, kind, 9);
        let (a, c) = (train(&b, &cfg).unwrap(), train(&b, &cfg).unwrap());
        assert_eq!(a.episodes, c.episodes);
        assert_eq!(a.evals, c.evals);
        assert_eq!(a.net, c.net);
    }
}

#[test]
fn noisy_oracle_runs_are_deterministic_too() {
    let b = scenario(Scenario::Playground);
    let cfg = AgentConfig {
        prior: PriorChoice::Oracle(OracleConfig { sigma: 0.3, ..OracleConfig::default() }),
        ..short(Scenario::Playground, StrategyKind::GgMix, 4)
    };
    assert_eq!(train(&b, &cfg).unwrap().episodes, train(&b, &cfg).unwrap().episodes);
}

#[test]
fn invalid_configs_are_rejected() {
    let b = scenario(Scenario::Playground);
    for cfg in [
        AgentConfig { lr: 0.0, ..AgentConfig::default() },
        AgentConfig { hidden: 0, ..AgentConfig::default() },
        AgentConfig { gamma: 1.5, ..AgentConfig::default() },
        AgentConfig { max_steps: Some(0), ..AgentConfig::default() },
    ] {
        assert!(matches!(train(&b, &cfg), Err(AgentError::Config(_))));
    }
    assert!("gg-mix".parse::<StrategyKind>().is_ok());
    assert!("gg-neg".parse::<StrategyKind>().is_err());
}

#[test]
fn baseline_agent_converges_on_playground() {
    let b = scenario(Scenario::Playground);
    let run = train(&b, &preset_agent(Scenario::Playground, StrategyKind::Baseline, 0)).unwrap();
    assert!(run.final_mean(100) >= 0.95 * b.spec.max_total_reward());
}

#[test]
fn baseline_hero_prefers_the_short_path() {
    let b = scenario(Scenario::Superhero);
    let labels = derive_labels(&b).unwrap();
    let run = train(&b, &preset_agent(Scenario::Superhero, StrategyKind::Baseline, 0)).unwrap();
    let mut counts = vec![0u32; b.spec.num_actions()];
    for e in &run.episodes[run.episodes.len() - 100..] {
        for (c, n) in counts.iter_mut().zip(&e.action_counts) {
            *c += n;
        }
    }
    let ratio = RatioKind::PathFamily.apply(LabelCounts::of(&counts, &labels, &b.spec)).unwrap();
    assert!(ratio < 0.2, "{ratio}");
}

#[test]
fn shaped_clerk_helps_someone() {
    let b = scenario(Scenario::Clerk);
    let cfg = preset_agent(Scenario::Clerk, StrategyKind::GgShaped, 0);
    let run = train(&b, &cfg).unwrap();
    let mut session = PriorSession::new(Box::new(cfg.prior.build(&b).unwrap()), true);
    let trace = run_episode(&b, &run.net, Some(&mut session), &cfg, &mut AgentRng::evaluation(0), false).unwrap();
    let altruistic = trace.tag_counts.get(&Tag::Altruistic).copied().unwrap_or(0);
    assert!(altruistic >= 1);
}

proptest! {
    #[test]
    fn uniform_positive_valence_keeps_the_argmax(
        logits in prop::collection::vec(0.0f64..10.0, 2..8),
        c in 0.01f64..5.0,
    ) {
        let mask = vec![true; logits.len()];
        let vals = vec![Some(Valence::new(c, 0.0)); logits.len()];
        let z = behaviour_logits(&logits, &mask, s(StrategyKind::GgShaped), &vals).unwrap();
        prop_assert_eq!(argmax_masked(&z, &mask), argmax_masked(&logits, &mask));
    }

    #[test]
    fn gg_mix_sign_is_the_product_of_signs(r in -20.0f64..20.0, ln in -5.0f64..5.0, lnn in -5.0f64..5.0) {
        let out = shape_reward(r, Valence::new(ln, lnn), s(StrategyKind::GgMix));
        let want = r.signum() * (ln - lnn).signum();
        if r != 0.0 && ln != lnn {
            prop_assert_eq!(out.signum(), want);
        } else {
            prop_assert_eq!(out, 0.0);
        }
    }

    #[test]
    fn shaping_matches_reference(kind in 0usize..4, r in -20.0f64..20.0, ln in -5.0f64..5.0, lnn in -5.0f64..5.0, k in 0.1f64..3.0) {
        let kind = StrategyKind::ALL[kind];
        let got = shape_reward(r, Valence::new(ln, lnn), ShapingStrategy { kind, prior_scale: k });
        prop_assert!((got - common::ref_shape(kind, r, ln, lnn, k)).abs() <= 1e-12 * (1.0 + got.abs()));
    }
}
