mod common;

use normshape::neural::{
    a2c_gradients, a2c_update, adam_step, load_checkpoint, masked_softmax, save_checkpoint, td_advantage, ActorHead,
    AdamState, LossConfig, NeuralError, PolicyNet, Step,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn net(seed: u64) -> PolicyNet {
    PolicyNet::init(4, 5, 3, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn zero_net_outputs_zero() {
    let n = PolicyNet::zeros(4, 5, 3);
    let (logits, value) = n.forward(&[0.3, -1.0, 2.0, 0.0]).unwrap();
    assert_eq!(logits, vec![0.0; 3]);
    assert_eq!(value, 0.0);
}

#[test]
fn forward_is_pure_and_input_sensitive() {
    let n = net(1);
    let x = [0.1, 0.2, 0.3, 0.4];
    assert_eq!(n.forward(&x).unwrap(), n.forward(&x).unwrap());
    assert_ne!(n.forward(&x).unwrap().0, n.forward(&[1.0, 0.0, -1.0, 0.5]).unwrap().0);
}

#[test]
fn forward_rejects_wrong_width() {
    assert_eq!(net(1).forward(&[1.0]).unwrap_err(), NeuralError::Dimension { expected: 4, got: 1 });
}

#[test]
fn softplus_logits_are_positive() {
    let n = net(2).with_head(ActorHead::Softplus);
    let (logits, _) = n.forward(&[5.0, -5.0, 5.0, -5.0]).unwrap();
    assert!(logits.iter().all(|l| *l > 0.0));
}

#[test]
fn masked_softmax_examples() {
    assert_eq!(masked_softmax(&[0.0, 0.0], &[true, true]).unwrap(), vec![0.5, 0.5]);
    assert_eq!(masked_softmax(&[5.0, -100.0], &[false, true]).unwrap(), vec![0.0, 1.0]);
    let p = masked_softmax(&[1.0, 2.0, 3.0], &[true; 3]).unwrap();
    let want = common::ref_softmax(&[1.0, 2.0, 3.0], &[true; 3]);
    for (a, b) in p.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(masked_softmax(&[1.0, 2.0], &[false, false]).unwrap_err(), NeuralError::EmptyMask);
}

#[test]
fn masked_softmax_survives_large_logits() {
    let p = masked_softmax(&[1000.0, 999.0], &[true, true]).unwrap();
    assert!(p.iter().all(|v| v.is_finite()));
    assert!(p[0] > p[1]);
}

fn step(n: &PolicyNet, reward: f64, next_value: f64) -> Step {
    Step { x: vec![0.5, -0.5, 1.0, 0.0], action: 1, mask: vec![true; n.n_actions], reward, next_value, logit_scale: None }
}

#[test]
fn zero_advantage_leaves_the_policy_untouched() {
    let n = net(3);
    let cfg = LossConfig { entropy_coef: 0.0, ..LossConfig::default() };
    let s0 = step(&n, 0.0, 0.0);
    let v = n.forward(&s0.x).unwrap().1;
    let s = Step { reward: v, ..s0 };
    let (_, g) = a2c_gradients(&n, &[s], &cfg).unwrap();
    assert!(g.iter().all(|g| g.abs() < 1e-15), "{g:?}");
}

#[test]
fn terminal_step_advantage_is_reward_minus_value() {
    let n = net(4);
    let s = step(&n, 3.0, 0.0);
    let v = n.forward(&s.x).unwrap().1;
    assert_eq!(td_advantage(3.0, 0.0, v, 0.95), 3.0 - v);
    let cfg = LossConfig { entropy_coef: 0.0, ..LossConfig::default() };
    let (stats, _) = a2c_gradients(&n, &[s], &cfg).unwrap();
    assert!((stats.value - (3.0 - v).powi(2)).abs() < 1e-12);
}

#[test]
fn a2c_rejects_bad_trajectories() {
    let n = net(5);
    let cfg = LossConfig::default();
    assert_eq!(a2c_gradients(&n, &[], &cfg).unwrap_err(), NeuralError::EmptyTrajectory);
    let masked = Step { mask: vec![true, false, true], ..step(&n, 1.0, 0.0) };
    assert!(matches!(a2c_gradients(&n, &[masked], &cfg), Err(NeuralError::MaskedAction { .. })));
    let nan = step(&n, f64::NAN, 0.0);
    assert!(matches!(a2c_gradients(&n, &[nan], &cfg), Err(NeuralError::NonFinite(_))));
}

#[test]
fn positive_advantage_raises_the_chosen_probability() {
    let mut n = net(6);
    let mut adam = AdamState::new(n.params.len());
    let s = step(&n, 5.0, 0.0);
    let p = |n: &PolicyNet| masked_softmax(&n.forward(&s.x).unwrap().0, &s.mask).unwrap()[s.action];
    let before = p(&n);
    a2c_update(&mut n, &mut adam, std::slice::from_ref(&s), &LossConfig::default(), 1e-2).unwrap();
    assert!(p(&n) > before);
}

#[test]
fn tiny_net_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for head in [ActorHead::Linear, ActorHead::Softplus] {
        let n = PolicyNet::init(1, 1, 2, &mut rng).with_head(head);
        let steps = common::random_steps(&n, 3, false, &mut rng);
        let err = common::fd_relative_error(&n, &steps, &LossConfig::default(), 1e-4);
        assert!(err < 1e-4, "{head:?}: {err}");
    }
}

#[test]
fn adam_zero_gradient_is_a_no_op() {
    let p = vec![1.0, -2.0, 3.0];
    let (q, _) = adam_step(&p, &[0.0; 3], &AdamState::new(3), 1e-3).unwrap();
    assert_eq!(p, q);
}

#[test]
fn adam_first_step_moves_by_lr() {
    let p = vec![1.0, -2.0, 3.0];
    let lr = 1e-3;
    let (q, s) = adam_step(&p, &[0.5, -4.0, 2.0], &AdamState::new(3), lr).unwrap();
    assert_eq!(s.t, 1);
    for ((a, b), g) in p.iter().zip(&q).zip([0.5f64, -4.0, 2.0]) {
        let want = lr * g.signum() * g.abs() / (g.abs() + 1e-8);
        assert!(((a - b) - want).abs() < 1e-12);
    }
}

#[test]
fn adam_is_pure() {
    let s = AdamState::new(2);
    assert_eq!(adam_step(&[1.0, 2.0], &[0.1, 0.2], &s, 1e-2).unwrap(), adam_step(&[1.0, 2.0], &[0.1, 0.2], &s, 1e-2).unwrap());
    assert!(adam_step(&[1.0], &[0.1, 0.2], &s, 1e-2).is_err());
}

#[test]
fn checkpoint_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let n = net(9).with_head(ActorHead::Softplus);
    save_checkpoint(&n, &path).unwrap();
    assert_eq!(load_checkpoint(&path).unwrap(), n);
    std::fs::write(&path, "{\"schema_version\": 99}").unwrap();
    assert!(load_checkpoint(&path).is_err());
}

proptest! {
    #[test]
    fn masked_softmax_is_a_distribution(
        logits in prop::collection::vec(-50.0f64..50.0, 1..12),
        bits in prop::collection::vec(any::<bool>(), 12),
        on in 0usize..12,
    ) {
        let n = logits.len();
        let mut mask: Vec<bool> = bits[..n].to_vec();
        mask[on % n] = true;
        let p = masked_softmax(&logits, &mask).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (v, m) in p.iter().zip(&mask) {
            prop_assert!(*v >= 0.0);
            if !m {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences(seed in 0u64..10_000, softplus in any::<bool>(), scaled in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = if softplus { ActorHead::Softplus } else { ActorHead::Linear };
        let n = PolicyNet::init(3, 4, 4, &mut rng).with_head(head);
        let steps = common::random_steps(&n, 3, scaled, &mut rng);
        let err = common::fd_relative_error(&n, &steps, &LossConfig::default(), 1e-4);
        prop_assert!(err < 1e-4, "{}", err);
    }
}
