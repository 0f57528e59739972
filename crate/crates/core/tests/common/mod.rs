#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use normshape::agent::StrategyKind;
use normshape::engine::{ActionDef, StateKey, WorldSpec};
use normshape::neural::{a2c_gradients, LossConfig, PolicyNet, Step};

/// Breadth-first search driven only by `reset` and `step`, restricted to
/// actions `allowed` accepts. Returns the first completion found (a
/// shortest one) and its episode reward.
pub fn bfs_completion(spec: &WorldSpec, allowed: impl Fn(&ActionDef) -> bool) -> Option<(Vec<usize>, f64)> {
    let (start, _) = spec.reset(0);
    let mut seen: HashSet<StateKey> = HashSet::from([start.key.clone()]);
    let mut queue = VecDeque::from([(start, Vec::<usize>::new(), 0.0)]);
    while let Some((state, path, reward)) = queue.pop_front() {
        for a in spec.admissible(&state.key) {
            if !allowed(&spec.actions[a]) {
                continue;
            }
            let mut next = state.clone();
            let out = spec.step(&mut next, a).expect("admissible action steps");
            if out.failed || !seen.insert(next.key.clone()) {
                continue;
            }
            let mut p = path.clone();
            p.push(a);
            let r = reward + out.reward_env;
            if spec.is_goal(&next.key) {
                return Some((p, r));
            }
            if !out.done {
                queue.push_back((next, p, r));
            }
        }
    }
    None
}

pub fn tagged(a: &ActionDef, tag: &str) -> bool {
    a.tags.iter().any(|t| t.as_str() == tag)
}

/// Textbook softmax over the masked entries, without max subtraction.
pub fn ref_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let e: Vec<f64> = logits.iter().zip(mask).map(|(l, m)| if *m { l.exp() } else { 0.0 }).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn ref_shape(kind: StrategyKind, r: f64, l_norm: f64, l_nonnorm: f64, scale: f64) -> f64 {
    match kind {
        StrategyKind::Baseline => r,
        StrategyKind::GgPos => r * scale * l_norm,
        StrategyKind::GgMix => r * scale * (l_norm - l_nonnorm),
        StrategyKind::GgShaped => r,
    }
}

/// Loss with advantages frozen at `adv`, recomputed from forward passes
/// only. Its gradient is what the analytic actor-critic gradient claims.
pub fn surrogate_loss(net: &PolicyNet, steps: &[Step], adv: &[f64], gamma: f64, vc: f64, ec: f64) -> f64 {
    let mut total = 0.0;
    for (s, a) in steps.iter().zip(adv) {
        let (logits, value) = net.forward(&s.x).unwrap();
        let z: Vec<f64> = match &s.logit_scale {
            Some(k) => logits.iter().zip(k).map(|(l, k)| l * k).collect(),
            None => logits,
        };
        let m = z.iter().zip(&s.mask).filter(|(_, m)| **m).map(|(z, _)| *z).fold(f64::MIN, f64::max);
        let e: Vec<f64> = z.iter().zip(&s.mask).map(|(z, on)| if *on { (z - m).exp() } else { 0.0 }).collect();
        let sum: f64 = e.iter().sum();
        let pi: Vec<f64> = e.iter().map(|v| v / sum).collect();
        let h: f64 = pi.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        let td = s.reward + gamma * s.next_value - value;
        total += -pi[s.action].ln() * a + vc * td * td - ec * h;
    }
    total
}

pub fn frozen_advantages(net: &PolicyNet, steps: &[Step], gamma: f64) -> Vec<f64> {
    steps.iter().map(|s| s.reward + gamma * s.next_value - net.forward(&s.x).unwrap().1).collect()
}

/// Relative error `|g - n| / max(|g|, |n|)` (Euclidean norms) between the
/// analytic gradient and central differences of the frozen-advantage loss.
pub fn fd_relative_error(net: &PolicyNet, steps: &[Step], cfg: &LossConfig, eps: f64) -> f64 {
    let adv = frozen_advantages(net, steps, cfg.gamma);
    let (_, analytic) = a2c_gradients(net, steps, cfg).unwrap();
    let f = |n: &PolicyNet| surrogate_loss(n, steps, &adv, cfg.gamma, cfg.value_coef, cfg.entropy_coef);
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nn = 0.0;
    for i in 0..net.params.len() {
        let (mut up, mut down) = (net.clone(), net.clone());
        up.params[i] += eps;
        down.params[i] -= eps;
        let numeric = (f(&up) - f(&down)) / (2.0 * eps);
        diff += (numeric - analytic[i]).powi(2);
        na += analytic[i].powi(2);
        nn += numeric.powi(2);
    }
    let scale = na.sqrt().max(nn.sqrt());
    if scale < 1e-12 {
        diff.sqrt()
    } else {
        diff.sqrt() / scale
    }
}

/// A random trajectory for `net` with a random non-empty mask per step.
pub fn random_steps<R: rand::Rng>(net: &PolicyNet, len: usize, scaled: bool, rng: &mut R) -> Vec<Step> {
    (0..len)
        .map(|_| {
            let mut mask: Vec<bool> = (0..net.n_actions).map(|_| rng.gen_bool(0.6)).collect();
            let on = rng.gen_range(0..net.n_actions);
            mask[on] = true;
            let allowed: Vec<usize> = (0..net.n_actions).filter(|a| mask[*a]).collect();
            Step {
                x: (0..net.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                action: allowed[rng.gen_range(0..allowed.len())],
                mask,
                reward: rng.gen_range(-2.0..2.0),
                next_value: rng.gen_range(-1.0..1.0),
                logit_scale: scaled.then(|| (0..net.n_actions).map(|_| rng.gen_range(0.5..2.0)).collect()),
            }
        })
        .collect()
}
