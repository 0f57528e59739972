//! Compares the analytic actor-critic gradient with central differences on
//! a small random network, for both actor heads.

use normshape::neural::{a2c_gradients, masked_softmax, ActorHead, LossConfig, PolicyNet, Step};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn surrogate(net: &PolicyNet, steps: &[Step], adv: &[f64], cfg: &LossConfig) -> f64 {
    let mut total = 0.0;
    for (s, a) in steps.iter().zip(adv) {
        let (logits, value) = net.forward(&s.x).unwrap();
        let pi = masked_softmax(&logits, &s.mask).unwrap();
        let h: f64 = pi.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        let td = s.reward + cfg.gamma * s.next_value - value;
        total += -pi[s.action].ln() * a + cfg.value_coef * td * td - cfg.entropy_coef * h;
    }
    total
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = LossConfig::default();
    for head in [ActorHead::Linear, ActorHead::Softplus] {
        let net = PolicyNet::init(5, 4, 3, &mut rng).with_head(head);
        let steps: Vec<Step> = (0..4)
            .map(|_| Step {
                x: (0..5).map(|_| rng.gen_range(0.0..1.0)).collect(),
                action: rng.gen_range(0..3),
                mask: vec![true; 3],
                reward: rng.gen_range(-1.0..1.0),
                next_value: rng.gen_range(-1.0..1.0),
                logit_scale: None,
            })
            .collect();
        let adv: Vec<f64> = steps
            .iter()
            .map(|s| s.reward + cfg.gamma * s.next_value - net.forward(&s.x).unwrap().1)
            .collect();
        let (_, analytic) = a2c_gradients(&net, &steps, &cfg).unwrap();
        let eps = 1e-4;
        let mut worst: f64 = 0.0;
        for i in 0..net.params.len() {
            let (mut up, mut down) = (net.clone(), net.clone());
            up.params[i] += eps;
            down.params[i] -= eps;
            let numeric = (surrogate(&up, &steps, &adv, &cfg) - surrogate(&down, &steps, &adv, &cfg)) / (2.0 * eps);
            worst = worst.max((numeric - analytic[i]).abs());
        }
        println!("{head:?}: {} params, max |analytic - numeric| = {worst:.2e}", net.params.len());
    }
}
