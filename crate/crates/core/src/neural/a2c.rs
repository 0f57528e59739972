//! Episodic advantage actor-critic loss and its analytic gradient.

use super::adam::AdamState;
use super::net::{masked_softmax, PolicyNet};
use super::NeuralError;

/// One recorded step of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub x: Vec<f64>,
    pub action: usize,
    pub mask: Vec<bool>,
    /// Reward used for learning (possibly shaped).
    pub reward: f64,
    /// Critic estimate of the successor state, 0 for terminal steps.
    pub next_value: f64,
    /// Per-action multipliers applied to the logits before the softmax whose
    /// log-probability is differentiated. `None` means the raw logits.
    pub logit_scale: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub gamma: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { gamma: 0.95, value_coef: 0.5, entropy_coef: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

/// `A_t = R_t + gamma * V(s_{t+1}) - V(s_t)`, with `V(s_{t+1})` taken from the step record.
pub fn td_advantage(reward: f64, next_value: f64, value: f64, gamma: f64) -> f64 {
    reward + gamma * next_value - value
}

/// Loss `sum(-log pi(a|s) A) + value_coef * sum(A^2) - entropy_coef * sum(H)` and its
/// gradient. The advantage is held constant in the policy term and the
/// bootstrapped successor value is held constant everywhere.
pub fn a2c_gradients(net: &PolicyNet, steps: &[Step], cfg: &LossConfig) -> Result<(LossStats, Vec<f64>), NeuralError> {
    if steps.is_empty() {
        return Err(NeuralError::EmptyTrajectory);
    }
    let mut grads = vec![0.0; net.params.len()];
    let mut stats = LossStats::default();
    let mut d_logits = vec![0.0; net.n_actions];
    for (t, step) in steps.iter().enumerate() {
        if step.mask.len() != net.n_actions {
            return Err(NeuralError::Dimension { expected: net.n_actions, got: step.mask.len() });
        }
        if !step.mask.get(step.action).copied().unwrap_or(false) {
            return Err(NeuralError::MaskedAction { step: t, action: step.action });
        }
        let cache = net.forward_cached(&step.x)?;
        let scale = step.logit_scale.as_deref();
        let z: Vec<f64> = match scale {
            Some(s) => {
                if s.len() != net.n_actions {
                    return Err(NeuralError::Dimension { expected: net.n_actions, got: s.len() });
                }
                cache.logits.iter().zip(s).map(|(l, s)| l * s).collect()
            }
            None => cache.logits.clone(),
        };
        let pi = masked_softmax(&z, &step.mask)?;
        let advantage = td_advantage(step.reward, step.next_value, cache.value, cfg.gamma);
        let log_pa = pi[step.action].ln();
        let entropy: f64 = pi.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum();
        stats.policy += -log_pa * advantage;
        stats.value += advantage * advantage;
        stats.entropy += entropy;

        for (i, dl) in d_logits.iter_mut().enumerate() {
            *dl = 0.0;
            if !step.mask[i] {
                continue;
            }
            let indicator = if i == step.action { 1.0 } else { 0.0 };
            let d_policy = -advantage * (indicator - pi[i]);
            let d_entropy = if pi[i] > 0.0 { cfg.entropy_coef * pi[i] * (pi[i].ln() + entropy) } else { 0.0 };
            let dz = d_policy + d_entropy;
            *dl = match scale {
                Some(s) => dz * s[i],
                None => dz,
            };
        }
        let d_value = -2.0 * cfg.value_coef * advantage;
        net.backward(&step.x, &cache, &d_logits, d_value, &mut grads);
    }
    stats.total = stats.policy + cfg.value_coef * stats.value - cfg.entropy_coef * stats.entropy;
    if !stats.total.is_finite() {
        return Err(NeuralError::NonFinite("loss"));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(NeuralError::NonFinite("gradient"));
    }
    Ok((stats, grads))
}

/// One Adam step on the full-trajectory loss.
pub fn a2c_update(
    net: &mut PolicyNet,
    adam: &mut AdamState,
    steps: &[Step],
    cfg: &LossConfig,
    lr: f64,
) -> Result<LossStats, NeuralError> {
    let (stats, grads) = a2c_gradients(net, steps, cfg)?;
    adam.step(&mut net.params, &grads, lr)?;
    if !net.is_finite() {
        return Err(NeuralError::NonFinite("parameters"));
    }
    Ok(stats)
}
