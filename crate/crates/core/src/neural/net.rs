use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NeuralError;

/// One tanh hidden layer feeding an actor head (one logit per action in the
/// world's vocabulary) and a scalar critic head.
///
/// Parameters live in a single flat array laid out as
/// `[w1 (hidden x input), b1, w_actor (actions x hidden), b_actor, w_critic, b_critic]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub input_dim: usize,
    pub hidden: usize,
    pub n_actions: usize,
    #[serde(default)]
    pub head: ActorHead,
    pub params: Vec<f64>,
}

/// Output transform of the actor head.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorHead {
    /// Logits are the affine output itself.
    #[default]
    Linear,
    /// Logits are `softplus` of the affine output, so always positive.
    Softplus,
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub w1: usize,
    pub b1: usize,
    pub wa: usize,
    pub ba: usize,
    pub wc: usize,
    pub bc: usize,
    pub len: usize,
}

impl Layout {
    fn new(input: usize, hidden: usize, actions: usize) -> Layout {
        let w1 = 0;
        let b1 = w1 + hidden * input;
        let wa = b1 + hidden;
        let ba = wa + actions * hidden;
        let wc = ba + actions;
        let bc = wc + hidden;
        Layout { w1, b1, wa, ba, wc, bc, len: bc + 1 }
    }
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub value: f64,
}

impl PolicyNet {
    pub fn param_count(input_dim: usize, hidden: usize, n_actions: usize) -> usize {
        Layout::new(input_dim, hidden, n_actions).len
    }

    pub fn zeros(input_dim: usize, hidden: usize, n_actions: usize) -> PolicyNet {
        let len = Self::param_count(input_dim, hidden, n_actions);
        PolicyNet { input_dim, hidden, n_actions, head: ActorHead::Linear, params: vec![0.0; len] }
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, n_actions: usize, rng: &mut R) -> PolicyNet {
        let mut net = Self::zeros(input_dim, hidden, n_actions);
        let l = net.layout();
        let fill = |slice: &mut [f64], fan_in: usize, rng: &mut R| {
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            for w in slice {
                *w = rng.gen_range(-bound..bound);
            }
        };
        fill(&mut net.params[l.w1..l.b1], input_dim, rng);
        fill(&mut net.params[l.wa..l.ba], hidden, rng);
        fill(&mut net.params[l.wc..l.bc], hidden, rng);
        net
    }

    pub fn with_head(mut self, head: ActorHead) -> PolicyNet {
        self.head = head;
        self
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(self.input_dim, self.hidden, self.n_actions)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache, NeuralError> {
        if x.len() != self.input_dim {
            return Err(NeuralError::Dimension { expected: self.input_dim, got: x.len() });
        }
        let l = self.layout();
        let p = &self.params;
        let hidden: Vec<f64> = (0..self.hidden)
            .map(|j| {
                let row = &p[l.w1 + j * self.input_dim..l.w1 + (j + 1) * self.input_dim];
                let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + p[l.b1 + j];
                z.tanh()
            })
            .collect();
        let logits = (0..self.n_actions)
            .map(|k| {
                let row = &p[l.wa + k * self.hidden..l.wa + (k + 1) * self.hidden];
                let z = row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + p[l.ba + k];
                match self.head {
                    ActorHead::Linear => z,
                    ActorHead::Softplus => softplus(z),
                }
            })
            .collect();
        let value = p[l.wc..l.bc].iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + p[l.bc];
        Ok(ForwardCache { hidden, logits, value })
    }

    /// Logits over the full action vocabulary and the state value.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, f64), NeuralError> {
        let c = self.forward_cached(x)?;
        Ok((c.logits, c.value))
    }

    /// Accumulates parameter gradients into `grads` given loss gradients with
    /// respect to this sample's logits and value.
    pub(crate) fn backward(&self, x: &[f64], cache: &ForwardCache, d_logits: &[f64], d_value: f64, grads: &mut [f64]) {
        let l = self.layout();
        let p = &self.params;
        let mut d_hidden = vec![0.0; self.hidden];
        for (k, &g) in d_logits.iter().enumerate() {
            let g = match self.head {
                ActorHead::Linear => g,
                // sigmoid(z) recovered from softplus(z) = L as 1 - exp(-L)
                ActorHead::Softplus => g * -(-cache.logits[k]).exp_m1(),
            };
            if g == 0.0 {
                continue;
            }
            grads[l.ba + k] += g;
            let off = l.wa + k * self.hidden;
            for j in 0..self.hidden {
                grads[off + j] += g * cache.hidden[j];
                d_hidden[j] += g * p[off + j];
            }
        }
        grads[l.bc] += d_value;
        for j in 0..self.hidden {
            grads[l.wc + j] += d_value * cache.hidden[j];
            d_hidden[j] += d_value * p[l.wc + j];
        }
        for j in 0..self.hidden {
            let dz = d_hidden[j] * (1.0 - cache.hidden[j] * cache.hidden[j]);
            if dz == 0.0 {
                continue;
            }
            grads[l.b1 + j] += dz;
            let off = l.w1 + j * self.input_dim;
            for (i, xi) in x.iter().enumerate() {
                grads[off + i] += dz * xi;
            }
        }
    }
}

/// Softmax restricted to `mask`; masked entries are exactly zero.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, NeuralError> {
    if logits.len() != mask.len() {
        return Err(NeuralError::Dimension { expected: logits.len(), got: mask.len() });
    }
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(NeuralError::EmptyMask);
    }
    let mut out: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(l, m)| if *m { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = out.iter().sum();
    for p in &mut out {
        *p /= z;
    }
    Ok(out)
}
