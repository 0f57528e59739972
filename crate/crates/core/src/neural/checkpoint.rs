use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ActorHead, NeuralError, PolicyNet};

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk parameter file: a shape header plus the flat parameter array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub input_dim: usize,
    pub hidden: usize,
    pub n_actions: usize,
    #[serde(default)]
    pub head: ActorHead,
    pub params: Vec<f64>,
}

impl From<&PolicyNet> for Checkpoint {
    fn from(net: &PolicyNet) -> Self {
        Checkpoint {
            schema_version: CHECKPOINT_VERSION,
            input_dim: net.input_dim,
            hidden: net.hidden,
            n_actions: net.n_actions,
            head: net.head,
            params: net.params.clone(),
        }
    }
}

impl TryFrom<Checkpoint> for PolicyNet {
    type Error = NeuralError;

    fn try_from(c: Checkpoint) -> Result<Self, Self::Error> {
        if c.schema_version != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!("unsupported schema_version {}", c.schema_version)));
        }
        let expected = PolicyNet::param_count(c.input_dim, c.hidden, c.n_actions);
        if c.params.len() != expected {
            return Err(NeuralError::Dimension { expected, got: c.params.len() });
        }
        let net =
            PolicyNet { input_dim: c.input_dim, hidden: c.hidden, n_actions: c.n_actions, head: c.head, params: c.params };
        if !net.is_finite() {
            return Err(NeuralError::NonFinite("checkpoint parameters"));
        }
        Ok(net)
    }
}

pub fn save_checkpoint(net: &PolicyNet, path: &Path) -> Result<(), NeuralError> {
    let text = serde_json::to_string(&Checkpoint::from(net)).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    fs::write(path, text).map_err(|e| NeuralError::Checkpoint(e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<PolicyNet, NeuralError> {
    let text = fs::read_to_string(path).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    let c: Checkpoint = serde_json::from_str(&text).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    PolicyNet::try_from(c)
}
