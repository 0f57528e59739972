//! Breadth-first enumeration of the reachable state graph.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::spec::WorldSpec;
use super::state::StateKey;
use super::WORLD_SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Open,
    Goal,
    Failed,
    /// Reached at `max_steps` depth, never expanded.
    Timeout,
    /// Left unexpanded because the cap was hit or the search stopped early.
    Frontier,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub key: StateKey,
    pub depth: u32,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub action: usize,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct StateGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// False when the cap stopped exploration (or `stop_at_goal` cut it short).
    pub complete: bool,
    /// Action indices of a minimum-length successful completion.
    pub shortest_completion: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    /// Maximum number of nodes.
    pub cap: usize,
    /// Stop as soon as the first goal node is discovered.
    pub stop_at_goal: bool,
    /// Actions never taken during the search.
    pub exclude: Vec<usize>,
}

impl EnumerateOptions {
    pub fn capped(cap: usize) -> EnumerateOptions {
        EnumerateOptions { cap, stop_at_goal: false, exclude: Vec::new() }
    }
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions::capped(1_000_000)
    }
}

impl WorldSpec {
    pub fn enumerate_reachable(&self, opts: &EnumerateOptions) -> StateGraph {
        let mut index: HashMap<StateKey, usize> = HashMap::new();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let start = StateKey::initial(self);
        let mut nodes = vec![Node { key: start.clone(), depth: 0, kind: NodeKind::Open }];
        index.insert(start, 0);
        let mut edges = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let mut complete = true;
        let mut goal_node = None;
        let excluded = |a: usize| opts.exclude.contains(&a);

        if opts.cap <= 1 {
            complete = false;
            nodes[0].kind = NodeKind::Frontier;
            queue.clear();
        }

        'search: while let Some(n) = queue.pop_front() {
            if nodes[n].depth >= self.max_steps {
                nodes[n].kind = NodeKind::Timeout;
                continue;
            }
            let key = nodes[n].key.clone();
            let depth = nodes[n].depth;
            for action in self.admissible(&key) {
                if excluded(action) {
                    continue;
                }
                for t in self.outcomes(&key, action) {
                    let to = match index.get(&t.next) {
                        Some(&to) => to,
                        None => {
                            if nodes.len() >= opts.cap {
                                complete = false;
                                break 'search;
                            }
                            let to = nodes.len();
                            let kind = if t.failed {
                                NodeKind::Failed
                            } else if t.goal_reached {
                                NodeKind::Goal
                            } else {
                                NodeKind::Open
                            };
                            nodes.push(Node { key: t.next.clone(), depth: depth + 1, kind });
                            parent.push(Some((n, action)));
                            index.insert(t.next, to);
                            match kind {
                                NodeKind::Open => queue.push_back(to),
                                NodeKind::Goal if goal_node.is_none() => goal_node = Some(to),
                                _ => {}
                            }
                            to
                        }
                    };
                    edges.push(Edge { from: n, to, action, reward: t.reward });
                }
            }
            if opts.stop_at_goal && goal_node.is_some() {
                break;
            }
        }
        if !queue.is_empty() {
            complete = false;
            for n in queue {
                nodes[n].kind = NodeKind::Frontier;
            }
        }

        let shortest_completion = goal_node.map(|mut g| {
            let mut path = Vec::new();
            while let Some((p, a)) = parent[g] {
                path.push(a);
                g = p;
            }
            path.reverse();
            path
        });
        StateGraph { nodes, edges, complete, shortest_completion }
    }
}

impl StateGraph {
    pub fn goal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|n| self.nodes[*n].kind == NodeKind::Goal)
    }

    /// Actions labelling at least one edge into a failed node.
    pub fn failure_actions(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| self.nodes[e.to].kind == NodeKind::Failed)
            .map(|e| e.action)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Largest episode reward over discovered goal nodes. Quest rewards are
    /// paid once, so a node's accumulated reward is a function of its key.
    pub fn best_completion_reward(&self, spec: &WorldSpec) -> Option<f64> {
        self.goal_nodes()
            .map(|g| {
                let key = &self.nodes[g].key;
                key.completed_quests.iter().map(|q| spec.quests[q].reward).sum::<f64>() + spec.final_reward
            })
            .max_by(f64::total_cmp)
    }

    pub fn to_export(&self, spec: &WorldSpec) -> GraphExport {
        GraphExport {
            schema_version: WORLD_SCHEMA_VERSION,
            world: spec.name.clone(),
            complete: self.complete,
            nodes: self
                .nodes
                .iter()
                .map(|n| ExportNode {
                    room: spec.rooms[n.key.agent_room].id.clone(),
                    depth: n.depth,
                    kind: n.kind,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExportEdge {
                    from: e.from,
                    to: e.to,
                    action: spec.actions[e.action].id.clone(),
                    reward: e.reward,
                })
                .collect(),
            shortest_completion: self
                .shortest_completion
                .as_ref()
                .map(|p| p.iter().map(|a| spec.actions[*a].id.clone()).collect()),
        }
    }
}

/// Edge-list file format for state graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphExport {
    pub schema_version: u32,
    pub world: String,
    pub complete: bool,
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
    pub shortest_completion: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportNode {
    pub room: String,
    pub depth: u32,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportEdge {
    pub from: usize,
    pub to: usize,
    pub action: String,
    pub reward: f64,
}
