//! Graph view of a trajectory: distinct actions as nodes, consecutive steps
//! as temporal edges.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ActionKind, TrajectoryRecord};

/// Identity of an action node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionNode {
    pub action_kind: ActionKind,
    pub target_path: String,
    pub command_head: String,
}

impl ActionNode {
    pub fn label(&self) -> String {
        let mut s = format!("{}", self.action_kind);
        if !self.command_head.is_empty() {
            write!(s, " {}", self.command_head).unwrap();
        }
        if !self.target_path.is_empty() {
            write!(s, " {}", self.target_path).unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphectoryGraph {
    /// Nodes in order of first visit.
    pub nodes: Vec<ActionNode>,
    /// Distinct (from, to) node-index pairs.
    pub edges: BTreeSet<(usize, usize)>,
    /// Node index visited at each step.
    pub step_walk: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphectoryStats {
    pub nc: usize,
    pub tec: usize,
    pub lc: usize,
}

fn normalize_target(path: Option<&str>) -> String {
    path.map(|p| p.trim().trim_start_matches("./").to_string())
        .unwrap_or_default()
}

fn command_head(command: &str) -> String {
    command
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .to_lowercase()
}

pub fn build_graphectory(traj: &TrajectoryRecord) -> Result<GraphectoryGraph> {
    if traj.steps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut index: HashMap<ActionNode, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut step_walk = Vec::with_capacity(traj.steps.len());
    for step in &traj.steps {
        let node = ActionNode {
            action_kind: step.action_kind,
            target_path: normalize_target(step.target_path.as_deref()),
            command_head: command_head(&step.command_text),
        };
        let id = *index.entry(node.clone()).or_insert_with(|| {
            nodes.push(node);
            nodes.len() - 1
        });
        step_walk.push(id);
    }
    let edges = step_walk.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(GraphectoryGraph {
        nodes,
        edges,
        step_walk,
    })
}

/// `nc` = distinct nodes, `tec` = distinct temporal edges, `lc` = walk
/// positions that re-enter an already visited node.
pub fn graphectory_stats(g: &GraphectoryGraph) -> GraphectoryStats {
    let mut seen = HashSet::new();
    let lc = g.step_walk.iter().filter(|n| !seen.insert(**n)).count();
    GraphectoryStats {
        nc: g.nodes.len(),
        tec: g.edges.len(),
        lc,
    }
}

/// Graphviz DOT export: node list, then edges in order of first traversal.
pub fn to_dot(g: &GraphectoryGraph, name: &str) -> String {
    let mut out = String::new();
    let escape = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
    writeln!(out, "digraph \"{}\" {{", escape(name)).unwrap();
    for (i, node) in g.nodes.iter().enumerate() {
        writeln!(out, "  n{i} [label=\"{}\"];", escape(&node.label())).unwrap();
    }
    let mut emitted = HashSet::new();
    for w in g.step_walk.windows(2) {
        if emitted.insert((w[0], w[1])) {
            writeln!(out, "  n{} -> n{};", w[0], w[1]).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
