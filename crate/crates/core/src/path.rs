//! Discretization of the line onto a finite path of candidate nodes.
//!
//! An optimal schedule never needs positions outside the union of all agent
//! coordinates and the initial facility positions, so solvers work over that
//! finite sorted node set. The path model records, for each stage, which node
//! every agent sits on, and which nodes the facilities start from.

use crate::instance::{abs_diff, Instance};
use crate::rational::Rational;

/// Sorted, duplicate-free candidate positions plus exact coordinate lookups
/// for agents and initial facilities.
#[derive(Debug, Clone)]
pub struct PathModel {
    nodes: Vec<Rational>,
    /// `agent_node[t][i]`: node index of agent `i` at stage `t` (zero-based).
    agent_node: Vec<Vec<usize>>,
    /// `init_node[k]`: node index of facility `k`'s initial position.
    init_node: Vec<usize>,
}

/// Build the path model for an instance. Node count is at most the number of
/// facilities plus the total number of agent coordinates.
pub fn build_path(instance: &Instance) -> PathModel {
    let mut nodes: Vec<Rational> = instance.initial_positions().to_vec();
    for stage in instance.stages() {
        nodes.extend_from_slice(stage);
    }
    nodes.sort();
    nodes.dedup();
    let find = |coord: &Rational| -> usize {
        nodes
            .binary_search(coord)
            .expect("every source coordinate is a node")
    };
    let agent_node = instance
        .stages()
        .iter()
        .map(|stage| stage.iter().map(find).collect())
        .collect();
    let init_node = instance.initial_positions().iter().map(find).collect();
    PathModel {
        nodes,
        agent_node,
        init_node,
    }
}

impl PathModel {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node coordinates, sorted strictly ascending.
    pub fn nodes(&self) -> &[Rational] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &Rational {
        &self.nodes[j]
    }

    /// Distance between two nodes: `|nodes[l] - nodes[j]|`.
    pub fn distance(&self, j: usize, l: usize) -> Rational {
        abs_diff(&self.nodes[j], &self.nodes[l])
    }

    /// Node index of agent `i` at stage `t` (both zero-based).
    pub fn agent_node(&self, t: usize, i: usize) -> usize {
        self.agent_node[t][i]
    }

    pub fn agent_nodes(&self, t: usize) -> &[usize] {
        &self.agent_node[t]
    }

    /// Node index of facility `k`'s initial position.
    pub fn init_node(&self, k: usize) -> usize {
        self.init_node[k]
    }

    pub fn init_nodes(&self) -> &[usize] {
        &self.init_node
    }

    /// Human-readable node list: `"index:coordinate"` with 1-based indices,
    /// as used in trace output.
    pub fn node_labels(&self) -> Vec<String> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(idx, coord)| format!("{}:{}", idx + 1, crate::rational::format_rational(coord)))
            .collect()
    }
}
