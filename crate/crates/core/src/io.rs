//! Edge-list and role-file formats.
//!
//! Edge lists hold one edge per line, `source target [weight]`, separated by
//! whitespace. `#` starts a comment; blank lines are skipped. Node labels are
//! numbered in order of first appearance and the weight defaults to 1.
//!
//! Role files are JSON objects `{"inputs": [...], "outputs": [...]}` naming
//! node labels. Without `outputs` every node is an output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::network::{Edge, NetworkSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub node_ids: Vec<String>,
    pub edges: Vec<Edge>,
}

impl EdgeList {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.node_ids.iter().position(|l| l == label)
    }

    /// Network with the given roles, or every node on both sides when absent.
    pub fn into_spec(self, roles: Option<(Vec<usize>, Vec<usize>)>) -> Result<NetworkSpec> {
        let n = self.node_ids.len();
        let (inputs, outputs) = roles.unwrap_or_else(|| ((0..n).collect(), (0..n).collect()));
        NetworkSpec::new(self.node_ids, self.edges, inputs, outputs)
    }
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut node_ids = Vec::new();
    let mut edges = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `source target [weight]`, found {} field(s)", fields.len()),
            });
        }
        let weight = match fields.get(2) {
            None => 1.0,
            Some(w) => w.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("weight `{w}` is not a number"),
            })?,
        };
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("weight {weight} must be finite and non-negative"),
            });
        }
        let mut id = |label: &str| {
            *index.entry(label.to_string()).or_insert_with(|| {
                node_ids.push(label.to_string());
                node_ids.len() - 1
            })
        };
        let source = id(fields[0]);
        let target = id(fields[1]);
        edges.push(Edge::new(source, target, weight));
    }
    Ok(EdgeList { node_ids, edges })
}

pub fn read_edge_list(path: &Path) -> Result<EdgeList> {
    parse_edge_list(&std::fs::read_to_string(path)?)
}

/// Edge list text that parses back to the same labels, order and weights.
pub fn write_edge_list(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    for e in spec.edges() {
        let _ = writeln!(out, "{} {} {}", spec.label(e.source), spec.label(e.target), e.weight);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolesFile {
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

fn resolve(labels: &[String], side: Side, names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Err(Error::EmptyNodeSet(side));
    }
    let mut out: Vec<usize> = Vec::with_capacity(names.len());
    for name in names {
        let idx = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLabel(name.clone()))?;
        if out.contains(&idx) {
            return Err(Error::DuplicateNode { side, node: idx });
        }
        out.push(idx);
    }
    Ok(out)
}

/// Resolves a role file against node labels into `(inputs, outputs)`.
pub fn parse_roles(json: &str, node_ids: &[String]) -> Result<(Vec<usize>, Vec<usize>)> {
    let roles: RolesFile = serde_json::from_str(json)?;
    let inputs = resolve(node_ids, Side::Input, &roles.inputs)?;
    let outputs = match &roles.outputs {
        Some(o) => resolve(node_ids, Side::Output, o)?,
        None => (0..node_ids.len()).collect(),
    };
    Ok((inputs, outputs))
}

pub fn read_roles(path: &Path, node_ids: &[String]) -> Result<(Vec<usize>, Vec<usize>)> {
    parse_roles(&std::fs::read_to_string(path)?, node_ids)
}

/// Role file naming the network's current input and output sets.
pub fn write_roles(spec: &NetworkSpec) -> Result<String> {
    let names = |nodes: &[usize]| nodes.iter().map(|&v| spec.label(v).to_string()).collect();
    let roles = RolesFile { inputs: names(spec.inputs()), outputs: Some(names(spec.outputs())) };
    Ok(serde_json::to_string_pretty(&roles)?)
}

/// Reads an edge list and an optional role file into a network.
pub fn load_network(edges: &Path, roles: Option<&Path>) -> Result<NetworkSpec> {
    let list = read_edge_list(edges)?;
    let roles = roles.map(|p| read_roles(p, &list.node_ids)).transpose()?;
    list.into_spec(roles)
}
