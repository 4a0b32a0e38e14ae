//! The AMR graph model and structural validation.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque node identifier.
///
/// Variables read from PENMAN keep their names; synthesized graphs use
/// `z0`, `z1`, ...
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    /// The `k`-th synthesized identifier, `z{k}`.
    pub fn synthetic(k: usize) -> Self {
        NodeId(format!("z{}", k))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// A relation between two nodes. Relation labels carry their leading colon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: NodeId,
    pub relation: String,
    pub target: NodeId,
}

/// A relation from a node to a constant (`-`, numbers, quoted strings).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub source: NodeId,
    pub relation: String,
    pub value: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node `{0}` is already defined")]
    DuplicateNode(NodeId),
}

/// A rooted, labeled, directed graph.
///
/// Edge and attribute order is the insertion order, which for parsed graphs
/// is the textual order of relations. Traversals rely on it being stable.
#[derive(Clone, Debug, PartialEq)]
pub struct AmrGraph {
    root: NodeId,
    nodes: Vec<(NodeId, String)>,
    index: HashMap<NodeId, usize>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
}

pub(crate) fn normalize_relation(relation: impl Into<String>) -> String {
    let relation = relation.into();
    if relation.starts_with(':') {
        relation
    } else {
        format!(":{}", relation)
    }
}

impl AmrGraph {
    /// Creates an empty graph whose root is `root`. The root node itself
    /// still has to be added with [`AmrGraph::add_node`].
    pub fn new(root: impl Into<NodeId>) -> Self {
        AmrGraph {
            root: root.into(),
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            attributes: Vec::new(),
        }
    }

    /// Convenience constructor for a graph with a single node.
    pub fn single(id: impl Into<NodeId>, concept: impl Into<String>) -> Self {
        let id = id.into();
        let mut g = AmrGraph::new(id.clone());
        g.add_node(id, concept).expect("fresh graph");
        g
    }

    pub fn add_node(
        &mut self,
        id: impl Into<NodeId>,
        concept: impl Into<String>,
    ) -> Result<(), GraphError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.index.insert(id.clone(), self.nodes.len());
        self.nodes.push((id, concept.into()));
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        source: impl Into<NodeId>,
        relation: impl Into<String>,
        target: impl Into<NodeId>,
    ) {
        self.edges.push(Edge {
            source: source.into(),
            relation: normalize_relation(relation),
            target: target.into(),
        });
    }

    pub fn add_attribute(
        &mut self,
        source: impl Into<NodeId>,
        relation: impl Into<String>,
        value: impl Into<String>,
    ) {
        self.attributes.push(Attribute {
            source: source.into(),
            relation: normalize_relation(relation),
            value: value.into(),
        });
    }

    pub(crate) fn set_edge_target(&mut self, index: usize, target: NodeId) {
        self.edges[index].target = target;
    }

    pub fn root(&self) -> &NodeId {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in insertion order.
    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &str)> + '_ {
        self.nodes.iter().map(|(id, c)| (id, c.as_str()))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes.iter().map(|(id, _)| id)
    }

    pub fn concept(&self, id: &str) -> Option<&str> {
        self.index.get(id).map(|&i| self.nodes[i].1.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Position of `id` in node insertion order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node_at(&self, position: usize) -> (&NodeId, &str) {
        let (id, c) = &self.nodes[position];
        (id, c)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    /// Outgoing edge indices per node position, in stored edge order.
    /// Edges with a dangling endpoint are skipped.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(s), true) = (self.position(e.source.as_str()), self.contains(e.target.as_str())) {
                out[s].push(i);
            }
        }
        out
    }

    /// Attribute indices per node position, in stored order.
    pub fn node_attributes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, a) in self.attributes.iter().enumerate() {
            if let Some(s) = self.position(a.source.as_str()) {
                out[s].push(i);
            }
        }
        out
    }

    /// Number of incoming edges per node position.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            if let Some(t) = self.position(e.target.as_str()) {
                deg[t] += 1;
            }
        }
        deg
    }

    /// Returns a copy with every node id passed through `rename`.
    /// `rename` must be injective.
    pub fn rename_nodes<F>(&self, mut rename: F) -> AmrGraph
    where
        F: FnMut(&NodeId) -> NodeId,
    {
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        let mut get = |id: &NodeId| -> NodeId {
            map.entry(id.clone()).or_insert_with(|| rename(id)).clone()
        };
        let mut g = AmrGraph::new(get(&self.root));
        for (id, c) in &self.nodes {
            let new_id = get(id);
            g.index.insert(new_id.clone(), g.nodes.len());
            g.nodes.push((new_id, c.clone()));
        }
        for e in &self.edges {
            g.add_edge(get(&e.source), e.relation.clone(), get(&e.target));
        }
        for a in &self.attributes {
            g.add_attribute(get(&a.source), a.relation.clone(), a.value.clone());
        }
        g
    }

    /// Returns `Ok(())` when [`validate`] finds nothing.
    pub fn check(&self) -> Result<(), InvalidGraph> {
        let diagnostics = validate(self);
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(InvalidGraph(diagnostics))
        }
    }
}

/// One violated graph invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    MissingRoot(NodeId),
    DanglingEdge { index: usize, node: NodeId },
    DanglingAttribute { index: usize, node: NodeId },
    DuplicateEdge { index: usize },
    DuplicateAttribute { index: usize },
    /// Node sequence of a directed cycle; the last node links back to the first.
    Cycle(Vec<NodeId>),
    /// A connected component that does not contain the root.
    Disconnected(Vec<NodeId>),
    /// Nodes connected to the root only against edge direction.
    Unreachable(Vec<NodeId>),
}

fn join_ids(ids: &[NodeId], sep: &str) -> String {
    ids.iter().map(NodeId::as_str).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingRoot(id) => write!(f, "root `{}` is not a node", id),
            Diagnostic::DanglingEdge { index, node } => {
                write!(f, "edge {} refers to unknown node `{}`", index, node)
            }
            Diagnostic::DanglingAttribute { index, node } => {
                write!(f, "attribute {} refers to unknown node `{}`", index, node)
            }
            Diagnostic::DuplicateEdge { index } => write!(f, "edge {} duplicates an earlier edge", index),
            Diagnostic::DuplicateAttribute { index } => {
                write!(f, "attribute {} duplicates an earlier attribute", index)
            }
            Diagnostic::Cycle(ids) => {
                write!(f, "cycle: {} -> {}", join_ids(ids, " -> "), ids[0])
            }
            Diagnostic::Disconnected(ids) => {
                write!(f, "component not connected to the root: {}", join_ids(ids, ", "))
            }
            Diagnostic::Unreachable(ids) => {
                write!(f, "nodes not reachable from the root: {}", join_ids(ids, ", "))
            }
        }
    }
}

/// Error carrying the diagnostics of a graph that failed validation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid graph: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidGraph(pub Vec<Diagnostic>);

/// Checks every graph invariant and reports one diagnostic per violation.
pub fn validate(graph: &AmrGraph) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = graph.node_count();
    let root = graph.position(graph.root.as_str());
    if root.is_none() {
        out.push(Diagnostic::MissingRoot(graph.root.clone()));
    }

    let mut seen_edges = HashSet::new();
    for (i, e) in graph.edges.iter().enumerate() {
        for end in [&e.source, &e.target] {
            if !graph.contains(end.as_str()) {
                out.push(Diagnostic::DanglingEdge { index: i, node: end.clone() });
            }
        }
        if !seen_edges.insert(e) {
            out.push(Diagnostic::DuplicateEdge { index: i });
        }
    }
    let mut seen_attrs = HashSet::new();
    for (i, a) in graph.attributes.iter().enumerate() {
        if !graph.contains(a.source.as_str()) {
            out.push(Diagnostic::DanglingAttribute { index: i, node: a.source.clone() });
        }
        if !seen_attrs.insert(a) {
            out.push(Diagnostic::DuplicateAttribute { index: i });
        }
    }
    if n == 0 {
        return out;
    }

    let out_edges = graph.out_edges();
    let succ: Vec<Vec<usize>> = out_edges
        .iter()
        .map(|es| es.iter().map(|&e| graph.position(graph.edges[e].target.as_str()).unwrap()).collect())
        .collect();

    out.extend(find_cycles(graph, &succ));

    // Undirected components.
    let mut undirected = vec![Vec::new(); n];
    for (s, ts) in succ.iter().enumerate() {
        for &t in ts {
            undirected[s].push(t);
            undirected[t].push(s);
        }
    }
    let anchor = root.unwrap_or(0);
    let mut component = vec![usize::MAX; n];
    let mut next_component = 0;
    for start in std::iter::once(anchor).chain(0..n) {
        if component[start] != usize::MAX {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        component[start] = next_component;
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for &v in &undirected[u] {
                if component[v] == usize::MAX {
                    component[v] = next_component;
                    queue.push_back(v);
                }
            }
        }
        if next_component > 0 {
            members.sort_unstable();
            out.push(Diagnostic::Disconnected(
                members.into_iter().map(|i| graph.nodes[i].0.clone()).collect(),
            ));
        }
        next_component += 1;
    }

    if let Some(r) = root {
        let reach = reachable_from(&succ, r);
        let unreachable: Vec<NodeId> = (0..n)
            .filter(|&i| component[i] == 0 && !reach[i])
            .map(|i| graph.nodes[i].0.clone())
            .collect();
        if !unreachable.is_empty() {
            out.push(Diagnostic::Unreachable(unreachable));
        }
    }
    out
}

fn reachable_from(succ: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// One cycle diagnostic per back edge of an iterative DFS.
fn find_cycles(graph: &AmrGraph, succ: &[Vec<usize>]) -> Vec<Diagnostic> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = succ.len();
    let mut color = vec![WHITE; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if color[start] != WHITE {
            continue;
        }
        // (node, next successor slot)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = GRAY;
        while let Some(&mut (u, ref mut slot)) = stack.last_mut() {
            if *slot < succ[u].len() {
                let v = succ[u][*slot];
                *slot += 1;
                match color[v] {
                    WHITE => {
                        color[v] = GRAY;
                        stack.push((v, 0));
                    }
                    GRAY => {
                        let from = stack.iter().position(|&(w, _)| w == v).unwrap();
                        cycles.push(Diagnostic::Cycle(
                            stack[from..].iter().map(|&(w, _)| graph.nodes[w].0.clone()).collect(),
                        ));
                    }
                    _ => {}
                }
            } else {
                color[u] = BLACK;
                stack.pop();
            }
        }
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_is_valid() {
        let g = AmrGraph::single("z0", "boy");
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn self_loop_is_one_cycle() {
        let mut g = AmrGraph::new("z0");
        g.add_node("z0", "addictive-02").unwrap();
        g.add_node("z1", "harm-01").unwrap();
        g.add_edge("z0", ":ARG0", "z1");
        g.add_edge("z1", ":ARG1", "z1");
        let d = validate(&g);
        assert_eq!(d, vec![Diagnostic::Cycle(vec![NodeId::from("z1")])]);
        assert_eq!(d[0].to_string(), "cycle: z1 -> z1");
    }

    #[test]
    fn longer_cycle_lists_its_nodes() {
        let mut g = AmrGraph::new("a");
        for id in ["a", "b", "c"] {
            g.add_node(id, "x").unwrap();
        }
        g.add_edge("a", ":r", "b");
        g.add_edge("b", ":r", "c");
        g.add_edge("c", ":r", "a");
        assert_eq!(
            validate(&g),
            vec![Diagnostic::Cycle(vec!["a".into(), "b".into(), "c".into()])]
        );
    }

    #[test]
    fn two_disconnected_nodes() {
        let mut g = AmrGraph::new("a");
        g.add_node("a", "boy").unwrap();
        g.add_node("b", "girl").unwrap();
        assert_eq!(validate(&g), vec![Diagnostic::Disconnected(vec!["b".into()])]);
    }

    #[test]
    fn missing_root_and_dangling_edge() {
        let mut g = AmrGraph::new("r");
        g.add_node("a", "boy").unwrap();
        g.add_edge("a", ":ARG0", "q");
        let d = validate(&g);
        assert!(d.contains(&Diagnostic::MissingRoot("r".into())));
        assert!(d.contains(&Diagnostic::DanglingEdge { index: 0, node: "q".into() }));
    }

    #[test]
    fn duplicate_triples_rejected_but_multi_edges_allowed() {
        let mut g = AmrGraph::new("a");
        g.add_node("a", "x").unwrap();
        g.add_node("b", "y").unwrap();
        g.add_edge("a", ":ARG0", "b");
        g.add_edge("a", ":ARG1", "b");
        assert!(validate(&g).is_empty());
        g.add_edge("a", ":ARG0", "b");
        assert_eq!(validate(&g), vec![Diagnostic::DuplicateEdge { index: 2 }]);
    }

    #[test]
    fn edge_into_root_is_unreachable() {
        let mut g = AmrGraph::new("a");
        g.add_node("a", "x").unwrap();
        g.add_node("b", "y").unwrap();
        g.add_edge("b", ":ARG0", "a");
        assert_eq!(validate(&g), vec![Diagnostic::Unreachable(vec!["b".into()])]);
    }

    #[test]
    fn duplicate_node_rejected_at_construction() {
        let mut g = AmrGraph::new("a");
        g.add_node("a", "x").unwrap();
        assert_eq!(g.add_node("a", "y"), Err(GraphError::DuplicateNode("a".into())));
    }

    #[test]
    fn relations_gain_a_colon() {
        let mut g = AmrGraph::single("a", "x");
        g.add_attribute("a", "polarity", "-");
        assert_eq!(g.attributes()[0].relation, ":polarity");
    }
}
