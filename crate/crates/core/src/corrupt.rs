//! Noise functions for denoising objectives: node/edge masking, sub-graph
//! masking and text token masking.
//!
//! All randomness comes from an explicitly passed generator. Every
//! corruption returns a [`CorruptionRecord`] from which the original
//! sequence can be restored exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{AmrGraph, InvalidGraph, NodeId};
use crate::linearize::{linearize_detailed, Linearization, Token, TokenSeq};

/// Masking rates and the corpus seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorruptionConfig {
    pub node_rate: f64,
    pub edge_rate: f64,
    pub subgraph_rate: f64,
    pub text_rate: f64,
    pub seed: u64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            node_rate: 0.15,
            edge_rate: 0.15,
            subgraph_rate: 0.35,
            text_rate: 0.15,
            seed: 0,
        }
    }
}

impl CorruptionConfig {
    pub fn check(&self) -> Result<(), CorruptError> {
        for (name, rate) in [
            ("node_rate", self.node_rate),
            ("edge_rate", self.edge_rate),
            ("subgraph_rate", self.subgraph_rate),
            ("text_rate", self.text_rate),
        ] {
            check_rate(name, rate)?;
        }
        Ok(())
    }
}

fn check_rate(name: &'static str, rate: f64) -> Result<(), CorruptError> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(CorruptError::Rate { name, rate })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorruptError {
    #[error(transparent)]
    InvalidGraph(#[from] InvalidGraph),
    #[error("{name} must be in [0, 1], got {rate}")]
    Rate { name: &'static str, rate: f64 },
    #[error("text to mask contains marker token `{0}`")]
    MarkerInText(String),
    #[error("{0} corruption requested but no {0} was given")]
    MissingInput(&'static str),
    #[error("records overlap and cannot be merged")]
    Overlap,
    #[error("no node or edge `{0}` in the graph")]
    UnknownElement(String),
    #[error("the sub-graph at `{0}` cannot be masked")]
    NotEligible(NodeId),
}

/// Generator used for all corruption. Example `i` of a corpus seeded with
/// `seed` uses `seed ^ i`.
pub fn example_rng(seed: u64, example_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ example_index)
}

/// `round(rate * n)` with ties away from zero, capped at `n`.
pub fn masked_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64).round() as usize).min(n)
}

/// A sub-graph cut out by sub-graph masking.
#[derive(Clone, Debug, PartialEq)]
pub struct RemovedSubgraph {
    /// Node the sub-graph hung from and the edge that attached it.
    pub parent: NodeId,
    pub edge_index: usize,
    pub relation: String,
    /// Nodes expanded inside the removed span with the edges and attributes
    /// among them. Rooted at the node the edge pointed to.
    pub graph: AmrGraph,
}

/// What a corruption changed.
///
/// Positions in `graph_replacements` and `text_replacements` index the
/// corrupted sequences; each entry holds the original tokens the `[mask]`
/// at that position stands for.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorruptionRecord {
    pub masked_node_ids: BTreeSet<NodeId>,
    pub masked_edge_indices: BTreeSet<usize>,
    pub removed_subgraph: Option<RemovedSubgraph>,
    pub masked_text_positions: BTreeSet<usize>,
    /// Whether sub-graph masking was drawn for this example (even if no
    /// eligible sub-graph existed).
    pub subgraph_selected: bool,
    graph_replacements: BTreeMap<usize, Vec<Token>>,
    text_replacements: BTreeMap<usize, Token>,
}

impl CorruptionRecord {
    pub fn is_empty(&self) -> bool {
        self.graph_replacements.is_empty() && self.text_replacements.is_empty()
    }

    /// Number of `[mask]` tokens inserted into the graph sequence.
    pub fn graph_mask_count(&self) -> usize {
        self.graph_replacements.len()
    }

    /// Rebuilds the original graph sequence from its corrupted form.
    pub fn restore_graph(&self, corrupted: &[Token]) -> TokenSeq {
        let mut out = Vec::with_capacity(corrupted.len());
        for (i, t) in corrupted.iter().enumerate() {
            match self.graph_replacements.get(&i) {
                Some(orig) => out.extend(orig.iter().cloned()),
                None => out.push(t.clone()),
            }
        }
        TokenSeq(out)
    }

    /// Rebuilds the original text from its corrupted form.
    pub fn restore_text(&self, corrupted: &[Token]) -> TokenSeq {
        corrupted
            .iter()
            .enumerate()
            .map(|(i, t)| self.text_replacements.get(&i).unwrap_or(t).clone())
            .collect()
    }

    /// Combines a graph-side record with a text-side one.
    pub fn merge(&mut self, other: CorruptionRecord) -> Result<(), CorruptError> {
        let graph_clash = !self.graph_replacements.is_empty() && !other.graph_replacements.is_empty();
        let text_clash = !self.text_replacements.is_empty() && !other.text_replacements.is_empty();
        if graph_clash || text_clash || (self.removed_subgraph.is_some() && other.removed_subgraph.is_some()) {
            return Err(CorruptError::Overlap);
        }
        self.masked_node_ids.extend(other.masked_node_ids);
        self.masked_edge_indices.extend(other.masked_edge_indices);
        self.masked_text_positions.extend(other.masked_text_positions);
        self.removed_subgraph = self.removed_subgraph.take().or(other.removed_subgraph);
        self.subgraph_selected |= other.subgraph_selected;
        self.graph_replacements.extend(other.graph_replacements);
        self.text_replacements.extend(other.text_replacements);
        Ok(())
    }
}

/// One step of a composed corruption.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Corruption {
    /// With the given probability, replace one eligible sub-graph span by `[mask]`.
    Subgraph { probability: f64 },
    NodesEdges { node_rate: f64, edge_rate: f64 },
    Text { rate: f64 },
}

impl Corruption {
    /// The graph-side operations of `config`: sub-graph, then node/edge masking.
    pub fn graph_ops(config: &CorruptionConfig) -> [Corruption; 2] {
        [
            Corruption::Subgraph { probability: config.subgraph_rate },
            Corruption::NodesEdges { node_rate: config.node_rate, edge_rate: config.edge_rate },
        ]
    }
}

/// Result of [`compose`]: corrupted sequences for whichever inputs were given.
#[derive(Clone, Debug, PartialEq)]
pub struct Corrupted {
    pub graph: Option<TokenSeq>,
    pub text: Option<TokenSeq>,
    pub record: CorruptionRecord,
}

struct GraphState<'g> {
    graph: &'g AmrGraph,
    lin: Linearization,
    /// Start of the removed span, with its end (inclusive).
    removed: Option<(usize, usize)>,
    removed_node: Option<usize>,
    masked: Vec<bool>,
}

impl<'g> GraphState<'g> {
    fn new(graph: &'g AmrGraph) -> Result<Self, InvalidGraph> {
        let lin = linearize_detailed(graph)?;
        let masked = vec![false; lin.tokens.len()];
        Ok(GraphState { graph, lin, removed: None, removed_node: None, masked })
    }

    fn untouched(&self, pos: usize) -> bool {
        !self.masked[pos] && !self.removed.is_some_and(|(a, b)| (a..=b).contains(&pos))
    }

    /// Non-root nodes whose span `:rel ( <Zk> ... )` defines no pointer that
    /// is referenced outside it and contains no masked token.
    fn eligible_subgraphs(&self) -> Vec<usize> {
        let lin = &self.lin;
        let def_pos: HashMap<u32, usize> =
            lin.pointer.iter().enumerate().map(|(node, &k)| (k, lin.span[node].0)).collect();
        // Bare pointer references: (position, defining position).
        let refs: Vec<(usize, usize)> = lin
            .tokens
            .iter()
            .enumerate()
            .filter(|&(i, t)| matches!(t, Token::Pointer(_)) && (i == 0 || lin.tokens[i - 1] != Token::Open))
            .map(|(i, t)| match t {
                Token::Pointer(k) => (i, def_pos[k]),
                _ => unreachable!(),
            })
            .collect();
        (0..self.graph.node_count())
            .filter(|&node| {
                let Some(edge) = lin.parent_edge[node] else { return false };
                let start = lin.relation_pos[edge];
                let (open, close) = lin.span[node];
                if !(start..=close).all(|p| self.untouched(p)) {
                    return false;
                }
                !refs.iter().any(|&(at, def)| (open..=close).contains(&def) && !(start..=close).contains(&at))
            })
            .collect()
    }

    fn mask_subgraph<R: Rng + ?Sized>(
        &mut self,
        probability: f64,
        rng: &mut R,
        record: &mut CorruptionRecord,
    ) -> Result<(), CorruptError> {
        check_rate("subgraph_rate", probability)?;
        let selected = rng.gen_bool(probability);
        if !selected {
            return Ok(());
        }
        record.subgraph_selected = true;
        if self.removed.is_some() {
            return Ok(());
        }
        let eligible = self.eligible_subgraphs();
        if eligible.is_empty() {
            return Ok(());
        }
        let node = eligible[rng.gen_range(0..eligible.len())];
        let edge = self.lin.parent_edge[node].unwrap();
        self.removed = Some((self.lin.relation_pos[edge], self.lin.span[node].1));
        self.removed_node = Some(node);
        Ok(())
    }

    fn mask_nodes_edges<R: Rng + ?Sized>(
        &mut self,
        node_rate: f64,
        edge_rate: f64,
        rng: &mut R,
        record: &mut CorruptionRecord,
    ) -> Result<(), CorruptError> {
        check_rate("node_rate", node_rate)?;
        check_rate("edge_rate", edge_rate)?;
        let nodes: Vec<usize> = (0..self.graph.node_count())
            .filter(|&n| self.untouched(self.lin.concept_pos[n]))
            .collect();
        let edges: Vec<usize> = (0..self.graph.edges().len())
            .filter(|&e| self.untouched(self.lin.relation_pos[e]))
            .collect();
        let k = masked_count(node_rate, nodes.len());
        for i in index::sample(rng, nodes.len(), k) {
            let n = nodes[i];
            self.masked[self.lin.concept_pos[n]] = true;
            record.masked_node_ids.insert(self.graph.node_at(n).0.clone());
        }
        let k = masked_count(edge_rate, edges.len());
        for i in index::sample(rng, edges.len(), k) {
            let e = edges[i];
            self.masked[self.lin.relation_pos[e]] = true;
            record.masked_edge_indices.insert(e);
        }
        Ok(())
    }

    fn finish(self, record: &mut CorruptionRecord) -> TokenSeq {
        let tokens = &self.lin.tokens;
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if let Some((a, b)) = self.removed.filter(|&(a, _)| a == i) {
                record.graph_replacements.insert(out.len(), tokens[a..=b].to_vec());
                out.push(Token::Mask);
                i = b + 1;
                continue;
            }
            if self.masked[i] {
                record.graph_replacements.insert(out.len(), vec![tokens[i].clone()]);
                out.push(Token::Mask);
            } else {
                out.push(tokens[i].clone());
            }
            i += 1;
        }
        if let Some(node) = self.removed_node {
            record.removed_subgraph = Some(self.removed_subgraph(node));
        }
        TokenSeq(out)
    }

    fn removed_subgraph(&self, node: usize) -> RemovedSubgraph {
        let g = self.graph;
        let (open, close) = self.lin.span[node];
        let inside: Vec<usize> =
            (0..g.node_count()).filter(|&n| (open..=close).contains(&self.lin.span[n].0)).collect();
        let (root_id, root_concept) = g.node_at(node);
        let mut sub = AmrGraph::new(root_id.clone());
        for &n in &inside {
            let (id, c) = g.node_at(n);
            sub.add_node(id.clone(), c).expect("distinct nodes");
        }
        for e in g.edges() {
            if sub.contains(e.source.as_str()) && sub.contains(e.target.as_str()) {
                sub.add_edge(e.source.clone(), e.relation.clone(), e.target.clone());
            }
        }
        for a in g.attributes() {
            if sub.contains(a.source.as_str()) {
                sub.add_attribute(a.source.clone(), a.relation.clone(), a.value.clone());
            }
        }
        debug_assert_eq!(sub.concept(root_id.as_str()), Some(root_concept));
        let edge_index = self.lin.parent_edge[node].unwrap();
        let edge = &g.edges()[edge_index];
        RemovedSubgraph {
            parent: edge.source.clone(),
            edge_index,
            relation: edge.relation.clone(),
            graph: sub,
        }
    }
}

struct TextState<'t> {
    tokens: &'t [Token],
    masked: Vec<bool>,
}

impl<'t> TextState<'t> {
    fn new(tokens: &'t [Token]) -> Result<Self, CorruptError> {
        if let Some(m) = tokens.iter().find(|t| t.is_marker()) {
            return Err(CorruptError::MarkerInText(m.to_string()));
        }
        Ok(TextState { tokens, masked: vec![false; tokens.len()] })
    }

    fn mask<R: Rng + ?Sized>(&mut self, rate: f64, rng: &mut R) -> Result<(), CorruptError> {
        check_rate("text_rate", rate)?;
        let open: Vec<usize> = (0..self.tokens.len()).filter(|&i| !self.masked[i]).collect();
        let k = masked_count(rate, open.len());
        for i in index::sample(rng, open.len(), k) {
            self.masked[open[i]] = true;
        }
        Ok(())
    }

    fn finish(self, record: &mut CorruptionRecord) -> TokenSeq {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if self.masked[i] {
                    record.masked_text_positions.insert(i);
                    record.text_replacements.insert(i, t.clone());
                    Token::Mask
                } else {
                    t.clone()
                }
            })
            .collect()
    }
}

/// Applies `ops` in order to the given graph and/or text.
///
/// Graph operations act on the running result: sub-graph masking only picks
/// spans with no masked token, node/edge masking only picks elements outside
/// the removed span and not yet masked. The returned record covers all steps.
pub fn compose<R: Rng + ?Sized>(
    graph: Option<&AmrGraph>,
    text: Option<&[Token]>,
    ops: &[Corruption],
    rng: &mut R,
) -> Result<Corrupted, CorruptError> {
    let mut graph_state = graph.map(GraphState::new).transpose()?;
    let mut text_state = text.map(TextState::new).transpose()?;
    let mut record = CorruptionRecord::default();
    for op in ops {
        match *op {
            Corruption::Subgraph { probability } => graph_state
                .as_mut()
                .ok_or(CorruptError::MissingInput("graph"))?
                .mask_subgraph(probability, rng, &mut record)?,
            Corruption::NodesEdges { node_rate, edge_rate } => graph_state
                .as_mut()
                .ok_or(CorruptError::MissingInput("graph"))?
                .mask_nodes_edges(node_rate, edge_rate, rng, &mut record)?,
            Corruption::Text { rate } => {
                text_state.as_mut().ok_or(CorruptError::MissingInput("text"))?.mask(rate, rng)?
            }
        }
    }
    let graph = graph_state.map(|s| s.finish(&mut record));
    let text = text_state.map(|s| s.finish(&mut record));
    Ok(Corrupted { graph, text, record })
}

/// Masks `round(node_rate·|nodes|)` concept tokens and
/// `round(edge_rate·|edges|)` relation tokens of the linearized graph.
/// Pointers and parentheses are kept.
pub fn mask_nodes_edges<R: Rng + ?Sized>(
    graph: &AmrGraph,
    config: &CorruptionConfig,
    rng: &mut R,
) -> Result<(TokenSeq, CorruptionRecord), CorruptError> {
    let ops = [Corruption::NodesEdges { node_rate: config.node_rate, edge_rate: config.edge_rate }];
    let c = compose(Some(graph), None, &ops, rng)?;
    Ok((c.graph.unwrap(), c.record))
}

/// With probability `subgraph_rate`, replaces one eligible sub-graph span
/// (`:rel ( <Zk> ... )`) by a single `[mask]`.
pub fn mask_subgraph<R: Rng + ?Sized>(
    graph: &AmrGraph,
    config: &CorruptionConfig,
    rng: &mut R,
) -> Result<(TokenSeq, CorruptionRecord), CorruptError> {
    let ops = [Corruption::Subgraph { probability: config.subgraph_rate }];
    let c = compose(Some(graph), None, &ops, rng)?;
    Ok((c.graph.unwrap(), c.record))
}

/// Masks exactly the concepts of `nodes` and the relations of the edges at
/// `edges` (stored edge indices).
pub fn mask_selected(
    graph: &AmrGraph,
    nodes: &[&str],
    edges: &[usize],
) -> Result<(TokenSeq, CorruptionRecord), CorruptError> {
    let mut state = GraphState::new(graph)?;
    let mut record = CorruptionRecord::default();
    for &id in nodes {
        let n = graph.position(id).ok_or_else(|| CorruptError::UnknownElement(id.to_owned()))?;
        state.masked[state.lin.concept_pos[n]] = true;
        record.masked_node_ids.insert(graph.node_at(n).0.clone());
    }
    for &e in edges {
        if e >= graph.edges().len() {
            return Err(CorruptError::UnknownElement(format!("edge {}", e)));
        }
        state.masked[state.lin.relation_pos[e]] = true;
        record.masked_edge_indices.insert(e);
    }
    let seq = state.finish(&mut record);
    Ok((seq, record))
}

/// Replaces the span of the sub-graph rooted at `node`, including the
/// relation that introduces it, by one `[mask]`.
pub fn remove_subgraph_at(graph: &AmrGraph, node: &str) -> Result<(TokenSeq, CorruptionRecord), CorruptError> {
    let mut state = GraphState::new(graph)?;
    let n = graph.position(node).ok_or_else(|| CorruptError::UnknownElement(node.to_owned()))?;
    if !state.eligible_subgraphs().contains(&n) {
        return Err(CorruptError::NotEligible(graph.node_at(n).0.clone()));
    }
    let edge = state.lin.parent_edge[n].unwrap();
    state.removed = Some((state.lin.relation_pos[edge], state.lin.span[n].1));
    state.removed_node = Some(n);
    let mut record = CorruptionRecord { subgraph_selected: true, ..Default::default() };
    let seq = state.finish(&mut record);
    Ok((seq, record))
}

/// Replaces `round(rate·n)` uniformly chosen words with `[mask]`.
pub fn mask_text<R: Rng + ?Sized>(
    tokens: &[Token],
    rate: f64,
    rng: &mut R,
) -> Result<(TokenSeq, CorruptionRecord), CorruptError> {
    let c = compose(None, Some(tokens), &[Corruption::Text { rate }], rng)?;
    Ok((c.text.unwrap(), c.record))
}
