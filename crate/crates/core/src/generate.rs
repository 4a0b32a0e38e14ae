//! Random valid AMR graphs for tests, benchmarks and demos.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::AmrGraph;

const CONCEPTS: &[&str] = &[
    "want-01", "go-02", "believe-01", "say-01", "see-01", "possible-01", "obligate-01", "boy", "girl", "city",
    "dog", "cat", "house", "person", "book", "red", "big", "and", "name", "country",
];

const RELATIONS: &[&str] = &[
    ":ARG0", ":ARG1", ":ARG2", ":mod", ":location", ":time", ":manner", ":op1", ":op2", ":domain", ":poss",
    ":ARG0-of", ":ARG1-of",
];

const ATTRIBUTES: &[(&str, &[&str])] = &[
    (":polarity", &["-"]),
    (":quant", &["1", "2", "3", "10", "2.5"]),
    (":wiki", &["-", "\"Paris\"", "\"Q90\""]),
    (":op1", &["\"Paris\"", "\"New York\"", "\"Ann\""]),
    (":mode", &["imperative", "interrogative", "expressive"]),
];

#[derive(Clone, Debug)]
pub struct GraphShape {
    pub nodes: RangeInclusive<usize>,
    /// Upper bound on extra edges into already-attached nodes.
    pub max_reentrancies: usize,
    /// Chance that a node gets an attribute.
    pub attribute_rate: f64,
    /// How many entries of the built-in concept pool to draw from.
    pub concept_pool: usize,
}

impl Default for GraphShape {
    fn default() -> Self {
        GraphShape { nodes: 1..=30, max_reentrancies: 5, attribute_rate: 0.2, concept_pool: CONCEPTS.len() }
    }
}

impl GraphShape {
    pub fn with_nodes(nodes: RangeInclusive<usize>) -> Self {
        GraphShape { nodes, ..Default::default() }
    }
}

fn variable(concept: &str, i: usize) -> String {
    let first = concept.chars().next().filter(char::is_ascii_alphabetic).unwrap_or('x');
    format!("{}{}", first, i)
}

/// A connected acyclic graph: a random tree rooted at the first node, plus
/// extra edges from lower to higher node indices.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, shape: &GraphShape) -> AmrGraph {
    let n = rng.gen_range(shape.nodes.clone()).max(1);
    let pool = &CONCEPTS[..shape.concept_pool.clamp(1, CONCEPTS.len())];
    let concepts: Vec<&str> = (0..n).map(|_| *pool.choose(rng).unwrap()).collect();
    let ids: Vec<String> = concepts.iter().enumerate().map(|(i, c)| variable(c, i)).collect();
    let mut g = AmrGraph::new(ids[0].as_str());
    for (id, c) in ids.iter().zip(&concepts) {
        g.add_node(id.as_str(), *c).expect("fresh ids");
    }
    let mut edges: Vec<(usize, &str, usize)> = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), RELATIONS.choose(rng).unwrap(), i));
    }
    if n > 2 {
        for _ in 0..rng.gen_range(0..=shape.max_reentrancies) {
            let target = rng.gen_range(2..n);
            let source = rng.gen_range(0..target);
            let rel = *RELATIONS.choose(rng).unwrap();
            if !edges.contains(&(source, rel, target)) {
                edges.push((source, rel, target));
            }
        }
    }
    for (s, r, t) in edges {
        g.add_edge(ids[s].as_str(), r, ids[t].as_str());
    }
    for id in &ids {
        if rng.gen_bool(shape.attribute_rate) {
            let (rel, values) = ATTRIBUTES.choose(rng).unwrap();
            g.add_attribute(id.as_str(), *rel, *values.choose(rng).unwrap());
        }
    }
    g
}

/// A copy of `graph` with a few random edits: concept swaps, relation
/// relabels and attribute changes. Node ids and structure are kept.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, graph: &AmrGraph, edits: usize) -> AmrGraph {
    let mut concepts: Vec<String> = graph.nodes().map(|(_, c)| c.to_owned()).collect();
    let mut edges: Vec<(String, String, String)> =
        graph.edges().iter().map(|e| (e.source.to_string(), e.relation.clone(), e.target.to_string())).collect();
    let mut attrs: Vec<(String, String, String)> =
        graph.attributes().iter().map(|a| (a.source.to_string(), a.relation.clone(), a.value.clone())).collect();
    for _ in 0..edits {
        match rng.gen_range(0..4) {
            0 => {
                let i = rng.gen_range(0..concepts.len());
                concepts[i] = CONCEPTS.choose(rng).unwrap().to_string();
            }
            1 if !edges.is_empty() => {
                let i = rng.gen_range(0..edges.len());
                let rel = RELATIONS.choose(rng).unwrap().to_string();
                let candidate = (edges[i].0.clone(), rel, edges[i].2.clone());
                if !edges.contains(&candidate) {
                    edges[i] = candidate;
                }
            }
            2 if !attrs.is_empty() => {
                attrs.remove(rng.gen_range(0..attrs.len()));
            }
            _ => {
                let ids: Vec<_> = graph.node_ids().collect();
                let source = ids.choose(rng).unwrap().to_string();
                let (rel, values) = ATTRIBUTES.choose(rng).unwrap();
                let candidate = (source, rel.to_string(), values.choose(rng).unwrap().to_string());
                if !attrs.contains(&candidate) {
                    attrs.push(candidate);
                }
            }
        }
    }
    let mut g = AmrGraph::new(graph.root().clone());
    for ((id, _), c) in graph.nodes().zip(concepts) {
        g.add_node(id.clone(), c).expect("ids unique in source graph");
    }
    for (s, r, t) in edges {
        g.add_edge(s, r, t);
    }
    for (s, r, v) in attrs {
        g.add_attribute(s, r, v);
    }
    g
}
