//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes PENMAN text and returns a JSON string. The plain
//! functions are usable (and tested) outside the browser.

use amrforge::corrupt::{compose, example_rng, Corruption, CorruptionConfig};
use amrforge::generate::{random_graph, GraphShape};
use amrforge::metrics::{fine_grained, smatch, SubMetric};
use amrforge::penman::{parse_penman, serialize_graph, ParseMode};
use amrforge::stats::compute_stats;
use amrforge::{linearize, AmrGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse(text: &str) -> Result<AmrGraph, String> {
    parse_penman(text, ParseMode::Strict).map(|d| d.graph).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Linearized tokens, canonical PENMAN and graph statistics.
pub fn linearize_text(penman: &str) -> Result<String, String> {
    let g = parse(penman)?;
    let tokens = linearize(&g).map_err(|e| e.to_string())?;
    let stats = compute_stats(&g).map_err(|e| e.to_string())?;
    Ok(to_json(&json!({
        "tokens": tokens.to_string(),
        "penman": serialize_graph(&g).map_err(|e| e.to_string())?,
        "stats": stats,
    })))
}

/// Sub-graph then node/edge masking of one graph.
pub fn corrupt_text(penman: &str, seed: u64, node_rate: f64, edge_rate: f64, subgraph_rate: f64) -> Result<String, String> {
    let g = parse(penman)?;
    let cfg = CorruptionConfig { node_rate, edge_rate, subgraph_rate, seed, ..CorruptionConfig::default() };
    cfg.check().map_err(|e| e.to_string())?;
    let ops = Corruption::graph_ops(&cfg);
    let c = compose(Some(&g), None, &ops, &mut example_rng(seed, 0)).map_err(|e| e.to_string())?;
    let corrupted = c.graph.unwrap_or_default();
    Ok(to_json(&json!({
        "original": linearize(&g).map_err(|e| e.to_string())?.to_string(),
        "corrupted": corrupted.to_string(),
        "masked_nodes": c.record.masked_node_ids.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
        "masked_edges": c.record.masked_edge_indices,
        "subgraph_masked": c.record.removed_subgraph.is_some(),
        "restored": c.record.restore_graph(&corrupted).to_string(),
    })))
}

/// Smatch with its variable mapping, plus the fine-grained breakdown.
pub fn smatch_text(predicted: &str, gold: &str, restarts: usize) -> Result<String, String> {
    let (p, g) = (parse(predicted)?, parse(gold)?);
    let best = smatch(&p, &g, restarts).map_err(|e| e.to_string())?;
    let fine = fine_grained(&p, &g, restarts).map_err(|e| e.to_string())?;
    let breakdown: serde_json::Map<String, serde_json::Value> =
        SubMetric::ALL.iter().map(|m| (m.name().to_owned(), json!(fine.get(*m)))).collect();
    Ok(to_json(&json!({
        "precision": best.precision,
        "recall": best.recall,
        "f1": best.f1,
        "matched": best.matched,
        "mapping": best.mapping,
        "breakdown": breakdown,
    })))
}

/// A random valid graph in PENMAN notation.
pub fn random_text(seed: u64, max_nodes: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng, &GraphShape::with_nodes(1..=max_nodes.max(1)));
    serialize_graph(&g).expect("generated graphs are valid")
}

#[wasm_bindgen(js_name = linearize)]
pub fn linearize_js(penman: &str) -> Result<String, JsValue> {
    linearize_text(penman).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = corrupt)]
pub fn corrupt_js(penman: &str, seed: u32, node_rate: f64, edge_rate: f64, subgraph_rate: f64) -> Result<String, JsValue> {
    corrupt_text(penman, seed as u64, node_rate, edge_rate, subgraph_rate).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = smatch)]
pub fn smatch_js(predicted: &str, gold: &str, restarts: u32) -> Result<String, JsValue> {
    smatch_text(predicted, gold, restarts as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = randomGraph)]
pub fn random_js(seed: u32, max_nodes: u32) -> String {
    random_text(seed as u64, max_nodes as usize)
}
