//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; the process fails if any criterion fails.

use std::time::{Duration, Instant};

use amrforge::cli;
use amrforge::corrupt::{compose, example_rng, Corruption, CorruptionConfig};
use amrforge::generate::{perturb, random_graph, GraphShape};
use amrforge::linearize::{delinearize, linearize, Token, TokenSeq};
use amrforge::metrics::{fine_grained, smatch, smatch_oracle, SubMetric};
use amrforge::penman::{parse_penman, serialize_graph, ParseMode};
use amrforge::stats::{compute_stats, DepthBucket, ReentrancyBucket, SizeBucket};
use amrforge::tasks::{build_sample, sample_rng, schedule_rate, MaskSchedule, Side, TaskTag, Target};
use amrforge::{is_isomorphic, AmrGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG1: &str = "(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden_linearization() -> Outcome {
    let g = parse_penman(FIG1, ParseMode::Strict).unwrap().graph;
    let got = linearize(&g).unwrap().to_string();
    let want = "( <Z0> possible :domain ( <Z1> go :arg0 ( <Z2> boy ) ) :polarity ( <Z3> negative ) )";
    outcome(got == want, format!("got \"{}\"", got))
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = GraphShape::default();
    let (mut lin_ok, mut penman_ok) = (0, 0);
    let n = 1000;
    for _ in 0..n {
        let g = random_graph(&mut rng, &shape);
        let back = delinearize(&linearize(&g).unwrap()).unwrap();
        lin_ok += is_isomorphic(&g, &back).unwrap() as usize;
        let text = serialize_graph(&g).unwrap();
        let reparsed = parse_penman(&text, ParseMode::Strict).unwrap().graph;
        penman_ok += is_isomorphic(&g, &reparsed).unwrap() as usize;
    }
    outcome(
        lin_ok == n && penman_ok == n,
        format!("linearize/delinearize {}/{}, parse/serialize {}/{}", lin_ok, n, penman_ok, n),
    )
}

fn corruption_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let shape = GraphShape::with_nodes(20..=30);
    let cfg = CorruptionConfig::default();
    let ops = Corruption::graph_ops(&cfg);
    let n = 10_000;
    let (mut node_frac, mut edge_frac, mut removed, mut selected) = (0.0, 0.0, 0usize, 0usize);
    let mut edge_graphs = 0;
    for i in 0..n {
        let g = random_graph(&mut rng, &shape);
        let c = compose(Some(&g), None, &ops, &mut example_rng(cfg.seed, i)).unwrap();
        selected += c.record.subgraph_selected as usize;
        // Node/edge masking acts on what the sub-graph step left in place:
        // the removed nodes, their outgoing edges and the edge above them.
        let (gone_nodes, gone_edges) = match &c.record.removed_subgraph {
            Some(sub) => {
                removed += 1;
                let inside = g.edges().iter().filter(|e| sub.graph.contains(e.source.as_str())).count();
                (sub.graph.node_count(), inside + 1)
            }
            None => (0, 0),
        };
        node_frac += c.record.masked_node_ids.len() as f64 / (g.node_count() - gone_nodes) as f64;
        let edges_left = g.edges().len() - gone_edges;
        if edges_left > 0 {
            edge_graphs += 1;
            edge_frac += c.record.masked_edge_indices.len() as f64 / edges_left as f64;
        }
    }
    let (node_frac, edge_frac) = (node_frac / n as f64, edge_frac / edge_graphs as f64);
    let sub_freq = removed as f64 / n as f64;
    let pass = (node_frac - 0.15).abs() <= 0.01 && (edge_frac - 0.15).abs() <= 0.01 && (sub_freq - 0.35).abs() <= 0.02;
    outcome(
        pass,
        format!(
            "nodes {:.4}, edges {:.4}, sub-graph removed {:.4} (drawn {:.4}) over {} graphs",
            node_frac,
            edge_frac,
            sub_freq,
            selected as f64 / n as f64,
            n
        ),
    )
}

fn schedule_exactness() -> Outcome {
    let total = 100_000u64;
    let s = MaskSchedule::new(total).unwrap();
    let start = schedule_rate(0, &s).unwrap();
    let end = schedule_rate(total, &s).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=100u64 {
        let t = k * total / 101;
        let expected = 0.1 + (0.85 - 0.1) * t as f64 / total as f64;
        worst = worst.max((schedule_rate(t, &s).unwrap() - expected).abs());
    }
    let pass = (start - 0.1).abs() <= 1e-12 && (end - 0.85).abs() <= 1e-12 && worst <= 1e-12;
    outcome(pass, format!("p(0)={}, p(T)={}, max interior error {:e}", start, end, worst))
}

/// Splits an input into its text and graph sections.
fn sections(tokens: &[Token]) -> Option<(&[Token], &[Token])> {
    if tokens.first() != Some(&Token::TextStart) || tokens.last() != Some(&Token::GraphEnd) {
        return None;
    }
    let text_end = tokens.iter().position(|t| *t == Token::TextEnd)?;
    if tokens.get(text_end + 1) != Some(&Token::GraphStart) {
        return None;
    }
    let (text, graph) = (&tokens[1..text_end], &tokens[text_end + 2..tokens.len() - 1]);
    if text.iter().chain(graph).any(Token::is_marker) {
        return None;
    }
    Some((text, graph))
}

fn side_matches(side: Side, got: &[Token], original: &[Token]) -> bool {
    match side {
        Side::Empty => got == [Token::Mask],
        Side::Original => got == original,
        // Checked by restoring the original below.
        Side::Masked => true,
    }
}

fn table_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let schedule = MaskSchedule::new(50).unwrap();
    let cfg = CorruptionConfig::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for step in 0..50u64 {
        let g = random_graph(&mut rng, &GraphShape::with_nodes(3..=20));
        let words: Vec<String> = (0..rng.gen_range(4..20)).map(|i| format!("w{}", i)).collect();
        let text = TokenSeq::words(&words.join(" "));
        let lin = linearize(&g).unwrap();
        for tag in TaskTag::ALL {
            checked += 1;
            let s = build_sample(tag, &text, Some(&g), step, &schedule, &cfg, &mut sample_rng(1, step, tag)).unwrap();
            let Some((t, gr)) = sections(&s.input) else {
                failures.push(format!("{}: bad marker layout", tag));
                continue;
            };
            let mut ok = side_matches(tag.text_side(), t, &text) && side_matches(tag.graph_side(), gr, &lin);
            if tag.text_side() == Side::Masked {
                ok &= t.len() == text.len() && s.record.restore_text(t) == text;
            }
            if tag.graph_side() == Side::Masked {
                ok &= s.record.restore_graph(gr) == lin;
            }
            let mut expected = Vec::new();
            match tag.target() {
                Target::Text => {
                    expected.push(Token::TextStart);
                    expected.extend(text.iter().cloned());
                    expected.push(Token::TextEnd);
                }
                Target::Graph => {
                    expected.push(Token::GraphStart);
                    expected.extend(lin.iter().cloned());
                    expected.push(Token::GraphEnd);
                }
            }
            ok &= s.output.0 == expected;
            if !ok {
                failures.push(format!("{} at step {}", tag, step));
            }
        }
    }
    outcome(failures.is_empty(), format!("{} samples over 8 tags, {} mismatches {:?}", checked, failures.len(), failures.first()))
}

fn small_pair(rng: &mut ChaCha8Rng) -> (AmrGraph, AmrGraph) {
    let shape = GraphShape { nodes: 1..=6, max_reentrancies: 2, attribute_rate: 0.3, concept_pool: 6 };
    let g1 = random_graph(rng, &shape);
    let g2 = if rng.gen_bool(0.5) {
        let edits = rng.gen_range(1..4);
        perturb(rng, &g1, edits)
    } else {
        random_graph(rng, &shape)
    };
    (g1, g2)
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 500;
    let (mut agree, mut self_ok) = (0, 0);
    for _ in 0..n {
        let (g1, g2) = small_pair(&mut rng);
        let hill = smatch(&g1, &g2, 8).unwrap();
        let exact = smatch_oracle(&g1, &g2).unwrap();
        agree += (hill.f1 == exact.f1) as usize;
        self_ok += (smatch(&g1, &g1, 8).unwrap().f1 == 1.0) as usize;
    }
    let rate = agree as f64 / n as f64;
    outcome(rate >= 0.99 && self_ok == n, format!("agreement {}/{} ({:.3}), self-match {}/{}", agree, n, rate, self_ok, n))
}

fn hand_derived_smatch() -> Outcome {
    let a = parse_penman("(w / want-01 :ARG0 (b / boy))", ParseMode::Strict).unwrap().graph;
    let b = parse_penman("(w / want-01 :ARG0 (g / girl))", ParseMode::Strict).unwrap().graph;
    let r = smatch(&a, &b, 4).unwrap();
    outcome(r.f1 == 0.75, format!("f1 {} ({} of {} triples)", r.f1, r.matched, r.gold_total))
}

fn submetric_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let shape = GraphShape { nodes: 1..=12, max_reentrancies: 3, attribute_rate: 0.3, concept_pool: 10 };
    let n = 200;
    let (mut unlabeled, mut no_wsd) = (0, 0);
    for _ in 0..n {
        let g1 = random_graph(&mut rng, &shape);
        let g2 = if rng.gen_bool(0.7) {
            let edits = rng.gen_range(1..6);
            perturb(&mut rng, &g1, edits)
        } else {
            random_graph(&mut rng, &shape)
        };
        let f = fine_grained(&g1, &g2, 4).unwrap();
        let s = f.get(SubMetric::Smatch).unwrap().f1;
        unlabeled += (f.get(SubMetric::Unlabeled).unwrap().f1 >= s) as usize;
        no_wsd += (f.get(SubMetric::NoWsd).unwrap().f1 >= s) as usize;
    }
    outcome(unlabeled == n && no_wsd == n, format!("unlabeled >= smatch {}/{}, no_wsd >= smatch {}/{}", unlabeled, n, no_wsd, n))
}

/// Root with `fanout` leaf children below a chain of `depth` nodes, and
/// `reentrant` leaves that also hang off the chain's second node.
fn shaped_graph(size: usize, depth: usize, reentrant: usize) -> AmrGraph {
    assert!(size > depth + reentrant);
    let mut g = AmrGraph::new("n0");
    g.add_node("n0", "root").unwrap();
    for i in 1..=depth {
        g.add_node(format!("n{}", i), "chain").unwrap();
        g.add_edge(format!("n{}", i - 1), ":ARG1", format!("n{}", i));
    }
    for i in depth + 1..size {
        g.add_node(format!("n{}", i), "leaf").unwrap();
        g.add_edge("n0", ":op1", format!("n{}", i));
    }
    for i in 0..reentrant {
        g.add_edge("n1", ":ARG0", format!("n{}", depth + 1 + i));
    }
    g
}

fn bucket_boundaries() -> Outcome {
    let mut wrong = Vec::new();
    for (size, want) in [(10, SizeBucket::UpTo10), (11, SizeBucket::UpTo20), (21, SizeBucket::Over20)] {
        let s = compute_stats(&shaped_graph(size, 1, 0)).unwrap();
        if s.size != size || s.size_bucket != want {
            wrong.push(format!("size {}", size));
        }
    }
    for (depth, want) in [(3, DepthBucket::UpTo3), (4, DepthBucket::UpTo6), (7, DepthBucket::Over6)] {
        let s = compute_stats(&shaped_graph(depth + 2, depth, 0)).unwrap();
        if s.depth != depth || s.depth_bucket != want {
            wrong.push(format!("depth {}", depth));
        }
    }
    for (r, want) in [(0, ReentrancyBucket::None), (1, ReentrancyBucket::UpTo3), (4, ReentrancyBucket::Over3)] {
        let s = compute_stats(&shaped_graph(r + 3, 1, r)).unwrap();
        if s.reentrancies != r || s.reent_bucket != want {
            wrong.push(format!("reentrancies {}", r));
        }
    }
    outcome(wrong.is_empty(), format!("9 boundary graphs, wrong: {:?}", wrong))
}

fn build_tasks(corpus: &std::path::Path, seed: &str) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = ["amrforge", "build-tasks", "--seed", seed, "--tasks", "all", "--T", "100"];
    let code = cli::run(
        args.iter().map(|s| s.to_string()).chain([corpus.display().to_string()]),
        &mut std::io::empty(),
        &mut out,
        &mut err,
    );
    (code, out)
}

fn determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut corpus = String::new();
    for i in 0..100 {
        let g = random_graph(&mut rng, &GraphShape::with_nodes(2..=20));
        let words: Vec<String> = (0..rng.gen_range(3..15)).map(|k| format!("t{}", (i * 7 + k) % 40)).collect();
        corpus.push_str(&format!("# ::id s{}\n# ::snt {}\n{}\n\n", i, words.join(" "), serialize_graph(&g).unwrap()));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.amr");
    std::fs::write(&path, corpus).unwrap();
    let (c1, a) = build_tasks(&path, "42");
    let (c2, b) = build_tasks(&path, "42");
    let (c3, c) = build_tasks(&path, "43");
    let lines = a.iter().filter(|&&x| x == b'\n').count();
    let pass = c1 == 0 && c2 == 0 && c3 == 0 && a == b && a != c && lines == 600;
    outcome(pass, format!("{} lines, same seed identical: {}, other seed differs: {}", lines, a == b, a != c))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("golden linearization", golden_linearization, Duration::from_secs(1)),
        ("round-trip suite", round_trips, Duration::from_secs(30)),
        ("corruption statistics", corruption_statistics, Duration::from_secs(60)),
        ("schedule exactness", schedule_exactness, Duration::from_secs(1)),
        ("task layout conformance", table_conformance, Duration::from_secs(5)),
        ("smatch oracle agreement", oracle_agreement, Duration::from_secs(120)),
        ("hand-derived smatch", hand_derived_smatch, Duration::from_secs(1)),
        ("sub-metric dominance", submetric_dominance, Duration::from_secs(60)),
        ("stats bucketing", bucket_boundaries, Duration::from_secs(1)),
        ("build-tasks determinism", determinism, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        failed += !pass as usize;
        println!(
            "{} {}: {} [{:.2?}{}]",
            if pass { "PASS" } else { "FAIL" },
            name,
            o.detail,
            elapsed,
            if in_time { String::new() } else { format!(", over budget {:?}", budget) }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
