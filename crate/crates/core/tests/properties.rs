use amrforge::corrupt::{compose, Corruption};
use amrforge::generate::{perturb, random_graph, GraphShape};
use amrforge::metrics::{corpus_bleu, smatch, smatch_oracle};
use amrforge::vocab::SymbolInventory;
use amrforge::{
    build_vocabulary, compute_stats, decode, delinearize, encode, is_isomorphic, linearize, parse_penman, repair,
    serialize_graph, AmrGraph, NodeId, ParseMode, Token, TokenSeq,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64, max_nodes: usize) -> AmrGraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), &GraphShape::with_nodes(1..=max_nodes))
}

fn token() -> impl Strategy<Value = Token> {
    prop_oneof![
        3 => Just(Token::Open),
        3 => Just(Token::Close),
        3 => (0u32..6).prop_map(Token::Pointer),
        2 => prop::sample::select(vec!["boy", "go-02", "want-01"]).prop_map(|c| Token::Concept(c.into())),
        2 => prop::sample::select(vec![":ARG0", ":ARG1-of", ":mod"]).prop_map(|r| Token::Relation(r.into())),
        1 => prop::sample::select(vec!["-", "\"Ann\"", "3"]).prop_map(|c| Token::Constant(c.into())),
        1 => Just(Token::Mask),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linearization_round_trip(seed in any::<u64>()) {
        let g = graph(seed, 30);
        let back = delinearize(&linearize(&g).unwrap().0).unwrap();
        prop_assert!(is_isomorphic(&g, &back).unwrap());
    }

    #[test]
    fn linearization_ignores_node_ids(seed in any::<u64>()) {
        let g = graph(seed, 20);
        let renamed = g.rename_nodes(|id| NodeId::new(format!("v{}", id.as_str())));
        prop_assert_eq!(linearize(&g).unwrap(), linearize(&renamed).unwrap());
        prop_assert_eq!(compute_stats(&g).unwrap(), compute_stats(&renamed).unwrap());
    }

    #[test]
    fn penman_round_trip(seed in any::<u64>()) {
        let g = graph(seed, 30);
        let text = serialize_graph(&g).unwrap();
        let back = parse_penman(&text, ParseMode::Strict).unwrap().graph;
        prop_assert!(is_isomorphic(&g, &back).unwrap());
        prop_assert_eq!(serialize_graph(&back).unwrap(), text);
    }

    #[test]
    fn repair_is_idempotent_and_valid(tokens in prop::collection::vec(token(), 0..40)) {
        if let Ok(fixed) = repair(&tokens) {
            prop_assert!(delinearize(&fixed.0).is_ok(), "{}", fixed);
            prop_assert_eq!(repair(&fixed.0).unwrap(), fixed);
        }
    }

    #[test]
    fn repair_keeps_well_formed_input(seed in any::<u64>()) {
        let seq = linearize(&graph(seed, 25)).unwrap();
        prop_assert_eq!(repair(&seq.0).unwrap(), seq);
    }

    #[test]
    fn corruption_is_reconstructible(
        seed in any::<u64>(),
        node in 0.0f64..=1.0,
        edge in 0.0f64..=1.0,
        sub in 0.0f64..=1.0,
        text_rate in 0.0f64..=1.0,
    ) {
        let g = graph(seed, 25);
        let text = TokenSeq::words("the boy does not want to go home today");
        let ops = [
            Corruption::Subgraph { probability: sub },
            Corruption::NodesEdges { node_rate: node, edge_rate: edge },
            Corruption::Text { rate: text_rate },
        ];
        let c = compose(Some(&g), Some(&text.0), &ops, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let (cg, ct) = (c.graph.unwrap(), c.text.unwrap());
        prop_assert_eq!(c.record.restore_graph(&cg.0), linearize(&g).unwrap());
        prop_assert_eq!(c.record.restore_text(&ct.0), text);
        prop_assert_eq!(cg.count(&Token::Mask), c.record.graph_mask_count());
    }

    #[test]
    fn vocabulary_round_trip(seed in any::<u64>()) {
        let g = graph(seed, 30);
        let mut inv = SymbolInventory::default();
        inv.add_graph(&g);
        let base = ["(", ")", "the", "boy"].map(String::from);
        let v = build_vocabulary(&base, &inv, 64).unwrap();
        let seq = linearize(&g).unwrap();
        let ids = encode(&seq.0, &v).unwrap();
        prop_assert_eq!(decode(&ids, &v).unwrap(), seq);
    }

    #[test]
    fn smatch_of_identical_graphs_is_one(seed in any::<u64>()) {
        let g = graph(seed, 20);
        let renamed = g.rename_nodes(|id| NodeId::new(format!("x{}", id.as_str())));
        prop_assert_eq!(smatch(&g, &renamed, 4).unwrap().f1, 1.0);
    }

    #[test]
    fn hill_climb_never_beats_oracle(seed in any::<u64>(), edits in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = GraphShape { concept_pool: 5, ..GraphShape::with_nodes(1..=7) };
        let gold = random_graph(&mut rng, &shape);
        let test = if edits == 0 { random_graph(&mut rng, &shape) } else { perturb(&mut rng, &gold, edits) };
        let hc = smatch(&test, &gold, 2).unwrap();
        let oracle = smatch_oracle(&test, &gold).unwrap();
        prop_assert!(hc.matched <= oracle.matched);
        prop_assert!(oracle.f1 <= 1.0 && hc.f1 >= 0.0);
    }

    #[test]
    fn bleu_is_bounded(
        hyp in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..12), 1..6),
        refs in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..12), 1..6),
    ) {
        let n = hyp.len().min(refs.len());
        let s = corpus_bleu(&hyp[..n], &refs[..n]).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.bleu));
        prop_assert!((0.0..=1.0).contains(&s.brevity_penalty));
    }

    #[test]
    fn bleu_of_identical_corpus_is_one(
        refs in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 4..12), 1..6),
    ) {
        prop_assert!((corpus_bleu(&refs, &refs).unwrap().bleu - 1.0).abs() < 1e-12);
    }
}
