//! Extended symbol vocabulary: base words plus markers, `[mask]`, pointer
//! tokens and every relation, concept and constant seen in a corpus.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::AmrGraph;
use crate::linearize::{Token, TokenSeq, GRAPH_END, GRAPH_START, MASK, TEXT_END, TEXT_START};
use crate::penman::PenmanDocument;

pub const DEFAULT_MAX_POINTERS: u32 = 512;

/// Relation, concept and constant labels with occurrence counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolInventory {
    pub relations: BTreeMap<String, usize>,
    pub concepts: BTreeMap<String, usize>,
    pub constants: BTreeMap<String, usize>,
}

impl SymbolInventory {
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty() && self.concepts.is_empty() && self.constants.is_empty()
    }

    pub fn add_graph(&mut self, graph: &AmrGraph) {
        for (_, concept) in graph.nodes() {
            *self.concepts.entry(concept.to_owned()).or_default() += 1;
        }
        for e in graph.edges() {
            *self.relations.entry(e.relation.clone()).or_default() += 1;
        }
        for a in graph.attributes() {
            *self.relations.entry(a.relation.clone()).or_default() += 1;
            *self.constants.entry(a.value.clone()).or_default() += 1;
        }
    }
}

pub fn collect_symbols<'a>(corpus: impl IntoIterator<Item = &'a PenmanDocument>) -> SymbolInventory {
    let mut inv = SymbolInventory::default();
    for doc in corpus {
        inv.add_graph(&doc.graph);
    }
    inv
}

/// Concepts with a `-NN` sense suffix.
pub fn is_frame(concept: &str) -> bool {
    let b = concept.as_bytes();
    b.len() > 3 && b[b.len() - 3] == b'-' && b[b.len() - 2..].iter().all(u8::is_ascii_digit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Base,
    Marker,
    Mask,
    Pointer,
    Relation,
    Frame,
    Concept,
    Constant,
}

#[derive(Debug, Error, PartialEq)]
pub enum VocabError {
    #[error("base vocabulary is empty")]
    EmptyBase,
    #[error("max_pointers must be at least 1")]
    NoPointers,
    #[error("unknown tokens: {}", .0.join(", "))]
    UnknownTokens(Vec<String>),
    #[error("pointer <Z{pointer}> exceeds capacity of {capacity} pointers")]
    PointerCapacity { pointer: u32, capacity: u32 },
    #[error("invalid ids: {0:?}")]
    InvalidIds(Vec<u32>),
    #[error("vocabulary file: {0}")]
    Format(String),
}

/// Immutable token/id bijection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    partitions: Vec<Partition>,
    ids: HashMap<String, u32>,
    pointer_start: u32,
    max_pointers: u32,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn partition(&self, id: u32) -> Option<Partition> {
        self.partitions.get(id as usize).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn max_pointers(&self) -> u32 {
        self.max_pointers
    }

    /// Id of `<Z0>`; pointer ids are contiguous from here.
    pub fn pointer_start(&self) -> u32 {
        self.pointer_start
    }

    /// One token per line; the line number is the id.
    pub fn write_tokens<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        for t in &self.tokens {
            writeln!(out, "{}", t)?;
        }
        Ok(())
    }

    /// Sidecar JSON: partition name to the list of ids it holds.
    pub fn partitions_json(&self) -> String {
        let mut map: BTreeMap<Partition, Vec<u32>> = BTreeMap::new();
        for (id, p) in self.partitions.iter().enumerate() {
            map.entry(*p).or_default().push(id as u32);
        }
        let named: BTreeMap<String, Vec<u32>> = map
            .into_iter()
            .map(|(p, ids)| (serde_json::to_value(p).unwrap().as_str().unwrap().to_owned(), ids))
            .collect();
        serde_json::to_string_pretty(&named).expect("plain data serializes")
    }

    /// Reads a vocabulary written by [`Vocabulary::write_tokens`] and
    /// [`Vocabulary::partitions_json`].
    pub fn read<R: BufRead>(tokens: R, partitions_json: &str) -> Result<Vocabulary, VocabError> {
        let tokens: Vec<String> = tokens.lines().collect::<Result<_, _>>().map_err(|e| VocabError::Format(e.to_string()))?;
        let named: BTreeMap<Partition, Vec<u32>> =
            serde_json::from_str(partitions_json).map_err(|e| VocabError::Format(e.to_string()))?;
        let mut partitions = vec![None; tokens.len()];
        for (p, ids) in named {
            for id in ids {
                let slot = partitions
                    .get_mut(id as usize)
                    .ok_or_else(|| VocabError::Format(format!("id {} out of range", id)))?;
                *slot = Some(p);
            }
        }
        let partitions: Vec<Partition> = partitions
            .into_iter()
            .enumerate()
            .map(|(id, p)| p.ok_or_else(|| VocabError::Format(format!("id {} has no partition", id))))
            .collect::<Result<_, _>>()?;
        let mut ids = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(VocabError::Format(format!("duplicate token `{}`", t)));
            }
        }
        let pointer_ids: Vec<u32> =
            partitions.iter().enumerate().filter(|(_, p)| **p == Partition::Pointer).map(|(i, _)| i as u32).collect();
        let pointer_start = *pointer_ids.first().ok_or_else(|| VocabError::Format("no pointer tokens".into()))?;
        let max_pointers = pointer_ids.len() as u32;
        for (k, &id) in pointer_ids.iter().enumerate() {
            if id != pointer_start + k as u32 || tokens[id as usize] != format!("<Z{}>", k) {
                return Err(VocabError::Format("pointer block is not contiguous".into()));
            }
        }
        Ok(Vocabulary { tokens, partitions, ids, pointer_start, max_pointers })
    }
}

/// Markers, `[mask]` and anything shaped like a pointer token.
fn is_reserved(token: &str) -> bool {
    if [TEXT_START, TEXT_END, GRAPH_START, GRAPH_END, MASK].contains(&token) {
        return true;
    }
    matches!(token.strip_prefix("<Z").and_then(|r| r.strip_suffix('>')), Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Builds the vocabulary in a fixed order: base tokens as given (minus reserved ones), the four
/// markers, `[mask]`, `<Z0>..<Z(max_pointers-1)>`, then sorted relations,
/// concepts and constants. A token keeps the first id it was given.
pub fn build_vocabulary(base: &[String], inventory: &SymbolInventory, max_pointers: u32) -> Result<Vocabulary, VocabError> {
    if base.is_empty() {
        return Err(VocabError::EmptyBase);
    }
    if max_pointers == 0 {
        return Err(VocabError::NoPointers);
    }
    let mut v = Vocabulary {
        tokens: Vec::new(),
        partitions: Vec::new(),
        ids: HashMap::new(),
        pointer_start: 0,
        max_pointers,
    };
    let push = |v: &mut Vocabulary, token: &str, p: Partition| {
        if !v.ids.contains_key(token) {
            v.ids.insert(token.to_owned(), v.tokens.len() as u32);
            v.tokens.push(token.to_owned());
            v.partitions.push(p);
        }
    };
    for t in base.iter().filter(|t| !is_reserved(t)) {
        push(&mut v, t, Partition::Base);
    }
    for m in [TEXT_START, TEXT_END, GRAPH_START, GRAPH_END] {
        push(&mut v, m, Partition::Marker);
    }
    push(&mut v, MASK, Partition::Mask);
    v.pointer_start = v.tokens.len() as u32;
    for k in 0..max_pointers {
        push(&mut v, &format!("<Z{}>", k), Partition::Pointer);
    }
    for r in inventory.relations.keys() {
        push(&mut v, r, Partition::Relation);
    }
    for c in inventory.concepts.keys() {
        push(&mut v, c, if is_frame(c) { Partition::Frame } else { Partition::Concept });
    }
    for c in inventory.constants.keys() {
        push(&mut v, c, Partition::Constant);
    }
    Ok(v)
}

/// Maps tokens to ids. Pointers past the vocabulary's capacity give
/// [`VocabError::PointerCapacity`].
pub fn encode(tokens: &[Token], v: &Vocabulary) -> Result<Vec<u32>, VocabError> {
    let mut unknown: Vec<String> = Vec::new();
    let mut ids = Vec::with_capacity(tokens.len());
    for t in tokens {
        if let Token::Pointer(k) = *t {
            if k >= v.max_pointers {
                return Err(VocabError::PointerCapacity { pointer: k, capacity: v.max_pointers });
            }
            ids.push(v.pointer_start + k);
            continue;
        }
        let text = t.to_string();
        match v.id(&text) {
            Some(id) => ids.push(id),
            None => {
                if !unknown.contains(&text) {
                    unknown.push(text);
                }
            }
        }
    }
    if unknown.is_empty() {
        Ok(ids)
    } else {
        Err(VocabError::UnknownTokens(unknown))
    }
}

pub fn decode(ids: &[u32], v: &Vocabulary) -> Result<TokenSeq, VocabError> {
    let bad: Vec<u32> = ids.iter().copied().filter(|&id| v.token(id).is_none()).collect();
    if !bad.is_empty() {
        return Err(VocabError::InvalidIds(bad));
    }
    let symbols: Vec<&str> = ids.iter().map(|&id| v.token(id).unwrap()).collect();
    Ok(TokenSeq::from_symbols(&symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize;
    use crate::penman::{parse_penman, ParseMode};

    fn fig1() -> PenmanDocument {
        parse_penman("(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))", ParseMode::Strict).unwrap()
    }

    #[test]
    fn inventory_of_sample_graph() {
        let doc = fig1();
        let inv = collect_symbols([&doc]);
        assert_eq!(inv.relations.keys().collect::<Vec<_>>(), [":arg0", ":domain", ":polarity"]);
        assert_eq!(inv.concepts.keys().collect::<Vec<_>>(), ["boy", "go", "negative", "possible"]);
        let twice = collect_symbols([&doc, &doc]);
        assert_eq!(twice.relations.keys().collect::<Vec<_>>(), inv.relations.keys().collect::<Vec<_>>());
        assert!(twice.concepts.values().all(|&c| c == 2));
        assert!(collect_symbols([]).is_empty());
    }

    #[test]
    fn smallest_vocabulary() {
        let v = build_vocabulary(&["a".into()], &SymbolInventory::default(), 1).unwrap();
        assert_eq!(v.tokens(), ["a", "<s>", "</s>", "<g>", "</g>", "[mask]", "<Z0>"]);
        assert_eq!(v.partition(0), Some(Partition::Base));
        assert_eq!(v.pointer_start(), 6);
        assert_eq!(build_vocabulary(&[], &SymbolInventory::default(), 1), Err(VocabError::EmptyBase));
        assert_eq!(build_vocabulary(&["a".into()], &SymbolInventory::default(), 0), Err(VocabError::NoPointers));
    }

    #[test]
    fn reserved_tokens_in_base_are_skipped() {
        let v = build_vocabulary(&["<s>".into(), "x".into(), "<Z1>".into()], &SymbolInventory::default(), 2).unwrap();
        assert_eq!(v.tokens(), ["x", "<s>", "</s>", "<g>", "</g>", "[mask]", "<Z0>", "<Z1>"]);
        assert_eq!(v.partition(7), Some(Partition::Pointer));
    }

    #[test]
    fn round_trip_sample_graph() {
        let doc = fig1();
        let base: Vec<String> = ["(", ")", "the"].map(String::from).to_vec();
        let v = build_vocabulary(&base, &collect_symbols([&doc]), 8).unwrap();
        let seq = linearize(&doc.graph).unwrap();
        let ids = encode(&seq, &v).unwrap();
        assert_eq!(decode(&ids, &v).unwrap(), seq);
        assert_eq!(encode(&[], &v).unwrap(), Vec::<u32>::new());
        assert_eq!(decode(&[], &v).unwrap(), TokenSeq::new());
        assert_eq!(v.partition(v.id("possible").unwrap()), Some(Partition::Concept));
    }

    #[test]
    fn errors() {
        let v = build_vocabulary(&["a".into()], &SymbolInventory::default(), 2).unwrap();
        assert_eq!(
            encode(&[Token::Word("a".into()), Token::Word("zebra".into())], &v),
            Err(VocabError::UnknownTokens(vec!["zebra".into()]))
        );
        assert_eq!(encode(&[Token::Pointer(2)], &v), Err(VocabError::PointerCapacity { pointer: 2, capacity: 2 }));
        assert_eq!(decode(&[0, 99], &v), Err(VocabError::InvalidIds(vec![99])));
    }

    #[test]
    fn frames() {
        assert!(is_frame("want-01"));
        assert!(is_frame("go-02"));
        assert!(!is_frame("boy"));
        assert!(!is_frame("-01"));
        assert!(!is_frame("x-1"));
    }

    #[test]
    fn file_round_trip() {
        let doc = fig1();
        let base: Vec<String> = ["(", ")", "the", "boy"].map(String::from).to_vec();
        let v = build_vocabulary(&base, &collect_symbols([&doc]), 4).unwrap();
        let mut buf = Vec::new();
        v.write_tokens(&mut buf).unwrap();
        let back = Vocabulary::read(&buf[..], &v.partitions_json()).unwrap();
        assert_eq!(back, v);
    }
}
