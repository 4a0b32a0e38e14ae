use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::ser::SerializeMap;
use serde::Serialize;

use super::smatch::{smatch_triples, Mapping, SmatchError};
use super::triples::{to_triples, TripleSet};
use super::{Counts, Prf};
use crate::graph::AmrGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubMetric {
    Smatch,
    Unlabeled,
    NoWsd,
    Concepts,
    Wikification,
    Ner,
    Reentrancy,
    Negation,
    Srl,
}

impl SubMetric {
    pub const ALL: [SubMetric; 9] = [
        SubMetric::Smatch,
        SubMetric::Unlabeled,
        SubMetric::NoWsd,
        SubMetric::Concepts,
        SubMetric::Wikification,
        SubMetric::Ner,
        SubMetric::Reentrancy,
        SubMetric::Negation,
        SubMetric::Srl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubMetric::Smatch => "smatch",
            SubMetric::Unlabeled => "unlabeled",
            SubMetric::NoWsd => "no_wsd",
            SubMetric::Concepts => "concepts",
            SubMetric::Wikification => "wikification",
            SubMetric::Ner => "ner",
            SubMetric::Reentrancy => "reentrancy",
            SubMetric::Negation => "negation",
            SubMetric::Srl => "srl",
        }
    }
}

impl fmt::Display for SubMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Counts for every sub-metric. A sub-metric with nothing to score on
/// either side is absent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FineGrained {
    counts: BTreeMap<SubMetric, Counts>,
}

impl FineGrained {
    pub fn counts(&self, m: SubMetric) -> Counts {
        self.counts.get(&m).copied().unwrap_or_default()
    }

    pub fn get(&self, m: SubMetric) -> Option<Prf> {
        let c = self.counts(m);
        (!c.is_empty()).then(|| c.prf())
    }

    /// Micro-average: sums the counts of `other` into `self`.
    pub fn add(&mut self, other: &FineGrained) {
        for (m, c) in &other.counts {
            *self.counts.entry(*m).or_default() += *c;
        }
    }
}

impl Serialize for FineGrained {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        for m in SubMetric::ALL {
            map.serialize_entry(m.name(), &self.get(m))?;
        }
        map.end()
    }
}

/// Removes a `-NN` sense suffix.
pub fn strip_sense(concept: &str) -> String {
    let b = concept.as_bytes();
    if b.len() > 3 && b[b.len() - 3] == b'-' && b[b.len() - 2..].iter().all(u8::is_ascii_digit) {
        concept[..concept.len() - 3].to_owned()
    } else {
        concept.to_owned()
    }
}

fn multiset_counts<T: std::hash::Hash + Eq>(test: Vec<T>, gold: Vec<T>) -> Counts {
    let (nt, ng) = (test.len(), gold.len());
    let mut bag: HashMap<T, usize> = HashMap::new();
    for x in gold {
        *bag.entry(x).or_default() += 1;
    }
    let mut matched = 0;
    for x in test {
        if let Some(n) = bag.get_mut(&x) {
            if *n > 0 {
                *n -= 1;
                matched += 1;
            }
        }
    }
    Counts { matched, test: nt, gold: ng }
}

fn attribute_values(t: &TripleSet, relation: &str) -> Vec<String> {
    t.attributes
        .iter()
        .filter(|((_, r, _), _)| r == relation)
        .flat_map(|((_, _, v), &n)| std::iter::repeat(v.clone()).take(n))
        .collect()
}

fn negations(t: &TripleSet) -> Vec<(String, String)> {
    t.attributes
        .iter()
        .filter(|((_, r, _), _)| r == ":polarity")
        .flat_map(|((v, _, val), &n)| std::iter::repeat((t.concepts[*v].clone(), val.clone())).take(n))
        .collect()
}

/// Entity type with its name string, from `:name` edges and the `:opN`
/// attributes of the name node.
fn named_entities(t: &TripleSet) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for ((a, r, b), &n) in &t.relations {
        if r != ":name" {
            continue;
        }
        let mut ops: Vec<(u32, &str)> = t
            .attributes
            .keys()
            .filter(|(v, rel, _)| v == b && rel.starts_with(":op"))
            .map(|(_, rel, val)| (rel[3..].parse().unwrap_or(u32::MAX), val.as_str()))
            .collect();
        ops.sort();
        let name = ops.iter().map(|(_, v)| *v).collect::<Vec<_>>().join(" ");
        out.extend(std::iter::repeat((t.concepts[*a].clone(), name)).take(n));
    }
    out
}

type RelationKey = (usize, String, usize);

fn subset(t: &TripleSet, keep: impl Fn(&RelationKey) -> bool) -> BTreeMap<RelationKey, usize> {
    t.relations.iter().filter(|(k, _)| keep(k)).map(|(k, &n)| (k.clone(), n)).collect()
}

/// Relation triple subsets scored under a fixed mapping.
fn relation_subset(s1: &BTreeMap<RelationKey, usize>, s2: &BTreeMap<RelationKey, usize>, mapping: &Mapping) -> Counts {
    let mut matched = 0;
    for ((a, r, b), &c1) in s1 {
        if let (Some(x), Some(y)) = (mapping[*a], mapping[*b]) {
            if let Some(&c2) = s2.get(&(x, r.clone(), y)) {
                matched += c1.min(c2);
            }
        }
    }
    Counts { matched, test: s1.values().sum(), gold: s2.values().sum() }
}

fn in_degrees(t: &TripleSet) -> Vec<usize> {
    let mut d = vec![0; t.concepts.len()];
    for ((_, _, b), &n) in &t.relations {
        d[*b] += n;
    }
    d
}

fn is_core_role(r: &str) -> bool {
    r.strip_prefix(":arg").is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Smatch plus the fine-grained sub-metrics of test graph `g1` against
/// gold graph `g2`.
///
/// Unlabeled and sense-free Smatch start one search from the best Smatch
/// mapping; reentrancy and SRL are scored under that mapping.
pub fn fine_grained(g1: &AmrGraph, g2: &AmrGraph, restarts: usize) -> Result<FineGrained, SmatchError> {
    let (t1, t2) = (to_triples(g1)?, to_triples(g2)?);
    let best = smatch_triples(&t1, &t2, restarts, None)?;
    let mut counts = BTreeMap::new();
    counts.insert(SubMetric::Smatch, best.counts());

    let unlabeled = smatch_triples(&t1.map_labels(":label"), &t2.map_labels(":label"), restarts, Some(&best.positions))?;
    counts.insert(SubMetric::Unlabeled, unlabeled.counts());
    let sense_free =
        smatch_triples(&t1.map_concepts(strip_sense), &t2.map_concepts(strip_sense), restarts, Some(&best.positions))?;
    counts.insert(SubMetric::NoWsd, sense_free.counts());

    counts.insert(SubMetric::Concepts, multiset_counts(t1.concepts.clone(), t2.concepts.clone()));
    counts.insert(SubMetric::Wikification, multiset_counts(attribute_values(&t1, ":wiki"), attribute_values(&t2, ":wiki")));
    counts.insert(SubMetric::Ner, multiset_counts(named_entities(&t1), named_entities(&t2)));
    counts.insert(SubMetric::Negation, multiset_counts(negations(&t1), negations(&t2)));

    let reentrant = |t: &TripleSet| {
        let d = in_degrees(t);
        subset(t, |(_, _, b)| d[*b] > 1)
    };
    counts.insert(SubMetric::Reentrancy, relation_subset(&reentrant(&t1), &reentrant(&t2), &best.positions));
    let srl = |t: &TripleSet| subset(t, |(_, r, _)| is_core_role(r));
    counts.insert(SubMetric::Srl, relation_subset(&srl(&t1), &srl(&t2), &best.positions));
    Ok(FineGrained { counts })
}
