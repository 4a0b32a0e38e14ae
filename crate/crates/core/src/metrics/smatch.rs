use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::triples::{to_triples, TripleSet};
use super::Counts;
use crate::graph::{AmrGraph, InvalidGraph};

pub const DEFAULT_RESTARTS: usize = 4;
/// Largest variable count the exhaustive oracle accepts on the smaller side.
pub const ORACLE_MAX_VARIABLES: usize = 8;

const SEARCH_SEED: u64 = 0x5eed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmatchError {
    #[error(transparent)]
    InvalidGraph(#[from] InvalidGraph),
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("oracle needs at most {max} variables on the smaller graph, got {got}")]
    TooLarge { got: usize, max: usize },
}

/// Mapping from variables of the first graph to variables of the second.
pub type Mapping = Vec<Option<usize>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmatchResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    /// Triple count of the first (test) graph.
    pub test_total: usize,
    /// Triple count of the second (gold) graph.
    pub gold_total: usize,
    /// Matched variable pairs by name.
    pub mapping: Vec<(String, String)>,
    #[serde(skip)]
    pub positions: Mapping,
}

impl SmatchResult {
    pub fn counts(&self) -> Counts {
        Counts { matched: self.matched, test: self.test_total, gold: self.gold_total }
    }
}

/// Pairwise match weights between two triple sets.
pub(crate) struct Weights {
    n1: usize,
    n2: usize,
    /// `unary[i * n2 + j]`: instance and attribute triples matched by `i -> j`.
    unary: Vec<usize>,
    /// Relation triples matched when `a -> x` and `b -> y`, keyed by `(a, x, b, y)`.
    pair: HashMap<(usize, usize, usize, usize), usize>,
    /// Variables sharing a relation triple with each first-graph variable.
    neighbors: Vec<Vec<usize>>,
    /// Relation weight of the first graph closed when a variable is assigned
    /// last among its triple's endpoints, for the oracle's bound.
    closing: Vec<usize>,
    concept_eq: Vec<bool>,
    /// Second-graph variables each first-graph variable can score against.
    candidates: Vec<Vec<usize>>,
}

impl Weights {
    pub(crate) fn new(t1: &TripleSet, t2: &TripleSet) -> Weights {
        let (n1, n2) = (t1.concepts.len(), t2.concepts.len());
        let mut concept_eq = vec![false; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                concept_eq[i * n2 + j] = t1.concepts[i] == t2.concepts[j];
            }
        }
        let mut unary: Vec<usize> = concept_eq.iter().map(|&e| e as usize).collect();
        let mut attrs2: HashMap<(&str, &str), Vec<(usize, usize)>> = HashMap::new();
        for ((v, r, val), &n) in &t2.attributes {
            attrs2.entry((r.as_str(), val.as_str())).or_default().push((*v, n));
        }
        for ((i, r, val), &c1) in &t1.attributes {
            if let Some(hits) = attrs2.get(&(r.as_str(), val.as_str())) {
                for &(j, c2) in hits {
                    unary[i * n2 + j] += c1.min(c2);
                }
            }
        }
        let mut rels2: HashMap<&str, Vec<(usize, usize, usize)>> = HashMap::new();
        for ((x, r, y), &n) in &t2.relations {
            rels2.entry(r.as_str()).or_default().push((*x, *y, n));
        }
        let mut pair: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
        let mut neighbors = vec![Vec::new(); n1];
        let mut closing = vec![0; n1];
        for ((a, r, b), &c1) in &t1.relations {
            let (a, b) = (*a, *b);
            closing[a.max(b)] += c1;
            if a != b && !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
            for &(x, y, c2) in rels2.get(r.as_str()).map(Vec::as_slice).unwrap_or(&[]) {
                if a == b {
                    if x == y {
                        unary[a * n2 + x] += c1.min(c2);
                    }
                } else if x != y {
                    *pair.entry((a, x, b, y)).or_default() += c1.min(c2);
                }
            }
        }
        let mut candidates: Vec<Vec<usize>> =
            (0..n1).map(|i| (0..n2).filter(|&j| unary[i * n2 + j] > 0).collect()).collect();
        for &(a, x, b, y) in pair.keys() {
            candidates[a].push(x);
            candidates[b].push(y);
        }
        for c in &mut candidates {
            c.sort_unstable();
            c.dedup();
        }
        Weights { n1, n2, unary, pair, neighbors, closing, concept_eq, candidates }
    }

    fn pair_weight(&self, a: usize, x: usize, b: usize, y: usize) -> usize {
        self.pair.get(&(a, x, b, y)).copied().unwrap_or(0) + self.pair.get(&(b, y, a, x)).copied().unwrap_or(0)
    }

    /// Triples gained by mapping `a -> x` given the rest of `m`.
    fn local(&self, m: &Mapping, a: usize, x: usize) -> usize {
        let mut s = self.unary[a * self.n2 + x];
        for &b in &self.neighbors[a] {
            if let Some(y) = m[b] {
                s += self.pair_weight(a, x, b, y);
            }
        }
        s
    }

    pub(crate) fn score(&self, m: &Mapping) -> usize {
        let mut s = 0;
        for a in 0..self.n1 {
            if let Some(x) = m[a] {
                s += self.unary[a * self.n2 + x];
                for &b in &self.neighbors[a] {
                    if b > a {
                        if let Some(y) = m[b] {
                            s += self.pair_weight(a, x, b, y);
                        }
                    }
                }
            }
        }
        s
    }

    /// Greedy start: each variable takes the first free variable with the
    /// same concept.
    fn concept_start(&self) -> Mapping {
        let mut used = vec![false; self.n2];
        (0..self.n1)
            .map(|i| {
                let j = (0..self.n2).find(|&j| !used[j] && self.concept_eq[i * self.n2 + j])?;
                used[j] = true;
                Some(j)
            })
            .collect()
    }

    /// Each variable, in random order, takes a random free candidate.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> Mapping {
        let mut used = vec![false; self.n2];
        let mut m: Mapping = vec![None; self.n1];
        let mut order: Vec<usize> = (0..self.n1).collect();
        order.shuffle(rng);
        for i in order {
            let free: Vec<usize> = self.candidates[i].iter().copied().filter(|&j| !used[j]).collect();
            if let Some(&j) = free.choose(rng) {
                used[j] = true;
                m[i] = Some(j);
            }
        }
        m
    }

    /// Steepest-ascent hill climbing over reassignments to free variables
    /// and swaps. Returns the local optimum and its score.
    fn climb(&self, mut m: Mapping) -> (Mapping, usize) {
        let mut score = self.score(&m);
        let mut used = vec![false; self.n2];
        for x in m.iter().flatten() {
            used[*x] = true;
        }
        loop {
            let mut best_gain = 0usize;
            let mut best_move: Option<(usize, usize, bool)> = None;
            for i in 0..self.n1 {
                let current = m[i].map_or(0, |x| self.local(&m, i, x));
                for j in 0..self.n2 {
                    if used[j] {
                        continue;
                    }
                    let gain = self.local(&m, i, j);
                    if gain > current && gain - current > best_gain {
                        best_gain = gain - current;
                        best_move = Some((i, j, false));
                    }
                }
            }
            for i in 0..self.n1 {
                for k in i + 1..self.n1 {
                    if m[i].is_none() && m[k].is_none() {
                        continue;
                    }
                    let before = self.joint(&m, i, k);
                    m.swap(i, k);
                    let after = self.joint(&m, i, k);
                    m.swap(i, k);
                    if after > before && after - before > best_gain {
                        best_gain = after - before;
                        best_move = Some((i, k, true));
                    }
                }
            }
            match best_move {
                None => return (m, score),
                Some((i, k, true)) => m.swap(i, k),
                Some((i, j, false)) => {
                    if let Some(old) = m[i] {
                        used[old] = false;
                    }
                    used[j] = true;
                    m[i] = Some(j);
                }
            }
            score += best_gain;
            debug_assert_eq!(score, self.score(&m));
        }
    }

    /// Score of the terms that involve `i` or `k`.
    fn joint(&self, m: &Mapping, i: usize, k: usize) -> usize {
        let li = m[i].map_or(0, |x| self.local(m, i, x));
        let lk = m[k].map_or(0, |y| self.local(m, k, y));
        let shared = match (m[i], m[k]) {
            (Some(x), Some(y)) => self.pair_weight(i, x, k, y),
            _ => 0,
        };
        li + lk - shared
    }

    /// Best score over all injective mappings, by branch and bound.
    fn exhaustive(&self) -> (Mapping, usize) {
        let mut optimistic = vec![0; self.n1 + 1];
        for i in (0..self.n1).rev() {
            let best_unary = (0..self.n2).map(|j| self.unary[i * self.n2 + j]).max().unwrap_or(0);
            optimistic[i] = optimistic[i + 1] + best_unary + self.closing[i];
        }
        let mut search = Exhaustive {
            w: self,
            optimistic,
            current: vec![None; self.n1],
            used: vec![false; self.n2],
            best: vec![None; self.n1],
            best_score: 0,
            unmapped_left: self.n1.saturating_sub(self.n2),
        };
        search.best_score = self.score(&search.best);
        search.go(0, 0);
        (search.best, search.best_score)
    }
}

struct Exhaustive<'a> {
    w: &'a Weights,
    optimistic: Vec<usize>,
    current: Mapping,
    used: Vec<bool>,
    best: Mapping,
    best_score: usize,
    unmapped_left: usize,
}

impl Exhaustive<'_> {
    fn go(&mut self, i: usize, score: usize) {
        if score + self.optimistic[i] <= self.best_score {
            return;
        }
        if i == self.w.n1 {
            if score > self.best_score {
                self.best_score = score;
                self.best = self.current.clone();
            }
            return;
        }
        for j in 0..self.w.n2 {
            if self.used[j] {
                continue;
            }
            // Pair terms with earlier variables only, so each counts once.
            let mut gain = self.w.unary[i * self.w.n2 + j];
            for &b in &self.w.neighbors[i] {
                if b < i {
                    if let Some(y) = self.current[b] {
                        gain += self.w.pair_weight(i, j, b, y);
                    }
                }
            }
            self.used[j] = true;
            self.current[i] = Some(j);
            self.go(i + 1, score + gain);
            self.current[i] = None;
            self.used[j] = false;
        }
        if self.unmapped_left > 0 {
            self.unmapped_left -= 1;
            self.go(i + 1, score);
            self.unmapped_left += 1;
        }
    }
}

fn result(t1: &TripleSet, t2: &TripleSet, mapping: Mapping, matched: usize) -> SmatchResult {
    let counts = Counts { matched, test: t1.len(), gold: t2.len() };
    let prf = counts.prf();
    let names = mapping
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (t1.variables[i].clone(), t2.variables[j].clone())))
        .collect();
    SmatchResult {
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        matched,
        test_total: counts.test,
        gold_total: counts.gold,
        mapping: names,
        positions: mapping,
    }
}

/// Hill-climbing Smatch between two triple sets. The first start is the
/// concept-greedy mapping, then `extra_start` if given, then random ones
/// up to `restarts` starts in total.
pub fn smatch_triples(
    t1: &TripleSet,
    t2: &TripleSet,
    restarts: usize,
    extra_start: Option<&Mapping>,
) -> Result<SmatchResult, SmatchError> {
    if restarts == 0 {
        return Err(SmatchError::NoRestarts);
    }
    let w = Weights::new(t1, t2);
    let ceiling = t1.len().min(t2.len());
    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let mut best: (Mapping, usize) = (vec![None; w.n1], 0);
    let mut starts = vec![w.concept_start()];
    if let Some(m) = extra_start {
        starts.push(m.clone());
    }
    let mut tried = 0;
    while tried < restarts.max(starts.len()) && best.1 < ceiling {
        let start = if tried < starts.len() { starts[tried].clone() } else { w.random_start(&mut rng) };
        let found = w.climb(start);
        if found.1 > best.1 || tried == 0 {
            best = found;
        }
        tried += 1;
    }
    Ok(result(t1, t2, best.0, best.1))
}

/// Smatch of a test graph `g1` against a gold graph `g2`.
pub fn smatch(g1: &AmrGraph, g2: &AmrGraph, restarts: usize) -> Result<SmatchResult, SmatchError> {
    smatch_triples(&to_triples(g1)?, &to_triples(g2)?, restarts, None)
}

/// Globally optimal Smatch by exhaustive search over injective mappings.
pub fn smatch_oracle(g1: &AmrGraph, g2: &AmrGraph) -> Result<SmatchResult, SmatchError> {
    let (t1, t2) = (to_triples(g1)?, to_triples(g2)?);
    let smaller = t1.concepts.len().min(t2.concepts.len());
    if smaller > ORACLE_MAX_VARIABLES {
        return Err(SmatchError::TooLarge { got: smaller, max: ORACLE_MAX_VARIABLES });
    }
    let w = Weights::new(&t1, &t2);
    let (m, s) = w.exhaustive();
    Ok(result(&t1, &t2, m, s))
}

/// Triples matched by a fixed mapping.
pub fn matched_under(t1: &TripleSet, t2: &TripleSet, mapping: &Mapping) -> usize {
    Weights::new(t1, t2).score(mapping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::{parse_penman, ParseMode};

    fn g(s: &str) -> AmrGraph {
        parse_penman(s, ParseMode::Strict).unwrap().graph
    }

    #[test]
    fn want_boy_girl() {
        let (a, b) = (g("(w / want-01 :ARG0 (b / boy))"), g("(w / want-01 :ARG0 (g / girl))"));
        for r in [smatch(&a, &b, 4).unwrap(), smatch_oracle(&a, &b).unwrap()] {
            assert_eq!(r.matched, 3);
            assert_eq!((r.precision, r.recall, r.f1), (0.75, 0.75, 0.75));
        }
    }

    #[test]
    fn identity_and_disjoint() {
        let a = g("(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))");
        assert_eq!(smatch(&a, &a, 1).unwrap().f1, 1.0);
        assert_eq!(smatch_oracle(&a, &a).unwrap().f1, 1.0);
        let (c, d) = (g("(a / cat)"), g("(b / dog)"));
        assert_eq!(smatch(&c, &d, 4).unwrap().f1, 0.0);
        assert_eq!(smatch_oracle(&c, &d).unwrap().f1, 0.0);
    }

    #[test]
    fn different_sizes() {
        let a = g("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
        let b = g("(w / want-01 :ARG0 (b / boy))");
        let r = smatch(&a, &b, 4).unwrap();
        let o = smatch_oracle(&a, &b).unwrap();
        assert_eq!(r.matched, 4);
        assert_eq!(o.matched, 4);
        assert_eq!(r.gold_total, 4);
        assert_eq!(r.recall, 1.0);
        let r2 = smatch(&b, &a, 4).unwrap();
        assert_eq!(r2.precision, 1.0);
    }

    #[test]
    fn root_counts() {
        // Same triples except which node is the top.
        let a = g("(w / want-01 :ARG0 (b / boy))");
        let b = g("(b / boy :ARG0-of (w / want-01))");
        let r = smatch(&a, &b, 4).unwrap();
        assert_eq!(r.matched, 3);
    }

    #[test]
    fn zero_restarts_rejected() {
        let a = g("(a / cat)");
        assert_eq!(smatch(&a, &a, 0), Err(SmatchError::NoRestarts));
    }

    #[test]
    fn oracle_size_bound() {
        let mut text = String::from("(a0 / x");
        for i in 1..10 {
            text.push_str(&format!(" :op{} (a{} / x)", i, i));
        }
        text.push(')');
        let big = g(&text);
        assert!(matches!(smatch_oracle(&big, &big), Err(SmatchError::TooLarge { got: 10, .. })));
    }
}
