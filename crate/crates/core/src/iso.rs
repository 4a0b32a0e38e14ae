//! Graph isomorphism.
//!
//! Nodes of both graphs are first partitioned by iterated color refinement
//! (concept, root flag, attribute multiset, then labeled neighbor colors).
//! Differing color histograms prove non-isomorphism. Otherwise an exact
//! backtracking search over same-colored candidates decides the question, so
//! a matching refinement hash is never taken as proof on its own.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::graph::{AmrGraph, InvalidGraph};

/// `true` iff a bijection between node ids preserves the root, concepts,
/// edges and attributes.
pub fn is_isomorphic(g1: &AmrGraph, g2: &AmrGraph) -> Result<bool, InvalidGraph> {
    g1.check()?;
    g2.check()?;
    Ok(isomorphic_unchecked(g1, g2))
}

struct Indexed<'a> {
    graph: &'a AmrGraph,
    root: usize,
    /// (relation, target) per node
    out: Vec<Vec<(&'a str, usize)>>,
    /// (relation, source) per node
    inc: Vec<Vec<(&'a str, usize)>>,
    edges: HashSet<(usize, &'a str, usize)>,
}

impl<'a> Indexed<'a> {
    fn new(graph: &'a AmrGraph) -> Self {
        let n = graph.node_count();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut edges = HashSet::new();
        for e in graph.edges() {
            let s = graph.position(e.source.as_str()).unwrap();
            let t = graph.position(e.target.as_str()).unwrap();
            out[s].push((e.relation.as_str(), t));
            inc[t].push((e.relation.as_str(), s));
            edges.insert((s, e.relation.as_str(), t));
        }
        Indexed {
            graph,
            root: graph.position(graph.root().as_str()).unwrap(),
            out,
            inc,
            edges,
        }
    }
}

fn isomorphic_unchecked(g1: &AmrGraph, g2: &AmrGraph) -> bool {
    if g1.node_count() != g2.node_count()
        || g1.edges().len() != g2.edges().len()
        || g1.attributes().len() != g2.attributes().len()
    {
        return false;
    }
    let a = Indexed::new(g1);
    let b = Indexed::new(g2);
    let (colors_a, colors_b) = refine(&a, &b);

    let histogram = |colors: &[usize]| {
        let mut h: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in colors {
            *h.entry(c).or_default() += 1;
        }
        h
    };
    if histogram(&colors_a) != histogram(&colors_b) || colors_a[a.root] != colors_b[b.root] {
        return false;
    }

    // Visit g1 in BFS order over undirected adjacency so each new node is
    // constrained by an already-mapped neighbor.
    let n = g1.node_count();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([a.root]);
    seen[a.root] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(_, v) in a.out[u].iter().chain(&a.inc[u]) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }

    let mut by_color: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in colors_b.iter().enumerate() {
        by_color.entry(c).or_default().push(v);
    }
    let mut search = Search {
        a: &a,
        b: &b,
        order: &order,
        colors_a: &colors_a,
        by_color: &by_color,
        forward: vec![usize::MAX; n],
        backward: vec![usize::MAX; n],
    };
    search.extend(0)
}

struct Search<'s, 'a> {
    a: &'s Indexed<'a>,
    b: &'s Indexed<'a>,
    order: &'s [usize],
    colors_a: &'s [usize],
    by_color: &'s HashMap<usize, Vec<usize>>,
    forward: Vec<usize>,
    backward: Vec<usize>,
}

impl Search<'_, '_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let u = self.order[depth];
        let candidates: &[usize] = if depth == 0 {
            std::slice::from_ref(&self.b.root)
        } else {
            self.by_color.get(&self.colors_a[u]).map(Vec::as_slice).unwrap_or(&[])
        };
        for &v in candidates {
            if self.backward[v] != usize::MAX || !self.consistent(u, v) {
                continue;
            }
            self.forward[u] = v;
            self.backward[v] = u;
            if self.extend(depth + 1) {
                return true;
            }
            self.forward[u] = usize::MAX;
            self.backward[v] = usize::MAX;
        }
        false
    }

    /// Edges between `u` and mapped nodes must map onto edges between `v`
    /// and their images, with equal counts in both directions.
    fn consistent(&self, u: usize, v: usize) -> bool {
        let mut count_a = 0;
        for &(rel, w) in &self.a.out[u] {
            let img = if w == u { v } else { self.forward[w] };
            if w == u || img != usize::MAX {
                if !self.b.edges.contains(&(v, rel, img)) {
                    return false;
                }
                count_a += 1;
            }
        }
        for &(rel, w) in &self.a.inc[u] {
            let img = self.forward[w];
            if w != u && img != usize::MAX {
                if !self.b.edges.contains(&(img, rel, v)) {
                    return false;
                }
                count_a += 1;
            }
        }
        let mapped_b = |w: usize| w == v || self.backward[w] != usize::MAX;
        let count_b = self.b.out[v].iter().filter(|&&(_, w)| mapped_b(w)).count()
            + self.b.inc[v].iter().filter(|&&(_, w)| w != v && self.backward[w] != usize::MAX).count();
        count_a == count_b
    }
}

/// Joint color refinement of two graphs; returns per-node colors that are
/// comparable across the graphs.
fn refine(a: &Indexed<'_>, b: &Indexed<'_>) -> (Vec<usize>, Vec<usize>) {
    let initial = |g: &Indexed<'_>| -> Vec<String> {
        let attrs = g.graph.node_attributes();
        (0..g.graph.node_count())
            .map(|i| {
                let mut av: Vec<(&str, &str)> = attrs[i]
                    .iter()
                    .map(|&k| {
                        let at = &g.graph.attributes()[k];
                        (at.relation.as_str(), at.value.as_str())
                    })
                    .collect();
                av.sort_unstable();
                format!("{}|{}|{:?}", i == g.root, g.graph.node_at(i).1, av)
            })
            .collect()
    };
    let mut palette: BTreeMap<String, usize> = BTreeMap::new();
    let intern = |sigs: Vec<String>, palette: &mut BTreeMap<String, usize>| -> Vec<usize> {
        sigs.into_iter()
            .map(|s| {
                let next = palette.len();
                *palette.entry(s).or_insert(next)
            })
            .collect()
    };
    let mut ca = intern(initial(a), &mut palette);
    let mut cb = intern(initial(b), &mut palette);

    let n = ca.len();
    let mut classes = palette.len();
    for _ in 0..n {
        let step = |g: &Indexed<'_>, c: &[usize]| -> Vec<String> {
            (0..c.len())
                .map(|i| {
                    let mut o: Vec<(&str, usize)> = g.out[i].iter().map(|&(r, t)| (r, c[t])).collect();
                    let mut p: Vec<(&str, usize)> = g.inc[i].iter().map(|&(r, s)| (r, c[s])).collect();
                    o.sort_unstable();
                    p.sort_unstable();
                    format!("{}|{:?}|{:?}", c[i], o, p)
                })
                .collect()
        };
        let sa = step(a, &ca);
        let sb = step(b, &cb);
        let mut next_palette = BTreeMap::new();
        ca = intern(sa, &mut next_palette);
        cb = intern(sb, &mut next_palette);
        if next_palette.len() == classes {
            break;
        }
        classes = next_palette.len();
    }
    (ca, cb)
}
