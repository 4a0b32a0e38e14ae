use std::collections::BTreeMap;

use crate::graph::{AmrGraph, InvalidGraph};

/// Inverse-looking relations that are not inverses.
const NOT_INVERSE: [&str; 3] = [":consist-of", ":prep-on-behalf-of", ":prep-out-of"];

/// Lowercases an edge relation and rewrites `:x-of` as `:x` and `:mod` as
/// `:domain`, reporting whether the direction flipped.
pub fn normalize_role(relation: &str) -> (String, bool) {
    let lower = relation.to_lowercase();
    if lower == ":mod" {
        return (":domain".to_owned(), true);
    }
    if !NOT_INVERSE.contains(&lower.as_str()) {
        if let Some(base) = lower.strip_suffix("-of") {
            if base.len() > 1 {
                return (base.to_owned(), true);
            }
        }
    }
    (lower, false)
}

fn unquote(value: &str) -> &str {
    value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value)
}

/// Triples of one graph with variables numbered by node position. Equal
/// triples are merged and counted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleSet {
    pub variables: Vec<String>,
    /// Concept of each variable.
    pub concepts: Vec<String>,
    /// `(variable, relation, value)` with the `TOP` triple among them.
    pub attributes: BTreeMap<(usize, String, String), usize>,
    /// `(source, relation, target)`.
    pub relations: BTreeMap<(usize, String, usize), usize>,
    pub root: usize,
}

pub const TOP: &str = "TOP";

impl TripleSet {
    pub fn len(&self) -> usize {
        self.concepts.len() + self.attributes.values().sum::<usize>() + self.relations.values().sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Triples in text form, one `(kind, a, b)` per occurrence.
    pub fn listing(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for (v, c) in self.variables.iter().zip(&self.concepts) {
            out.push(("instance".to_owned(), v.clone(), c.clone()));
        }
        for ((v, r, val), &n) in &self.attributes {
            for _ in 0..n {
                out.push((r.clone(), self.variables[*v].clone(), val.clone()));
            }
        }
        for ((a, r, b), &n) in &self.relations {
            for _ in 0..n {
                out.push((r.clone(), self.variables[*a].clone(), self.variables[*b].clone()));
            }
        }
        out
    }

    /// Same variables with every concept passed through `f`.
    pub fn map_concepts(&self, f: impl Fn(&str) -> String) -> TripleSet {
        let mut out = self.clone();
        out.concepts = self.concepts.iter().map(|c| f(c)).collect();
        out.attributes = BTreeMap::new();
        for ((v, r, val), &n) in &self.attributes {
            let val = if r == TOP { f(val) } else { val.clone() };
            *out.attributes.entry((*v, r.clone(), val)).or_default() += n;
        }
        out
    }

    /// Same variables with every relation and non-`TOP` attribute label
    /// replaced by `label`.
    pub fn map_labels(&self, label: &str) -> TripleSet {
        let mut out = self.clone();
        out.attributes = BTreeMap::new();
        out.relations = BTreeMap::new();
        for ((v, r, val), &n) in &self.attributes {
            let r = if r == TOP { TOP.to_owned() } else { label.to_owned() };
            *out.attributes.entry((*v, r, val.clone())).or_default() += n;
        }
        for ((a, _, b), &n) in &self.relations {
            *out.relations.entry((*a, label.to_owned(), *b)).or_default() += n;
        }
        out
    }
}

/// One instance triple per node, one relation triple per edge, one
/// attribute triple per attribute and the `TOP` triple on the root.
pub fn to_triples(graph: &AmrGraph) -> Result<TripleSet, InvalidGraph> {
    graph.check()?;
    let mut t = TripleSet::default();
    for (id, concept) in graph.nodes() {
        t.variables.push(id.to_string());
        t.concepts.push(concept.to_owned());
    }
    let pos = |id: &str| graph.position(id).expect("checked graph");
    t.root = pos(graph.root().as_str());
    t.attributes.insert((t.root, TOP.to_owned(), t.concepts[t.root].clone()), 1);
    for a in graph.attributes() {
        *t.attributes.entry((pos(a.source.as_str()), a.relation.to_lowercase(), unquote(&a.value).to_owned())).or_default() += 1;
    }
    for e in graph.edges() {
        let (rel, flipped) = normalize_role(&e.relation);
        let (s, d) = (pos(e.source.as_str()), pos(e.target.as_str()));
        let key = if flipped { (d, rel, s) } else { (s, rel, d) };
        *t.relations.entry(key).or_default() += 1;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::{parse_penman, ParseMode};

    fn triples(s: &str) -> TripleSet {
        to_triples(&parse_penman(s, ParseMode::Strict).unwrap().graph).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(triples("(b / boy)").len(), 2);
        assert_eq!(triples("(w / want-01 :ARG0 (b / boy))").len(), 4);
        assert_eq!(triples("(p / possible :domain (g / go :arg0 (b / boy)) :polarity (n / negative))").len(), 8);
    }

    #[test]
    fn inverse_roles() {
        let t = triples("(b / boy :ARG0-of (w / want-01))");
        assert_eq!(t.relations.keys().next(), Some(&(1, ":arg0".to_owned(), 0)));
        assert_eq!(normalize_role(":consist-of"), (":consist-of".to_owned(), false));
        assert_eq!(normalize_role(":domain"), (":domain".to_owned(), false));
        assert_eq!(normalize_role(":mod"), (":domain".to_owned(), true));
        let (a, b) = (triples("(c / cat :mod (b / big))"), triples("(b / big :domain (c / cat))"));
        assert_eq!(a.relations.keys().next(), Some(&(1, ":domain".to_owned(), 0)));
        assert_eq!(b.relations.keys().next(), Some(&(0, ":domain".to_owned(), 1)));
    }

    #[test]
    fn quoted_constants_match_bare() {
        let a = triples("(n / name :op1 \"Paris\")");
        let b = triples("(n / name :op1 Paris)");
        assert_eq!(a, b);
    }
}
