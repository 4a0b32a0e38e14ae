//! Depth-first graph linearization with `<Zk>` pointer tokens.
//!
//! ```text
//! ( <Z0> possible :domain ( <Z1> go :arg0 ( <Z2> boy ) ) :polarity ( <Z3> negative ) )
//! ```
//!
//! Every node is introduced as `( <Zk> concept ... )` at its first visit and
//! referenced by its bare pointer afterwards.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::graph::{AmrGraph, InvalidGraph, NodeId};

pub const MASK: &str = "[mask]";
pub const TEXT_START: &str = "<s>";
pub const TEXT_END: &str = "</s>";
pub const GRAPH_START: &str = "<g>";
pub const GRAPH_END: &str = "</g>";

/// Concept inserted by [`repair`] for a node whose label is missing.
pub const UNKNOWN_CONCEPT: &str = "amr-unknown";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Open,
    Close,
    Pointer(u32),
    Concept(String),
    /// Relation label including its leading colon.
    Relation(String),
    Constant(String),
    Word(String),
    Mask,
    TextStart,
    TextEnd,
    GraphStart,
    GraphEnd,
}

impl Token {
    pub fn is_marker(&self) -> bool {
        matches!(self, Token::TextStart | Token::TextEnd | Token::GraphStart | Token::GraphEnd)
    }

    /// Label text of concept, constant and word tokens.
    pub fn symbol(&self) -> Option<&str> {
        match self {
            Token::Concept(s) | Token::Constant(s) | Token::Word(s) => Some(s),
            _ => None,
        }
    }

    /// Classifies a non-symbol token by its text; `None` for plain symbols.
    fn special(text: &str) -> Option<Token> {
        Some(match text {
            "(" => Token::Open,
            ")" => Token::Close,
            MASK => Token::Mask,
            TEXT_START => Token::TextStart,
            TEXT_END => Token::TextEnd,
            GRAPH_START => Token::GraphStart,
            GRAPH_END => Token::GraphEnd,
            _ => {
                if let Some(k) = parse_pointer(text) {
                    Token::Pointer(k)
                } else if text.len() > 1 && text.starts_with(':') {
                    Token::Relation(text.to_owned())
                } else {
                    return None;
                }
            }
        })
    }
}

fn parse_pointer(text: &str) -> Option<u32> {
    let digits = text.strip_prefix("<Z")?.strip_suffix('>')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Open => f.write_str("("),
            Token::Close => f.write_str(")"),
            Token::Pointer(k) => write!(f, "<Z{}>", k),
            Token::Concept(s) | Token::Relation(s) | Token::Constant(s) | Token::Word(s) => f.write_str(s),
            Token::Mask => f.write_str(MASK),
            Token::TextStart => f.write_str(TEXT_START),
            Token::TextEnd => f.write_str(TEXT_END),
            Token::GraphStart => f.write_str(GRAPH_START),
            Token::GraphEnd => f.write_str(GRAPH_END),
        }
    }
}

/// A flat token sequence. Its text form is the tokens joined by single spaces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(pub Vec<Token>);

impl TokenSeq {
    pub fn new() -> Self {
        TokenSeq(Vec::new())
    }

    /// Splits whitespace-tokenized text into word tokens.
    pub fn words(text: &str) -> Self {
        TokenSeq(text.split_whitespace().map(|w| Token::Word(w.to_owned())).collect())
    }

    /// Reads the text form of a (possibly malformed) linearized graph.
    ///
    /// Quoted constants may contain spaces. A plain symbol is a concept when
    /// it directly follows `(` or `( <Zk>`, and a constant otherwise.
    pub fn parse_graph(text: &str) -> Self {
        TokenSeq(classify(split_respecting_quotes(text), false))
    }

    /// Reads a mixed text/graph sequence such as a task-builder input.
    /// Symbols inside `<g> ... </g>` follow [`TokenSeq::parse_graph`] rules,
    /// everything else becomes a word.
    pub fn parse_mixed(text: &str) -> Self {
        TokenSeq(classify(split_respecting_quotes(text), true))
    }

    /// Rebuilds tokens from their individual text forms. Sequences with a
    /// `<s>` or `<g>` marker are read as mixed, other sequences containing
    /// `(` as a bare graph, the rest as words.
    pub fn from_symbols<S: AsRef<str>>(symbols: &[S]) -> Self {
        let pieces: Vec<&str> = symbols.iter().map(AsRef::as_ref).collect();
        let mixed = pieces.iter().any(|&p| p == TEXT_START || p == GRAPH_START) || !pieces.contains(&"(");
        TokenSeq(classify(pieces, mixed))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(Token::to_string).collect()
    }

    pub fn count(&self, token: &Token) -> usize {
        self.0.iter().filter(|t| *t == token).count()
    }
}

/// In mixed mode only `<g> ... </g>` spans are read as graph tokens.
fn classify<'a>(pieces: impl IntoIterator<Item = &'a str>, mixed: bool) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    let mut in_graph = !mixed;
    for piece in pieces {
        let special = Token::special(piece);
        if !in_graph {
            match special {
                Some(Token::GraphStart) => {
                    out.push(Token::GraphStart);
                    in_graph = true;
                }
                Some(t @ (Token::Mask | Token::TextStart | Token::TextEnd | Token::GraphEnd)) => out.push(t),
                _ => out.push(Token::Word(piece.to_owned())),
            }
            continue;
        }
        let token = special.unwrap_or_else(|| {
            let n = out.len();
            let after_open = n >= 1 && out[n - 1] == Token::Open;
            let after_pointer = n >= 2 && matches!(out[n - 1], Token::Pointer(_)) && out[n - 2] == Token::Open;
            if after_open || after_pointer {
                Token::Concept(piece.to_owned())
            } else {
                Token::Constant(piece.to_owned())
            }
        });
        if mixed && token == Token::GraphEnd {
            in_graph = false;
        }
        out.push(token);
    }
    out
}

fn split_respecting_quotes(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let mut quoted = false;
        while i < bytes.len() && (quoted || !bytes[i].is_ascii_whitespace()) {
            match bytes[i] {
                b'"' => quoted = !quoted,
                b'\\' if quoted => i += 1,
                _ => {}
            }
            i += 1;
        }
        out.push(&text[start..i.min(bytes.len())]);
    }
    out
}

impl Deref for TokenSeq {
    type Target = Vec<Token>;
    fn deref(&self) -> &Vec<Token> {
        &self.0
    }
}

impl DerefMut for TokenSeq {
    fn deref_mut(&mut self) -> &mut Vec<Token> {
        &mut self.0
    }
}

impl From<Vec<Token>> for TokenSeq {
    fn from(tokens: Vec<Token>) -> Self {
        TokenSeq(tokens)
    }
}

impl FromIterator<Token> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().collect())
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", t)?;
        }
        Ok(())
    }
}

/// A linearized graph together with the position of every graph element in
/// the token sequence. Node vectors are indexed by node position in the
/// graph, edge and attribute vectors by their stored index.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub tokens: TokenSeq,
    pub pointer: Vec<u32>,
    pub concept_pos: Vec<usize>,
    /// Inclusive `(open, close)` token positions of each node's expansion.
    pub span: Vec<(usize, usize)>,
    /// Edge through which each node was expanded; `None` for the root.
    pub parent_edge: Vec<Option<usize>>,
    pub relation_pos: Vec<usize>,
    pub attribute_pos: Vec<usize>,
}

/// Depth-first linearization from the root following stored edge order.
pub fn linearize(graph: &AmrGraph) -> Result<TokenSeq, InvalidGraph> {
    Ok(linearize_detailed(graph)?.tokens)
}

pub fn linearize_detailed(graph: &AmrGraph) -> Result<Linearization, InvalidGraph> {
    graph.check()?;
    let n = graph.node_count();
    let mut lin = Linearization {
        tokens: TokenSeq::new(),
        pointer: vec![u32::MAX; n],
        concept_pos: vec![0; n],
        span: vec![(0, 0); n],
        parent_edge: vec![None; n],
        relation_pos: vec![0; graph.edges().len()],
        attribute_pos: vec![0; graph.attributes().len()],
    };
    let out_edges = graph.out_edges();
    let attrs = graph.node_attributes();
    let mut next_pointer = 0;
    let root = graph.position(graph.root().as_str()).unwrap();
    visit(graph, root, &out_edges, &attrs, &mut lin, &mut next_pointer);
    Ok(lin)
}

fn visit(
    graph: &AmrGraph,
    node: usize,
    out_edges: &[Vec<usize>],
    attrs: &[Vec<usize>],
    lin: &mut Linearization,
    next_pointer: &mut u32,
) {
    let pointer = *next_pointer;
    *next_pointer += 1;
    lin.pointer[node] = pointer;
    let open = lin.tokens.len();
    lin.tokens.push(Token::Open);
    lin.tokens.push(Token::Pointer(pointer));
    lin.concept_pos[node] = lin.tokens.len();
    lin.tokens.push(Token::Concept(graph.node_at(node).1.to_owned()));
    for &e in &out_edges[node] {
        let edge = &graph.edges()[e];
        lin.relation_pos[e] = lin.tokens.len();
        lin.tokens.push(Token::Relation(edge.relation.clone()));
        let target = graph.position(edge.target.as_str()).unwrap();
        if lin.pointer[target] == u32::MAX {
            lin.parent_edge[target] = Some(e);
            visit(graph, target, out_edges, attrs, lin, next_pointer);
        } else {
            lin.tokens.push(Token::Pointer(lin.pointer[target]));
        }
    }
    for &a in &attrs[node] {
        let attr = &graph.attributes()[a];
        lin.attribute_pos[a] = lin.tokens.len();
        lin.tokens.push(Token::Relation(attr.relation.clone()));
        lin.tokens.push(Token::Constant(attr.value.clone()));
    }
    lin.span[node] = (open, lin.tokens.len());
    lin.tokens.push(Token::Close);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureErrorKind {
    Empty,
    /// Input ended while a node was still open.
    Unbalanced,
    ExpectedOpen,
    MissingPointer,
    MissingConcept,
    PointerRedefined(u32),
    /// Pointer referenced before its definition.
    UndefinedPointer(u32),
    /// Reference to a node that is still open, which would close a cycle.
    Cycle(u32),
    RelationWithoutTarget(String),
    DuplicateTriple,
    UnexpectedToken(String),
    TrailingTokens,
}

impl fmt::Display for StructureErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureErrorKind::Empty => f.write_str("empty sequence"),
            StructureErrorKind::Unbalanced => f.write_str("unbalanced parentheses"),
            StructureErrorKind::ExpectedOpen => f.write_str("expected `(`"),
            StructureErrorKind::MissingPointer => f.write_str("expected a pointer token after `(`"),
            StructureErrorKind::MissingConcept => f.write_str("expected a concept"),
            StructureErrorKind::PointerRedefined(k) => write!(f, "pointer <Z{}> defined twice", k),
            StructureErrorKind::UndefinedPointer(k) => write!(f, "pointer <Z{}> used before definition", k),
            StructureErrorKind::Cycle(k) => write!(f, "reference to <Z{}> closes a cycle", k),
            StructureErrorKind::RelationWithoutTarget(r) => write!(f, "relation `{}` has no target", r),
            StructureErrorKind::DuplicateTriple => f.write_str("duplicate relation"),
            StructureErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{}`", t),
            StructureErrorKind::TrailingTokens => f.write_str("tokens after the root node"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("token {position}: {kind}")]
pub struct StructureError {
    pub position: usize,
    pub kind: StructureErrorKind,
}

/// Drops one leading `<g>` and one trailing `</g>` if present.
pub fn strip_markers(tokens: &[Token]) -> &[Token] {
    let tokens = tokens.strip_prefix(&[Token::GraphStart]).unwrap_or(tokens);
    tokens.strip_suffix(&[Token::GraphEnd]).unwrap_or(tokens)
}

/// Rebuilds a graph from a linearized sequence. Node ids are `z{k}` for
/// pointer `<Zk>`. Surrounding `<g>`/`</g>` markers are ignored.
pub fn delinearize(tokens: &[Token]) -> Result<AmrGraph, StructureError> {
    let offset = usize::from(tokens.first() == Some(&Token::GraphStart));
    let body = strip_markers(tokens);
    let mut reader = Reader {
        tokens: body,
        pos: 0,
        graph: None,
        defined: HashSet::new(),
        open: HashSet::new(),
        triples: HashSet::new(),
        attrs: HashSet::new(),
    };
    let result = reader.read();
    result.map_err(|mut e| {
        e.position += offset;
        e
    })
}

struct Reader<'t> {
    tokens: &'t [Token],
    pos: usize,
    graph: Option<AmrGraph>,
    defined: HashSet<u32>,
    open: HashSet<u32>,
    triples: HashSet<(u32, String, u32)>,
    attrs: HashSet<(u32, String, String)>,
}

impl Reader<'_> {
    fn fail<T>(&self, position: usize, kind: StructureErrorKind) -> Result<T, StructureError> {
        Err(StructureError { position, kind })
    }

    fn read(&mut self) -> Result<AmrGraph, StructureError> {
        if self.tokens.is_empty() {
            return self.fail(0, StructureErrorKind::Empty);
        }
        self.node()?;
        if self.pos < self.tokens.len() {
            return self.fail(self.pos, StructureErrorKind::TrailingTokens);
        }
        Ok(self.graph.take().unwrap())
    }

    fn node(&mut self) -> Result<u32, StructureError> {
        if self.tokens.get(self.pos) != Some(&Token::Open) {
            return self.fail(self.pos, StructureErrorKind::ExpectedOpen);
        }
        self.pos += 1;
        let k = match self.tokens.get(self.pos) {
            Some(Token::Pointer(k)) => *k,
            None => return self.fail(self.pos, StructureErrorKind::Unbalanced),
            _ => return self.fail(self.pos, StructureErrorKind::MissingPointer),
        };
        if !self.defined.insert(k) {
            return self.fail(self.pos, StructureErrorKind::PointerRedefined(k));
        }
        self.pos += 1;
        let concept = match self.tokens.get(self.pos).and_then(Token::symbol) {
            Some(c) => c.to_owned(),
            None if self.pos >= self.tokens.len() => return self.fail(self.pos, StructureErrorKind::Unbalanced),
            None => return self.fail(self.pos, StructureErrorKind::MissingConcept),
        };
        self.pos += 1;
        let id = NodeId::synthetic(k as usize);
        let graph = self.graph.get_or_insert_with(|| AmrGraph::new(id.clone()));
        graph.add_node(id.clone(), concept).expect("pointers are unique");
        self.open.insert(k);

        loop {
            let at = self.pos;
            match self.tokens.get(at) {
                None => return self.fail(at, StructureErrorKind::Unbalanced),
                Some(Token::Close) => {
                    self.pos += 1;
                    self.open.remove(&k);
                    return Ok(k);
                }
                Some(Token::Relation(rel)) => {
                    self.pos += 1;
                    match self.tokens.get(self.pos) {
                        Some(Token::Open) => {
                            let slot = self.graph.as_ref().unwrap().edges().len();
                            self.graph.as_mut().unwrap().add_edge(id.clone(), rel.clone(), "");
                            let child = self.node()?;
                            self.graph.as_mut().unwrap().set_edge_target(slot, NodeId::synthetic(child as usize));
                        }
                        Some(Token::Pointer(t)) => {
                            let t = *t;
                            if !self.defined.contains(&t) {
                                return self.fail(self.pos, StructureErrorKind::UndefinedPointer(t));
                            }
                            if self.open.contains(&t) {
                                return self.fail(self.pos, StructureErrorKind::Cycle(t));
                            }
                            if !self.triples.insert((k, rel.clone(), t)) {
                                return self.fail(at, StructureErrorKind::DuplicateTriple);
                            }
                            self.pos += 1;
                            self.graph.as_mut().unwrap().add_edge(id.clone(), rel.clone(), NodeId::synthetic(t as usize));
                        }
                        Some(tok) if tok.symbol().is_some() => {
                            let value = tok.symbol().unwrap().to_owned();
                            if !self.attrs.insert((k, rel.clone(), value.clone())) {
                                return self.fail(at, StructureErrorKind::DuplicateTriple);
                            }
                            self.pos += 1;
                            self.graph.as_mut().unwrap().add_attribute(id.clone(), rel.clone(), value);
                        }
                        _ => return self.fail(at, StructureErrorKind::RelationWithoutTarget(rel.clone())),
                    }
                }
                Some(other) => return self.fail(at, StructureErrorKind::UnexpectedToken(other.to_string())),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("no node could be salvaged")]
    Unrecoverable,
}

/// The sequence substituted when [`repair`] gives up: `( <Z0> amr-empty )`.
pub fn fallback_sequence() -> TokenSeq {
    TokenSeq(vec![
        Token::Open,
        Token::Pointer(0),
        Token::Concept(crate::penman::EMPTY_CONCEPT.to_owned()),
        Token::Close,
    ])
}

/// Turns an arbitrary token sequence into one that [`delinearize`] accepts.
///
/// Missing `)` are appended, relations without a usable target are dropped,
/// references to pointers that are undefined at that point (or that would
/// close a cycle, or duplicate an earlier relation) are dropped, and a second
/// definition of a pointer collapses to a reference to the first one. Nodes
/// without a pointer get a fresh one; nodes without a concept get
/// `amr-unknown`. Tokens outside the root node are discarded.
///
/// `repair` is idempotent and leaves well-formed input unchanged.
pub fn repair(tokens: &[Token]) -> Result<TokenSeq, RepairError> {
    let body = strip_markers(tokens);
    let start = body.iter().position(|t| *t == Token::Open).ok_or(RepairError::Unrecoverable)?;
    let fresh = body
        .iter()
        .filter_map(|t| match t {
            Token::Pointer(k) => Some(k + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut r = Repairer {
        tokens: body,
        pos: start,
        out: Vec::new(),
        defined: HashSet::new(),
        open: HashSet::new(),
        triples: HashSet::new(),
        attrs: HashSet::new(),
        fresh,
        salvaged: false,
    };
    r.node();
    if !r.salvaged {
        return Err(RepairError::Unrecoverable);
    }
    Ok(TokenSeq(r.out))
}

/// [`repair`], substituting [`fallback_sequence`] when nothing is salvageable.
pub fn repair_or_fallback(tokens: &[Token]) -> TokenSeq {
    repair(tokens).unwrap_or_else(|_| fallback_sequence())
}

struct Repairer<'t> {
    tokens: &'t [Token],
    pos: usize,
    out: Vec<Token>,
    defined: HashSet<u32>,
    open: HashSet<u32>,
    triples: HashSet<(u32, String, u32)>,
    attrs: HashSet<(u32, String, String)>,
    fresh: u32,
    /// Whether any real concept or relation survived.
    salvaged: bool,
}

impl Repairer<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    /// Skips a balanced span starting at `(`.
    fn skip_span(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t {
                Token::Open => depth += 1,
                Token::Close => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return;
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    /// If the `(` at the cursor re-defines a known pointer, returns it.
    fn redefinition(&self) -> Option<u32> {
        match self.tokens.get(self.pos + 1) {
            Some(Token::Pointer(k)) if self.defined.contains(k) => Some(*k),
            _ => None,
        }
    }

    fn reference_allowed(&self, source: u32, rel: &str, target: u32) -> bool {
        self.defined.contains(&target)
            && !self.open.contains(&target)
            && !self.triples.contains(&(source, rel.to_owned(), target))
    }

    /// Emits one node starting at the `(` under the cursor.
    fn node(&mut self) -> u32 {
        self.pos += 1;
        self.out.push(Token::Open);
        let k = match self.peek() {
            Some(Token::Pointer(k)) if !self.defined.contains(k) => {
                let k = *k;
                self.pos += 1;
                k
            }
            _ => {
                self.fresh += 1;
                self.fresh - 1
            }
        };
        self.defined.insert(k);
        self.open.insert(k);
        self.out.push(Token::Pointer(k));
        match self.peek().and_then(Token::symbol) {
            Some(c) => {
                self.out.push(Token::Concept(c.to_owned()));
                self.pos += 1;
                self.salvaged = true;
            }
            None => {
                if self.peek() == Some(&Token::Mask) {
                    self.pos += 1;
                }
                self.out.push(Token::Concept(UNKNOWN_CONCEPT.to_owned()));
            }
        }

        loop {
            match self.peek().cloned() {
                None => break,
                Some(Token::Close) => {
                    self.pos += 1;
                    break;
                }
                Some(Token::Relation(rel)) => {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Token::Open) => {
                            if let Some(prev) = self.redefinition() {
                                if self.reference_allowed(k, &rel, prev) {
                                    self.triples.insert((k, rel.clone(), prev));
                                    self.out.push(Token::Relation(rel));
                                    self.out.push(Token::Pointer(prev));
                                }
                                self.skip_span();
                            } else {
                                self.out.push(Token::Relation(rel));
                                self.salvaged = true;
                                self.node();
                            }
                        }
                        Some(Token::Pointer(t)) => {
                            self.pos += 1;
                            if self.reference_allowed(k, &rel, t) {
                                self.triples.insert((k, rel.clone(), t));
                                self.out.push(Token::Relation(rel));
                                self.out.push(Token::Pointer(t));
                                self.salvaged = true;
                            }
                        }
                        Some(tok) if tok.symbol().is_some() => {
                            self.pos += 1;
                            let value = tok.symbol().unwrap().to_owned();
                            if self.attrs.insert((k, rel.clone(), value.clone())) {
                                self.out.push(Token::Relation(rel));
                                self.out.push(Token::Constant(value));
                                self.salvaged = true;
                            }
                        }
                        // Dangling relation; the next token is handled by the loop.
                        _ => {}
                    }
                }
                Some(Token::Open) => self.skip_span(),
                Some(_) => self.pos += 1,
            }
        }
        self.out.push(Token::Close);
        self.open.remove(&k);
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::is_isomorphic;

    pub(crate) fn sample_graph() -> AmrGraph {
        let mut g = AmrGraph::new("p");
        g.add_node("p", "possible").unwrap();
        g.add_node("g", "go").unwrap();
        g.add_node("b", "boy").unwrap();
        g.add_node("n", "negative").unwrap();
        g.add_edge("p", ":domain", "g");
        g.add_edge("g", ":arg0", "b");
        g.add_edge("p", ":polarity", "n");
        g
    }

    const GOLDEN: &str = "( <Z0> possible :domain ( <Z1> go :arg0 ( <Z2> boy ) ) :polarity ( <Z3> negative ) )";

    #[test]
    fn golden_linearization() {
        assert_eq!(linearize(&sample_graph()).unwrap().to_string(), GOLDEN);
    }

    #[test]
    fn single_node() {
        let g = AmrGraph::single("z", "boy");
        assert_eq!(linearize(&g).unwrap().to_string(), "( <Z0> boy )");
        let back = delinearize(&TokenSeq::parse_graph("( <Z0> boy )")).unwrap();
        assert!(is_isomorphic(&g, &back).unwrap());
    }

    #[test]
    fn reentrancy_emits_bare_pointer() {
        let mut g = AmrGraph::new("o");
        g.add_node("o", "overcome-01").unwrap();
        g.add_node("y", "you").unwrap();
        g.add_node("h", "harm-01").unwrap();
        g.add_edge("o", ":ARG1", "h");
        g.add_edge("o", ":ARG0", "y");
        g.add_edge("y", ":ARG1", "h");
        assert_eq!(
            linearize(&g).unwrap().to_string(),
            "( <Z0> overcome-01 :ARG1 ( <Z1> harm-01 ) :ARG0 ( <Z2> you :ARG1 <Z1> ) )"
        );
    }

    #[test]
    fn text_form_round_trip() {
        let seq = linearize(&sample_graph()).unwrap();
        assert_eq!(TokenSeq::parse_graph(&seq.to_string()), seq);
        let quoted = TokenSeq::parse_graph("( <Z0> name :op1 \"New York\" )");
        assert_eq!(quoted[4], Token::Constant("\"New York\"".into()));
    }

    #[test]
    fn delinearize_round_trip() {
        let g = sample_graph();
        let back = delinearize(&linearize(&g).unwrap()).unwrap();
        assert!(is_isomorphic(&g, &back).unwrap());
    }

    #[test]
    fn delinearize_ignores_graph_markers() {
        let mut seq = vec![Token::GraphStart];
        seq.extend(linearize(&sample_graph()).unwrap().0);
        seq.push(Token::GraphEnd);
        assert_eq!(delinearize(&seq).unwrap().node_count(), 4);
    }

    #[test]
    fn delinearize_errors_are_positioned() {
        let err = |s: &str| delinearize(&TokenSeq::parse_graph(s)).unwrap_err();
        assert_eq!(err("( <Z0> boy").kind, StructureErrorKind::Unbalanced);
        assert_eq!(
            err("( <Z0> go :arg0 )"),
            StructureError { position: 3, kind: StructureErrorKind::RelationWithoutTarget(":arg0".into()) }
        );
        assert_eq!(
            err("( <Z0> go :arg0 <Z1> )"),
            StructureError { position: 4, kind: StructureErrorKind::UndefinedPointer(1) }
        );
        assert_eq!(err("( <Z0> go :arg0 <Z0> )").kind, StructureErrorKind::Cycle(0));
        assert_eq!(err("( <Z0> go ) )").kind, StructureErrorKind::TrailingTokens);
        assert_eq!(err("").kind, StructureErrorKind::Empty);
        assert_eq!(err("( go )").kind, StructureErrorKind::MissingPointer);
    }

    #[test]
    fn repair_examples() {
        let fix = |s: &str| repair(&TokenSeq::parse_graph(s)).unwrap().to_string();
        assert_eq!(fix(GOLDEN), GOLDEN);
        assert_eq!(fix("( <Z0> boy"), "( <Z0> boy )");
        assert_eq!(fix("( <Z0> go :arg0 )"), "( <Z0> go )");
        assert_eq!(fix("( <Z0> go :arg0 <Z7> )"), "( <Z0> go )");
        assert_eq!(
            fix("( <Z0> a :op1 ( <Z1> b ) :op2 ( <Z1> c :mod ( <Z2> d ) ) )"),
            "( <Z0> a :op1 ( <Z1> b ) :op2 <Z1> )"
        );
        assert_eq!(fix("( <Z0> harm-01 :ARG1 <Z0> )"), "( <Z0> harm-01 )");
        assert_eq!(fix("junk ( <Z0> a ) ) extra"), "( <Z0> a )");
        assert_eq!(fix("( a :mod ( b ) )"), "( <Z0> a :mod ( <Z1> b ) )");
    }

    #[test]
    fn repair_gives_up_without_nodes() {
        assert_eq!(repair(&TokenSeq::parse_graph(":arg0 boy")), Err(RepairError::Unrecoverable));
        assert_eq!(repair(&TokenSeq::parse_graph("( )")), Err(RepairError::Unrecoverable));
        assert_eq!(repair_or_fallback(&[]).to_string(), "( <Z0> amr-empty )");
    }
}
