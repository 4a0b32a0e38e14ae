//! Reading and writing graphs in PENMAN notation.
//!
//! A document is a run of `# ::key value` comment lines followed by one
//! parenthesized graph. Corpus files hold documents separated by blank lines.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead};
use std::ops::Range;

use thiserror::Error;

use crate::graph::{AmrGraph, Diagnostic, InvalidGraph, NodeId};

/// Whether malformed input aborts parsing or is salvaged with diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Concept used when nothing of a malformed graph can be salvaged.
pub const EMPTY_CONCEPT: &str = "amr-empty";

/// Ordered `# ::key value` metadata. Keys may repeat.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metadata(Vec<(String, String)>);

impl Metadata {
    pub fn new() -> Self {
        Metadata(Vec::new())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenmanDocument {
    pub metadata: Metadata,
    pub graph: AmrGraph,
    /// Byte range of the document in its input.
    pub source_span: Range<usize>,
    /// Problems found in lenient mode. Always empty for strict parses.
    pub diagnostics: Vec<String>,
}

impl PenmanDocument {
    pub fn new(graph: AmrGraph) -> Self {
        PenmanDocument {
            metadata: Metadata::new(),
            graph,
            source_span: 0..0,
            diagnostics: Vec::new(),
        }
    }

    pub fn id(&self) -> Option<&str> {
        self.metadata.get("id")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Empty,
    UnclosedParen,
    UnexpectedClose,
    MissingVariable,
    MissingSlash,
    MissingConcept,
    DuplicateVariable(String),
    MissingTarget(String),
    UnexpectedToken(String),
    UnterminatedString,
    TrailingInput,
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxErrorKind::Empty => f.write_str("no graph found"),
            SyntaxErrorKind::UnclosedParen => f.write_str("unbalanced parentheses: missing `)`"),
            SyntaxErrorKind::UnexpectedClose => f.write_str("unbalanced parentheses: unexpected `)`"),
            SyntaxErrorKind::MissingVariable => f.write_str("expected a variable after `(`"),
            SyntaxErrorKind::MissingSlash => f.write_str("expected `/` after the variable"),
            SyntaxErrorKind::MissingConcept => f.write_str("missing concept after `/`"),
            SyntaxErrorKind::DuplicateVariable(v) => write!(f, "variable `{}` is defined twice", v),
            SyntaxErrorKind::MissingTarget(r) => write!(f, "relation `{}` has no target", r),
            SyntaxErrorKind::UnexpectedToken(t) => write!(f, "unexpected `{}`", t),
            SyntaxErrorKind::UnterminatedString => f.write_str("unterminated string literal"),
            SyntaxErrorKind::TrailingInput => f.write_str("unexpected input after the graph"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PenmanError {
    #[error("{line}:{column}: {kind}")]
    Syntax {
        line: usize,
        column: usize,
        kind: SyntaxErrorKind,
    },
    #[error(transparent)]
    Invalid(#[from] InvalidGraph),
}

impl PenmanError {
    pub fn shift_lines(self, by: usize) -> Self {
        match self {
            PenmanError::Syntax { line, column, kind } => PenmanError::Syntax {
                line: line + by,
                column,
                kind,
            },
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Lexeme {
    Open,
    Close,
    Slash,
    Role(String),
    Symbol(String),
    Str(String),
}

impl fmt::Display for Lexeme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lexeme::Open => f.write_str("("),
            Lexeme::Close => f.write_str(")"),
            Lexeme::Slash => f.write_str("/"),
            Lexeme::Role(s) | Lexeme::Symbol(s) | Lexeme::Str(s) => f.write_str(s),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |p| before[p + 1..].chars().count()) + 1;
    (line, column)
}

fn parse_metadata_line(comment: &str, metadata: &mut Metadata) {
    let body = comment.trim_start_matches('#');
    let Some(start) = body.find("::") else { return };
    let mut rest = &body[start + 2..];
    loop {
        let key_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let key = &rest[..key_end];
        let after = &rest[key_end..];
        let after = after.strip_prefix(' ').unwrap_or(after);
        if matches!(key, "snt" | "tok") {
            metadata.push(key, after);
            return;
        }
        match after.find(" ::") {
            Some(p) => {
                metadata.push(key, after[..p].trim());
                rest = &after[p + 3..];
            }
            None => {
                metadata.push(key, after.trim());
                return;
            }
        }
    }
}

/// Splits the input into lexemes with their byte offsets; comment lines
/// feed `metadata`.
fn lex(text: &str, metadata: &mut Metadata) -> Result<Vec<(Lexeme, usize)>, (usize, SyntaxErrorKind)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b if b.is_ascii_whitespace() => i += 1,
            b'#' => {
                let end = text[i..].find('\n').map_or(text.len(), |p| i + p);
                parse_metadata_line(text[i..end].trim_end_matches('\r'), metadata);
                i = end;
            }
            b'(' => {
                out.push((Lexeme::Open, i));
                i += 1;
            }
            b')' => {
                out.push((Lexeme::Close, i));
                i += 1;
            }
            b'/' => {
                out.push((Lexeme::Slash, i));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err((start, SyntaxErrorKind::UnterminatedString)),
                        Some(b'\\') => i += 2,
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(_) => i += 1,
                    }
                }
                out.push((Lexeme::Str(text[start..i].to_owned()), start));
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'(' | b')' | b'/' | b'"')
                {
                    i += 1;
                }
                let s = text[start..i].to_owned();
                if s.starts_with(':') {
                    out.push((Lexeme::Role(s), start));
                } else {
                    out.push((Lexeme::Symbol(s), start));
                }
            }
        }
    }
    Ok(out)
}

struct Parser<'t> {
    text: &'t str,
    lexemes: Vec<(Lexeme, usize)>,
    pos: usize,
    lenient: bool,
    variables: HashSet<String>,
    defined: HashSet<String>,
    graph: Option<AmrGraph>,
    diagnostics: Vec<String>,
    fresh: usize,
}

type ParseResult<T> = Result<T, PenmanError>;

impl<'t> Parser<'t> {
    fn error(&self, offset: usize, kind: SyntaxErrorKind) -> PenmanError {
        let (line, column) = line_col(self.text, offset);
        PenmanError::Syntax { line, column, kind }
    }

    fn offset(&self) -> usize {
        self.lexemes.get(self.pos).map_or(self.text.len(), |(_, o)| *o)
    }

    fn peek(&self) -> Option<&Lexeme> {
        self.lexemes.get(self.pos).map(|(l, _)| l)
    }

    /// Records a recoverable problem in lenient mode, fails in strict mode.
    fn recover(&mut self, offset: usize, kind: SyntaxErrorKind) -> ParseResult<()> {
        let err = self.error(offset, kind);
        if self.lenient {
            self.diagnostics.push(err.to_string());
            Ok(())
        } else {
            Err(err)
        }
    }

    fn fresh_variable(&mut self, base: &str) -> String {
        loop {
            self.fresh += 1;
            let candidate = format!("{}_{}", base, self.fresh);
            if !self.variables.contains(&candidate) {
                self.variables.insert(candidate.clone());
                return candidate;
            }
        }
    }

    /// Parses a node whose `(` was just consumed; returns its id.
    fn node(&mut self, open_offset: usize) -> ParseResult<NodeId> {
        let var = match self.peek() {
            Some(Lexeme::Symbol(s)) => {
                let s = s.clone();
                self.pos += 1;
                s
            }
            _ => {
                let off = self.offset();
                self.recover(off, SyntaxErrorKind::MissingVariable)?;
                self.fresh_variable("v")
            }
        };
        let var = if self.defined.contains(&var) {
            self.recover(open_offset, SyntaxErrorKind::DuplicateVariable(var.clone()))?;
            self.fresh_variable(&var)
        } else {
            var
        };
        self.defined.insert(var.clone());

        let mut concept = None;
        if self.peek() == Some(&Lexeme::Slash) {
            self.pos += 1;
            match self.peek() {
                Some(Lexeme::Symbol(s)) | Some(Lexeme::Str(s)) => {
                    concept = Some(s.clone());
                    self.pos += 1;
                }
                _ => {
                    let off = self.offset();
                    self.recover(off, SyntaxErrorKind::MissingConcept)?;
                }
            }
        } else {
            let off = self.offset();
            self.recover(off, SyntaxErrorKind::MissingSlash)?;
        }
        let id = NodeId::new(var);
        let graph = self.graph.get_or_insert_with(|| AmrGraph::new(id.clone()));
        graph
            .add_node(id.clone(), concept.unwrap_or_else(|| "amr-unknown".to_owned()))
            .expect("variables are unique");

        loop {
            let offset = self.offset();
            match self.peek().cloned() {
                Some(Lexeme::Close) => {
                    self.pos += 1;
                    return Ok(id);
                }
                None => {
                    self.recover(open_offset, SyntaxErrorKind::UnclosedParen)?;
                    return Ok(id);
                }
                Some(Lexeme::Role(role)) => {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Lexeme::Open) => {
                            let child_offset = self.offset();
                            self.pos += 1;
                            // Edge order follows the role's textual position.
                            let slot = self.graph.as_ref().unwrap().edges().len();
                            self.graph.as_mut().unwrap().add_edge(id.clone(), role.clone(), "");
                            let child = self.node(child_offset)?;
                            self.graph.as_mut().unwrap().set_edge_target(slot, child);
                        }
                        Some(Lexeme::Symbol(s)) if self.variables.contains(&s) => {
                            self.pos += 1;
                            self.graph.as_mut().unwrap().add_edge(id.clone(), role, s);
                        }
                        Some(Lexeme::Symbol(s)) | Some(Lexeme::Str(s)) => {
                            self.pos += 1;
                            self.graph.as_mut().unwrap().add_attribute(id.clone(), role, s);
                        }
                        _ => {
                            self.recover(offset, SyntaxErrorKind::MissingTarget(role))?;
                        }
                    }
                }
                Some(other) => {
                    self.recover(offset, SyntaxErrorKind::UnexpectedToken(other.to_string()))?;
                    self.pos += 1;
                }
            }
        }
    }
}

/// Parses a single document.
///
/// In lenient mode this never fails: syntax problems are repaired where
/// possible and recorded in `diagnostics`; when nothing can be salvaged the
/// graph is `(z0 / amr-empty)`.
pub fn parse_penman(text: &str, mode: ParseMode) -> Result<PenmanDocument, PenmanError> {
    let lenient = mode == ParseMode::Lenient;
    let mut metadata = Metadata::new();
    let mut diagnostics = Vec::new();
    let lexemes = match lex(text, &mut metadata) {
        Ok(l) => l,
        Err((offset, kind)) => {
            let (line, column) = line_col(text, offset);
            let err = PenmanError::Syntax { line, column, kind };
            if !lenient {
                return Err(err);
            }
            diagnostics.push(err.to_string());
            let mut partial = Metadata::new();
            // Lex the prefix before the broken literal.
            lex(&text[..offset], &mut partial).unwrap_or_default()
        }
    };

    let variables = lexemes
        .windows(2)
        .filter_map(|w| match (&w[0].0, &w[1].0) {
            (Lexeme::Open, Lexeme::Symbol(s)) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut parser = Parser {
        text,
        lexemes,
        pos: 0,
        lenient,
        variables,
        defined: HashSet::new(),
        graph: None,
        diagnostics,
        fresh: 0,
    };

    // Skip anything before the first `(`.
    while let Some(l) = parser.peek() {
        if *l == Lexeme::Open {
            break;
        }
        let off = parser.offset();
        let kind = if *l == Lexeme::Close {
            SyntaxErrorKind::UnexpectedClose
        } else {
            SyntaxErrorKind::UnexpectedToken(l.to_string())
        };
        parser.recover(off, kind)?;
        parser.pos += 1;
    }
    if parser.peek().is_none() {
        let off = text.len();
        parser.recover(off, SyntaxErrorKind::Empty)?;
    } else {
        let open = parser.offset();
        parser.pos += 1;
        parser.node(open)?;
        if parser.pos < parser.lexemes.len() {
            let off = parser.offset();
            let kind = if parser.peek() == Some(&Lexeme::Close) {
                SyntaxErrorKind::UnexpectedClose
            } else {
                SyntaxErrorKind::TrailingInput
            };
            parser.recover(off, kind)?;
        }
    }

    let mut diagnostics = parser.diagnostics;
    let graph = match parser.graph {
        Some(g) => g,
        None => AmrGraph::single(NodeId::synthetic(0), EMPTY_CONCEPT),
    };
    let problems: Vec<Diagnostic> = crate::graph::validate(&graph);
    if !problems.is_empty() {
        if !lenient {
            return Err(InvalidGraph(problems).into());
        }
        diagnostics.extend(problems.iter().map(|d| d.to_string()));
    }
    Ok(PenmanDocument {
        metadata,
        graph,
        source_span: 0..text.len(),
        diagnostics,
    })
}

/// Writes metadata lines followed by the graph. Each node is expanded at its
/// first occurrence in depth-first edge order; later references are bare
/// variables.
pub fn serialize_penman(doc: &PenmanDocument) -> Result<String, InvalidGraph> {
    let mut out = String::new();
    for (k, v) in doc.metadata.iter() {
        if v.is_empty() {
            out.push_str(&format!("# ::{}\n", k));
        } else {
            out.push_str(&format!("# ::{} {}\n", k, v));
        }
    }
    out.push_str(&serialize_graph(&doc.graph)?);
    Ok(out)
}

/// The graph alone in PENMAN notation, without a trailing newline.
pub fn serialize_graph(graph: &AmrGraph) -> Result<String, InvalidGraph> {
    graph.check()?;
    let out_edges = graph.out_edges();
    let attrs = graph.node_attributes();
    let mut visited = vec![false; graph.node_count()];
    let mut out = String::new();
    write_node(graph, graph.position(graph.root().as_str()).unwrap(), 0, &out_edges, &attrs, &mut visited, &mut out);
    Ok(out)
}

fn write_node(
    graph: &AmrGraph,
    node: usize,
    depth: usize,
    out_edges: &[Vec<usize>],
    attrs: &[Vec<usize>],
    visited: &mut [bool],
    out: &mut String,
) {
    visited[node] = true;
    let (id, concept) = graph.node_at(node);
    out.push('(');
    out.push_str(id.as_str());
    out.push_str(" / ");
    out.push_str(concept);
    let indent = "    ".repeat(depth + 1);
    for &e in &out_edges[node] {
        let edge = &graph.edges()[e];
        out.push('\n');
        out.push_str(&indent);
        out.push_str(&edge.relation);
        out.push(' ');
        let target = graph.position(edge.target.as_str()).unwrap();
        if visited[target] {
            out.push_str(edge.target.as_str());
        } else {
            write_node(graph, target, depth + 1, out_edges, attrs, visited, out);
        }
    }
    for &a in &attrs[node] {
        let attr = &graph.attributes()[a];
        out.push('\n');
        out.push_str(&indent);
        out.push_str(&attr.relation);
        out.push(' ');
        out.push_str(&attr.value);
    }
    out.push(')');
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("document {index}: {source}")]
    Document {
        index: usize,
        #[source]
        source: PenmanError,
    },
}

/// Lazily reads blank-line separated documents.
///
/// In strict mode the first malformed document is returned as an error and
/// the iterator ends; in lenient mode every document is yielded.
pub struct CorpusReader<R> {
    reader: R,
    mode: ParseMode,
    offset: usize,
    line: usize,
    index: usize,
    done: bool,
}

pub fn read_corpus<R: BufRead>(reader: R, mode: ParseMode) -> CorpusReader<R> {
    CorpusReader {
        reader,
        mode,
        offset: 0,
        line: 0,
        index: 0,
        done: false,
    }
}

impl<R: BufRead> CorpusReader<R> {
    /// Next blank-line delimited block that contains a graph, with its byte
    /// offset and zero-based starting line.
    fn next_block(&mut self) -> io::Result<Option<(String, usize, usize)>> {
        let mut block = String::new();
        let mut start = self.offset;
        let mut start_line = self.line;
        let mut has_content = false;
        let mut line = String::new();
        loop {
            line.clear();
            let n = self.reader.read_line(&mut line)?;
            if n == 0 {
                return Ok(has_content.then_some((block, start, start_line)));
            }
            self.offset += n;
            self.line += 1;
            if line.trim().is_empty() {
                if has_content {
                    return Ok(Some((block, start, start_line)));
                }
                block.clear();
                start = self.offset;
                start_line = self.line;
                continue;
            }
            if !line.trim_start().starts_with('#') {
                has_content = true;
            }
            block.push_str(&line);
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<PenmanDocument, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let (text, start, start_line) = match self.next_block() {
            Ok(Some(b)) => b,
            Ok(None) => {
                self.done = true;
                return None;
            }
            Err(e) => {
                self.done = true;
                return Some(Err(e.into()));
            }
        };
        let index = self.index;
        self.index += 1;
        match parse_penman(&text, self.mode) {
            Ok(mut doc) => {
                doc.source_span = start..start + text.len();
                Some(Ok(doc))
            }
            Err(e) => {
                self.done = true;
                Some(Err(CorpusError::Document {
                    index,
                    source: e.shift_lines(start_line),
                }))
            }
        }
    }
}
