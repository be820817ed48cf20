//! Text formats for labeled graphs.
//!
//! Graphs are written as a subset of Graphviz DOT: one statement per vertex
//! (in vertex order, the basepoint carrying `basepoint=true`) followed by one
//! statement per involution pair,
//!
//! ```text
//! digraph "gamma-1" {
//!   "1";
//!   "3" [basepoint=true];
//!   "1" -> "2" [label="a", inverse="a^-1"];
//!   "2" -> "2" [label="b", inverse="b"];
//! }
//! ```
//!
//! A loop whose label equals its inverse is one self-paired edge; every other
//! statement stands for two directed edges. A missing `inverse` means the
//! label is an involution. Files may hold several `digraph` blocks.

use std::collections::BTreeMap;
use std::io::Write;

use super::{GraphBuilder, LabeledGraph};
use crate::error::{Error, Result};

/// One parsed `digraph` block.
#[derive(Debug, Clone, Default)]
pub struct DotBlock {
    pub name: String,
    pub line: usize,
    pub attributes: BTreeMap<String, String>,
    pub vertices: Vec<(String, BTreeMap<String, String>)>,
    pub edges: Vec<DotEdge>,
}

#[derive(Debug, Clone)]
pub struct DotEdge {
    pub source: String,
    pub target: String,
    pub attributes: BTreeMap<String, String>,
    pub line: usize,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes `graph` as a DOT block named `name`.
pub fn write_dot<W: Write>(graph: &LabeledGraph, name: &str, out: &mut W) -> Result<()> {
    writeln!(out, "digraph {} {{", quote(name))?;
    for (v, vname) in graph.names().iter().enumerate() {
        if v == graph.basepoint() {
            writeln!(out, "  {} [basepoint=true];", quote(vname))?;
        } else {
            writeln!(out, "  {};", quote(vname))?;
        }
    }
    let edges = graph.edges();
    for (i, e) in edges.iter().enumerate() {
        if e.pair < i {
            continue;
        }
        let inverse = &edges[e.pair].label;
        writeln!(
            out,
            "  {} -> {} [label={}, inverse={}];",
            quote(graph.name(e.source)),
            quote(graph.name(e.target)),
            quote(&e.label),
            quote(inverse)
        )?;
    }
    writeln!(out, "}}")?;
    Ok(())
}

pub fn to_dot_string(graph: &LabeledGraph, name: &str) -> String {
    let mut buf = Vec::new();
    write_dot(graph, name, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("DOT output is UTF-8")
}

/// Edge list with one row per directed edge: `source,target,label`.
pub fn write_edge_csv<W: Write>(graph: &LabeledGraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "label"])?;
    for e in graph.edges() {
        w.write_record([graph.name(e.source), graph.name(e.target), e.label.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Id(String),
    Arrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Equals,
    Comma,
    Semi,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let mut tokens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: &str| Error::GraphFormat {
            line: line_no,
            message: message.to_string(),
        };
        if line.trim_start().starts_with('#') {
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            match c {
                _ if c.is_whitespace() => i += 1,
                '/' if chars.get(i + 1) == Some(&'/') => break,
                '{' => {
                    tokens.push((Token::LBrace, line_no));
                    i += 1;
                }
                '}' => {
                    tokens.push((Token::RBrace, line_no));
                    i += 1;
                }
                '[' => {
                    tokens.push((Token::LBracket, line_no));
                    i += 1;
                }
                ']' => {
                    tokens.push((Token::RBracket, line_no));
                    i += 1;
                }
                '=' => {
                    tokens.push((Token::Equals, line_no));
                    i += 1;
                }
                ',' => {
                    tokens.push((Token::Comma, line_no));
                    i += 1;
                }
                ';' => {
                    tokens.push((Token::Semi, line_no));
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    tokens.push((Token::Arrow, line_no));
                    i += 2;
                }
                '"' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(err("unterminated string")),
                            Some('"') => {
                                i += 1;
                                break;
                            }
                            Some('\\') => {
                                let next = chars.get(i + 1).ok_or_else(|| err("dangling escape"))?;
                                s.push(*next);
                                i += 2;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    tokens.push((Token::Id(s), line_no));
                }
                _ => {
                    let start = i;
                    while i < chars.len() {
                        let ch = chars[i];
                        let id_char = ch.is_alphanumeric()
                            || matches!(ch, '_' | '.' | '^' | '~' | '+')
                            || (ch == '-' && chars.get(i + 1) != Some(&'>'));
                        if !id_char {
                            break;
                        }
                        i += 1;
                    }
                    if i == start {
                        return Err(err(&format!("unexpected character `{c}`")));
                    }
                    tokens.push((Token::Id(chars[start..i].iter().collect()), line_no));
                }
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map_or(0, |t| t.1)
    }

    fn err(&self, message: &str) -> Error {
        Error::GraphFormat {
            line: self.line(),
            message: message.to_string(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn id(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Token::Id(_)) => match self.next() {
                Some(Token::Id(s)) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn attributes(&mut self) -> Result<BTreeMap<String, String>> {
        let mut attrs = BTreeMap::new();
        if self.peek() != Some(&Token::LBracket) {
            return Ok(attrs);
        }
        self.pos += 1;
        loop {
            match self.peek() {
                Some(Token::RBracket) => {
                    self.pos += 1;
                    return Ok(attrs);
                }
                Some(Token::Comma) | Some(Token::Semi) => self.pos += 1,
                _ => {
                    let key = self.id("attribute name")?;
                    self.expect(Token::Equals, "`=`")?;
                    let value = self.id("attribute value")?;
                    attrs.insert(key, value);
                }
            }
        }
    }

    fn block(&mut self) -> Result<DotBlock> {
        let line = self.line();
        let keyword = self.id("`digraph`")?;
        if keyword != "digraph" {
            return Err(self.err("expected `digraph`"));
        }
        let name = match self.peek() {
            Some(Token::Id(_)) => self.id("graph name")?,
            _ => String::new(),
        };
        self.expect(Token::LBrace, "`{`")?;
        let mut block = DotBlock {
            name,
            line,
            ..Default::default()
        };
        loop {
            match self.peek() {
                None => return Err(self.err("missing `}`")),
                Some(Token::RBrace) => {
                    self.pos += 1;
                    return Ok(block);
                }
                Some(Token::Semi) => self.pos += 1,
                _ => {
                    let stmt_line = self.line();
                    let first = self.id("vertex name")?;
                    match self.peek() {
                        Some(Token::Arrow) => {
                            self.pos += 1;
                            let target = self.id("target vertex")?;
                            let attributes = self.attributes()?;
                            block.edges.push(DotEdge {
                                source: first,
                                target,
                                attributes,
                                line: stmt_line,
                            });
                        }
                        Some(Token::Equals) => {
                            self.pos += 1;
                            let value = self.id("attribute value")?;
                            block.attributes.insert(first, value);
                        }
                        _ => {
                            let attributes = self.attributes()?;
                            block.vertices.push((first, attributes));
                        }
                    }
                }
            }
        }
    }
}

/// Parses every `digraph` block in `text`.
pub fn parse_blocks(text: &str) -> Result<Vec<DotBlock>> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let mut blocks = Vec::new();
    while parser.peek().is_some() {
        blocks.push(parser.block()?);
    }
    Ok(blocks)
}

fn truthy(value: Option<&String>) -> bool {
    value.is_some_and(|v| v == "true" || v == "1")
}

/// Builds a graph from one block. The basepoint is the vertex marked
/// `basepoint=true` or named by a block attribute `basepoint = "…"`,
/// defaulting to the first vertex.
pub fn graph_from_block(block: &DotBlock) -> Result<LabeledGraph> {
    let mut b = GraphBuilder::new();
    let mut basepoint = block.attributes.get("basepoint").cloned();
    for (name, attrs) in &block.vertices {
        b.vertex(name);
        if truthy(attrs.get("basepoint")) {
            if basepoint.as_ref().is_some_and(|p| p != name) {
                return Err(Error::GraphFormat {
                    line: block.line,
                    message: "more than one basepoint".into(),
                });
            }
            basepoint = Some(name.clone());
        }
    }
    for e in &block.edges {
        let label = e.attributes.get("label").ok_or_else(|| Error::GraphFormat {
            line: e.line,
            message: "edge without a label".into(),
        })?;
        let inverse = e.attributes.get("inverse").unwrap_or(label);
        b.edge_pair(&e.source, &e.target, label, inverse);
    }
    if let Some(p) = basepoint {
        b.set_basepoint(&p);
    }
    b.build().map_err(|err| Error::GraphFormat {
        line: block.line,
        message: err.to_string(),
    })
}

/// Parses a text holding exactly one graph.
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let blocks = parse_blocks(text)?;
    match blocks.as_slice() {
        [one] => graph_from_block(one),
        _ => Err(Error::GraphFormat {
            line: 1,
            message: format!("expected one digraph block, found {}", blocks.len()),
        }),
    }
}
