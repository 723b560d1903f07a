//! Line-oriented text formats for graphs and reactions.
//!
//! ```text
//! graph A
//! v u Na 1
//! v v Cl -1
//! e u v ionic
//! ```
//!
//! A reaction file holds two graph blocks followed by `uA`, `uB`, `b` and `i`
//! lines, where maps are written as `x:y` pairs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{BondLabel, ChemGraph, Element, Name, ALPHA};
use crate::reaction::Reaction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

/// A named graph block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphBlock {
    pub name: String,
    pub graph: ChemGraph,
}

struct Line<'a> {
    number: usize,
    words: Vec<(usize, &'a str)>,
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut words = Vec::new();
        let mut start = None;
        for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    words.push((s + 1, &content[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        (!words.is_empty()).then_some(Line { number: k + 1, words })
    })
}

fn parse_bond(line: usize, col: usize, s: &str) -> Result<BondLabel, ParseError> {
    match s {
        "ionic" => Ok(BondLabel::Ionic),
        "1" | "2" | "3" | "4" => Ok(BondLabel::Covalent(s.parse().expect("digit"))),
        _ => Err(ParseError::new(line, col, format!("bad bond label `{s}`"))),
    }
}

fn expect_arity(l: &Line, n: usize) -> Result<(), ParseError> {
    if l.words.len() != n {
        let (col, kw) = l.words[0];
        return Err(ParseError::new(l.number, col, format!("`{kw}` takes {} arguments", n - 1)));
    }
    Ok(())
}

fn graph_line(g: &mut ChemGraph, l: &Line) -> Result<bool, ParseError> {
    let err = |col: usize, m: String| ParseError::new(l.number, col, m);
    match l.words[0].1 {
        "v" => {
            expect_arity(l, 4)?;
            let (nc, name) = l.words[1];
            if name.contains(':') {
                return Err(err(nc, format!("invalid vertex name `{name}`")));
            }
            let (_, el) = l.words[2];
            let (cc, c) = l.words[3];
            let charge: i32 = c.parse().map_err(|_| err(cc, format!("bad charge `{c}`")))?;
            let element = if el == ALPHA { Element::alpha() } else { Element::new(el) };
            g.add_vertex(name, element, charge).map_err(|e| err(nc, e.to_string()))?;
            Ok(true)
        }
        "e" => {
            expect_arity(l, 4)?;
            let (uc, u) = l.words[1];
            let (_, v) = l.words[2];
            let (bc, b) = l.words[3];
            let bond = parse_bond(l.number, bc, b)?;
            let (u, v) = (Name::new(u), Name::new(v));
            if !g.bond(&u, &v).is_none() {
                return Err(err(uc, format!("bond `{u}`-`{v}` given twice")));
            }
            g.set_bond(&u, &v, bond).map_err(|e| err(uc, e.to_string()))?;
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// Parses every `graph` block in `text`.
pub fn parse_graphs(text: &str) -> Result<Vec<GraphBlock>, ParseError> {
    let mut blocks: Vec<GraphBlock> = Vec::new();
    for l in lines(text) {
        let (col, kw) = l.words[0];
        if kw == "graph" {
            expect_arity(&l, 2)?;
            blocks.push(GraphBlock { name: l.words[1].1.to_string(), graph: ChemGraph::new() });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(ParseError::new(l.number, col, "expected `graph <name>` header"));
        };
        if !graph_line(&mut block.graph, &l)? {
            return Err(ParseError::new(l.number, col, format!("unknown keyword `{kw}`")));
        }
    }
    Ok(blocks)
}

/// Parses a file holding exactly one graph block.
pub fn parse_graph(text: &str) -> Result<GraphBlock, ParseError> {
    let mut blocks = parse_graphs(text)?;
    match blocks.len() {
        1 => Ok(blocks.pop().expect("one block")),
        n => Err(ParseError::new(1, 1, format!("expected one graph block, found {n}"))),
    }
}

pub fn print_graph(name: &str, g: &ChemGraph) -> String {
    let mut out = format!("graph {name}\n");
    for (v, l) in g.labels() {
        writeln!(out, "v {v} {} {}", l.element, l.charge).expect("string write");
    }
    for (u, v, b) in g.bonds() {
        writeln!(out, "e {u} {v} {b}").expect("string write");
    }
    out
}

fn parse_pair(line: usize, col: usize, s: &str) -> Result<(Name, Name), ParseError> {
    match s.split_once(':') {
        Some((x, y)) if !x.is_empty() && !y.is_empty() => Ok((Name::new(x), Name::new(y))),
        _ => Err(ParseError::new(line, col, format!("expected `x:y`, found `{s}`"))),
    }
}

/// Parses a reaction and validates it.
pub fn parse_reaction(text: &str) -> Result<Reaction, ParseError> {
    let mut graphs: Vec<(usize, GraphBlock)> = Vec::new();
    let mut ua = None;
    let mut ub = None;
    let mut b = None;
    let mut i = None;
    for l in lines(text) {
        let (col, kw) = l.words[0];
        match kw {
            "graph" => {
                expect_arity(&l, 2)?;
                if graphs.len() == 2 {
                    return Err(ParseError::new(l.number, col, "a reaction has two graphs"));
                }
                graphs.push((l.number, GraphBlock { name: l.words[1].1.to_string(), graph: ChemGraph::new() }));
            }
            "uA" | "uB" => {
                let set: BTreeSet<Name> = l.words[1..].iter().map(|(_, w)| Name::new(w)).collect();
                let slot = if kw == "uA" { &mut ua } else { &mut ub };
                if slot.replace(set).is_some() {
                    return Err(ParseError::new(l.number, col, format!("`{kw}` given twice")));
                }
            }
            "b" | "i" => {
                let mut map = BTreeMap::new();
                for &(c, w) in &l.words[1..] {
                    let (x, y) = parse_pair(l.number, c, w)?;
                    if map.insert(x.clone(), y).is_some() {
                        return Err(ParseError::new(l.number, c, format!("`{x}` mapped twice")));
                    }
                }
                let slot = if kw == "b" { &mut b } else { &mut i };
                if slot.replace(map).is_some() {
                    return Err(ParseError::new(l.number, col, format!("`{kw}` given twice")));
                }
            }
            _ => {
                let Some((_, block)) = graphs.last_mut() else {
                    return Err(ParseError::new(l.number, col, "expected `graph <name>` header"));
                };
                if !graph_line(&mut block.graph, &l)? {
                    return Err(ParseError::new(l.number, col, format!("unknown keyword `{kw}`")));
                }
            }
        }
    }
    if graphs.len() != 2 {
        return Err(ParseError::new(1, 1, format!("expected two graph blocks, found {}", graphs.len())));
    }
    let target = graphs.pop().expect("two").1.graph;
    let source = graphs.pop().expect("two").1.graph;
    let ua = ua.unwrap_or_default();
    let ub = ub.unwrap_or_default();
    let b = b.unwrap_or_default();
    let i = i.unwrap_or_default();
    Reaction::new(source, target, ua, ub, b, i).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

fn names_line(out: &mut String, kw: &str, names: impl IntoIterator<Item = impl std::fmt::Display>) {
    out.push_str(kw);
    for n in names {
        write!(out, " {n}").expect("string write");
    }
    out.push('\n');
}

pub fn print_reaction(r: &Reaction) -> String {
    let mut out = print_graph("source", r.source());
    out.push_str(&print_graph("target", r.target()));
    names_line(&mut out, "uA", r.ua());
    names_line(&mut out, "uB", r.ub());
    names_line(&mut out, "b", r.b().iter().map(|(x, y)| format!("{x}:{y}")));
    names_line(&mut out, "i", r.i().iter().map(|(x, y)| format!("{x}:{y}")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const NACL: &str = "# sodium chloride\ngraph C\nv u Na 1\nv v Cl -1\ne u v ionic\n";

    #[test]
    fn graph_round_trip() {
        let block = parse_graph(NACL).unwrap();
        assert_eq!(block.name, "C");
        assert_eq!(block.graph.bond(&Name::new("u"), &Name::new("v")), BondLabel::Ionic);
        let printed = print_graph(&block.name, &block.graph);
        assert_eq!(printed, "graph C\nv u Na 1\nv v Cl -1\ne u v ionic\n");
        assert_eq!(parse_graph(&printed).unwrap(), block);
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_graph("graph A\nv u H zero\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        let e = parse_graph("v u H 0\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_graph("graph A\nv u H 0\nv w H 0\ne u w 5\n").unwrap_err();
        assert!(e.message.contains("bond label"));
    }

    #[test]
    fn alpha_symbol() {
        let g = parse_graph("graph A\nv a * -1\n").unwrap().graph;
        assert!(g.is_alpha("a"));
    }

    #[test]
    fn reaction_round_trip() {
        let text = "graph A\nv u Na 1\nv v Cl -1\ngraph B\nv u Na 1\nv v Cl -1\ne u v ionic\nuA u v\nuB u v\nb u:u v:v\ni\n";
        let r = parse_reaction(text).unwrap();
        assert_eq!(r.ua().len(), 2);
        let printed = print_reaction(&r);
        assert_eq!(parse_reaction(&printed).unwrap(), r);
    }
}
