//! Terms over the disconnection rules: untyped sequences, elaboration against
//! a source graph, the bar involution, and the concrete syntax.
//!
//! ```text
//! C[u,v;a,b] ; E[u,a] ; ~E[u,a] ; R[a>z] ; S[v]
//! ```

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{ChemGraph, Name};
use crate::rules::{RuleApp, RuleError, RuleKind};
use crate::text::ParseError;

/// One generator of the term language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Id,
    Touch(Name),
    Ren(Name, Name),
    Rule(RuleApp),
}

/// The block an atom belongs to in the ordering `I; C; E<0; E>=0; ~E>=0; ~E<0; ~C; ~I; R; S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    I,
    C,
    ENeg,
    ENonneg,
    ENonnegBar,
    ENegBar,
    CBar,
    IBar,
    R,
    S,
    Id,
}

impl Atom {
    pub fn bar(&self) -> Atom {
        match self {
            Atom::Ren(u, v) => Atom::Ren(v.clone(), u.clone()),
            Atom::Rule(r) => Atom::Rule(r.invert()),
            a => a.clone(),
        }
    }

    pub fn block(&self) -> Block {
        match self {
            Atom::Id => Block::Id,
            Atom::Touch(_) => Block::S,
            Atom::Ren(..) => Block::R,
            Atom::Rule(r) => match (r.kind(), r.is_disconnect()) {
                (RuleKind::Ion { .. }, true) => Block::I,
                (RuleKind::Cov { .. }, true) => Block::C,
                (RuleKind::ENeg { .. }, true) => Block::ENeg,
                (RuleKind::ENonneg { .. }, true) => Block::ENonneg,
                (RuleKind::ENonneg { .. }, false) => Block::ENonnegBar,
                (RuleKind::ENeg { .. }, false) => Block::ENegBar,
                (RuleKind::Cov { .. }, false) => Block::CBar,
                (RuleKind::Ion { .. }, false) => Block::IBar,
            },
        }
    }

    pub fn rule(&self) -> Option<&RuleApp> {
        match self {
            Atom::Rule(r) => Some(r),
            _ => None,
        }
    }

    /// Every vertex name the atom mentions.
    pub fn names(&self) -> Vec<Name> {
        match self {
            Atom::Id => Vec::new(),
            Atom::Touch(u) => vec![u.clone()],
            Atom::Ren(u, v) => vec![u.clone(), v.clone()],
            Atom::Rule(r) => r.names(),
        }
    }

    pub fn map_names(&self, f: impl Fn(&Name) -> Name) -> Result<Atom, RuleError> {
        Ok(match self {
            Atom::Id => Atom::Id,
            Atom::Touch(u) => Atom::Touch(f(u)),
            Atom::Ren(u, v) => Atom::Ren(f(u), f(v)),
            Atom::Rule(r) => Atom::Rule(r.map_names(f)?),
        })
    }

    /// Checks the typing clause for this atom at `g` and returns the output graph.
    pub fn step(&self, g: &ChemGraph) -> Result<ChemGraph, String> {
        match self {
            Atom::Id => Ok(g.clone()),
            Atom::Touch(u) => {
                if g.contains(u) {
                    Ok(g.clone())
                } else {
                    Err(format!("vertex `{u}` is not present"))
                }
            }
            Atom::Ren(u, v) => {
                if !g.is_alpha(u) {
                    return Err(format!("vertex `{u}` is not an alpha vertex"));
                }
                g.rename(u, v).map_err(|e| e.to_string())
            }
            Atom::Rule(r) => r.apply(g).map_err(|e| match e {
                RuleError::NotInDomain { report, .. } => report.to_string(),
                e => e.to_string(),
            }),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Id => f.write_str("id"),
            Atom::Touch(u) => write!(f, "S[{u}]"),
            Atom::Ren(u, v) => write!(f, "R[{u}>{v}]"),
            Atom::Rule(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("ill-typed at atom {index} (`{atom}`): {reason}")]
    IllTyped { index: usize, atom: String, reason: String },
    #[error("terms are not composable: target and source differ")]
    NotComposable,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// An untyped term: a word over the generators. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(pub Vec<Atom>);

impl Term {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Term(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn then(&self, other: &Term) -> Term {
        Term(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn bar(&self) -> Term {
        Term(self.0.iter().rev().map(Atom::bar).collect())
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.0.iter().flat_map(Atom::names).collect()
    }

    pub fn elaborate(&self, source: &ChemGraph) -> Result<TypedTerm, TermError> {
        TypedTerm::elaborate(self.0.clone(), source.clone())
    }

    /// True iff `source` admits a typing of the term.
    pub fn types_from(&self, source: &ChemGraph) -> Option<ChemGraph> {
        let mut g = source.clone();
        for a in &self.0 {
            g = a.step(&g).ok()?;
        }
        Some(g)
    }

    pub fn parse(text: &str) -> Result<Term, ParseError> {
        Parser::new(text, 1).term()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("id");
        }
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Term::parse(s)
    }
}

/// A term together with all of its intermediate graphs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedTerm {
    atoms: Vec<Atom>,
    graphs: Vec<ChemGraph>,
}

impl TypedTerm {
    pub fn identity(g: ChemGraph) -> Self {
        TypedTerm { atoms: Vec::new(), graphs: vec![g] }
    }

    pub fn elaborate(atoms: Vec<Atom>, source: ChemGraph) -> Result<Self, TermError> {
        let mut graphs = Vec::with_capacity(atoms.len() + 1);
        graphs.push(source);
        for (index, a) in atoms.iter().enumerate() {
            let next = a.step(graphs.last().expect("nonempty")).map_err(|reason| TermError::IllTyped {
                index,
                atom: a.to_string(),
                reason,
            })?;
            graphs.push(next);
        }
        Ok(TypedTerm { atoms, graphs })
    }

    /// Assembles a typed term from parts already known to agree.
    pub(crate) fn from_parts(atoms: Vec<Atom>, graphs: Vec<ChemGraph>) -> Self {
        debug_assert_eq!(atoms.len() + 1, graphs.len());
        TypedTerm { atoms, graphs }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `graphs()[k]` is the input of atom `k`; the last graph is the target.
    pub fn graphs(&self) -> &[ChemGraph] {
        &self.graphs
    }

    pub fn source(&self) -> &ChemGraph {
        &self.graphs[0]
    }

    pub fn target(&self) -> &ChemGraph {
        self.graphs.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn term(&self) -> Term {
        Term(self.atoms.clone())
    }

    pub fn then(&self, other: &TypedTerm) -> Result<TypedTerm, TermError> {
        if self.target() != other.source() {
            return Err(TermError::NotComposable);
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut graphs = self.graphs.clone();
        graphs.extend(other.graphs[1..].iter().cloned());
        Ok(TypedTerm { atoms, graphs })
    }

    /// The reversed term `target -> source`.
    pub fn bar(&self) -> TypedTerm {
        TypedTerm {
            atoms: self.atoms.iter().rev().map(Atom::bar).collect(),
            graphs: self.graphs.iter().rev().cloned().collect(),
        }
    }
}

impl fmt::Display for TypedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.term())
    }
}

/// `t <= s` tested on the given probes: wherever `t` types, `s` types with the same target.
pub fn leq_typability<'a>(t: &Term, s: &Term, probes: impl IntoIterator<Item = &'a ChemGraph>) -> bool {
    probes.into_iter().all(|a| match t.types_from(a) {
        None => true,
        Some(b) => s.types_from(a).as_ref() == Some(&b),
    })
}

fn is_name_char(c: char) -> bool {
    !(c.is_whitespace() || "[]>;,~#:".contains(c))
}

/// Recursive-descent parser over one line of term syntax.
struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Parser { chars: text.char_indices().collect(), pos: 0, line, text }
    }

    fn column(&self) -> usize {
        match self.chars.get(self.pos) {
            Some(&(i, _)) => self.text[..i].chars().count() + 1,
            None => self.text.chars().count() + 1,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|&(_, c)| is_name_char(c)) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        self.word().map(Name::from)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut atoms = Vec::new();
        if self.peek().is_none() {
            return Ok(Term(atoms));
        }
        loop {
            atoms.push(self.atom()?);
            match self.peek() {
                None => return Ok(Term(atoms)),
                Some(';') => self.pos += 1,
                Some(c) => return Err(self.error(format!("unexpected `{c}`"))),
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let connect = self.peek() == Some('~');
        if connect {
            self.pos += 1;
        }
        let start = self.column();
        let head = self.word()?;
        if head == "id" && !connect {
            return Ok(Atom::Id);
        }
        self.expect('[')?;
        let first = self.name()?;
        let kind = match (head.as_str(), connect) {
            ("S", false) => {
                self.expect(']')?;
                return Ok(Atom::Touch(first));
            }
            ("R", false) => {
                self.expect('>')?;
                let second = self.name()?;
                self.expect(']')?;
                return Ok(Atom::Ren(first, second));
            }
            ("E", _) => match self.peek() {
                Some(';') => {
                    self.pos += 1;
                    let a = self.name()?;
                    self.expect(',')?;
                    let b = self.name()?;
                    RuleKind::ENeg { u: first, a, b }
                }
                _ => {
                    self.expect(',')?;
                    RuleKind::ENonneg { u: first, v: self.name()? }
                }
            },
            ("I", _) => {
                self.expect(',')?;
                RuleKind::Ion { u: first, v: self.name()? }
            }
            ("C", _) => {
                self.expect(',')?;
                let v = self.name()?;
                self.expect(';')?;
                let a = self.name()?;
                self.expect(',')?;
                let b = self.name()?;
                RuleKind::Cov { u: first, v, a, b }
            }
            _ => return Err(ParseError::new(self.line, start, format!("unknown generator `{head}`"))),
        };
        self.expect(']')?;
        let rule = if connect { RuleApp::connect(kind) } else { RuleApp::disconnect(kind) };
        rule.map(Atom::Rule).map_err(|e| ParseError::new(self.line, start, e.to_string()))
    }
}

/// A term file: an optional `source <graph>` header, then one term per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermFile {
    pub source: Option<String>,
    pub terms: Vec<Term>,
}

pub fn parse_term_file(text: &str) -> Result<TermFile, ParseError> {
    let mut file = TermFile { source: None, terms: Vec::new() };
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.trim_start().strip_prefix("source ") {
            if file.source.is_some() || !file.terms.is_empty() {
                return Err(ParseError::new(k + 1, 1, "`source` must be the first line"));
            }
            file.source = Some(rest.trim().to_string());
            continue;
        }
        file.terms.push(Parser::new(line, k + 1).term()?);
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BondLabel, ALPHA};
    use crate::rules::Direction;

    fn hh() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", "H", 0).with_bond("u", "v", BondLabel::Covalent(1))
    }

    fn t(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(t("S[u] ; R[u>v]").0, vec![Atom::Touch("u".into()), Atom::Ren("u".into(), "v".into())]);
        let ion = &t("~I[u,v]").0[0];
        assert_eq!(ion.rule().unwrap().direction(), Direction::Connect);
        assert_eq!(ion.block(), Block::IBar);
        for s in ["C[u,v;a,b] ; E[u;a,b] ; ~E[u,a] ; S[x] ; R[a>b] ; id", "id", "~C[z,u;a,b]"] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("  C[ u , v ; a , b ];S[w]").to_string(), "C[u,v;a,b] ; S[w]");
        assert!(t("").is_empty());
    }

    #[test]
    fn parse_errors() {
        let e = Term::parse("C[u,u;a,b]").unwrap_err();
        assert!(e.message.contains("same vertex"));
        let e = Term::parse("S[u] ; Q[u]").unwrap_err();
        assert_eq!(e.column, 8);
        assert!(Term::parse("S[u] S[v]").is_err());
        assert!(Term::parse("~S[u]").is_err());
        assert!(Term::parse("E[u;a]").is_err());
    }

    #[test]
    fn bar_involution() {
        let s = t("C[u,v;a,b] ; E[u,a]");
        assert_eq!(s.bar().to_string(), "~E[u,a] ; ~C[u,v;a,b]");
        assert_eq!(s.bar().bar(), s);
        assert_eq!(t("R[u>v]").bar(), t("R[v>u]"));
    }

    #[test]
    fn elaboration() {
        let typed = t("C[u,v;a,b]").elaborate(&hh()).unwrap();
        assert_eq!(typed.graphs().len(), 2);
        assert!(typed.target().is_alpha("a"));
        let e = t("I[u,v]").elaborate(&hh()).unwrap_err();
        assert_eq!(
            e,
            TermError::IllTyped { index: 0, atom: "I[u,v]".into(), reason: "bond is not ionic".into() }
        );
        let id = Term::default().elaborate(&hh()).unwrap();
        assert_eq!(id.graphs(), &[hh()]);
        let back = typed.term().bar().elaborate(typed.target()).unwrap();
        assert_eq!(back.target(), &hh());
        assert_eq!(typed.bar(), back);
    }

    #[test]
    fn renaming_needs_alpha() {
        let e = t("R[u>w]").elaborate(&hh()).unwrap_err();
        assert!(matches!(e, TermError::IllTyped { index: 0, .. }));
        let g = t("C[u,v;a,b] ; R[a>z] ; R[z>a]").elaborate(&hh()).unwrap();
        assert!(g.graphs()[2].contains("z"));
        assert!(t("C[u,v;a,b] ; R[a>b]").elaborate(&hh()).is_err());
    }

    #[test]
    fn typability_order() {
        let probes = vec![
            ChemGraph::new().with_vertex("u", ALPHA, -1),
            ChemGraph::new().with_vertex("u", "H", -1),
            hh(),
        ];
        assert!(leq_typability(&t("R[u>u]"), &t("S[u]"), &probes));
        assert!(!leq_typability(&t("S[u]"), &t("R[u>u]"), &probes));
        assert!(leq_typability(&t("S[u]"), &t("S[u]"), &probes));
    }

    #[test]
    fn term_file() {
        let f = parse_term_file("# example\nsource hh\nC[u,v;a,b]\n\nS[u] ; S[v]\n").unwrap();
        assert_eq!(f.source.as_deref(), Some("hh"));
        assert_eq!(f.terms.len(), 2);
        let e = parse_term_file("S[u]\nS[u] ;\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
