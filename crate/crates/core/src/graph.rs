//! Chemically labelled graphs and the chemical-graph validity conditions.
//!
//! A [`ChemGraph`] is a finite set of named vertices, each carrying an element
//! symbol and an integer charge, with bond labels on unordered vertex pairs.
//! Only non-zero bond labels are stored; an absent pair means "no edge".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// The reserved element symbol of alpha vertices (unpaired electrons).
pub const ALPHA: &str = "*";

/// A vertex name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names starting with `_` are reserved for generated names.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl std::ops::Deref for Name {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// An element symbol, or [`ALPHA`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(Arc<str>);

impl Element {
    pub fn new(s: &str) -> Self {
        Element(Arc::from(s))
    }

    pub fn alpha() -> Self {
        Element::new(ALPHA)
    }

    pub fn is_alpha(&self) -> bool {
        &*self.0 == ALPHA
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Valences of the atom labels in use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTable {
    valence: BTreeMap<String, u32>,
}

impl AtomTable {
    /// Builds a table; `*` is added with valence 1 when missing.
    pub fn new(entries: impl IntoIterator<Item = (String, u32)>) -> Result<Self, GraphError> {
        let mut valence: BTreeMap<String, u32> = entries.into_iter().collect();
        match valence.get(ALPHA) {
            None => {
                valence.insert(ALPHA.to_string(), 1);
            }
            Some(1) => {}
            Some(&k) => return Err(GraphError::AtomTable(format!("valence of `*` must be 1, got {k}"))),
        }
        if valence.len() < 3 {
            return Err(GraphError::AtomTable(
                "at least two element labels besides `*` are required".into(),
            ));
        }
        Ok(AtomTable { valence })
    }

    /// Parses `<symbol> <valence>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(sym), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(GraphError::AtomTable(format!("line {}: expected `<symbol> <valence>`", lineno + 1)));
            };
            let val: u32 = val
                .parse()
                .map_err(|_| GraphError::AtomTable(format!("line {}: bad valence `{val}`", lineno + 1)))?;
            entries.push((sym.to_string(), val));
        }
        AtomTable::new(entries)
    }

    pub fn valence(&self, element: &Element) -> Option<u32> {
        self.valence.get(element.as_str()).copied()
    }

    pub fn contains(&self, element: &Element) -> bool {
        self.valence.contains_key(element.as_str())
    }
}

impl Default for AtomTable {
    fn default() -> Self {
        let main_group = [
            ("H", 1), ("Li", 1), ("Na", 1), ("K", 1),
            ("Be", 2), ("Mg", 2), ("Ca", 2),
            ("B", 3), ("Al", 3),
            ("C", 4), ("Si", 4),
            ("N", 3), ("P", 3),
            ("O", 2), ("S", 2),
            ("F", 1), ("Cl", 1), ("Br", 1), ("I", 1),
        ];
        AtomTable::new(main_group.iter().map(|&(s, v)| (s.to_string(), v)))
            .expect("default table is well-formed")
    }
}

/// Edge labels: covalent bonds of multiplicity 0 to 4, or an ionic bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondLabel {
    Covalent(u8),
    Ionic,
}

impl BondLabel {
    pub const NONE: BondLabel = BondLabel::Covalent(0);

    pub fn cov(self) -> u32 {
        match self {
            BondLabel::Covalent(k) => k as u32,
            BondLabel::Ionic => 0,
        }
    }

    pub fn ion(self) -> u32 {
        match self {
            BondLabel::Ionic => 1,
            BondLabel::Covalent(_) => 0,
        }
    }

    pub fn is_none(self) -> bool {
        self == BondLabel::NONE
    }
}

impl fmt::Display for BondLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BondLabel::Covalent(k) => write!(f, "{k}"),
            BondLabel::Ionic => f.write_str("ionic"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexLabel {
    pub element: Element,
    pub charge: i32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(Name),
    #[error("vertex `{0}` already exists")]
    DuplicateVertex(Name),
    #[error("cannot rename `{from}` to `{to}`: `{to}` names another vertex")]
    NameCollision { from: Name, to: Name },
    #[error("vertex `{vertex}` has element `{element}` which is not in the atom table")]
    UnknownElement { vertex: Name, element: Element },
    #[error("bond from `{0}` to itself")]
    SelfLoop(Name),
    #[error("bond multiplicity {0} out of range 0..=4")]
    BadMultiplicity(u8),
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("atom table: {0}")]
    AtomTable(String),
}

/// One failed chemical-graph condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Condition (1): |charge| + incident covalent bonds = valence.
    Valence { vertex: Name, expected: u32, actual: u32 },
    /// Condition (2a): alpha charge in {-1, 0}.
    AlphaCharge { vertex: Name, charge: i32 },
    /// Condition (2b): alpha bonds in {0, 1}.
    AlphaBond { vertex: Name, other: Name, bond: BondLabel },
    /// Condition (2c): at most one neighbour, and it is chemical.
    AlphaNeighbours { vertex: Name, count: usize },
    AlphaNeighbourNotChemical { vertex: Name, other: Name },
    /// Condition (3): at most one ionic neighbour, with the opposite nonzero charge.
    IonicNeighbours { vertex: Name, count: usize },
    IonicCharges { vertex: Name, other: Name },
}

impl Violation {
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Valence { .. } => "1",
            Violation::AlphaCharge { .. } => "2a",
            Violation::AlphaBond { .. } => "2b",
            Violation::AlphaNeighbours { .. } | Violation::AlphaNeighbourNotChemical { .. } => "2c",
            Violation::IonicNeighbours { .. } | Violation::IonicCharges { .. } => "3",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}): ", self.condition())?;
        match self {
            Violation::Valence { vertex, expected, actual } => {
                write!(f, "vertex `{vertex}` has |charge| + covalent bonds = {actual}, valence is {expected}")
            }
            Violation::AlphaCharge { vertex, charge } => {
                write!(f, "alpha vertex `{vertex}` has charge {charge}")
            }
            Violation::AlphaBond { vertex, other, bond } => {
                write!(f, "alpha vertex `{vertex}` has bond {bond} to `{other}`")
            }
            Violation::AlphaNeighbours { vertex, count } => {
                write!(f, "alpha vertex `{vertex}` has {count} neighbours")
            }
            Violation::AlphaNeighbourNotChemical { vertex, other } => {
                write!(f, "alpha vertex `{vertex}` is bonded to alpha vertex `{other}`")
            }
            Violation::IonicNeighbours { vertex, count } => {
                write!(f, "vertex `{vertex}` has {count} ionic neighbours")
            }
            Violation::IonicCharges { vertex, other } => {
                write!(f, "ionic partners `{vertex}` and `{other}` are not oppositely charged")
            }
        }
    }
}

/// Result of [`ChemGraph::validate`]: empty means the graph is a chemical graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Vertex subsets of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexClasses {
    pub alpha: BTreeSet<Name>,
    pub chem: BTreeSet<Name>,
    pub neutral: BTreeSet<Name>,
    pub charged: BTreeSet<Name>,
    pub negative: BTreeSet<Name>,
    pub positive: BTreeSet<Name>,
}

fn pair(u: &Name, v: &Name) -> (Name, Name) {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

/// A chemically labelled graph over named vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ChemGraph {
    vertices: BTreeMap<Name, VertexLabel>,
    bonds: BTreeMap<(Name, Name), BondLabel>,
}

impl ChemGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: impl Into<Name>, element: Element, charge: i32) -> Result<(), GraphError> {
        let name = name.into();
        if name.as_str().is_empty() {
            return Err(GraphError::InvalidName(String::new()));
        }
        if self.vertices.contains_key(&name) {
            return Err(GraphError::DuplicateVertex(name));
        }
        self.vertices.insert(name, VertexLabel { element, charge });
        Ok(())
    }

    /// Builder-style [`ChemGraph::add_vertex`] for tests and fixtures.
    pub fn with_vertex(mut self, name: &str, element: &str, charge: i32) -> Self {
        let element = if element == ALPHA { Element::alpha() } else { Element::new(element) };
        self.add_vertex(name, element, charge).expect("fresh vertex");
        self
    }

    pub fn with_bond(mut self, u: &str, v: &str, bond: BondLabel) -> Self {
        self.set_bond(&Name::new(u), &Name::new(v), bond).expect("valid bond");
        self
    }

    pub fn set_bond(&mut self, u: &Name, v: &Name, bond: BondLabel) -> Result<(), GraphError> {
        for x in [u, v] {
            if !self.vertices.contains_key(x) {
                return Err(GraphError::UnknownVertex(x.clone()));
            }
        }
        if let BondLabel::Covalent(k) = bond {
            if k > 4 {
                return Err(GraphError::BadMultiplicity(k));
            }
        }
        if u == v {
            return if bond.is_none() { Ok(()) } else { Err(GraphError::SelfLoop(u.clone())) };
        }
        let key = pair(u, v);
        if bond.is_none() {
            self.bonds.remove(&key);
        } else {
            self.bonds.insert(key, bond);
        }
        Ok(())
    }

    /// Removes a vertex together with its bonds.
    pub fn remove_vertex(&mut self, v: &Name) -> Result<VertexLabel, GraphError> {
        let label = self.vertices.remove(v).ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
        self.bonds.retain(|(a, b), _| a != v && b != v);
        Ok(label)
    }

    pub fn set_charge(&mut self, v: &Name, charge: i32) -> Result<(), GraphError> {
        let label = self.vertices.get_mut(v).ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
        label.charge = charge;
        Ok(())
    }

    pub fn contains(&self, v: &str) -> bool {
        self.vertices.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Name> {
        self.vertices.keys()
    }

    pub fn vertex_set(&self) -> BTreeSet<Name> {
        self.vertices.keys().cloned().collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = (&Name, &VertexLabel)> {
        self.vertices.iter()
    }

    pub fn label(&self, v: &str) -> Option<&VertexLabel> {
        self.vertices.get(v)
    }

    pub fn element(&self, v: &str) -> Option<&Element> {
        self.vertices.get(v).map(|l| &l.element)
    }

    pub fn charge(&self, v: &str) -> Option<i32> {
        self.vertices.get(v).map(|l| l.charge)
    }

    pub fn is_alpha(&self, v: &str) -> bool {
        self.vertices.get(v).is_some_and(|l| l.element.is_alpha())
    }

    pub fn is_chemical(&self, v: &str) -> bool {
        self.vertices.get(v).is_some_and(|l| !l.element.is_alpha())
    }

    /// Bond label of an unordered pair; `Covalent(0)` when absent or reflexive.
    pub fn bond(&self, u: &Name, v: &Name) -> BondLabel {
        if u == v {
            return BondLabel::NONE;
        }
        let key = if u <= v { (u, v) } else { (v, u) };
        // BTreeMap lookup on a borrowed tuple needs an owned key.
        self.bonds.get(&(key.0.clone(), key.1.clone())).copied().unwrap_or(BondLabel::NONE)
    }

    /// All non-zero bonds, each pair once with the smaller name first.
    pub fn bonds(&self) -> impl Iterator<Item = (&Name, &Name, BondLabel)> {
        self.bonds.iter().map(|((u, v), b)| (u, v, *b))
    }

    fn check_vertex(&self, u: &Name) -> Result<(), GraphError> {
        if self.vertices.contains_key(u) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(u.clone()))
        }
    }

    fn incident(&self, u: &Name) -> impl Iterator<Item = (&Name, BondLabel)> + '_ {
        let u = u.clone();
        self.bonds.iter().filter_map(move |((a, b), l)| {
            if *a == u {
                Some((b, *l))
            } else if *b == u {
                Some((a, *l))
            } else {
                None
            }
        })
    }

    pub fn neighbours(&self, u: &Name) -> Result<BTreeSet<Name>, GraphError> {
        self.check_vertex(u)?;
        Ok(self.incident(u).map(|(v, _)| v.clone()).collect())
    }

    pub fn cov_neighbours(&self, u: &Name) -> Result<BTreeSet<Name>, GraphError> {
        self.check_vertex(u)?;
        Ok(self.incident(u).filter(|(_, l)| l.cov() != 0).map(|(v, _)| v.clone()).collect())
    }

    pub fn ion_neighbours(&self, u: &Name) -> Result<BTreeSet<Name>, GraphError> {
        self.check_vertex(u)?;
        Ok(self.incident(u).filter(|(_, l)| l.ion() != 0).map(|(v, _)| v.clone()).collect())
    }

    /// Sum of covalent multiplicities at `u`.
    pub fn covalent_degree(&self, u: &Name) -> u32 {
        self.incident(u).map(|(_, l)| l.cov()).sum()
    }

    pub fn net_charge<'a>(&self, subset: impl IntoIterator<Item = &'a Name>) -> Result<i64, GraphError> {
        let mut total = 0i64;
        for v in subset {
            let label = self.vertices.get(v).ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
            total += label.charge as i64;
        }
        Ok(total)
    }

    pub fn classify(&self) -> VertexClasses {
        let mut c = VertexClasses::default();
        for (v, l) in &self.vertices {
            if l.element.is_alpha() {
                c.alpha.insert(v.clone());
            } else {
                c.chem.insert(v.clone());
            }
            match l.charge.signum() {
                0 => {
                    c.neutral.insert(v.clone());
                }
                s => {
                    c.charged.insert(v.clone());
                    if s < 0 {
                        c.negative.insert(v.clone());
                    } else {
                        c.positive.insert(v.clone());
                    }
                }
            }
        }
        c
    }

    /// Checks the chemical-graph conditions against `table`.
    ///
    /// Labels missing from the table are an error rather than a violation.
    pub fn validate(&self, table: &AtomTable) -> Result<ValidityReport, GraphError> {
        let mut violations = Vec::new();
        for (v, l) in &self.vertices {
            let Some(valence) = table.valence(&l.element) else {
                return Err(GraphError::UnknownElement { vertex: v.clone(), element: l.element.clone() });
            };
            let actual = l.charge.unsigned_abs() + self.covalent_degree(v);
            if actual != valence {
                violations.push(Violation::Valence { vertex: v.clone(), expected: valence, actual });
            }
            if l.element.is_alpha() {
                if !(l.charge == 0 || l.charge == -1) {
                    violations.push(Violation::AlphaCharge { vertex: v.clone(), charge: l.charge });
                }
                let mut count = 0;
                for (w, b) in self.incident(v) {
                    count += 1;
                    if b != BondLabel::Covalent(1) {
                        violations.push(Violation::AlphaBond { vertex: v.clone(), other: w.clone(), bond: b });
                    }
                    if self.is_alpha(w) {
                        violations.push(Violation::AlphaNeighbourNotChemical { vertex: v.clone(), other: w.clone() });
                    }
                }
                if count > 1 {
                    violations.push(Violation::AlphaNeighbours { vertex: v.clone(), count });
                }
            } else {
                let ionic: Vec<&Name> = self.incident(v).filter(|(_, b)| b.ion() != 0).map(|(w, _)| w).collect();
                if ionic.len() > 1 {
                    violations.push(Violation::IonicNeighbours { vertex: v.clone(), count: ionic.len() });
                }
                for w in ionic {
                    if l.charge == 0 || self.charge(w) != Some(-l.charge) {
                        violations.push(Violation::IonicCharges { vertex: v.clone(), other: w.clone() });
                    }
                }
            }
        }
        Ok(ValidityReport { violations })
    }

    pub fn is_valid(&self, table: &AtomTable) -> bool {
        self.validate(table).is_ok_and(|r| r.is_ok())
    }

    /// The graph with vertex `u` renamed to `v`.
    pub fn rename(&self, u: &Name, v: &Name) -> Result<ChemGraph, GraphError> {
        self.check_vertex(u)?;
        if u == v {
            return Ok(self.clone());
        }
        if self.vertices.contains_key(v) {
            return Err(GraphError::NameCollision { from: u.clone(), to: v.clone() });
        }
        let map = |x: &Name| if x == u { v.clone() } else { x.clone() };
        Ok(self.map_names(map))
    }

    /// Applies a name substitution that must be injective on the vertex set.
    pub fn map_names(&self, f: impl Fn(&Name) -> Name) -> ChemGraph {
        let vertices = self.vertices.iter().map(|(k, l)| (f(k), l.clone())).collect();
        let bonds = self.bonds.iter().map(|((a, b), l)| (pair(&f(a), &f(b)), *l)).collect();
        ChemGraph { vertices, bonds }
    }

    /// The subgraph induced by `subset` (names outside the graph are ignored).
    pub fn induced(&self, subset: &BTreeSet<Name>) -> ChemGraph {
        let vertices = self
            .vertices
            .iter()
            .filter(|(k, _)| subset.contains(*k))
            .map(|(k, l)| (k.clone(), l.clone()))
            .collect();
        let bonds = self
            .bonds
            .iter()
            .filter(|((a, b), _)| subset.contains(a) && subset.contains(b))
            .map(|(k, l)| (k.clone(), *l))
            .collect();
        ChemGraph { vertices, bonds }
    }
}

/// True iff `f` is a label- and bond-preserving bijection from `g` onto `h`.
pub fn check_iso(g: &ChemGraph, h: &ChemGraph, f: &BTreeMap<Name, Name>) -> bool {
    if g.len() != h.len() || f.len() != g.len() {
        return false;
    }
    let mut image = BTreeSet::new();
    for (v, l) in g.labels() {
        let Some(w) = f.get(v) else { return false };
        if h.label(w) != Some(l) || !image.insert(w.clone()) {
            return false;
        }
    }
    if g.bonds.len() != h.bonds.len() {
        return false;
    }
    g.bonds().all(|(a, b, l)| h.bond(&f[a], &f[b]) == l)
}

/// Deterministic generator of reserved names `_g0`, `_g1`, ... skipping taken ones.
#[derive(Clone, Debug)]
pub struct FreshNames {
    prefix: String,
    next: usize,
    taken: BTreeSet<Name>,
}

impl FreshNames {
    pub fn new<'a>(taken: impl IntoIterator<Item = &'a Name>) -> Self {
        Self::with_prefix("_g", taken)
    }

    pub fn with_prefix<'a>(prefix: &str, taken: impl IntoIterator<Item = &'a Name>) -> Self {
        FreshNames { prefix: prefix.to_string(), next: 0, taken: taken.into_iter().cloned().collect() }
    }

    pub fn avoid(&mut self, name: &Name) {
        self.taken.insert(name.clone());
    }

    pub fn avoid_all<'a>(&mut self, names: impl IntoIterator<Item = &'a Name>) {
        self.taken.extend(names.into_iter().cloned());
    }

    pub fn fresh(&mut self) -> Name {
        loop {
            let candidate = Name::from(format!("{}{}", self.prefix, self.next));
            self.next += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hh() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", "H", 0).with_bond("u", "v", BondLabel::Covalent(1))
    }

    /// Carbonate anion: C double-bonded to u, single-bonded to w-, z-.
    pub(crate) fn carbonate() -> ChemGraph {
        ChemGraph::new()
            .with_vertex("u", "O", 0)
            .with_vertex("v", "C", 0)
            .with_vertex("w", "O", -1)
            .with_vertex("z", "O", -1)
            .with_bond("v", "u", BondLabel::Covalent(2))
            .with_bond("v", "w", BondLabel::Covalent(1))
            .with_bond("v", "z", BondLabel::Covalent(1))
    }

    fn nacl() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "Na", 1).with_vertex("v", "Cl", -1).with_bond("u", "v", BondLabel::Ionic)
    }

    fn synthon_a() -> ChemGraph {
        ChemGraph::new()
            .with_vertex("r", "O", 0)
            .with_vertex("u", "O", 0)
            .with_vertex("a", ALPHA, 0)
            .with_vertex("b", ALPHA, 0)
            .with_bond("r", "u", BondLabel::Covalent(1))
            .with_bond("r", "a", BondLabel::Covalent(1))
            .with_bond("u", "b", BondLabel::Covalent(1))
    }

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|s| Name::new(s)).collect()
    }

    #[test]
    fn empty_and_hydrogen_are_valid() {
        let t = AtomTable::default();
        assert!(ChemGraph::new().validate(&t).unwrap().is_ok());
        assert!(hh().validate(&t).unwrap().is_ok());
    }

    #[test]
    fn carbonate_valid_and_mutation_caught() {
        let t = AtomTable::default();
        let g = carbonate();
        assert!(g.validate(&t).unwrap().is_ok());
        assert_eq!(g.net_charge(g.vertices()).unwrap(), -2);
        let mut bad = g.clone();
        bad.set_charge(&Name::new("w"), 0).unwrap();
        let report = bad.validate(&t).unwrap();
        assert_eq!(
            report.violations,
            vec![Violation::Valence { vertex: Name::new("w"), expected: 2, actual: 1 }]
        );
    }

    #[test]
    fn lone_alpha() {
        let t = AtomTable::default();
        let neutral = ChemGraph::new().with_vertex("a", ALPHA, 0);
        let report = neutral.validate(&t).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].condition(), "1");
        let anion = ChemGraph::new().with_vertex("a", ALPHA, -1);
        assert!(anion.validate(&t).unwrap().is_ok());
    }

    #[test]
    fn unknown_element_is_an_error() {
        let g = ChemGraph::new().with_vertex("x", "Xx", 0);
        assert!(matches!(g.validate(&AtomTable::default()), Err(GraphError::UnknownElement { .. })));
    }

    #[test]
    fn alpha_conditions() {
        let t = AtomTable::default();
        let two_alpha = ChemGraph::new()
            .with_vertex("a", ALPHA, 0)
            .with_vertex("b", ALPHA, 0)
            .with_bond("a", "b", BondLabel::Covalent(1));
        let report = two_alpha.validate(&t).unwrap();
        assert!(report.violations.iter().any(|v| v.condition() == "2c"));
        let double = ChemGraph::new()
            .with_vertex("o", "O", 0)
            .with_vertex("a", ALPHA, 1)
            .with_bond("o", "a", BondLabel::Covalent(2));
        let report = double.validate(&t).unwrap();
        assert!(report.violations.iter().any(|v| v.condition() == "2a"));
        assert!(report.violations.iter().any(|v| v.condition() == "2b"));
    }

    #[test]
    fn ionic_conditions() {
        let t = AtomTable::default();
        assert!(nacl().validate(&t).unwrap().is_ok());
        let bad = ChemGraph::new()
            .with_vertex("u", "Na", 1)
            .with_vertex("v", "Na", 1)
            .with_bond("u", "v", BondLabel::Ionic);
        assert!(bad.validate(&t).unwrap().violations.iter().any(|v| v.condition() == "3"));
    }

    #[test]
    fn classification() {
        let a = synthon_a();
        let c = a.classify();
        assert_eq!(c.alpha, names(&["a", "b"]));
        assert_eq!(c.chem, names(&["r", "u"]));
        assert!(c.charged.is_empty());
        let c = nacl().classify();
        assert_eq!(c.negative, names(&["v"]));
        assert_eq!(c.positive, names(&["u"]));
        assert_eq!(ChemGraph::new().classify(), VertexClasses::default());
        let c = carbonate().classify();
        assert_eq!(c.charged, names(&["w", "z"]));
        assert_eq!(c.neutral, names(&["u", "v"]));
    }

    #[test]
    fn net_charges() {
        let g = nacl();
        assert_eq!(g.net_charge(g.vertices()).unwrap(), 0);
        assert_eq!(g.net_charge(&BTreeSet::new()).unwrap(), 0);
        assert!(matches!(g.net_charge(&names(&["q"])), Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn neighbour_sets() {
        let g = nacl();
        let u = Name::new("u");
        assert_eq!(g.ion_neighbours(&u).unwrap(), names(&["v"]));
        assert!(g.cov_neighbours(&u).unwrap().is_empty());
        assert_eq!(hh().cov_neighbours(&u).unwrap(), names(&["v"]));
        let iso = ChemGraph::new().with_vertex("x", "Na", 1);
        let x = Name::new("x");
        assert!(iso.neighbours(&x).unwrap().is_empty());
        assert!(iso.ion_neighbours(&x).unwrap().is_empty());
        assert!(iso.neighbours(&u).is_err());
    }

    #[test]
    fn renaming() {
        let g = hh();
        let (u, v, w) = (Name::new("u"), Name::new("v"), Name::new("w"));
        let h = g.rename(&u, &w).unwrap();
        assert_eq!(h.vertex_set(), names(&["v", "w"]));
        assert_eq!(h.bond(&w, &v), BondLabel::Covalent(1));
        assert_eq!(g.rename(&u, &u).unwrap(), g);
        assert_eq!(h.rename(&w, &u).unwrap(), g);
        assert!(matches!(g.rename(&u, &v), Err(GraphError::NameCollision { .. })));
    }

    #[test]
    fn isomorphism_verification() {
        let g = hh();
        let id: BTreeMap<Name, Name> = g.vertices().map(|v| (v.clone(), v.clone())).collect();
        assert!(check_iso(&g, &g, &id));
        let h = ChemGraph::new().with_vertex("w", "H", 0).with_vertex("z", "H", 0).with_bond("w", "z", BondLabel::Covalent(1));
        let f: BTreeMap<Name, Name> = [("u", "w"), ("v", "z")].iter().map(|(a, b)| (Name::new(a), Name::new(b))).collect();
        assert!(check_iso(&g, &h, &f));
        let ions = ChemGraph::new().with_vertex("w", "H", 1).with_vertex("z", "H", -1);
        assert!(!check_iso(&g, &ions, &f));
    }

    #[test]
    fn fresh_names_skip_collisions() {
        let taken = names(&["_g0", "_g2"]);
        let mut fresh = FreshNames::new(&taken);
        assert_eq!(fresh.fresh().as_str(), "_g1");
        assert_eq!(fresh.fresh().as_str(), "_g3");
    }

    #[test]
    fn atom_table_invariants() {
        assert!(AtomTable::new(vec![("H".into(), 1)]).is_err());
        assert!(AtomTable::new(vec![("H".into(), 1), ("O".into(), 2), ("*".into(), 2)]).is_err());
        let t = AtomTable::parse("# custom\nH 1\nN 5\n").unwrap();
        assert_eq!(t.valence(&Element::new("N")), Some(5));
        assert_eq!(t.valence(&Element::alpha()), Some(1));
    }
}
