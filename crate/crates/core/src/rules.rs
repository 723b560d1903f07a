//! The four disconnection rules and their converse connections, as partial
//! functions on chemical graphs.

use std::fmt;

use thiserror::Error;

use crate::graph::{BondLabel, ChemGraph, Element, Name};

/// Which rule, with its vertex-name parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    /// Electron detachment from a negative vertex `u`, creating `a` (bonded) and `b` (free).
    ENeg { u: Name, a: Name, b: Name },
    /// Electron detachment from a non-negative vertex `u` through its alpha neighbour `v`.
    ENonneg { u: Name, v: Name },
    /// Ionic bond breaking between positive `u` and negative `v`.
    Ion { u: Name, v: Name },
    /// Covalent bond breaking between `u` and `v`, creating `a` on `u` and `b` on `v`.
    Cov { u: Name, v: Name, a: Name, b: Name },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Disconnect,
    Connect,
}

/// A rule application: a [`RuleKind`] together with its direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleApp {
    kind: RuleKind,
    direction: Direction,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {0} names the same vertex twice")]
    NotDistinct(String),
    #[error("{rule} does not apply: {report}")]
    NotInDomain { rule: String, report: DomainReport },
}

/// Why a graph is outside the domain of a rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainFailure {
    Missing(Name),
    AlreadyPresent(Name),
    NotChemical(Name),
    NotAlpha(Name),
    NotNegative(Name),
    Negative(Name),
    NotPositive(Name),
    ChargeOutOfRange(Name, i32),
    HasIonicNeighbour(Name),
    BondNotIonic,
    BondNotSingle,
    BondNotCovalent,
    BondPresent,
    BondTooHigh,
    ChargesNotOpposite,
    NotAttachedTo(Name, Name),
    NotFree(Name),
}

impl fmt::Display for DomainFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainFailure::Missing(v) => write!(f, "vertex `{v}` is not present"),
            DomainFailure::AlreadyPresent(v) => write!(f, "vertex `{v}` already exists"),
            DomainFailure::NotChemical(v) => write!(f, "vertex `{v}` is not chemical"),
            DomainFailure::NotAlpha(v) => write!(f, "vertex `{v}` is not an alpha vertex"),
            DomainFailure::NotNegative(v) => write!(f, "vertex `{v}` is not negative"),
            DomainFailure::Negative(v) => write!(f, "vertex `{v}` is negative"),
            DomainFailure::NotPositive(v) => write!(f, "vertex `{v}` is not positive"),
            DomainFailure::ChargeOutOfRange(v, c) => write!(f, "vertex `{v}` has charge {c}"),
            DomainFailure::HasIonicNeighbour(v) => write!(f, "vertex `{v}` has an ionic neighbour"),
            DomainFailure::BondNotIonic => f.write_str("bond is not ionic"),
            DomainFailure::BondNotSingle => f.write_str("bond is not a single covalent bond"),
            DomainFailure::BondNotCovalent => f.write_str("bond is not covalent"),
            DomainFailure::BondPresent => f.write_str("vertices are already bonded"),
            DomainFailure::BondTooHigh => f.write_str("bond multiplicity is already 4"),
            DomainFailure::ChargesNotOpposite => f.write_str("charges are not opposite"),
            DomainFailure::NotAttachedTo(a, u) => write!(f, "alpha vertex `{a}` is not attached to `{u}` alone"),
            DomainFailure::NotFree(a) => write!(f, "alpha vertex `{a}` is not a free anion"),
        }
    }
}

/// Outcome of [`RuleApp::domain_check`]; `reason` is set iff not in the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainReport {
    pub in_domain: bool,
    pub reason: Option<DomainFailure>,
}

impl fmt::Display for DomainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            None => f.write_str("in domain"),
            Some(r) => write!(f, "{r}"),
        }
    }
}

type Check = Result<(), DomainFailure>;

fn present(g: &ChemGraph, v: &Name) -> Check {
    if g.contains(v.as_str()) { Ok(()) } else { Err(DomainFailure::Missing(v.clone())) }
}

fn absent(g: &ChemGraph, v: &Name) -> Check {
    if g.contains(v.as_str()) { Err(DomainFailure::AlreadyPresent(v.clone())) } else { Ok(()) }
}

fn chemical(g: &ChemGraph, v: &Name) -> Check {
    if g.is_chemical(v.as_str()) { Ok(()) } else { Err(DomainFailure::NotChemical(v.clone())) }
}

fn alpha(g: &ChemGraph, v: &Name) -> Check {
    if g.is_alpha(v.as_str()) { Ok(()) } else { Err(DomainFailure::NotAlpha(v.clone())) }
}

fn charge(g: &ChemGraph, v: &Name) -> i32 {
    g.charge(v.as_str()).unwrap_or(0)
}

// Changing the charge of a vertex with an ionic partner would break the
// ionic-charge condition, so such vertices are outside the E-rule domains.
fn no_ionic(g: &ChemGraph, v: &Name) -> Check {
    if g.bonds().any(|(a, b, l)| l == BondLabel::Ionic && (a == v || b == v)) {
        Err(DomainFailure::HasIonicNeighbour(v.clone()))
    } else {
        Ok(())
    }
}

/// `a` is a neutral alpha vertex whose only neighbour is `u`, by a single bond.
fn attached(g: &ChemGraph, a: &Name, u: &Name) -> Check {
    alpha(g, a)?;
    let mut nbrs = g.bonds().filter(|(x, y, _)| *x == a || *y == a);
    let ok = charge(g, a) == 0
        && matches!(nbrs.next(), Some((x, y, BondLabel::Covalent(1))) if x == u || y == u)
        && nbrs.next().is_none();
    if ok { Ok(()) } else { Err(DomainFailure::NotAttachedTo(a.clone(), u.clone())) }
}

/// `a` is an isolated alpha vertex of charge -1.
fn free(g: &ChemGraph, a: &Name) -> Check {
    alpha(g, a)?;
    if charge(g, a) == -1 && !g.bonds().any(|(x, y, _)| x == a || y == a) {
        Ok(())
    } else {
        Err(DomainFailure::NotFree(a.clone()))
    }
}

impl RuleApp {
    pub fn new(kind: RuleKind, direction: Direction) -> Result<Self, RuleError> {
        let r = RuleApp { kind, direction };
        let names = r.names();
        for (i, x) in names.iter().enumerate() {
            if names[i + 1..].contains(x) {
                return Err(RuleError::NotDistinct(r.to_string()));
            }
        }
        Ok(r)
    }

    pub fn disconnect(kind: RuleKind) -> Result<Self, RuleError> {
        Self::new(kind, Direction::Disconnect)
    }

    pub fn connect(kind: RuleKind) -> Result<Self, RuleError> {
        Self::new(kind, Direction::Connect)
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_disconnect(&self) -> bool {
        self.direction == Direction::Disconnect
    }

    /// The converse rule application.
    pub fn invert(&self) -> RuleApp {
        let direction = match self.direction {
            Direction::Disconnect => Direction::Connect,
            Direction::Connect => Direction::Disconnect,
        };
        RuleApp { kind: self.kind.clone(), direction }
    }

    /// Superscript names (the vertices the rule acts on).
    pub fn upper(&self) -> Vec<Name> {
        match &self.kind {
            RuleKind::ENeg { u, .. } => vec![u.clone()],
            RuleKind::ENonneg { u, v } | RuleKind::Ion { u, v } | RuleKind::Cov { u, v, .. } => {
                vec![u.clone(), v.clone()]
            }
        }
    }

    /// Subscript names (created by a disconnection, removed by a connection).
    pub fn lower(&self) -> Vec<Name> {
        match &self.kind {
            RuleKind::ENeg { a, b, .. } | RuleKind::Cov { a, b, .. } => vec![a.clone(), b.clone()],
            _ => Vec::new(),
        }
    }

    pub fn names(&self) -> Vec<Name> {
        let mut n = self.upper();
        n.extend(self.lower());
        n
    }

    pub fn mentions(&self, x: &Name) -> bool {
        self.upper().contains(x) || self.lower().contains(x)
    }

    /// The same rule with every name passed through `f`.
    pub fn map_names(&self, f: impl Fn(&Name) -> Name) -> Result<RuleApp, RuleError> {
        let kind = match &self.kind {
            RuleKind::ENeg { u, a, b } => RuleKind::ENeg { u: f(u), a: f(a), b: f(b) },
            RuleKind::ENonneg { u, v } => RuleKind::ENonneg { u: f(u), v: f(v) },
            RuleKind::Ion { u, v } => RuleKind::Ion { u: f(u), v: f(v) },
            RuleKind::Cov { u, v, a, b } => RuleKind::Cov { u: f(u), v: f(v), a: f(a), b: f(b) },
        };
        RuleApp::new(kind, self.direction)
    }

    fn check(&self, g: &ChemGraph) -> Check {
        let dis = self.is_disconnect();
        for x in self.upper() {
            present(g, &x)?;
        }
        for x in self.lower() {
            if dis { absent(g, &x)? } else { present(g, &x)? }
        }
        match (&self.kind, dis) {
            (RuleKind::ENeg { u, .. }, true) => {
                chemical(g, u)?;
                if charge(g, u) >= 0 {
                    return Err(DomainFailure::NotNegative(u.clone()));
                }
                no_ionic(g, u)
            }
            (RuleKind::ENeg { u, a, b }, false) => {
                chemical(g, u)?;
                if charge(g, u) > 0 {
                    return Err(DomainFailure::ChargeOutOfRange(u.clone(), charge(g, u)));
                }
                no_ionic(g, u)?;
                attached(g, a, u)?;
                free(g, b)
            }
            (RuleKind::ENonneg { u, v }, true) => {
                chemical(g, u)?;
                if charge(g, u) < 0 {
                    return Err(DomainFailure::Negative(u.clone()));
                }
                alpha(g, v)?;
                if g.bond(u, v) != BondLabel::Covalent(1) {
                    return Err(DomainFailure::BondNotSingle);
                }
                no_ionic(g, u)
            }
            (RuleKind::ENonneg { u, v }, false) => {
                chemical(g, u)?;
                if charge(g, u) < 1 {
                    return Err(DomainFailure::NotPositive(u.clone()));
                }
                no_ionic(g, u)?;
                free(g, v)
            }
            (RuleKind::Ion { u, v }, true) => {
                if g.bond(u, v) != BondLabel::Ionic {
                    return Err(DomainFailure::BondNotIonic);
                }
                if charge(g, u) <= 0 {
                    return Err(DomainFailure::NotPositive(u.clone()));
                }
                if charge(g, v) >= 0 {
                    return Err(DomainFailure::NotNegative(v.clone()));
                }
                Ok(())
            }
            (RuleKind::Ion { u, v }, false) => {
                chemical(g, u)?;
                chemical(g, v)?;
                if !g.bond(u, v).is_none() {
                    return Err(DomainFailure::BondPresent);
                }
                if charge(g, u) <= 0 {
                    return Err(DomainFailure::NotPositive(u.clone()));
                }
                if charge(g, v) >= 0 {
                    return Err(DomainFailure::NotNegative(v.clone()));
                }
                if charge(g, u) != -charge(g, v) {
                    return Err(DomainFailure::ChargesNotOpposite);
                }
                no_ionic(g, u)?;
                no_ionic(g, v)
            }
            (RuleKind::Cov { u, v, .. }, true) => {
                chemical(g, u)?;
                chemical(g, v)?;
                match g.bond(u, v) {
                    BondLabel::Covalent(k) if k >= 1 => Ok(()),
                    _ => Err(DomainFailure::BondNotCovalent),
                }
            }
            (RuleKind::Cov { u, v, a, b }, false) => {
                chemical(g, u)?;
                chemical(g, v)?;
                match g.bond(u, v) {
                    BondLabel::Ionic => return Err(DomainFailure::BondNotCovalent),
                    BondLabel::Covalent(k) if k >= 4 => return Err(DomainFailure::BondTooHigh),
                    _ => {}
                }
                attached(g, a, u)?;
                attached(g, b, v)
            }
        }
    }

    pub fn domain_check(&self, g: &ChemGraph) -> DomainReport {
        match self.check(g) {
            Ok(()) => DomainReport { in_domain: true, reason: None },
            Err(r) => DomainReport { in_domain: false, reason: Some(r) },
        }
    }

    pub fn applies_to(&self, g: &ChemGraph) -> bool {
        self.check(g).is_ok()
    }

    /// Applies the rule, failing with the domain report when `g` is outside its domain.
    pub fn apply(&self, g: &ChemGraph) -> Result<ChemGraph, RuleError> {
        if let Err(reason) = self.check(g) {
            return Err(RuleError::NotInDomain {
                rule: self.to_string(),
                report: DomainReport { in_domain: false, reason: Some(reason) },
            });
        }
        let mut out = g.clone();
        let bump = |out: &mut ChemGraph, v: &Name, delta: i32| {
            let c = out.charge(v.as_str()).expect("checked") + delta;
            out.set_charge(v, c).expect("checked");
        };
        let bond = |out: &mut ChemGraph, u: &Name, v: &Name, l: BondLabel| {
            out.set_bond(u, v, l).expect("checked");
        };
        match (&self.kind, self.is_disconnect()) {
            (RuleKind::ENeg { u, a, b }, true) => {
                bump(&mut out, u, 1);
                out.add_vertex(a.clone(), Element::alpha(), 0).expect("checked");
                out.add_vertex(b.clone(), Element::alpha(), -1).expect("checked");
                bond(&mut out, u, a, BondLabel::Covalent(1));
            }
            (RuleKind::ENeg { u, a, b }, false) => {
                bump(&mut out, u, -1);
                out.remove_vertex(a).expect("checked");
                out.remove_vertex(b).expect("checked");
            }
            (RuleKind::ENonneg { u, v }, true) => {
                bump(&mut out, u, 1);
                out.set_charge(v, -1).expect("checked");
                bond(&mut out, u, v, BondLabel::NONE);
            }
            (RuleKind::ENonneg { u, v }, false) => {
                bump(&mut out, u, -1);
                out.set_charge(v, 0).expect("checked");
                bond(&mut out, u, v, BondLabel::Covalent(1));
            }
            (RuleKind::Ion { u, v }, true) => bond(&mut out, u, v, BondLabel::NONE),
            (RuleKind::Ion { u, v }, false) => bond(&mut out, u, v, BondLabel::Ionic),
            (RuleKind::Cov { u, v, a, b }, true) => {
                let k = g.bond(u, v).cov() as u8;
                bond(&mut out, u, v, BondLabel::Covalent(k - 1));
                out.add_vertex(a.clone(), Element::alpha(), 0).expect("checked");
                out.add_vertex(b.clone(), Element::alpha(), 0).expect("checked");
                bond(&mut out, u, a, BondLabel::Covalent(1));
                bond(&mut out, v, b, BondLabel::Covalent(1));
            }
            (RuleKind::Cov { u, v, a, b }, false) => {
                let k = g.bond(u, v).cov() as u8;
                out.remove_vertex(a).expect("checked");
                out.remove_vertex(b).expect("checked");
                bond(&mut out, u, v, BondLabel::Covalent(k + 1));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for RuleApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_disconnect() {
            f.write_str("~")?;
        }
        match &self.kind {
            RuleKind::ENeg { u, a, b } => write!(f, "E[{u};{a},{b}]"),
            RuleKind::ENonneg { u, v } => write!(f, "E[{u},{v}]"),
            RuleKind::Ion { u, v } => write!(f, "I[{u},{v}]"),
            RuleKind::Cov { u, v, a, b } => write!(f, "C[{u},{v};{a},{b}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AtomTable, ALPHA};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn hh() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", "H", 0).with_bond("u", "v", BondLabel::Covalent(1))
    }

    fn nacl() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "Na", 1).with_vertex("v", "Cl", -1).with_bond("u", "v", BondLabel::Ionic)
    }

    fn cov() -> RuleApp {
        RuleApp::disconnect(RuleKind::Cov { u: n("u"), v: n("v"), a: n("a"), b: n("b") }).unwrap()
    }

    #[test]
    fn ion_domain() {
        let ion = RuleApp::disconnect(RuleKind::Ion { u: n("u"), v: n("v") }).unwrap();
        assert!(ion.domain_check(&nacl()).in_domain);
        let report = ion.domain_check(&hh());
        assert!(!report.in_domain);
        assert_eq!(report.reason.unwrap().to_string(), "bond is not ionic");
        let out = ion.apply(&nacl()).unwrap();
        assert_eq!(out, ChemGraph::new().with_vertex("u", "Na", 1).with_vertex("v", "Cl", -1));
    }

    #[test]
    fn distinctness_enforced() {
        assert!(cov().domain_check(&hh()).in_domain);
        let bad = RuleApp::disconnect(RuleKind::Cov { u: n("u"), v: n("v"), a: n("u"), b: n("b") });
        assert!(matches!(bad, Err(RuleError::NotDistinct(_))));
    }

    #[test]
    fn covalent_break() {
        let out = cov().apply(&hh()).unwrap();
        let expected = ChemGraph::new()
            .with_vertex("u", "H", 0)
            .with_vertex("v", "H", 0)
            .with_vertex("a", ALPHA, 0)
            .with_vertex("b", ALPHA, 0)
            .with_bond("u", "a", BondLabel::Covalent(1))
            .with_bond("v", "b", BondLabel::Covalent(1));
        assert_eq!(out, expected);
        assert!(out.is_valid(&AtomTable::default()));
        assert_eq!(cov().invert().apply(&out).unwrap(), hh());
    }

    #[test]
    fn nonnegative_detachment() {
        let g = ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", ALPHA, 0).with_bond("u", "v", BondLabel::Covalent(1));
        let r = RuleApp::disconnect(RuleKind::ENonneg { u: n("u"), v: n("v") }).unwrap();
        let out = r.apply(&g).unwrap();
        assert_eq!(out, ChemGraph::new().with_vertex("u", "H", 1).with_vertex("v", ALPHA, -1));
        assert_eq!(r.invert().apply(&out).unwrap(), g);
    }

    #[test]
    fn negative_detachment() {
        let g = ChemGraph::new().with_vertex("u", "Cl", -1);
        let r = RuleApp::disconnect(RuleKind::ENeg { u: n("u"), a: n("a"), b: n("b") }).unwrap();
        let out = r.apply(&g).unwrap();
        let expected = ChemGraph::new()
            .with_vertex("u", "Cl", 0)
            .with_vertex("a", ALPHA, 0)
            .with_vertex("b", ALPHA, -1)
            .with_bond("u", "a", BondLabel::Covalent(1));
        assert_eq!(out, expected);
        assert!(out.is_valid(&AtomTable::default()));
        assert_eq!(r.invert().apply(&out).unwrap(), g);
    }

    #[test]
    fn ionic_partner_blocks_detachment() {
        let r = RuleApp::disconnect(RuleKind::ENeg { u: n("v"), a: n("a"), b: n("b") }).unwrap();
        assert_eq!(r.domain_check(&nacl()).reason, Some(DomainFailure::HasIonicNeighbour(n("v"))));
    }

    #[test]
    fn inversion() {
        let r = cov();
        assert_eq!(r.invert().invert(), r);
        assert_eq!(r.invert().direction(), Direction::Connect);
        assert_eq!(r.invert().kind(), r.kind());
        assert_eq!(r.invert().to_string(), "~C[u,v;a,b]");
    }

    #[test]
    fn not_in_domain_error() {
        let r = RuleApp::disconnect(RuleKind::Ion { u: n("u"), v: n("v") }).unwrap();
        assert!(matches!(r.apply(&hh()), Err(RuleError::NotInDomain { .. })));
    }
}
