//! The category of reactions: morphisms `(U_A, U_B, b, i)` between chemical
//! graphs, with composition, identities and the dagger.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{check_iso, ChemGraph, Name};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReactionError {
    #[error("target of the first reaction differs from the source of the second")]
    MiddleMismatch,
    #[error("changed region of the {side} contains unknown vertex `{vertex}`")]
    NotSubset { side: &'static str, vertex: Name },
    #[error("net charges differ: {source_charge} in the source region, {target_charge} in the target region")]
    NetCharge { source_charge: i64, target_charge: i64 },
    #[error("bijection part is not a bijection between the chemical vertices of the regions: {0}")]
    NotBijective(String),
    #[error("bijection maps `{from}` to `{to}` with a different atom label")]
    LabelMismatch { from: Name, to: Name },
    #[error("isomorphism part is not an isomorphism of the unchanged parts: {0}")]
    ComplementIso(String),
    #[error("bond between `{u}` and `{a}` is not preserved across the boundary")]
    Boundary { u: Name, a: Name },
}

/// A morphism `source -> target` in the category of reactions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Reaction {
    source: ChemGraph,
    target: ChemGraph,
    ua: BTreeSet<Name>,
    ub: BTreeSet<Name>,
    b: BTreeMap<Name, Name>,
    i: BTreeMap<Name, Name>,
}

fn chem(g: &ChemGraph, u: &BTreeSet<Name>) -> BTreeSet<Name> {
    u.iter().filter(|v| g.is_chemical(v)).cloned().collect()
}

/// Checks that `f` is a bijection from exactly `dom` onto exactly `cod`.
fn bijection(f: &BTreeMap<Name, Name>, dom: &BTreeSet<Name>, cod: &BTreeSet<Name>) -> Result<(), String> {
    if let Some(x) = dom.iter().find(|x| !f.contains_key(*x)) {
        return Err(format!("`{x}` is not mapped"));
    }
    if let Some(x) = f.keys().find(|x| !dom.contains(*x)) {
        return Err(format!("`{x}` is mapped but outside the domain"));
    }
    let image: BTreeSet<&Name> = f.values().collect();
    if image.len() != f.len() {
        return Err("two vertices share an image".to_string());
    }
    if let Some(y) = image.iter().find(|y| !cod.contains(**y)) {
        return Err(format!("image `{y}` is outside the codomain"));
    }
    if image.len() != cod.len() {
        return Err("map is not surjective".to_string());
    }
    Ok(())
}

fn invert(f: &BTreeMap<Name, Name>) -> BTreeMap<Name, Name> {
    f.iter().map(|(x, y)| (y.clone(), x.clone())).collect()
}

impl Reaction {
    /// Builds a reaction, checking every defining condition.
    pub fn new(
        source: ChemGraph,
        target: ChemGraph,
        ua: BTreeSet<Name>,
        ub: BTreeSet<Name>,
        b: BTreeMap<Name, Name>,
        i: BTreeMap<Name, Name>,
    ) -> Result<Self, ReactionError> {
        let r = Reaction { source, target, ua, ub, b, i };
        r.validate()?;
        Ok(r)
    }

    /// Builds a tuple without checking it; [`Reaction::validate`] reports problems.
    pub fn new_unchecked(
        source: ChemGraph,
        target: ChemGraph,
        ua: BTreeSet<Name>,
        ub: BTreeSet<Name>,
        b: BTreeMap<Name, Name>,
        i: BTreeMap<Name, Name>,
    ) -> Self {
        Reaction { source, target, ua, ub, b, i }
    }

    /// The reaction `(U_A, U_B, id, id)`, which requires the chemical parts of the
    /// regions and the complements to carry the same names on both sides.
    pub fn with_identity_maps(
        source: ChemGraph,
        target: ChemGraph,
        ua: BTreeSet<Name>,
        ub: BTreeSet<Name>,
    ) -> Result<Self, ReactionError> {
        let b = chem(&source, &ua).into_iter().map(|x| (x.clone(), x)).collect();
        let i = source.vertices().filter(|x| !ua.contains(*x)).map(|x| (x.clone(), x.clone())).collect();
        Reaction::new(source, target, ua, ub, b, i)
    }

    pub fn identity(g: &ChemGraph) -> Self {
        let i = g.vertices().map(|x| (x.clone(), x.clone())).collect();
        Reaction {
            source: g.clone(),
            target: g.clone(),
            ua: BTreeSet::new(),
            ub: BTreeSet::new(),
            b: BTreeMap::new(),
            i,
        }
    }

    /// The isomorphism `g -> f(g)` given by a vertex renaming `f`.
    pub fn isomorphism(g: &ChemGraph, target: &ChemGraph, f: BTreeMap<Name, Name>) -> Result<Self, ReactionError> {
        Reaction::new(g.clone(), target.clone(), BTreeSet::new(), BTreeSet::new(), BTreeMap::new(), f)
    }

    pub fn source(&self) -> &ChemGraph {
        &self.source
    }

    pub fn target(&self) -> &ChemGraph {
        &self.target
    }

    pub fn ua(&self) -> &BTreeSet<Name> {
        &self.ua
    }

    pub fn ub(&self) -> &BTreeSet<Name> {
        &self.ub
    }

    pub fn b(&self) -> &BTreeMap<Name, Name> {
        &self.b
    }

    pub fn i(&self) -> &BTreeMap<Name, Name> {
        &self.i
    }

    /// Checks the defining conditions, reporting the first that fails.
    pub fn validate(&self) -> Result<(), ReactionError> {
        for (side, g, u) in [("source", &self.source, &self.ua), ("target", &self.target, &self.ub)] {
            if let Some(v) = u.iter().find(|v| !g.contains(v)) {
                return Err(ReactionError::NotSubset { side, vertex: v.clone() });
            }
        }
        let source_charge = self.source.net_charge(&self.ua).expect("subset checked");
        let target_charge = self.target.net_charge(&self.ub).expect("subset checked");
        if source_charge != target_charge {
            return Err(ReactionError::NetCharge { source_charge, target_charge });
        }
        let chem_a = chem(&self.source, &self.ua);
        let chem_b = chem(&self.target, &self.ub);
        bijection(&self.b, &chem_a, &chem_b).map_err(ReactionError::NotBijective)?;
        for (x, y) in &self.b {
            if self.source.element(x) != self.target.element(y) {
                return Err(ReactionError::LabelMismatch { from: x.clone(), to: y.clone() });
            }
        }
        let rest_a: BTreeSet<Name> = self.source.vertices().filter(|v| !self.ua.contains(*v)).cloned().collect();
        let rest_b: BTreeSet<Name> = self.target.vertices().filter(|v| !self.ub.contains(*v)).cloned().collect();
        bijection(&self.i, &rest_a, &rest_b).map_err(ReactionError::ComplementIso)?;
        if !check_iso(&self.source.induced(&rest_a), &self.target.induced(&rest_b), &self.i) {
            return Err(ReactionError::ComplementIso("labels or bonds differ".to_string()));
        }
        for u in &chem_a {
            for a in &rest_a {
                if self.source.bond(u, a) != self.target.bond(&self.b[u], &self.i[a]) {
                    return Err(ReactionError::Boundary { u: u.clone(), a: a.clone() });
                }
            }
        }
        Ok(())
    }

    /// Sequential composition `self ; s`.
    pub fn compose(&self, s: &Reaction) -> Result<Reaction, ReactionError> {
        if self.target != s.source {
            return Err(ReactionError::MiddleMismatch);
        }
        let inv_i = invert(&self.i);
        let mut za = self.ua.clone();
        za.extend(s.ua.iter().filter(|y| !self.ub.contains(*y)).map(|y| inv_i[y].clone()));
        let mut zc = s.ub.clone();
        zc.extend(self.ub.iter().filter(|y| !s.ua.contains(*y)).map(|y| s.i[y].clone()));
        let second = |y: &Name| if s.ua.contains(y) { s.b[y].clone() } else { s.i[y].clone() };
        let b = chem(&self.source, &za)
            .into_iter()
            .map(|x| {
                let y = if self.ua.contains(&x) { &self.b[&x] } else { &self.i[&x] };
                let z = second(y);
                (x, z)
            })
            .collect();
        let i = self
            .source
            .vertices()
            .filter(|x| !za.contains(*x))
            .map(|x| (x.clone(), s.i[&self.i[x]].clone()))
            .collect();
        Reaction::new(self.source.clone(), s.target.clone(), za, zc, b, i)
    }

    pub fn dagger(&self) -> Reaction {
        Reaction {
            source: self.target.clone(),
            target: self.source.clone(),
            ua: self.ub.clone(),
            ub: self.ua.clone(),
            b: invert(&self.b),
            i: invert(&self.i),
        }
    }

    /// True iff `b` and `i` are identity maps.
    pub fn has_identity_maps(&self) -> bool {
        self.b.iter().chain(self.i.iter()).all(|(x, y)| x == y)
    }
}

/// Equality of reactions: same graphs, regions and both maps.
pub fn eq_reaction(r: &Reaction, s: &Reaction) -> bool {
    r == s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BondLabel;

    fn set(names: &[&str]) -> BTreeSet<Name> {
        names.iter().map(|s| Name::new(s)).collect()
    }

    fn ions() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "Na", 1).with_vertex("v", "Cl", -1).with_vertex("w", "H", 0).with_vertex("x", "H", 0).with_bond("w", "x", BondLabel::Covalent(1))
    }

    fn salt() -> ChemGraph {
        ions().with_bond("u", "v", BondLabel::Ionic)
    }

    fn bonding() -> Reaction {
        Reaction::with_identity_maps(ions(), salt(), set(&["u", "v"]), set(&["u", "v"])).unwrap()
    }

    #[test]
    fn identity_is_unit() {
        let r = bonding();
        assert_eq!(Reaction::identity(&ions()).compose(&r).unwrap(), r);
        assert_eq!(r.compose(&Reaction::identity(&salt())).unwrap(), r);
        assert_eq!(Reaction::identity(&ions()).dagger(), Reaction::identity(&ions()));
    }

    #[test]
    fn dagger_is_involution() {
        let r = bonding();
        assert_eq!(r.dagger().dagger(), r);
        assert_ne!(r.dagger(), r);
        r.dagger().validate().unwrap();
    }

    #[test]
    fn compose_with_dagger() {
        let r = bonding();
        let rr = r.compose(&r.dagger()).unwrap();
        assert_eq!(rr.ua(), &set(&["u", "v"]));
        assert_eq!(rr.ub(), &set(&["u", "v"]));
        assert!(rr.has_identity_maps());
    }

    #[test]
    fn region_grows_under_composition() {
        let r = bonding();
        let touch = Reaction::with_identity_maps(salt(), salt(), set(&["w"]), set(&["w"])).unwrap();
        let c = r.compose(&touch).unwrap();
        assert_eq!(c.ua(), &set(&["u", "v", "w"]));
        assert_eq!(c.ub(), &set(&["u", "v", "w"]));
    }

    #[test]
    fn validation_failures() {
        let mut r = bonding();
        r.validate().unwrap();
        r.ua = set(&["u"]);
        r.b.remove(&Name::new("v"));
        assert!(matches!(r.validate(), Err(ReactionError::NetCharge { .. })));
        let bad = Reaction::with_identity_maps(ions(), salt(), set(&[]), set(&[]));
        assert!(matches!(bad, Err(ReactionError::ComplementIso(_))));
        let iso = Reaction::with_identity_maps(ions(), salt(), set(&["u", "v", "w"]), set(&["u", "v"]));
        assert!(matches!(iso, Err(ReactionError::NotBijective(_))));
    }

    #[test]
    fn middle_must_match() {
        let r = bonding();
        assert_eq!(r.compose(&r), Err(ReactionError::MiddleMismatch));
    }
}
