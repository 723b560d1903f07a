//! Interpretation of terms as reactions, and decomposition of reactions into terms.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{BondLabel, ChemGraph, FreshNames, Name};
use crate::reaction::{Reaction, ReactionError};
use crate::rules::{RuleApp, RuleKind};
use crate::term::{Atom, TermError, TypedTerm};

/// The pair of regions `(R1, R2)` that an atom touches.
pub fn atom_regions(a: &Atom) -> (BTreeSet<Name>, BTreeSet<Name>) {
    let set = |v: Vec<Name>| v.into_iter().collect::<BTreeSet<_>>();
    match a {
        Atom::Id => Default::default(),
        Atom::Touch(u) => (set(vec![u.clone()]), set(vec![u.clone()])),
        Atom::Ren(u, v) => (set(vec![u.clone()]), set(vec![v.clone()])),
        Atom::Rule(r) => {
            let upper = set(r.upper());
            let all = set(r.names());
            if r.is_disconnect() { (upper, all) } else { (all, upper) }
        }
    }
}

/// Image of one typed atom `from -> to`.
pub fn atom_image(a: &Atom, from: &ChemGraph, to: &ChemGraph) -> Reaction {
    let (r1, r2) = atom_regions(a);
    Reaction::with_identity_maps(from.clone(), to.clone(), r1, r2).expect("typed atoms denote reactions")
}

/// The reaction denoted by a typed term. Every map involved is an identity, so
/// it is fixed by the endpoints and [`image_regions`].
pub fn functor_image(t: &TypedTerm) -> Reaction {
    let (za, zc) = image_regions(t);
    Reaction::with_identity_maps(t.source().clone(), t.target().clone(), za, zc).expect("typed terms denote reactions")
}

/// [`functor_image`] composed atom by atom.
pub fn functor_image_stepwise(t: &TypedTerm) -> Reaction {
    let mut r = Reaction::identity(t.source());
    for (k, a) in t.atoms().iter().enumerate() {
        let step = atom_image(a, &t.graphs()[k], &t.graphs()[k + 1]);
        r = r.compose(&step).expect("consecutive atoms compose");
    }
    r
}

/// Regions of the image, computed by set arithmetic alone.
pub fn image_regions(t: &TypedTerm) -> (BTreeSet<Name>, BTreeSet<Name>) {
    regions_of(t.atoms())
}

/// [`image_regions`] for a bare atom sequence; the regions do not depend on the graphs.
pub fn regions_of(atoms: &[Atom]) -> (BTreeSet<Name>, BTreeSet<Name>) {
    let mut za = BTreeSet::new();
    let mut zc: BTreeSet<Name> = BTreeSet::new();
    for a in atoms {
        let (w1, w2) = atom_regions(a);
        za.extend(w1.iter().filter(|x| !zc.contains(*x)).cloned());
        let carried: Vec<Name> = zc.iter().filter(|x| !w1.contains(*x)).cloned().collect();
        zc = w2;
        zc.extend(carried);
    }
    (za, zc)
}

pub fn dagger_compat_check(t: &TypedTerm) -> bool {
    functor_image_stepwise(&t.bar()) == functor_image_stepwise(t).dagger()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("invalid reaction: {0}")]
    Invalid(#[from] ReactionError),
    #[error("internal decomposition failure: {0}")]
    Internal(String),
}

impl From<TermError> for DecomposeError {
    fn from(e: TermError) -> Self {
        DecomposeError::Internal(e.to_string())
    }
}

/// A term `t: A -> B` with an isomorphism `iota: B -> C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub term: TypedTerm,
    pub iota: BTreeMap<Name, Name>,
}

struct Builder {
    atoms: Vec<Atom>,
    graph: ChemGraph,
}

impl Builder {
    fn push(&mut self, kind: RuleKind) -> Result<(), DecomposeError> {
        let r = RuleApp::disconnect(kind).map_err(|e| DecomposeError::Internal(e.to_string()))?;
        self.graph = r.apply(&self.graph).map_err(|e| DecomposeError::Internal(e.to_string()))?;
        self.atoms.push(Atom::Rule(r));
        Ok(())
    }
}

fn has_ionic(g: &ChemGraph, u: &Name) -> bool {
    g.bonds().any(|(x, y, l)| l == BondLabel::Ionic && (x == u || y == u))
}

/// Breaks every bond inside `region`, returning the disconnections and the
/// stripped graph. New alpha names come from `fresh`.
fn strip(g: &ChemGraph, region: &BTreeSet<Name>, fresh: &mut FreshNames) -> Result<(Vec<Atom>, ChemGraph, BTreeSet<Name>), DecomposeError> {
    let mut b = Builder { atoms: Vec::new(), graph: g.clone() };
    let mut created = BTreeSet::new();
    let chem: Vec<Name> = region.iter().filter(|v| g.is_chemical(v)).cloned().collect();
    for u in &chem {
        for v in &chem {
            if g.bond(u, v) == BondLabel::Ionic && g.charge(u).unwrap_or(0) > 0 {
                b.push(RuleKind::Ion { u: u.clone(), v: v.clone() })?;
            }
        }
    }
    for (k, u) in chem.iter().enumerate() {
        for v in &chem[k + 1..] {
            for _ in 0..g.bond(u, v).cov() {
                let (x, y) = (fresh.fresh(), fresh.fresh());
                created.extend([x.clone(), y.clone()]);
                b.push(RuleKind::Cov { u: u.clone(), v: v.clone(), a: x, b: y })?;
            }
        }
    }
    for u in &chem {
        if has_ionic(&b.graph, u) {
            continue;
        }
        for _ in 0..(-b.graph.charge(u).unwrap_or(0)).max(0) {
            let (x, y) = (fresh.fresh(), fresh.fresh());
            created.extend([x.clone(), y.clone()]);
            b.push(RuleKind::ENeg { u: u.clone(), a: x, b: y })?;
        }
    }
    for u in &chem {
        if has_ionic(&b.graph, u) {
            continue;
        }
        let alphas: Vec<Name> = b
            .graph
            .cov_neighbours(u)
            .expect("present")
            .into_iter()
            .filter(|a| b.graph.is_alpha(a) && (region.contains(a) || created.contains(a)))
            .collect();
        for a in alphas {
            b.push(RuleKind::ENonneg { u: u.clone(), v: a })?;
        }
    }
    Ok((b.atoms, b.graph, created))
}

/// The chemical neighbour of an alpha vertex, if bonded.
fn anchor(g: &ChemGraph, a: &Name) -> Option<Name> {
    g.neighbours(a).ok()?.into_iter().next()
}

/// Pairs the loose alpha vertices of two stripped graphs so that each pair
/// shares its anchor.
fn match_alphas(
    left: &ChemGraph,
    left_loose: &BTreeSet<Name>,
    right: &ChemGraph,
    right_loose: &BTreeSet<Name>,
) -> Result<BTreeMap<Name, Name>, DecomposeError> {
    let group = |g: &ChemGraph, loose: &BTreeSet<Name>| {
        let mut m: BTreeMap<Option<Name>, Vec<Name>> = BTreeMap::new();
        for a in loose.iter().filter(|a| g.is_alpha(a)) {
            m.entry(anchor(g, a)).or_default().push(a.clone());
        }
        m
    };
    let (l, r) = (group(left, left_loose), group(right, right_loose));
    if l.iter().map(|(k, v)| (k, v.len())).ne(r.iter().map(|(k, v)| (k, v.len()))) {
        return Err(DecomposeError::Internal("stripped graphs disagree on alpha vertices".into()));
    }
    Ok(r.into_iter().zip(l).flat_map(|((_, rs), (_, ls))| rs.into_iter().zip(ls)).collect())
}

/// Decomposes `r: A -> C` into a term `t: A -> B` and an isomorphism `iota: B -> C`
/// with `R(t) ; iota = r`.
pub fn decompose(r: &Reaction) -> Result<Decomposition, DecomposeError> {
    r.validate()?;
    let a = r.source();
    let c = r.target();
    let mut fresh = FreshNames::new(a.vertices().chain(c.vertices()));

    // C' is C renamed into the name space of A: chemical region vertices via b,
    // the complement via i, and region alpha vertices to fresh names.
    let inv_b: BTreeMap<&Name, &Name> = r.b().iter().map(|(x, y)| (y, x)).collect();
    let inv_i: BTreeMap<&Name, &Name> = r.i().iter().map(|(x, y)| (y, x)).collect();
    let mut to_prime: BTreeMap<Name, Name> = BTreeMap::new();
    for x in c.vertices() {
        let y = if let Some(y) = inv_i.get(x) {
            (*y).clone()
        } else if let Some(y) = inv_b.get(x) {
            (*y).clone()
        } else {
            fresh.fresh()
        };
        to_prime.insert(x.clone(), y);
    }
    let c_prime = c.map_names(|x| to_prime[x].clone());
    let ub_prime: BTreeSet<Name> = r.ub().iter().map(|x| to_prime[x].clone()).collect();

    let (strip_a, stripped_a, created_a) = strip(a, r.ua(), &mut fresh)?;
    let (strip_c, stripped_c, created_c) = strip(&c_prime, &ub_prime, &mut fresh)?;

    let loose_a: BTreeSet<Name> = r.ua().iter().cloned().chain(created_a).collect();
    let loose_c: BTreeSet<Name> = ub_prime.iter().cloned().chain(created_c).collect();
    let m = match_alphas(&stripped_a, &loose_a, &stripped_c, &loose_c)?;
    let via_m = |x: &Name| m.get(x).cloned().unwrap_or_else(|| x.clone());

    let mut atoms = strip_a;
    for atom in strip_c.iter().rev() {
        atoms.push(atom.bar().map_names(via_m).map_err(|e| DecomposeError::Internal(e.to_string()))?);
    }
    let mut current = c_prime.map_names(via_m);

    // Give region alpha vertices their names in C where that name is free.
    let mut final_name: BTreeMap<Name, Name> = BTreeMap::new();
    let mut pending: Vec<(Name, Name)> = Vec::new();
    for x in r.ub().iter().filter(|x| c.is_alpha(x)) {
        let cur = via_m(&to_prime[x]);
        final_name.insert(cur.clone(), cur.clone());
        if &cur != x {
            pending.push((cur, x.clone()));
        }
    }
    let moving: BTreeSet<Name> = pending.iter().map(|(cur, _)| cur.clone()).collect();
    pending.retain(|(_, want)| !current.contains(want) || moving.contains(want));
    let mut renames = Vec::new();
    for (cur, want) in pending.iter_mut() {
        if current.contains(want) {
            let tmp = fresh.fresh();
            renames.push(Atom::Ren(cur.clone(), tmp.clone()));
            current = current.rename(cur, &tmp).expect("fresh");
            final_name.insert(cur.clone(), tmp.clone());
            *cur = tmp;
        }
    }
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for (cur, want) in pending {
            if current.contains(&want) {
                rest.push((cur, want));
            } else {
                renames.push(Atom::Ren(cur.clone(), want.clone()));
                current = current.rename(&cur, &want).expect("free");
                for v in final_name.values_mut() {
                    if *v == cur {
                        *v = want.clone();
                    }
                }
            }
        }
        pending = rest;
        if pending.len() == before {
            return Err(DecomposeError::Internal("renaming did not make progress".into()));
        }
    }
    atoms.extend(renames);

    let mut iota = BTreeMap::new();
    for x in c.vertices() {
        let p = &to_prime[x];
        let in_b = if c.is_alpha(x) && r.ub().contains(x) { final_name[&via_m(p)].clone() } else { p.clone() };
        iota.insert(in_b, x.clone());
    }
    let mut touched: Vec<Name> = iota.iter().filter(|(_, x)| r.ub().contains(*x)).map(|(y, _)| y.clone()).collect();
    touched.sort();
    atoms.extend(touched.into_iter().map(Atom::Touch));

    let term = TypedTerm::elaborate(atoms, a.clone())?;
    Ok(Decomposition { term, iota })
}

/// Recomposes a decomposition into the reaction `R(t) ; iota`.
pub fn recompose(d: &Decomposition, c: &ChemGraph) -> Result<Reaction, ReactionError> {
    let iso = Reaction::isomorphism(d.term.target(), c, d.iota.clone())?;
    functor_image(&d.term).compose(&iso)
}

pub fn roundtrip_check(r: &Reaction) -> bool {
    match decompose(r) {
        Ok(d) => recompose(&d, r.target()).as_ref() == Ok(r),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ALPHA;
    use crate::term::Term;

    fn set(names: &[&str]) -> BTreeSet<Name> {
        names.iter().map(|s| Name::new(s)).collect()
    }

    fn hh() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", "H", 0).with_bond("u", "v", BondLabel::Covalent(1))
    }

    fn typed(s: &str, g: &ChemGraph) -> TypedTerm {
        Term::parse(s).unwrap().elaborate(g).unwrap()
    }

    #[test]
    fn covalent_image() {
        let img = functor_image(&typed("C[u,v;a,b]", &hh()));
        assert_eq!(img.ua(), &set(&["u", "v"]));
        assert_eq!(img.ub(), &set(&["a", "b", "u", "v"]));
        assert_eq!(functor_image(&typed("", &hh())), Reaction::identity(&hh()));
    }

    #[test]
    fn regions_agree_with_composition() {
        let t = typed("C[u,v;a,b] ; R[a>z] ; S[u] ; E[v,b] ; ~E[v,b]", &hh());
        let img = functor_image_stepwise(&t);
        assert_eq!(image_regions(&t), (img.ua().clone(), img.ub().clone()));
        assert_eq!(functor_image(&t), img);
        assert!(dagger_compat_check(&t));
    }

    #[test]
    fn ionic_formation() {
        let a = ChemGraph::new().with_vertex("u", "Na", 1).with_vertex("v", "Cl", -1);
        let c = a.clone().with_bond("u", "v", BondLabel::Ionic);
        let r = Reaction::with_identity_maps(a, c, set(&["u", "v"]), set(&["u", "v"])).unwrap();
        let d = decompose(&r).unwrap();
        // The chloride is stripped and rebuilt by electron detachments before the ionic bond forms.
        assert_eq!(
            d.term.to_string(),
            "E[v;_g0,_g1] ; E[v,_g0] ; ~E[v,_g0] ; ~E[v;_g0,_g1] ; ~I[u,v] ; S[u] ; S[v]"
        );
        assert!(d.iota.iter().all(|(x, y)| x == y));
        assert!(roundtrip_check(&r));
    }

    #[test]
    fn identity_decomposes_to_empty() {
        let d = decompose(&Reaction::identity(&hh())).unwrap();
        assert!(d.term.is_empty());
        assert_eq!(d.iota.len(), 2);
    }

    #[test]
    fn homolysis_round_trip() {
        let c = ChemGraph::new()
            .with_vertex("x", "H", 0)
            .with_vertex("y", "H", 0)
            .with_vertex("p", ALPHA, 0)
            .with_vertex("q", ALPHA, 0)
            .with_bond("x", "p", BondLabel::Covalent(1))
            .with_bond("y", "q", BondLabel::Covalent(1));
        let b = [("u", "x"), ("v", "y")].iter().map(|(p, q)| (Name::new(p), Name::new(q))).collect();
        let r = Reaction::new(hh(), c, set(&["u", "v"]), set(&["x", "y", "p", "q"]), b, BTreeMap::new()).unwrap();
        assert!(roundtrip_check(&r));
        assert!(roundtrip_check(&r.dagger()));
    }
}
