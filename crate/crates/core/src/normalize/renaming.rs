//! Renaming form: a tail of renamings split as `A ; B` followed by touches.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{ChemGraph, Name};
use crate::semantics::regions_of;
use crate::term::{Atom, TypedTerm};

use super::{Engine, NormalizeError};

/// The `A ; B` split of a term's renaming block, with its name sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenamingSplit {
    /// Index of the first renaming, of the first `B` renaming, and one past the last renaming.
    pub start: usize,
    pub mid: usize,
    pub end: usize,
    pub a: BTreeSet<Name>,
    pub b: BTreeSet<Name>,
    pub c: BTreeSet<Name>,
    pub d: BTreeSet<Name>,
}

fn nbr(h: &ChemGraph, x: &Name) -> Option<BTreeSet<Name>> {
    h.neighbours(x).ok()
}

fn pairs(atoms: &[Atom]) -> Vec<(Name, Name)> {
    atoms
        .iter()
        .filter_map(|a| match a {
            Atom::Ren(x, y) => Some((x.clone(), y.clone())),
            _ => None,
        })
        .collect()
}

/// Checks the renaming-form conditions for one choice of split.
fn check(h: &ChemGraph, a_part: &[(Name, Name)], b_part: &[(Name, Name)]) -> Option<RenamingSplit> {
    let a: BTreeSet<Name> = a_part.iter().map(|p| p.0.clone()).collect();
    let b: BTreeSet<Name> = a_part.iter().map(|p| p.1.clone()).collect();
    let c: BTreeSet<Name> = b_part.iter().map(|p| p.0.clone()).collect();
    let d: BTreeSet<Name> = b_part.iter().map(|p| p.1.clone()).collect();
    if a.len() != a_part.len() || b.len() != a_part.len() || c.len() != b_part.len() || d.len() != b_part.len() {
        return None;
    }
    if !a.is_disjoint(&b) || !c.is_subset(&b) || !d.is_subset(&a) {
        return None;
    }
    for (ci, di) in b_part {
        let aj = &a_part.iter().find(|p| &p.1 == ci)?.0;
        if nbr(h, aj) == nbr(h, di) {
            return None;
        }
    }
    Some(RenamingSplit { a, b, c, d, ..Default::default() })
}

/// Finds the renaming block of an ICE-form term and a split putting it in renaming form.
pub(crate) fn split(t: &TypedTerm) -> Option<RenamingSplit> {
    let atoms = t.atoms();
    let start = atoms.iter().position(|a| matches!(a, Atom::Ren(..))).unwrap_or(atoms.len());
    let end = atoms[start..].iter().position(|a| !matches!(a, Atom::Ren(..))).map_or(atoms.len(), |k| start + k);
    if atoms[end..].iter().any(|a| matches!(a, Atom::Ren(..))) {
        return None;
    }
    let h = &t.graphs()[start];
    let all = pairs(&atoms[start..end]);
    (0..=all.len()).rev().find_map(|k| {
        check(h, &all[..k], &all[k..]).map(|s| RenamingSplit { start, mid: start + k, end, ..s })
    })
}

/// The interchangeability class of a vertex: chemical vertices are their own
/// class, alpha vertices are classed by charge and chemical neighbours.
fn class(h: &ChemGraph, x: &Name) -> Option<(String, BTreeSet<Name>)> {
    let l = h.label(x)?;
    if h.is_chemical(x) {
        return Some((format!("= {x}"), BTreeSet::new()));
    }
    let chem = nbr(h, x)?.into_iter().filter(|y| h.is_chemical(y)).collect();
    Some((format!("* {}", l.charge), chem))
}

impl Engine {
    /// Rewrites the trailing renamings and touches of an ICE-form term into renaming form.
    ///
    /// The tail is determined by its endpoints and regions, so the renaming is
    /// rebuilt from them: vertices are matched class by class, fixed points
    /// first, and a moved vertex whose new name is still taken goes through a dummy.
    pub(crate) fn renaming_form(&mut self) -> Result<(), NormalizeError> {
        let start = self.atoms.iter().position(|a| matches!(a, Atom::Ren(..) | Atom::Touch(_))).unwrap_or(self.atoms.len());
        if self.atoms[start..].iter().any(|a| !matches!(a, Atom::Ren(..) | Atom::Touch(_))) {
            return Err(self.stuck("renaming form needs an ICE-form term"));
        }
        let end = self.atoms.len();
        let (h, target) = (self.graphs[start].clone(), self.graphs[end].clone());
        let (za, zc) = regions_of(&self.atoms[start..]);
        let mut sources: BTreeMap<(String, BTreeSet<Name>), Vec<Name>> = BTreeMap::new();
        let mut targets: BTreeMap<(String, BTreeSet<Name>), Vec<Name>> = BTreeMap::new();
        for x in &za {
            let k = class(&h, x).ok_or_else(|| self.stuck(format!("`{x}` missing before the renamings")))?;
            sources.entry(k).or_default().push(x.clone());
        }
        for y in &zc {
            let k = class(&target, y).ok_or_else(|| self.stuck(format!("`{y}` missing after the renamings")))?;
            targets.entry(k).or_default().push(y.clone());
        }
        let mut touches = Vec::new();
        let mut moves = Vec::new();
        for (k, xs) in &sources {
            let ys = targets.get(k).cloned().unwrap_or_default();
            if ys.len() != xs.len() {
                return Err(self.stuck("renaming tail does not match vertex classes"));
            }
            let fixed: BTreeSet<&Name> = xs.iter().filter(|x| ys.contains(x)).collect();
            touches.extend(fixed.iter().map(|x| (*x).clone()));
            let from = xs.iter().filter(|x| !fixed.contains(x));
            let to = ys.iter().filter(|y| !fixed.contains(y));
            moves.extend(from.cloned().zip(to.cloned()));
        }
        if targets.keys().any(|k| !sources.contains_key(k)) {
            return Err(self.stuck("renaming tail does not match vertex classes"));
        }
        let mut a_part = Vec::new();
        let mut b_part = Vec::new();
        for (x, y) in moves {
            if h.contains(&y) {
                let c = self.fresh();
                a_part.push(Atom::Ren(x, c.clone()));
                b_part.push(Atom::Ren(c, y));
            } else {
                a_part.push(Atom::Ren(x, y));
            }
        }
        touches.sort();
        let mut new = a_part;
        new.extend(b_part);
        new.extend(touches.into_iter().map(Atom::Touch));
        if new.as_slice() != &self.atoms[start..] && !self.rewrite(start, end, new, "renaming-form")? {
            return Err(self.stuck("renaming form rewrite rejected"));
        }
        Ok(())
    }
}
