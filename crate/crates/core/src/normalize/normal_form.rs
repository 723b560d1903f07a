//! The normal form conditions and the rewriting loop establishing them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::graph::Name;
use crate::rules::{RuleApp, RuleKind};
use crate::term::{Atom, Term, TypedTerm};

use super::ice::{flip_cov, nonneg_alpha, same_kind, substitute};
use super::renaming::{split, RenamingSplit};
use super::{Engine, NormalizeError};

/// Name sets of a term in ICE-form with its renamings in renaming form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameSets {
    /// Superscripts of the disconnections and connections.
    pub u: BTreeSet<Name>,
    pub a: BTreeSet<Name>,
    pub b: BTreeSet<Name>,
    pub c: BTreeSet<Name>,
    pub d: BTreeSet<Name>,
    /// Subscripts of the disconnections.
    pub d_add: BTreeSet<Name>,
    /// Subscripts of the connections.
    pub d_remove: BTreeSet<Name>,
    pub s: BTreeSet<Name>,
}

/// The first reason a term fails to be a normal form. Indices point into the term's atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NfViolation {
    NotIce { index: usize },
    NotRenamingForm,
    DuplicateTouch { index: usize, name: Name },
    TouchOverlap { index: usize, name: Name },
    CreatedNotRenamed { index: usize, name: Name },
    CreatedRenamedInto { index: usize, name: Name },
    ConnectionRename { connection: usize, renaming: usize },
    UndoneDisconnection { disconnection: usize, connection: usize },
    UndoneElectron { disconnection: usize, connection: usize },
    UndoneIonic { disconnection: usize, connection: usize },
}

impl NfViolation {
    /// The numbered condition violated, with 0 for the ICE and renaming-form shape.
    pub fn condition(&self) -> u8 {
        match self {
            NfViolation::NotIce { .. } | NfViolation::NotRenamingForm => 0,
            NfViolation::DuplicateTouch { .. } => 1,
            NfViolation::TouchOverlap { .. } => 2,
            NfViolation::CreatedNotRenamed { .. } => 3,
            NfViolation::CreatedRenamedInto { .. } => 4,
            NfViolation::ConnectionRename { .. } => 5,
            NfViolation::UndoneDisconnection { .. } => 6,
            NfViolation::UndoneElectron { .. } => 7,
            NfViolation::UndoneIonic { .. } => 8,
        }
    }
}

impl fmt::Display for NfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NfViolation::NotIce { index } => write!(f, "atoms {index} and {} are out of block order", index + 1),
            NfViolation::NotRenamingForm => f.write_str("renamings are not in renaming form"),
            NfViolation::DuplicateTouch { name, .. } => write!(f, "S[{name}] occurs more than once"),
            NfViolation::TouchOverlap { name, .. } => write!(f, "S[{name}] touches a vertex already in the term"),
            NfViolation::CreatedNotRenamed { name, .. } => {
                write!(f, "created vertex {name} is neither removed nor renamed away")
            }
            NfViolation::CreatedRenamedInto { name, .. } => write!(f, "created vertex {name} is a renaming target"),
            NfViolation::ConnectionRename { connection, renaming } => {
                write!(f, "connection {connection} could consume the source of renaming {renaming}")
            }
            NfViolation::UndoneDisconnection { disconnection, connection } => {
                write!(f, "connection {connection} undoes disconnection {disconnection}")
            }
            NfViolation::UndoneElectron { disconnection, connection } => {
                write!(f, "connection {connection} undoes electron transfer {disconnection}")
            }
            NfViolation::UndoneIonic { disconnection, connection } => {
                write!(f, "ionic connection {connection} undoes {disconnection} without a charge change")
            }
        }
    }
}

/// A term verified to be in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    term: TypedTerm,
    sets: NameSets,
    split: RenamingSplit,
}

impl NormalForm {
    pub fn new(term: TypedTerm) -> Result<Self, NfViolation> {
        let (sets, split) = analyse(&term)?;
        match violations(&term, &sets, &split).into_iter().next() {
            Some(v) => Err(v),
            None => Ok(NormalForm { term, sets, split }),
        }
    }

    pub fn term(&self) -> &TypedTerm {
        &self.term
    }

    pub fn sets(&self) -> &NameSets {
        &self.sets
    }

    pub fn split(&self) -> &RenamingSplit {
        &self.split
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.term.fmt(f)
    }
}

/// Checks every normal form condition, returning the name sets on success.
pub fn check_normal_form(t: &TypedTerm) -> Result<NameSets, NfViolation> {
    NormalForm::new(t.clone()).map(|nf| nf.sets)
}

fn rule_at(t: &TypedTerm, i: usize) -> Option<&RuleApp> {
    t.atoms()[i].rule()
}

fn analyse(t: &TypedTerm) -> Result<(NameSets, RenamingSplit), NfViolation> {
    let atoms = t.atoms();
    if let Some(index) = atoms.iter().position(|a| matches!(a, Atom::Id)) {
        return Err(NfViolation::NotIce { index });
    }
    if let Some(index) = (0..atoms.len().saturating_sub(1)).find(|&i| atoms[i].block() > atoms[i + 1].block()) {
        return Err(NfViolation::NotIce { index });
    }
    let split = split(t).ok_or(NfViolation::NotRenamingForm)?;
    let mut sets = NameSets { a: split.a.clone(), b: split.b.clone(), c: split.c.clone(), d: split.d.clone(), ..Default::default() };
    for a in atoms {
        match a {
            Atom::Rule(r) => {
                sets.u.extend(r.upper());
                let lower = if r.is_disconnect() { &mut sets.d_add } else { &mut sets.d_remove };
                lower.extend(r.lower());
            }
            Atom::Touch(u) => {
                sets.s.insert(u.clone());
            }
            _ => {}
        }
    }
    Ok((sets, split))
}

/// All violations of conditions 1 to 8, in condition order.
fn violations(t: &TypedTerm, sets: &NameSets, split: &RenamingSplit) -> Vec<NfViolation> {
    let atoms = t.atoms();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (index, a) in atoms.iter().enumerate() {
        if let Atom::Touch(u) = a {
            if !seen.insert(u.clone()) {
                out.push(NfViolation::DuplicateTouch { index, name: u.clone() });
            }
        }
    }
    for (index, a) in atoms.iter().enumerate() {
        if let Atom::Touch(u) = a {
            if sets.u.contains(u) || sets.a.contains(u) || sets.b.contains(u) {
                out.push(NfViolation::TouchOverlap { index, name: u.clone() });
            }
        }
    }
    let created: BTreeMap<Name, usize> = atoms
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.rule().filter(|r| r.is_disconnect()).map(|r| (i, r)))
        .flat_map(|(i, r)| r.lower().into_iter().map(move |x| (x, i)))
        .collect();
    for (x, &index) in &created {
        if !sets.d_remove.contains(x) && !(sets.a.contains(x) && !sets.d.contains(x)) {
            out.push(NfViolation::CreatedNotRenamed { index, name: x.clone() });
        }
    }
    for (x, &index) in &created {
        if sets.b.contains(x) {
            out.push(NfViolation::CreatedRenamedInto { index, name: x.clone() });
        }
    }
    for (j, a) in atoms.iter().enumerate() {
        let Some(r) = a.rule().filter(|r| !r.is_disconnect()) else { continue };
        for k in split.start..split.end {
            let Atom::Ren(z, target) = &atoms[k] else { continue };
            if !r.lower().contains(target) || r.mentions(z) {
                continue;
            }
            if substitute(r, target, z).is_some_and(|r2| r2.applies_to(&t.graphs()[j])) {
                out.push(NfViolation::ConnectionRename { connection: j, renaming: k });
            }
        }
    }
    let pairs = |pred: &dyn Fn(&RuleApp, &RuleApp) -> bool| -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 0..atoms.len() {
            let Some(p) = rule_at(t, i).filter(|r| r.is_disconnect()) else { continue };
            for j in 0..atoms.len() {
                let Some(q) = rule_at(t, j).filter(|r| !r.is_disconnect()) else { continue };
                if pred(p, q) {
                    v.push((i, j));
                }
            }
        }
        v
    };
    let undone = |p: &RuleApp, q: &RuleApp| {
        !matches!(p.kind(), RuleKind::Ion { .. })
            && same_kind(p, q)
            && (p.upper() == q.upper() || flip_cov(q).is_some_and(|f| f.upper() == p.upper()))
    };
    for (disconnection, connection) in pairs(&undone) {
        out.push(NfViolation::UndoneDisconnection { disconnection, connection });
    }
    let electron = |p: &RuleApp, q: &RuleApp| {
        matches!((p.kind(), q.kind()), (RuleKind::ENonneg { u, .. }, RuleKind::ENonneg { u: w, .. }) if u == w)
    };
    for (disconnection, connection) in pairs(&electron) {
        out.push(NfViolation::UndoneElectron { disconnection, connection });
    }
    let ionic = |p: &RuleApp, q: &RuleApp| {
        matches!((p.kind(), q.kind()), (RuleKind::Ion { .. }, RuleKind::Ion { .. })) && p.upper() == q.upper()
    };
    for (disconnection, connection) in pairs(&ionic) {
        let v = &rule_at(t, disconnection).expect("rule").upper()[1];
        let charged = atoms.iter().filter_map(|a| a.rule()).any(|r| match r.kind() {
            RuleKind::ENeg { u, .. } | RuleKind::ENonneg { u, .. } => u == v,
            _ => false,
        });
        if !charged {
            out.push(NfViolation::UndoneIonic { disconnection, connection });
        }
    }
    out
}

/// Position of a violation in the repair order: cancellations first, touches last.
fn priority(v: &NfViolation) -> u8 {
    match v.condition() {
        7 => 0,
        6 => 1,
        8 => 2,
        5 => 3,
        3 | 4 => 4,
        _ => 5,
    }
}

/// Substitution over a set of name pairs, applied in one direction or as a swap.
#[derive(Clone, Copy)]
enum Link {
    Forward,
    Backward,
    Swap,
}

fn relink(atoms: &[Atom], links: &[(Name, Name)], mode: Link) -> Option<Vec<Atom>> {
    let f = |x: &Name| {
        for (p, q) in links {
            match mode {
                Link::Forward if x == p => return q.clone(),
                Link::Backward if x == q => return p.clone(),
                Link::Swap if x == p => return q.clone(),
                Link::Swap if x == q => return p.clone(),
                _ => {}
            }
        }
        x.clone()
    };
    atoms.iter().map(|a| a.map_names(f).ok()).collect()
}

impl Engine {
    fn snapshot(&self) -> (Vec<Atom>, Vec<crate::graph::ChemGraph>, usize) {
        (self.atoms.clone(), self.graphs.clone(), self.trace.len())
    }

    fn restore(&mut self, s: (Vec<Atom>, Vec<crate::graph::ChemGraph>, usize)) {
        self.atoms = s.0;
        self.graphs = s.1;
        self.trace.truncate(s.2);
    }

    /// Rewrites an ICE-form term until every normal form condition holds.
    pub(crate) fn normal_form(&mut self) -> Result<(), NormalizeError> {
        let mut seen = HashSet::new();
        loop {
            self.ice()?;
            self.renaming_form()?;
            let t = self.typed();
            let (sets, split) = analyse(&t).map_err(|v| self.stuck(format!("shape lost: {v}")))?;
            let mut vs = violations(&t, &sets, &split);
            if vs.is_empty() {
                return Ok(());
            }
            if !seen.insert(Term(self.atoms.clone()).to_string()) {
                return Err(self.stuck(format!("no progress repairing: {}", vs[0])));
            }
            vs.sort_by_key(priority);
            let mut fixed = false;
            for v in &vs {
                if self.repair(v)? {
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                return Err(self.stuck(format!("cannot repair: {}", vs[0])));
            }
        }
    }

    fn repair(&mut self, v: &NfViolation) -> Result<bool, NormalizeError> {
        match *v {
            NfViolation::DuplicateTouch { index, .. } | NfViolation::TouchOverlap { index, .. } => {
                let mut new = self.atoms.clone();
                new.remove(index);
                let n = self.atoms.len();
                self.rewrite(0, n, new, "sabsorb")
            }
            NfViolation::CreatedNotRenamed { index, ref name } | NfViolation::CreatedRenamedInto { index, ref name } => {
                let Some(r) = self.atoms[index].rule().cloned() else { return Ok(false) };
                let z = self.fresh();
                let Some(r2) = substitute(&r, name, &z) else { return Ok(false) };
                self.rewrite(index, index + 1, vec![Atom::Rule(r2), Atom::Ren(z, name.clone())], "rd3")
            }
            NfViolation::ConnectionRename { connection, renaming } => self.repair_connection_rename(connection, renaming),
            NfViolation::UndoneDisconnection { disconnection, connection }
            | NfViolation::UndoneElectron { disconnection, connection }
            | NfViolation::UndoneIonic { disconnection, connection } => {
                Ok(self.cancel_pair(disconnection, connection)? || self.exchange_then_cancel(disconnection, connection)?)
            }
            NfViolation::NotIce { .. } | NfViolation::NotRenamingForm => Ok(false),
        }
    }

    fn repair_connection_rename(&mut self, j: usize, k: usize) -> Result<bool, NormalizeError> {
        let (Some(r), Atom::Ren(z, a)) = (self.atoms[j].rule().cloned(), self.atoms[k].clone()) else {
            return Ok(false);
        };
        let Some(r2) = substitute(&r, &a, &z) else { return Ok(false) };
        let links = [(z.clone(), a.clone())];
        for mode in [Link::Swap, Link::Forward, Link::Backward] {
            let Some(middle) = relink(&self.atoms[j + 1..k], &links, mode) else { continue };
            let mut new = self.atoms[..j].to_vec();
            new.push(Atom::Rule(r2.clone()));
            new.extend(middle);
            new.push(Atom::Touch(a.clone()));
            new.extend_from_slice(&self.atoms[k + 1..]);
            let n = self.atoms.len();
            if self.rewrite(0, n, new, "ids2")? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The `d ; ~d` cancellation of two adjacent atoms, with the names it identifies.
    fn cancellation(&mut self, p: &RuleApp, q: &RuleApp) -> Option<(Vec<Atom>, Vec<(Name, Name)>, &'static str)> {
        let touches = |r: &RuleApp| r.upper().into_iter().map(Atom::Touch).collect::<Vec<_>>();
        match (p.kind(), q.kind()) {
            (RuleKind::ENonneg { u, v }, RuleKind::ENonneg { u: u2, v: w }) if u == u2 => {
                if v == w {
                    Some((touches(p), Vec::new(), "ddbar4"))
                } else {
                    let z = self.fresh();
                    let new = vec![
                        Atom::Touch(u.clone()),
                        Atom::Ren(v.clone(), z.clone()),
                        Atom::Ren(w.clone(), v.clone()),
                        Atom::Ren(z, w.clone()),
                    ];
                    Some((new, vec![(v.clone(), w.clone())], "eebar"))
                }
            }
            _ if same_kind(p, q) && p.upper() == q.upper() => {
                let (pl, ql) = (p.lower(), q.lower());
                if pl == ql {
                    return Some((touches(p), Vec::new(), "ddbar4"));
                }
                let mut new = touches(p);
                let mut links = Vec::new();
                for (x, y) in pl.iter().zip(ql.iter()) {
                    if x != y {
                        new.push(Atom::Ren(y.clone(), x.clone()));
                        links.push((x.clone(), y.clone()));
                    }
                }
                Some((new, links, "ddbar1"))
            }
            _ => None,
        }
    }

    /// Moves the atom at `from` to just after `to` (`from < to`) by swaps, undoing on failure.
    fn carry_right(&mut self, from: usize, to: usize) -> Result<bool, NormalizeError> {
        let snap = self.snapshot();
        for k in from..to {
            if !self.swap(k, "comm")? {
                self.restore(snap);
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Moves the atom at `from` to just before `to` (`to < from`) by swaps, undoing on failure.
    fn carry_left(&mut self, from: usize, to: usize) -> Result<bool, NormalizeError> {
        let snap = self.snapshot();
        for k in (to..from).rev() {
            if !self.swap(k, "comm")? {
                self.restore(snap);
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exchanges two alpha vertices with the same charge and neighbours from some
    /// point between `i` and `j` on, renaming them back at the end, so that the
    /// connection at `j` consumes what the disconnection at `i` created; then cancels.
    fn exchange_then_cancel(&mut self, i: usize, j: usize) -> Result<bool, NormalizeError> {
        let n = self.atoms.len();
        for m in i + 1..=j {
            let g = self.graphs[m].clone();
            let alphas: Vec<Name> = g.vertices().filter(|v| g.is_alpha(v)).cloned().collect();
            for (k, x) in alphas.iter().enumerate() {
                for y in &alphas[k + 1..] {
                    if g.charge(x) != g.charge(y) || g.neighbours(x).ok() != g.neighbours(y).ok() {
                        continue;
                    }
                    let links = [(x.clone(), y.clone())];
                    let Some(mut new) = relink(&self.atoms[m..], &links, Link::Swap) else { continue };
                    let end = &self.graphs[n];
                    match (end.contains(x), end.contains(y)) {
                        (true, true) => {
                            let f = self.fresh();
                            new.extend([Atom::Ren(y.clone(), f.clone()), Atom::Ren(x.clone(), y.clone()), Atom::Ren(f, x.clone())]);
                        }
                        (true, false) => new.push(Atom::Ren(y.clone(), x.clone())),
                        (false, true) => new.push(Atom::Ren(x.clone(), y.clone())),
                        (false, false) => {}
                    }
                    let snap = self.snapshot();
                    if self.rewrite(m, n, new, "alpha-exchange")? && self.cancel_pair(i, j)? {
                        return Ok(true);
                    }
                    self.restore(snap);
                }
            }
        }
        Ok(false)
    }

    /// Brings a disconnection and a later connection undoing it together and cancels them.
    pub(crate) fn cancel_pair(&mut self, i: usize, j: usize) -> Result<bool, NormalizeError> {
        let snap = self.snapshot();
        let (mut i, mut j) = (i, j);
        if let (Some(p), Some(q)) = (self.atoms[i].rule().cloned(), self.atoms[j].rule().cloned()) {
            if same_kind(&p, &q) && p.upper() != q.upper() && nonneg_alpha(&p).is_none() {
                if let Some(f) = flip_cov(&q).filter(|f| f.upper() == p.upper()) {
                    if !self.rewrite(j, j + 1, vec![Atom::Rule(f)], "cs")? {
                        return Ok(false);
                    }
                }
            }
        }
        while j > i + 1 {
            if self.swap(i, "comm")? {
                i += 1;
            } else if self.swap(j - 1, "comm")? {
                j -= 1;
            } else if self.carry_right(i + 1, j)? {
                j -= 1;
            } else if self.carry_left(j - 1, i)? {
                i += 1;
            } else {
                break;
            }
        }
        let (Some(p), Some(q)) = (self.atoms[i].rule().cloned(), self.atoms[j].rule().cloned()) else {
            self.restore(snap);
            return Ok(false);
        };
        let Some((repl, links, rule)) = self.cancellation(&p, &q) else {
            self.restore(snap);
            return Ok(false);
        };
        if j == i + 1 && self.rewrite(i, j + 1, repl.clone(), rule)? {
            return Ok(true);
        }
        let n = self.atoms.len();
        for mode in [Link::Forward, Link::Swap, Link::Backward] {
            let Some(middle) = relink(&self.atoms[i + 1..j], &links, mode) else { continue };
            let mut at_j = self.atoms[..i].to_vec();
            at_j.extend(middle.iter().cloned());
            at_j.extend(repl.iter().cloned());
            at_j.extend_from_slice(&self.atoms[j + 1..]);
            if self.rewrite(0, n, at_j, rule)? {
                return Ok(true);
            }
            let mut at_i = self.atoms[..i].to_vec();
            at_i.extend(repl.iter().cloned());
            at_i.extend(middle);
            at_i.extend_from_slice(&self.atoms[j + 1..]);
            if self.rewrite(0, n, at_i, rule)? {
                return Ok(true);
            }
        }
        self.restore(snap);
        Ok(false)
    }
}
