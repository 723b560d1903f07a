//! Sorting a term into ICE block order by adjacent rewrites.

use crate::graph::Name;
use crate::rules::{RuleApp, RuleKind};
use crate::term::Atom;

use super::{Engine, NormalizeError};

/// `r` with every occurrence of `from` replaced by `to`.
pub(crate) fn substitute(r: &RuleApp, from: &Name, to: &Name) -> Option<RuleApp> {
    r.map_names(|x| if x == from { to.clone() } else { x.clone() }).ok()
}

/// The same covalent rule with its two ends exchanged.
pub(crate) fn flip_cov(r: &RuleApp) -> Option<RuleApp> {
    match r.kind() {
        RuleKind::Cov { u, v, a, b } => {
            let kind = RuleKind::Cov { u: v.clone(), v: u.clone(), a: b.clone(), b: a.clone() };
            RuleApp::new(kind, r.direction()).ok()
        }
        _ => None,
    }
}

pub(crate) fn same_kind(p: &RuleApp, q: &RuleApp) -> bool {
    std::mem::discriminant(p.kind()) == std::mem::discriminant(q.kind())
}

/// The alpha superscript of an `E[u,v]` rule.
pub(crate) fn nonneg_alpha(r: &RuleApp) -> Option<&Name> {
    match r.kind() {
        RuleKind::ENonneg { v, .. } => Some(v),
        _ => None,
    }
}

impl Engine {
    /// Rewrites until every adjacent pair is in block order.
    pub fn ice(&mut self) -> Result<(), NormalizeError> {
        loop {
            if let Some(i) = self.atoms.iter().position(|a| matches!(a, Atom::Id)) {
                if !self.rewrite(i, i + 1, Vec::new(), "unit")? {
                    return Err(self.stuck("identity atom could not be removed"));
                }
                continue;
            }
            if let Some(i) = self.atoms.iter().position(|a| matches!(a, Atom::Ren(u, v) if u == v)) {
                let Atom::Ren(u, _) = self.atoms[i].clone() else { unreachable!() };
                if !self.rewrite(i, i + 1, vec![Atom::Touch(u)], "refl")? {
                    return Err(self.stuck("reflexive renaming could not be replaced"));
                }
                continue;
            }
            let Some(i) = (0..self.atoms.len().saturating_sub(1))
                .find(|&i| self.atoms[i].block() > self.atoms[i + 1].block())
            else {
                return Ok(());
            };
            if !self.fix(i)? {
                let msg = format!("cannot reorder `{}` and `{}` at {i}", self.atoms[i], self.atoms[i + 1]);
                return Err(self.stuck(msg));
            }
        }
    }

    /// Moves `atoms[i]` past `atoms[i + 1]`, absorbing or renaming where a plain swap is not an identity.
    pub(crate) fn fix(&mut self, i: usize) -> Result<bool, NormalizeError> {
        let (x, y) = (self.atoms[i].clone(), self.atoms[i + 1].clone());
        match (&x, &y) {
            (Atom::Touch(u), Atom::Ren(a, _)) => {
                if u == a {
                    self.rewrite(i, i + 2, vec![y.clone()], "sr2")
                } else {
                    self.swap(i, "sr1")
                }
            }
            (Atom::Touch(u), Atom::Rule(r)) => {
                if r.upper().contains(u) || (!r.is_disconnect() && r.lower().contains(u)) {
                    self.rewrite(i, i + 2, vec![y.clone()], "sd2")
                } else {
                    self.swap(i, "sd1")
                }
            }
            (Atom::Ren(u, v), Atom::Rule(r)) => {
                if !r.is_disconnect() && r.lower().contains(v) {
                    let Some(r2) = substitute(r, v, u) else { return Ok(false) };
                    self.rewrite(i, i + 2, vec![Atom::Rule(r2)], "rd3")
                } else if nonneg_alpha(r) == Some(v) {
                    let Some(r2) = substitute(r, v, u) else { return Ok(false) };
                    self.rewrite(i, i + 2, vec![Atom::Rule(r2), x.clone()], "rd2")
                } else if r.is_disconnect() && r.lower().contains(u) {
                    let z = self.fresh();
                    let Some(r2) = substitute(r, u, &z) else { return Ok(false) };
                    self.rewrite(i, i + 2, vec![Atom::Rule(r2), x.clone(), Atom::Ren(z, u.clone())], "rd3")
                } else {
                    self.swap(i, "rd1")
                }
            }
            (Atom::Rule(p), Atom::Rule(q)) => self.fix_rules(i, p.clone(), q.clone()),
            _ => Ok(false),
        }
    }

    fn fix_rules(&mut self, i: usize, p: RuleApp, q: RuleApp) -> Result<bool, NormalizeError> {
        if self.swap(i, "comm")? {
            return Ok(true);
        }
        if p.is_disconnect() || !q.is_disconnect() {
            return Ok(false);
        }
        if self.cancel_connection_pair(i, &p, &q)? {
            return Ok(true);
        }
        // A disconnection reusing names freed by the connection before it.
        if !q.lower().is_empty() {
            let lower = q.lower();
            let (fi, fj) = (self.fresh(), self.fresh());
            let renamed = q.map_names(|x| {
                if *x == lower[0] {
                    fi.clone()
                } else if *x == lower[1] {
                    fj.clone()
                } else {
                    x.clone()
                }
            });
            if let Ok(q2) = renamed {
                let new = vec![
                    Atom::Rule(q2),
                    Atom::Rule(p.clone()),
                    Atom::Ren(fi, lower[0].clone()),
                    Atom::Ren(fj, lower[1].clone()),
                ];
                return self.rewrite(i, i + 2, new, "rd4");
            }
        }
        Ok(false)
    }

    /// Rewrites `~d ; d` on the same superscripts into touches and renamings.
    fn cancel_connection_pair(&mut self, i: usize, p: &RuleApp, q: &RuleApp) -> Result<bool, NormalizeError> {
        if !same_kind(p, q) {
            return Ok(false);
        }
        let mut p = p.clone();
        if p.upper() != q.upper() {
            let flipped = flip_cov(&p);
            match flipped {
                Some(f) if f.upper() == q.upper() => {
                    if !self.rewrite(i, i + 1, vec![Atom::Rule(f.clone())], "cs")? {
                        return Ok(false);
                    }
                    p = f;
                }
                _ => return Ok(false),
            }
        }
        let touches: Vec<Atom> = p.upper().into_iter().map(Atom::Touch).collect();
        if p.lower() == q.lower() {
            let mut new = touches;
            new.extend(p.lower().into_iter().map(Atom::Touch));
            return self.rewrite(i, i + 2, new, "ddbar4-2");
        }
        let (pl, ql) = (p.lower(), q.lower());
        if pl.len() != 2 {
            return Ok(false);
        }
        let j = self.fresh();
        let mut new = touches;
        new.extend([
            Atom::Ren(pl[0].clone(), j.clone()),
            Atom::Ren(pl[1].clone(), ql[1].clone()),
            Atom::Ren(j, ql[0].clone()),
        ]);
        self.rewrite(i, i + 2, new, "ids0")
    }
}
