//! Equational normalization: ICE-form, renaming form, normal form,
//! canonical representatives and the equality deciders.
//!
//! Every rewrite is applied to a window of a typed term. The replacement is
//! re-elaborated from the window's input graph and must reach the same output
//! graph with the same functor image, so a rewrite can never change what the
//! term denotes.

mod canon;
mod ice;
mod normal_form;
mod renaming;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{ChemGraph, FreshNames, Name};
use crate::semantics::{functor_image, regions_of};
use crate::term::{Atom, Term, TermError, TypedTerm};

pub use canon::{canonicalize_nf, nf_equivalent};
pub use normal_form::{check_normal_form, NameSets, NfViolation, NormalForm};
pub use renaming::RenamingSplit;

/// One applied rewrite: the identity used and the index of the window it started at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: &'static str,
    pub index: usize,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @{}", self.rule, self.index)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("normalization stuck: {message} (after {} steps, at `{term}`)", trace.len())]
    Stuck { message: String, term: String, trace: Vec<Step> },
    #[error("terms have different endpoints")]
    EndpointMismatch,
    #[error(transparent)]
    Term(#[from] TermError),
}

pub(crate) struct Engine {
    pub atoms: Vec<Atom>,
    pub graphs: Vec<ChemGraph>,
    pub trace: Vec<Step>,
    fresh: FreshNames,
    budget: usize,
}

impl Engine {
    pub fn new(t: &TypedTerm) -> Self {
        let mut taken: BTreeSet<Name> = t.term().names();
        for g in t.graphs() {
            taken.extend(g.vertices().cloned());
        }
        let n = t.len() + 4;
        Engine {
            atoms: t.atoms().to_vec(),
            graphs: t.graphs().to_vec(),
            trace: Vec::new(),
            fresh: FreshNames::with_prefix("_n", taken.iter()),
            budget: 20_000 + 400 * n * n,
        }
    }

    pub fn typed(&self) -> TypedTerm {
        TypedTerm::from_parts(self.atoms.clone(), self.graphs.clone())
    }

    pub fn fresh(&mut self) -> Name {
        self.fresh.fresh()
    }

    pub fn stuck(&self, message: impl Into<String>) -> NormalizeError {
        NormalizeError::Stuck { message: message.into(), term: Term(self.atoms.clone()).to_string(), trace: self.trace.clone() }
    }

    /// Replaces `atoms[start..end]` by `new` if the guard accepts it.
    pub fn rewrite(&mut self, start: usize, end: usize, new: Vec<Atom>, rule: &'static str) -> Result<bool, NormalizeError> {
        let mut graphs = Vec::with_capacity(new.len());
        let mut g = self.graphs[start].clone();
        for a in &new {
            match a.step(&g) {
                Ok(next) => {
                    graphs.push(next.clone());
                    g = next;
                }
                Err(_) => return Ok(false),
            }
        }
        if g != self.graphs[end] || regions_of(&self.atoms[start..end]) != regions_of(&new) {
            return Ok(false);
        }
        if self.trace.len() >= self.budget {
            return Err(self.stuck("step budget exhausted"));
        }
        // graphs[start] is kept; the window's outputs are replaced, the last of which equals graphs[end].
        graphs.pop();
        self.graphs.splice(start + 1..end, graphs);
        self.atoms.splice(start..end, new);
        self.trace.push(Step { rule, index: start });
        Ok(true)
    }

    /// Swaps the atoms at `i` and `i + 1` if the guard accepts it.
    pub fn swap(&mut self, i: usize, rule: &'static str) -> Result<bool, NormalizeError> {
        let new = vec![self.atoms[i + 1].clone(), self.atoms[i].clone()];
        self.rewrite(i, i + 2, new, rule)
    }
}

/// Rewrites a typed term into ICE block order.
pub fn to_ice_form(t: &TypedTerm) -> Result<TypedTerm, NormalizeError> {
    let mut e = Engine::new(t);
    e.ice()?;
    Ok(e.typed())
}

/// Rewrites a sequence of renamings into `A ; B ; S` renaming form.
pub fn to_renaming_form(t: &TypedTerm) -> Result<(TypedTerm, RenamingSplit), NormalizeError> {
    if t.atoms().iter().any(|a| !matches!(a, Atom::Ren(..) | Atom::Touch(_) | Atom::Id)) {
        return Err(NormalizeError::Stuck {
            message: "renaming form applies to renamings and touches only".into(),
            term: t.to_string(),
            trace: Vec::new(),
        });
    }
    let mut e = Engine::new(t);
    e.ice()?;
    e.renaming_form()?;
    let typed = e.typed();
    let split = renaming::split(&typed).ok_or_else(|| e.stuck("renaming form not reached"))?;
    Ok((typed, split))
}

/// Normalizes a typed term, returning the normal form with its rewrite trace.
pub fn to_normal_form_traced(t: &TypedTerm) -> Result<(NormalForm, Vec<Step>), NormalizeError> {
    let mut e = Engine::new(t);
    e.normal_form()?;
    let typed = e.typed();
    let nf = NormalForm::new(typed).map_err(|v| e.stuck(format!("normal form check failed: {v}")))?;
    Ok((nf, e.trace))
}

pub fn to_normal_form(t: &TypedTerm) -> Result<NormalForm, NormalizeError> {
    to_normal_form_traced(t).map(|(nf, _)| nf)
}

/// Canonical normal form of a typed term.
pub fn canonical_form(t: &TypedTerm) -> Result<NormalForm, NormalizeError> {
    Ok(canonicalize_nf(&to_normal_form(t)?))
}

/// Outcome of [`eq_terms`]: the verdicts of both deciders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equality {
    pub semantic: bool,
    pub syntactic: bool,
}

impl Equality {
    pub fn agree(&self) -> bool {
        self.semantic == self.syntactic
    }
}

/// Decides `t = s` from `src`, both by comparing functor images and by comparing
/// canonical normal forms.
pub fn eq_terms(t: &Term, s: &Term, src: &ChemGraph) -> Result<Equality, NormalizeError> {
    let t = t.elaborate(src)?;
    let s = s.elaborate(src)?;
    eq_typed(&t, &s)
}

pub fn eq_typed(t: &TypedTerm, s: &TypedTerm) -> Result<Equality, NormalizeError> {
    if t.source() != s.source() {
        return Err(NormalizeError::EndpointMismatch);
    }
    if t.target() != s.target() {
        return Ok(Equality { semantic: false, syntactic: false });
    }
    let semantic = functor_image(t) == functor_image(s);
    let syntactic = canonical_form(t)?.term().term() == canonical_form(s)?.term().term();
    Ok(Equality { semantic, syntactic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BondLabel;
    use crate::text::{parse_graph, parse_reaction};

    fn hh() -> ChemGraph {
        ChemGraph::new().with_vertex("u", "H", 0).with_vertex("v", "H", 0).with_bond("u", "v", BondLabel::Covalent(1))
    }

    fn typed(s: &str, g: &ChemGraph) -> TypedTerm {
        Term::parse(s).unwrap().elaborate(g).unwrap()
    }

    fn benzyl_source() -> ChemGraph {
        parse_graph(include_str!("../../fixtures/benzyl_source.graph")).unwrap().graph
    }

    #[test]
    fn cancelling_pair() {
        let nf = to_normal_form(&typed("C[u,v;a,b] ; ~C[u,v;a,b]", &hh())).unwrap();
        assert_eq!(nf.to_string(), "S[u] ; S[v]");
        let nf = to_normal_form(&typed("C[u,v;a,b] ; ~C[v,u;b,a]", &hh())).unwrap();
        assert_eq!(nf.to_string(), "S[u] ; S[v]");
    }

    #[test]
    fn ice_swaps_connection_past_disconnection() {
        let g = hh();
        let t = typed("C[u,v;a,b] ; ~C[u,v;a,b] ; C[u,v;c,d]", &g);
        let ice = to_ice_form(&t).unwrap();
        let blocks: Vec<_> = ice.atoms().iter().map(Atom::block).collect();
        assert!(blocks.windows(2).all(|w| w[0] <= w[1]), "{ice}");
        assert_eq!(regions_of(ice.atoms()), regions_of(t.atoms()));
    }

    #[test]
    fn renaming_examples() {
        let g = ChemGraph::new().with_vertex("a", "*", -1).with_vertex("b", "*", -1);
        let (rf, _) = to_renaming_form(&typed("R[a>a]", &g)).unwrap();
        assert_eq!(rf.to_string(), "S[a]");
        let (rf, split) = to_renaming_form(&typed("R[a>z] ; R[b>a] ; R[z>b]", &g)).unwrap();
        assert_eq!(rf.target(), typed("R[a>z] ; R[b>a] ; R[z>b]", &g).target());
        assert!(split.end > split.start || rf.atoms().iter().all(|a| matches!(a, Atom::Touch(_))), "{rf}");
    }

    #[test]
    fn golden_normal_form() {
        let file = crate::term::parse_term_file(include_str!("../../fixtures/example29.term")).unwrap();
        let t = file.terms[0].elaborate(&benzyl_source()).unwrap();
        assert_eq!(t.len(), 29);
        let nf = canonical_form(&t).unwrap();
        let expected = typed("C[z,u;a,b] ; C[v,w;c,d] ; ~C[w,z;d,a] ; ~C[u,v;b,c] ; S[r]", &benzyl_source());
        let expected = canonical_form(&expected).unwrap();
        assert_eq!(nf.to_string(), expected.to_string());
        assert_eq!(nf.term().len(), 5);
    }

    #[test]
    fn golden_decomposition() {
        let r = parse_reaction(include_str!("../../fixtures/benzyl.reaction")).unwrap();
        let d = crate::semantics::decompose(&r).unwrap();
        let nf = canonical_form(&d.term).unwrap();
        let expected = typed("C[z,u;a,b] ; C[v,w;c,d] ; ~C[w,z;d,a] ; ~C[u,v;b,c] ; S[r]", r.source());
        assert_eq!(nf.to_string(), canonical_form(&expected).unwrap().to_string());
    }
}
