//! Seeded generation of typable terms and of term pairs sharing endpoints.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{BondLabel, ChemGraph, Name};
use crate::rules::{RuleApp, RuleKind};
use crate::semantics::functor_image;
use crate::term::{Atom, TypedTerm};

/// Names the generator draws new vertices from, so that names get reused across atoms.
const POOL: [&str; 8] = ["p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"];

fn absent(g: &ChemGraph, avoid: &[Name]) -> Vec<Name> {
    POOL.iter().map(|s| Name::new(s)).filter(|n| !g.contains(n) && !avoid.contains(n)).collect()
}

fn attached_alphas(g: &ChemGraph, u: &Name) -> Vec<Name> {
    g.neighbours(u).map(|ns| ns.into_iter().filter(|w| g.is_alpha(w)).collect()).unwrap_or_default()
}

/// Every atom typable at `g`, with created names taken from the pool.
pub fn candidate_atoms(g: &ChemGraph) -> Vec<Atom> {
    let chem: Vec<Name> = g.vertices().filter(|v| g.is_chemical(v)).cloned().collect();
    let alphas: Vec<Name> = g.vertices().filter(|v| g.is_alpha(v)).cloned().collect();
    let free: Vec<Name> = alphas.iter().filter(|a| is_free(g, a)).cloned().collect();
    let fresh = absent(g, &[]);
    let pair = fresh.get(0..2).map(|p| (p[0].clone(), p[1].clone()));
    let mut rules: Vec<RuleApp> = Vec::new();
    let mut push = |kind: RuleKind, connect: bool| {
        let r = if connect { RuleApp::connect(kind) } else { RuleApp::disconnect(kind) };
        if let Ok(r) = r {
            if r.applies_to(g) {
                rules.push(r);
            }
        }
    };
    for u in &chem {
        if let Some((a, b)) = &pair {
            push(RuleKind::ENeg { u: u.clone(), a: a.clone(), b: b.clone() }, false);
        }
        for v in attached_alphas(g, u) {
            push(RuleKind::ENonneg { u: u.clone(), v }, false);
        }
        for a in attached_alphas(g, u) {
            for b in &free {
                push(RuleKind::ENeg { u: u.clone(), a: a.clone(), b: b.clone() }, true);
            }
        }
        for v in &free {
            push(RuleKind::ENonneg { u: u.clone(), v: v.clone() }, true);
        }
        for v in &chem {
            if u == v {
                continue;
            }
            match g.bond(u, v) {
                BondLabel::Ionic => push(RuleKind::Ion { u: u.clone(), v: v.clone() }, false),
                BondLabel::Covalent(k) if k > 0 => {
                    if let Some((a, b)) = &pair {
                        push(RuleKind::Cov { u: u.clone(), v: v.clone(), a: a.clone(), b: b.clone() }, false);
                    }
                }
                _ => push(RuleKind::Ion { u: u.clone(), v: v.clone() }, true),
            }
            for a in attached_alphas(g, u) {
                for b in attached_alphas(g, v) {
                    push(RuleKind::Cov { u: u.clone(), v: v.clone(), a: a.clone(), b }, true);
                }
            }
        }
    }
    let mut atoms: Vec<Atom> = rules.into_iter().map(Atom::Rule).collect();
    for a in &alphas {
        if let Some(z) = fresh.first() {
            atoms.push(Atom::Ren(a.clone(), z.clone()));
        }
    }
    for v in g.vertices().take(3) {
        atoms.push(Atom::Touch(v.clone()));
    }
    atoms
}

fn is_free(g: &ChemGraph, a: &Name) -> bool {
    g.neighbours(a).map(|n| n.is_empty()).unwrap_or(false)
}

/// Picks a candidate, preferring rules over renamings and touches.
fn pick<R: Rng>(rng: &mut R, atoms: &[Atom]) -> Option<Atom> {
    atoms
        .choose_weighted(rng, |a| match a {
            Atom::Rule(_) => 6u32,
            Atom::Ren(..) => 2,
            _ => 1,
        })
        .ok()
        .cloned()
}

/// A random typable term of at most `max_len` atoms from `source`.
pub fn random_term<R: Rng>(rng: &mut R, source: &ChemGraph, max_len: usize) -> TypedTerm {
    let len = rng.gen_range(0..=max_len);
    let mut atoms = Vec::new();
    let mut g = source.clone();
    for _ in 0..len {
        let Some(a) = pick(rng, &candidate_atoms(&g)) else { break };
        g = a.step(&g).expect("candidates are typable");
        atoms.push(a);
    }
    TypedTerm::elaborate(atoms, source.clone()).expect("built step by step")
}

/// How a pair of terms was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// Rewritten by image-preserving edits.
    Rewritten,
    /// Edited so that the image changes while the endpoints stay.
    Perturbed,
    /// A term followed by a random term and its bar.
    Excursion,
}

/// One random edit of `atoms`: swap two neighbours, insert a touch, insert a round trip.
fn edit<R: Rng>(rng: &mut R, t: &TypedTerm) -> Option<Vec<Atom>> {
    let atoms = t.atoms();
    let n = atoms.len();
    let mut out = atoms.to_vec();
    match rng.gen_range(0..4) {
        0 if n >= 2 => {
            let i = rng.gen_range(0..n - 1);
            out.swap(i, i + 1);
        }
        1 => {
            let i = rng.gen_range(0..=n);
            let g = &t.graphs()[i];
            let v = g.vertices().collect::<Vec<_>>().choose(rng).cloned()?.clone();
            out.insert(i, Atom::Touch(v));
        }
        2 => {
            let i = rng.gen_range(0..=n);
            let g = &t.graphs()[i];
            let a = g.vertices().filter(|v| g.is_alpha(v)).collect::<Vec<_>>().choose(rng).cloned()?.clone();
            let z = absent(g, &t.term().names().into_iter().collect::<Vec<_>>()).first()?.clone();
            out.splice(i..i, [Atom::Ren(a.clone(), z.clone()), Atom::Ren(z, a)]);
        }
        _ => {
            let i = rng.gen_range(0..=n);
            let g = &t.graphs()[i];
            let d = candidate_atoms(g).into_iter().filter(|a| a.rule().is_some()).collect::<Vec<_>>().choose(rng)?.clone();
            let back = d.bar();
            out.splice(i..i, [d, back]);
        }
    }
    Some(out)
}

/// A term `s` with the endpoints of `t`, built by up to `edits` random edits and
/// kept only when the image relation matches `kind`.
pub fn related_term<R: Rng>(rng: &mut R, t: &TypedTerm, kind: PairKind, edits: usize) -> Option<TypedTerm> {
    if kind == PairKind::Excursion {
        let u = random_term(rng, t.target(), 3);
        return t.then(&u).ok()?.then(&u.bar()).ok();
    }
    let image = functor_image(t);
    let mut cur = t.clone();
    let mut changed = false;
    for _ in 0..edits * 4 {
        let Some(atoms) = edit(rng, &cur) else { continue };
        let Ok(next) = TypedTerm::elaborate(atoms, t.source().clone()) else { continue };
        if next.target() != t.target() || next.len() > t.len() + 8 {
            continue;
        }
        let same = functor_image(&next) == image;
        match kind {
            PairKind::Rewritten if same => cur = next,
            PairKind::Perturbed if !same && !changed => {
                cur = next;
                changed = true;
            }
            PairKind::Perturbed if changed && functor_image(&next) == functor_image(&cur) => cur = next,
            _ => {}
        }
    }
    (kind == PairKind::Rewritten || changed).then_some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn water() -> ChemGraph {
        ChemGraph::new()
            .with_vertex("o", "O", 0)
            .with_vertex("h1", "H", 0)
            .with_vertex("h2", "H", 0)
            .with_bond("o", "h1", BondLabel::Covalent(1))
            .with_bond("o", "h2", BondLabel::Covalent(1))
    }

    #[test]
    fn generated_terms_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut lengths = 0;
        for _ in 0..200 {
            let t = random_term(&mut rng, &water(), 10);
            assert!(t.term().types_from(&water()).is_some());
            lengths += t.len();
        }
        assert!(lengths > 500, "generator rarely extends terms");
    }

    #[test]
    fn related_terms_keep_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [PairKind::Rewritten, PairKind::Perturbed, PairKind::Excursion] {
            for _ in 0..30 {
                let t = random_term(&mut rng, &water(), 6);
                if let Some(s) = related_term(&mut rng, &t, kind, 4) {
                    assert_eq!(s.source(), t.source());
                    assert_eq!(s.target(), t.target());
                    if kind == PairKind::Rewritten {
                        assert_eq!(functor_image(&s), functor_image(&t));
                    }
                }
            }
        }
    }
}
