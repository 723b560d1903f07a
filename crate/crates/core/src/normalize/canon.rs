//! Canonical representatives of normal forms up to the normal form equivalence.
//!
//! Block-internal order, the orientation of covalent rules and the names of
//! dummy vertices are fixed directly: rules are oriented, each block is sorted
//! by a key that ignores dummy names, and dummies are renumbered in order of
//! first occurrence. The remaining moves (exchanging subscripts of repeated
//! rules, exchanging equivalent renaming sources, exchanging a connection
//! subscript with a renaming source) are explored breadth first; the least
//! printed term found is the canonical one. A further move exchanges two alpha
//! vertices with the same charge and neighbours from some point of the term on,
//! renames them back at the end and renormalizes; it is kept when the regions
//! stay the same.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::graph::{ChemGraph, Name};
use crate::rules::RuleKind;
use crate::semantics::regions_of;
use crate::term::{Atom, Block, TypedTerm};

use super::ice::{flip_cov, substitute};
use super::normal_form::NormalForm;

const MAX_STATES: usize = 4000;
const MAX_ORDERINGS: usize = 5040;

fn is_delim(c: char) -> bool {
    matches!(c, '[' | ']' | ',' | ';' | '>' | '~' | ' ')
}

/// The printed atom with every dummy name replaced by `?`.
fn masked(a: &Atom, dummies: &BTreeSet<Name>) -> String {
    let s = a.to_string();
    let mut out = String::new();
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if dummies.iter().any(|d| d.as_str() == token.as_str()) {
            out.push('?');
        } else {
            out.push_str(token);
        }
        token.clear();
    };
    for c in s.chars() {
        if is_delim(c) {
            flush(&mut token, &mut out);
            out.push(c);
        } else {
            token.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

fn orient(a: &Atom) -> Atom {
    match a {
        Atom::Rule(r) => match r.kind() {
            RuleKind::Cov { u, v, .. } if u > v => Atom::Rule(flip_cov(r).expect("distinct names")),
            _ => a.clone(),
        },
        _ => a.clone(),
    }
}

/// Segments whose atoms commute: the rule blocks, the two renaming blocks and the touches.
fn segments(atoms: &[Atom], mid: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=atoms.len() {
        let boundary = i == atoms.len() || atoms[i].block() != atoms[start].block() || (i == mid && atoms[i].block() == Block::R);
        if boundary {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Dummy names of a normal form: subscripts of disconnections and the intermediate renaming names.
fn dummies(nf: &NormalForm) -> BTreeSet<Name> {
    nf.sets().d_add.union(&nf.sets().c).cloned().collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for k in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(k, n - 1);
            out.push(p);
        }
    }
    out
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The least printing of `nf` over block orders and dummy numberings.
fn representative(nf: &NormalForm) -> Option<(String, TypedTerm)> {
    let t = nf.term();
    let atoms: Vec<Atom> = t.atoms().iter().map(orient).collect();
    let dummies = dummies(nf);
    let mut taken: BTreeSet<Name> = t.source().vertex_set();
    taken.extend(t.target().vertices().cloned());
    for a in &atoms {
        taken.extend(a.names().into_iter().filter(|n| !dummies.contains(n)));
    }
    let mut groups: Vec<Vec<Vec<Atom>>> = Vec::new();
    for seg in segments(&atoms, nf.split().mid) {
        let mut part: Vec<(String, Atom)> = atoms[seg].iter().map(|a| (masked(a, &dummies), a.clone())).collect();
        part.sort_by(|x, y| x.0.cmp(&y.0));
        let mut ties: Vec<Vec<Atom>> = Vec::new();
        for k in 0..part.len() {
            if k > 0 && part[k].0 == part[k - 1].0 {
                ties.last_mut().expect("nonempty").push(part[k].1.clone());
            } else {
                ties.push(vec![part[k].1.clone()]);
            }
        }
        groups.push(ties);
    }
    let tie_sizes: Vec<usize> = groups.iter().flatten().map(Vec::len).collect();
    let total = tie_sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(factorial(n.min(12))));
    let exhaustive = total.is_some_and(|t| t <= MAX_ORDERINGS);
    let choices: Vec<Vec<Vec<usize>>> = tie_sizes
        .iter()
        .map(|&n| if exhaustive { permutations(n) } else { vec![(0..n).collect()] })
        .collect();
    let mut best: Option<(String, TypedTerm)> = None;
    let mut index = vec![0usize; choices.len()];
    loop {
        let mut ordered: Vec<Vec<Atom>> = Vec::new();
        let mut k = 0;
        for seg in &groups {
            let mut seq = Vec::new();
            for tie in seg {
                for &p in &choices[k][index[k]] {
                    seq.push(tie[p].clone());
                }
                k += 1;
            }
            ordered.push(seq);
        }
        if let Some(candidate) = number(&ordered, &dummies, &taken, t.source()) {
            if best.as_ref().is_none_or(|b| candidate.0 < b.0) {
                best = Some(candidate);
            }
        }
        let mut pos = 0;
        loop {
            if pos == index.len() {
                return best;
            }
            index[pos] += 1;
            if index[pos] < choices[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Renames dummies in order of first occurrence, sorts each segment and prints.
fn number(
    segs: &[Vec<Atom>],
    dummies: &BTreeSet<Name>,
    taken: &BTreeSet<Name>,
    source: &ChemGraph,
) -> Option<(String, TypedTerm)> {
    let mut map: BTreeMap<Name, Name> = BTreeMap::new();
    let mut counter = 0;
    for a in segs.iter().flatten() {
        for n in a.names() {
            if dummies.contains(&n) && !map.contains_key(&n) {
                let fresh = loop {
                    let cand = Name::new(&format!("_g{counter}"));
                    counter += 1;
                    if !taken.contains(&cand) {
                        break cand;
                    }
                };
                map.insert(n, fresh);
            }
        }
    }
    let f = |x: &Name| map.get(x).cloned().unwrap_or_else(|| x.clone());
    let mut atoms = Vec::new();
    for seg in segs {
        let mut renamed: Vec<Atom> = seg.iter().map(|a| a.map_names(f)).collect::<Result<_, _>>().ok()?;
        renamed.sort_by_key(|a| a.to_string());
        atoms.extend(renamed);
    }
    let typed = TypedTerm::elaborate(atoms, source.clone()).ok()?;
    Some((typed.term().to_string(), typed))
}

/// Terms reachable from `nf` by one subscript exchange, renaming-source exchange or connection exchange.
fn neighbours(nf: &NormalForm) -> Vec<Vec<Atom>> {
    let t = nf.term();
    let atoms = t.atoms();
    let mut out = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let (Some(p), Some(q)) = (atoms[i].rule(), atoms[j].rule()) else { continue };
            if atoms[i].block() != atoms[j].block() || p.upper() != q.upper() || p.lower().len() != 2 {
                continue;
            }
            let (pl, ql) = (p.lower(), q.lower());
            let p2 = p.map_names(|x| if *x == pl[1] { ql[1].clone() } else { x.clone() });
            let q2 = q.map_names(|x| if *x == ql[1] { pl[1].clone() } else { x.clone() });
            if let (Ok(p2), Ok(q2)) = (p2, q2) {
                let mut new = atoms.to_vec();
                new[i] = Atom::Rule(p2);
                new[j] = Atom::Rule(q2);
                out.push(new);
            }
        }
    }
    let split = nf.split();
    let h = &t.graphs()[split.start];
    for i in split.start..split.mid {
        for j in i + 1..split.mid {
            let (Atom::Ren(a, b), Atom::Ren(c, d)) = (&atoms[i], &atoms[j]) else { continue };
            if h.neighbours(a).ok() == h.neighbours(c).ok() {
                let mut new = atoms.to_vec();
                new[i] = Atom::Ren(c.clone(), b.clone());
                new[j] = Atom::Ren(a.clone(), d.clone());
                out.push(new);
            }
        }
    }
    for (j, atom) in atoms.iter().enumerate() {
        let Some(r) = atom.rule().filter(|r| !r.is_disconnect() && !r.lower().is_empty()) else { continue };
        for k in split.start..split.end {
            let Atom::Ren(z, b) = &atoms[k] else { continue };
            for a in r.lower() {
                let Some(r2) = substitute(r, &a, z).filter(|r2| r2.applies_to(&t.graphs()[j])) else { continue };
                let mut new = atoms.to_vec();
                new[j] = Atom::Rule(r2);
                new[k] = Atom::Ren(a.clone(), b.clone());
                out.push(new.clone());
                for m in j + 1..k {
                    let swapped = new[m].map_names(|x| {
                        if x == z {
                            a.clone()
                        } else if *x == a {
                            z.clone()
                        } else {
                            x.clone()
                        }
                    });
                    match swapped {
                        Ok(s) => new[m] = s,
                        Err(_) => break,
                    }
                }
                out.push(new);
            }
        }
    }
    for j in 0..atoms.len() {
        let g = &t.graphs()[j];
        let alphas: Vec<&Name> = g.vertices().filter(|v| g.is_alpha(v)).collect();
        for (k, x) in alphas.iter().enumerate() {
            for y in &alphas[k + 1..] {
                if g.charge(x) != g.charge(y) || g.neighbours(x).ok() != g.neighbours(y).ok() {
                    continue;
                }
                let swap = |n: &Name| {
                    if n == *x {
                        (*y).clone()
                    } else if n == *y {
                        (*x).clone()
                    } else {
                        n.clone()
                    }
                };
                let Ok(tail) = atoms[j..].iter().map(|a| a.map_names(swap)).collect::<Result<Vec<_>, _>>() else { continue };
                let mut new = atoms[..j].to_vec();
                new.extend(tail);
                if let Some(next) = restore_target(new, t, x, y) {
                    if next.as_slice() != atoms && regions_of(&next) == regions_of(atoms) {
                        out.push(next);
                    }
                }
            }
        }
    }
    out
}

/// Undoes the exchange of `x` and `y` on the target of `atoms` with trailing
/// renamings and brings the result back to normal form.
fn restore_target(mut atoms: Vec<Atom>, t: &TypedTerm, x: &Name, y: &Name) -> Option<Vec<Atom>> {
    let end = TypedTerm::elaborate(atoms.clone(), t.source().clone()).ok()?.target().clone();
    if &end == t.target() {
        return Some(atoms);
    }
    match (end.contains(x), end.contains(y)) {
        (true, true) => {
            let used: BTreeSet<Name> = t.graphs().iter().flat_map(|g| g.vertices().cloned()).collect();
            let f = (0..).map(|k| Name::from(format!("_x{k}"))).find(|f| !used.contains(f))?;
            atoms.extend([Atom::Ren(x.clone(), f.clone()), Atom::Ren(y.clone(), x.clone()), Atom::Ren(f, y.clone())]);
        }
        (true, false) => atoms.push(Atom::Ren(x.clone(), y.clone())),
        (false, true) => atoms.push(Atom::Ren(y.clone(), x.clone())),
        (false, false) => return None,
    }
    let typed = TypedTerm::elaborate(atoms, t.source().clone()).ok()?;
    if typed.target() != t.target() {
        return None;
    }
    Some(super::to_normal_form(&typed).ok()?.term().atoms().to_vec())
}

fn accept(atoms: Vec<Atom>, source: &ChemGraph, target: &ChemGraph) -> Option<NormalForm> {
    let typed = TypedTerm::elaborate(atoms, source.clone()).ok()?;
    if typed.target() != target {
        return None;
    }
    NormalForm::new(typed).ok()
}

/// The canonical representative of the equivalence class of `nf`.
pub fn canonicalize_nf(nf: &NormalForm) -> NormalForm {
    let (source, target) = (nf.term().source().clone(), nf.term().target().clone());
    let Some((key, rep)) = representative(nf) else { return nf.clone() };
    let Some(start) = NormalForm::new(rep).ok() else { return nf.clone() };
    let mut best = (key.clone(), start.clone());
    let mut seen: HashSet<String> = HashSet::from([key]);
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for atoms in neighbours(&cur) {
            if seen.len() >= MAX_STATES {
                break;
            }
            let Some(next) = accept(atoms, &source, &target) else { continue };
            let Some((key, rep)) = representative(&next) else { continue };
            if !seen.insert(key.clone()) {
                continue;
            }
            let Ok(rep) = NormalForm::new(rep) else { continue };
            if key < best.0 {
                best = (key, rep.clone());
            }
            queue.push_back(rep);
        }
    }
    best.1
}

/// Whether two normal forms are related by the normal form equivalence.
pub fn nf_equivalent(t: &NormalForm, s: &NormalForm) -> bool {
    t.term().source() == s.term().source() && canonicalize_nf(t).term().term() == canonicalize_nf(s).term().term()
}
