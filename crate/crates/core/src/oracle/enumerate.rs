//! Exhaustive enumeration of small chemical graphs and reactions between them.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::graph::{AtomTable, BondLabel, ChemGraph, Element, Name};
use crate::reaction::Reaction;

/// Bounds of a graph enumeration.
#[derive(Clone, Debug)]
pub struct GraphSpace {
    pub elements: Vec<Element>,
    pub max_heavy: usize,
    pub max_alpha: usize,
}

impl GraphSpace {
    pub fn new(elements: &[&str], max_heavy: usize, max_alpha: usize) -> Self {
        GraphSpace { elements: elements.iter().map(|e| Element::new(e)).collect(), max_heavy, max_alpha }
    }
}

pub fn heavy_name(k: usize) -> Name {
    Name::from(format!("h{k}"))
}

pub fn alpha_name(k: usize) -> Name {
    Name::from(format!("a{k}"))
}

/// One candidate before charges are fixed.
struct Skeleton<'a> {
    elements: Vec<&'a Element>,
    valence: Vec<u32>,
    bonds: BTreeMap<(usize, usize), BondLabel>,
    attached: Vec<u32>,
    free: u32,
}

impl Skeleton<'_> {
    fn degree(&self, k: usize) -> u32 {
        let mut d = self.attached[k];
        for (&(x, y), b) in &self.bonds {
            if x == k || y == k {
                d += b.cov();
            }
        }
        d
    }

    fn build(&self, charges: &[i32]) -> ChemGraph {
        let mut g = ChemGraph::new();
        let mut next_alpha = 0;
        for (k, e) in self.elements.iter().enumerate() {
            g.add_vertex(heavy_name(k), (*e).clone(), charges[k]).expect("fresh name");
        }
        for (&(x, y), &b) in &self.bonds {
            g.set_bond(&heavy_name(x), &heavy_name(y), b).expect("present");
        }
        for (k, &n) in self.attached.iter().enumerate() {
            for _ in 0..n {
                let a = alpha_name(next_alpha);
                next_alpha += 1;
                g.add_vertex(a.clone(), Element::alpha(), 0).expect("fresh name");
                g.set_bond(&heavy_name(k), &a, BondLabel::Covalent(1)).expect("present");
            }
        }
        for _ in 0..self.free {
            g.add_vertex(alpha_name(next_alpha), Element::alpha(), -1).expect("fresh name");
            next_alpha += 1;
        }
        g
    }
}

/// Isomorphism-invariant key: the least encoding over label-preserving relabellings of the heavy atoms.
pub fn canonical_key(g: &ChemGraph) -> String {
    let heavy: Vec<&Name> = g.vertices().filter(|v| g.is_chemical(v)).collect();
    let alphas: Vec<&Name> = g.vertices().filter(|v| g.is_alpha(v)).collect();
    let free = alphas.iter().filter(|a| g.neighbours(a).map(|n| n.is_empty()).unwrap_or(true)).count();
    let bonded_alpha = alphas.len() - free;
    let n = heavy.len();
    let mut best: Option<String> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut s = format!("{free};{bonded_alpha}|");
        for &p in &perm {
            let v = heavy[p];
            let alpha_count = g.neighbours(v).map(|ns| ns.iter().filter(|w| g.is_alpha(w)).count()).unwrap_or(0);
            s.push_str(&format!("{}{:+}:{alpha_count},", g.element(v).expect("present"), g.charge(v).expect("present")));
        }
        s.push('|');
        for x in 0..n {
            for y in x + 1..n {
                s.push_str(&g.bond(heavy[perm[x]], heavy[perm[y]]).to_string());
                s.push(',');
            }
        }
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

const LABELS: [BondLabel; 5] =
    [BondLabel::Covalent(1), BondLabel::Covalent(2), BondLabel::Covalent(3), BondLabel::Covalent(4), BondLabel::Ionic];

/// All valid chemical graphs in `space`, one per isomorphism class, named `h0..` and `a0..`.
pub fn enumerate_graphs(space: &GraphSpace, table: &AtomTable) -> Vec<ChemGraph> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let elements: Vec<&Element> = space.elements.iter().filter(|e| table.contains(e)).collect();
    for n in 0..=space.max_heavy {
        let mut choice = vec![0usize; n];
        loop {
            let els: Vec<&Element> = choice.iter().map(|&k| elements[k]).collect();
            let valence: Vec<u32> = els.iter().map(|e| table.valence(e).expect("filtered")).collect();
            let mut sk = Skeleton { elements: els, valence, bonds: BTreeMap::new(), attached: vec![0; n], free: 0 };
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
            bonds(&mut sk, &pairs, 0, space, table, &mut seen, &mut out);
            if !next_multiset(&mut choice, elements.len()) {
                break;
            }
        }
    }
    out
}

fn next_multiset(choice: &mut [usize], k: usize) -> bool {
    if k == 0 {
        return false;
    }
    for i in (0..choice.len()).rev() {
        if choice[i] + 1 < k {
            let v = choice[i] + 1;
            for c in choice[i..].iter_mut() {
                *c = v;
            }
            return true;
        }
    }
    false
}

fn bonds(
    sk: &mut Skeleton,
    pairs: &[(usize, usize)],
    at: usize,
    space: &GraphSpace,
    table: &AtomTable,
    seen: &mut HashSet<String>,
    out: &mut Vec<ChemGraph>,
) {
    if at == pairs.len() {
        alphas(sk, 0, 0, space, table, seen, out);
        return;
    }
    bonds(sk, pairs, at + 1, space, table, seen, out);
    let (x, y) = pairs[at];
    for label in LABELS {
        if label == BondLabel::Ionic {
            let ionic = |k: usize| sk.bonds.iter().any(|(&(p, q), b)| *b == BondLabel::Ionic && (p == k || q == k));
            if ionic(x) || ionic(y) {
                continue;
            }
        }
        sk.bonds.insert((x, y), label);
        if sk.degree(x) <= sk.valence[x] && sk.degree(y) <= sk.valence[y] {
            bonds(sk, pairs, at + 1, space, table, seen, out);
        }
        sk.bonds.remove(&(x, y));
    }
}

fn alphas(
    sk: &mut Skeleton,
    at: usize,
    used: u32,
    space: &GraphSpace,
    table: &AtomTable,
    seen: &mut HashSet<String>,
    out: &mut Vec<ChemGraph>,
) {
    if at == sk.elements.len() {
        for free in 0..=(space.max_alpha as u32 - used) {
            sk.free = free;
            charges(sk, table, seen, out);
        }
        sk.free = 0;
        return;
    }
    let mut k = 0;
    loop {
        sk.attached[at] = k;
        if sk.degree(at) > sk.valence[at] || used + k > space.max_alpha as u32 {
            break;
        }
        alphas(sk, at + 1, used + k, space, table, seen, out);
        k += 1;
    }
    sk.attached[at] = 0;
}

fn charges(sk: &Skeleton, table: &AtomTable, seen: &mut HashSet<String>, out: &mut Vec<ChemGraph>) {
    let residual: Vec<i32> = (0..sk.elements.len()).map(|k| (sk.valence[k] - sk.degree(k)) as i32).collect();
    let n = residual.len();
    for mask in 0u32..(1 << n) {
        if (0..n).any(|k| residual[k] == 0 && mask & (1 << k) != 0) {
            continue;
        }
        let charges: Vec<i32> = (0..n).map(|k| if mask & (1 << k) != 0 { -residual[k] } else { residual[k] }).collect();
        let g = sk.build(&charges);
        if g.is_valid(table) && seen.insert(canonical_key(&g)) {
            out.push(g);
        }
    }
}

/// Number of heavy (chemical) vertices of `g`.
pub fn heavy_count(g: &ChemGraph) -> usize {
    g.vertices().filter(|v| g.is_chemical(v)).count()
}

/// Reactions between enumerated graphs sharing their heavy atoms: every subset of
/// at most `max_changed` heavy atoms (with all alpha vertices) as the changed
/// region, every label-preserving bijection on it, and the identity elsewhere.
pub fn enumerate_reactions(graphs: &[ChemGraph], max_changed: usize) -> Vec<Reaction> {
    let mut by_atoms: BTreeMap<Vec<(Name, String)>, Vec<&ChemGraph>> = BTreeMap::new();
    for g in graphs {
        let key = g
            .vertices()
            .filter(|v| g.is_chemical(v))
            .map(|v| (v.clone(), g.element(v).expect("present").to_string()))
            .collect();
        by_atoms.entry(key).or_default().push(g);
    }
    let mut out = Vec::new();
    for (atoms, group) in &by_atoms {
        let heavy: Vec<&Name> = atoms.iter().map(|(n, _)| n).collect();
        for mask in 0u32..(1 << heavy.len()) {
            let changed: Vec<&Name> = (0..heavy.len()).filter(|k| mask & (1 << k) != 0).map(|k| heavy[k]).collect();
            if changed.len() > max_changed {
                continue;
            }
            for a in group {
                for c in group {
                    reactions_between(a, c, &changed, &heavy, &mut out);
                }
            }
        }
    }
    out
}

fn reactions_between(a: &ChemGraph, c: &ChemGraph, changed: &[&Name], heavy: &[&Name], out: &mut Vec<Reaction>) {
    let mut ua: BTreeSet<Name> = changed.iter().map(|n| (*n).clone()).collect();
    let mut ub = ua.clone();
    ua.extend(a.vertices().filter(|v| a.is_alpha(v)).cloned());
    ub.extend(c.vertices().filter(|v| c.is_alpha(v)).cloned());
    let i: BTreeMap<Name, Name> =
        heavy.iter().filter(|n| !ua.contains(**n)).map(|n| ((*n).clone(), (*n).clone())).collect();
    if a.net_charge(&ua) != c.net_charge(&ub) {
        return;
    }
    let same_rest = i.keys().all(|x| a.label(x) == c.label(x) && i.keys().all(|y| a.bond(x, y) == c.bond(x, y)));
    if !same_rest {
        return;
    }
    let mut perm: Vec<usize> = (0..changed.len()).collect();
    loop {
        let b: BTreeMap<Name, Name> =
            perm.iter().enumerate().map(|(k, &p)| (changed[k].clone(), changed[p].clone())).collect();
        let labels_ok = b.iter().all(|(x, y)| a.element(x) == c.element(y));
        if labels_ok {
            if let Ok(r) = Reaction::new(a.clone(), c.clone(), ua.clone(), ub.clone(), b, i.clone()) {
                out.push(r);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_spaces() {
        let table = AtomTable::default();
        let hs = enumerate_graphs(&GraphSpace::new(&["H"], 2, 0), &table);
        let keys: BTreeSet<String> = hs.iter().map(canonical_key).collect();
        assert_eq!(keys.len(), hs.len());
        assert!(hs.iter().any(|g| g.len() == 2 && g.bond(&heavy_name(0), &heavy_name(1)) == BondLabel::Covalent(1)));
        assert!(hs.iter().any(|g| g.bond(&heavy_name(0), &heavy_name(1)) == BondLabel::Ionic));
        assert!(hs.iter().all(|g| g.is_valid(&table)));
        let with_alpha = enumerate_graphs(&GraphSpace::new(&["H"], 1, 1), &table);
        assert!(with_alpha.iter().any(|g| g.len() == 2 && g.bonds().count() == 1));
        assert!(with_alpha.iter().any(|g| g.len() == 1 && g.is_alpha(&alpha_name(0))));
    }

    #[test]
    fn reactions_are_valid() {
        let table = AtomTable::default();
        let gs = enumerate_graphs(&GraphSpace::new(&["H", "O"], 2, 1), &table);
        let rs = enumerate_reactions(&gs, 2);
        assert!(!rs.is_empty());
        assert!(rs.iter().all(|r| r.validate().is_ok()));
        assert!(rs.iter().any(|r| r.ua().is_empty()));
    }
}
