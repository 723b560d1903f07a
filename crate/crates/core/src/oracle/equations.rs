//! The defining identities of the term calculus and the derived ones, as
//! templates over name variables, with a checker instantiating them on graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::{ChemGraph, Name};
use crate::semantics::functor_image;
use crate::rules::{RuleApp, RuleKind};
use crate::term::{Atom, Term};

/// How typability of the two sides is related.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Equal whenever both sides are typed.
    Both,
    /// Additionally, the left side typed implies the right side typed.
    Left,
    /// Typed together.
    Mutual,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Both => "~=",
            Relation::Left => "<~",
            Relation::Mutual => "=~",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub relation: Relation,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    ENeg,
    ENonneg,
    Ion,
    Cov,
}

const KINDS: [Kind; 4] = [Kind::ENeg, Kind::ENonneg, Kind::Ion, Kind::Cov];

impl Kind {
    fn tag(self) -> &'static str {
        match self {
            Kind::ENeg => "E-",
            Kind::ENonneg => "E+",
            Kind::Ion => "I",
            Kind::Cov => "C",
        }
    }

    fn has_lower(self) -> bool {
        matches!(self, Kind::ENeg | Kind::Cov)
    }

    fn rule(self, connect: bool, u: &str, v: &str, a: &str, b: &str) -> String {
        let bar = if connect { "~" } else { "" };
        match self {
            Kind::ENeg => format!("{bar}E[{u};{a},{b}]"),
            Kind::ENonneg => format!("{bar}E[{u},{v}]"),
            Kind::Ion => format!("{bar}I[{u},{v}]"),
            Kind::Cov => format!("{bar}C[{u},{v};{a},{b}]"),
        }
    }

    fn upper(self, u: &str, v: &str) -> Vec<String> {
        match self {
            Kind::ENeg => vec![u.to_string()],
            _ => vec![u.to_string(), v.to_string()],
        }
    }

    fn touches(self, u: &str, v: &str) -> String {
        self.upper(u, v).iter().map(|x| format!("S[{x}]")).collect::<Vec<_>>().join(" ; ")
    }
}

fn d(k: Kind, u: &str, v: &str, a: &str, b: &str) -> String {
    k.rule(false, u, v, a, b)
}

fn dbar(k: Kind, u: &str, v: &str, a: &str, b: &str) -> String {
    k.rule(true, u, v, a, b)
}

/// All identities, expanded over the rule kinds they range over.
pub fn identities() -> Vec<Identity> {
    use Relation::*;
    let mut out: Vec<(String, String, Relation, String)> = Vec::new();
    let mut add = |name: String, lhs: String, rel: Relation, rhs: String| out.push((name, lhs, rel, rhs));
    add("trans".into(), "R[u>z] ; R[z>w]".into(), Left, "R[u>w]".into());
    add("rcomm".into(), "R[u>z] ; R[v>w]".into(), Both, "R[v>w] ; R[u>z]".into());
    add("refl".into(), "R[u>u]".into(), Left, "S[u]".into());
    add("rsymm".into(), "R[b>z] ; R[a>b]".into(), Both, "S[b] ; R[a>z]".into());
    add("sr1".into(), "R[u>v] ; S[w]".into(), Both, "S[w] ; R[u>v]".into());
    add("sr2".into(), "R[u>v] ; S[v]".into(), Mutual, "S[u] ; R[u>v]".into());
    add("sr2'".into(), "S[u] ; R[u>v]".into(), Mutual, "R[u>v]".into());
    add("rd2".into(), "R[u>v] ; E[w,v]".into(), Mutual, "E[w,u] ; R[u>v]".into());
    add(
        "eebar".into(),
        "E[u,a] ; ~E[u,b]".into(),
        Both,
        "S[u] ; R[a>z] ; R[b>a] ; R[z>b]".into(),
    );
    add("scomm".into(), "S[u] ; S[v]".into(), Mutual, "S[v] ; S[u]".into());
    add("sidem".into(), "S[u] ; S[u]".into(), Mutual, "S[u]".into());
    add("cs".into(), "C[u,v;a,b]".into(), Mutual, "C[v,u;b,a]".into());
    for k in KINDS {
        let t = k.tag();
        let dd = d(k, "p", "q", "a", "b");
        add(format!("rd1 {t}"), format!("R[u>v] ; {dd}"), Both, format!("{dd} ; R[u>v]"));
        add(format!("sd1 {t}"), format!("S[u] ; {dd}"), Left, format!("{dd} ; S[u]"));
        for w in k.upper("p", "q") {
            add(format!("sd2 {t} {w}"), format!("{dd} ; S[{w}]"), Mutual, dd.clone());
        }
        let su = k.touches("p", "q");
        add(format!("ddbar4 {t}"), format!("{dd} ; {}", dbar(k, "p", "q", "a", "b")), Left, su.clone());
        let sd = if k.has_lower() { format!("{su} ; S[a] ; S[b]") } else { su.clone() };
        add(format!("ddbar4-2 {t}"), format!("{} ; {dd}", dbar(k, "p", "q", "a", "b")), Left, sd);
        if k.has_lower() {
            add(format!("rd3 {t} 1"), format!("{} ; R[u>v]", d(k, "p", "q", "u", "b")), Mutual, d(k, "p", "q", "v", "b"));
            add(format!("rd3 {t} 2"), format!("{} ; R[u>v]", d(k, "p", "q", "a", "u")), Mutual, d(k, "p", "q", "a", "v"));
            add(
                format!("ddbar1 {t}"),
                format!("{dd} ; {}", dbar(k, "p", "q", "c", "e")),
                Both,
                format!("{su} ; R[c>a] ; R[e>b]"),
            );
            add(format!("ddbar2 {t}"), format!("{dd} ; {}", dbar(k, "p", "q", "c", "b")), Both, format!("{su} ; R[c>a]"));
            add(format!("ddbar3 {t}"), format!("{dd} ; {}", dbar(k, "p", "q", "a", "e")), Both, format!("{su} ; R[e>b]"));
            add(format!("sabsorb {t} a"), format!("{dd} ; S[a]"), Mutual, dd.clone());
            add(format!("sabsorb {t} b"), format!("{dd} ; S[b]"), Mutual, dd.clone());
            add(
                format!("ids0 {t}"),
                format!("{} ; {}", dbar(k, "p", "q", "a", "b"), d(k, "p", "q", "c", "e")),
                Both,
                format!("{su} ; R[a>j] ; R[b>e] ; R[j>c]"),
            );
            add(
                format!("ids1 {t}"),
                format!("R[z>c] ; R[w>e] ; {dd}"),
                Both,
                format!("R[z>a] ; R[w>b] ; {}", d(k, "p", "q", "c", "e")),
            );
            add(format!("ids2 {t}"), format!("R[z>c] ; {dd}"), Both, format!("R[z>a] ; {}", d(k, "p", "q", "c", "b")));
            add(format!("ids3 {t}"), format!("R[w>e] ; {dd}"), Both, format!("R[w>b] ; {}", d(k, "p", "q", "a", "e")));
            add(
                format!("ddindex {t}"),
                format!("{dd} ; {}", d(k, "p", "q", "c", "e")),
                Mutual,
                format!("{} ; {}", d(k, "p", "q", "a", "e"), d(k, "p", "q", "c", "b")),
            );
        }
        for k2 in KINDS {
            let t2 = k2.tag();
            let other = d(k2, "w", "y", "c", "e");
            add(format!("comm1 {t} {t2}"), format!("{dd} ; {other}"), Mutual, format!("{other} ; {dd}"));
            let back = dbar(k, "p", "q", "a", "b");
            add(format!("comm2 {t} {t2}"), format!("{back} ; {other}"), Both, format!("{other} ; {back}"));
            if k.has_lower() {
                let h = dbar(k2, "w", "y", "c", "e");
                add(
                    format!("rd4 {t} {t2}"),
                    format!("{} ; {h} ; R[i>f] ; R[j>g]", d(k, "p", "q", "i", "j")),
                    Left,
                    format!("{h} ; {}", d(k, "p", "q", "f", "g")),
                );
            }
        }
    }
    let ion = "I[w,y]";
    let cov = "C[w,y;c,e]";
    let eneg = "E[w;c,e]";
    let pairs = [
        ("comm3", "C[p,q;a,b]", ion, Mutual),
        ("comm4", "E[p;a,b]", ion, Left),
        ("comm5", "E[p,q]", ion, Left),
        ("comm6", "~E[p,q]", ion, Left),
        ("comm7", "~E[p;a,b]", ion, Left),
        ("comm8", "~C[p,q;a,b]", ion, Left),
        ("comm9", "E[p;a,b]", cov, Mutual),
        ("comm10", "E[p,q]", cov, Left),
        ("comm11", "~E[p,q]", cov, Mutual),
        ("comm12", "E[p,q]", eneg, Left),
        ("comm13", "~E[p,q]", eneg, Mutual),
    ];
    for (name, x, y, rel) in pairs {
        add(name.into(), format!("{x} ; {y}"), rel, format!("{y} ; {x}"));
    }
    out.into_iter()
        .map(|(name, l, relation, r)| Identity {
            lhs: Term::parse(&l).unwrap_or_else(|e| panic!("{name}: {e}")),
            rhs: Term::parse(&r).unwrap_or_else(|e| panic!("{name}: {e}")),
            name,
            relation,
        })
        .collect()
}

/// Names given to variables that must not clash with graph vertices.
const FRESH: [&str; 4] = ["f0", "f1", "f2", "f3"];

/// One failed instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub identity: String,
    pub lhs: String,
    pub rhs: String,
    pub graph: String,
    pub reason: String,
}

/// Per-identity counts over a set of graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentityStats {
    /// Instances where both sides are typed and were compared.
    pub compared: usize,
    /// Instances whose sides are typed with different targets.
    pub other_type: usize,
    /// Instances violating the stated typability implication.
    pub typability: usize,
    pub failures: Vec<Failure>,
}

fn apply(t: &Term, sigma: &BTreeMap<Name, Name>) -> Option<Term> {
    let f = |x: &Name| sigma.get(x).cloned().unwrap_or_else(|| x.clone());
    t.atoms().iter().map(|a| a.map_names(f).ok()).collect::<Option<Vec<_>>>().map(Term)
}

/// Every atom of the same shape as `shape` typable at `g`, with created
/// names drawn from `absent`.
fn concrete_atoms(shape: &Atom, g: &ChemGraph, absent: &[Name]) -> Vec<Atom> {
    let chem: Vec<Name> = g.vertices().filter(|v| g.is_chemical(v)).cloned().collect();
    let alphas: Vec<Name> = g.vertices().filter(|v| g.is_alpha(v)).cloned().collect();
    let free: Vec<Name> =
        alphas.iter().filter(|a| g.neighbours(a).map(|n| n.is_empty()).unwrap_or(false)).cloned().collect();
    let on = |u: &Name| -> Vec<Name> { alphas.iter().filter(|a| g.bond(u, a).cov() == 1).cloned().collect() };
    let pairs = |xs: &[Name]| -> Vec<(Name, Name)> {
        let mut out = Vec::new();
        for x in xs {
            for y in xs {
                if x != y {
                    out.push((x.clone(), y.clone()));
                }
            }
        }
        out
    };
    let mut kinds: Vec<RuleKind> = Vec::new();
    let rule = match shape {
        Atom::Id => return vec![Atom::Id],
        Atom::Touch(_) => return g.vertices().cloned().map(Atom::Touch).collect(),
        Atom::Ren(..) => {
            let mut out = Vec::new();
            for a in &alphas {
                out.push(Atom::Ren(a.clone(), a.clone()));
                out.extend(absent.iter().map(|z| Atom::Ren(a.clone(), z.clone())));
            }
            return out;
        }
        Atom::Rule(r) => r,
    };
    let connect = !rule.is_disconnect();
    match (rule.kind(), connect) {
        (RuleKind::ENeg { .. }, false) => {
            for u in &chem {
                for (a, b) in pairs(absent) {
                    kinds.push(RuleKind::ENeg { u: u.clone(), a, b });
                }
            }
        }
        (RuleKind::ENeg { .. }, true) => {
            for u in &chem {
                for a in on(u) {
                    for b in &free {
                        kinds.push(RuleKind::ENeg { u: u.clone(), a: a.clone(), b: b.clone() });
                    }
                }
            }
        }
        (RuleKind::ENonneg { .. }, _) => {
            for u in &chem {
                let vs = if connect { free.clone() } else { on(u) };
                kinds.extend(vs.into_iter().map(|v| RuleKind::ENonneg { u: u.clone(), v }));
            }
        }
        (RuleKind::Ion { .. }, _) => {
            kinds.extend(pairs(&chem).into_iter().map(|(u, v)| RuleKind::Ion { u, v }));
        }
        (RuleKind::Cov { .. }, false) => {
            for (u, v) in pairs(&chem) {
                for (a, b) in pairs(absent) {
                    kinds.push(RuleKind::Cov { u: u.clone(), v: v.clone(), a, b });
                }
            }
        }
        (RuleKind::Cov { .. }, true) => {
            for (u, v) in pairs(&chem) {
                for a in on(&u) {
                    for b in on(&v) {
                        kinds.push(RuleKind::Cov { u: u.clone(), v: v.clone(), a: a.clone(), b });
                    }
                }
            }
        }
    }
    kinds
        .into_iter()
        .filter_map(|k| if connect { RuleApp::connect(k) } else { RuleApp::disconnect(k) }.ok())
        .filter(|r| r.applies_to(g))
        .map(Atom::Rule)
        .collect()
}

/// Extends `sigma` so that `template` becomes `concrete`, if possible.
fn unify(template: &Atom, concrete: &Atom, sigma: &BTreeMap<Name, Name>) -> Option<BTreeMap<Name, Name>> {
    let (xs, ys) = (template.names(), concrete.names());
    if xs.len() != ys.len() {
        return None;
    }
    let mut s = sigma.clone();
    for (x, y) in xs.into_iter().zip(ys) {
        match s.get(&x) {
            Some(v) if *v != y => return None,
            Some(_) => {}
            None => {
                s.insert(x, y);
            }
        }
    }
    Some(s)
}

/// Every assignment under which `t` types from `g`. Created names come from a
/// small fresh pool, from the names of `g` and from names already assigned.
fn typed_instances(t: &Term, g: &ChemGraph) -> Vec<BTreeMap<Name, Name>> {
    let mut frontier = vec![(BTreeMap::new(), g.clone())];
    for a in t.atoms() {
        let mut next = Vec::new();
        for (sigma, h) in &frontier {
            let used: BTreeSet<&Name> = sigma.values().collect();
            let mut names: BTreeSet<Name> =
                FRESH.iter().map(|s| Name::new(s)).filter(|n| !used.contains(n)).take(2).collect();
            names.extend(g.vertices().cloned());
            names.extend(sigma.values().cloned());
            let absent: Vec<Name> = names.into_iter().filter(|n| !h.contains(n)).collect();
            for c in concrete_atoms(a, h, &absent) {
                let Some(s) = unify(a, &c, sigma) else { continue };
                let h2 = c.step(h).expect("typable by construction");
                next.push((s, h2));
            }
        }
        frontier = next;
    }
    frontier.into_iter().map(|(s, _)| s).collect()
}

/// Binds the variables of `other` left unbound by `sigma` to names fresh for the whole instance.
fn complete(sigma: &BTreeMap<Name, Name>, other: &Term, g: &ChemGraph, first: &Term) -> BTreeMap<Name, Name> {
    let mut s = sigma.clone();
    let mut taken: BTreeSet<Name> = g.vertex_set();
    taken.extend(s.values().cloned());
    if let Some(t) = apply(first, &s) {
        taken.extend(t.names());
    }
    let mut k = 0;
    for v in other.names() {
        if s.contains_key(&v) {
            continue;
        }
        let fresh = loop {
            let n = Name::from(format!("q{k}"));
            k += 1;
            if !taken.contains(&n) {
                break n;
            }
        };
        taken.insert(fresh.clone());
        s.insert(v, fresh);
    }
    s
}

/// Instantiates `id` on `g` in every typed way and checks both sides.
///
/// An identity relates terms of one type, so instances whose sides reach
/// different targets are counted apart rather than compared.
pub fn check_identity(id: &Identity, g: &ChemGraph, stats: &mut IdentityStats) {
    let mut done: BTreeSet<(String, String)> = BTreeSet::new();
    for (first, second, from_left) in [(&id.lhs, &id.rhs, true), (&id.rhs, &id.lhs, false)] {
        for sigma in typed_instances(first, g) {
            let sigma = complete(&sigma, second, g, first);
            let (Some(l), Some(r)) = (apply(&id.lhs, &sigma), apply(&id.rhs, &sigma)) else { continue };
            if !done.insert((l.to_string(), r.to_string())) {
                continue;
            }
            match (l.elaborate(g), r.elaborate(g)) {
                (Ok(lt), Ok(rt)) if lt.target() != rt.target() => stats.other_type += 1,
                (Ok(lt), Ok(rt)) => {
                    stats.compared += 1;
                    let (li, ri) = (functor_image(&lt), functor_image(&rt));
                    if li != ri {
                        stats.failures.push(Failure {
                            identity: id.name.clone(),
                            lhs: l.to_string(),
                            rhs: r.to_string(),
                            graph: crate::text::print_graph("g", g),
                            reason: format!(
                                "images differ: ({:?}, {:?}) vs ({:?}, {:?})",
                                li.ua(),
                                li.ub(),
                                ri.ua(),
                                ri.ub()
                            ),
                        });
                    }
                }
                (Ok(_), Err(_)) if from_left && id.relation != Relation::Both => stats.typability += 1,
                (Err(_), Ok(_)) if !from_left && id.relation == Relation::Mutual => stats.typability += 1,
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BondLabel;

    #[test]
    fn templates_parse() {
        let ids = identities();
        assert!(ids.len() > 80);
        assert!(ids.iter().any(|i| i.name == "eebar"));
    }

    #[test]
    fn eebar_holds_on_two_radicals() {
        let g = ChemGraph::new()
            .with_vertex("u", "Cl", 0)
            .with_vertex("x", "*", 0)
            .with_vertex("y", "*", -1)
            .with_bond("u", "x", BondLabel::Covalent(1));
        let id = identities().into_iter().find(|i| i.name == "eebar").unwrap();
        let mut stats = IdentityStats::default();
        check_identity(&id, &g, &mut stats);
        assert!(stats.compared > 0);
        assert!(stats.failures.is_empty(), "{:?}", stats.failures);
    }
}
