//! Brute-force and randomized checks of the whole pipeline against the
//! reaction semantics.

pub mod enumerate;
pub mod equations;
pub mod random;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{AtomTable, BondLabel, ChemGraph};
use crate::normalize::{check_normal_form, eq_typed, to_normal_form, to_normal_form_traced};
use crate::semantics::{decompose, functor_image, functor_image_stepwise, recompose};
use crate::term::{Atom, TypedTerm};

pub use enumerate::{enumerate_graphs, enumerate_reactions, GraphSpace};
pub use equations::{check_identity, identities, Identity, IdentityStats, Relation};
pub use random::{random_term, related_term, PairKind};

/// The elements the enumerations range over.
pub const ELEMENTS: [&str; 5] = ["H", "C", "O", "Cl", "Na"];

/// Bounds and sample sizes of an oracle run.
#[derive(Clone, Debug, Serialize)]
pub struct OracleConfig {
    pub seed: u64,
    /// Heavy atoms of the rule table enumeration.
    pub max_heavy: usize,
    /// Alpha vertices of the rule table enumeration.
    pub max_alpha: usize,
    /// Heavy atoms and alpha vertices of the graph spaces the identities are
    /// instantiated on.
    pub equation_spaces: Vec<(usize, usize)>,
    /// Further spaces for identities, as heavy atoms, alpha vertices and the
    /// least number of ionic bonds a graph must have to be used.
    pub ionic_spaces: Vec<(usize, usize, usize)>,
    /// Heavy atoms and alpha vertices of the graphs reactions are enumerated between.
    pub reaction_heavy: usize,
    pub reaction_alpha: usize,
    /// Largest changed region, in heavy atoms, of an enumerated reaction.
    pub max_changed: usize,
    pub random_terms: usize,
    pub max_len: usize,
    pub pairs: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: 0,
            max_heavy: 4,
            max_alpha: 4,
            equation_spaces: vec![(2, 3), (3, 1)],
            ionic_spaces: vec![(3, 2, 1), (4, 0, 1)],
            reaction_heavy: 3,
            reaction_alpha: 2,
            max_changed: 3,
            random_terms: 1000,
            max_len: 12,
            pairs: 500,
        }
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    #[serde(serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_millis())
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Failures kept per suite; the count is still exact.
const KEEP: usize = 20;

fn finish(name: &str, start: Instant, checked: usize, failures: Vec<String>, notes: Vec<String>) -> SuiteReport {
    SuiteReport { name: name.to_string(), checked, failures, notes, elapsed: start.elapsed() }
}

fn rng_for(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos((index as u128) << 20);
    rng
}

/// Every rule applicable at every graph of `space` yields a valid graph, the
/// inverse rule takes it back, and no two graphs are sent to the same graph.
pub fn rule_table(space: &GraphSpace, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let graphs = enumerate_graphs(space, table);
    let results: Vec<(usize, Vec<String>, Vec<(String, usize)>)> = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let mut failures = Vec::new();
            let mut outputs = Vec::new();
            let mut checked = 0;
            for atom in random::candidate_atoms(g) {
                let Atom::Rule(r) = atom else { continue };
                checked += 1;
                let out = match r.apply(g) {
                    Ok(h) => h,
                    Err(e) => {
                        failures.push(format!("{r} in domain but failed: {e}"));
                        continue;
                    }
                };
                if !out.is_valid(table) {
                    failures.push(format!("{r} gives an invalid graph from\n{}", crate::text::print_graph("g", g)));
                }
                match r.invert().apply(&out) {
                    Ok(back) if back == *g => {}
                    _ => failures.push(format!("{r} does not round-trip on\n{}", crate::text::print_graph("g", g))),
                }
                outputs.push((format!("{r}\n{}", crate::text::print_graph("h", &out)), k));
            }
            (checked, failures, outputs)
        })
        .collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (c, f, outputs) in results {
        checked += c;
        failures.extend(f);
        for (key, k) in outputs {
            if let Some(&other) = seen.get(&key) {
                if other != k {
                    failures.push(format!("graphs {other} and {k} collide under {key}"));
                }
            } else {
                seen.insert(key, k);
            }
        }
    }
    let notes = vec![format!("{} graphs", graphs.len())];
    finish("rule table", start, checked, failures, notes)
}

/// Source graphs for random terms: enumerated graphs with at least two heavy atoms.
fn random_sources(table: &AtomTable) -> Vec<ChemGraph> {
    enumerate_graphs(&GraphSpace::new(&ELEMENTS, 3, 2), table)
        .into_iter()
        .filter(|g| enumerate::heavy_count(g) >= 2 && g.bonds().next().is_some())
        .collect()
}

fn sample_term(seed: u64, stream: u64, k: usize, sources: &[ChemGraph], max_len: usize) -> (ChaCha8Rng, TypedTerm) {
    let mut rng = rng_for(seed, stream, k);
    let g = sources.choose(&mut rng).expect("nonempty sources");
    let t = random_term(&mut rng, g, max_len);
    (rng, t)
}

/// Composition of images of consecutive random terms is associative.
pub fn associativity(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let sources = random_sources(table);
    let failures: Vec<String> = (0..config.random_terms)
        .into_par_iter()
        .filter_map(|k| {
            let (mut rng, t) = sample_term(config.seed, 1, k, &sources, config.max_len / 3);
            let s = random_term(&mut rng, t.target(), config.max_len / 3);
            let u = random_term(&mut rng, s.target(), config.max_len / 3);
            let (a, b, c) = (functor_image(&t), functor_image(&s), functor_image(&u));
            let left = a.compose(&b).and_then(|ab| ab.compose(&c));
            let right = b.compose(&c).and_then(|bc| a.compose(&bc));
            match (left, right) {
                (Ok(l), Ok(r)) if l == r => None,
                _ => Some(format!("{t} | {s} | {u}")),
            }
        })
        .collect();
    finish("associativity", start, config.random_terms, failures, Vec::new())
}

/// Every identity, instantiated on every small graph, relates equal images.
pub fn equation_soundness(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let ionic = |g: &ChemGraph| g.bonds().filter(|b| b.2 == BondLabel::Ionic).count();
    let spaces = config.equation_spaces.iter().map(|&(h, a)| (h, a, 0)).chain(config.ionic_spaces.iter().copied());
    let mut seen = HashSet::new();
    let mut graphs = Vec::new();
    for (heavy, alpha, min_ionic) in spaces {
        for g in enumerate_graphs(&GraphSpace::new(&ELEMENTS, heavy, alpha), table) {
            if ionic(&g) >= min_ionic && seen.insert(enumerate::canonical_key(&g)) {
                graphs.push(g);
            }
        }
    }
    let ids = identities();
    let stats: Vec<IdentityStats> = ids
        .par_iter()
        .map(|id| {
            let mut s = IdentityStats::default();
            for g in &graphs {
                check_identity(id, g, &mut s);
            }
            s
        })
        .collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut notes = vec![format!("{} identities on {} graphs", ids.len(), graphs.len())];
    for (id, s) in ids.iter().zip(&stats) {
        checked += s.compared;
        for f in &s.failures {
            failures.push(format!("{}: {} vs {} ({})\n{}", f.identity, f.lhs, f.rhs, f.reason, f.graph));
        }
        if s.compared == 0 {
            notes.push(format!("{}: no instance with both sides typed", id.name));
        }
        if s.other_type > 0 {
            notes.push(format!("{}: {} instances typed with different targets", id.name, s.other_type));
        }
        if s.typability > 0 {
            notes.push(format!("{} ({}): {} instances where typability does not transfer", id.name, id.relation, s.typability));
        }
    }
    finish("equation soundness", start, checked, failures, notes)
}

/// Images respect concatenation and bar.
pub fn functoriality(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let sources = random_sources(table);
    let failures: Vec<String> = (0..config.random_terms)
        .into_par_iter()
        .filter_map(|k| {
            let (mut rng, t) = sample_term(config.seed, 2, k, &sources, config.max_len);
            let cut = rng.gen_range(0..=t.len());
            let left = TypedTerm::elaborate(t.atoms()[..cut].to_vec(), t.source().clone()).ok()?;
            let right = TypedTerm::elaborate(t.atoms()[cut..].to_vec(), left.target().clone()).ok()?;
            let image = functor_image_stepwise(&t);
            if functor_image(&t) != image {
                return Some(format!("image by regions differs from the composed image: {t}"));
            }
            let composed = functor_image_stepwise(&left).compose(&functor_image_stepwise(&right));
            if composed.as_ref() != Ok(&image) {
                return Some(format!("concatenation at {cut}: {t}"));
            }
            if functor_image_stepwise(&t.bar()) != image.dagger() {
                return Some(format!("bar: {t}"));
            }
            None
        })
        .collect();
    finish("functoriality", start, config.random_terms, failures, Vec::new())
}

/// Normalization keeps endpoints and image and produces normal forms.
pub fn normalization(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let sources = random_sources(table);
    let failures: Vec<String> = (0..config.random_terms)
        .into_par_iter()
        .filter_map(|k| {
            let (_, t) = sample_term(config.seed, 2, k, &sources, config.max_len);
            let nf = match to_normal_form(&t) {
                Ok(nf) => nf,
                Err(e) => return Some(format!("{t}: {e}\n{}", crate::text::print_graph("source", t.source()))),
            };
            let n = nf.term();
            if n.source() != t.source() || n.target() != t.target() {
                return Some(format!("{t}: endpoints changed"));
            }
            if functor_image(n) != functor_image(&t) {
                return Some(format!("{t}: image changed by {n}"));
            }
            check_normal_form(n).err().map(|v| format!("{t}: result {n} violates {v}"))
        })
        .collect();
    finish("normalization", start, config.random_terms, failures, Vec::new())
}

fn trace(t: &TypedTerm) -> String {
    let mut out = format!("{t}\n");
    match to_normal_form_traced(t) {
        Ok((nf, steps)) => {
            for s in steps {
                let _ = writeln!(out, "  {s}");
            }
            let _ = writeln!(out, "  => {}", nf.term());
        }
        Err(e) => {
            let _ = writeln!(out, "  error: {e}");
        }
    }
    out
}

/// The semantic and syntactic equality deciders agree on pairs with shared endpoints.
pub fn completeness(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let sources = random_sources(table);
    let kinds = [PairKind::Rewritten, PairKind::Perturbed, PairKind::Excursion];
    let results: Vec<Result<(bool, bool), String>> = (0..config.pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(config.seed, 3, k);
            let kind = kinds[k % kinds.len()];
            let s = loop {
                let g = sources.choose(&mut rng).expect("nonempty sources");
                let t = random_term(&mut rng, g, 8);
                if let Some(s) = related_term(&mut rng, &t, kind, 4) {
                    break (t, s);
                }
            };
            let (t, s) = s;
            match eq_typed(&t, &s) {
                Ok(e) if e.agree() => Ok((e.semantic, true)),
                Ok(e) => Err(format!(
                    "semantic {} syntactic {}\n{}{}",
                    e.semantic,
                    e.syntactic,
                    trace(&t),
                    trace(&s)
                )),
                Err(e) => Err(format!("{t} vs {s}: {e}")),
            }
        })
        .collect();
    let equal = results.iter().filter(|r| matches!(r, Ok((true, _)))).count();
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    let notes = vec![format!("{equal} equal pairs, {} unequal", config.pairs - equal - failures.len())];
    finish("completeness", start, config.pairs, failures, notes)
}

/// Decomposing an enumerated reaction and composing back gives the reaction.
pub fn universality(config: &OracleConfig, table: &AtomTable) -> SuiteReport {
    let start = Instant::now();
    let space = GraphSpace::new(&ELEMENTS, config.reaction_heavy, config.reaction_alpha);
    let graphs = enumerate_graphs(&space, table);
    let reactions = enumerate_reactions(&graphs, config.max_changed);
    let failures: Vec<String> = reactions
        .par_iter()
        .filter_map(|r| {
            let why = match decompose(r) {
                Err(e) => e.to_string(),
                Ok(d) => match recompose(&d, r.target()) {
                    Err(e) => format!("{}: {e}", d.term),
                    Ok(s) if &s == r => return None,
                    Ok(s) => format!("{} recomposes to\n{}", d.term, crate::text::print_reaction(&s)),
                },
            };
            Some(format!("{why}\n{}", crate::text::print_reaction(r)))
        })
        .collect();
    let notes = vec![format!("{} reactions over {} graphs", reactions.len(), graphs.len())];
    finish("universality", start, reactions.len(), failures, notes)
}

/// Runs every suite.
pub fn run_all(config: &OracleConfig, table: &AtomTable) -> Vec<SuiteReport> {
    let space = GraphSpace::new(&ELEMENTS, config.max_heavy, config.max_alpha);
    vec![
        rule_table(&space, table),
        associativity(config, table),
        equation_soundness(config, table),
        functoriality(config, table),
        normalization(config, table),
        completeness(config, table),
        universality(config, table),
    ]
}

/// Line-oriented summary table.
pub fn summary(reports: &[SuiteReport]) -> String {
    let mut out = format!("{:<20} {:>9} {:>9} {:>10}  status\n", "suite", "checked", "failures", "ms");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<20} {:>9} {:>9} {:>10}  {}",
            r.name,
            r.checked,
            r.failures.len(),
            r.elapsed.as_millis(),
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    for r in reports {
        for n in &r.notes {
            let _ = writeln!(out, "note [{}] {n}", r.name);
        }
        for f in r.failures.iter().take(KEEP) {
            let _ = writeln!(out, "failure [{}] {f}", r.name);
        }
    }
    out
}
