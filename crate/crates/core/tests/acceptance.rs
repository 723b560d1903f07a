//! One line per acceptance check, with its running time.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use disconnect::graph::{AtomTable, ChemGraph};
use disconnect::normalize::{canonical_form, to_normal_form};
use disconnect::oracle::{self, GraphSpace, OracleConfig, SuiteReport};
use disconnect::semantics::decompose;
use disconnect::term::{parse_term_file, Term, TypedTerm};
use disconnect::text::{parse_graph, parse_reaction};

const GOLDEN: &str = "C[z,u;a,b] ; C[v,w;c,d] ; ~C[w,z;d,a] ; ~C[u,v;b,c] ; S[r]";

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(path).expect("fixture")
}

fn source() -> ChemGraph {
    parse_graph(&fixture("benzyl_source.graph")).expect("graph").graph
}

fn expected() -> Result<String, String> {
    let t = Term::parse(GOLDEN).map_err(|e| e.to_string())?.elaborate(&source()).map_err(|e| e.to_string())?;
    Ok(canonical_form(&t).map_err(|e| e.to_string())?.term().term().to_string())
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn golden_decomposition() -> Outcome {
    let run = || -> Result<(String, String), String> {
        let r = parse_reaction(&fixture("benzyl.reaction")).map_err(|e| e.to_string())?;
        let d = decompose(&r).map_err(|e| e.to_string())?;
        let nf = to_normal_form(&d.term).map_err(|e| e.to_string())?;
        let canon = canonical_form(nf.term()).map_err(|e| e.to_string())?;
        Ok((canon.term().term().to_string(), expected()?))
    };
    match run() {
        Ok((got, want)) => Outcome { ok: got == want, detail: got },
        Err(e) => Outcome { ok: false, detail: e },
    }
}

fn golden_normalization() -> Outcome {
    let run = || -> Result<(String, String, usize), String> {
        let file = parse_term_file(&fixture("example29.term")).map_err(|e| e.to_string())?;
        let t: TypedTerm = file.terms[0].elaborate(&source()).map_err(|e| e.to_string())?;
        let canon = canonical_form(&t).map_err(|e| e.to_string())?;
        Ok((canon.term().term().to_string(), expected()?, t.len()))
    };
    match run() {
        Ok((got, want, n)) => Outcome { ok: got == want && n == 29, detail: format!("{n} atoms -> {got}") },
        Err(e) => Outcome { ok: false, detail: e },
    }
}

fn suite(report: SuiteReport) -> Outcome {
    let mut detail = format!("{} checked, {} failures", report.checked, report.failures.len());
    for n in report.notes.iter().take(1) {
        detail.push_str(&format!("; {n}"));
    }
    for f in report.failures.iter().take(3) {
        detail.push_str(&format!("\n    {f}"));
    }
    Outcome { ok: report.passed(), detail }
}

fn main() -> ExitCode {
    let table = AtomTable::default();
    let config = OracleConfig::default();
    type Check<'a> = (&'a str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("golden decomposition", Some(Duration::from_secs(1)), Box::new(golden_decomposition)),
        ("golden normalization", Some(Duration::from_secs(1)), Box::new(golden_normalization)),
        (
            "rule table",
            Some(Duration::from_secs(300)),
            Box::new(|| suite(oracle::rule_table(&GraphSpace::new(&oracle::ELEMENTS, 4, 4), &table))),
        ),
        ("equation soundness", None, Box::new(|| suite(oracle::equation_soundness(&config, &table)))),
        (
            "functoriality and dagger",
            None,
            Box::new(|| {
                let mut o = suite(oracle::functoriality(&config, &table));
                let assoc = oracle::associativity(&config, &table);
                o.ok &= assoc.passed();
                o.detail.push_str(&format!("; associativity {} failures", assoc.failures.len()));
                o
            }),
        ),
        ("normal form preservation", None, Box::new(|| suite(oracle::normalization(&config, &table)))),
        ("completeness sampling", None, Box::new(|| suite(oracle::completeness(&config, &table)))),
        ("universality round trip", Some(Duration::from_secs(600)), Box::new(|| suite(oracle::universality(&config, &table)))),
    ];
    let mut all = true;
    for (k, (name, limit, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let ok = outcome.ok && in_time;
        all &= ok;
        let limit = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {} {name}: {} in {:.2} s{limit}: {}",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
