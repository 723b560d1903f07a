use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use disconnect::graph::{AtomTable, ChemGraph};
use disconnect::normalize::{canonical_form, eq_typed, to_normal_form_traced};
use disconnect::oracle::{self, GraphSpace, OracleConfig, SuiteReport};
use disconnect::reaction::{eq_reaction, Reaction};
use disconnect::semantics::{decompose, functor_image, recompose};
use disconnect::term::{parse_term_file, Term, TypedTerm};
use disconnect::text::{parse_graph, parse_graphs, parse_reaction, print_graph, print_reaction};

#[derive(Parser)]
#[command(name = "disconnect", version, about = "Chemical graphs, reactions and disconnection-rule terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Valence table with `<symbol> <valence>` lines.
    #[arg(long, global = true)]
    valence_table: Option<PathBuf>,
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check every graph block of a file.
    Validate { graphs: PathBuf },
    /// Apply one rule such as `C[u,v;a,b]` or `~E[u,v]` to a graph.
    Apply { graph: PathBuf, rule: String },
    /// Elaborate each term of a term file.
    Typecheck {
        terms: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Bring each term to normal form.
    Normalize {
        terms: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
        /// Print the rewrite steps.
        #[arg(long)]
        trace: bool,
        /// Print the canonical representative of the normal form class.
        #[arg(long)]
        canonical: bool,
    },
    /// Decide equality of the first terms of two files.
    Eq {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// The reaction denoted by each term.
    Image {
        terms: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Compose two reactions.
    Compose { first: PathBuf, second: PathBuf },
    /// The reverse reaction.
    Dagger { reaction: PathBuf },
    /// A term and an isomorphism whose composite is the reaction.
    Decompose { reaction: PathBuf },
    /// Check that decomposing and composing back gives the reaction.
    Roundtrip { reaction: PathBuf },
    /// Run the enumeration and sampling suites.
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Heavy atoms of the rule table enumeration.
        #[arg(long)]
        max_vertices: Option<usize>,
        /// Run only the named suites.
        #[arg(long)]
        suite: Vec<String>,
    },
}

/// A failure that is not a usage error.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Output {
    text: String,
    json: Value,
    ok: bool,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output { text, json, ok: true }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn with_path<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure(format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<ChemGraph, Failure> {
    Ok(parse_graph(&read(path)?).map_err(with_path(path))?.graph)
}

fn load_reaction(path: &Path) -> Result<Reaction, Failure> {
    parse_reaction(&read(path)?).map_err(with_path(path))
}

/// The terms of a term file with their source graph, from `--source` or the file's header.
fn load_terms(path: &Path, source: Option<&Path>, table: &AtomTable) -> Result<(ChemGraph, Vec<Term>), Failure> {
    let file = parse_term_file(&read(path)?).map_err(with_path(path))?;
    let source_path = match (source, &file.source) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(s)) => path.parent().unwrap_or(Path::new(".")).join(s),
        (None, None) => return Err(Failure(format!("{}: no source graph; pass --source", path.display()))),
    };
    let g = load_graph(&source_path)?;
    let report = g.validate(table)?;
    if !report.is_ok() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure(format!("{}: source graph is invalid: {}", source_path.display(), list.join("; "))));
    }
    Ok((g, file.terms))
}

fn typed(t: &Term, g: &ChemGraph) -> Result<TypedTerm, Failure> {
    t.elaborate(g).map_err(Failure::from)
}

fn reaction_json(r: &Reaction) -> Value {
    json!({
        "reaction": print_reaction(r),
        "uA": r.ua().iter().map(|n| n.to_string()).collect::<Vec<_>>(),
        "uB": r.ub().iter().map(|n| n.to_string()).collect::<Vec<_>>(),
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let table = match &cli.valence_table {
        Some(p) => AtomTable::parse(&read(p)?).map_err(with_path(p))?,
        None => AtomTable::default(),
    };
    match &cli.command {
        Command::Validate { graphs } => {
            let blocks = parse_graphs(&read(graphs)?).map_err(with_path(graphs))?;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut ok = true;
            for b in blocks {
                let report = b.graph.validate(&table)?;
                let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
                if list.is_empty() {
                    text.push_str(&format!("{}: valid\n", b.name));
                } else {
                    ok = false;
                    text.push_str(&format!("{}: invalid\n", b.name));
                    for v in &list {
                        text.push_str(&format!("  {v}\n"));
                    }
                }
                items.push(json!({"graph": b.name, "valid": list.is_empty(), "violations": list}));
            }
            Ok(Output { text, json: Value::Array(items), ok })
        }
        Command::Apply { graph, rule } => {
            let g = load_graph(graph)?;
            let atom = Term::parse(rule)?;
            let [disconnect::term::Atom::Rule(r)] = atom.atoms() else {
                return Err(Failure(format!("`{rule}` is not a single rule")));
            };
            let report = r.domain_check(&g);
            let h = r.apply(&g).map_err(|e| Failure(format!("{e}: {report}")))?;
            let text = print_graph("result", &h);
            Ok(Output::new(text.clone(), json!({"graph": text})))
        }
        Command::Typecheck { terms, source } => {
            let (g, ts) = load_terms(terms, source.as_deref(), &table)?;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut ok = true;
            for t in &ts {
                match t.elaborate(&g) {
                    Ok(tt) => {
                        let printed = print_graph("target", tt.target());
                        text.push_str(&printed);
                        items.push(json!({"term": t.to_string(), "target": printed}));
                    }
                    Err(e) => {
                        ok = false;
                        text.push_str(&format!("{e}\n"));
                        items.push(json!({"term": t.to_string(), "error": e.to_string()}));
                    }
                }
            }
            Ok(Output { text, json: Value::Array(items), ok })
        }
        Command::Normalize { terms, source, trace, canonical } => {
            let (g, ts) = load_terms(terms, source.as_deref(), &table)?;
            let mut text = String::new();
            let mut items = Vec::new();
            for t in &ts {
                let tt = typed(t, &g)?;
                let (nf, steps) = to_normal_form_traced(&tt)?;
                let result = if *canonical { canonical_form(&tt)? } else { nf };
                let steps: Vec<String> = steps.iter().map(|s| s.to_string()).collect();
                if *trace {
                    for s in &steps {
                        text.push_str(&format!("# {s}\n"));
                    }
                }
                let printed = result.term().term().to_string();
                text.push_str(&format!("{printed}\n"));
                items.push(json!({"term": t.to_string(), "normal_form": printed, "trace": steps}));
            }
            Ok(Output::new(text, Value::Array(items)))
        }
        Command::Eq { left, right, source } => {
            let (g, lt) = load_terms(left, source.as_deref(), &table)?;
            let (h, rt) = load_terms(right, source.as_deref(), &table)?;
            if g != h {
                return Err(Failure("the two term files have different sources".into()));
            }
            let (Some(l), Some(r)) = (lt.first(), rt.first()) else {
                return Err(Failure("a term file is empty".into()));
            };
            let e = eq_typed(&typed(l, &g)?, &typed(r, &g)?)?;
            let word = |b: bool| if b { "equal" } else { "unequal" };
            let text = format!(
                "{}\nsemantic: {}\nsyntactic: {}\nagree: {}\n",
                word(e.semantic),
                word(e.semantic),
                word(e.syntactic),
                e.agree()
            );
            let json = json!({"semantic": e.semantic, "syntactic": e.syntactic, "agree": e.agree()});
            Ok(Output { text, json, ok: e.agree() })
        }
        Command::Image { terms, source } => {
            let (g, ts) = load_terms(terms, source.as_deref(), &table)?;
            let mut text = String::new();
            let mut items = Vec::new();
            for t in &ts {
                let r = functor_image(&typed(t, &g)?);
                text.push_str(&print_reaction(&r));
                items.push(reaction_json(&r));
            }
            Ok(Output::new(text, Value::Array(items)))
        }
        Command::Compose { first, second } => {
            let r = load_reaction(first)?.compose(&load_reaction(second)?)?;
            Ok(Output::new(print_reaction(&r), reaction_json(&r)))
        }
        Command::Dagger { reaction } => {
            let r = load_reaction(reaction)?.dagger();
            Ok(Output::new(print_reaction(&r), reaction_json(&r)))
        }
        Command::Decompose { reaction } => {
            let d = decompose(&load_reaction(reaction)?)?;
            let iota: Vec<String> = d.iota.iter().map(|(x, y)| format!("{x}:{y}")).collect();
            let term = d.term.term().to_string();
            let text = format!("{term}\niota {}\n", iota.join(" "));
            Ok(Output::new(text, json!({"term": term, "iota": iota})))
        }
        Command::Roundtrip { reaction } => {
            let r = load_reaction(reaction)?;
            let back = decompose(&r).map_err(Failure::from).and_then(|d| Ok(recompose(&d, r.target())?));
            let pass = back.as_ref().is_ok_and(|s| eq_reaction(s, &r));
            let text = format!("{}\n", if pass { "pass" } else { "fail" });
            Ok(Output { text, json: json!({"pass": pass}), ok: pass })
        }
        Command::Oracle { seed, max_vertices, suite } => {
            let mut config = OracleConfig { seed: *seed, ..OracleConfig::default() };
            if let Some(m) = max_vertices {
                config.max_heavy = *m;
            }
            let reports = run_suites(&config, &table, suite)?;
            let ok = reports.iter().all(SuiteReport::passed);
            let json = json!({"config": config, "suites": reports});
            Ok(Output { text: oracle::summary(&reports), json, ok })
        }
    }
}

const SUITES: [&str; 7] =
    ["rule-table", "associativity", "equations", "functoriality", "normalization", "completeness", "universality"];

fn run_suites(config: &OracleConfig, table: &AtomTable, names: &[String]) -> Result<Vec<SuiteReport>, Failure> {
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(&n.as_str())) {
        return Err(Failure(format!("unknown suite `{bad}`; expected one of {}", SUITES.join(", "))));
    }
    let wanted = |n: &str| names.is_empty() || names.iter().any(|x| x == n);
    let mut out = Vec::new();
    for name in SUITES.iter().filter(|n| wanted(n)) {
        out.push(match *name {
            "rule-table" => {
                oracle::rule_table(&GraphSpace::new(&oracle::ELEMENTS, config.max_heavy, config.max_alpha), table)
            }
            "associativity" => oracle::associativity(config, table),
            "equations" => oracle::equation_soundness(config, table),
            "functoriality" => oracle::functoriality(config, table),
            "normalization" => oracle::normalization(config, table),
            "completeness" => oracle::completeness(config, table),
            _ => oracle::universality(config, table),
        });
    }
    Ok(out)
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    let body = if cli.json {
        format!("{}\n", serde_json::to_string_pretty(&out.json).expect("serializable"))
    } else {
        out.text.clone()
    };
    match &cli.output {
        Some(p) => fs::write(p, body),
        None => std::io::stdout().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
