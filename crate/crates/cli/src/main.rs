use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hda_core::flows::{bad_realization, path_class_counts, path_label, trace_normal_form};
use hda_core::homology::{integer_homology, open_interval_poset, order_complex, SimplicialComplex};
use hda_core::limits::Limits;
use hda_core::pcset::{self, CubeId, LabelledPCSet};
use hda_core::proc::{self, ProcTerm};
use hda_core::semantics::{
    check_assoc, check_comm, check_restrict_idempotent, check_unit, interp, verify_paradigm, verify_restrict1, CheckOutcome,
};
use hda_core::sos::{build_lts, DEFAULT_DEPTH};
use hda_core::syncalg::{self, close_alphabet, table_from_json, validate_algebra, Action, SyncAlgebra, DEFAULT_MAX_ALPHABET};
use hda_core::tensor::{cosk_undirected, tensor};
use hda_core::FORMAT;

#[derive(Parser)]
#[command(name = "hda-sem", version, about = "Cubical semantics of process terms")]
struct Cli {
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AlgebraArgs {
    /// ccs, tcsp, trivial, or a path to an algebra JSON file.
    #[arg(long, default_value = "trivial")]
    algebra: String,
    #[arg(long, default_value_t = DEFAULT_MAX_ALPHABET)]
    max_alphabet: usize,
}

#[derive(Args)]
struct TermArgs {
    /// Process term, e.g. "a.nil || b.nil".
    term: Option<String>,
    /// Read the term from a file instead.
    #[arg(long, conflicts_with = "term")]
    file: Option<PathBuf>,
    #[command(flatten)]
    algebra: AlgebraArgs,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Transition system of a term.
    Lts {
        #[command(flatten)]
        input: TermArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Labelled precubical set of a term.
    Hda {
        #[command(flatten)]
        input: TermArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        census: bool,
        /// Replace the result by the undirected coskeleton of its 1-skeleton.
        #[arg(long)]
        undirected: bool,
    },
    /// Synchronized tensor product of two pcset files.
    Tensor {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        census: bool,
        /// Replace the result by the undirected coskeleton of its 1-skeleton.
        #[arg(long)]
        undirected: bool,
    },
    /// Classes of directed paths modulo the 2-cubes.
    Paths {
        pcset: PathBuf,
        /// Source vertex id as written in the file (default: the initial vertex).
        #[arg(long)]
        from: Option<u64>,
        #[arg(long)]
        to: u64,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        json: bool,
    },
    /// Reduced integer homology of an order complex.
    Homology {
        /// Use the order complex of the open interval of {0<1}^n.
        #[arg(long, conflicts_with = "complex", required_unless_present = "complex")]
        boundary_cube: Option<usize>,
        /// JSON list of simplices (vertex-id lists), closed under faces.
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Structural checks on the semantics of a term.
    Verify {
        #[command(flatten)]
        input: TermArgs,
        #[arg(long, value_delimiter = ',', default_value = "paradigm,restrict1,unit,comm,assoc")]
        checks: Vec<Check>,
        #[arg(long)]
        json: bool,
    },
    /// Validate a synchronization algebra.
    CheckAlgebra {
        /// Algebra JSON file, or a builtin name.
        algebra: String,
        /// Alphabet for a builtin, comma-separated.
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_ALPHABET)]
        max_alphabet: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Paradigm,
    Restrict1,
    Unit,
    Comm,
    Assoc,
    RestrictIdem,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Paradigm => "paradigm",
            Check::Restrict1 => "restrict1",
            Check::Unit => "unit",
            Check::Comm => "comm",
            Check::Assoc => "assoc",
            Check::RestrictIdem => "restrict-idem",
        }
    }
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn input_error(kind: &'static str, e: impl Display) -> Failure {
    Failure {
        code: 2,
        kind,
        message: e.to_string(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_errors {
                report(true, &input_error("usage", e.to_string().trim_end()));
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &argv) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            report(cli.json_errors, &f);
            ExitCode::from(f.code)
        }
    }
}

fn report(json_errors: bool, f: &Failure) {
    if json_errors {
        let doc = json!({
            "format": FORMAT,
            "error": { "kind": f.kind, "message": f.message, "exit_code": f.code },
        });
        eprintln!("{doc}");
    } else {
        eprintln!("hda-sem: {}", f.message);
    }
}

fn limits() -> Result<Limits, Failure> {
    Limits::from_env().map_err(|e| input_error("guard", e))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error("io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| input_error("io", format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn header(argv: &[String]) -> String {
    let quoted: Vec<String> = argv
        .iter()
        .map(|a| if a.is_empty() || a.contains(char::is_whitespace) { format!("'{a}'") } else { a.clone() })
        .collect();
    format!("hda-sem {}\n{}", env!("CARGO_PKG_VERSION"), quoted.join(" "))
}

fn algebra(args: &AlgebraArgs, actions: &[Action]) -> Result<SyncAlgebra, Failure> {
    match args.algebra.as_str() {
        name @ ("ccs" | "tcsp" | "trivial") => {
            let alphabet = close_alphabet(name, actions);
            if alphabet.len() > args.max_alphabet {
                return Err(input_error("algebra", format!("alphabet of {} actions exceeds the cap", alphabet.len())));
            }
            SyncAlgebra::builtin(name, &alphabet).map_err(|e| input_error("algebra", e))
        }
        path => {
            let p = Path::new(path);
            let text = read(p)?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            syncalg::algebra_from_json(name, &text, args.max_alphabet).map_err(|e| input_error("algebra", e))
        }
    }
}

fn term(input: &TermArgs) -> Result<(ProcTerm, SyncAlgebra), Failure> {
    let text = match (&input.term, &input.file) {
        (Some(t), _) => t.clone(),
        (None, Some(f)) => read(f)?,
        (None, None) => return Err(input_error("usage", "a term or --file is required")),
    };
    let raw = proc::parse_term(&text).map_err(|e| input_error("parse", e))?;
    let alg = algebra(&input.algebra, &raw.actions())?;
    let t = proc::parse(&text, &alg).map_err(|e| input_error("parse", e))?;
    Ok((t, alg))
}

fn census_line(k: &LabelledPCSet) -> String {
    k.census()
        .iter()
        .enumerate()
        .map(|(d, n)| format!("dim{d}:{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn labels_of(k: &LabelledPCSet) -> Vec<Action> {
    let set: BTreeSet<Action> = k.ids().flat_map(|c| k.cube(c).labels.clone()).collect();
    set.into_iter().collect()
}

fn emit_pcset(k: &LabelledPCSet, out: &Option<PathBuf>, census: bool, dot: Option<(&Path, &str)>) -> Result<(), Failure> {
    if let Some((p, h)) = dot {
        write(p, &pcset::to_dot(k, h))?;
    }
    let doc = pretty(&pcset::to_json(k));
    if let Some(p) = out {
        write(p, &doc)?;
    }
    if census {
        println!("{}", census_line(k));
    } else if out.is_none() && dot.is_none() {
        print!("{doc}");
    }
    Ok(())
}

fn undirected(alg: &SyncAlgebra, k: &LabelledPCSet) -> Result<LabelledPCSet, Failure> {
    let max_dim = k.dim().unwrap_or(0).max(2);
    cosk_undirected(alg, &pcset::skeleton(k, 1), max_dim).map_err(|e| input_error("tensor", e))
}

fn run(command: Command, argv: &[String]) -> Outcome {
    let limits = limits()?;
    match command {
        Command::Lts { input, format, out } => {
            let (t, alg) = term(&input)?;
            let lts = build_lts(&alg, &t, input.depth, &limits).map_err(|e| input_error("semantics", e))?;
            let text = match format {
                Format::Json => pretty(&lts.to_json()),
                Format::Dot => lts.to_dot(&header(argv)),
            };
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Hda {
            input,
            out,
            dot,
            census,
            undirected: und,
        } => {
            let (t, alg) = term(&input)?;
            let mut k = interp(&alg, &t, input.depth, &limits).map_err(|e| input_error("semantics", e))?.pcset;
            if und {
                k = undirected(&alg, &k)?;
            }
            let h = header(argv);
            emit_pcset(&k, &out, census, dot.as_deref().map(|p| (p, h.as_str())))?;
            Ok(0)
        }
        Command::Tensor {
            left,
            right,
            algebra: args,
            out,
            census,
            undirected: und,
        } => {
            let load = |p: &Path| -> Result<LabelledPCSet, Failure> { pcset::from_json(&read(p)?).map_err(|e| input_error("pcset", e)) };
            let (k, l) = (load(&left)?, load(&right)?);
            let mut actions = labels_of(&k);
            actions.extend(labels_of(&l));
            let alg = algebra(&args, &actions)?;
            for (side, s) in [("left", &k), ("right", &l)] {
                let rep = pcset::validate(s, &alg);
                if !rep.is_ok() {
                    return Err(input_error("pcset", format!("{side} operand is not a valid pcset: {:?}", rep.violations)));
                }
            }
            let mut prod = tensor(&alg, &k, &l, &limits).map_err(|e| input_error("tensor", e))?.set;
            if und {
                prod = undirected(&alg, &prod)?;
            }
            emit_pcset(&prod, &out, census, None)?;
            Ok(0)
        }
        Command::Paths {
            pcset: file,
            from,
            to,
            algebra: args,
            json,
        } => {
            let (k, ids) = pcset::from_json_with_ids(&read(&file)?).map_err(|e| input_error("pcset", e))?;
            let vertex = |id: u64| -> Result<CubeId, Failure> {
                ids.get(&id)
                    .copied()
                    .filter(|&c| k.cube(c).dim == 0)
                    .ok_or_else(|| input_error("pcset", format!("{id} is not a vertex")))
            };
            let a = match from {
                Some(id) => vertex(id)?,
                None => k.initial().ok_or_else(|| input_error("usage", "no initial vertex; pass --from"))?,
            };
            let b = vertex(to)?;
            let alg = algebra(&args, &labels_of(&k))?;
            let pc = bad_realization(&k, &limits).map_err(|e| input_error("paths", e))?;
            let file_id: std::collections::HashMap<CubeId, u64> = ids.iter().map(|(&f, &c)| (c, f)).collect();
            let mut reps = Vec::new();
            for p in pc.representatives(a, b) {
                let word = path_label(&k, &p);
                let nf = if word.is_empty() {
                    Vec::new()
                } else {
                    trace_normal_form(&alg, &word).map_err(|e| input_error("paths", e))?
                };
                reps.push((p.iter().map(|c| file_id[c]).collect::<Vec<_>>(), word, nf));
            }
            let count = path_class_counts(&pc, a, b);
            let show = |w: &[Action]| if w.is_empty() { "ε".to_string() } else { w.iter().map(Action::as_str).collect::<Vec<_>>().join(".") };
            if json {
                let doc = json!({
                    "format": FORMAT,
                    "from": file_id[&a],
                    "to": to,
                    "classes": count,
                    "representatives": reps.iter().map(|(p, w, nf)| json!({
                        "edges": p,
                        "labels": w.iter().map(Action::as_str).collect::<Vec<_>>(),
                        "normal_form": nf.iter().map(Action::as_str).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                });
                print!("{}", pretty(&doc));
            } else {
                println!("classes: {count}");
                for (p, w, nf) in &reps {
                    let edges: Vec<String> = p.iter().map(u64::to_string).collect();
                    println!("[{}] {} nf={}", edges.join(" "), show(w), show(nf));
                }
            }
            Ok(0)
        }
        Command::Homology {
            boundary_cube,
            complex,
            json,
        } => {
            let c = match (boundary_cube, complex) {
                (Some(n), _) => {
                    let p = open_interval_poset(n).map_err(|e| input_error("homology", e))?;
                    order_complex(&p, &limits).map_err(|e| input_error("homology", e))?
                }
                (None, Some(path)) => {
                    let v: Value = serde_json::from_str(&read(&path)?).map_err(|e| input_error("json", e))?;
                    let list = v.get("simplices").cloned().unwrap_or(v);
                    let simplices: Vec<Vec<usize>> = serde_json::from_value(list).map_err(|e| input_error("json", e))?;
                    SimplicialComplex::from_simplices(&simplices, &limits).map_err(|e| input_error("homology", e))?
                }
                (None, None) => return Err(input_error("usage", "--boundary-cube or --complex is required")),
            };
            let groups = integer_homology(&c);
            // degree -1 only matters for the empty complex
            let shown: Vec<_> = groups.iter().filter(|g| g.degree >= 0 || c.dim().is_none()).collect();
            if json {
                let doc = json!({
                    "format": FORMAT,
                    "simplices": (0..c.simplices.len()).map(|d| c.count(d)).collect::<Vec<_>>(),
                    "reduced_homology": shown,
                });
                print!("{}", pretty(&doc));
            } else {
                for g in shown {
                    println!("{g}");
                }
            }
            Ok(0)
        }
        Command::Verify { input, checks, json } => {
            let (t, alg) = term(&input)?;
            let sem = |e| input_error("semantics", e);
            let k = interp(&alg, &t, input.depth, &limits).map_err(sem)?;
            let mut results: Vec<(&str, bool, Value)> = Vec::new();
            let mut seen = BTreeSet::new();
            for c in checks {
                if !seen.insert(c.name()) {
                    continue;
                }
                let outcome = |o: CheckOutcome| (!o.failed(), serde_json::to_value(&o).expect("serializable"));
                let (ok, detail) = match c {
                    Check::Paradigm => {
                        let r = verify_paradigm(&k.pcset, &alg);
                        (r.passed(), serde_json::to_value(&r).expect("serializable"))
                    }
                    Check::Restrict1 => {
                        let r = verify_restrict1(&alg, &t, &k, &limits).map_err(sem)?;
                        (r.passed(), serde_json::to_value(&r).expect("serializable"))
                    }
                    Check::Unit => outcome(check_unit(&alg, &t, input.depth, &limits).map_err(sem)?),
                    Check::Comm => outcome(check_comm(&alg, &t, input.depth, &limits).map_err(sem)?),
                    Check::Assoc => outcome(check_assoc(&alg, &t, input.depth, &limits).map_err(sem)?),
                    Check::RestrictIdem => outcome(check_restrict_idempotent(&alg, &t, input.depth, &limits).map_err(sem)?),
                };
                results.push((c.name(), ok, detail));
            }
            let all_ok = results.iter().all(|r| r.1);
            if json {
                let doc = json!({
                    "format": FORMAT,
                    "term": proc::format(&t),
                    "algebra": alg.name(),
                    "census": k.meta.census,
                    "passed": all_ok,
                    "checks": results.iter().map(|(n, ok, d)| json!({"check": n, "passed": ok, "detail": d})).collect::<Vec<_>>(),
                });
                print!("{}", pretty(&doc));
            } else {
                println!("term: {}", proc::format(&t));
                println!("census: {}", census_line(&k.pcset));
                for (n, ok, d) in &results {
                    let na = d.get("outcome").and_then(Value::as_str) == Some("not-applicable");
                    let status = if !ok { "FAIL" } else if na { "n/a" } else { "pass" };
                    println!("{n}: {status}");
                    if !ok {
                        println!("  {d}");
                    }
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::CheckAlgebra {
            algebra: source,
            alphabet,
            max_alphabet,
        } => {
            let table = match source.as_str() {
                name @ ("ccs" | "tcsp" | "trivial") => {
                    let acts: Vec<Action> = alphabet.iter().map(|s| Action::new(s)).collect();
                    SyncAlgebra::builtin(name, &acts).map_err(|e| input_error("algebra", e))?.to_table()
                }
                path => table_from_json(&read(Path::new(path))?, max_alphabet).map_err(|e| input_error("algebra", e))?,
            };
            let report = validate_algebra(&table);
            println!("{report}");
            Ok(if report.is_ok() { 0 } else { 1 })
        }
    }
}
