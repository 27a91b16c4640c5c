use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use wdk_core::decompositions::{
    blockage_from_tangle, bramble_from_tangle, stree_to_branch_decomposition, stree_to_matroid_decomposition,
    stree_to_tree_decomposition,
};
use wdk_core::duality::DualityWitness;
use wdk_core::families::ExplicitFamily;
use wdk_core::oracle::{default_corpus, suite_jobs, DichotomyReport};
use wdk_core::problem::{Instance, Mode, Problem, WitnessFile};
use wdk_core::Error;

#[derive(Parser)]
#[command(name = "wdk", version, about = "Tangle/tree duality for graph and matroid width parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an S-tree or a tangle for one instance.
    Solve(SolveArgs),
    /// Check a witness file against an instance.
    Verify(VerifyArgs),
    /// Run the dichotomy check over a corpus of small graphs.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// branch | tree | path | adhesion | carving | rank | matroid-tree | custom
    #[arg(long)]
    mode: Option<Mode>,
    /// Order bound: separations of order < k.
    #[arg(short = 'k', long = "k")]
    k: Option<usize>,
    /// Graph (JSON or DIMACS) or matroid (JSON) file.
    #[arg(long)]
    input: PathBuf,
    /// Bag-size bound for adhesion mode.
    #[arg(long)]
    w: Option<usize>,
    /// Explicit star family for custom mode.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Where to write the witness JSON (stdout after the summary line if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the classical object (decomposition, bramble or blockage) here.
    #[arg(long)]
    classical: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Witness JSON produced by `solve`.
    #[arg(long)]
    witness: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    /// Comma-separated modes.
    #[arg(long, value_delimiter = ',', default_value = "tree,path,branch,adhesion,carving,rank,matroid-tree")]
    modes: Vec<Mode>,
    /// Largest graph order of the exhaustive part of the corpus.
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    /// Seed for the random part of the corpus (used when max-n >= 6).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random graphs (used when max-n >= 6).
    #[arg(long, default_value_t = 8)]
    random: usize,
    /// CSV report path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines report path.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// Record wall-clock milliseconds; without it the `ms` column is 0 so
    /// reports are byte-identical across runs.
    #[arg(long)]
    timing: bool,
}

/// An error with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Usage(_) | Error::Input(_) => 2,
            Error::Cap(_) => 3,
            Error::Validation(_) => 1,
            Error::Internal(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn build(args: &ProblemArgs, fallback: Option<&WitnessFile>) -> Result<Problem, Failure> {
    let instance = Instance::parse(&read(&args.input)?)?;
    let mode = args
        .mode
        .or(fallback.and_then(|f| f.mode))
        .ok_or_else(|| input_error("--mode is required".into()))?;
    let k = args.k.or(fallback.and_then(|f| f.k)).ok_or_else(|| input_error("-k is required".into()))?;
    let w = args.w.or(fallback.and_then(|f| f.w));
    let family = match &args.family {
        Some(path) => Some(ExplicitFamily::from_json_str(&read(path)?)?),
        None => None,
    };
    Ok(Problem::build(&instance, mode, k, w, family)?)
}

fn classical_json(p: &Problem, witness: &DualityWitness) -> Result<Option<Value>, Failure> {
    let graph = p.universe.graph();
    let value = match (witness, p.mode, graph) {
        (DualityWitness::Tree(t), Mode::Tree | Mode::Path | Mode::Adhesion, Some(_)) => {
            serde_json::to_value(stree_to_tree_decomposition(t, p.universe.ground()).to_json())
        }
        (DualityWitness::Tree(t), Mode::Branch, Some(g)) if p.k >= 3 => {
            serde_json::to_value(stree_to_branch_decomposition(t, g, p.k)?.to_json())
        }
        (DualityWitness::Tree(t), Mode::MatroidTree, _) => match p.universe.matroid_ref() {
            Some(m) => serde_json::to_value(stree_to_matroid_decomposition(t, m)),
            None => return Ok(None),
        },
        (DualityWitness::Tangle(o), Mode::Tree, Some(g)) => {
            serde_json::to_value(bramble_from_tangle(o, &p.system, g, p.k)?.to_json())
        }
        (DualityWitness::Tangle(o), Mode::Path, Some(_)) => {
            serde_json::to_value(blockage_from_tangle(o, &p.system, p.k).to_json())
        }
        _ => return Ok(None),
    };
    value.map(Some).map_err(|e| Failure { code: 4, message: e.to_string() })
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let p = build(&args.problem, None)?;
    if p.mode == Mode::Branch && p.k <= 2 {
        eprintln!(
            "note: for k <= 2 branch-width is not dual to S_k-trees (stars have branch-width 1, matchings 0); \
             reporting the tangle number instead"
        );
    }
    let witness = p.solve()?;
    let text = p.witness_file(&witness).to_json_string();
    let mut out = std::io::stdout().lock();
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(out, "side={} width_param={}", witness.side(), p.interpret(witness.is_tangle()));
    match &args.out {
        Some(path) => write(path, &text)?,
        None => {
            let _ = writeln!(out, "{text}");
        }
    }
    if let Some(path) = &args.classical {
        match classical_json(&p, &witness)? {
            Some(value) => write(path, &serde_json::to_string_pretty(&value).expect("json"))?,
            None => eprintln!("note: no classical object for this mode and side"),
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let file = WitnessFile::from_json_str(&read(&args.witness)?)?;
    let p = build(&args.problem, Some(&file))?;
    let witness = p.witness_from_file(&file)?;
    match p.verify(&witness) {
        Ok(()) => {
            println!("valid {} for mode {} k={}", witness.side(), p.mode, p.k);
            Ok(())
        }
        Err(why) => Err(Failure { code: 1, message: format!("invalid {}: {why}", witness.side()) }),
    }
}

fn suite(args: SuiteArgs) -> Result<(), Failure> {
    let corpus = default_corpus(args.max_n, args.seed, args.random);
    let jobs = suite_jobs(&corpus, &args.modes);
    let start = Instant::now();
    let mut reports: Vec<DichotomyReport> = jobs.par_iter().map(|j| j.run()).collect();
    if !args.timing {
        for r in &mut reports {
            r.ms = 0;
        }
    }
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(DichotomyReport::csv_header().split(',')).expect("csv");
    for r in &reports {
        let (k, ms) = (r.k.to_string(), r.ms.to_string());
        let verified = r.verified.to_string();
        csv.write_record([r.instance.as_str(), r.mode.as_str(), &k, &r.side, &r.value, &verified, &ms]).expect("csv");
    }
    let table = String::from_utf8(csv.into_inner().expect("csv")).expect("utf8");
    match &args.out {
        Some(path) => write(path, &table)?,
        None => {
            let _ = std::io::stdout().write_all(table.as_bytes());
        }
    }
    if let Some(path) = &args.jsonl {
        let lines: Vec<String> = reports.iter().map(|r| serde_json::to_string(r).expect("json")).collect();
        write(path, &(lines.join("\n") + "\n"))?;
    }
    let failed: Vec<&DichotomyReport> = reports.iter().filter(|r| !r.verified).collect();
    for r in &failed {
        eprintln!("FAIL {} {} k={}: {}", r.instance, r.mode, r.k, r.detail);
    }
    eprintln!(
        "{} checks over {} instances: {} passed, {} failed{}",
        reports.len(),
        corpus.len(),
        reports.len() - failed.len(),
        failed.len(),
        if args.timing { format!(" in {:.1}s", start.elapsed().as_secs_f64()) } else { String::new() }
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: 1, message: "some checks failed".into() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Suite(a) => suite(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
