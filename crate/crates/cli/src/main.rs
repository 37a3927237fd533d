//! ddrank: batch front end for ordinal arithmetic, dividing certificates,
//! rank search and the rank-law harnesses.
//!
//! Machine-readable output (JSON, or the rendered ordinal for `ord eval`)
//! goes to stdout or the `--out` file; human messages go to stderr.
//! Exit codes: 0 success, 1 verification or harness failure, 2 invalid
//! input, 3 search truncated by the parameter budget, 4 conversion
//! precondition not met.

mod inputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ddrank::logic::{parse_formula, render_formula, Formula, PartialType};
use ddrank::ordinals::eval_expr;
use ddrank::rank::harness::{run_harness, HarnessConfig, HarnessKind};
use ddrank::rank::{
    atomic_alphabet, chain_to_sequence, grow_tree, inp_to_tree, search_rank, sequence_to_chain,
    tree_branch_to_sequence, Certificate, CertificateDocument, RankError, SearchBounds,
    SequenceCertificate,
};
use ddrank::theories::{AnyTheory, TheoryOracle};
use serde_json::json;

use inputs::{load_signature, load_theory_arg, load_type, read_text, write_output};

#[derive(Parser)]
#[command(
    name = "ddrank",
    version,
    about = "Batch front end for dividing-depth certificates and rank search",
    after_help = "EXAMPLES:\n\
                  \n  ddrank ord eval \"w+ (+^) w-\"\
                  \n  ddrank rank search --theory eq_rel --depth 4 --out report.json\
                  \n  ddrank cert verify fixtures/eq_rel_sequence.json\
                  \n  ddrank cert convert fixtures/eq_rel_sequence.json --to chain --out chain.json\
                  \n  ddrank harness lascar --theory eq_rel --instances 20 --seed 7\
                  \n\nTheories are builtin names (pure_set, eq_rel, random_graph, finite) or\
                  \npaths to theory JSON files. Set DDRANK_LOG=debug for progress messages."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordinal arithmetic
    #[command(subcommand)]
    Ord(OrdCommand),
    /// Formula parsing
    #[command(subcommand)]
    Parse(ParseCommand),
    /// Bounded search for the dividing depth
    #[command(subcommand)]
    Rank(RankCommand),
    /// Certificate verification and conversion
    #[command(subcommand)]
    Cert(CertCommand),
    /// Seeded checks of rank laws (exit 0 iff no instance fails)
    Harness(HarnessArgs),
}

#[derive(Subcommand)]
enum OrdCommand {
    /// Evaluate an expression and print its canonical form
    Eval {
        /// e.g. "w^2*3+1", "w+ (+^) w-", "(w*2)- (o^) 1+"
        expr: String,
    },
}

#[derive(Subcommand)]
enum ParseCommand {
    /// Parse formulas and print their canonical rendering and AST
    Check {
        /// Formulas to parse
        formulas: Vec<String>,
        /// File with one formula per line (`#` starts a comment line)
        #[arg(long)]
        file: Option<PathBuf>,
        /// Take the relation symbols from this theory
        #[arg(long, conflicts_with = "signature")]
        theory: Option<String>,
        /// Relation symbols as NAME/ARITY, comma separated (e.g. "E/2,R/2")
        #[arg(long)]
        signature: Option<String>,
    },
}

#[derive(Subcommand)]
enum RankCommand {
    /// Search for the deepest dividing sequence (exit 3 when truncated)
    Search(SearchArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    theory: String,
    /// Type file; defaults to `x0 = x0`
    #[arg(long = "type")]
    type_file: Option<PathBuf>,
    /// Templates separated by `;`; defaults to the atomic alphabet
    #[arg(long)]
    alphabet: Option<String>,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 4)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    param_budget: usize,
    /// Only try this k (local rank)
    #[arg(long)]
    k: Option<usize>,
    /// Report file; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the certificate as a certificate document
    #[arg(long)]
    certificate_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CertCommand {
    /// Verify a certificate document (exit 0 valid, 1 invalid)
    Verify {
        file: PathBuf,
        /// Theory to verify against; defaults to the document's own
        #[arg(long)]
        theory: Option<String>,
    },
    /// Convert a certificate to another kind (exit 4 when a precondition fails)
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Kind,
        /// Tree branch as comma-separated child indices; defaults to all zeros
        #[arg(long)]
        branch: Option<String>,
        /// Width of trees grown from sequences
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Sequence,
    Tree,
    Inp,
    Chain,
}

#[derive(Args)]
struct HarnessArgs {
    #[arg(value_enum)]
    kind: HarnessName,
    #[arg(long)]
    theory: String,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults: 5 for lascar, 3 otherwise
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 4)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    param_budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum HarnessName {
    Lascar,
    Disjunction,
    CompletionSup,
}

/// A failed command: its exit code and message.
struct Exit {
    code: u8,
    error: anyhow::Error,
}

impl Exit {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Exit {
            code: 2,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(error: anyhow::Error) -> Self {
        Exit::input(error)
    }
}

type Outcome = Result<u8, Exit>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DDRANK_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ord(OrdCommand::Eval { expr }) => ord_eval(&expr),
        Command::Parse(ParseCommand::Check {
            formulas,
            file,
            theory,
            signature,
        }) => parse_check(formulas, file, theory, signature),
        Command::Rank(RankCommand::Search(args)) => rank_search(&args),
        Command::Cert(CertCommand::Verify { file, theory }) => cert_verify(&file, theory),
        Command::Cert(CertCommand::Convert {
            file,
            to,
            branch,
            width,
            theory,
            out,
        }) => cert_convert(&file, to, branch, width, theory, out),
        Command::Harness(args) => harness(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn ord_eval(expr: &str) -> Outcome {
    let value = eval_expr(expr).map_err(Exit::input)?;
    write_output(None, &value.to_string())?;
    Ok(0)
}

fn parse_check(
    mut formulas: Vec<String>,
    file: Option<PathBuf>,
    theory: Option<String>,
    signature: Option<String>,
) -> Outcome {
    let sig = load_signature(theory.as_deref(), signature.as_deref())?;
    if let Some(path) = file {
        let text = read_text(&path)?;
        formulas.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    let mut failed = 0;
    let results: Vec<_> = formulas
        .iter()
        .map(|text| match parse_formula(text, &sig) {
            Ok(f) => json!({ "input": text, "rendered": render_formula(&f), "ast": f }),
            Err(e) => {
                failed += 1;
                eprintln!("{text}: {e}");
                json!({ "input": text, "error": e.to_string() })
            }
        })
        .collect();
    write_output(None, &serde_json::to_string_pretty(&results).expect("json"))?;
    Ok(if failed == 0 { 0 } else { 2 })
}

fn parse_alphabet<T: TheoryOracle>(theory: &T, spec: &str) -> anyhow::Result<Vec<Formula>> {
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            parse_formula(s, theory.signature()).with_context(|| format!("alphabet entry '{s}'"))
        })
        .collect()
}

fn rank_search(args: &SearchArgs) -> Outcome {
    let theory = load_theory_arg(&args.theory)?;
    let p = match &args.type_file {
        Some(path) => load_type(path, &theory)?,
        None => PartialType::trivial(1),
    };
    let alphabet = match &args.alphabet {
        Some(spec) => parse_alphabet(&theory, spec)?,
        None => atomic_alphabet(&theory, p.tuple_length),
    };
    let bounds = SearchBounds {
        fixed_k: args.k,
        ..SearchBounds::new(args.depth, args.width, args.param_budget)
    };
    let report = search_rank(&theory, &p, &alphabet, bounds).map_err(Exit::input)?;
    write_output(
        args.out.as_deref(),
        &serde_json::to_string_pretty(&report).expect("json"),
    )?;
    if let Some(path) = &args.certificate_out {
        let doc = CertificateDocument::new(
            Certificate::Sequence(report.certificate.clone()),
            Some(report.theory.clone()),
        );
        write_output(Some(path), &doc.to_json())?;
    }
    eprintln!(
        "certified {}, exact value {}",
        report.certified_lower,
        report
            .exact_value
            .map_or("unknown".to_string(), |v| v.to_string())
    );
    Ok(if report.truncated { 3 } else { 0 })
}

fn load_document(path: &Path) -> Result<CertificateDocument, Exit> {
    let text = read_text(path)?;
    CertificateDocument::from_json(&text)
        .map_err(|e| Exit::input(anyhow!("{}: {e}", path.display())))
}

/// The theory named on the command line, else the document's own.
fn document_theory(doc: &CertificateDocument, arg: Option<&str>) -> Result<AnyTheory, Exit> {
    match (arg, &doc.theory) {
        (Some(name), _) => Ok(load_theory_arg(name)?),
        (None, Some(value)) => Ok(inputs::theory_from_value(value)?),
        (None, None) => Err(Exit::input(anyhow!(
            "the document has no theory; pass --theory"
        ))),
    }
}

fn cert_verify(path: &Path, theory: Option<String>) -> Outcome {
    let doc = load_document(path)?;
    let theory = document_theory(&doc, theory.as_deref())?;
    let verdict = doc.certificate.verify(&theory);
    let out = json!({
        "kind": doc.certificate.kind(),
        "depth": doc.certificate.depth(),
        "valid": verdict.is_valid(),
        "failures": verdict.failures,
    });
    write_output(None, &serde_json::to_string_pretty(&out).expect("json"))?;
    for f in &verdict.failures {
        eprintln!("{f}");
    }
    Ok(if verdict.is_valid() { 0 } else { 1 })
}

fn conversion_error(e: RankError) -> Exit {
    let code = match e {
        RankError::ConversionPrecondition { .. }
        | RankError::NoExtractableWitness { .. }
        | RankError::Unverified(_) => 4,
        _ => 2,
    };
    Exit {
        code,
        error: e.into(),
    }
}

fn parse_branch(spec: Option<&str>, depth: usize) -> Result<Vec<usize>, Exit> {
    match spec {
        None => Ok(vec![0; depth]),
        Some(s) => s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| Exit::input(anyhow!("invalid --branch: {e}"))),
    }
}

fn cert_convert(
    path: &Path,
    to: Kind,
    branch: Option<String>,
    width: usize,
    theory_arg: Option<String>,
    out: Option<PathBuf>,
) -> Outcome {
    let doc = load_document(path)?;
    let mut theory = document_theory(&doc, theory_arg.as_deref())?;
    let to_sequence =
        |theory: &AnyTheory, cert: &Certificate| -> Result<SequenceCertificate, Exit> {
            match cert {
                Certificate::Sequence(s) => Ok(s.clone()),
                Certificate::Chain(c) => chain_to_sequence(theory, c).map_err(conversion_error),
                Certificate::Tree(t) => {
                    let b = parse_branch(branch.as_deref(), t.depth)?;
                    tree_branch_to_sequence(theory, t, &b).map_err(conversion_error)
                }
                Certificate::Inp(c) => {
                    let t = inp_to_tree(c).map_err(conversion_error)?;
                    let b = parse_branch(branch.as_deref(), t.depth)?;
                    tree_branch_to_sequence(theory, &t, &b).map_err(conversion_error)
                }
            }
        };
    let converted = match (to, &doc.certificate) {
        (Kind::Sequence, c) => Certificate::Sequence(to_sequence(&theory, c)?),
        (Kind::Chain, Certificate::Chain(c)) => Certificate::Chain(c.clone()),
        (Kind::Chain, c) => {
            let s = to_sequence(&theory, c)?;
            Certificate::Chain(sequence_to_chain(&s).map_err(conversion_error)?)
        }
        (Kind::Tree, Certificate::Tree(t)) => Certificate::Tree(t.clone()),
        (Kind::Tree, Certificate::Inp(c)) => {
            Certificate::Tree(inp_to_tree(c).map_err(conversion_error)?)
        }
        (Kind::Tree, c) => {
            let s = to_sequence(&theory, c)?;
            let (grown, tree) = grow_tree(&theory, &s, width)
                .map_err(conversion_error)?
                .ok_or_else(|| Exit {
                    code: 4,
                    error: anyhow!("no tree of width {width} follows this sequence"),
                })?;
            theory = grown;
            Certificate::Tree(tree)
        }
        (Kind::Inp, Certificate::Inp(c)) => Certificate::Inp(c.clone()),
        (Kind::Inp, c) => {
            return Err(Exit::input(anyhow!(
                "no conversion from {} to inp",
                c.kind()
            )))
        }
    };
    let out_doc = CertificateDocument::new(converted, Some(theory.to_config().to_json()));
    write_output(out.as_deref(), &out_doc.to_json())?;
    Ok(0)
}

fn harness(args: &HarnessArgs) -> Outcome {
    let theory = load_theory_arg(&args.theory)?;
    let kind = match args.kind {
        HarnessName::Lascar => HarnessKind::Lascar,
        HarnessName::Disjunction => HarnessKind::Disjunction,
        HarnessName::CompletionSup => HarnessKind::CompletionSup,
    };
    let depth = args.depth.unwrap_or(kind.default_bounds().depth);
    let config = HarnessConfig {
        instances: args.instances,
        seed: args.seed,
        bounds: SearchBounds::new(depth, args.width, args.param_budget),
    };
    let report = run_harness(kind, &theory, &config).map_err(Exit::input)?;
    write_output(args.out.as_deref(), &report.to_json())?;
    eprintln!(
        "{kind}: {} passed, {} failed, {} inconclusive",
        report.passed, report.failed, report.inconclusive
    );
    Ok(if report.failed == 0 { 0 } else { 1 })
}
