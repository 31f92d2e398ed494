//! Implementation of the `stackat` command-line tool.
//!
//! The binary in `main.rs` is a thin shell: it parses arguments into [`Cli`]
//! and maps the command's outcome onto exit codes. Keeping the logic here
//! lets unit tests drive the command surface without spawning a process.
//!
//! Exit codes are a function of the verdict alone: 0 when the programs are
//! equivalent (or `oracle-refute` finds no difference), 1 when they differ,
//! 2 on any usage, parse, or universe error.

pub mod bench;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use stackat::decide::{pipeline_stages, report_json, UniverseMismatch};
use stackat::oracle::{eval, refute, DEPTH_HEADROOM};
use stackat::parser::{parse_universe_line, split_universe_header};
use stackat::{
    check_equivalence_with, parse_unchecked, CheckOptions, Counterexample, Expr, Field, Header,
    ParseError, Universe, Value, Verdict,
};
use thiserror::Error;

use bench::BenchFamily;

pub const EXIT_EQUIVALENT: i32 = 0;
pub const EXIT_INEQUIVALENT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Universe(#[from] UniverseMismatch),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "stackat",
    about = "Decide semantic equivalence of StacKAT programs",
    long_about = "Decide semantic equivalence of StacKAT programs.\n\n\
        Programs are regular expressions over header tests (f = v, f != v),\n\
        assignments (f := v), and stack actions (push v, pop v), combined\n\
        with `;` (sequence), `+` (choice), `*` (iteration), and the\n\
        constants 0 and 1. Program files may declare their universe on the\n\
        first line: `#universe fields=f,g values=0..3`."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether two programs relate exactly the same packets.
    Check(CheckArgs),
    /// Time the decision procedure on the built-in program families.
    Bench(BenchArgs),
    /// Export each canonicalization stage as Graphviz DOT files.
    Dot(DotArgs),
    /// Brute-force search for an input on which two programs differ.
    OracleRefute(RefuteArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("left").required(true).multiple(false)))]
#[command(group(ArgGroup::new("right").required(true).multiple(false)))]
pub struct CheckArgs {
    /// First program, inline.
    #[arg(short = '1', long, value_name = "PROG", group = "left")]
    pub program1: Option<String>,
    /// First program, read from a file.
    #[arg(long, value_name = "PATH", group = "left")]
    pub file1: Option<PathBuf>,
    /// Second program, inline.
    #[arg(short = '2', long, value_name = "PROG", group = "right")]
    pub program2: Option<String>,
    /// Second program, read from a file.
    #[arg(long, value_name = "PATH", group = "right")]
    pub file2: Option<PathBuf>,
    #[command(flatten)]
    pub universe: UniverseArgs,
    /// Search every failing header pair for the shortest counterexample.
    #[arg(long)]
    pub exhaustive: bool,
    /// Check all |V|^(2|F|) header pairs instead of restricting to fields
    /// the programs mention.
    #[arg(long)]
    pub full_header_loop: bool,
    /// Print the verdict as JSON.
    #[arg(long)]
    pub json: bool,
    /// Write every pipeline stage as DOT under DIR/left and DIR/right.
    #[arg(long, value_name = "DIR")]
    pub dot_dir: Option<PathBuf>,
}

/// Universe overrides shared by all subcommands. When absent, the universe
/// is the union of the programs' `#universe` declarations, falling back to
/// the fields and values the programs mention.
#[derive(Debug, Args)]
pub struct UniverseArgs {
    /// Comma-separated field names (overrides declarations/inference).
    #[arg(long, value_name = "F1,F2,..")]
    pub fields: Option<String>,
    /// Comma-separated values or an inclusive range like 0..3.
    #[arg(long, value_name = "V1,V2,..")]
    pub values: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Family to run; all five when omitted.
    #[arg(long, value_enum)]
    pub family: Option<BenchFamily>,
    /// Largest instance size.
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Timed runs per instance; the minimum is reported.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Trace,
    Pushpop,
    Filter,
    Zip,
    Poppush,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Trace,
        Stage::Pushpop,
        Stage::Filter,
        Stage::Zip,
        Stage::Poppush,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Trace => "trace",
            Stage::Pushpop => "pushpop",
            Stage::Filter => "filter",
            Stage::Zip => "zip",
            Stage::Poppush => "poppush",
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("prog").required(true).multiple(false)))]
pub struct DotArgs {
    /// Program, inline.
    #[arg(short = 'p', long, value_name = "PROG", group = "prog")]
    pub program: Option<String>,
    /// Program, read from a file.
    #[arg(long, value_name = "PATH", group = "prog")]
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub universe: UniverseArgs,
    /// Directory to write the .dot files into (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Stages to export (repeatable); all five when omitted.
    #[arg(long = "stage", value_enum)]
    pub stages: Vec<Stage>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("left").required(true).multiple(false)))]
#[command(group(ArgGroup::new("right").required(true).multiple(false)))]
pub struct RefuteArgs {
    /// First program, inline.
    #[arg(short = '1', long, value_name = "PROG", group = "left")]
    pub program1: Option<String>,
    /// First program, read from a file.
    #[arg(long, value_name = "PATH", group = "left")]
    pub file1: Option<PathBuf>,
    /// Second program, inline.
    #[arg(short = '2', long, value_name = "PROG", group = "right")]
    pub program2: Option<String>,
    /// Second program, read from a file.
    #[arg(long, value_name = "PATH", group = "right")]
    pub file2: Option<PathBuf>,
    #[command(flatten)]
    pub universe: UniverseArgs,
    /// Maximum input stack length to try.
    #[arg(long, default_value_t = 3)]
    pub bound: usize,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Dot(args) => cmd_dot(args),
        Command::OracleRefute(args) => cmd_oracle_refute(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

/// Writes to stdout, exiting quietly with the shell's 128+SIGPIPE status
/// when the consumer has closed the pipe (e.g. `stackat dot ... | head`).
fn emit(text: &str) {
    if io::stdout().lock().write_all(text.as_bytes()).is_err() {
        std::process::exit(128 + 13);
    }
}

fn emitln(text: &str) {
    emit(text);
    emit("\n");
}

/// One side of a check, as loaded from a flag or file.
struct LoadedProgram {
    expr: Expr,
    declared_fields: Vec<Field>,
    declared_values: Vec<Value>,
}

fn load_program(inline: Option<&str>, file: Option<&Path>) -> Result<LoadedProgram, CliError> {
    if let Some(text) = inline {
        return Ok(LoadedProgram {
            expr: parse_unchecked(text)?,
            declared_fields: vec![],
            declared_values: vec![],
        });
    }
    let path = file.expect("the argument group guarantees one source");
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let (header, body) = split_universe_header(&text);
    let (declared_fields, declared_values) = match header {
        Some(line) => parse_universe_line(line)?,
        None => (vec![], vec![]),
    };
    Ok(LoadedProgram {
        expr: parse_unchecked(body)?,
        declared_fields,
        declared_values,
    })
}

fn parse_fields_flag(spec: &str) -> Result<Vec<Field>, CliError> {
    let (fields, _) = parse_universe_line(&format!("#universe fields={spec}"))?;
    Ok(fields)
}

fn parse_values_flag(spec: &str) -> Result<Vec<Value>, CliError> {
    let (_, values) = parse_universe_line(&format!("#universe values={spec}"))?;
    Ok(values)
}

/// Resolution order, independently for fields and for values: an explicit
/// flag wins; otherwise the union of the file declarations, when any file
/// declares that part; otherwise whatever the programs mention (with `{0}`
/// as the value set of last resort).
fn resolve_universe(
    flags: &UniverseArgs,
    programs: &[&LoadedProgram],
) -> Result<Universe, CliError> {
    let exprs: Vec<&Expr> = programs.iter().map(|p| &p.expr).collect();
    let inferred = Universe::inferred_from(&exprs);

    let fields = match &flags.fields {
        Some(spec) => parse_fields_flag(spec)?,
        None => {
            let declared: Vec<Field> = programs
                .iter()
                .flat_map(|p| p.declared_fields.iter().cloned())
                .collect();
            if declared.is_empty() {
                inferred.fields().to_vec()
            } else {
                declared
            }
        }
    };
    let values = match &flags.values {
        Some(spec) => parse_values_flag(spec)?,
        None => {
            let declared: Vec<Value> = programs
                .iter()
                .flat_map(|p| p.declared_values.iter().copied())
                .collect();
            if declared.is_empty() {
                inferred.values().to_vec()
            } else {
                declared
            }
        }
    };
    Universe::new(fields, values).map_err(|e| CliError::Invalid(e.to_string()))
}

fn format_packet_parts(header: &Header, stack: &[Value], universe: &Universe) -> String {
    format!("⟨{}, {:?}⟩", header.display(universe), stack)
}

fn describe_counterexample(cx: &Counterexample, universe: &Universe) -> String {
    format!(
        "counterexample: input {} → output {} is related by the {} program only",
        format_packet_parts(&cx.header_in, &cx.input_stack, universe),
        format_packet_parts(&cx.header_out, &cx.output_stack, universe),
        cx.accepted_by.as_str(),
    )
}

pub fn cmd_check(args: &CheckArgs) -> Result<i32, CliError> {
    let left = load_program(args.program1.as_deref(), args.file1.as_deref())?;
    let right = load_program(args.program2.as_deref(), args.file2.as_deref())?;
    let universe = resolve_universe(&args.universe, &[&left, &right])?;
    let opts = CheckOptions {
        exhaustive: args.exhaustive,
        parallel: true,
        restrict_fields: !args.full_header_loop,
    };
    let start = Instant::now();
    let report = check_equivalence_with(&left.expr, &right.expr, &universe, &opts)?;
    let wall_ms = start.elapsed().as_millis() as u64;

    if let Some(dir) = &args.dot_dir {
        write_stage_dots(&left.expr, &universe, &dir.join("left"), &Stage::ALL)?;
        write_stage_dots(&right.expr, &universe, &dir.join("right"), &Stage::ALL)?;
    }

    if args.json {
        emitln(&format!("{:#}", report_json(&report, &universe, wall_ms)));
    } else {
        let pairs = report.header_pairs_checked;
        let plural = if pairs == 1 { "pair" } else { "pairs" };
        match &report.verdict {
            Verdict::Equivalent => {
                emitln(&format!(
                    "equivalent (checked {pairs} header {plural} in {wall_ms} ms)"
                ));
            }
            Verdict::Inequivalent(cx) => {
                emitln(&format!(
                    "inequivalent (checked {pairs} header {plural} in {wall_ms} ms)"
                ));
                emitln(&describe_counterexample(cx, &universe));
            }
        }
    }
    Ok(if report.verdict.is_equivalent() {
        EXIT_EQUIVALENT
    } else {
        EXIT_INEQUIVALENT
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32, CliError> {
    if args.n_max < 1 || args.repeats < 1 {
        return Err(CliError::Invalid(
            "--n-max and --repeats must be at least 1".to_string(),
        ));
    }
    let families: Vec<BenchFamily> = match args.family {
        Some(f) => vec![f],
        None => BenchFamily::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    for family in families {
        rows.extend(bench::run_family(family, args.n_max, args.repeats));
    }
    emit(&bench::to_csv(&rows));
    Ok(EXIT_EQUIVALENT)
}

pub fn cmd_dot(args: &DotArgs) -> Result<i32, CliError> {
    let program = load_program(args.program.as_deref(), args.file.as_deref())?;
    let universe = resolve_universe(&args.universe, &[&program])?;
    let stages: &[Stage] = if args.stages.is_empty() {
        &Stage::ALL
    } else {
        &args.stages
    };
    let written = write_stage_dots(&program.expr, &universe, &args.out_dir, stages)?;
    for path in &written {
        emitln(&path.display().to_string());
    }
    Ok(EXIT_EQUIVALENT)
}

pub fn cmd_oracle_refute(args: &RefuteArgs) -> Result<i32, CliError> {
    let left = load_program(args.program1.as_deref(), args.file1.as_deref())?;
    let right = load_program(args.program2.as_deref(), args.file2.as_deref())?;
    let universe = resolve_universe(&args.universe, &[&left, &right])?;
    match refute(&left.expr, &right.expr, &universe, args.bound) {
        Some((input, output)) => {
            let left_out = eval(&left.expr, &input, &universe, args.bound + DEPTH_HEADROOM);
            let side = if left_out.contains(&output) {
                "left"
            } else {
                "right"
            };
            emitln(&format!(
                "difference on input {}: output {} is produced by the {side} program only",
                format_packet_parts(&input.header, &input.stack, &universe),
                format_packet_parts(&output.header, &output.stack, &universe),
            ));
            Ok(EXIT_INEQUIVALENT)
        }
        None => {
            emitln(&format!(
                "no difference found with input stacks up to length {}",
                args.bound
            ));
            Ok(EXIT_EQUIVALENT)
        }
    }
}

/// Tag for a header in a DOT file name: field values joined with `-`, or
/// `e` for the empty (no-field) header.
pub fn header_tag(header: &Header) -> String {
    if header.0.is_empty() {
        "e".to_string()
    } else {
        header
            .0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Writes the selected pipeline stages for every header pair as
/// `{stage}_{a1}_{a2}.dot` under `dir`, returning the paths written.
pub fn write_stage_dots(
    e: &Expr,
    universe: &Universe,
    dir: &Path,
    stages: &[Stage],
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut written = Vec::new();
    let mut emit = |name: String, dot: String| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, dot).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
        Ok(())
    };
    for a1 in universe.headers() {
        for a2 in universe.headers() {
            let p = pipeline_stages(e, &a1, &a2, universe);
            let suffix = format!("{}_{}", header_tag(&a1), header_tag(&a2));
            for &stage in stages {
                let dot = match stage {
                    Stage::Trace => {
                        p.trace
                            .to_dot("trace", |q| p.trace_labels[q].clone(), |l| l.to_string())
                    }
                    Stage::Pushpop => {
                        p.pushpop
                            .to_dot("pushpop", |q| format!("q{q}"), |l| l.to_string())
                    }
                    Stage::Filter => {
                        p.filter
                            .to_dot("filter", |q| format!("q{q}"), |l| l.to_string())
                    }
                    Stage::Zip => p.zip.to_dot("zip", |q| format!("q{q}"), |l| l.to_string()),
                    Stage::Poppush => {
                        p.poppush
                            .to_dot("poppush", |q| format!("q{q}"), |l| l.to_string())
                    }
                };
                emit(format!("{}_{suffix}.dot", stage.name()), dot)?;
            }
        }
    }
    Ok(written)
}
