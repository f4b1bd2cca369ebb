use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lauricella::catalog::{self, Form};
use lauricella::harness::{run_suite, SuiteConfig};
use lauricella::identity::evaluate_identity;
use lauricella::{evaluate, ComplexMatrix, Error, LauricellaKind, ParameterSet, SeriesConfig, ToleranceConfig};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lauricella", version, about = "Matrix-argument Lauricella series and their recursion identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one series at a point.
    Eval(EvalArgs),
    /// Evaluate both sides of one catalog identity.
    Validate(ValidateArgs),
    /// Run the randomized validation suite and write a report.
    Sweep(SweepArgs),
    /// List catalog entries.
    List(ListArgs),
}

#[derive(Args)]
struct SeriesArgs {
    /// Highest total degree summed.
    #[arg(long, default_value_t = SeriesConfig::default().max_degree)]
    max_degree: usize,
    /// Relative shell norm at which summation stops.
    #[arg(long, default_value_t = SeriesConfig::default().term_tol)]
    term_tol: f64,
    /// Scale of the admitted region around the origin.
    #[arg(long, default_value_t = SeriesConfig::default().domain_guard)]
    domain_guard: f64,
}

impl SeriesArgs {
    fn config(&self) -> SeriesConfig {
        SeriesConfig {
            max_degree: self.max_degree,
            term_tol: self.term_tol,
            domain_guard: self.domain_guard,
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// `GA`..`GD` (arity taken from --x, or written as `GA(4)`) or `F1`..`F14`.
    #[arg(long)]
    kind: String,
    /// JSON file `{"a": [matrix..], "b": [..], "c": [..]}`; identity matrices of size --dim if omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Matrix size used when --params is omitted.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Comma-separated complex coordinates, e.g. `0.1+0.2i,0`.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Printed,
    Corrected,
}

#[derive(Args)]
struct ValidateArgs {
    /// Catalog entry id.
    #[arg(long)]
    id: String,
    #[arg(long)]
    params: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Shift magnitude.
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long, value_enum, default_value = "corrected")]
    form: FormArg,
    /// Residual above which the identity counts as failed; per-dimension default.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Glob over entry ids.
    #[arg(long, default_value = "*")]
    filter: String,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Comma-separated matrix sizes.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    n_max: u32,
    #[arg(long, env = "LAURICELLA_SEED", default_value_t = 0)]
    seed: u64,
    /// Report destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    series: SeriesArgs,
}

#[derive(Args)]
struct ListArgs {
    /// Emit the catalog export as JSON.
    #[arg(long)]
    json: bool,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_precondition() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::List(a) => cmd_list(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<Complex64>, Failure> {
    text.split(',')
        .enumerate()
        .map(|(i, tok)| {
            let tok: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
            Complex64::from_str(&tok).map_err(|_| Failure::usage(format!("--x[{i}]: cannot parse {tok:?} as a complex number")))
        })
        .collect()
}

/// Reads `{"a": [...], "b": [...], "c": [...]}`, naming the offending field on error.
fn read_params(path: &Path, kind: &LauricellaKind) -> Result<ParameterSet, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let root: Value = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Failure::usage("params: expected an object with fields a, b, c"))?;
    if let Some(extra) = obj.keys().find(|k| !["a", "b", "c"].contains(&k.as_str())) {
        return Err(Failure::usage(format!("params.{extra}: unknown field")));
    }
    let (na, nb, nc) = kind.group_sizes();
    let group = |name: &str, expected: usize| -> Result<Vec<ComplexMatrix>, Failure> {
        let items = obj
            .get(name)
            .ok_or_else(|| Failure::usage(format!("params.{name}: missing field")))?
            .as_array()
            .ok_or_else(|| Failure::usage(format!("params.{name}: expected an array of matrices")))?;
        if items.len() != expected {
            return Err(Failure::usage(format!(
                "params.{name}: {kind} takes {expected} matrices, got {}",
                items.len()
            )));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::from_value::<ComplexMatrix>(v.clone()).map_err(|e| Failure::usage(format!("params.{name}[{i}]: {e}")))
            })
            .collect()
    };
    let params = ParameterSet::new(group("a", na)?, group("b", nb)?, group("c", nc)?);
    params.validate(kind)?;
    Ok(params)
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json<T: Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("serializable output") + "\n"));
}

fn cmd_eval(args: EvalArgs) -> Result<u8, Failure> {
    let x = parse_point(&args.x)?;
    let kind = LauricellaKind::parse_with_arity(&args.kind, Some(x.len())).map_err(|e| Failure::usage(format!("--kind: {e}")))?;
    if x.len() != kind.arity() {
        return Err(Failure::usage(format!("--x: {kind} takes {} coordinates, got {}", kind.arity(), x.len())));
    }
    let params = match &args.params {
        Some(path) => read_params(path, &kind)?,
        None => {
            if args.dim == 0 {
                return Err(Failure::usage("--dim: must be at least 1"));
            }
            let slots = vec![ComplexMatrix::identity(args.dim); kind.signature().len()];
            ParameterSet::from_slots(&kind, slots)?
        }
    };
    let tol = ToleranceConfig::for_dim(params.dim());
    let result = evaluate(&kind, &params, &x, &args.series.config(), &tol)?;
    print_json(&result);
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8, Failure> {
    let entry = catalog::find(&args.id).map_err(|e| Failure::usage(format!("--id: {e}")))?;
    let x = parse_point(&args.x)?;
    if x.len() != entry.kind.arity() {
        return Err(Failure::usage(format!(
            "--x: {} takes {} coordinates, got {}",
            entry.kind,
            entry.kind.arity(),
            x.len()
        )));
    }
    let params = read_params(&args.params, &entry.kind)?;
    let form = match args.form {
        FormArg::Printed => Form::Printed,
        FormArg::Corrected => Form::Corrected,
    };
    let tol = ToleranceConfig::for_dim(params.dim());
    let eval = evaluate_identity(&entry, form, &params, &x, args.n, &args.series.config(), &tol)?;
    let threshold = args.tol.unwrap_or(tol.residual_tol);
    let pass = eval.converged && eval.residual <= threshold;
    print_json(&json!({
        "id": entry.id,
        "equation": entry.equation,
        "form": match form { Form::Printed => "printed", Form::Corrected => "corrected" },
        "n": args.n,
        "lhs": eval.lhs,
        "rhs": eval.rhs,
        "residual": eval.residual,
        "converged": eval.converged,
        "tolerance": threshold,
        "pass": pass,
    }));
    Ok(if pass { 0 } else { 1 })
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    if args.dims.is_empty() || args.dims.contains(&0) {
        return Err(Failure::usage("--dims: sizes must be positive"));
    }
    let mut config = SuiteConfig {
        trials: args.trials,
        dims: args.dims,
        n_max: args.n_max,
        seed: args.seed,
        series: args.series.config(),
        ..SuiteConfig::default()
    };
    if args.sequential {
        config.execution = lauricella::Execution::Sequential;
    }
    let report = run_suite(&args.filter, &config);
    let text = serde_json::to_string_pretty(&report.to_json_with_meta()).expect("report serializes");
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::usage(format!("--out {}: {e}", path.display())))?,
        None => emit(&(text + "\n")),
    }
    let failing = report.failing();
    if failing.is_empty() {
        eprintln!("{} entries checked, all pass", report.entry_count);
        Ok(0)
    } else {
        for id in &failing {
            eprintln!("FAIL {id}");
        }
        eprintln!("{} of {} entries failed", failing.len(), report.entry_count);
        Ok(1)
    }
}

fn cmd_list(args: ListArgs) -> Result<u8, Failure> {
    let entries = catalog::catalog();
    if args.json {
        print_json(&catalog::export_json(&entries));
        return Ok(0);
    }
    let width = entries.iter().map(|e| e.id.len()).max().unwrap_or(2);
    let mut table = format!("{:<width$}  {:<6}  {:<12}  {:<4}  hypotheses\n", "id", "kind", "label", "typo");
    for e in &entries {
        let _ = writeln!(
            table,
            "{:<width$}  {:<6}  {:<12}  {:<4}  {}",
            e.id,
            e.kind.to_string(),
            e.equation,
            if e.typo_candidate { "yes" } else { "" },
            e.hypothesis_strings().join("; ")
        );
    }
    emit(&table);
    Ok(0)
}
