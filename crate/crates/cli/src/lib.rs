//! Command-line driver: `transform`, `analyze`, `solve`, `estimate` and
//! `gadget synth`. Every subcommand prints one JSON report on standard
//! output; errors go to standard error.
//!
//! Exit codes: 0 success, 1 usage, 2 a size guard was hit, 3 bad input.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use maxlinsat_core::codes::{self, CodeView, DEFAULT_DISTANCE_CAP, DEFAULT_SUBSET_LIMIT};
use maxlinsat_core::decoders::{DecoderError, DecoderKind, DEFAULT_ISD_ITERATIONS};
use maxlinsat_core::dqi::{self, auto_degree, DqiError, EstimateOptions};
use maxlinsat_core::gadgets::{
    synthesize_gadget, GadgetError, GadgetKind, SynthesisOptions, TruthTable, DEFAULT_SEARCH_CAP,
};
use maxlinsat_core::io::{self, IoError, Metadata, Problem, ProblemFile, Report, ReportKind};
use maxlinsat_core::linsat::{LinsatError, LinsatInstance, DEFAULT_ENUMERATION_LIMIT};
use maxlinsat_core::model::ConstraintModel;
use maxlinsat_core::solvers::{self, AnnealSchedule, SolveError, SolverKind};
use maxlinsat_core::transform::{full_pipeline, PipelineOptions, PipelineOutput, TransformError};
use maxlinsat_core::{Exec, FieldOrder, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "maxlinsat", version, about = "Compile, analyse, solve and estimate Max-LINSAT problems")]
struct Cli {
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower a constraint model to weighted and unweighted instances.
    Transform(TransformArgs),
    /// Dual-code report: rank, minimum distance and dependent row sets.
    Analyze(AnalyzeArgs),
    /// Run a classical solver.
    Solve(SolveArgs),
    /// DQI performance estimate.
    Estimate(EstimateArgs),
    /// Gadget tools.
    Gadget {
        #[command(subcommand)]
        command: GadgetCommand,
    },
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Constraint model file.
    input: PathBuf,
    /// Write the weighted instance here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the unweighted instance here.
    #[arg(long)]
    out_unweighted: Option<PathBuf>,
    /// Pad sets with unattainable residues before equalizing.
    #[arg(long)]
    pad_sets: bool,
    /// Largest dependent row set reported.
    #[arg(long, default_value_t = DEFAULT_DISTANCE_CAP)]
    dep_cap: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Problem file (constraint model or linsat instance).
    input: PathBuf,
    /// Largest dependent set size tried when searching for the minimum distance.
    #[arg(long, default_value_t = DEFAULT_DISTANCE_CAP)]
    dmin_cap: usize,
    /// Largest dependent row set reported.
    #[arg(long, default_value_t = DEFAULT_DISTANCE_CAP)]
    dep_cap: usize,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Problem file (constraint model or linsat instance).
    input: PathBuf,
    /// brute, anneal or prange.
    #[arg(long)]
    solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Annealing chains or Prange attempts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Moves per annealing chain.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Problem file (constraint model or linsat instance).
    input: PathBuf,
    /// Polynomial degree; defaults to the largest the minimum distance allows.
    #[arg(long)]
    l: Option<usize>,
    /// lookup, nearest or isd; defaults to lookup when its table fits.
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// Sample this many error patterns instead of enumerating.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ISD_ITERATIONS)]
    isd_iterations: usize,
}

#[derive(Debug, Subcommand)]
enum GadgetCommand {
    /// Exhaustive search for a small template realising a truth table.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Truth table as 0/1 characters, row 0 first (`0001` is AND).
    #[arg(long)]
    table: String,
    /// Field order.
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long, default_value_t = 3)]
    max_constraints: usize,
    /// Allow false rows to satisfy different numbers of constraints.
    #[arg(long)]
    approximate: bool,
    /// Auxiliary variables available to the template.
    #[arg(long, default_value_t = 0)]
    aux: usize,
}

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INPUT, message: message.to_string() }
    }

    fn guard(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_GUARD, message: message.to_string() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::input(e)
    }
}

impl From<LinsatError> for CliError {
    fn from(e: LinsatError) -> Self {
        match e {
            LinsatError::Guard(_) => Self::guard(e),
            _ => Self::input(e),
        }
    }
}

impl From<DecoderError> for CliError {
    fn from(e: DecoderError) -> Self {
        match e {
            DecoderError::Guard(_) => Self::guard(e),
            _ => Self::input(e),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Guard(_) => Self::guard(e),
            TransformError::Linsat(l) => l.into(),
            _ => Self::input(e),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Guard(_) => Self::guard(e),
            SolveError::Linsat(l) => l.into(),
        }
    }
}

impl From<DqiError> for CliError {
    fn from(e: DqiError) -> Self {
        match e {
            DqiError::Guard(_) => Self::guard(e),
            DqiError::Linsat(l) => l.into(),
            DqiError::Decoder(d) => d.into(),
            _ => Self::input(e),
        }
    }
}

impl From<GadgetError> for CliError {
    fn from(e: GadgetError) -> Self {
        match e {
            GadgetError::Guard(_) => Self::guard(e),
            _ => Self::input(e),
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match dispatch(cli.command, exec) {
        Ok(stdout) => Outcome { code: EXIT_OK, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.code, stdout: String::new(), stderr: format!("error: {}\n", e.message) },
    }
}

fn dispatch(command: Command, exec: Exec) -> Result<String, CliError> {
    match command {
        Command::Transform(a) => transform(a, exec),
        Command::Analyze(a) => analyze(a, exec),
        Command::Solve(a) => solve(a, exec),
        Command::Estimate(a) => estimate(a, exec),
        Command::Gadget { command: GadgetCommand::Synth(a) } => synth(a, exec),
    }
}

fn pipeline(
    model: &ConstraintModel,
    dep_cap: Option<usize>,
    pad_sets: bool,
    exec: Exec,
) -> Result<PipelineOutput, CliError> {
    let opts = PipelineOptions { dependency_cap: dep_cap, pad_sets, exec, ..PipelineOptions::default() };
    Ok(full_pipeline(model, &opts)?)
}

fn instance_summary(inst: &LinsatInstance) -> Value {
    json!({
        "field_order": inst.order().get(),
        "variables": inst.num_vars(),
        "constraints": inst.num_constraints(),
        "total_weight": inst.total_weight(),
        "unweighted": inst.is_unweighted(),
        "uniform_set_sizes": inst.has_uniform_set_sizes(),
    })
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize to JSON")
}

fn transform(a: TransformArgs, exec: Exec) -> Result<String, CliError> {
    let file = ProblemFile::load(&a.input)?;
    let Problem::Constraint(model) = &file.problem else {
        return Err(CliError::input("transform expects a \"constraint\" problem file"));
    };
    let out = pipeline(model, Some(a.dep_cap), a.pad_sets, exec)?;
    if let Some(path) = &a.out {
        ProblemFile::linsat(out.weighted.clone(), file.metadata.clone()).save(path)?;
    }
    if let Some(path) = &a.out_unweighted {
        ProblemFile::linsat(out.unweighted.clone(), file.metadata.clone()).save(path)?;
    }
    let report = json!({
        "certificate": to_value(&out.certificate),
        "diagnostics": to_value(&out.diagnostics),
        "weighted": instance_summary(&out.weighted),
        "unweighted": instance_summary(&out.unweighted),
    });
    Ok(Report::new(ReportKind::Transform, file.metadata, report).to_json())
}

/// The instance a command works on: linsat files as they are, constraint
/// models through the pipeline.
struct Target {
    metadata: Metadata,
    instance: LinsatInstance,
    pipeline: Option<(ConstraintModel, PipelineOutput)>,
}

fn load_target(path: &PathBuf, exec: Exec) -> Result<Target, CliError> {
    let file = ProblemFile::load(path)?;
    Ok(match file.problem {
        Problem::Linsat(instance) => Target { metadata: file.metadata, instance, pipeline: None },
        Problem::Constraint(model) => {
            let out = pipeline(&model, None, false, exec)?;
            Target { metadata: file.metadata, instance: out.weighted.clone(), pipeline: Some((model, out)) }
        }
    })
}

fn analyze(a: AnalyzeArgs, exec: Exec) -> Result<String, CliError> {
    let t = load_target(&a.input, exec)?;
    let inst = &t.instance;
    let view = CodeView::from_instance(inst);
    let d = codes::min_distance_with(&view, a.dmin_cap, DEFAULT_SUBSET_LIMIT, exec);
    let prov: Vec<_> = inst.constraints().iter().map(|c| c.provenance).collect();
    let deps = codes::find_dependent_row_sets_with(&inst.matrix(), Some(&prov), a.dep_cap, DEFAULT_SUBSET_LIMIT, exec);
    let report = json!({
        "source": if t.pipeline.is_some() { "constraint" } else { "linsat" },
        "field_order": inst.order().get(),
        "length": view.length(),
        "variables": inst.num_vars(),
        "rank": view.rank(),
        "dimension": view.dimension(),
        "min_distance": to_value(&d),
        "max_degree": auto_degree(d, inst.num_constraints()),
        "dependencies": to_value(&deps),
        "weight_gcd": inst.weight_gcd(),
        "unweighted": inst.is_unweighted(),
        "uniform_set_sizes": inst.has_uniform_set_sizes(),
    });
    Ok(Report::new(ReportKind::Analysis, t.metadata, report).to_json())
}

fn solve(a: SolveArgs, exec: Exec) -> Result<String, CliError> {
    let t = load_target(&a.input, exec)?;
    let inst = &t.instance;
    let result = match a.solver {
        SolverKind::Brute => solvers::brute_force(inst, DEFAULT_ENUMERATION_LIMIT, exec)?,
        SolverKind::Anneal => {
            let schedule =
                AnnealSchedule { restarts: a.restarts.unwrap_or(1), steps: a.steps, ..AnnealSchedule::default() };
            solvers::simulated_annealing(inst, &schedule, a.seed, exec)
        }
        SolverKind::Prange => solvers::prange_solve(inst, a.restarts.unwrap_or(1), a.seed, exec),
    };
    let mut report = to_value(&result);
    if let Some((model, out)) = &t.pipeline {
        let cert = &out.certificate;
        let source = cert.decode(&result.assignment).and_then(|x| {
            let e = model.evaluate(&x).ok()?;
            Some(json!({
                "assignment": x,
                "objective": io::rational::to_string(&e.objective),
                "satisfied_weight": io::rational::to_string(&e.satisfied_weight),
                "total": io::rational::to_string(&e.total()),
                "violated": e.violated,
            }))
        });
        let mapped = cert.source_value(Rational::from_integer(result.weight as i128));
        report["source"] = json!({
            "decoded": source,
            "mapped_value": io::rational::to_string(&mapped),
        });
    }
    Ok(Report::new(ReportKind::Solve, t.metadata, report).to_json())
}

fn estimate(a: EstimateArgs, exec: Exec) -> Result<String, CliError> {
    let t = load_target(&a.input, exec)?;
    let mut notes = Vec::new();
    let inst = match &t.pipeline {
        Some((_, out)) => {
            notes.push("estimated on the unweighted pipeline output".to_string());
            out.unweighted.clone()
        }
        None if t.instance.is_unweighted() => t.instance.clone(),
        None => {
            notes.push("weights expanded into duplicated constraints".to_string());
            t.instance.to_unweighted().0
        }
    };
    let opts = EstimateOptions {
        degree: a.l,
        decoder: a.decoder,
        samples: a.samples,
        seed: a.seed,
        isd_iterations: a.isd_iterations,
        exec,
        ..EstimateOptions::default()
    };
    let est = dqi::estimate(&inst, &opts)?;
    let mut report = to_value(&est);
    report["instance"] = instance_summary(&inst);
    if !notes.is_empty() {
        let all: Vec<String> = notes.into_iter().chain(est.notes.iter().cloned()).collect();
        report["notes"] = json!(all);
    }
    Ok(Report::new(ReportKind::Estimate, t.metadata, report).to_json())
}

fn synth(a: SynthArgs, exec: Exec) -> Result<String, CliError> {
    let table = TruthTable::parse(&a.table)?;
    let order = FieldOrder::new(a.q).map_err(CliError::input)?;
    let kind = if a.approximate { GadgetKind::Approximate } else { GadgetKind::Exact };
    let opts = SynthesisOptions { max_constraints: a.max_constraints, kind, aux: a.aux, cap: DEFAULT_SEARCH_CAP, exec };
    let gadget = synthesize_gadget(&table, order, &opts)?;
    let (verified, rows) = match &gadget {
        Some(g) => (g.verify(&table)?, Some(g.row_values()?)),
        None => (false, None),
    };
    let report = json!({
        "table": a.table,
        "field_order": a.q,
        "max_constraints": a.max_constraints,
        "gadget": gadget.as_ref().map(to_value),
        "row_values": rows,
        "verified": verified,
    });
    Ok(Report::new(ReportKind::Gadget, Metadata::default(), report).to_json())
}
