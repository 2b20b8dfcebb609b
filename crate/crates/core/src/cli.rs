//! Command-line front end.
//!
//! Exit codes: 0 bisimilar or success, 1 not bisimilar or a refutation was
//! found, 2 bad input, 3 internal failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::model::{parse_system, serialize_system, BpaSystem, Process};
use crate::normalize::{compute_norms, standardize, NormalizeError, StandardSystem};
use crate::oracle::differential::Summary;
use crate::oracle::{differential_run, replay, verify_base_generators, DiffParams, GenParams, Oracle, Search};
use crate::refine::{compute_bisimilarity_base, verdict_from_base, CandidateMode, EngineConfig, EngineError, Outcome};

#[derive(Parser, Debug)]
#[command(name = "tnbpa", version, about = "Branching bisimilarity for totally normed BPA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether two processes are branching bisimilar.
    Check(CheckArgs),
    /// Print the final decomposition base.
    Base(BaseArgs),
    /// Print the norm of every constant.
    Norms(FileArgs),
    /// Print the system in standard form.
    Standardize(FileArgs),
    /// Generate a random totally normed system.
    Gen(GenArgs),
    /// Search for a distinguishing strategy with the bounded game.
    Oracle(OracleArgs),
    /// Run the engine against the bounded game on random systems.
    Fuzz(FuzzArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pruned,
    Exhaustive,
}

#[derive(Args, Debug)]
pub struct FileArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "pruned")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = crate::refine::DEFAULT_MAX_EXHAUSTIVE)]
    pub max_exhaustive: u64,
    /// Write the refinement trace as JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Also audit the base and cross-check the verdict with the bounded game.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BaseArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Print the base after every iteration.
    #[arg(long)]
    pub iterations: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 6)]
    pub constants: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub max_rhs_len: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    #[arg(long, default_value_t = 0.3)]
    pub silent_prob: f64,
    #[arg(long, default_value_t = 5)]
    pub norm_cap: u64,
    #[arg(long, default_value_t = 6)]
    pub extra_rules: usize,
    #[arg(long, default_value_t = 0.35)]
    pub twin_prob: f64,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            constants: self.constants,
            max_rhs_len: self.max_rhs_len,
            actions: self.actions,
            silent_prob: self.silent_prob,
            norm_cap: self.norm_cap,
            extra_rules: self.extra_rules,
            twin_prob: self.twin_prob,
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub file: PathBuf,
    pub left: String,
    pub right: String,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value_t = 24)]
    pub k_escalate: u32,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub gen: GenArgs,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::GuardExceeded { .. } | EngineError::NotRealtime => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        match e {
            NormalizeError::NotTotallyNormed(_) | NormalizeError::NormOverflow(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<crate::oracle::OracleError> for CliError {
    fn from(e: crate::oracle::OracleError) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Stdout text and exit code of a successful command.
pub struct Output {
    pub stdout: String,
    pub code: u8,
}

pub fn main_with(cli: Cli) -> ExitCode {
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(e) => {
            let (CliError::Input(msg) | CliError::Internal(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Check(a) => check(a),
        Command::Base(a) => base(a),
        Command::Norms(a) => norms(a),
        Command::Standardize(a) => standardize_cmd(a),
        Command::Gen(a) => Ok(Output {
            stdout: serialize_system(&crate::oracle::random_system(&a.params())),
            code: 0,
        }),
        Command::Oracle(a) => oracle(a),
        Command::Fuzz(a) => fuzz(a),
    }
}

fn load(path: &PathBuf) -> Result<BpaSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))
}

fn load_standard(path: &PathBuf) -> Result<StandardSystem, CliError> {
    Ok(standardize(&load(path)?)?)
}

fn process(std: &StandardSystem, text: &str) -> Result<Process, CliError> {
    std.parse_process(text).map_err(|e| CliError::Input(e.to_string()))
}

fn engine_config(a: &EngineArgs) -> EngineConfig {
    EngineConfig {
        mode: match a.mode {
            ModeArg::Pruned => CandidateMode::Pruned,
            ModeArg::Exhaustive => CandidateMode::Exhaustive,
        },
        max_exhaustive: a.max_exhaustive,
        ..EngineConfig::default()
    }
}

fn write_trace(path: &Option<PathBuf>, std: &StandardSystem, trace: &crate::refine::RefinementTrace) -> Result<(), CliError> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(&trace.to_json(std)).expect("json values serialize");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn check(a: CheckArgs) -> Result<Output, CliError> {
    let std = load_standard(&a.file)?;
    let (p, q) = (process(&std, &a.left)?, process(&std, &a.right)?);
    let (base, trace) = compute_bisimilarity_base(&std, &engine_config(&a.engine))?;
    write_trace(&a.engine.trace, &std, &trace)?;
    let verdict = verdict_from_base(base, &p, &q);
    let bisimilar = verdict.outcome == Outcome::Bisimilar;
    let dp = verdict.base.dcmp(&p).format(|c| std.name(c));
    let dq = verdict.base.dcmp(&q).format(|c| std.name(c));

    let mut out = String::new();
    let mut report = json!({
        "verdict": verdict.outcome,
        "left": a.left,
        "right": a.right,
        "left_decomposition": dp,
        "right_decomposition": dq,
        "iterations": trace.iterations.len(),
        "base": verdict.base.to_json(&std),
    });
    if !a.json {
        writeln!(out, "{}", if bisimilar { "bisimilar" } else { "not bisimilar" }).unwrap();
        writeln!(out, "left  {} = {dp}", a.left).unwrap();
        writeln!(out, "right {} = {dq}", a.right).unwrap();
    }

    if a.verify {
        let audit = verify_base_generators(&std, &verdict.base, a.k, 20, a.seed)?;
        let mut oracle = Oracle::new(&std);
        let search = oracle.find_distinction(&p, &q, a.k)?;
        let game = match &search {
            Search::Distinguished { level, distinction } => {
                if replay(&std, distinction).is_err() {
                    return Err(CliError::Internal("distinguishing strategy does not replay".into()));
                }
                json!({ "distinguished_at": level })
            }
            Search::NoneFound { bound } => json!({ "none_found_up_to": bound }),
        };
        report["audit"] = audit.to_json(&std);
        report["game"] = game;
        if !a.json {
            match &search {
                Search::Distinguished { level, .. } => writeln!(out, "game: distinguished at level {level}").unwrap(),
                Search::NoneFound { bound } => writeln!(out, "game: no distinction found up to {bound}").unwrap(),
            }
            writeln!(
                out,
                "audit: {} equations, {} samples, {} failures",
                audit.equations_checked,
                audit.samples_checked,
                audit.failure_count()
            )
            .unwrap();
        }
        if a.json {
            out = serde_json::to_string(&report).expect("json") + "\n";
        }
        if !audit.is_clean() || (bisimilar && search.is_distinguished()) {
            print!("{out}");
            return Err(CliError::Internal("the bounded game contradicts the final base".into()));
        }
    } else if a.json {
        out = serde_json::to_string(&report).expect("json") + "\n";
    }
    Ok(Output {
        stdout: out,
        code: if bisimilar { 0 } else { 1 },
    })
}

fn base(a: BaseArgs) -> Result<Output, CliError> {
    let std = load_standard(&a.file)?;
    let (base, trace) = compute_bisimilarity_base(&std, &engine_config(&a.engine))?;
    write_trace(&a.engine.trace, &std, &trace)?;
    let stdout = if a.json {
        let mut v = json!({ "base": base.to_json(&std), "iterations": trace.iterations.len() });
        if a.iterations {
            v["bases"] = trace.iterations.iter().map(|it| json!(it.after.to_json(&std))).collect();
        }
        serde_json::to_string(&v).expect("json") + "\n"
    } else if a.iterations {
        let mut out = String::new();
        for (k, it) in trace.iterations.iter().enumerate() {
            writeln!(out, "# iteration {}", k + 1).unwrap();
            out.push_str(&it.after.render_text(&std));
        }
        out
    } else {
        base.render_text(&std)
    };
    Ok(Output { stdout, code: 0 })
}

fn norms(a: FileArgs) -> Result<Output, CliError> {
    let sys = load(&a.file)?;
    let table = compute_norms(&sys);
    let stdout = if a.json {
        let map: serde_json::Map<String, serde_json::Value> = sys
            .constant_ids()
            .map(|c| {
                let v = match table.get(c).finite() {
                    Some(n) => json!(n),
                    None => json!("inf"),
                };
                (sys.constant_name(c).to_string(), v)
            })
            .collect();
        serde_json::to_string(&map).expect("json") + "\n"
    } else {
        sys.constant_ids()
            .map(|c| format!("{} {}\n", sys.constant_name(c), table.get(c)))
            .collect()
    };
    Ok(Output { stdout, code: 0 })
}

fn standardize_cmd(a: FileArgs) -> Result<Output, CliError> {
    let std = load_standard(&a.file)?;
    let stdout = if a.json {
        let order: Vec<serde_json::Value> = std
            .system()
            .constant_ids()
            .map(|c| json!({ "name": std.name(c), "norm": std.norm(c) }))
            .collect();
        let contracted: Vec<serde_json::Value> =
            std.contracted().iter().map(|(r, k)| json!({ "removed": r, "into": k })).collect();
        serde_json::to_string(&json!({
            "order": order,
            "contracted": contracted,
            "system": serialize_system(std.system()),
        }))
        .expect("json")
            + "\n"
    } else {
        std.render()
    };
    Ok(Output { stdout, code: 0 })
}

fn oracle(a: OracleArgs) -> Result<Output, CliError> {
    let std = load_standard(&a.file)?;
    let (p, q) = (process(&std, &a.left)?, process(&std, &a.right)?);
    let mut oracle = Oracle::new(&std);
    match oracle.find_distinction(&p, &q, a.k)? {
        Search::Distinguished { level, distinction } => {
            replay(&std, &distinction).map_err(|e| CliError::Internal(e.to_string()))?;
            let stdout = if a.json {
                serde_json::to_string(&json!({ "level": level, "distinction": distinction.to_json(&std) })).expect("json")
                    + "\n"
            } else {
                format!(
                    "distinguished at level {level}\n{}\n",
                    serde_json::to_string_pretty(&distinction.to_json(&std)).expect("json")
                )
            };
            Ok(Output { stdout, code: 1 })
        }
        Search::NoneFound { bound } => {
            let stdout = if a.json {
                serde_json::to_string(&json!({ "none_found_up_to": bound })).expect("json") + "\n"
            } else {
                format!("no distinction found up to {bound}\n")
            };
            Ok(Output { stdout, code: 0 })
        }
    }
}

fn fuzz(a: FuzzArgs) -> Result<Output, CliError> {
    let params = DiffParams {
        gen: a.gen.params(),
        trials: a.trials,
        pairs: a.pairs,
        k: a.k,
        k_escalate: a.k_escalate,
        jobs: a.jobs,
        ..DiffParams::default()
    };
    let reports = differential_run(&params);
    let mut out = String::new();
    for r in &reports {
        out.push_str(&serde_json::to_string(r).expect("json"));
        out.push('\n');
    }
    let summary = Summary::of(&reports);
    out.push_str(&serde_json::to_string(&json!({ "summary": summary })).expect("json"));
    out.push('\n');
    Ok(Output {
        stdout: out,
        code: if summary.failed_trials == 0 { 0 } else { 1 },
    })
}
