use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tbf::acceptance::{run_corpus_dir, run_criteria, Suite};
use tbf::caps::caps_from_env;
use tbf::input::{self, InputError};
use tbf::job::{job_from_flags, run_job, Command, Kind, RunError};
use tbf::report::{char_table_json, failure_record, render, Format};
use tbf_core::character::character_table;
use tbf_core::Caps;

const OK: u8 = 0;
const VERIFICATION_FAILURE: u8 = 1;
const INPUT_ERROR: u8 = 2;

/// Twisted conjugacy classes, the twisted Burnside-Frobenius check and Gauss
/// congruences for finite groups, abelian groups and Z^n x| F.
///
/// Size limits can be set with TBF_CAPS, e.g. TBF_CAPS=closure=50000,quotient=20000.
#[derive(Parser)]
#[command(name = "tbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Endomorphism of a finite group (--group, --endo).
    Finite(JobArgs),
    /// Integer matrix on Z^n (--matrix), or an endomorphism of a finitely
    /// generated abelian group (--group).
    Abelian(JobArgs),
    /// Endomorphism of Z^n x| F (--group names the extension file).
    Extension(JobArgs),
    /// Run the acceptance suite and the jobs of a corpus directory.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct JobArgs {
    #[arg(long)]
    group: Option<PathBuf>,
    /// Defaults to the identity.
    #[arg(long)]
    endo: Option<PathBuf>,
    /// Inline literal such as "[[2,1],[1,1]]", or a matrix file.
    #[arg(long)]
    matrix: Option<String>,
    /// Rational representation to test as a fixed point of the dual map.
    #[arg(long)]
    rep: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    sequence: Option<usize>,
    #[arg(long, value_name = "N")]
    congruence: Option<usize>,
    #[arg(long, value_name = "N")]
    tbft: Option<usize>,
    #[arg(long)]
    separate: bool,
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    properties: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the group as a Cayley-table definition (finite jobs).
    #[arg(long, value_name = "PATH")]
    export_group: Option<PathBuf>,
    /// Write the character table as JSON (finite jobs).
    #[arg(long, value_name = "PATH")]
    export_table: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Acceptance suite to run. Defaults to smoke when --dir is not given;
    /// with --dir and no --suite only the directory's jobs run.
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Directory of *.job.json files; defaults to the bundled corpus.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn bundled_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn input_failure(e: &InputError) -> ExitCode {
    eprintln!("{}", failure_record(e.kind(), &e.to_string(), e.witness()));
    ExitCode::from(INPUT_ERROR)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), InputError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| InputError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    emit(&text, Some(path))
}

fn commands(a: &JobArgs) -> Vec<Command> {
    let mut c = vec![Command::Reidemeister];
    c.extend(a.sequence.map(Command::Sequence));
    c.extend(a.congruence.map(Command::Congruence));
    c.extend(a.tbft.map(Command::Tbft));
    if a.separate {
        c.push(Command::Separate);
    }
    if a.certify {
        c.push(Command::Certify);
    }
    if a.properties {
        c.push(Command::Properties);
    }
    c
}

fn exports(a: &JobArgs, kind: Kind, caps: &Caps) -> Result<(), InputError> {
    if a.export_group.is_none() && a.export_table.is_none() {
        return Ok(());
    }
    let Some(group_path) = a.group.as_deref().filter(|_| kind == Kind::Finite) else {
        return Err(InputError::Field {
            origin: "command line".into(),
            field: "export".into(),
            message: "exports need a finite job with --group".into(),
        });
    };
    let group = input::load_group(group_path, caps.closure)?;
    if let Some(path) = &a.export_group {
        write_json(path, &group.export())?;
    }
    if let Some(path) = &a.export_table {
        let table = character_table(&group.group, caps.char_table_order).map_err(|e| InputError::Field {
            origin: group_path.display().to_string(),
            field: "group".into(),
            message: e.to_string(),
        })?;
        write_json(path, &char_table_json(&table, &group))?;
    }
    Ok(())
}

fn run_flags(kind: Kind, a: &JobArgs, caps: &Caps) -> ExitCode {
    let spec = job_from_flags(kind, a.group.as_deref(), a.endo.as_deref(), a.matrix.as_deref(), a.rep.as_deref(), commands(a));
    let report = match run_job(&spec, caps) {
        Ok(r) => r,
        Err(RunError::Input(e)) => return input_failure(&e),
        Err(e @ RunError::Engine(_)) => {
            eprintln!("{}", failure_record("ValidationError", &e.to_string(), None));
            return ExitCode::from(VERIFICATION_FAILURE);
        }
    };
    if let Err(e) = exports(a, kind, caps) {
        return input_failure(&e);
    }
    if let Err(e) = emit(&render(&report, a.format), a.out.as_deref()) {
        return input_failure(&e);
    }
    if report.pass() {
        ExitCode::from(OK)
    } else {
        let witness = serde_json::json!({ "failures": report.failures });
        eprintln!("{}", failure_record("VerificationFailure", &report.name, Some(witness)));
        ExitCode::from(VERIFICATION_FAILURE)
    }
}

fn run_corpus(a: &CorpusArgs, caps: &Caps) -> ExitCode {
    let suite = match (&a.suite, &a.dir) {
        (Some(s), _) => Some(*s),
        (None, None) => Some(Suite::Smoke),
        (None, Some(_)) => None,
    };
    let dir = a.dir.clone().unwrap_or_else(bundled_corpus);
    let mut text = String::new();
    let mut failed = false;
    if let Some(suite) = suite {
        for c in run_criteria(suite, caps) {
            failed |= !c.pass();
            text.push_str(&c.summary());
        }
    }
    let run = match run_corpus_dir(&dir, caps, a.workers, a.format) {
        Ok(r) => r,
        Err(e) => return input_failure(&e),
    };
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    for job in &run.jobs {
        text.push_str(&job.output);
    }
    let passed = run.jobs.iter().filter(|j| j.exit == 0).count();
    text.push_str(&format!("jobs: {} run, {} passed, {} failed\n", run.jobs.len(), passed, run.jobs.len() - passed));
    if let Err(e) = emit(&text, a.out.as_deref()) {
        return input_failure(&e);
    }
    match run.exit_code() {
        0 if !failed => ExitCode::from(OK),
        INPUT_ERROR_I32 => ExitCode::from(INPUT_ERROR),
        _ => ExitCode::from(VERIFICATION_FAILURE),
    }
}

const INPUT_ERROR_I32: i32 = INPUT_ERROR as i32;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let caps = match caps_from_env() {
        Ok(c) => c,
        Err(message) => {
            eprintln!("{}", failure_record("ParseError", &message, None));
            return ExitCode::from(INPUT_ERROR);
        }
    };
    match &cli.command {
        Cmd::Finite(a) => run_flags(Kind::Finite, a, &caps),
        Cmd::Abelian(a) => run_flags(Kind::Abelian, a, &caps),
        Cmd::Extension(a) => run_flags(Kind::Extension, a, &caps),
        Cmd::Corpus(a) => run_corpus(a, &caps),
    }
}
