//! Library half of the `colsubset` binary: argument parsing, I/O and
//! subcommand dispatch.

pub mod io;
pub mod report;

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use colsubset_core::selectors::{
    decide_with, select_exact_with, select_greedy_forward, select_greedy_frobenius,
    select_local_swap_volume, DecisionQuery, ExactOptions, SelectionResult,
};
use colsubset_core::verification::{run_suite, SuiteConfig};
use colsubset_core::x3c::{
    equivalence_rows, gadget, gap_report, generate_false, generate_true, reduce, solve_exact,
    X3CInstance,
};
use colsubset_core::{CriterionKind, CriterionSpec, DenseMatrix, SchattenP};

pub use io::{detect_format, emit_matrix, parse_matrix, Format};
use report::{yes_no, Record, Report, Val};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] colsubset_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Exit status of a successful run: `Yes` for success, a yes answer or
/// holding gaps; `No` for a no answer or a violated check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Yes,
    No,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Yes => 0,
            Outcome::No => 1,
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

/// Exit code for errors, including usage errors.
pub const ERROR_EXIT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "colsubset",
    version,
    about = "Column subset selection and X3C reduction tools"
)]
pub struct RunConfig {
    /// Read input from this file instead of standard input.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format for matrices and reports (csv means plain text reports).
    /// Input matrices are detected automatically.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = 1,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    GreedyFrobenius,
    Greedy,
    LocalSwap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Criterion value of the whole input matrix.
    Eval {
        #[arg(long)]
        criterion: String,
        #[arg(long)]
        p: Option<String>,
    },
    /// Choose k columns of the input matrix.
    Select {
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long)]
        k: usize,
        /// Required for exact and greedy; local-swap always maximizes volume.
        #[arg(long)]
        criterion: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value_t = 100)]
        max_sweeps: usize,
        /// Allow exhaustive search on more than 30 columns.
        #[arg(long)]
        allow_large: bool,
    },
    /// Does some k-column submatrix reach the threshold b?
    Decide {
        #[arg(long)]
        criterion: String,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        allow_large: bool,
    },
    /// X3C instance tools.
    X3c {
        #[command(subcommand)]
        command: X3cCommand,
    },
    /// Exact optima of a cover-free instance's reduction against the gap thresholds.
    Gap,
    /// The two-column overlap gadget, or a criterion value on it.
    Gadget {
        /// Number of elements the two sets share (1 or 2).
        #[arg(long)]
        shared: usize,
        #[arg(long)]
        eval: Option<String>,
        #[arg(long)]
        p: Option<String>,
    },
    /// Randomized lemma checks.
    Lemmas {
        /// Draws per matrix family.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum X3cCommand {
    /// Instance with a planted exact cover plus extra random sets.
    GenTrue {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        extra: usize,
    },
    /// Random instance certified to have no exact cover.
    GenFalse {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Find an exact cover.
    Solve,
    /// The reduction matrix of an instance.
    Reduce,
    /// Check that every registered criterion's decision answer matches the solver.
    Verify,
}

/// `--criterion` with an optional `--p`, which may not contradict a `:p=`
/// suffix.
pub fn parse_criterion(id: &str, p: Option<&str>) -> Result<CriterionSpec, CliError> {
    let Some(p) = p else {
        return Ok(id.parse()?);
    };
    let p: SchattenP = p.parse()?;
    if !id.contains(":p=") {
        return Ok(format!("{id}:p={p}").parse()?);
    }
    let spec: CriterionSpec = id.parse()?;
    if spec.p() != Some(p) {
        return Err(CliError::Usage(format!(
            "--p {p} contradicts criterion {id}"
        )));
    }
    Ok(spec)
}

struct Io<'a> {
    config: &'a RunConfig,
    stdin: &'a mut dyn Read,
}

impl Io<'_> {
    fn read_text(&mut self) -> Result<String, CliError> {
        match &self.config.input {
            Some(path) => Ok(fs::read_to_string(path)?),
            None => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s)?;
                Ok(s)
            }
        }
    }

    fn read_matrix(&mut self) -> Result<DenseMatrix, CliError> {
        let text = self.read_text()?;
        parse_matrix(&text, detect_format(&text))
    }

    fn read_instance(&mut self) -> Result<X3CInstance, CliError> {
        Ok(self.read_text()?.parse()?)
    }
}

fn exact_options(config: &RunConfig, allow_large: bool) -> ExactOptions {
    ExactOptions {
        threads: config.threads as usize,
        allow_large,
    }
}

fn selection_report(r: &SelectionResult) -> Report {
    Report::single(
        Record::new()
            .with("method", r.method.as_str())
            .with("criterion", r.value.criterion.id())
            .with("k", r.value.subset_size)
            .with("value", r.value.value)
            .with("subset", Val::Indices(r.subset.indices().to_vec()))
            .with("subsets_evaluated", r.subsets_evaluated),
    )
}

enum Payload {
    Report(Report),
    Text(String),
}

struct Run {
    payload: Payload,
    outcome: Outcome,
    elapsed: Option<Duration>,
}

impl Run {
    fn report(report: Report, outcome: Outcome, elapsed: Duration) -> Self {
        Self {
            payload: Payload::Report(report),
            outcome,
            elapsed: Some(elapsed),
        }
    }

    fn text(text: String) -> Self {
        Self {
            payload: Payload::Text(text),
            outcome: Outcome::Yes,
            elapsed: None,
        }
    }
}

fn value_output(config: &RunConfig, criterion: &CriterionSpec, value: f64) -> Run {
    let text = match config.format {
        Format::Csv => format!("{value:?}\n"),
        Format::Json => Report::single(
            Record::new()
                .with("criterion", criterion.id())
                .with("value", value),
        )
        .to_json(),
    };
    Run::text(text)
}

fn execute(config: &RunConfig, io: &mut Io<'_>) -> Result<Run, CliError> {
    let started = Instant::now();
    match &config.command {
        Command::Eval { criterion, p } => {
            let spec = parse_criterion(criterion, p.as_deref())?;
            let a = io.read_matrix()?;
            Ok(value_output(config, &spec, spec.evaluate(&a)?))
        }
        Command::Select {
            method,
            k,
            criterion,
            p,
            max_sweeps,
            allow_large,
        } => {
            let a = io.read_matrix()?;
            let need_criterion = || -> Result<CriterionSpec, CliError> {
                let id = criterion
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("this method needs --criterion".into()))?;
                parse_criterion(id, p.as_deref())
            };
            let result = match method {
                MethodArg::Exact => select_exact_with(
                    &a,
                    *k,
                    &need_criterion()?,
                    &exact_options(config, *allow_large),
                )?,
                MethodArg::Greedy => select_greedy_forward(&a, *k, &need_criterion()?)?,
                MethodArg::GreedyFrobenius => {
                    if criterion.is_some() {
                        return Err(CliError::Usage(
                            "greedy-frobenius always minimizes the Frobenius norm; drop --criterion"
                                .into(),
                        ));
                    }
                    select_greedy_frobenius(&a, *k)?
                }
                MethodArg::LocalSwap => {
                    if let Some(id) = criterion {
                        if parse_criterion(id, p.as_deref())?.kind() != CriterionKind::Volume {
                            return Err(CliError::Usage("local-swap only maximizes volume".into()));
                        }
                    }
                    select_local_swap_volume(&a, *k, config.seed, *max_sweeps)?
                }
            };
            Ok(Run::report(
                selection_report(&result),
                Outcome::Yes,
                result.elapsed,
            ))
        }
        Command::Decide {
            criterion,
            p,
            k,
            b,
            allow_large,
        } => {
            let spec = parse_criterion(criterion, p.as_deref())?;
            let query = DecisionQuery::new(spec, *k, *b)?;
            let a = io.read_matrix()?;
            let d = decide_with(&a, &query, &exact_options(config, *allow_large))?;
            let mut rec = Record::new()
                .with("answer", yes_no(d.answer))
                .with("criterion", spec.id())
                .with("k", *k)
                .with("b", *b)
                .with("optimum", d.optimum);
            if let Some(w) = &d.witness {
                rec.push("witness", Val::Indices(w.indices().to_vec()));
            }
            Ok(Run::report(
                Report::single(rec),
                Outcome::from_bool(d.answer),
                started.elapsed(),
            ))
        }
        Command::X3c { command } => execute_x3c(config, io, command, started),
        Command::Gap => {
            let inst = io.read_instance()?;
            let rows = gap_report(&inst, &exact_options(config, false))?;
            let all_hold = rows.iter().all(|r| r.gap_holds);
            let report = Report {
                header: Record::new()
                    .with("m", inst.m())
                    .with("n", inst.len())
                    .with("k", inst.m())
                    .with("all_hold", all_hold),
                rows: rows
                    .iter()
                    .map(|r| {
                        let mut rec = Record::new()
                            .with("criterion", r.criterion.id())
                            .with("optimum", r.exact_optimum)
                            .with("threshold", r.threshold);
                        if let Some(alt) = r.alternate_threshold {
                            rec.push("alternate_threshold", alt);
                        }
                        rec.with("gap_holds", r.gap_holds)
                            .with("witness", Val::Indices(r.witness.indices().to_vec()))
                    })
                    .collect(),
            };
            Ok(Run::report(
                report,
                Outcome::from_bool(all_hold),
                started.elapsed(),
            ))
        }
        Command::Gadget { shared, eval, p } => {
            let g = gadget(*shared)?;
            match eval {
                Some(id) => {
                    let spec = parse_criterion(id, p.as_deref())?;
                    Ok(value_output(config, &spec, spec.evaluate(&g)?))
                }
                None => Ok(Run::text(emit_matrix(&g, config.format))),
            }
        }
        Command::Lemmas { trials } => {
            let cfg = SuiteConfig {
                seed: config.seed,
                trials: *trials,
                ..SuiteConfig::default()
            };
            let reports = run_suite(&cfg)?;
            let all_pass = reports.iter().all(|r| r.passed());
            let report = Report {
                header: Record::new()
                    .with("seed", config.seed)
                    .with("trials", *trials)
                    .with("all_pass", all_pass),
                rows: reports
                    .iter()
                    .map(|r| {
                        Record::new()
                            .with("lemma", r.lemma_id.clone())
                            .with("trials", r.trials)
                            .with("failures", r.failures)
                            .with("worst_violation", r.worst_violation)
                            .with("status", if r.passed() { "pass" } else { "FAIL" })
                    })
                    .collect(),
            };
            Ok(Run::report(
                report,
                Outcome::from_bool(all_pass),
                started.elapsed(),
            ))
        }
    }
}

fn execute_x3c(
    config: &RunConfig,
    io: &mut Io<'_>,
    command: &X3cCommand,
    started: Instant,
) -> Result<Run, CliError> {
    match command {
        X3cCommand::GenTrue { m, extra } => Ok(Run::text(
            generate_true(*m, *extra, config.seed)?.to_string(),
        )),
        X3cCommand::GenFalse { m, n } => {
            Ok(Run::text(generate_false(*m, *n, config.seed)?.to_string()))
        }
        X3cCommand::Reduce => {
            let inst = io.read_instance()?;
            Ok(Run::text(emit_matrix(&reduce(&inst).matrix, config.format)))
        }
        X3cCommand::Solve => {
            let inst = io.read_instance()?;
            let cover = solve_exact(&inst);
            let mut rec = Record::new().with("cover", yes_no(cover.is_some()));
            if let Some(sets) = &cover {
                rec.push("sets", Val::Indices(sets.clone()));
            }
            Ok(Run::report(
                Report::single(rec),
                Outcome::from_bool(cover.is_some()),
                started.elapsed(),
            ))
        }
        X3cCommand::Verify => {
            let inst = io.read_instance()?;
            let solvable = solve_exact(&inst).is_some();
            let rows = equivalence_rows(&inst, &exact_options(config, false))?;
            let all_agree = rows.iter().all(|r| r.agrees);
            let report = Report {
                header: Record::new()
                    .with("m", inst.m())
                    .with("n", inst.len())
                    .with("cover", yes_no(solvable))
                    .with("all_agree", all_agree),
                rows: rows
                    .iter()
                    .map(|r| {
                        let mut rec = Record::new()
                            .with("criterion", r.criterion.id())
                            .with("answer", yes_no(r.answer));
                        if let Some(opt) = r.optimum {
                            rec.push("optimum", opt);
                        }
                        rec.with("agrees", r.agrees)
                    })
                    .collect(),
            };
            Ok(Run::report(
                report,
                Outcome::from_bool(all_agree),
                started.elapsed(),
            ))
        }
    }
}

/// Runs one command. The report goes to `stdout` (or `--output`), timing
/// to `stderr`, so identical command lines give byte-identical reports.
pub fn dispatch(
    config: &RunConfig,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let mut io = Io { config, stdin };
    let run = execute(config, &mut io)?;
    let body = match run.payload {
        Payload::Text(t) => t,
        Payload::Report(r) => match config.format {
            Format::Csv => r.to_text(),
            Format::Json => r.to_json(),
        },
    };
    match &config.output {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    if let Some(elapsed) = run.elapsed {
        writeln!(stderr, "elapsed={:.6}s", elapsed.as_secs_f64())?;
    }
    Ok(run.outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str], stdin: &str) -> (Result<Outcome, CliError>, String) {
        let mut argv = vec!["colsubset"];
        argv.extend_from_slice(args);
        let config = RunConfig::try_parse_from(argv).unwrap();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let res = dispatch(&config, &mut stdin.as_bytes(), &mut out, &mut err);
        (res, String::from_utf8(out).unwrap())
    }

    #[test]
    fn gadget_rvol() {
        let (res, out) = run(&["gadget", "--shared", "1", "--eval", "rvol"], "");
        assert_eq!(res.unwrap(), Outcome::Yes);
        assert_eq!(out, "0.7071067811865476\n");
    }

    #[test]
    fn eval_identity_volume() {
        let (res, out) = run(&["eval", "--criterion", "volume"], "1,0,0\n0,1,0\n0,0,1\n");
        res.unwrap();
        assert_eq!(out, "1.0\n");
    }

    #[test]
    fn eval_with_separate_p() {
        let (_, a) = run(
            &["eval", "--criterion", "pinv-norm", "--p", "4"],
            "1,0\n0,2\n",
        );
        let (_, b) = run(&["eval", "--criterion", "pinv-norm:p=4"], "1,0\n0,2\n");
        assert_eq!(a, b);
        let (res, _) = run(
            &["eval", "--criterion", "pinv-norm:p=4", "--p", "3"],
            "1,0\n0,2\n",
        );
        assert!(matches!(res, Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        let (res, _) = run(&["eval", "--criterion", "bogus"], "1\n");
        assert!(matches!(res, Err(CliError::Core(_))));
    }

    #[test]
    fn select_methods() {
        let a = "1,0,0.7071067811865476\n0,1,0.7071067811865476\n";
        let (_, out) = run(&["select", "--k", "2", "--criterion", "rvol"], a);
        assert_eq!(
            out,
            "method=exact criterion=rvol k=2 value=1.0 subset={0,1} subsets_evaluated=3\n"
        );
        let (_, out) = run(&["select", "--method", "local-swap", "--k", "2"], a);
        assert!(out.contains("subset={0,1}"), "{out}");
        let (res, _) = run(&["select", "--method", "greedy", "--k", "2"], a);
        assert!(matches!(res, Err(CliError::Usage(_))));
        let (res, _) = run(
            &[
                "select",
                "--method",
                "local-swap",
                "--k",
                "2",
                "--criterion",
                "rvol",
            ],
            a,
        );
        assert!(matches!(res, Err(CliError::Usage(_))));
    }

    #[test]
    fn decide_exit_outcomes() {
        let h = "1,0.5\n0,0.8660254037844386\n";
        let (res, out) = run(
            &["decide", "--criterion", "rvol", "--k", "2", "--b", "1"],
            h,
        );
        assert_eq!(res.unwrap(), Outcome::No);
        assert!(out.starts_with("answer=no"), "{out}");
        let (res, _) = run(
            &["decide", "--criterion", "rvol", "--k", "1", "--b", "1"],
            h,
        );
        assert_eq!(res.unwrap(), Outcome::Yes);
    }

    #[test]
    fn x3c_solve_and_verify() {
        let yes = "2 3\n1 2 3\n4 5 6\n1 4 6\n";
        let (res, out) = run(&["x3c", "solve"], yes);
        assert_eq!(res.unwrap(), Outcome::Yes);
        assert_eq!(out, "cover=yes sets={0,1}\n");
        let no = "2 2\n1 2 3\n3 4 5\n";
        let (res, out) = run(&["x3c", "solve"], no);
        assert_eq!(res.unwrap(), Outcome::No);
        assert_eq!(out, "cover=no\n");
        let (res, out) = run(&["x3c", "verify"], no);
        assert_eq!(res.unwrap(), Outcome::Yes);
        assert!(
            out.starts_with("m=2 n=2 cover=no all_agree=true\n"),
            "{out}"
        );
    }

    #[test]
    fn gap_rejects_true_instances() {
        let (res, _) = run(&["gap"], "1 1\n1 2 3\n");
        assert!(matches!(
            res,
            Err(CliError::Core(colsubset_core::Error::Precondition(_)))
        ));
    }

    #[test]
    fn threads_must_be_positive() {
        assert!(RunConfig::try_parse_from(["colsubset", "--threads", "0", "gap"]).is_err());
    }
}
