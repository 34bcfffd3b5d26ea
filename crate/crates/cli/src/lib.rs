//! The `nsvalue` command line: file formats in, engines, reports out.
//!
//! [`run`] does all the work and returns the exit status together with what
//! would be written to standard output and standard error, so tests can drive
//! the CLI in-process.

pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use nsvalue_core::game::{check_no_signaling, parse_game, parse_strategy, write_game, write_strategy, Validated};
use nsvalue_core::lp::write_lp;
use nsvalue_core::mpc::{parse_mpc, solve_mpc, write_mpc, MpcError, OutcomeKind};
use nsvalue_core::pipeline::{all_stages, build_mpc_instance, PipelineError};
use nsvalue_core::rational::{fmt_rational, int, parse_rational};
use nsvalue_core::value::{
    approximate_value_with, classical_value, decide, exact_value, Decision, Method, ValueError,
};
use nsvalue_core::verifier::{compile_game, parse_verifier, VerifierError};
use nsvalue_core::{acceptance_probability, validate_game, GameError, Rational};

pub use report::{sha256_hex, RunReport, WALL_TIME_KEY};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nsvalue", version, about = "No-signaling value of two-player one-round games")]
struct Cli {
    /// Worker threads for the solvers (0 = rayon default). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print a flat key=value report instead of human-oriented output.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("`{text}` is not a rational number"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Binary,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    Primal,
    Relaxed,
    Scaled,
    Dual,
    Final,
    Mpc,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bracket the no-signaling value within EPS.
    Value {
        game: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
        #[arg(long, value_enum, default_value_t = MethodArg::Binary)]
        method: MethodArg,
    },
    /// Decide whether the value is at most S or at least C.
    Decide {
        game: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        s: Rational,
        #[arg(long, value_parser = rational_arg)]
        c: Rational,
    },
    /// Exact no-signaling value with the rational simplex.
    Exact {
        game: PathBuf,
        /// Also write an optimal strategy to this file.
        #[arg(long)]
        strategy_out: Option<PathBuf>,
    },
    /// Best value of deterministic classical strategies.
    Classical { game: PathBuf },
    /// Compile a verifier description into a game file.
    Compile {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check that a strategy is no-signaling and report its acceptance probability.
    CheckStrategy {
        game: PathBuf,
        strategy: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        tol: Option<Rational>,
    },
    /// Print one stage of the LP chain, or the packing/covering instance.
    DumpLp {
        game: PathBuf,
        #[arg(long, value_enum)]
        stage: StageArg,
        /// Threshold for `--stage mpc`.
        #[arg(long, value_parser = rational_arg)]
        s: Option<Rational>,
    },
    /// Solve a packing/covering instance to relative accuracy EPS.
    SolveMpc {
        instance: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: nsvalue_core::text::ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Value(ValueError::TooLargeForExact { .. })
            | CliError::Value(ValueError::EnumerationTooLarge { .. })
            | CliError::Verifier(VerifierError::EnumerationTooLarge { .. }) => EXIT_GUARD,
            _ => EXIT_FAILURE,
        }
    }
}

fn read(path: &Path) -> Result<(String, String), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let digest = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })?;
    Ok((text, digest))
}

fn parse_err(path: &Path) -> impl FnOnce(nsvalue_core::text::ParseError) -> CliError + '_ {
    move |source| CliError::Parse { path: path.display().to_string(), source }
}

fn load_game(path: &Path) -> Result<(Validated, String), CliError> {
    let (text, digest) = read(path)?;
    let raw = parse_game(&text).map_err(parse_err(path))?;
    Ok((validate_game(&raw)?, digest))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// What a command produced: the report, and the human-oriented text.
struct Done {
    report: RunReport,
    human: String,
}

fn dims_text(d: nsvalue_core::Dims) -> String {
    format!("{}x{}x{}x{}", d.q1, d.q2, d.a1, d.a2)
}

fn execute(command: &Command) -> Result<Done, CliError> {
    match command {
        Command::Value { game, eps, method } => {
            let (v, digest) = load_game(game)?;
            let method = match method {
                MethodArg::Binary => Method::BinarySearch,
                MethodArg::Grid => Method::Grid,
            };
            let est = approximate_value_with(&v.game, eps, method, &Default::default())?;
            let mut report = RunReport::new("value");
            report
                .set("input_digest", &digest)
                .set("eps", fmt_rational(eps))
                .set("method", if method == Method::Grid { "grid" } else { "binary" })
                .set("lower", fmt_rational(&est.lower))
                .set("upper", fmt_rational(&est.upper))
                .set("decide_calls", est.calls)
                .set("rounds", est.rounds);
            let human = format!("[{}, {}]\n", fmt_rational(&est.lower), fmt_rational(&est.upper));
            Ok(Done { report, human })
        }
        Command::Decide { game, s, c } => {
            let (v, digest) = load_game(game)?;
            let verdict = decide(&v.game, s, c)?;
            let word = match verdict.decision {
                Decision::AtMostS => "AT_MOST_S",
                Decision::AtLeastC => "AT_LEAST_C",
            };
            let mut report = RunReport::new("decide");
            report
                .set("input_digest", &digest)
                .set("s", fmt_rational(s))
                .set("c", fmt_rational(c))
                .set("epsilon", fmt_rational(&verdict.epsilon_used))
                .set("verdict", word);
            if let Some(cert) = &verdict.certificate {
                report.set("certificate_objective", fmt_rational(&cert.objective));
            }
            report.set("rounds", verdict.rounds);
            Ok(Done { report, human: format!("{word}\n") })
        }
        Command::Exact { game, strategy_out } => {
            let (v, digest) = load_game(game)?;
            let (value, strategy) = exact_value(&v.game)?;
            if let Some(path) = strategy_out {
                write_file(path, &write_strategy(&v.pruning.lift_strategy(&strategy)))?;
            }
            let mut report = RunReport::new("exact");
            report.set("input_digest", &digest).set("value", fmt_rational(&value));
            Ok(Done { report, human: format!("{}\n", fmt_rational(&value)) })
        }
        Command::Classical { game } => {
            let (v, digest) = load_game(game)?;
            let value = classical_value(&v.game)?;
            let mut report = RunReport::new("classical");
            report.set("input_digest", &digest).set("value", fmt_rational(&value));
            Ok(Done { report, human: format!("{}\n", fmt_rational(&value)) })
        }
        Command::Compile { spec, output } => {
            let (text, digest) = read(spec)?;
            let parsed = parse_verifier(&text).map_err(parse_err(spec))?;
            let game = compile_game(&parsed)?;
            let out = write_game(&game);
            write_file(output, &out)?;
            let mut report = RunReport::new("compile");
            report
                .set("input_digest", &digest)
                .set("dims", dims_text(game.dims()))
                .set("output_digest", sha256_hex(out.as_bytes()));
            let human = format!("wrote {} ({})\n", output.display(), dims_text(game.dims()));
            Ok(Done { report, human })
        }
        Command::CheckStrategy { game, strategy, tol } => {
            let (v, digest) = load_game(game)?;
            let (text, strategy_digest) = read(strategy)?;
            let p = parse_strategy(&text).map_err(parse_err(strategy))?;
            let tol = tol.clone().unwrap_or_default();
            let signaling = check_no_signaling(&p, &tol);
            let acceptance = acceptance_probability(&v.game, &v.pruning.restrict_strategy(&p)?)?;
            let mut report = RunReport::new("check-strategy");
            report
                .set("input_digest", &digest)
                .set("strategy_digest", &strategy_digest)
                .set("tol", fmt_rational(&tol))
                .set("no_signaling", signaling.is_no_signaling)
                .set("worst_violation", fmt_rational(&signaling.worst_violation))
                .set("acceptance", fmt_rational(&acceptance));
            let mut human = format!(
                "no-signaling: {}\nworst violation: {}\nacceptance: {}\n",
                if signaling.is_no_signaling { "yes" } else { "no" },
                fmt_rational(&signaling.worst_violation),
                fmt_rational(&acceptance)
            );
            if let (false, Some(w)) = (signaling.is_no_signaling, &signaling.witness) {
                human.push_str(&format!("witness: {w:?}\n"));
            }
            Ok(Done { report, human })
        }
        Command::DumpLp { game, stage, s } => {
            let (v, _) = load_game(game)?;
            let text = match stage {
                StageArg::Mpc => {
                    let s = s.as_ref().ok_or_else(|| CliError::Usage("--stage mpc needs --s".into()))?;
                    if *s < int(0) || *s >= int(1) {
                        return Err(CliError::Usage("--s must lie in [0, 1)".into()));
                    }
                    write_mpc(&build_mpc_instance(&v.game, s))
                }
                other => {
                    let ix = match other {
                        StageArg::Primal => 0,
                        StageArg::Relaxed => 1,
                        StageArg::Scaled => 2,
                        StageArg::Dual => 3,
                        _ => 4,
                    };
                    write_lp(&all_stages(&v.game)?[ix])
                }
            };
            Ok(Done { report: RunReport::new("dump-lp"), human: text })
        }
        Command::SolveMpc { instance, eps } => {
            let (text, digest) = read(instance)?;
            let inst = parse_mpc(&text).map_err(parse_err(instance))?;
            let out = solve_mpc(&inst, eps)?;
            let kind = match out.kind {
                OutcomeKind::Approx => "APPROX",
                OutcomeKind::Infeasible => "INFEASIBLE",
            };
            let mut report = RunReport::new("solve-mpc");
            report
                .set("input_digest", &digest)
                .set("eps", fmt_rational(eps))
                .set("outcome", kind)
                .set("method", format!("{:?}", out.method).to_lowercase())
                .set("rounds", out.rounds);
            let mut human = format!("{kind}\nrounds: {}\n", out.rounds);
            if let Some(x) = &out.x {
                let joined = x.iter().map(fmt_rational).collect::<Vec<_>>().join(" ");
                report.set("x", &joined);
                for (k, value) in x.iter().enumerate() {
                    let name = inst.var_names().get(k).cloned().unwrap_or_else(|| format!("x[{k}]"));
                    human.push_str(&format!("{name} {}\n", fmt_rational(value)));
                }
            }
            Ok(Done { report, human })
        }
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            return Output { code: EXIT_FAILURE, stdout: String::new(), stderr: format!("error: {e}\n") }
        }
    };
    let started = Instant::now();
    let result = pool.install(|| execute(&cli.command));
    match result {
        Ok(mut done) => {
            let dump = matches!(cli.command, Command::DumpLp { .. });
            let stdout = if cli.machine && !dump {
                done.report.set(WALL_TIME_KEY, started.elapsed().as_millis());
                done.report.to_text()
            } else {
                done.human
            };
            Output { code: EXIT_OK, stdout, stderr: String::new() }
        }
        Err(e) => Output { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}
