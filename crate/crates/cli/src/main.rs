//! `fixpoint`: classify linear operators and run fixed-point iterations from
//! text files.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fixpoint_core::io::{
    default_x0, format_report, format_trace, format_trace_report, parse_graph, parse_matrix, parse_vector,
    TraceOptions, DEFAULT_SEED,
};
use fixpoint_core::iteration::DEFAULT_MAX_ITER;
use fixpoint_core::{
    analyze_spectrum, classify, consensus_operator, game_iteration_operator, is_consensus, krasnoselskij_with,
    laplacian, mann_with, picard_with, DetectionConfig, Error, Matrix, StepSchedule, Tolerances, Trajectory,
    ZeroSumGame,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Classify,
    Iterate,
    Consensus,
    Game,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Iteration {
    Picard,
    Krasnoselskij,
    Mann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Schedule {
    Constant,
    Harmonic,
    SqrtHarmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Report,
}

/// Classify linear operators and run Picard, Krasnoselskij and Mann iterations.
#[derive(Debug, Parser)]
#[command(name = "fixpoint", version)]
struct Cli {
    #[arg(long, value_enum)]
    command: Command,

    /// Matrix file (classify, iterate), edge list (consensus) or coupling matrix (game).
    #[arg(long)]
    input: PathBuf,

    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "mann")]
    iteration: Iteration,

    /// Constant step of the Krasnoselskij iteration.
    #[arg(long)]
    alpha: Option<f64>,

    #[arg(long, value_enum, default_value = "harmonic")]
    schedule: Schedule,

    /// Schedule coefficient: alpha_k = c/k or c/sqrt(k).
    #[arg(long, default_value_t = 1.0)]
    c: f64,

    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,

    /// Relative fixed-point residual treated as converged.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    /// Initial point, comma or space separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,

    /// Seed of the default initial point.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output format; classify always writes a report.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Include the iterate x(k) in CSV traces.
    #[arg(long)]
    state: bool,

    /// Maximum spread of the final iterate accepted as consensus.
    #[arg(long, default_value_t = 1e-6)]
    consensus_tol: f64,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 2,
            Failure::Core(Error::Parse { .. }) => 2,
            Failure::Core(Error::Parameter(_) | Error::Model(_) | Error::DimensionMismatch { .. }) => 4,
            Failure::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.input.display());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let src = fs::read_to_string(&cli.input).map_err(|e| Failure::Io(format!("cannot read input: {e}")))?;
    let out = match cli.command {
        Command::Classify => cmd_classify(cli, &src)?,
        Command::Iterate => cmd_iterate(cli, &src)?,
        Command::Consensus => cmd_consensus(cli, &src)?,
        Command::Game => cmd_game(cli, &src)?,
    };
    match &cli.output {
        Some(path) => fs::write(path, out).map_err(|e| {
            Failure::Core(Error::Parameter(format!("cannot write {}: {e}", path.display())))
        }),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn cmd_classify(cli: &Cli, src: &str) -> Result<String, Failure> {
    if cli.format == Some(Format::Csv) {
        return Err(Error::Parameter("classify writes reports only".into()).into());
    }
    let a = parse_matrix(src)?;
    Ok(format_report(&classify(&a)?))
}

fn cmd_iterate(cli: &Cli, src: &str) -> Result<String, Failure> {
    let a = parse_matrix(src)?;
    let x0 = initial_point(cli, a.dim(), || default_x0(a.dim(), cli.seed))?;
    let t = run_iteration(cli, &a, &x0)?;
    Ok(render(cli, &t, &[]))
}

fn cmd_consensus(cli: &Cli, src: &str) -> Result<String, Failure> {
    let g = parse_graph(src)?;
    let n = g.n_nodes();
    let a = consensus_operator(&laplacian(&g))?;
    let x0 = initial_point(cli, n, || default_x0(n, cli.seed))?;
    let t = run_iteration(cli, &a, &x0)?;
    let connected = g.is_strongly_connected();
    let mut extra = vec![
        ("consensus".to_string(), is_consensus(t.final_state(), cli.consensus_tol)?.to_string()),
        ("strongly_connected".to_string(), connected.to_string()),
    ];
    if !connected {
        let warning = "graph is not strongly connected; consensus is not guaranteed";
        eprintln!("warning: {warning}");
        extra.push(("warning".to_string(), warning.to_string()));
    }
    Ok(render(cli, &t, &extra))
}

fn cmd_game(cli: &Cli, src: &str) -> Result<String, Failure> {
    let game = ZeroSumGame::new(parse_matrix(src)?)?;
    let a = game_iteration_operator(&game);
    let n = game.player_dim();
    let x0 = initial_point(cli, 2 * n, || {
        let mut x = vec![0.5; n];
        x.resize(2 * n, 0.0);
        x
    })?;
    let t = run_iteration(cli, &a, &x0)?;
    let spectrum = analyze_spectrum(&a, &Tolerances::default())?;
    let eigenvalues: Vec<String> = spectrum
        .eigenvalues()
        .map(|z| format!("{:.16e}{:+.16e}j", z.re, z.im))
        .collect();
    let extra = vec![
        ("spectrum_i_minus_f".to_string(), eigenvalues.join(" ")),
        ("i_minus_f_is_spc".to_string(), classify(&a)?.is_spc().to_string()),
    ];
    Ok(render(cli, &t, &extra))
}

fn initial_point(cli: &Cli, n: usize, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, Failure> {
    match &cli.x0 {
        Some(text) => {
            let x = parse_vector(text)?;
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() }.into());
            }
            Ok(x)
        }
        None => Ok(default()),
    }
}

fn run_iteration(cli: &Cli, a: &Matrix, x0: &[f64]) -> Result<Trajectory, Failure> {
    let cfg = DetectionConfig {
        conv_tol: cli.tol,
        ..DetectionConfig::default()
    };
    let t = match cli.iteration {
        Iteration::Picard => picard_with(a, x0, cli.max_iter, &cfg)?,
        Iteration::Krasnoselskij => {
            let alpha = cli
                .alpha
                .ok_or_else(|| Error::Parameter("krasnoselskij requires --alpha".into()))?;
            krasnoselskij_with(a, x0, alpha, cli.max_iter, &cfg)?
        }
        Iteration::Mann => {
            let schedule = match cli.schedule {
                Schedule::Constant => {
                    return Err(Error::Parameter(
                        "mann requires a vanishing schedule; use krasnoselskij for a constant step".into(),
                    )
                    .into())
                }
                Schedule::Harmonic => StepSchedule::harmonic(cli.c)?,
                Schedule::SqrtHarmonic => StepSchedule::sqrt_harmonic(cli.c)?,
            };
            mann_with(a, x0, &schedule, cli.max_iter, &cfg)?
        }
    };
    Ok(t)
}

fn render(cli: &Cli, t: &Trajectory, extra: &[(String, String)]) -> String {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => format_trace(t, TraceOptions { include_state: cli.state }, extra),
        Format::Report => format_trace_report(t, extra),
    }
}
