use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use qnim::analysis::{
    lucky_grey_counts, monte_carlo, probability_bracket, segment_parity, AnalysisError, Analyzer,
    FirstMove, Policy, DEFAULT_CAPACITY,
};
use qnim::grundy::{kernel_classes, GrundyError};
use qnim::strategy::{EnginePolicy, Level, StrategyError};
use qnim::{Board, Engine, GrundySolver, RuleSet, Segment, Situation};
use qnim_service::SessionStore;

/// Quantum octal games on chains: tables, exact values, simulation and a
/// game server.
#[derive(Parser)]
#[command(name = "qnim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grundy classes of a classical octal code, as `n<TAB>class` lines.
    Grundy {
        #[arg(long)]
        rules: RuleSet,
        #[arg(long)]
        max: usize,
        /// Print the period report instead of the table.
        #[arg(long)]
        report: bool,
    },
    /// Grundy classes of the white game of a quantum code.
    Classes {
        #[arg(long)]
        rules: RuleSet,
        #[arg(long)]
        max: usize,
    },
    /// A move from a situation to a class-0 situation.
    WinningMove {
        #[arg(long)]
        rules: RuleSet,
        /// Row lengths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        rows: Vec<usize>,
    },
    /// Exact losing probability, couple and best move of a position.
    Solve(Position),
    /// Couple and bracket of a position.
    Classify(Position),
    /// Seeded self-play of two policies (exact, heuristic or first).
    Simulate {
        #[command(flatten)]
        position: Position,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1,
            default_value = "exact,exact"
        )]
        policies: Vec<String>,
    },
    #[command(subcommand)]
    Verify(Verify),
    /// Serve the HTTP interface.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Append-only event log; sessions found in it are restored.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Position {
    #[arg(long)]
    rules: RuleSet,
    #[arg(long, conflicts_with = "board", required_unless_present = "board")]
    chain: Option<usize>,
    #[arg(long)]
    board: Option<Board>,
}

#[derive(Subcommand)]
enum Verify {
    /// c(i) = c(i - period) for start <= i <= horizon.
    Period {
        #[arg(long)]
        rules: RuleSet,
        #[arg(long)]
        period: usize,
        #[arg(long)]
        start: usize,
        #[arg(long)]
        horizon: usize,
    },
    /// Exact values of reachable positions lie in their couple's bracket.
    Framing {
        #[arg(long)]
        rules: RuleSet,
        #[arg(long)]
        max: usize,
    },
    /// Lucky grey counts have the parity of whites + 1.
    Lucky {
        #[arg(long, default_value_t = 10)]
        max: usize,
    },
    /// Kernel peeling agrees with mex and XOR of rows.
    Xor {
        #[arg(long)]
        rules: RuleSet,
        #[arg(long)]
        max: usize,
    },
}

enum Failure {
    /// Bad input or an unsupported rule set.
    Usage(String),
    /// A check ran and did not hold.
    Verification(String),
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<GrundyError> for Failure {
    fn from(e: GrundyError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn capacity() -> Result<usize, Failure> {
    match std::env::var("QNIM_CAPACITY") {
        Ok(v) => v.parse().map_err(|_| {
            Failure::Usage(format!(
                "QNIM_CAPACITY must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_CAPACITY),
    }
}

fn classical(rules: RuleSet) -> Result<GrundySolver, Failure> {
    Ok(GrundySolver::new(rules)?)
}

fn board_of(p: &Position) -> Result<Board, Failure> {
    match (&p.board, p.chain) {
        (Some(b), _) => Ok(b.clone()),
        (None, Some(n)) => Board::new_chain(n).map_err(|e| Failure::Usage(format!("--chain: {e}"))),
        (None, None) => unreachable!("clap requires --chain or --board"),
    }
}

fn couple_text(a: &Analyzer, board: &Board) -> Result<(String, String), Failure> {
    if !a.framing_holds() {
        return Ok(("-".into(), "-".into()));
    }
    let c = a.classify(board)?;
    Ok((c.to_string(), probability_bracket(c).to_string()))
}

fn policy<'a>(name: &str, engine: &'a Engine) -> Result<Box<dyn Policy + 'a>, Failure> {
    match name {
        "exact" => Ok(Box::new(EnginePolicy {
            engine,
            level: Level::Exact,
        })),
        "heuristic" => Ok(Box::new(EnginePolicy {
            engine,
            level: Level::Heuristic,
        })),
        "first" => Ok(Box::new(FirstMove)),
        other => Err(Failure::Usage(format!(
            "--policies: unknown policy {other:?} (expected exact, heuristic or first)"
        ))),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let mut out = String::new();
    match cli.command {
        Command::Grundy { rules, max, report } => {
            let table = classical(rules)?.table(max);
            if report {
                writeln!(out, "{}", table.period_report()).unwrap();
            } else {
                out = table.to_tsv();
            }
        }
        Command::Classes { rules, max } => {
            let white = rules
                .associated_white_game()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            eprintln!("white game of {rules}: {white}");
            out = classical(white)?.table(max).to_tsv();
        }
        Command::WinningMove { rules, rows } => {
            let solver = classical(rules)?;
            let s = Situation::new(rows);
            let class = solver.situation_class(&s);
            match solver.winning_transition(&s) {
                Ok((row, to)) => writeln!(out, "class={class} row={row} to={to}").unwrap(),
                Err(_) => writeln!(out, "class={class} losing").unwrap(),
            }
        }
        Command::Solve(p) => {
            let board = board_of(&p)?;
            let a = Analyzer::with_capacity(p.rules, capacity()?)?;
            let exact = a.exact_loss_probability(&board)?;
            let (couple, bracket) = couple_text(&a, &board)?;
            let best = match a.optimal_moves(&board) {
                Ok(moves) => moves[0].to_string(),
                Err(AnalysisError::Terminal(_)) => "-".into(),
                Err(e) => return Err(e.into()),
            };
            writeln!(
                out,
                "exact={exact} couple={couple} bracket={bracket} best={best}"
            )
            .unwrap();
        }
        Command::Classify(p) => {
            let board = board_of(&p)?;
            let a = Analyzer::with_capacity(p.rules, capacity()?)?;
            let c = a.classify(&board)?;
            writeln!(
                out,
                "couple={c} bracket={} white_class={}",
                probability_bracket(c),
                a.white_class(&board)
            )
            .unwrap();
        }
        Command::Simulate {
            position,
            trials,
            seed,
            policies,
        } => {
            let board = board_of(&position)?;
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            let [first, second] = policies.as_slice() else {
                return Err(Failure::Usage("--policies takes exactly two names".into()));
            };
            let engine = Engine::with_capacity(position.rules.clone(), capacity()?)?;
            let (p1, p2) = (policy(first, &engine)?, policy(second, &engine)?);
            let r = monte_carlo(
                &board,
                &position.rules,
                p1.as_ref(),
                p2.as_ref(),
                trials,
                seed,
            );
            writeln!(
                out,
                "trials={} first_losses={} frequency={:.6}",
                r.trials, r.losses, r.frequency
            )
            .unwrap();
        }
        Command::Verify(v) => return verify(v),
        Command::Serve { port, host, log } => {
            let store = match log {
                Some(path) => SessionStore::with_log(&path, capacity()?)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                None => SessionStore::new(capacity()?),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
            rt.block_on(qnim_service::serve(
                SocketAddr::new(host, port),
                Arc::new(store),
            ))
            .map_err(|e| Failure::Usage(format!("serve: {e}")))?;
        }
    }
    Ok(out)
}

fn verify(v: Verify) -> Result<String, Failure> {
    match v {
        Verify::Period {
            rules,
            period,
            start,
            horizon,
        } => {
            let solver = classical(rules)?;
            let what = format!("period={period} start={start} horizon={horizon}");
            if solver.verify_period(period, start, horizon) {
                Ok(format!("ok {what}\n"))
            } else {
                Err(Failure::Verification(format!("failed {what}")))
            }
        }
        Verify::Framing { rules, max } => {
            let a = Analyzer::with_capacity(rules, capacity()?)?;
            let report = a.verify_framing(max)?;
            if report.is_clean() {
                Ok(report.to_string())
            } else {
                let mut msg = report.to_string();
                for v in report.violations.iter().take(10) {
                    writeln!(
                        msg,
                        "violation n={} board={} couple={} value={}",
                        v.chain, v.board, v.couple, v.value
                    )
                    .unwrap();
                }
                Err(Failure::Verification(msg.trim_end().to_string()))
            }
        }
        Verify::Lucky { max } => {
            let mut out = String::new();
            let mut bad = Vec::new();
            for whites in 0..=max {
                let row = "W".repeat(whites);
                for text in [
                    row.clone(),
                    format!("g{row}"),
                    format!("{row}g"),
                    format!("g{row}g"),
                ] {
                    if text.is_empty() {
                        continue;
                    }
                    let seg: Segment = text.parse().expect("valid segment text");
                    let parity = segment_parity(&seg)? as usize;
                    let counts = lucky_grey_counts(&seg)?;
                    if counts.iter().any(|c| c % 2 != parity) {
                        bad.push(format!("{text} {counts:?}"));
                    }
                }
                writeln!(out, "whites={whites} ok").unwrap();
            }
            if bad.is_empty() {
                Ok(out)
            } else {
                Err(Failure::Verification(format!(
                    "parity fails for {}",
                    bad.join(", ")
                )))
            }
        }
        Verify::Xor { rules, max } => {
            let solver = classical(rules.clone())?;
            let kernel = kernel_classes(max, &rules, capacity()?)?;
            let bad: Vec<String> = kernel
                .iter()
                .filter(|(s, k)| solver.situation_class(s) != *k)
                .map(|(s, k)| format!("{s} kernel={k} xor={}", solver.situation_class(s)))
                .take(10)
                .collect();
            if bad.is_empty() {
                Ok(format!("ok situations={}\n", kernel.len()))
            } else {
                Err(Failure::Verification(bad.join("\n")))
            }
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
