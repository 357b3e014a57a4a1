use clap::{Parser, Subcommand};
use seglab::cli::{self, config::parse_f64_list, Command, Overrides};
use seglab::profiles::ProfileFamily;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "seglab", version, about = "Penalized three-phase segregation: solve, recover, sweep, report")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated eps list overriding the config.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, value_parser = ["tanh", "ramp"])]
    family: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    Solve(Common),
    Recover(Common),
    Sweep(Common),
    Report(Common),
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Ok(v) = std::env::var("SEG_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SEG_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(1);
            }
        }
    }
    let (cmd, c) = match args.cmd {
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Recover(c) => (Command::Recover, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Report(c) => (Command::Report, c),
    };
    let eps = match c.eps.as_deref().map(parse_f64_list) {
        Some(Err(m)) => {
            eprintln!("error: --eps: {m}");
            return ExitCode::from(1);
        }
        Some(Ok(v)) => Some(v),
        None => None,
    };
    let ov = Overrides { out: c.out, eps, family: c.family.as_deref().and_then(ProfileFamily::parse), delta: c.delta };
    let result = cli::load_config(&c.config, &ov).and_then(|cfg| cli::run(cmd, &cfg));
    match result {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
