use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use sadic::experiments::{replay, run_text, Overrides, RunManifest};
use sadic::{Error, Result};

#[derive(Parser)]
#[command(name = "sadic", version, about = "S-adic Diophantine approximation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration cap for lattice searches.
    #[arg(long)]
    cap: Option<u64>,
    /// Size of the worker pool.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve Dirichlet systems and test ε-improvability.
    #[command(subcommand)]
    Dirichlet(DirichletCmd),
    /// Shortest contents of flowed S-lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// (C,α)-good certificates and nonplanarity constants.
    #[command(subcommand)]
    Good(GoodCmd),
    /// Quantitative nondivergence checks.
    #[command(subcommand)]
    Nondiv(NondivCmd),
    /// Run any configuration; the experiment is read from the file.
    Run(Common),
    /// Re-run the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DirichletCmd {
    Solve(Common),
    Improvable(Common),
    Scan(Common),
}

#[derive(Subcommand)]
enum LatticeCmd {
    Delta(Common),
    Correspond(Common),
    Trajectory(Common),
}

#[derive(Subcommand)]
enum GoodCmd {
    Certify(Common),
    Rho(Common),
}

#[derive(Subcommand)]
enum NondivCmd {
    Check(Common),
    Constants(Common),
    Discan(Common),
}

fn run_as(experiment: Option<&str>, c: &Common) -> Result<RunManifest> {
    let text = std::fs::read_to_string(&c.config)?;
    let mut v: Value = serde_json::from_str(&text)?;
    if let Some(e) = experiment {
        let obj = v
            .as_object_mut()
            .ok_or_else(|| Error::Invalid("the configuration must be a JSON object".into()))?;
        match obj.get("experiment").and_then(Value::as_str) {
            Some(x) if x != e => {
                return Err(Error::Invalid(format!("configuration is for {x:?}, not {e:?}")));
            }
            _ => {
                obj.insert("experiment".into(), Value::String(e.into()));
            }
        }
    }
    let ov = Overrides {
        seed: c.seed,
        cap: c.cap,
        workers: c.workers,
    };
    run_text(&v.to_string(), &c.out, &ov)
}

fn dispatch(cmd: Cmd) -> Result<RunManifest> {
    use Cmd::*;
    match cmd {
        Dirichlet(DirichletCmd::Solve(c)) => run_as(Some("dirichlet-solve"), &c),
        Dirichlet(DirichletCmd::Improvable(c)) => run_as(Some("dirichlet-improvable"), &c),
        Dirichlet(DirichletCmd::Scan(c)) => run_as(Some("di-scan"), &c),
        Lattice(LatticeCmd::Delta(c)) => run_as(Some("lattice-delta"), &c),
        Lattice(LatticeCmd::Correspond(c)) => run_as(Some("lattice-correspond"), &c),
        Lattice(LatticeCmd::Trajectory(c)) => run_as(Some("delta-trajectory"), &c),
        Good(GoodCmd::Certify(c)) => run_as(Some("good-certify"), &c),
        Good(GoodCmd::Rho(c)) => run_as(Some("good-rho"), &c),
        Nondiv(NondivCmd::Check(c)) => run_as(Some("nondiv-check"), &c),
        Nondiv(NondivCmd::Constants(c)) => run_as(Some("nondiv-constants"), &c),
        Nondiv(NondivCmd::Discan(c)) => run_as(Some("nondiv-discan"), &c),
        Run(c) => run_as(None, &c),
        Replay { manifest, out } => replay(&manifest, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(m) => {
            println!("{} ({} artifacts)", m.run_id, m.artifacts.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
