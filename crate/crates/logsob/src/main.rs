use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logsob::config::{Command, Ineq, ScenarioConfig};

#[derive(Parser)]
#[command(name = "logsob", version, about = "Weighted logarithmic Sobolev, Hardy and Lorentz-Sobolev checks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate one inequality on a test profile.
    Verify(Flags),
    /// Search for the best constant C_B(g, gamma).
    BestConstant(Flags),
    /// p-capacity of a compact set, and the Maz'ya ratio table when --r is given.
    Capacity(Flags),
    /// Assouad dimension and porosity of a closed set.
    Assouad(Flags),
    /// Run `verify` over the [sweep] lists of the config file.
    Sweep(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    ineq: Option<Ineq>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long = "grid-nodes")]
    grid_nodes: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build(command: Command, f: Flags) -> Result<ScenarioConfig, logsob::Error> {
    let mut c = match &f.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    c.command = command;
    if command == Command::Capacity && f.config.is_none() && f.set.is_none() {
        c.set = "ball".into();
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                c.$field = v;
            }
        };
    }
    set!(ineq, f.ineq);
    set!(weight, f.weight);
    set!(set, f.set);
    set!(profile, f.profile);
    set!(n, f.n);
    set!(p, f.p);
    set!(a, f.a);
    set!(seed, f.seed);
    set!(out, f.out);
    if f.r.is_some() {
        c.r = f.r;
    }
    if f.q.is_some() {
        c.q = f.q;
    }
    if f.gamma.is_some() {
        c.gamma = f.gamma;
    }
    if let Some(n) = f.grid_nodes {
        c.grid.nodes = n;
    }
    if let Some(r) = f.rmax {
        c.grid.r_max = r;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::BestConstant(f) => (Command::BestConstant, f),
        Sub::Capacity(f) => (Command::Capacity, f),
        Sub::Assouad(f) => (Command::Assouad, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    let result = build(command, flags).and_then(|c| logsob::run_scenario(&c).map(|o| (c, o)));
    match result {
        Ok((c, out)) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for (name, _) in &out.files {
                println!("{}", c.out.join(name).display());
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
