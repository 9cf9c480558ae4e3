mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use tripatch::{ParamName, TopologyId};

#[derive(Parser, Debug)]
#[command(name = "tripatch", version, about = "Three-patch logistic metapopulation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Topology token, overrides the config
    #[arg(long)]
    topology: Option<TopologyId>,
    /// Seed for every randomized step
    #[arg(long)]
    seed: Option<u64>,
    /// Write output here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the 13 topology classes
    Enumerate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equilibria and their stability as JSON
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// One-parameter sweep as CSV
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: Option<ParamName>,
        #[arg(long, allow_negative_numbers = true)]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        hi: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Integrate a trajectory, CSV of t, p1, p2, p3
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Attraction fractions from quasi-random starts
    Basin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the property battery
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::runtime(format!("csv error: {e}"))
    }
}

impl From<tripatch::Error> for Failure {
    fn from(e: tripatch::Error) -> Self {
        match e {
            tripatch::Error::InvalidParams(_)
            | tripatch::Error::SweepRange { .. }
            | tripatch::Error::Precondition(_)
            | tripatch::Error::UnknownToken(_) => Failure::usage(e.to_string()),
            _ => Failure::runtime(e.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let Some(path) = &common.config else {
        return Err(Failure::usage("--config is required for this command"));
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = config::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if let Some(t) = common.topology {
        cfg.topology = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Enumerate { out } => commands::enumerate(sink(&out)?),
        Command::Analyze { common } => {
            let cfg = load(&common)?;
            commands::analyze(&cfg, sink(&common.out)?)
        }
        Command::Sweep {
            common,
            param,
            lo,
            hi,
            steps,
        } => {
            let mut cfg = load(&common)?;
            let base = cfg.sweep.clone();
            let param = param
                .or(base.as_ref().map(|s| s.param))
                .ok_or_else(|| Failure::usage("sweep needs --param or a sweep section"))?;
            let lo = lo.or(base.as_ref().map(|s| s.lo)).ok_or_else(|| Failure::usage("sweep needs --lo"))?;
            let hi = hi.or(base.as_ref().map(|s| s.hi)).ok_or_else(|| Failure::usage("sweep needs --hi"))?;
            let steps = steps.or(base.as_ref().map(|s| s.steps)).unwrap_or(50);
            cfg.sweep = Some(config::SweepOptions { param, lo, hi, steps });
            commands::sweep(&cfg, sink(&common.out)?)
        }
        Command::Simulate { common, t_end } => {
            let mut cfg = load(&common)?;
            if let Some(t) = t_end {
                cfg.simulate.t_end = t;
            }
            commands::simulate(&cfg, sink(&common.out)?)
        }
        Command::Basin { common, samples } => {
            let cfg = load(&common)?;
            let n = samples.or(cfg.samples).unwrap_or(200);
            commands::basin(&cfg, n, sink(&common.out)?)
        }
        Command::Verify { seed, samples, out } => commands::verify(seed.unwrap_or(0), samples.unwrap_or(20), sink(&out)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
