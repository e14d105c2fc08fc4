use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emfront::error::Result;
use emfront::frontio::jobs;
use emfront::frontio::{exit_code, JobConfig, JobOutcome};
use emfront::identities::IdentityOptions;

#[derive(Parser)]
#[command(name = "emfront", version, about = "e/m-wavefronts of Legendre submanifolds from a generating function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the expression and print its chart gradient.
    ParseCheck(Common),
    /// Export e- and m-wavefront meshes.
    Sample(Common),
    /// Locate and classify singular points.
    Classify(Common),
    /// Run the randomized identity suite.
    Identities {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        corrupt_pairing: bool,
    },
    /// Extract the normal form at the window center.
    NormalForm(Common),
}

#[derive(Args)]
struct Common {
    /// Job configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides `tolerances.tol_root`.
    #[arg(long, value_name = "TOL")]
    tol_root: Option<f64>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "emfront-out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<JobConfig> {
        let mut cfg = JobConfig::load(&self.config)?;
        if let Some(t) = self.tol_root {
            cfg.tolerances.tol_root = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(command: &Command) -> Result<JobOutcome> {
    match command {
        Command::ParseCheck(c) => jobs::parse_check(&c.load()?),
        Command::Sample(c) => jobs::run_sample(&c.load()?, &c.out),
        Command::Classify(c) => jobs::run_classify(&c.load()?, &c.out),
        Command::Identities {
            common,
            corrupt_pairing,
        } => jobs::run_identities(
            &common.load()?,
            &common.out,
            IdentityOptions {
                corrupt_pairing: *corrupt_pairing,
            },
        ),
        Command::NormalForm(c) => jobs::run_normalform(&c.load()?, &c.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = run(&cli.command);
    match &result {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.summary).expect("serializable");
            // A closed pipe on stdout is not an error of the job.
            let _ = writeln!(std::io::stdout(), "{text}");
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
