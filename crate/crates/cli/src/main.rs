use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbeig::config::parse_point;
use rbeig::{
    basis_for, run_bounds, run_fom, run_offline, run_sweep, CliError, Experiment, ExperimentConfig, Overrides, Preset,
    Sampling,
};
use rbeig_core::fem::problems;

#[derive(Parser)]
#[command(name = "rbeig", version, about = "Reduced-basis approximation of parametric eigenvalue problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the full-order problem at one parameter.
    Fom {
        #[command(flatten)]
        common: Common,
        /// Parameter, comma separated (default: center of the parameter box).
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
    /// Build and save the reduced basis from the training set.
    Offline {
        #[command(flatten)]
        common: Common,
    },
    /// Compare ROM against FOM over the test grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Saved basis; built from the training set when omitted.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Check the eigenvalue and eigenvector bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Single parameter instead of the configured list.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
    /// Print the built-in problems.
    ListProblems,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<Preset>))]
    preset: Option<Preset>,
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<Sampling>))]
    sampling: Option<Sampling>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write eigenvector and basis CSVs.
    #[arg(long)]
    vectors: bool,
}

impl Common {
    fn experiment(&self) -> Result<Experiment, CliError> {
        let ov = Overrides {
            problem: self.problem.clone(),
            preset: self.preset,
            sampling: self.sampling,
            seed: self.seed,
            out: self.out.clone(),
            vectors: self.vectors,
        };
        let cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path, &ov)?,
            None => ExperimentConfig::from_overrides(&ov)?,
        };
        Experiment::new(cfg)
    }
}

fn parse_mu(s: &str) -> Result<Vec<f64>, CliError> {
    Ok(parse_point("--mu", s)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ListProblems => {
            for name in problems::NAMES {
                println!("{name:24} {}", problems::description(name).unwrap_or(""));
            }
        }
        Command::Fom { common, mu } => {
            let exp = common.experiment()?;
            let mu = match mu {
                Some(s) => parse_mu(&s)?,
                None => exp.problem.params.center(),
            };
            let fom = run_fom(&exp, &mu)?;
            let out = &fom.output;
            println!("n = {}, {} iterations", fom.system.a.dim(), out.iterations);
            for (k, l) in out.solution.values.iter().enumerate() {
                println!("lambda_{} = {l:.12e}", k + 1);
            }
        }
        Command::Offline { common } => {
            let exp = common.experiment()?;
            let off = run_offline(&exp)?;
            println!(
                "basis: n = {}, r = {} ({} columns dropped), {:.2} s",
                off.basis.dim(),
                off.basis.rank(),
                off.basis.truncated,
                off.seconds
            );
        }
        Command::Sweep { common, basis } => {
            let exp = common.experiment()?;
            let basis = basis_for(&exp, basis.as_deref())?;
            let sweep = run_sweep(&exp, &basis)?;
            println!(
                "{} parameters: max |eigenvalue error| = {:.3e}, max eigenvector error = {:.3e}",
                sweep.entries.len(),
                sweep.max_eigval_error(None),
                sweep.max_eigvec_error(None)
            );
        }
        Command::Bounds { common, basis, mu } => {
            let exp = common.experiment()?;
            let mus = match mu {
                Some(s) => vec![parse_mu(&s)?],
                None => exp.config.bounds.clone(),
            };
            for mu in &mus {
                exp.config.check_mu(mu)?;
            }
            let basis = basis_for(&exp, basis.as_deref())?;
            let reports = run_bounds(&exp, &basis, &mus)?;
            for r in &reports {
                println!("mu = {:?}: {} indices, all applicable bounds hold", r.mu, r.rows.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
