use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use kramers_exit::harness::{self, output, ComparisonReport, ExperimentConfig, Stages, SweepAxis};

#[derive(Parser)]
#[command(
    name = "kramers-exit",
    version,
    about = "Exit rates and exit laws of overdamped Langevin dynamics from a box"
)]
struct Cli {
    /// Print the configuration with every default filled in and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points, saddle table and generalized counts.
    Critical(Common),
    /// Closed-form rates, exit probabilities and fluxes.
    Rates(Common),
    /// Agmon distances and the hypothesis checks.
    Agmon(Common),
    /// Kinetic Monte Carlo with the closed-form rates.
    Kmc(Common),
    /// Langevin exits with QSD burn-in.
    Simulate(Common),
    /// Discrete generator eigenpairs, exit laws and the mixed problem.
    Spectrum(Common),
    /// Every enabled stage and every check.
    Verify(Common),
    /// Rerun one stage over a list of h, delta or dt values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: Option<SweepAxis>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Critical(c)
            | Command::Rates(c)
            | Command::Agmon(c)
            | Command::Kmc(c)
            | Command::Simulate(c)
            | Command::Spectrum(c)
            | Command::Verify(c) => c,
            Command::Sweep { common, .. } => common,
        }
    }

    fn stages(&self) -> Stages {
        let none = Stages::LANDSCAPE;
        match self {
            Command::Critical(_) | Command::Sweep { .. } => none,
            Command::Rates(_) => Stages {
                rates: true,
                ..none
            },
            Command::Agmon(_) => Stages {
                agmon: true,
                ..none
            },
            Command::Kmc(_) => Stages {
                rates: true,
                kmc: true,
                ..none
            },
            Command::Simulate(_) => Stages {
                rates: true,
                spectral: true,
                langevin: true,
                ..none
            },
            Command::Spectrum(_) => Stages {
                rates: true,
                spectral: true,
                mixed: true,
                ..none
            },
            Command::Verify(_) => Stages::ALL,
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::load(&common.config).map_err(|e| e.to_string())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn print_assertions(report: &ComparisonReport) {
    for a in &report.assertions {
        println!(
            "{} {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(command) = cli.command else {
        if cli.print_config {
            print!("{}", ExperimentConfig::default().to_toml());
            return ExitCode::SUCCESS;
        }
        eprintln!("a subcommand is required (see --help)");
        return ExitCode::from(2);
    };
    let cfg = match load(command.common()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let dir = cfg.output.dir.clone();
    if let Command::Sweep { axis, values, .. } = &command {
        let axis = axis.unwrap_or(cfg.sweep.axis);
        let values = values.clone().unwrap_or_else(|| cfg.sweep.values.clone());
        let table = match harness::sweep(&cfg, axis, &values) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        };
        for r in &table.rows {
            println!(
                "{:>10} lambda = {:.6e} ratio = {:.5}",
                r.value, r.lambda.value, r.ratio
            );
        }
        if let Some(s) = table.slope {
            println!("slope of log lambda vs 1/h: {s:.5}");
        }
        for a in &table.assertions {
            println!(
                "{} {}: {}",
                if a.passed { "PASS" } else { "FAIL" },
                a.name,
                a.detail
            );
        }
        if let Err(e) = output::write_sweep(&dir, &table) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
        return if table.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        };
    }
    let (report, err) = harness::run_partial(&cfg, command.stages());
    print_assertions(&report);
    if let Err(e) = output::write_report(&dir, &report) {
        eprintln!("error writing {}: {e}", dir.display());
        return ExitCode::FAILURE;
    }
    if let Some(e) = err {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
