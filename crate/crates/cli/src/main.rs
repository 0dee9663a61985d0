use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eitsq_cli::output::write_atomic;
use eitsq_cli::{calibrate, run_scenario, CliError, Config, SCENARIOS};

#[derive(Parser)]
#[command(name = "eitsq", version, about = "Squeezed vacuum through an EIT medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV tables.
    Run {
        scenario: String,
        #[arg(long)]
        config: PathBuf,
        /// Overrides [pulse] seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides [output] dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the free parameters and write a calibration record.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the available scenarios.
    ListScenarios,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, config, seed, out } => {
            let mut cfg = Config::load(&config)?;
            if let Some(seed) = seed {
                cfg.pulse.seed = seed;
            }
            if let Some(out) = out {
                cfg.output.dir = std::path::absolute(&out)?;
            }
            let res = run_scenario(&scenario, &cfg)?;
            for line in &res.summary {
                println!("{line}");
            }
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Calibrate { config, out } => {
            let cfg = Config::load(&config)?;
            let rec = calibrate(&cfg)?;
            write_atomic(&out, &rec.to_text())?;
            let r = &rec.residuals;
            println!("x = {:.6}, eta_esc = {:.6}", rec.opo.x, rec.opo.eta_esc);
            println!("kappa = {:.6e} (rad/s)^2/W, eta_path = {:.6}", rec.kappa, rec.eta_path);
            println!(
                "residuals: sqz {:.2e} dB, antisqz {:.2e} dB, resonance {:.2e} dB, delay {:.2e} s",
                r.sqz_db, r.antisqz_db, r.resonance_db, r.delay
            );
            println!("window FWHM {:.1} kHz", r.window / 1e3);
            println!("wrote {}", out.display());
        }
        Command::ListScenarios => {
            for (name, about) in SCENARIOS {
                println!("{name:<20} {about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eitsq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
