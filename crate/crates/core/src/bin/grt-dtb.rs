use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grt_dtb::config::ExperimentConfig;
use grt_dtb::experiment::{self, IMAGE_FILE, SINOGRAM_FILE};
use grt_dtb::Error;

#[derive(Parser)]
#[command(name = "grt-dtb", version, about = "Simulate, reconstruct and compare edge transitions of a generalized Radon transform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Render PNG plots of the profiles.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the coarse sinogram of the configured phantom.
    Simulate,
    /// Reconstruct from a coarse sinogram.
    Reconstruct {
        /// Defaults to `<out>/sinogram.bin`.
        #[arg(long)]
        sinogram: Option<PathBuf>,
    },
    /// Write the predicted transition curve and the tangency fan.
    Predict,
    /// Compare the reconstructed edge profile with the prediction.
    Compare {
        /// Defaults to `<out>/image.bin`.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// simulate, reconstruct, predict and compare.
    Run,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format { .. } | Error::Csv(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn converged_code(converged: bool) -> u8 {
    if converged {
        0
    } else {
        eprintln!("solver did not converge; artifacts were written");
        EXIT_NOT_CONVERGED
    }
}

fn print_grid(cfg: &ExperimentConfig) -> grt_dtb::Result<()> {
    let g = cfg.coarse_grid()?;
    let (na, np) = cfg.dense_grid_sizes();
    println!(
        "coarse grid {}×{}, dense grid {na}×{np}, image {}×{}",
        g.n_alpha, g.n_p, cfg.image.n, cfg.image.n
    );
    println!("epsilon = {:.6}", g.epsilon());
    println!("mu = {:.6}", g.mu());
    Ok(())
}

fn run(cli: &Cli, cfg: &ExperimentConfig, out: &Path) -> grt_dtb::Result<u8> {
    match &cli.command {
        Command::Simulate => {
            let s = experiment::cmd_simulate(cfg, out)?;
            print_grid(cfg)?;
            println!("wrote {}", s.path.display());
            Ok(0)
        }
        Command::Reconstruct { sinogram } => {
            let path = sinogram.clone().unwrap_or_else(|| out.join(SINOGRAM_FILE));
            let r = experiment::cmd_reconstruct(cfg, &path, out)?;
            println!(
                "iterations = {}, converged = {}, step = {:.6e}",
                r.solution.iterations(),
                r.solution.converged,
                r.solution.step
            );
            println!("wrote {}", r.image_path.display());
            Ok(converged_code(r.solution.converged))
        }
        Command::Predict => {
            let curve = experiment::cmd_predict(cfg, out)?;
            for (l, t) in curve.tangencies.iter().enumerate() {
                println!(
                    "tangency {}: alpha = {:.9}, rho = {:.9}, nu = {:.9}",
                    l + 1,
                    t.alpha,
                    t.p,
                    t.nu
                );
            }
            println!("wrote {}", out.join(experiment::DTB_FILE).display());
            Ok(0)
        }
        Command::Compare { image } => {
            let path = image.clone().unwrap_or_else(|| out.join(IMAGE_FILE));
            let rep = experiment::cmd_compare(cfg, &path, out, cli.plot)?;
            print!("{}", rep.summary());
            Ok(0)
        }
        Command::Run => {
            print_grid(cfg)?;
            let r = experiment::cmd_run(cfg, out, cli.plot)?;
            println!(
                "iterations = {}, converged = {}",
                r.solution.iterations(),
                r.solution.converged
            );
            print!("{}", r.report.summary());
            Ok(converged_code(r.solution.converged))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let Some(config_path) = cli.config.as_deref() else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(EXIT_CONFIG);
    };
    let cfg = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    match run(&cli, &cfg, &out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
