use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use usi_core::game::{split_sizes, split_space_size, Alpha};
use usi_core::harness::data::{generate_synthetic, write_csv, SyntheticSpec};
use usi_core::harness::{render_summary, run, RunConfig, RunDocument, OUTPUT_DIR_ENV};
use usi_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "usi",
    version,
    about = "Measure unlearning quality with the sample inference game"
)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded Gaussian-blob dataset as CSV.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        num_points: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        num_classes: usize,
        #[arg(long, default_value_t = 2.0)]
        separation: f64,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the split-space size for n points at portion alpha.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Rational portion such as 1/5.
        #[arg(long)]
        alpha: Alpha,
        /// Largest space `exact` will enumerate.
        #[arg(long, default_value_t = usi_core::engine::DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Run the full pipeline from a TOML config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render the summary table from a stored report.json.
    Report { report: PathBuf },
}

fn gen_data(out: &Path, spec: SyntheticSpec) -> Result<()> {
    let data = generate_synthetic(&spec)?;
    write_csv(&data, out)?;
    println!("wrote {} points to {}", data.len(), out.display());
    Ok(())
}

fn enumerate(n: usize, alpha: Alpha, cap: usize) -> Result<()> {
    let (r, t) = split_sizes(n, alpha)?;
    let size = split_space_size(n, alpha)?;
    let feasible = size <= cap.into();
    println!("n={n} alpha={alpha} |R|={r} |F|=|T|={t}");
    println!("splits {size}");
    println!(
        "exact enumeration {}",
        if feasible {
            "feasible"
        } else {
            "exceeds cap; use swap:N or mc:N"
        }
    );
    Ok(())
}

fn run_config(path: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut config = RunConfig::load(path)?;
    if let Some(dir) = out {
        // the flag wins over both the file and the environment
        std::env::remove_var(OUTPUT_DIR_ENV);
        config.output.dir = Some(dir);
    }
    let (doc, paths) = run(&config)?;
    print!("{}", render_summary(&doc));
    println!(
        "\nreport  {}\nsplits  {}\nsummary {}",
        paths.report.display(),
        paths.splits.display(),
        paths.summary.display()
    );
    Ok(())
}

fn report(path: &Path) -> Result<()> {
    print!("{}", render_summary(&RunDocument::load(path)?));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::GenData {
            out,
            num_points,
            dim,
            num_classes,
            separation,
            noise,
            seed,
        } => gen_data(
            &out,
            SyntheticSpec {
                num_points,
                dim,
                num_classes,
                cluster_separation: separation,
                noise_sigma: noise,
                seed,
            },
        ),
        Command::Enumerate { n, alpha, cap } => enumerate(n, alpha, cap),
        Command::Run { config, out } => run_config(&config, out),
        Command::Report { report: path } => report(&path),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&e.record()).expect("error record serializes")
            );
            ExitCode::FAILURE
        }
    }
}
