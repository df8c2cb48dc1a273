use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spacemod::channel::Pilots;
use spacemod::error::{Error, Result};
use spacemod::pulse::BandwidthOptions;
use spacemod::runner::{
    export_pulses, run_sweep_to, table1_report, table2_report, validate_suite, ExperimentSpec, Method, SnrGrid,
    Table2Options,
};
use spacemod::sim::Scheme;

/// Error-probability analysis and simulation of space shift keying links.
///
/// Settings are resolved as command-line flags, then the `--config` file,
/// then built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "spacemod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (sweep writes to stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma-separated schemes: ssk, tosd_ssk, qam_siso, alamouti_qam.
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    /// SNR grid in dB: `start:stop:step` or a comma-separated list.
    #[arg(long, global = true)]
    snr: Option<SnrGrid>,
    /// Comma-separated pilot counts; `inf` for perfect channel knowledge.
    #[arg(long, global = true, value_delimiter = ',')]
    pilots: Vec<Pilots>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate ABEP / BER over a grid and write CSV rows.
    Sweep {
        /// analytic, mc or both.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Bandwidth table of the reference and orthogonal pulses.
    Table1 {
        /// Hermite time scale in seconds.
        #[arg(long, default_value_t = 1e-4)]
        t0: f64,
        /// Reference pulse duration in seconds.
        #[arg(long, default_value_t = 1e-3)]
        t_ref: f64,
    },
    /// Required SNR for the target error rates.
    Table2 {
        /// Comma-separated rates in bits per channel use.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        rates: Vec<u32>,
    },
    /// Export pulse waveforms and spectra as CSV.
    Pulses {
        #[arg(long, default_value_t = 1e-4)]
        t0: f64,
        #[arg(long, default_value_t = 1e-3)]
        t_ref: f64,
    },
    /// Run the built-in invariant checks.
    Validate,
}

enum Failure {
    Config(Error),
    Other(Error),
    Partial(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Toml(_) => Failure::Config(e),
            e => Failure::Other(e),
        }
    }
}

fn load_spec(cli: &Cli) -> Result<ExperimentSpec> {
    let mut spec = match &cli.config {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::default(),
    };
    if let Some(s) = cli.seed {
        spec.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        spec.out = Some(o.clone());
    }
    if !cli.scheme.is_empty() {
        spec.schemes = cli.scheme.clone();
    }
    if let Some(g) = &cli.snr {
        spec.snr_db = g.clone();
    }
    if !cli.pilots.is_empty() {
        spec.n_pilots = cli.pilots.clone();
    }
    Ok(spec)
}

fn out_file(dir: &Path, name: &str) -> Result<fs::File> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Sweep { method } => {
            let mut spec = load_spec(cli)?;
            if let Some(m) = method {
                spec.method = *m;
            }
            spec.validate()?;
            let outcome = match &spec.out {
                Some(dir) => run_sweep_to(&spec, io::BufWriter::new(out_file(dir, "sweep.csv")?))?,
                None => run_sweep_to(&spec, io::stdout().lock())?,
            };
            if outcome.failures > 0 {
                return Err(Failure::Partial(outcome.failures));
            }
        }
        Command::Table1 { t0, t_ref } => {
            let t = table1_report(*t0, *t_ref, &BandwidthOptions::default())?;
            print!("{t}");
            if let Some(dir) = &cli.out {
                t.write_csv(out_file(dir, "table1.csv")?)?;
            }
        }
        Command::Table2 { rates } => {
            let spec = load_spec(cli)?;
            let mut opts = Table2Options {
                rates: rates.clone(),
                r_pm: spec.r_pm,
                omega0: spec.omega0,
                ..Table2Options::default()
            };
            if cli.config.is_some() || !cli.scheme.is_empty() {
                opts.schemes = spec.schemes.clone();
            }
            if cli.config.is_some() || !cli.pilots.is_empty() {
                opts.pilots = spec.n_pilots.clone();
            }
            opts.mc.seed = spec.seed.unwrap_or(opts.mc.seed);
            opts.mc.stopping = spec.stopping;
            let t = table2_report(&opts)?;
            print!("{t}");
            if let Some(dir) = &cli.out {
                t.write_csv(out_file(dir, "table2.csv")?)?;
            }
            let missing = t.cells.iter().filter(|c| c.snr_db.is_none()).count();
            for c in t.cells.iter().filter(|c| c.snr_db.is_none()) {
                eprintln!("{} {} bpcu N_r={} N_p={}: {}", c.scheme, c.bpcu, c.n_rx, c.n_pilots, c.note);
            }
            if missing > 0 {
                return Err(Failure::Partial(missing));
            }
        }
        Command::Pulses { t0, t_ref } => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("pulses"));
            let files = export_pulses(&dir, *t0, *t_ref)?;
            println!("wrote {} files to {}", files.len(), dir.display());
        }
        Command::Validate => {
            let checks = validate_suite(cli.seed.unwrap_or(1))?;
            let mut out = io::stdout().lock();
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {}: {}", c.name, c.detail).map_err(Error::from)?;
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Failure::Partial(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Partial(n)) => {
            eprintln!("{n} point(s) failed");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
