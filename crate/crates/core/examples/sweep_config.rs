//! Declarative sweep: parse a TOML description, run it and print CSV.

use spacemod::runner::{run_sweep_to, ExperimentSpec};

const SPEC: &str = r#"
title = "SSK, N_t = 2: ABEP versus SNR, analytic and simulated"
schemes = ["ssk"]
sizes = [2]
n_rx = [1, 2]
n_pilots = [1, "inf"]
snr_db = { start = 0, stop = 20, step = 5 }
method = "both"
seed = 11

[stopping]
min_errors = 300
max_trials = 2000000
"#;

fn main() -> spacemod::error::Result<()> {
    let spec = ExperimentSpec::from_toml_str(SPEC)?;
    let outcome = run_sweep_to(&spec, std::io::stdout().lock())?;
    eprintln!("{} rows, {} failures", outcome.rows.len(), outcome.failures);
    Ok(())
}
