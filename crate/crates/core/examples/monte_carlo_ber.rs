//! Simulated BER of the mismatched ML detector against the closed form.

use spacemod::abep::abep_iid_rayleigh;
use spacemod::channel::{LinkConfig, Pilots};
use spacemod::quadrature::QuadratureSpec;
use spacemod::sim::{estimate_ber, RngStreams, SchemeConfig, Stopping};

fn main() -> spacemod::error::Result<()> {
    let spec = QuadratureSpec::default();
    let stopping = Stopping {
        min_errors: 2000,
        max_trials: 10_000_000,
    };
    println!("{:<6} {:>3} {:>4} {:>5} {:>11} {:>11} {:>9} {:>6}", "mode", "N_r", "N_p", "SNR", "analytic", "simulated", "std err", "z");
    for (k, (n_rx, pilots, snr)) in [(1, Pilots::Finite(1), 10.0), (1, Pilots::Infinite, 20.0), (2, Pilots::Finite(3), 15.0)]
        .into_iter()
        .enumerate()
    {
        let link = LinkConfig::new(2, n_rx, snr).with_pilots(pilots);
        for cfg in [SchemeConfig::ssk(link), SchemeConfig::tosd(link)] {
            let mode = cfg.scheme.mode().expect("space modulation");
            let a = abep_iid_rayleigh(mode, &link, &spec)?;
            let b = estimate_ber(&cfg, &stopping, RngStreams::new(2024, k as u32))?;
            println!(
                "{:<6} {n_rx:>3} {pilots:>4} {snr:>5} {a:>11.4e} {:>11.4e} {:>9.1e} {:>6.2}",
                format!("{mode:?}"),
                b.ber,
                b.std_err,
                (b.ber - a) / b.std_err
            );
        }
    }
    Ok(())
}
