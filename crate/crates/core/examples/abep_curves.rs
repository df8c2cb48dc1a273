//! Average bit error probability of SSK and TOSD-SSK over i.i.d. Rayleigh
//! fading for several pilot counts, plus the fitted high-SNR diversity slope.

use spacemod::abep::{abep_curve, diversity_slope, snr_threshold, ThresholdSearch};
use spacemod::channel::{LinkConfig, Mode, Pilots};
use spacemod::quadrature::QuadratureSpec;

fn main() -> spacemod::error::Result<()> {
    let spec = QuadratureSpec::default();
    let snrs: Vec<f64> = (0..=40).step_by(5).map(f64::from).collect();
    for mode in [Mode::Ssk, Mode::Tosd] {
        for n_rx in [1, 2] {
            println!("{mode:?}, N_t = 2, N_r = {n_rx}");
            for pilots in [Pilots::Finite(1), Pilots::Finite(3), Pilots::Finite(10), Pilots::Infinite] {
                let cfg = LinkConfig::new(2, n_rx, 0.0).with_pilots(pilots);
                let curve = abep_curve(mode, &cfg, &snrs, &spec)?;
                let row: Vec<String> = curve.points.iter().map(|(_, p)| format!("{p:.2e}")).collect();
                println!("  N_p={pilots:<4} {}", row.join(" "));
            }
            // slope from the 1e-6 .. 1e-8 region
            let cfg = LinkConfig::new(2, n_rx, 0.0).with_pilots(Pilots::Finite(1));
            let search = ThresholdSearch {
                snr_hi: 120.0,
                ..ThresholdSearch::default()
            };
            let f = |s: f64| spacemod::abep::abep_iid_rayleigh(mode, &cfg.with_snr_db(s), &spec);
            let (lo, hi) = (snr_threshold(f, 1e-6, &search)?, snr_threshold(f, 1e-8, &search)?);
            let grid: Vec<f64> = (0..=10).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect();
            let slope = diversity_slope(&abep_curve(mode, &cfg, &grid, &spec)?, (lo, hi))?;
            println!("  diversity slope at N_p=1: {slope:.3}\n");
        }
    }
    Ok(())
}
