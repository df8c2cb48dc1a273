//! Pilot-based channel estimation: the estimate error is Gaussian with
//! variance `N0 / (N_p r_pm)` per dimension, independent of the true gains.

use rand::SeedableRng;
use spacemod::channel::{estimate_channel, sample_rayleigh_channel, LinkConfig, Pilots, SimRng};

fn main() {
    let mut rng = SimRng::seed_from_u64(42);
    println!("{:>4} {:>10} {:>14} {:>14}", "N_p", "SNR (dB)", "empirical", "theory");
    for n_p in [1u32, 3, 10] {
        for snr in [0.0, 10.0, 20.0] {
            let cfg = LinkConfig::new(4, 2, snr).with_pilots(Pilots::Finite(n_p));
            let blocks = 20_000;
            let mut acc = 0.0;
            for _ in 0..blocks {
                let h = sample_rayleigh_channel(&cfg, &mut rng);
                let est = estimate_channel(&h, &cfg, &mut rng);
                acc += h
                    .gains()
                    .iter()
                    .zip(est.gains.gains())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>();
            }
            // two real dimensions per complex gain
            let per_dim = acc / (2.0 * blocks as f64 * (cfg.n_tx * cfg.n_rx) as f64);
            println!("{n_p:>4} {snr:>10.1} {per_dim:>14.4e} {:>14.4e}", cfg.est_err_var());
        }
    }
}
