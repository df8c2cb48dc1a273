//! Conditional pairwise error probability for one fixed channel draw,
//! computed by characteristic-function inversion and checked by simulation.

use rand::SeedableRng;
use spacemod::channel::{sample_rayleigh_channel, LinkConfig, Mode, Pilots, SimRng};
use spacemod::quadform::{pep_conditional, GammaStats};
use spacemod::quadrature::QuadratureSpec;
use spacemod::sim::{pairwise_error_mc, RngStreams};

fn main() -> spacemod::error::Result<()> {
    let spec = QuadratureSpec::default();
    let mut rng = SimRng::seed_from_u64(7);
    let (q, t) = (0, 1);
    for mode in [Mode::Ssk, Mode::Tosd] {
        for (n_rx, pilots, snr) in [(1, Pilots::Finite(1), 8.0), (2, Pilots::Finite(3), 6.0), (2, Pilots::Infinite, 4.0)] {
            let link = LinkConfig::new(2, n_rx, snr).with_pilots(pilots);
            let h = sample_rayleigh_channel(&link, &mut rng);
            let stats = match mode {
                Mode::Ssk => GammaStats::Diff(h.distance_sq(q, t)),
                Mode::Tosd => GammaStats::Pair {
                    gamma_q: h.energy(q),
                    gamma_t: h.energy(t),
                },
            };
            let exact = pep_conditional(mode, &link, stats, &spec)?;
            let mc = pairwise_error_mc(mode, &link, &h, q, t, 1_000_000, RngStreams::new(1, 0))?;
            println!(
                "{mode:?} N_r={n_rx} N_p={pilots} {snr} dB: inversion {exact:.5e}  simulation {:.5e} +/- {:.1e}",
                mc.ber, mc.std_err
            );
        }
    }
    Ok(())
}
