//! Closed-form ABEP against Monte Carlo BER beyond the two-antenna case.

use spacemod::abep::abep_iid_rayleigh;
use spacemod::channel::{LinkConfig, Pilots};
use spacemod::quadrature::QuadratureSpec;
use spacemod::sim::{estimate_ber, RngStreams, SchemeConfig, Stopping};

fn mc(cfg: &SchemeConfig, domain: u32) -> spacemod::sim::BerEstimate {
    let stopping = Stopping {
        min_errors: 3000,
        max_trials: 4_000_000,
    };
    estimate_ber(cfg, &stopping, RngStreams::new(5, domain)).unwrap()
}

#[test]
fn union_bound_is_an_upper_bound_and_tightens() {
    // the natural-label union bound over-counts overlapping error events,
    // most at low SNR where errors are frequent
    let spec = QuadratureSpec::default();
    let mut gaps = Vec::new();
    for (d, snr) in [0.0, 10.0, 20.0].into_iter().enumerate() {
        let link = LinkConfig::new(4, 1, snr).with_pilots(Pilots::Finite(2));
        let bound = abep_iid_rayleigh(spacemod::channel::Mode::Ssk, &link, &spec).unwrap();
        let b = mc(&SchemeConfig::ssk(link), d as u32);
        assert!(bound >= b.ber - 3.0 * b.std_err, "{snr} dB: bound {bound:e} below simulation {:e}", b.ber);
        gaps.push(bound / b.ber);
    }
    assert!(gaps[2] < gaps[0], "{gaps:?}");
    assert!(gaps[2] < 1.3, "{gaps:?}");
}

#[test]
fn two_antenna_exactness_with_more_receivers() {
    let spec = QuadratureSpec::default();
    for (d, (n_rx, pilots, snr)) in [(4, Pilots::Finite(1), 6.0), (3, Pilots::Finite(5), 4.0)].into_iter().enumerate() {
        let link = LinkConfig::new(2, n_rx, snr).with_pilots(pilots);
        for cfg in [SchemeConfig::ssk(link), SchemeConfig::tosd(link)] {
            let a = abep_iid_rayleigh(cfg.scheme.mode().unwrap(), &link, &spec).unwrap();
            let b = mc(&cfg, 100 + d as u32);
            let z = (b.ber - a) / b.std_err;
            assert!(z.abs() < 3.5, "{:?} N_r={n_rx}: analytic {a:e} simulated {:e} z={z:.2}", cfg.scheme, b.ber);
        }
    }
}

#[test]
fn pilot_ratio_trades_against_pilot_count() {
    // only the product N_p r_pm matters, analytically and in simulation
    let spec = QuadratureSpec::default();
    let a = LinkConfig::new(2, 2, 8.0).with_pilots(Pilots::Finite(4)).with_pilot_ratio(0.5);
    let b = LinkConfig::new(2, 2, 8.0).with_pilots(Pilots::Finite(1)).with_pilot_ratio(2.0);
    let mode = spacemod::channel::Mode::Tosd;
    let (va, vb) = (abep_iid_rayleigh(mode, &a, &spec).unwrap(), abep_iid_rayleigh(mode, &b, &spec).unwrap());
    assert!((va - vb).abs() < 1e-12 * va.max(1e-300));
    let (ma, mb) = (mc(&SchemeConfig::tosd(a), 7), mc(&SchemeConfig::tosd(b), 8));
    let z = (ma.ber - mb.ber) / (ma.std_err.hypot(mb.std_err));
    assert!(z.abs() < 3.5, "z = {z}");
}
