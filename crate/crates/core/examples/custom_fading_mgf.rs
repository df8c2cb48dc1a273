//! Plugging a custom fading model into the union bound: independent but
//! non-identically distributed Rayleigh links, and an SSK model whose
//! per-branch statistic is Gamma distributed, supplied as a closure.

use num_complex::Complex64;
use spacemod::abep::{abep_iid_rayleigh, abep_union_bound, BitMapping, FadingMgf};
use spacemod::channel::{LinkConfig, Mode, Pilots};
use spacemod::quadrature::QuadratureSpec;

fn main() -> spacemod::error::Result<()> {
    let spec = QuadratureSpec::default();
    let cfg = LinkConfig::new(4, 2, 20.0).with_pilots(Pilots::Finite(3));
    let mapping = BitMapping::natural(4)?;
    // per-antenna, per-branch mean square gains
    let profile = [[1.0, 1.0], [0.5, 0.8], [1.5, 1.2], [0.2, 0.3]];
    for mode in [Mode::Ssk, Mode::Tosd] {
        let iid = abep_iid_rayleigh(mode, &cfg, &spec)?;
        let inid = abep_union_bound(
            mode,
            &cfg,
            |t, q| match mode {
                Mode::Ssk => FadingMgf::independent_rayleigh_ssk(&profile[q], &profile[t]).expect("valid profile"),
                Mode::Tosd => FadingMgf::independent_rayleigh_tosd(&profile[q], &profile[t]).expect("valid profile"),
            },
            &mapping,
            &spec,
        )?;
        println!("{mode:?}: i.i.d. {iid:.4e}, unequal link gains {inid:.4e}");
    }
    // |a_q - a_t|^2 on each branch ~ Gamma(shape m, mean 2); m = 1 is Rayleigh
    for m in [0.5_f64, 1.0, 2.0, 4.0] {
        let nr = cfg.n_rx as f64;
        let mgf = move |s: Complex64| (Complex64::new(1.0, 0.0) - s * (2.0 / m)).powf(-m * nr);
        let abep = abep_union_bound(Mode::Ssk, &cfg, |_, _| FadingMgf::custom_diff(2.0, mgf), &mapping, &spec)?;
        println!("SSK with Gamma(m = {m}) branch statistics: {abep:.4e}");
    }
    Ok(())
}
