//! Orthogonal Hermite-Gaussian shaping filters and their bandwidth compared
//! with rectangular, half-sine and raised-cosine pulses.

use spacemod::pulse::{build_tosd_bank_nt4, identity_error, BandwidthOptions};
use spacemod::runner::table1_report;

fn main() -> spacemod::error::Result<()> {
    let t0 = 1e-4;
    let bank = build_tosd_bank_nt4(t0)?;
    println!(
        "four-pulse bank, t0 = {t0} s: Gram error {:.1e} (coefficients), {:.1e} (quadrature over +/-5 t0)",
        identity_error(&bank.gram_algebraic()),
        identity_error(&bank.gram_quadrature(5.0 * t0)?)
    );
    println!();
    print!("{}", table1_report(t0, 1e-3, &BandwidthOptions::default())?);
    Ok(())
}
