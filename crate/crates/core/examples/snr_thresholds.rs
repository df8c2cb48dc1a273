//! Required SNR for a target ABEP: analytic bisection for SSK and TOSD-SSK.

use spacemod::runner::{table2_report, Table2Options};
use spacemod::sim::Scheme;

fn main() -> spacemod::error::Result<()> {
    let opts = Table2Options {
        schemes: vec![Scheme::Ssk, Scheme::TosdSsk],
        ..Table2Options::default()
    };
    let table = table2_report(&opts)?;
    print!("{table}");
    Ok(())
}
