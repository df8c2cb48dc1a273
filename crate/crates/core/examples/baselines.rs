//! QAM single-antenna and Alamouti baselines: simulated BER and the SNR
//! needed for BER 1e-4 with one pilot and with perfect channel knowledge.

use spacemod::channel::{LinkConfig, Pilots};
use spacemod::runner::{mc_threshold, McThresholdOptions};
use spacemod::sim::{estimate_ber, RngStreams, SchemeConfig, Stopping};

fn main() -> spacemod::error::Result<()> {
    let link = LinkConfig::new(1, 2, 20.0).with_pilots(Pilots::Finite(1));
    for m in [2, 4, 16] {
        let b = estimate_ber(&SchemeConfig::qam_siso(link, m), &Stopping::default(), RngStreams::new(3, m as u32))?;
        println!("{m}-QAM, N_r = 2, N_p = 1, 20 dB: BER {:.3e} ({} trials)", b.ber, b.trials);
    }
    let opts = McThresholdOptions::default();
    for m in [2, 16] {
        for pilots in [Pilots::Finite(1), Pilots::Infinite] {
            let l = link.with_pilots(pilots);
            let q = mc_threshold(&SchemeConfig::qam_siso(l, m), 1e-4, &opts, 10 + m as u32)?;
            let a = mc_threshold(&SchemeConfig::alamouti(l, m), 1e-4, &opts, 100 + m as u32)?;
            println!("M = {m:>2}, N_p = {pilots:<3}: QAM {q:.2} dB, Alamouti {a:.2} dB");
        }
    }
    Ok(())
}
