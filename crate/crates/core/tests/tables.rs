//! Published bandwidth and required-SNR tables.

use spacemod::channel::Pilots;
use spacemod::pulse::BandwidthOptions;
use spacemod::runner::{table1_report, table2_cell, table2_report, Table2Options};
use spacemod::sim::Scheme;

/// `None` is a "> 30" kHz cell. Columns: rectangular, half-sine,
/// raised-cosine, first orthogonal pulse.
const TABLE1: [[Option<f64>; 4]; 9] = [
    [Some(7.61), Some(1.18), Some(1.41), Some(4.97)],
    [None, Some(6.98), Some(3.29), Some(6.46)],
    [None, Some(22.14), Some(6.64), Some(7.31)],
    [None, Some(29.96), Some(10.57), Some(7.76)],
    [Some(9.59), Some(2.28), Some(1.85), Some(6.35)],
    [None, Some(8.18), Some(4.62), Some(7.40)],
    [None, Some(15.13), Some(6.64), Some(7.85)],
    [None, Some(28.03), Some(9.65), Some(8.27)],
    [None, None, None, Some(9.39)],
];

#[test]
fn bandwidth_table() {
    let t = table1_report(1e-4, 1e-3, &BandwidthOptions::default()).unwrap();
    for (row, want) in t.rows.iter().zip(TABLE1) {
        for (b, w) in row.values.iter().zip(want) {
            match w {
                Some(k) => assert!(!b.capped && (b.khz() - k).abs() <= 0.05, "{}: {} vs {k}", row.metric, b.khz()),
                None => assert!(b.capped, "{}: {} should be capped", row.metric, b.khz()),
            }
        }
    }
}

/// Space-modulation thresholds; each entry lists N_r = 1 / 2 / 4 for SSK
/// (N_r = 1 at 1e-2) and N_r = 1 / 2 for TOSD, columns N_p = 1, 3, 10, inf.
const SSK: [[[f64; 3]; 4]; 4] = [
    [[22.9, 25.3, 16.2], [21.1, 23.5, 14.5], [20.3, 22.7, 13.6], [19.9, 22.3, 13.2]],
    [[26.0, 26.8, 17.0], [24.2, 25.1, 15.4], [23.4, 24.3, 14.5], [23.0, 23.8, 14.0]],
    [[29.0, 28.4, 17.9], [27.3, 26.6, 16.2], [26.4, 25.8, 15.3], [26.0, 25.4, 14.9]],
    [[32.0, 29.9, 18.7], [30.3, 28.1, 17.0], [29.5, 27.3, 16.2], [29.0, 26.9, 15.7]],
];
const TOSD: [[[f64; 2]; 4]; 4] = [
    [[27.2, 18.2], [26.0, 16.9], [25.5, 16.4], [25.3, 16.2]],
    [[28.7, 19.0], [27.5, 17.8], [27.0, 17.3], [26.8, 17.0]],
    [[30.2, 19.8], [29.0, 18.6], [28.5, 18.2], [28.4, 17.8]],
    [[31.9, 20.7], [30.5, 19.4], [30.1, 18.9], [29.9, 18.7]],
];

#[test]
fn analytic_threshold_table() {
    let opts = Table2Options {
        schemes: vec![Scheme::Ssk, Scheme::TosdSsk],
        ..Table2Options::default()
    };
    let t = table2_report(&opts).unwrap();
    let pilots = [Pilots::Finite(1), Pilots::Finite(3), Pilots::Finite(10), Pilots::Infinite];
    let mut worst: f64 = 0.0;
    for b in 0..4 {
        for (pi, &p) in pilots.iter().enumerate() {
            for (i, n_rx) in [1, 2, 4].into_iter().enumerate() {
                let got = t.cell(Scheme::Ssk, b as u32 + 1, n_rx, p).unwrap().snr_db.unwrap();
                worst = worst.max((got - SSK[b][pi][i]).abs());
                assert!((got - SSK[b][pi][i]).abs() <= 0.3, "ssk {}bpcu N_p={p} N_r={n_rx}: {got}", b + 1);
            }
            for (i, n_rx) in [1, 2].into_iter().enumerate() {
                let got = t.cell(Scheme::TosdSsk, b as u32 + 1, n_rx, p).unwrap().snr_db.unwrap();
                worst = worst.max((got - TOSD[b][pi][i]).abs());
                assert!((got - TOSD[b][pi][i]).abs() <= 0.3, "tosd {}bpcu N_p={p} N_r={n_rx}: {got}", b + 1);
            }
        }
    }
    println!("worst deviation {worst:.2} dB");
}

#[test]
fn alamouti_single_bit_perfect_csi() {
    let opts = Table2Options::default();
    for (n_rx, want) in [(1, 22.3), (2, 13.2)] {
        let c = table2_cell(Scheme::AlamoutiQam, 1, n_rx, Pilots::Infinite, 1e-4, &opts);
        let got = c.snr_db.unwrap();
        assert!((got - want).abs() <= 0.5, "N_r={n_rx}: {got} vs {want}");
    }
}
