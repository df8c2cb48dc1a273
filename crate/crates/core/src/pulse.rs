//! Time-limited reference pulses, Hermite-Gaussian orthogonal shaping
//! filters, and spectral bandwidth metrics.
//!
//! Fourier transforms use the unitary convention
//! `P(w) = (2 pi)^(-1/2) int p(t) exp(-j w t) dt`, so unit-energy pulses have
//! `int |P(w)|^2 dw = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::quadrature::{gk21, integrate_adaptive};

/// Normalised Hermite function `psi_n(u)`, orthonormal on the real line.
pub fn hermite_function(n: usize, u: f64) -> f64 {
    let g = PI.powf(-0.25) * (-0.5 * u * u).exp();
    if n == 0 {
        return g;
    }
    let (mut prev, mut cur) = (g, std::f64::consts::SQRT_2 * u * g);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Waveform family and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// Constant on `[-T0/2, T0/2]`.
    Rectangular { period: f64 },
    /// Half cycle of a sinusoid on `[-T0/2, T0/2]`.
    HalfSine { period: f64 },
    /// `1 + cos(2 pi t / T0)` on `[-T0/2, T0/2]`.
    RaisedCosine { period: f64 },
    /// `psi_{k-1}(t / t0) / sqrt(t0)` for `k` in `1..=5`.
    Hermite { order: usize, t0: f64 },
    /// `sum_k c_k psi_{k-1}(t / t0) / sqrt(t0)`.
    HermiteCombination { coeffs: [f64; 5], t0: f64 },
}

/// A real shaping pulse with closed-form time response and energy spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub label: String,
    pub shape: PulseShape,
}

/// Reference pulse families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Rectangular,
    HalfSine,
    RaisedCosine,
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "rectangular" | "rect" => Ok(ReferenceKind::Rectangular),
            "half_sine" | "halfsine" => Ok(ReferenceKind::HalfSine),
            "raised_cosine" | "raisedcosine" => Ok(ReferenceKind::RaisedCosine),
            other => Err(Error::Config(format!("unknown reference pulse `{other}`"))),
        }
    }
}

impl Pulse {
    /// Amplitude at time `t` (seconds).
    pub fn time(&self, t: f64) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { period } => {
                if t.abs() <= 0.5 * period {
                    period.sqrt().recip()
                } else {
                    0.0
                }
            }
            PulseShape::HalfSine { period } => {
                if t.abs() <= 0.5 * period {
                    (2.0 / period).sqrt() * (PI * t / period).cos()
                } else {
                    0.0
                }
            }
            PulseShape::RaisedCosine { period } => {
                if t.abs() <= 0.5 * period {
                    (2.0 / (3.0 * period)).sqrt() * (1.0 + (2.0 * PI * t / period).cos())
                } else {
                    0.0
                }
            }
            PulseShape::Hermite { order, t0 } => hermite_function(order - 1, t / t0) / t0.sqrt(),
            PulseShape::HermiteCombination { coeffs, t0 } => {
                let u = t / t0;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * hermite_function(k, u))
                    .sum::<f64>()
                    / t0.sqrt()
            }
        }
    }

    /// `|P(w)|^2` at angular frequency `w` (rad/s).
    pub fn spectrum_mag2(&self, w: f64) -> f64 {
        match &self.shape {
            PulseShape::Rectangular { period } => {
                let x = w * period / (2.0 * PI);
                period / (2.0 * PI) * sinc(x).powi(2)
            }
            PulseShape::HalfSine { period } => {
                let x = w * period / (2.0 * PI);
                let d = 1.0 - 4.0 * x * x;
                let r = if d.abs() < 1e-7 {
                    // removable singularity at |x| = 1/2
                    PI / 4.0
                } else {
                    (PI * x).cos() / d
                };
                4.0 * period / PI.powi(3) * r * r
            }
            PulseShape::RaisedCosine { period } => {
                let x = w * period / (2.0 * PI);
                let s = sinc(x) + 0.5 * sinc(x - 1.0) + 0.5 * sinc(x + 1.0);
                period / (3.0 * PI) * s * s
            }
            PulseShape::Hermite { order, t0 } => t0 * hermite_function(order - 1, t0 * w).powi(2),
            PulseShape::HermiteCombination { coeffs: c, t0 } => {
                // FT of psi_n is (-j)^n psi_n: even orders are real, odd imaginary
                let u = t0 * w;
                let h: Vec<f64> = (0..5).map(|n| hermite_function(n, u)).collect();
                let re = c[0] * h[0] - c[2] * h[2] + c[4] * h[4];
                let im = c[1] * h[1] - c[3] * h[3];
                t0 * (re * re + im * im)
            }
        }
    }

    /// Interval outside which the pulse is zero (or below 1e-20 in energy).
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            PulseShape::Rectangular { period } | PulseShape::HalfSine { period } | PulseShape::RaisedCosine { period } => {
                (-0.5 * period, 0.5 * period)
            }
            PulseShape::Hermite { t0, .. } | PulseShape::HermiteCombination { t0, .. } => (-12.0 * t0, 12.0 * t0),
        }
    }

    /// Energy by time-domain quadrature.
    pub fn energy(&self) -> Result<f64> {
        inner_product(self, self)
    }
}

/// `int p(t) q(t) dt` over the union of supports.
pub fn inner_product(p: &Pulse, q: &Pulse) -> Result<f64> {
    let (a0, b0) = p.support();
    let (a1, b1) = q.support();
    let (a, b) = (a0.min(a1), b0.max(b1));
    let pts: Vec<f64> = (0..=16).map(|i| a + (b - a) * i as f64 / 16.0).collect();
    let r = integrate_adaptive(|t| p.time(t) * q.time(t), &pts, |_| 1e-13, 4000)?;
    Ok(r.value)
}

/// Unit-energy Hermite-Gaussian basis pulse `k` in `1..=5`.
pub fn hermite_basis(order: usize, t0: f64) -> Result<Pulse> {
    if !(1..=5).contains(&order) {
        return Err(Error::HermiteOrder(order));
    }
    check_time(t0)?;
    Ok(Pulse {
        label: format!("hermite_{order}"),
        shape: PulseShape::Hermite { order, t0 },
    })
}

/// Unit-energy reference pulse of duration `period`.
pub fn reference_pulse(kind: ReferenceKind, period: f64) -> Result<Pulse> {
    check_time(period)?;
    let (label, shape) = match kind {
        ReferenceKind::Rectangular => ("rectangular", PulseShape::Rectangular { period }),
        ReferenceKind::HalfSine => ("half_sine", PulseShape::HalfSine { period }),
        ReferenceKind::RaisedCosine => ("raised_cosine", PulseShape::RaisedCosine { period }),
    };
    Ok(Pulse {
        label: label.into(),
        shape,
    })
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("time scale {t} must be positive")))
    }
}

/// Mutually orthogonal unit-energy pulses built on the Hermite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub t0: f64,
    pub coeff_matrix: Vec<[f64; 5]>,
    pub pulses: Vec<Pulse>,
}

/// Orthonormal 4 x 5 coefficient matrix of the four-antenna bank.
pub fn tosd_bank_coefficients() -> [[f64; 5]; 4] {
    let a = (4.0 - 2.0 * 2f64.sqrt()).sqrt() / 4.0;
    let b = (4.0 + 2.0 * 2f64.sqrt()).sqrt() / 4.0;
    let c1 = -4.0 / 165f64.sqrt();
    let c3 = (11.0f64 / 30.0).sqrt();
    let c5 = -2.0 / 110f64.sqrt();
    let d1 = (3.0f64 / 22.0).sqrt();
    let d5 = -2.0 / 11f64.sqrt();
    [
        [c1, a, c3, b, c5],
        [c1, -a, c3, -b, c5],
        [d1, -b, 0.0, a, d5],
        [d1, b, 0.0, -a, d5],
    ]
}

impl FilterBank {
    pub fn from_coefficients(t0: f64, coeff_matrix: Vec<[f64; 5]>) -> Result<Self> {
        check_time(t0)?;
        let pulses = coeff_matrix
            .iter()
            .enumerate()
            .map(|(i, c)| Pulse {
                label: format!("w_{}", i + 1),
                shape: PulseShape::HermiteCombination { coeffs: *c, t0 },
            })
            .collect();
        Ok(Self {
            t0,
            coeff_matrix,
            pulses,
        })
    }

    /// `C C^T`; the identity for an orthonormal bank.
    pub fn gram_algebraic(&self) -> Vec<Vec<f64>> {
        let c = &self.coeff_matrix;
        c.iter()
            .map(|r| c.iter().map(|s| r.iter().zip(s).map(|(x, y)| x * y).sum()).collect())
            .collect()
    }

    /// Gram matrix by time-domain quadrature over `[-half_width, half_width]`.
    pub fn gram_quadrature(&self, half_width: f64) -> Result<Vec<Vec<f64>>> {
        let pts: Vec<f64> = (0..=20).map(|i| -half_width + 2.0 * half_width * i as f64 / 20.0).collect();
        self.pulses
            .iter()
            .map(|p| {
                self.pulses
                    .iter()
                    .map(|q| integrate_adaptive(|t| p.time(t) * q.time(t), &pts, |_| 1e-12, 4000).map(|r| r.value))
                    .collect()
            })
            .collect()
    }
}

/// Deviation of a square matrix from the identity (max absolute entry).
pub fn identity_error(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, v)| (v - if i == j { 1.0 } else { 0.0 }).abs()))
        .fold(0.0, f64::max)
}

/// Four-antenna orthogonal bank with time scale `t0`.
pub fn build_tosd_bank_nt4(t0: f64) -> Result<FilterBank> {
    FilterBank::from_coefficients(t0, tosd_bank_coefficients().to_vec())
}

/// Analysis band and reporting cap for bandwidth metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthOptions {
    /// Upper edge of the analysed spectrum, rad/s.
    pub omega_max: f64,
    /// Bandwidths above this (Hz) are reported as capped.
    pub report_cap_hz: f64,
}

impl Default for BandwidthOptions {
    fn default() -> Self {
        Self {
            omega_max: 2.0e5,
            report_cap_hz: 30.0e3,
        }
    }
}

impl BandwidthOptions {
    /// Same options for a pulse whose time scale is multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            omega_max: self.omega_max / c,
            report_cap_hz: self.report_cap_hz / c,
        }
    }
}

/// A bandwidth `B / (2 pi)` in hertz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    pub hz: f64,
    /// Above the reporting cap.
    pub capped: bool,
    cap_hz: f64,
}

impl Bandwidth {
    fn new(omega: f64, opts: &BandwidthOptions) -> Self {
        let hz = omega / (2.0 * PI);
        Self {
            hz,
            capped: hz > opts.report_cap_hz,
            cap_hz: opts.report_cap_hz,
        }
    }

    pub fn khz(&self) -> f64 {
        self.hz / 1e3
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.capped {
            write!(f, "> {}", self.cap_hz / 1e3)
        } else {
            write!(f, "{:.2}", self.khz())
        }
    }
}

const PANELS: usize = 4096;

/// Fractional power containment bandwidth: the smallest `B` with
/// `int_0^B |P|^2 > fraction * int_0^omega_max |P|^2` (one-sided).
pub fn fpcb(pulse: &Pulse, fraction: f64, opts: &BandwidthOptions) -> Result<Bandwidth> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("fraction {fraction} must lie in (0, 1)")));
    }
    let mut f = |w: f64| pulse.spectrum_mag2(w);
    let h = opts.omega_max / PANELS as f64;
    let panel: Vec<f64> = (0..PANELS).map(|i| gk21(&mut f, i as f64 * h, (i + 1) as f64 * h).0).collect();
    let total: f64 = panel.iter().sum();
    // Work with the tail above B to keep precision for fractions near 1.
    let tail_target = (1.0 - fraction) * total;
    let mut tail = 0.0;
    let mut i = PANELS;
    while i > 0 && tail + panel[i - 1] <= tail_target {
        tail += panel[i - 1];
        i -= 1;
    }
    if i == 0 {
        return Ok(Bandwidth::new(0.0, opts));
    }
    // crossing lies in panel i-1: find B with tail + int_B^{i h} = tail_target
    let (lo0, hi0) = ((i - 1) as f64 * h, i as f64 * h);
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let part = gk21(&mut f, mid, hi0).0;
        if tail + part > tail_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bandwidth::new(0.5 * (lo + hi), opts))
}

/// Location and value of the global maximum of `|P|^2` on `[0, omega_max]`.
pub fn spectral_peak(pulse: &Pulse, opts: &BandwidthOptions) -> (f64, f64) {
    let n = 20_000;
    let h = opts.omega_max / n as f64;
    let (mut best_w, mut best) = (0.0, pulse.spectrum_mag2(0.0));
    for i in 1..=n {
        let w = i as f64 * h;
        let v = pulse.spectrum_mag2(w);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    // golden-section refinement around the best grid point
    let (mut a, mut b) = ((best_w - h).max(0.0), (best_w + h).min(opts.omega_max));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if pulse.spectrum_mag2(c) > pulse.spectrum_mag2(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let w = 0.5 * (a + b);
    let v = pulse.spectrum_mag2(w);
    if v > best {
        (w, v)
    } else {
        (best_w, best)
    }
}

/// Bounded power spectral density bandwidth: the smallest `B` such that
/// `log10 |P(w)|^2 < log10 |P_peak|^2 - th` for all `w` in `(B, omega_max]`.
///
/// `th` is on the decimal-log scale used by the table labels, so `th = 3`
/// means the density must stay 30 dB below its peak.
pub fn bpsdb(pulse: &Pulse, th: f64, opts: &BandwidthOptions) -> Result<Bandwidth> {
    if !(th > 0.0) {
        return Err(Error::Config(format!("threshold {th} must be positive")));
    }
    let (_, peak) = spectral_peak(pulse, opts);
    let level = peak * 10f64.powf(-th);
    let above = |w: f64| pulse.spectrum_mag2(w) >= level;
    let n = 200_000;
    let h = opts.omega_max / n as f64;
    if above(opts.omega_max) {
        return Ok(Bandwidth::new(opts.omega_max, opts));
    }
    let mut i = n;
    while i > 0 && !above((i - 1) as f64 * h) {
        i -= 1;
    }
    if i == 0 {
        return Ok(Bandwidth::new(0.0, opts));
    }
    let (mut lo, mut hi) = ((i - 1) as f64 * h, i as f64 * h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bandwidth::new(0.5 * (lo + hi), opts))
}

/// Write `time_s,amplitude` samples of `pulse` on `n` points over
/// `[t_start, t_end]`.
pub fn write_waveform_csv<W: Write>(pulse: &Pulse, t_start: f64, t_end: f64, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_s", "amplitude"])?;
    for i in 0..n {
        let t = t_start + (t_end - t_start) * i as f64 / (n.max(2) - 1) as f64;
        w.write_record([format!("{t:.9e}"), format!("{:.9e}", pulse.time(t))])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `freq_hz,psd` samples of `|P(2 pi f)|^2` on `n` points over
/// `[0, f_max]`.
pub fn write_spectrum_csv<W: Write>(pulse: &Pulse, f_max: f64, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["freq_hz", "psd"])?;
    for i in 0..n {
        let f = f_max * i as f64 / (n.max(2) - 1) as f64;
        w.write_record([format!("{f:.6e}"), format!("{:.9e}", pulse.spectrum_mag2(2.0 * PI * f))])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const T0: f64 = 1e-3;
    const TS: f64 = 1e-4;

    fn refs() -> Vec<Pulse> {
        [ReferenceKind::Rectangular, ReferenceKind::HalfSine, ReferenceKind::RaisedCosine]
            .iter()
            .map(|&k| reference_pulse(k, T0).unwrap())
            .collect()
    }

    /// Independent numeric Fourier transform `|P(w)|^2` from time samples.
    fn numeric_spectrum(p: &Pulse, w: f64) -> f64 {
        let (a, b) = p.support();
        let pts: Vec<f64> = (0..=64).map(|i| a + (b - a) * i as f64 / 64.0).collect();
        let re = integrate_adaptive(|t| p.time(t) * (w * t).cos(), &pts, |_| 1e-14, 4000).unwrap().value;
        let im = integrate_adaptive(|t| -p.time(t) * (w * t).sin(), &pts, |_| 1e-14, 4000).unwrap().value;
        (re * re + im * im) / (2.0 * PI)
    }

    #[test]
    fn hermite_functions_orthonormal() {
        for i in 1..=5 {
            for j in 1..=5 {
                let g = inner_product(&hermite_basis(i, TS).unwrap(), &hermite_basis(j, TS).unwrap()).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "{i} {j} {g}");
            }
        }
        assert!(matches!(hermite_basis(6, TS), Err(Error::HermiteOrder(6))));
        assert!(hermite_basis(0, TS).is_err());
    }

    #[test]
    fn hermite_parity() {
        let p1 = hermite_basis(1, TS).unwrap();
        let p2 = hermite_basis(2, TS).unwrap();
        assert_eq!(p2.time(0.0), 0.0);
        for i in 0..50 {
            let t = i as f64 * 1e-5;
            assert_relative_eq!(p1.time(t), p1.time(-t), epsilon = 1e-12);
            assert_relative_eq!(p2.time(t), -p2.time(-t), epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_spectra_match_numeric_transform() {
        let mut pulses = refs();
        pulses.extend((1..=5).map(|k| hermite_basis(k, TS).unwrap()));
        pulses.extend(build_tosd_bank_nt4(TS).unwrap().pulses);
        for p in &pulses {
            for w in [0.0, 1234.5, PI * 1e3, 9000.0, 2.0e4, 6.1e4] {
                let a = p.spectrum_mag2(w);
                let b = numeric_spectrum(p, w);
                assert!((a - b).abs() <= 1e-9 * p.spectrum_mag2(0.0).max(a) + 1e-18, "{} w={w}: {a} {b}", p.label);
            }
        }
    }

    #[test]
    fn unit_energy_and_parseval() {
        let mut pulses = refs();
        pulses.extend((1..=5).map(|k| hermite_basis(k, TS).unwrap()));
        pulses.extend(build_tosd_bank_nt4(TS).unwrap().pulses);
        for p in &pulses {
            assert!((p.energy().unwrap() - 1.0).abs() < 1e-6, "{}", p.label);
            // two-sided spectral energy over a wide band
            let wmax = if matches!(p.shape, PulseShape::Rectangular { .. }) { 4e7 } else { 4e6 };
            let pts: Vec<f64> = (0..=4000).map(|i| wmax * i as f64 / 4000.0).collect();
            let e = 2.0 * integrate_adaptive(|w| p.spectrum_mag2(w), &pts, |_| 1e-12, 100_000).unwrap().value;
            assert!((e - 1.0).abs() < 1e-4, "{} {e}", p.label);
        }
    }

    #[test]
    fn reference_spectrum_features() {
        let r = &refs()[0];
        assert!(r.spectrum_mag2(2.0 * PI * 1e3) < 1e-20);
        let hs = &refs()[1];
        let (w, _) = spectral_peak(hs, &BandwidthOptions::default());
        assert_eq!(w, 0.0);
        // continuity across the removable point at f = 1 / (2 T0)
        let w0 = PI / T0;
        assert_relative_eq!(hs.spectrum_mag2(w0), hs.spectrum_mag2(w0 * (1.0 + 1e-6)), max_relative = 1e-5);
    }

    #[test]
    fn bank_coefficients_orthonormal() {
        let bank = build_tosd_bank_nt4(TS).unwrap();
        assert!(identity_error(&bank.gram_algebraic()) < 1e-12);
        let c = &bank.coeff_matrix;
        let r1: f64 = c[0].iter().map(|x| x * x).sum();
        assert!((r1 - 1.0).abs() < 1e-12);
        assert!(identity_error(&bank.gram_quadrature(5e-4).unwrap()) < 1e-3);
        assert!(identity_error(&bank.gram_quadrature(12.0 * TS).unwrap()) < 1e-8);
    }

    #[test]
    fn metrics_are_monotone() {
        let opts = BandwidthOptions::default();
        let mut pulses = refs();
        pulses.push(build_tosd_bank_nt4(TS).unwrap().pulses[0].clone());
        for p in &pulses {
            let f: Vec<f64> = [0.9, 0.99, 0.99995, 0.999999, 0.9999999]
                .iter()
                .map(|&x| fpcb(p, x, &opts).unwrap().hz)
                .collect();
            assert!(f.windows(2).all(|w| w[1] >= w[0]), "{} {f:?}", p.label);
            let b: Vec<f64> = [1.0, 3.0, 5.0, 6.0, 7.0, 10.0].iter().map(|&t| bpsdb(p, t, &opts).unwrap().hz).collect();
            assert!(b.windows(2).all(|w| w[1] >= w[0]), "{} {b:?}", p.label);
        }
        assert!(fpcb(&pulses[0], 1.0, &opts).is_err());
        assert!(bpsdb(&pulses[0], 0.0, &opts).is_err());
    }

    fn table_pulses(t_ref: f64, t_h: f64) -> Vec<Pulse> {
        let mut v: Vec<Pulse> = [ReferenceKind::Rectangular, ReferenceKind::HalfSine, ReferenceKind::RaisedCosine]
            .iter()
            .map(|&k| reference_pulse(k, t_ref).unwrap())
            .collect();
        v.push(build_tosd_bank_nt4(t_h).unwrap().pulses[0].clone());
        v
    }

    // None marks a "> 30" cell.
    const FPCB_TABLE: [(f64, [Option<f64>; 4]); 4] = [
        (0.99, [Some(7.61), Some(1.18), Some(1.41), Some(4.97)]),
        (0.99995, [None, Some(6.98), Some(3.29), Some(6.46)]),
        (0.999999, [None, Some(22.14), Some(6.64), Some(7.31)]),
        (0.9999999, [None, Some(29.96), Some(10.57), Some(7.76)]),
    ];
    const BPSDB_TABLE: [(f64, [Option<f64>; 4]); 5] = [
        (3.0, [Some(9.59), Some(2.28), Some(1.85), Some(6.35)]),
        (5.0, [None, Some(8.18), Some(4.62), Some(7.40)]),
        (6.0, [None, Some(15.13), Some(6.64), Some(7.85)]),
        (7.0, [None, Some(28.03), Some(9.65), Some(8.27)]),
        (10.0, [None, None, None, Some(9.39)]),
    ];

    fn check_cell(b: Bandwidth, want: Option<f64>, what: &str) {
        match want {
            Some(k) => assert!(!b.capped && (b.khz() - k).abs() <= 0.05, "{what}: {} vs {k}", b.khz()),
            None => assert!(b.capped, "{what}: {} should be capped", b.khz()),
        }
    }

    #[test]
    fn table_cells_reproduced() {
        let opts = BandwidthOptions::default();
        let pulses = table_pulses(T0, TS);
        for (x, row) in FPCB_TABLE {
            for (p, want) in pulses.iter().zip(row) {
                check_cell(fpcb(p, x, &opts).unwrap(), want, &format!("fpcb {x} {}", p.label));
            }
        }
        for (th, row) in BPSDB_TABLE {
            for (p, want) in pulses.iter().zip(row) {
                check_cell(bpsdb(p, th, &opts).unwrap(), want, &format!("bpsdb {th} {}", p.label));
            }
        }
    }

    #[test]
    fn bandwidths_scale_inversely_with_time_scale() {
        let opts = BandwidthOptions::default();
        let c = 2.0;
        let base = table_pulses(T0, TS);
        let scaled = table_pulses(c * T0, c * TS);
        for (p, q) in base.iter().zip(&scaled) {
            for x in [0.99, 0.99995] {
                let a = fpcb(p, x, &opts).unwrap().hz;
                let b = fpcb(q, x, &opts.scaled(c)).unwrap().hz;
                assert!((a / c - b).abs() <= 1e-3 * b, "{} {a} {b}", p.label);
            }
            for th in [3.0, 6.0] {
                let a = bpsdb(p, th, &opts).unwrap().hz;
                let b = bpsdb(q, th, &opts.scaled(c)).unwrap().hz;
                assert!((a / c - b).abs() <= 1e-3 * b, "{} {a} {b}", p.label);
            }
        }
    }

    #[test]
    fn bandwidth_display() {
        let opts = BandwidthOptions::default();
        assert_eq!(Bandwidth::new(2.0 * PI * 4970.0, &opts).to_string(), "4.97");
        assert_eq!(Bandwidth::new(2.0 * PI * 31_000.0, &opts).to_string(), "> 30");
    }

    #[test]
    fn csv_exports_have_headers() {
        let p = &refs()[1];
        let mut buf = Vec::new();
        write_waveform_csv(p, -T0, T0, 11, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("time_s,amplitude\n"));
        assert_eq!(s.lines().count(), 12);
        let mut buf = Vec::new();
        write_spectrum_csv(p, 3e4, 5, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("freq_hz,psd\n"));
    }
}
