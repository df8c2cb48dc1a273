//! Fading-averaged pairwise error probabilities, union-bound ABEP and SNR
//! threshold search.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::channel::{LinkConfig, Mode};
use crate::error::{Error, Result};
use crate::quadform::{gil_pelaez_halfline, ssk_cf_params, tosd_cf_params};
use crate::quadrature::QuadratureSpec;

type DiffFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;
type PairFn = dyn Fn(Complex64, Complex64) -> Complex64 + Send + Sync;

/// MGF of the fading functional that a pairwise error event depends on.
///
/// Plug-in contract: the closure takes a complex argument, uses principal
/// branches for any non-integer powers, and returns 1 at the origin.
#[derive(Clone)]
pub enum FadingMgf {
    /// SSK: `s -> E[exp(s * gamma)]` with `gamma = sum_r |alpha_q - alpha_t|^2`.
    GammaDiff { mean: f64, mgf: Arc<DiffFn> },
    /// TOSD: `(s_q, s_t) -> E[exp(s_q gamma_q + s_t gamma_t)]` with
    /// `gamma_x = sum_r |alpha_x|^2`.
    GammaPair { mean: f64, mgf: Arc<PairFn> },
}

impl fmt::Debug for FadingMgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FadingMgf::GammaDiff { mean, .. } => write!(f, "FadingMgf::GammaDiff {{ mean: {mean} }}"),
            FadingMgf::GammaPair { mean, .. } => write!(f, "FadingMgf::GammaPair {{ mean: {mean} }}"),
        }
    }
}

fn rayleigh_factor(n: usize, omega: f64, s: Complex64) -> Complex64 {
    // (1 - omega s)^(-n)
    (-(n as f64) * (Complex64::new(1.0, 0.0) - omega * s).ln()).exp()
}

impl FadingMgf {
    /// User-supplied SSK MGF. `mean` is the per-branch mean of the statistic
    /// and only steers quadrature breakpoints.
    pub fn custom_diff<F>(mean: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        FadingMgf::GammaDiff { mean, mgf: Arc::new(f) }
    }

    /// User-supplied TOSD joint MGF.
    pub fn custom_pair<F>(mean: f64, f: F) -> Self
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        FadingMgf::GammaPair { mean, mgf: Arc::new(f) }
    }

    /// i.i.d. Rayleigh links: `(1 - 2 omega0 s)^(-N_r)`.
    pub fn rayleigh_ssk(n_rx: usize, omega0: f64) -> Self {
        Self::custom_diff(2.0 * omega0, move |s| rayleigh_factor(n_rx, 2.0 * omega0, s))
    }

    /// i.i.d. Rayleigh links: `(1 - omega0 s_q)^(-N_r) (1 - omega0 s_t)^(-N_r)`.
    pub fn rayleigh_tosd(n_rx: usize, omega0: f64) -> Self {
        Self::custom_pair(omega0, move |sq, st| {
            rayleigh_factor(n_rx, omega0, sq) * rayleigh_factor(n_rx, omega0, st)
        })
    }

    /// Independent, non-identical Rayleigh links with per-receive-antenna
    /// mean square gains for antennas `q` and `t`.
    pub fn independent_rayleigh_ssk(omega_q: &[f64], omega_t: &[f64]) -> Result<Self> {
        if omega_q.len() != omega_t.len() || omega_q.is_empty() {
            return Err(Error::Config("gain profiles must be non-empty and equally long".into()));
        }
        let sums: Vec<f64> = omega_q.iter().zip(omega_t).map(|(a, b)| a + b).collect();
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        Ok(Self::custom_diff(mean, move |s| {
            sums.iter().map(|&w| rayleigh_factor(1, w, s)).product()
        }))
    }

    /// Independent, non-identical Rayleigh links for TOSD.
    pub fn independent_rayleigh_tosd(omega_q: &[f64], omega_t: &[f64]) -> Result<Self> {
        if omega_q.len() != omega_t.len() || omega_q.is_empty() {
            return Err(Error::Config("gain profiles must be non-empty and equally long".into()));
        }
        let (q, t) = (omega_q.to_vec(), omega_t.to_vec());
        let mean = (q.iter().sum::<f64>() + t.iter().sum::<f64>()) / (2 * q.len()) as f64;
        Ok(Self::custom_pair(mean, move |sq, st| {
            let a: Complex64 = q.iter().map(|&w| rayleigh_factor(1, w, sq)).product();
            let b: Complex64 = t.iter().map(|&w| rayleigh_factor(1, w, st)).product();
            a * b
        }))
    }

    pub fn mode(&self) -> Mode {
        match self {
            FadingMgf::GammaDiff { .. } => Mode::Ssk,
            FadingMgf::GammaPair { .. } => Mode::Tosd,
        }
    }

    /// MGF value at the origin; 1 for a valid model.
    pub fn at_origin(&self) -> Complex64 {
        let z = Complex64::new(0.0, 0.0);
        match self {
            FadingMgf::GammaDiff { mgf, .. } => mgf(z),
            FadingMgf::GammaPair { mgf, .. } => mgf(z, z),
        }
    }
}

/// Bit labels of the transmit antennas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMapping {
    labels: Vec<u32>,
    bits: u32,
}

/// Labelling rule for antenna indices or constellation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    #[default]
    Natural,
    Gray,
}

impl BitMapping {
    pub fn new(n: usize, labeling: Labeling) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Config(format!("mapping size {n} is not a power of two")));
        }
        let labels = (0..n as u32)
            .map(|i| match labeling {
                Labeling::Natural => i,
                Labeling::Gray => i ^ (i >> 1),
            })
            .collect();
        Ok(Self {
            labels,
            bits: n.trailing_zeros(),
        })
    }

    pub fn natural(n: usize) -> Result<Self> {
        Self::new(n, Labeling::Natural)
    }

    pub fn gray(n: usize) -> Result<Self> {
        Self::new(n, Labeling::Gray)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Hamming distance between the labels of `t` and `q`.
    #[inline]
    pub fn hamming(&self, t: usize, q: usize) -> u32 {
        (self.labels[t] ^ self.labels[q]).count_ones()
    }

    pub fn hamming_matrix(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        (0..n).map(|t| (0..n).map(|q| self.hamming(t, q)).collect()).collect()
    }

    pub fn hamming_sum(&self) -> u64 {
        let n = self.len();
        (0..n)
            .flat_map(|t| (0..n).map(move |q| (t, q)))
            .map(|(t, q)| self.hamming(t, q) as u64)
            .sum()
    }
}

/// Sampled ABEP curve.
#[derive(Debug, Clone, PartialEq)]
pub struct AbepCurve {
    pub mode: Mode,
    pub config: LinkConfig,
    /// `(snr_db, abep)`, increasing in SNR.
    pub points: Vec<(f64, f64)>,
}

/// Fading-averaged pairwise error probability.
pub fn apep(mode: Mode, cfg: &LinkConfig, mgf: &FadingMgf, spec: &QuadratureSpec) -> Result<f64> {
    if mgf.mode() != mode {
        return Err(Error::Config(format!("MGF kind {:?} does not match mode {mode:?}", mgf.mode())));
    }
    match mgf {
        FadingMgf::GammaDiff { mean, mgf } => {
            let p = ssk_cf_params(cfg)?;
            let im = |nu: f64| (p.upsilon(nu) * mgf(p.delta(nu))).im;
            gil_pelaez_halfline(im, &p.scales(*mean), spec)
        }
        FadingMgf::GammaPair { mean, mgf } => {
            let p = tosd_cf_params(cfg)?;
            let im = |nu: f64| (p.ln_upsilon_pair(nu).exp() * mgf(p.q.delta(nu), p.t.delta(-nu))).im;
            gil_pelaez_halfline(im, &p.scales(*mean), spec)
        }
    }
}

fn check_mapping(cfg: &LinkConfig, mapping: &BitMapping) -> Result<()> {
    if mapping.len() != cfg.n_tx {
        return Err(Error::Config(format!(
            "mapping covers {} antennas, configuration has {}",
            mapping.len(),
            cfg.n_tx
        )));
    }
    if cfg.n_tx < 2 {
        return Err(Error::Config("space modulation needs at least two transmit antennas".into()));
    }
    Ok(())
}

/// Union bound `sum_{q,t} N_H(t,q) APEP(q -> t) / (N_t log2 N_t)` with a
/// per-pair MGF supplied by `mgf_for(t, q)`.
pub fn abep_union_bound<P>(mode: Mode, cfg: &LinkConfig, mgf_for: P, mapping: &BitMapping, spec: &QuadratureSpec) -> Result<f64>
where
    P: Fn(usize, usize) -> FadingMgf,
{
    check_mapping(cfg, mapping)?;
    let n = cfg.n_tx;
    let mut acc = 0.0;
    for q in 0..n {
        for t in 0..n {
            if t == q {
                continue;
            }
            let h = mapping.hamming(t, q);
            if h == 0 {
                continue;
            }
            acc += h as f64 * apep(mode, cfg, &mgf_for(t, q), spec)?;
        }
    }
    Ok(acc / (n as f64 * mapping.bits() as f64))
}

/// Union bound with every pair sharing the same APEP: `(N_t / 2) APEP`.
pub fn abep_from_common_apep(n_tx: usize, apep0: f64) -> f64 {
    0.5 * n_tx as f64 * apep0
}

/// i.i.d. Rayleigh APEP with the MGF inlined.
pub fn apep_iid_rayleigh(mode: Mode, cfg: &LinkConfig, spec: &QuadratureSpec) -> Result<f64> {
    let n = cfg.n_rx as f64;
    let w = cfg.omega0;
    let one = Complex64::new(1.0, 0.0);
    match mode {
        Mode::Ssk => {
            let p = ssk_cf_params(cfg)?;
            let im = |nu: f64| (p.ln_upsilon(nu) - n * (one - 2.0 * w * p.delta(nu)).ln()).exp().im;
            gil_pelaez_halfline(im, &p.scales(2.0 * w), spec)
        }
        Mode::Tosd => {
            let p = tosd_cf_params(cfg)?;
            let im = |nu: f64| {
                let l = p.ln_upsilon_pair(nu) - n * ((one - w * p.q.delta(nu)).ln() + (one - w * p.t.delta(-nu)).ln());
                l.exp().im
            };
            gil_pelaez_halfline(im, &p.scales(w), spec)
        }
    }
}

/// i.i.d. Rayleigh ABEP union bound (exact for two antennas).
pub fn abep_iid_rayleigh(mode: Mode, cfg: &LinkConfig, spec: &QuadratureSpec) -> Result<f64> {
    if cfg.n_tx < 2 {
        return Err(Error::Config("space modulation needs at least two transmit antennas".into()));
    }
    Ok(abep_from_common_apep(cfg.n_tx, apep_iid_rayleigh(mode, cfg, spec)?))
}

/// ABEP curve over an SNR grid.
pub fn abep_curve(mode: Mode, cfg: &LinkConfig, snrs_db: &[f64], spec: &QuadratureSpec) -> Result<AbepCurve> {
    let points = snrs_db
        .iter()
        .map(|&s| abep_iid_rayleigh(mode, &cfg.with_snr_db(s), spec).map(|p| (s, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AbepCurve {
        mode,
        config: *cfg,
        points,
    })
}

/// Search range and resolution for [`snr_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearch {
    pub snr_lo: f64,
    pub snr_hi: f64,
    /// Coarse scan step in dB.
    pub step: f64,
    /// Final bracket width in dB.
    pub resolution: f64,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            snr_lo: -10.0,
            snr_hi: 80.0,
            step: 1.0,
            resolution: 0.01,
        }
    }
}

/// SNR (dB) at which a decreasing curve reaches `target`.
///
/// Scans on the coarse grid for the first point at or below `target`, then
/// bisects that bracket in the log domain.
pub fn snr_threshold<F>(mut curve: F, target: f64, search: &ThresholdSearch) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0) {
        return Err(Error::Config(format!("target {target} must be positive")));
    }
    let unreachable = |low: f64, high: f64| Error::TargetUnreachable {
        target,
        low,
        high,
        snr_lo: search.snr_lo,
        snr_hi: search.snr_hi,
    };
    let first = curve(search.snr_lo)?;
    if first <= target {
        return Err(unreachable(first, first));
    }
    let (mut lo, mut f_lo) = (search.snr_lo, first);
    let mut hi = None;
    let mut s = search.snr_lo;
    while s < search.snr_hi {
        s = (s + search.step).min(search.snr_hi);
        let v = curve(s)?;
        if v <= target {
            hi = Some(s);
            break;
        }
        lo = s;
        f_lo = v;
    }
    let mut hi = hi.ok_or_else(|| unreachable(f_lo, first))?;
    while hi - lo > search.resolution {
        let mid = 0.5 * (lo + hi);
        if curve(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares slope of `-log10(abep)` versus `snr_db / 10` over the points
/// with `snr_db` in `window` (inclusive).
pub fn diversity_slope(curve: &AbepCurve, window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|(s, p)| *s >= window.0 && *s <= window.1 && *p > 0.0)
        .map(|&(s, p)| (s / 10.0, p.log10()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}
