//! Monte Carlo bit error rate estimation with mismatched ML detection.
//!
//! One trial is one quasi-static block: a fresh Rayleigh channel, its pilot
//! estimate, one data transmission (two slots for Alamouti) and detection with
//! the estimated gains in place of the true ones.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::abep::{BitMapping, Labeling};
use crate::channel::{
    complex_gaussian, stream_rng, ChannelEstimate, ChannelRealization, LinkConfig, MatchedFilterOutput, Mode, SimRng,
};
use crate::error::{Error, Result};

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ssk,
    #[serde(alias = "tosd")]
    TosdSsk,
    #[serde(alias = "qam")]
    QamSiso,
    #[serde(alias = "alamouti")]
    AlamoutiQam,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ssk, Scheme::TosdSsk, Scheme::QamSiso, Scheme::AlamoutiQam];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ssk => "ssk",
            Scheme::TosdSsk => "tosd_ssk",
            Scheme::QamSiso => "qam_siso",
            Scheme::AlamoutiQam => "alamouti_qam",
        }
    }

    /// Space-modulation schemes have a closed-form ABEP.
    pub fn mode(self) -> Option<Mode> {
        match self {
            Scheme::Ssk => Some(Mode::Ssk),
            Scheme::TosdSsk => Some(Mode::Tosd),
            _ => None,
        }
    }

    pub fn is_space_modulation(self) -> bool {
        self.mode().is_some()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ssk" => Ok(Scheme::Ssk),
            "tosd" | "tosd_ssk" => Ok(Scheme::TosdSsk),
            "qam" | "qam_siso" => Ok(Scheme::QamSiso),
            "alamouti" | "alamouti_qam" => Ok(Scheme::AlamoutiQam),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Unit-average-energy rectangular QAM (BPSK for `M = 2`).
///
/// Odd numbers of bits split as `ceil(b/2)` in-phase and `floor(b/2)`
/// quadrature bits. Each axis is labelled independently.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    labels: Vec<u32>,
    bits: u32,
}

fn pam_levels(bits: u32) -> Vec<f64> {
    let m = 1u32 << bits;
    (0..m).map(|i| 2.0 * i as f64 - (m as f64 - 1.0)).collect()
}

impl Constellation {
    pub fn qam(order: usize, labeling: Labeling) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::Config(format!("QAM order {order} must be a power of two >= 2")));
        }
        let bits = order.trailing_zeros();
        let bq = bits / 2;
        let bi = bits - bq;
        let axis_label = |i: u32| match labeling {
            Labeling::Natural => i,
            Labeling::Gray => i ^ (i >> 1),
        };
        let (li, lq) = (pam_levels(bi), pam_levels(bq));
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for (a, &xi) in li.iter().enumerate() {
            for (b, &xq) in lq.iter().enumerate() {
                let im = if bq == 0 { 0.0 } else { xq };
                points.push(Complex64::new(xi, im));
                labels.push((axis_label(a as u32) << bq) | axis_label(b as u32));
            }
        }
        let e = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let s = e.sqrt().recip();
        for p in &mut points {
            *p *= s;
        }
        Ok(Self { points, labels, bits })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> Complex64 {
        self.points[i]
    }

    #[inline]
    pub fn hamming(&self, a: usize, b: usize) -> u32 {
        (self.labels[a] ^ self.labels[b]).count_ones()
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Index minimising `gain |s|^2 - 2 Re(conj(s) corr)`.
    #[inline]
    pub fn detect(&self, corr: Complex64, gain: f64) -> usize {
        let mut best = 0;
        let mut best_m = f64::INFINITY;
        for (i, s) in self.points.iter().enumerate() {
            let m = gain * s.norm_sqr() - 2.0 * (s.conj() * corr).re;
            if m < best_m {
                best_m = m;
                best = i;
            }
        }
        best
    }
}

/// A scheme together with its link parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub link: LinkConfig,
    /// Constellation size for the QAM baselines; ignored otherwise.
    pub qam_order: usize,
    pub labeling: Labeling,
}

impl SchemeConfig {
    pub fn ssk(link: LinkConfig) -> Self {
        Self {
            scheme: Scheme::Ssk,
            link,
            qam_order: 0,
            labeling: Labeling::Natural,
        }
    }

    pub fn tosd(link: LinkConfig) -> Self {
        Self {
            scheme: Scheme::TosdSsk,
            ..Self::ssk(link)
        }
    }

    /// Single-antenna QAM; `link.n_tx` is forced to 1.
    pub fn qam_siso(link: LinkConfig, order: usize) -> Self {
        Self {
            scheme: Scheme::QamSiso,
            link: LinkConfig { n_tx: 1, ..link },
            qam_order: order,
            labeling: Labeling::Natural,
        }
    }

    /// Two-antenna Alamouti code with QAM; `link.n_tx` is forced to 2.
    pub fn alamouti(link: LinkConfig, order: usize) -> Self {
        Self {
            scheme: Scheme::AlamoutiQam,
            link: LinkConfig { n_tx: 2, ..link },
            qam_order: order,
            labeling: Labeling::Natural,
        }
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Self {
        self.labeling = labeling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        match self.scheme {
            Scheme::Ssk | Scheme::TosdSsk if self.link.n_tx < 2 => {
                Err(Error::Config(format!("{} needs at least two transmit antennas", self.scheme)))
            }
            Scheme::QamSiso if self.link.n_tx != 1 => Err(Error::Config("qam_siso uses one transmit antenna".into())),
            Scheme::AlamoutiQam if self.link.n_tx != 2 => {
                Err(Error::Config("alamouti_qam uses two transmit antennas".into()))
            }
            Scheme::QamSiso | Scheme::AlamoutiQam => Constellation::qam(self.qam_order, self.labeling).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Bits per channel use.
    pub fn bpcu(&self) -> u32 {
        match self.scheme {
            Scheme::Ssk | Scheme::TosdSsk => self.link.n_tx.trailing_zeros(),
            Scheme::QamSiso | Scheme::AlamoutiQam => self.qam_order.trailing_zeros(),
        }
    }

    /// Bits carried by one trial (two channel uses for Alamouti).
    pub fn bits_per_trial(&self) -> u32 {
        match self.scheme {
            Scheme::AlamoutiQam => 2 * self.bpcu(),
            _ => self.bpcu(),
        }
    }

    /// Rate label used in reports: `N_t` for space modulation, `M` otherwise.
    pub fn size_label(&self) -> usize {
        if self.scheme.is_space_modulation() {
            self.link.n_tx
        } else {
            self.qam_order
        }
    }
}

/// Modulation alphabet of a prepared runner.
#[derive(Debug, Clone)]
enum Alphabet {
    Antennas(BitMapping),
    Qam(Constellation),
}

/// Reusable per-worker state for running trials of one scheme.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    cfg: SchemeConfig,
    alphabet: Alphabet,
    noise_var: f64,
    truth: ChannelRealization,
    est: ChannelEstimate,
    rx: MatchedFilterOutput,
    slots: (Vec<Complex64>, Vec<Complex64>),
}

impl TrialRunner {
    pub fn new(cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let alphabet = match cfg.scheme {
            Scheme::Ssk | Scheme::TosdSsk => Alphabet::Antennas(BitMapping::new(cfg.link.n_tx, cfg.labeling)?),
            Scheme::QamSiso | Scheme::AlamoutiQam => Alphabet::Qam(Constellation::qam(cfg.qam_order, cfg.labeling)?),
        };
        let (nt, nr) = (cfg.link.n_tx, cfg.link.n_rx);
        Ok(Self {
            cfg: cfg.clone(),
            alphabet,
            noise_var: cfg.link.noise_var(),
            truth: ChannelRealization::zeros(nt, nr),
            est: ChannelEstimate::zeros(nt, nr),
            rx: MatchedFilterOutput::zeros(nt, nr),
            slots: (vec![Complex64::new(0.0, 0.0); nr], vec![Complex64::new(0.0, 0.0); nr]),
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    fn draw_channel(&mut self, rng: &mut SimRng) {
        self.truth.resample(self.cfg.link.omega0, rng);
        self.est.refresh(&self.truth, &self.cfg.link, rng);
    }

    fn noise(&self, rng: &mut SimRng) -> Complex64 {
        if self.noise_var > 0.0 {
            complex_gaussian(rng, self.noise_var)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Run one trial and return its bit errors.
    pub fn run(&mut self, rng: &mut SimRng) -> u32 {
        match self.cfg.scheme {
            Scheme::Ssk => self.trial_ssk(rng),
            Scheme::TosdSsk => self.trial_tosd(rng),
            Scheme::QamSiso => self.trial_qam(rng),
            Scheme::AlamoutiQam => self.trial_alamouti(rng),
        }
    }

    fn mapping(&self) -> &BitMapping {
        match &self.alphabet {
            Alphabet::Antennas(m) => m,
            Alphabet::Qam(_) => unreachable!("space modulation runner"),
        }
    }

    fn constellation(&self) -> &Constellation {
        match &self.alphabet {
            Alphabet::Qam(c) => c,
            Alphabet::Antennas(_) => unreachable!("QAM runner"),
        }
    }

    fn trial_ssk(&mut self, rng: &mut SimRng) -> u32 {
        self.draw_channel(rng);
        let q = rng.gen_range(0..self.cfg.link.n_tx);
        self.rx
            .fill(Mode::Ssk, q, &self.truth, self.noise_var, rng)
            .expect("index drawn in range");
        let t = detect_ssk(&self.rx, &self.est);
        self.mapping().hamming(t, q)
    }

    fn trial_tosd(&mut self, rng: &mut SimRng) -> u32 {
        self.draw_channel(rng);
        let q = rng.gen_range(0..self.cfg.link.n_tx);
        self.rx
            .fill(Mode::Tosd, q, &self.truth, self.noise_var, rng)
            .expect("index drawn in range");
        let t = detect_tosd(&self.rx, &self.est);
        self.mapping().hamming(t, q)
    }

    fn trial_qam(&mut self, rng: &mut SimRng) -> u32 {
        self.draw_channel(rng);
        let m = self.constellation().len();
        let i = rng.gen_range(0..m);
        let s = self.constellation().point(i);
        let (mut corr, mut gain) = (Complex64::new(0.0, 0.0), 0.0);
        for r in 0..self.cfg.link.n_rx {
            let y = self.truth.gain(0, r) * s + self.noise(rng);
            let a = self.est.gains.gain(0, r);
            corr += a.conj() * y;
            gain += a.norm_sqr();
        }
        let d = self.constellation().detect(corr, gain);
        self.constellation().hamming(i, d)
    }

    fn trial_alamouti(&mut self, rng: &mut SimRng) -> u32 {
        self.draw_channel(rng);
        let m = self.constellation().len();
        let (i1, i2) = (rng.gen_range(0..m), rng.gen_range(0..m));
        // half the symbol energy on each antenna
        let s1 = self.constellation().point(i1) * FRAC_1_SQRT_2;
        let s2 = self.constellation().point(i2) * FRAC_1_SQRT_2;
        let (mut y1, mut y2) = std::mem::take(&mut self.slots);
        for r in 0..self.cfg.link.n_rx {
            let (a1, a2) = (self.truth.gain(0, r), self.truth.gain(1, r));
            y1[r] = a1 * s1 + a2 * s2 + self.noise(rng);
            y2[r] = -a1 * s2.conj() + a2 * s1.conj() + self.noise(rng);
        }
        let c = self.constellation();
        let (d1, d2) = alamouti_decoupled(&self.est, &y1, &y2, c);
        let errs = c.hamming(i1, d1) + c.hamming(i2, d2);
        self.slots = (y1, y2);
        errs
    }
}

/// `argmin_t sum_r |y_r - alpha_hat_{t,r}|^2`.
pub fn detect_ssk(rx: &MatchedFilterOutput, est: &ChannelEstimate) -> usize {
    let y = rx.branch(0);
    let mut best = 0;
    let mut best_m = f64::INFINITY;
    for t in 0..est.gains.n_tx {
        let m: f64 = y.iter().zip(est.row(t)).map(|(y, a)| (y - a).norm_sqr()).sum();
        if m < best_m {
            best_m = m;
            best = t;
        }
    }
    best
}

/// `argmax_t sum_r Re(conj(alpha_hat_{t,r}) y_{t,r}) - |alpha_hat_{t,r}|^2 / 2`.
pub fn detect_tosd(rx: &MatchedFilterOutput, est: &ChannelEstimate) -> usize {
    let mut best = 0;
    let mut best_m = f64::NEG_INFINITY;
    for t in 0..est.gains.n_tx {
        let m: f64 = rx
            .branch(t)
            .iter()
            .zip(est.row(t))
            .map(|(y, a)| (a.conj() * y).re - 0.5 * a.norm_sqr())
            .sum();
        if m > best_m {
            best_m = m;
            best = t;
        }
    }
    best
}

/// Mismatched ML detection of an Alamouti block from slot samples `y1`, `y2`.
///
/// The joint metric over `(s1, s2)` separates into one metric per symbol for
/// any gains, estimated or not, so this equals [`alamouti_joint_ml`].
pub fn alamouti_decoupled(est: &ChannelEstimate, y1: &[Complex64], y2: &[Complex64], c: &Constellation) -> (usize, usize) {
    let (mut c1, mut c2, mut g) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for r in 0..y1.len() {
        let (a1, a2) = (est.gains.gain(0, r), est.gains.gain(1, r));
        c1 += a1.conj() * y1[r] + a2 * y2[r].conj();
        c2 += a2.conj() * y1[r] - a1 * y2[r].conj();
        g += a1.norm_sqr() + a2.norm_sqr();
    }
    // per-symbol metric: (g/2)|s|^2 - sqrt(2) Re(conj(s) c)
    let scale = std::f64::consts::SQRT_2;
    (c.detect(c1 * scale, g), c.detect(c2 * scale, g))
}

/// Brute-force joint minimum of the two-slot Alamouti metric.
pub fn alamouti_joint_ml(est: &ChannelEstimate, y1: &[Complex64], y2: &[Complex64], c: &Constellation) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_m = f64::INFINITY;
    for i in 0..c.len() {
        let s1 = c.point(i) * FRAC_1_SQRT_2;
        for j in 0..c.len() {
            let s2 = c.point(j) * FRAC_1_SQRT_2;
            let mut m = 0.0;
            for r in 0..y1.len() {
                let (a1, a2) = (est.gains.gain(0, r), est.gains.gain(1, r));
                m += (y1[r] - (a1 * s1 + a2 * s2)).norm_sqr();
                m += (y2[r] - (-a1 * s2.conj() + a2 * s1.conj())).norm_sqr();
            }
            if m < best_m {
                best_m = m;
                best = (i, j);
            }
        }
    }
    best
}

/// Single SSK trial with fresh buffers.
pub fn run_trial_ssk(cfg: &SchemeConfig, rng: &mut SimRng) -> Result<u32> {
    expect_scheme(cfg, Scheme::Ssk)?;
    Ok(TrialRunner::new(cfg)?.run(rng))
}

/// Single TOSD trial with fresh buffers.
pub fn run_trial_tosd(cfg: &SchemeConfig, rng: &mut SimRng) -> Result<u32> {
    expect_scheme(cfg, Scheme::TosdSsk)?;
    Ok(TrialRunner::new(cfg)?.run(rng))
}

/// Single QAM trial with fresh buffers.
pub fn run_trial_qam(cfg: &SchemeConfig, rng: &mut SimRng) -> Result<u32> {
    expect_scheme(cfg, Scheme::QamSiso)?;
    Ok(TrialRunner::new(cfg)?.run(rng))
}

/// Single Alamouti trial (two symbols) with fresh buffers.
pub fn run_trial_alamouti(cfg: &SchemeConfig, rng: &mut SimRng) -> Result<u32> {
    expect_scheme(cfg, Scheme::AlamoutiQam)?;
    Ok(TrialRunner::new(cfg)?.run(rng))
}

fn expect_scheme(cfg: &SchemeConfig, s: Scheme) -> Result<()> {
    if cfg.scheme != s {
        return Err(Error::Config(format!("expected scheme {s}, got {}", cfg.scheme)));
    }
    Ok(())
}

/// Stopping rule for [`estimate_ber`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stopping {
    pub min_errors: u64,
    pub max_trials: u64,
}

impl Default for Stopping {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_trials: 100_000_000,
        }
    }
}

impl Stopping {
    /// Run exactly `n` trials.
    pub fn fixed(n: u64) -> Self {
        Self {
            min_errors: u64::MAX,
            max_trials: n,
        }
    }
}

/// Binomial bit error rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub std_err: f64,
    /// No errors observed: `ber` is 0 and only an upper bound is known.
    pub upper_bound_only: bool,
}

impl BerEstimate {
    pub fn from_counts(trials: u64, bits: u64, bit_errors: u64) -> Self {
        let ber = if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 };
        let std_err = if bits == 0 { 0.0 } else { (ber * (1.0 - ber) / bits as f64).sqrt() };
        Self {
            trials,
            bits,
            bit_errors,
            ber,
            std_err,
            upper_bound_only: bit_errors == 0,
        }
    }

    /// Pool two independent estimates.
    pub fn merge(&self, other: &Self) -> Self {
        Self::from_counts(
            self.trials + other.trials,
            self.bits + other.bits,
            self.bit_errors + other.bit_errors,
        )
    }
}

/// Seed plus a domain index that separates independent experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStreams {
    pub seed: u64,
    pub domain: u32,
}

impl RngStreams {
    pub fn new(seed: u64, domain: u32) -> Self {
        Self { seed, domain }
    }

    /// Generator for chunk `chunk` of this domain.
    pub fn chunk(&self, chunk: u32) -> SimRng {
        stream_rng(self.seed, ((self.domain as u64) << 32) | chunk as u64)
    }
}

/// Trials per independently seeded chunk.
pub const CHUNK_TRIALS: u64 = 4096;
const MAX_ROUND_CHUNKS: u64 = 64;

/// Deterministic parallel driver: chunks run on their own substreams and the
/// result is the shortest prefix of chunks meeting the stopping rule, so it
/// does not depend on the number of worker threads.
fn run_chunks<F, T>(stopping: &Stopping, streams: RngStreams, make: F) -> Result<(u64, u64)>
where
    F: Fn() -> Result<T> + Sync,
    T: FnMut(&mut SimRng) -> u64,
{
    if stopping.max_trials == 0 || stopping.min_errors == 0 {
        return Err(Error::Config("stopping bounds must be positive".into()));
    }
    let n_chunks = stopping.max_trials.div_ceil(CHUNK_TRIALS);
    if n_chunks > u32::MAX as u64 {
        return Err(Error::Config("trial budget too large".into()));
    }
    let (mut trials, mut errors) = (0u64, 0u64);
    let mut next = 0u64;
    let mut round = 1u64;
    while next < n_chunks {
        let end = (next + round).min(n_chunks);
        let results: Vec<(u64, u64)> = (next..end)
            .into_par_iter()
            .map(|k| {
                let mut trial = make()?;
                let mut rng = streams.chunk(k as u32);
                let n = CHUNK_TRIALS.min(stopping.max_trials - k * CHUNK_TRIALS);
                let e: u64 = (0..n).map(|_| trial(&mut rng)).sum();
                Ok((n, e))
            })
            .collect::<Result<_>>()?;
        for (n, e) in results {
            trials += n;
            errors += e;
            if errors >= stopping.min_errors {
                return Ok((trials, errors));
            }
        }
        next = end;
        round = (round * 2).min(MAX_ROUND_CHUNKS);
    }
    Ok((trials, errors))
}

/// Estimate the BER of `cfg` until `min_errors` bit errors or `max_trials`.
pub fn estimate_ber(cfg: &SchemeConfig, stopping: &Stopping, streams: RngStreams) -> Result<BerEstimate> {
    TrialRunner::new(cfg)?;
    let bits = cfg.bits_per_trial() as u64;
    let (trials, errors) = run_chunks(stopping, streams, || {
        let mut r = TrialRunner::new(cfg)?;
        Ok(move |rng: &mut SimRng| r.run(rng) as u64)
    })?;
    Ok(BerEstimate::from_counts(trials, trials * bits, errors))
}

/// Monte Carlo estimate of the pairwise error probability `q -> t` for a
/// fixed channel: each trial redraws only the estimation error and noise and
/// counts a decision variable favouring `t` over `q`.
pub fn pairwise_error_mc(
    mode: Mode,
    link: &LinkConfig,
    truth: &ChannelRealization,
    q: usize,
    t: usize,
    trials: u64,
    streams: RngStreams,
) -> Result<BerEstimate> {
    link.validate()?;
    for i in [q, t] {
        if i >= truth.n_tx {
            return Err(Error::TxIndex { index: i, n_tx: truth.n_tx });
        }
    }
    if truth.n_rx != link.n_rx {
        return Err(Error::Config("channel and configuration disagree on n_rx".into()));
    }
    let noise_var = link.noise_var();
    let (_, errors) = run_chunks(&Stopping::fixed(trials), streams, || {
        let mut est = ChannelEstimate::zeros(truth.n_tx, truth.n_rx);
        let mut rx = MatchedFilterOutput::zeros(truth.n_tx, truth.n_rx);
        let link = *link;
        Ok(move |rng: &mut SimRng| {
            est.refresh(truth, &link, rng);
            rx.fill(mode, q, truth, noise_var, rng).expect("index checked");
            let wrong = match mode {
                Mode::Ssk => {
                    let y = rx.branch(0);
                    let d = |x: usize| -> f64 { y.iter().zip(est.row(x)).map(|(y, a)| (y - a).norm_sqr()).sum() };
                    d(t) < d(q)
                }
                Mode::Tosd => {
                    let m = |x: usize| -> f64 {
                        rx.branch(x)
                            .iter()
                            .zip(est.row(x))
                            .map(|(y, a)| (a.conj() * y).re - 0.5 * a.norm_sqr())
                            .sum()
                    };
                    m(t) > m(q)
                }
            };
            wrong as u64
        })
    })?;
    Ok(BerEstimate::from_counts(trials, trials, errors))
}
