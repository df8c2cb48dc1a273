//! System model: link configuration, Rayleigh channel sampling, pilot-based
//! channel estimation and the discrete-equivalent received samples.
//!
//! Energies are normalised so that the average data symbol energy is 1 and the
//! SNR sets the per-dimension noise variance `N0 = 1 / snr_linear`.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Counter-based generator used for every random draw in the crate.
pub type SimRng = ChaCha8Rng;

/// Generator for substream `stream` of the run identified by `seed`.
///
/// Distinct `(seed, stream)` pairs give statistically independent sequences.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly symmetric complex Gaussian sample with `var_per_dim` in each of
/// the real and imaginary parts.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var_per_dim: f64) -> Complex64 {
    let s = var_per_dim.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Which detector family a statistic belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Plain space shift keying: one common pulse for every antenna.
    Ssk,
    /// Time-orthogonal shaping-filter SSK: one matched filter per antenna.
    Tosd,
}

/// Number of pilot symbols per transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pilots {
    Finite(u32),
    /// Perfect channel knowledge at the receiver.
    Infinite,
}

impl Pilots {
    pub fn is_perfect(self) -> bool {
        matches!(self, Pilots::Infinite)
    }
}

impl fmt::Display for Pilots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pilots::Finite(n) => write!(f, "{n}"),
            Pilots::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Pilots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") || t.eq_ignore_ascii_case("pcsi") {
            return Ok(Pilots::Infinite);
        }
        match t.parse::<u32>() {
            Ok(n) if n > 0 => Ok(Pilots::Finite(n)),
            _ => Err(Error::Config(format!("invalid pilot count `{s}`"))),
        }
    }
}

impl Serialize for Pilots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pilots {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Pilots;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a positive pilot count or \"inf\"")
            }

            fn visit_u64<E: serde::de::Error>(self, n: u64) -> std::result::Result<Pilots, E> {
                match u32::try_from(n) {
                    Ok(n) if n > 0 => Ok(Pilots::Finite(n)),
                    _ => Err(E::custom(format!("invalid pilot count {n}"))),
                }
            }

            fn visit_i64<E: serde::de::Error>(self, n: i64) -> std::result::Result<Pilots, E> {
                u64::try_from(n)
                    .map_err(|_| E::custom(format!("invalid pilot count {n}")))
                    .and_then(|n| self.visit_u64(n))
            }

            fn visit_f64<E: serde::de::Error>(self, x: f64) -> std::result::Result<Pilots, E> {
                if x == f64::INFINITY {
                    Ok(Pilots::Infinite)
                } else if x.fract() == 0.0 && x >= 1.0 && x <= u32::MAX as f64 {
                    Ok(Pilots::Finite(x as u32))
                } else {
                    Err(E::custom(format!("invalid pilot count {x}")))
                }
            }

            fn visit_str<E: serde::de::Error>(self, s: &str) -> std::result::Result<Pilots, E> {
                s.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Independent variables of one link-level experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Average symbol energy over per-dimension noise variance, in dB.
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub pilots: Pilots,
    /// Pilot to data energy ratio.
    pub pilot_ratio: f64,
    /// Mean square gain of every link.
    pub omega0: f64,
}

impl LinkConfig {
    /// Configuration with perfect CSI, unit pilot ratio and unit-power links.
    pub fn new(n_tx: usize, n_rx: usize, snr_db: f64) -> Self {
        Self {
            n_tx,
            n_rx,
            snr_db,
            pilots: Pilots::Infinite,
            pilot_ratio: 1.0,
            omega0: 1.0,
        }
    }

    pub fn with_pilots(mut self, pilots: Pilots) -> Self {
        self.pilots = pilots;
        self
    }

    pub fn with_pilot_ratio(mut self, r: f64) -> Self {
        self.pilot_ratio = r;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || !self.n_tx.is_power_of_two() {
            return Err(Error::Config(format!("n_tx = {} is not a power of two", self.n_tx)));
        }
        if self.n_rx == 0 {
            return Err(Error::Config("n_rx must be positive".into()));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("snr_db = {} is not usable", self.snr_db)));
        }
        if !(self.pilot_ratio > 0.0 && self.pilot_ratio.is_finite()) {
            return Err(Error::Config(format!("pilot_ratio = {} must be positive", self.pilot_ratio)));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::Config(format!("omega0 = {} must be positive", self.omega0)));
        }
        Ok(())
    }

    /// Linear SNR.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Per-dimension noise variance `N0`.
    pub fn noise_var(&self) -> f64 {
        1.0 / self.snr_linear()
    }

    /// `N_p * r_pm`, or `None` under perfect CSI.
    pub fn pilot_energy(&self) -> Option<f64> {
        match self.pilots {
            Pilots::Finite(n) => Some(n as f64 * self.pilot_ratio),
            Pilots::Infinite => None,
        }
    }

    /// Per-dimension variance of the channel estimation error.
    pub fn est_err_var(&self) -> f64 {
        match self.pilot_energy() {
            Some(e) => self.noise_var() / e,
            None => 0.0,
        }
    }
}

/// Complex channel gains, `n_tx` rows by `n_rx` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub n_tx: usize,
    pub n_rx: usize,
    gains: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn zeros(n_tx: usize, n_rx: usize) -> Self {
        Self {
            n_tx,
            n_rx,
            gains: vec![Complex64::new(0.0, 0.0); n_tx * n_rx],
        }
    }

    /// Build from row-major gains.
    pub fn from_gains(n_tx: usize, n_rx: usize, gains: Vec<Complex64>) -> Result<Self> {
        if gains.len() != n_tx * n_rx {
            return Err(Error::Config(format!(
                "expected {} gains, got {}",
                n_tx * n_rx,
                gains.len()
            )));
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::Config("channel gains must be finite".into()));
        }
        Ok(Self { n_tx, n_rx, gains })
    }

    #[inline]
    pub fn gain(&self, t: usize, r: usize) -> Complex64 {
        self.gains[t * self.n_rx + r]
    }

    /// Gains from transmit antenna `t` to every receive antenna.
    #[inline]
    pub fn row(&self, t: usize) -> &[Complex64] {
        &self.gains[t * self.n_rx..(t + 1) * self.n_rx]
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    /// Redraw every gain in place as i.i.d. Rayleigh with mean square `omega0`.
    pub fn resample<R: Rng + ?Sized>(&mut self, omega0: f64, rng: &mut R) {
        let v = omega0 / 2.0;
        for g in &mut self.gains {
            *g = complex_gaussian(rng, v);
        }
    }

    /// `sum_r |alpha_{a,r} - alpha_{b,r}|^2`.
    pub fn distance_sq(&self, a: usize, b: usize) -> f64 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x - y).norm_sqr())
            .sum()
    }

    /// `sum_r |alpha_{t,r}|^2`.
    pub fn energy(&self, t: usize) -> f64 {
        self.row(t).iter().map(|x| x.norm_sqr()).sum()
    }
}

/// Draw i.i.d. Rayleigh gains for `cfg`.
pub fn sample_rayleigh_channel<R: Rng + ?Sized>(cfg: &LinkConfig, rng: &mut R) -> ChannelRealization {
    let mut h = ChannelRealization::zeros(cfg.n_tx, cfg.n_rx);
    h.resample(cfg.omega0, rng);
    h
}

/// Receiver-side channel estimate `alpha_hat = alpha + eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub gains: ChannelRealization,
    pub err_variance_per_dim: f64,
}

impl ChannelEstimate {
    pub fn zeros(n_tx: usize, n_rx: usize) -> Self {
        Self {
            gains: ChannelRealization::zeros(n_tx, n_rx),
            err_variance_per_dim: 0.0,
        }
    }

    /// Replace the estimate in place from `truth`, reusing the allocation.
    pub fn refresh<R: Rng + ?Sized>(&mut self, truth: &ChannelRealization, cfg: &LinkConfig, rng: &mut R) {
        let var = cfg.est_err_var();
        self.err_variance_per_dim = var;
        self.gains.n_tx = truth.n_tx;
        self.gains.n_rx = truth.n_rx;
        self.gains.gains.clear();
        if var == 0.0 {
            self.gains.gains.extend_from_slice(&truth.gains);
        } else {
            self.gains
                .gains
                .extend(truth.gains.iter().map(|g| g + complex_gaussian(rng, var)));
        }
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[Complex64] {
        self.gains.row(t)
    }
}

/// Maximum-likelihood pilot estimate of `truth`.
///
/// With finite pilots the error is i.i.d. complex Gaussian with per-dimension
/// variance `N0 / (N_p r_pm)`; with infinite pilots the estimate is exact and
/// no random numbers are consumed.
pub fn estimate_channel<R: Rng + ?Sized>(truth: &ChannelRealization, cfg: &LinkConfig, rng: &mut R) -> ChannelEstimate {
    let mut est = ChannelEstimate::zeros(truth.n_tx, truth.n_rx);
    est.refresh(truth, cfg, rng);
    est
}

/// Matched-filter outputs indexed by `(branch, receive antenna)`.
///
/// SSK has a single branch; TOSD has one branch per transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedFilterOutput {
    pub n_branches: usize,
    pub n_rx: usize,
    samples: Vec<Complex64>,
}

impl MatchedFilterOutput {
    pub fn zeros(n_branches: usize, n_rx: usize) -> Self {
        Self {
            n_branches,
            n_rx,
            samples: vec![Complex64::new(0.0, 0.0); n_branches * n_rx],
        }
    }

    #[inline]
    pub fn branch(&self, t: usize) -> &[Complex64] {
        &self.samples[t * self.n_rx..(t + 1) * self.n_rx]
    }

    #[inline]
    pub fn sample(&self, t: usize, r: usize) -> Complex64 {
        self.samples[t * self.n_rx + r]
    }

    /// Overwrite in place with the samples produced when antenna `tx_index`
    /// (0-based) is active.
    pub fn fill<R: Rng + ?Sized>(
        &mut self,
        mode: Mode,
        tx_index: usize,
        truth: &ChannelRealization,
        noise_var: f64,
        rng: &mut R,
    ) -> Result<()> {
        if tx_index >= truth.n_tx {
            return Err(Error::TxIndex {
                index: tx_index,
                n_tx: truth.n_tx,
            });
        }
        let n_rx = truth.n_rx;
        let branches = match mode {
            Mode::Ssk => 1,
            Mode::Tosd => truth.n_tx,
        };
        self.n_branches = branches;
        self.n_rx = n_rx;
        self.samples.resize(branches * n_rx, Complex64::new(0.0, 0.0));
        let active = truth.row(tx_index);
        for b in 0..branches {
            let hit = mode == Mode::Ssk || b == tx_index;
            for r in 0..n_rx {
                let signal = if hit { active[r] } else { Complex64::new(0.0, 0.0) };
                let noise = if noise_var > 0.0 {
                    complex_gaussian(rng, noise_var)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                self.samples[b * n_rx + r] = signal + noise;
            }
        }
        Ok(())
    }
}

/// Received samples when antenna `tx_index` (0-based) transmits.
///
/// SSK: `y_r = alpha_{q,r} + n_r`. TOSD: `y_{t,r} = alpha_{q,r} [t = q] + n_{t,r}`
/// with noise i.i.d. over `(t, r)`. Per-dimension noise variance is `N0`.
pub fn faded_rx_samples<R: Rng + ?Sized>(
    mode: Mode,
    tx_index: usize,
    truth: &ChannelRealization,
    cfg: &LinkConfig,
    rng: &mut R,
) -> Result<MatchedFilterOutput> {
    let mut out = MatchedFilterOutput::zeros(0, truth.n_rx);
    out.fill(mode, tx_index, truth, cfg.noise_var(), rng)?;
    Ok(out)
}
