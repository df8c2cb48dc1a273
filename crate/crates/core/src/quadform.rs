//! Characteristic functions of the SSK and TOSD decision variables and their
//! inversion into tail probabilities.
//!
//! For SSK the decision variable comparing hypothesis `q` (sent) with `t` has
//! conditional characteristic function `Upsilon(nu) * exp(Delta(nu) * gamma)`
//! where `gamma = sum_r |alpha_q - alpha_t|^2`. For TOSD the two branches are
//! independent and the CF factors as
//! `Upsilon(nu) Upsilon(-nu) exp(Delta_q(nu) gamma_q + Delta_t(-nu) gamma_t)`.
//!
//! Perfect CSI is the `v_a = v_b = inf` member of the same family, so one code
//! path covers both cases.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::channel::{LinkConfig, Mode};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, QuadratureSpec};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Parameters `(v_a, v_b, g_a, g_b, N_r)` of one conditional CF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfParams {
    pub v_a: f64,
    pub v_b: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub n_rx: usize,
}

impl CfParams {
    /// `ln Upsilon(nu)`. Written as
    /// `-N [ln(1 - j nu / v_a) + ln(1 + j nu / v_b)]`, which is finite at
    /// `v = inf` and avoids overflow for large receive arrays.
    pub fn ln_upsilon(&self, nu: f64) -> Complex64 {
        let n = self.n_rx as f64;
        let xa = nu / self.v_a;
        let xb = nu / self.v_b;
        let re = -0.5 * n * ((xa * xa).ln_1p() + (xb * xb).ln_1p());
        // arg(1 - j xa) = -atan(xa), arg(1 + j xb) = atan(xb)
        let im = -n * (xb.atan() - xa.atan());
        Complex64::new(re, im)
    }

    pub fn upsilon(&self, nu: f64) -> Complex64 {
        self.ln_upsilon(nu).exp()
    }

    /// `Delta(nu) = (-nu^2 g_a + j nu g_b) / ((1 - j nu / v_a)(1 + j nu / v_b))`.
    pub fn delta(&self, nu: f64) -> Complex64 {
        let num = Complex64::new(-nu * nu * self.g_a, nu * self.g_b);
        let den = (Complex64::new(1.0, 0.0) - J * (nu / self.v_a)) * (Complex64::new(1.0, 0.0) + J * (nu / self.v_b));
        num / den
    }

    pub fn is_perfect_csi(&self) -> bool {
        self.v_a.is_infinite()
    }

    /// Natural frequency scales of the CF when the fading statistic has
    /// magnitude `weight`; used to place quadrature breakpoints.
    pub fn scales(&self, weight: f64) -> Vec<f64> {
        let mut s = Vec::with_capacity(4);
        if weight > 0.0 {
            if self.g_b != 0.0 {
                s.push(1.0 / (self.g_b.abs() * weight));
            }
            if self.g_a != 0.0 {
                s.push(1.0 / (self.g_a.abs() * weight).sqrt());
            }
        }
        for v in [self.v_a, self.v_b] {
            if v.is_finite() {
                s.push(v);
            }
        }
        s
    }
}

/// CF parameters of the two TOSD branches; `v_a`, `v_b` are shared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TosdCfParams {
    pub q: CfParams,
    pub t: CfParams,
}

impl TosdCfParams {
    /// `Upsilon(nu) Upsilon(-nu) = |Upsilon(nu)|^2`, as a real logarithm.
    pub fn ln_upsilon_pair(&self, nu: f64) -> f64 {
        2.0 * self.q.ln_upsilon(nu).re
    }

    pub fn scales(&self, weight: f64) -> Vec<f64> {
        let mut s = self.q.scales(weight);
        s.extend(self.t.scales(weight));
        s
    }
}

/// SSK conditional CF parameters for `cfg`.
pub fn ssk_cf_params(cfg: &LinkConfig) -> Result<CfParams> {
    cfg.validate()?;
    let g = cfg.snr_linear();
    let (v, k) = match cfg.pilot_energy() {
        Some(e) => {
            let k = 1.0 / e;
            (0.5 / (k * k + 2.0 * k).sqrt(), k)
        }
        None => (f64::INFINITY, 0.0),
    };
    Ok(CfParams {
        v_a: v,
        v_b: v,
        g_a: 2.0 * g * (1.0 + k),
        g_b: g,
        n_rx: cfg.n_rx,
    })
}

/// TOSD conditional CF parameters for the sent branch `q` and a competing
/// branch `t`.
pub fn tosd_cf_params(cfg: &LinkConfig) -> Result<TosdCfParams> {
    cfg.validate()?;
    let g = cfg.snr_linear();
    let (v_a, v_b, k) = match cfg.pilot_energy() {
        Some(e) => {
            let root = (0.25 + e).sqrt();
            (root + 0.5, root - 0.5, 1.0 / e)
        }
        None => (f64::INFINITY, f64::INFINITY, 0.0),
    };
    let q = CfParams {
        v_a,
        v_b,
        g_a: 0.5 * g * (1.0 + k),
        g_b: 0.5 * g,
        n_rx: cfg.n_rx,
    };
    let t = CfParams {
        g_a: 0.5 * g,
        g_b: -0.5 * g,
        ..q
    };
    Ok(TosdCfParams { q, t })
}

/// Tail probability `Pr{X < 0} = 1/2 - (1/pi) int_0^inf Im{Psi(nu)}/nu dnu`.
///
/// `im_cf` returns `Im Psi(nu)`. The half line is mapped to
/// `xi in (1e-12, pi/2)` by `nu = c tan xi`, with `c` and the initial
/// breakpoints derived from `scales` (characteristic frequencies of `Psi`;
/// pass an empty slice if unknown). The error target is
/// `max(abs_tol, rel_tol * p)` on the returned probability `p`.
pub fn gil_pelaez_halfline<F: Fn(f64) -> f64>(im_cf: F, scales: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut sc: Vec<f64> = scales.iter().copied().filter(|s| s.is_finite() && *s > 0.0).collect();
    if sc.is_empty() {
        sc.push(1.0);
    }
    let lo = sc.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sc.iter().copied().fold(0.0, f64::max);
    let c = (lo * hi).sqrt();

    const XI0: f64 = 1e-12;
    let mut pts = vec![XI0, FRAC_PI_2];
    let mut s = lo / 256.0;
    while s < hi * 256.0 {
        pts.push((s / c).atan());
        s *= 4.0;
    }
    pts.extend(sc.iter().map(|s| (s / c).atan()));
    pts.retain(|x| (XI0..=FRAC_PI_2).contains(x));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

    let integrand = |xi: f64| {
        let (sn, cs) = xi.sin_cos();
        im_cf(c * sn / cs) / (sn * cs)
    };
    let tol = |v: f64| PI * spec.abs_tol.max(spec.rel_tol * (0.5 - v / PI).abs());
    // The integrand has a finite limit at xi = 0; the skipped sliver
    // [0, XI0] contributes XI0 times that limit to first order.
    let head = XI0 * integrand(XI0);
    let integral = integrate_adaptive(integrand, &pts, tol, spec.max_subdivisions)?;
    let p = 0.5 - (integral.value + head) / PI;
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Fading-conditioned channel statistics entering a pairwise error event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaStats {
    /// SSK: `sum_r |alpha_q - alpha_t|^2`.
    Diff(f64),
    /// TOSD: `(sum_r |alpha_q|^2, sum_r |alpha_t|^2)`.
    Pair { gamma_q: f64, gamma_t: f64 },
}

/// SSK conditional CF at `nu`.
pub fn ssk_conditional_cf(p: &CfParams, gamma: f64, nu: f64) -> Complex64 {
    (p.ln_upsilon(nu) + p.delta(nu) * gamma).exp()
}

/// TOSD conditional CF at `nu`.
pub fn tosd_conditional_cf(p: &TosdCfParams, gamma_q: f64, gamma_t: f64, nu: f64) -> Complex64 {
    (p.ln_upsilon_pair(nu) + p.q.delta(nu) * gamma_q + p.t.delta(-nu) * gamma_t).exp()
}

/// Conditional pairwise error probability for fixed channel statistics.
pub fn pep_conditional(mode: Mode, cfg: &LinkConfig, stats: GammaStats, spec: &QuadratureSpec) -> Result<f64> {
    match (mode, stats) {
        (Mode::Ssk, GammaStats::Diff(gamma)) => {
            if !(gamma >= 0.0) {
                return Err(Error::NegativeGamma(gamma));
            }
            let p = ssk_cf_params(cfg)?;
            if gamma == 0.0 && p.is_perfect_csi() {
                return Ok(0.5);
            }
            gil_pelaez_halfline(|nu| ssk_conditional_cf(&p, gamma, nu).im, &p.scales(gamma), spec)
        }
        (Mode::Tosd, GammaStats::Pair { gamma_q, gamma_t }) => {
            for g in [gamma_q, gamma_t] {
                if !(g >= 0.0) {
                    return Err(Error::NegativeGamma(g));
                }
            }
            let p = tosd_cf_params(cfg)?;
            let w = gamma_q + gamma_t;
            gil_pelaez_halfline(|nu| tosd_conditional_cf(&p, gamma_q, gamma_t, nu).im, &p.scales(w), spec)
        }
        _ => Err(Error::Config(format!("statistics {stats:?} do not match mode {mode:?}"))),
    }
}
