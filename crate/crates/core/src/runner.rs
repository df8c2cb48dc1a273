//! Configuration-driven experiments: SNR sweeps, threshold and bandwidth
//! tables, waveform export and a quick self-check suite.
//!
//! Sweep results use one CSV layout with the columns
//! `scheme, n_tx_or_M, n_rx, n_pilots, r_pm, snr_db, abep_analytic, ber_mc,
//! mc_std_err, trials, flags`, preceded by `#` comment lines describing the
//! run. Flags are `;`-separated: `union_bound` (analytic value is an upper
//! bound), `upper_bound_only` (no Monte Carlo errors observed) and
//! `error:<message>` (the point failed).

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abep::{abep_iid_rayleigh, snr_threshold, BitMapping, Labeling, ThresholdSearch};
use crate::channel::{LinkConfig, Mode, Pilots};
use crate::error::{Error, Result};
use crate::pulse::{
    bpsdb, build_tosd_bank_nt4, fpcb, identity_error, reference_pulse, write_spectrum_csv, write_waveform_csv,
    Bandwidth, BandwidthOptions, Pulse, ReferenceKind,
};
use crate::quadform::{ssk_cf_params, ssk_conditional_cf, tosd_cf_params, tosd_conditional_cf};
use crate::quadrature::QuadratureSpec;
use crate::sim::{estimate_ber, BerEstimate, RngStreams, Scheme, SchemeConfig, Stopping};

/// Which estimators a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Analytic,
    #[serde(alias = "monte_carlo")]
    Mc,
    Both,
}

impl Method {
    pub fn analytic(self) -> bool {
        matches!(self, Method::Analytic | Method::Both)
    }

    pub fn mc(self) -> bool {
        matches!(self, Method::Mc | Method::Both)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::Mc => "mc",
            Method::Both => "both",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(Method::Analytic),
            "mc" | "monte_carlo" => Ok(Method::Mc),
            "both" => Ok(Method::Both),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// SNR grid in dB: an explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl SnrGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            SnrGrid::List(v) => v.clone(),
            SnrGrid::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                    return Err(Error::Config(format!("invalid SNR range {start}:{stop}:{step}")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() || v.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR grid must be a nonempty list of numbers".into()));
        }
        Ok(v)
    }
}

impl FromStr for SnrGrid {
    type Err = Error;

    /// `start:stop:step` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid SNR grid `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [a, b, c] => SnrGrid::Range {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            [one] => SnrGrid::List(one.split(',').map(num).collect::<Result<_>>()?),
            _ => return Err(bad()),
        };
        grid.values()?;
        Ok(grid)
    }
}

/// Declarative description of a sweep, usually loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Free text copied into the CSV header.
    pub title: Option<String>,
    pub schemes: Vec<Scheme>,
    /// `N_t` for space modulation, constellation size `M` for the baselines.
    pub sizes: Vec<usize>,
    pub n_rx: Vec<usize>,
    pub n_pilots: Vec<Pilots>,
    pub r_pm: f64,
    pub omega0: f64,
    pub snr_db: SnrGrid,
    pub method: Method,
    pub labeling: Labeling,
    /// Required whenever Monte Carlo runs.
    pub seed: Option<u64>,
    pub stopping: Stopping,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            title: None,
            schemes: vec![Scheme::Ssk],
            sizes: vec![2],
            n_rx: vec![1],
            n_pilots: vec![Pilots::Infinite],
            r_pm: 1.0,
            omega0: 1.0,
            snr_db: SnrGrid::Range {
                start: 0.0,
                stop: 30.0,
                step: 5.0,
            },
            method: Method::Analytic,
            labeling: Labeling::Natural,
            seed: None,
            stopping: Stopping::default(),
            out: None,
        }
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub scheme: Scheme,
    pub size: usize,
    pub n_rx: usize,
    pub pilots: Pilots,
    pub snr_db: f64,
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() || self.sizes.is_empty() || self.n_rx.is_empty() || self.n_pilots.is_empty() {
            return Err(Error::Config("schemes, sizes, n_rx and n_pilots must be nonempty".into()));
        }
        let snrs = self.snr_db.values()?;
        if self.method.mc() && self.seed.is_none() {
            return Err(Error::Config("a seed is required for Monte Carlo runs".into()));
        }
        if self.stopping.min_errors == 0 || self.stopping.max_trials == 0 {
            return Err(Error::Config("stopping bounds must be positive".into()));
        }
        for &scheme in &self.schemes {
            if self.method == Method::Analytic && !scheme.is_space_modulation() {
                return Err(Error::Config(format!("{scheme} has no analytic model; use method = \"mc\"")));
            }
            for &size in &self.sizes {
                for &n_rx in &self.n_rx {
                    for &pilots in &self.n_pilots {
                        self.scheme_config(&GridPoint {
                            scheme,
                            size,
                            n_rx,
                            pilots,
                            snr_db: snrs[0],
                        })
                        .validate()?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scheme_config(&self, p: &GridPoint) -> SchemeConfig {
        let link = LinkConfig::new(p.size, p.n_rx, p.snr_db)
            .with_pilots(p.pilots)
            .with_pilot_ratio(self.r_pm)
            .with_omega0(self.omega0);
        let cfg = match p.scheme {
            Scheme::Ssk => SchemeConfig::ssk(link),
            Scheme::TosdSsk => SchemeConfig::tosd(link),
            Scheme::QamSiso => SchemeConfig::qam_siso(link, p.size),
            Scheme::AlamoutiQam => SchemeConfig::alamouti(link, p.size),
        };
        cfg.with_labeling(self.labeling)
    }

    /// Curves in output order; each is the list of its SNR points.
    pub fn curves(&self) -> Result<Vec<Vec<GridPoint>>> {
        let snrs = self.snr_db.values()?;
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &size in &self.sizes {
                for &n_rx in &self.n_rx {
                    for &pilots in &self.n_pilots {
                        out.push(
                            snrs.iter()
                                .map(|&snr_db| GridPoint {
                                    scheme,
                                    size,
                                    n_rx,
                                    pilots,
                                    snr_db,
                                })
                                .collect(),
                        );
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    #[serde(rename = "n_tx_or_M")]
    pub n_tx_or_m: usize,
    pub n_rx: usize,
    pub n_pilots: Pilots,
    pub r_pm: f64,
    pub snr_db: f64,
    pub abep_analytic: Option<f64>,
    pub ber_mc: Option<f64>,
    pub mc_std_err: Option<f64>,
    pub trials: u64,
    pub flags: String,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.flags.split(';').any(|f| f.starts_with("error:"))
    }
}

fn error_flag(e: &Error) -> String {
    format!("error:{}", e.to_string().replace(';', ","))
}

/// FNV-1a over the identifying fields, folded to 32 bits: the Monte Carlo
/// stream of a point depends only on the seed and the point itself.
fn domain_of(parts: &[u64]) -> u32 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    (h ^ (h >> 32)) as u32
}

fn scheme_code(s: Scheme) -> u64 {
    Scheme::ALL.iter().position(|&x| x == s).unwrap_or(0) as u64
}

fn pilot_code(p: Pilots) -> u64 {
    match p {
        Pilots::Finite(n) => n as u64,
        Pilots::Infinite => u64::MAX,
    }
}

fn point_domain(p: &GridPoint, r_pm: f64) -> u32 {
    domain_of(&[
        scheme_code(p.scheme),
        p.size as u64,
        p.n_rx as u64,
        pilot_code(p.pilots),
        p.snr_db.to_bits(),
        r_pm.to_bits(),
    ])
}

/// Evaluate a single grid point; failures are recorded in the row's flags.
pub fn evaluate_point(spec: &ExperimentSpec, p: &GridPoint, quad: &QuadratureSpec) -> ResultRow {
    let cfg = spec.scheme_config(p);
    let mut row = ResultRow {
        scheme: p.scheme,
        n_tx_or_m: p.size,
        n_rx: p.n_rx,
        n_pilots: p.pilots,
        r_pm: spec.r_pm,
        snr_db: p.snr_db,
        abep_analytic: None,
        ber_mc: None,
        mc_std_err: None,
        trials: 0,
        flags: String::new(),
    };
    let mut flags = Vec::new();
    if spec.method.analytic() {
        if let Some(mode) = p.scheme.mode() {
            match abep_iid_rayleigh(mode, &cfg.link, quad) {
                Ok(v) => {
                    row.abep_analytic = Some(v);
                    if cfg.link.n_tx > 2 {
                        flags.push("union_bound".to_string());
                    }
                }
                Err(e) => flags.push(error_flag(&e)),
            }
        }
    }
    if spec.method.mc() {
        let streams = RngStreams::new(spec.seed.unwrap_or(0), point_domain(p, spec.r_pm));
        match estimate_ber(&cfg, &spec.stopping, streams) {
            Ok(b) => {
                row.ber_mc = Some(b.ber);
                row.mc_std_err = Some(b.std_err);
                row.trials = b.trials;
                if b.upper_bound_only {
                    flags.push("upper_bound_only".into());
                }
            }
            Err(e) => flags.push(error_flag(&e)),
        }
    }
    row.flags = flags.join(";");
    row
}

/// Rows of a completed sweep and the number of failed points.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: usize,
}

fn header_lines(spec: &ExperimentSpec) -> Vec<String> {
    let mut v = Vec::new();
    if let Some(t) = &spec.title {
        v.push(format!("# {}", t.replace('\n', " ")));
    }
    v.push("# units: snr_db in dB (E_m/N_0); abep_analytic, ber_mc, mc_std_err are bit error probabilities; trials counts Monte Carlo blocks".into());
    let seed = spec.seed.map_or("none".to_string(), |s| s.to_string());
    v.push(format!(
        "# method: {}; seed: {seed}; min_errors: {}; max_trials: {}",
        spec.method, spec.stopping.min_errors, spec.stopping.max_trials
    ));
    v
}

/// Run the sweep, writing the CSV to `out` one curve at a time. Curves run
/// in order; the SNR points of a curve run in parallel.
pub fn run_sweep_to<W: Write>(spec: &ExperimentSpec, mut out: W) -> Result<SweepOutcome> {
    spec.validate()?;
    let quad = QuadratureSpec::default();
    for line in header_lines(spec) {
        writeln!(out, "{line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let mut rows = Vec::new();
    for curve in spec.curves()? {
        let part: Vec<ResultRow> = curve.par_iter().map(|p| evaluate_point(spec, p, &quad)).collect();
        for r in &part {
            w.serialize(r)?;
        }
        w.flush()?;
        rows.extend(part);
    }
    let failures = rows.iter().filter(|r| r.failed()).count();
    Ok(SweepOutcome { rows, failures })
}

/// Run the sweep in memory.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepOutcome> {
    run_sweep_to(spec, std::io::sink())
}

/// Parse sweep CSV output, skipping `#` comment lines.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Write rows with the standard header and no comment lines.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Threshold search by simulation for schemes without a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McThresholdOptions {
    pub seed: u64,
    /// Stopping rule for the coarse scan.
    pub stopping: Stopping,
    /// Stopping rule for the refinement runs.
    pub refine_stopping: Stopping,
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    pub refinements: usize,
}

impl Default for McThresholdOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            stopping: Stopping::default(),
            refine_stopping: Stopping {
                min_errors: 1000,
                ..Stopping::default()
            },
            start_db: 0.0,
            stop_db: 60.0,
            step_db: 1.0,
            refinements: 3,
        }
    }
}

fn log_ber(b: &BerEstimate) -> f64 {
    // zero-error points sit at half a bit error
    b.ber.max(0.5 / b.bits.max(1) as f64).ln()
}

fn interpolate_crossing(points: &[(f64, BerEstimate)], target: f64) -> Option<f64> {
    let lo = points.iter().rposition(|(_, b)| b.ber > target)?;
    let (s1, b1) = points.get(lo)?;
    let (s2, b2) = points.get(lo + 1)?;
    let (l1, l2, lt) = (log_ber(b1), log_ber(b2), target.ln());
    if l1 <= l2 {
        return Some(0.5 * (s1 + s2));
    }
    Some(s1 + (l1 - lt) / (l1 - l2) * (s2 - s1))
}

/// Weighted least-squares line through `ln(ber)` of the points within
/// `half_width` dB of `center` (weights are error counts, the inverse
/// variance of `ln(ber)`), solved for the target crossing.
fn fit_crossing(points: &[(f64, BerEstimate)], target: f64, center: f64, half_width: f64) -> Option<f64> {
    let sel: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|(s, b)| (s - center).abs() <= half_width && b.bit_errors > 0)
        .map(|(s, b)| (*s, b.ber.ln(), b.bit_errors as f64))
        .collect();
    if sel.len() < 2 {
        return None;
    }
    let w: f64 = sel.iter().map(|p| p.2).sum();
    let mx = sel.iter().map(|p| p.2 * p.0).sum::<f64>() / w;
    let my = sel.iter().map(|p| p.2 * p.1).sum::<f64>() / w;
    let sxx: f64 = sel.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = sel.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    let s = mx + (target.ln() - my) / slope;
    (s.is_finite() && (s - center).abs() <= 2.0 * half_width).then_some(s)
}

/// SNR (dB) at which the simulated BER of `cfg` reaches `target`.
///
/// A coarse scan stops at the first point at or below `target`; log-linear
/// interpolation between the bracketing points gives a first estimate.
/// Each refinement runs fresh trials at the current estimate and refits a
/// weighted log-linear model to the points nearby, so a single noisy coarse
/// point cannot pin the answer.
pub fn mc_threshold(cfg: &SchemeConfig, target: f64, opts: &McThresholdOptions, domain: u32) -> Result<f64> {
    cfg.validate()?;
    if !(target > 0.0 && target < 1.0) || !(opts.step_db > 0.0) {
        return Err(Error::Config("invalid threshold target or step".into()));
    }
    let mut runs = 0u64;
    let mut eval = |snr: f64, stopping: &Stopping| {
        runs += 1;
        let mut c = cfg.clone();
        c.link = c.link.with_snr_db(snr);
        estimate_ber(&c, stopping, RngStreams::new(opts.seed, domain_of(&[domain as u64, runs])))
    };
    let mut points: Vec<(f64, BerEstimate)> = Vec::new();
    let mut s = opts.start_db;
    loop {
        let b = eval(s, &opts.stopping)?;
        let below = b.ber <= target;
        points.push((s, b));
        if below {
            break;
        }
        s += opts.step_db;
        if s > opts.stop_db + 1e-9 {
            let last = points.last().map_or(1.0, |p| p.1.ber);
            return Err(Error::TargetUnreachable {
                target,
                low: last,
                high: points[0].1.ber,
                snr_lo: opts.start_db,
                snr_hi: opts.stop_db,
            });
        }
    }
    if points.len() == 1 {
        let b = points[0].1.ber;
        return Err(Error::TargetUnreachable {
            target,
            low: b,
            high: b,
            snr_lo: opts.start_db,
            snr_hi: opts.stop_db,
        });
    }
    let half_width = 1.5 * opts.step_db;
    let mut est = interpolate_crossing(&points, target).expect("bracket exists");
    for _ in 0..opts.refinements {
        let b = eval(est, &opts.refine_stopping)?;
        let at = points.partition_point(|p| p.0 < est);
        points.insert(at, (est, b));
        est = fit_crossing(&points, target, est, half_width)
            .or_else(|| interpolate_crossing(&points, target))
            .expect("bracket exists");
    }
    Ok(est)
}

/// Settings for [`table2_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct Table2Options {
    pub schemes: Vec<Scheme>,
    /// Bits per channel use; the scheme size is `2^bpcu`.
    pub rates: Vec<u32>,
    pub pilots: Vec<Pilots>,
    pub r_pm: f64,
    pub omega0: f64,
    pub search: ThresholdSearch,
    pub mc: McThresholdOptions,
    pub quadrature: QuadratureSpec,
}

impl Default for Table2Options {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            rates: vec![1, 2, 3, 4],
            pilots: vec![Pilots::Finite(1), Pilots::Finite(3), Pilots::Finite(10), Pilots::Infinite],
            r_pm: 1.0,
            omega0: 1.0,
            search: ThresholdSearch::default(),
            mc: McThresholdOptions::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Receive-antenna counts and BER targets reported per scheme. Single
/// receive antenna rows of SSK and QAM use `1e-2`.
pub fn table2_layout(scheme: Scheme) -> Vec<(usize, f64)> {
    match scheme {
        Scheme::Ssk | Scheme::QamSiso => vec![(1, 1e-2), (2, 1e-4), (4, 1e-4)],
        Scheme::TosdSsk | Scheme::AlamoutiQam => vec![(1, 1e-4), (2, 1e-4)],
    }
}

/// One threshold cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Cell {
    pub scheme: Scheme,
    pub bpcu: u32,
    #[serde(rename = "n_tx_or_M")]
    pub size: usize,
    pub n_rx: usize,
    pub n_pilots: Pilots,
    pub target: f64,
    pub snr_db: Option<f64>,
    pub method: Method,
    pub note: String,
}

/// Required-SNR table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    pub pilots: Vec<Pilots>,
    pub cells: Vec<Table2Cell>,
}

/// Link and scheme configuration of one table cell.
pub fn table2_config(scheme: Scheme, bpcu: u32, n_rx: usize, pilots: Pilots, opts: &Table2Options) -> SchemeConfig {
    let spec = ExperimentSpec {
        r_pm: opts.r_pm,
        omega0: opts.omega0,
        ..ExperimentSpec::default()
    };
    spec.scheme_config(&GridPoint {
        scheme,
        size: 1 << bpcu,
        n_rx,
        pilots,
        snr_db: 0.0,
    })
}

/// Threshold of one cell: bisection on the analytic ABEP for space
/// modulation, simulation for the baselines.
pub fn table2_cell(scheme: Scheme, bpcu: u32, n_rx: usize, pilots: Pilots, target: f64, opts: &Table2Options) -> Table2Cell {
    let cfg = table2_config(scheme, bpcu, n_rx, pilots, opts);
    let (method, res) = match scheme.mode() {
        Some(mode) => (
            Method::Analytic,
            snr_threshold(
                |s| abep_iid_rayleigh(mode, &cfg.link.with_snr_db(s), &opts.quadrature),
                target,
                &opts.search,
            ),
        ),
        None => {
            let domain = domain_of(&[scheme_code(scheme), bpcu as u64, n_rx as u64, pilot_code(pilots)]);
            (Method::Mc, mc_threshold(&cfg, target, &opts.mc, domain))
        }
    };
    let (snr_db, note) = match res {
        Ok(v) => (Some(v), String::new()),
        Err(e) => (None, e.to_string()),
    };
    Table2Cell {
        scheme,
        bpcu,
        size: 1 << bpcu,
        n_rx,
        n_pilots: pilots,
        target,
        snr_db,
        method,
        note,
    }
}

/// Required SNR for every (scheme, rate, pilots, receive antennas) cell.
pub fn table2_report(opts: &Table2Options) -> Result<Table2> {
    if opts.schemes.is_empty() || opts.rates.is_empty() || opts.pilots.is_empty() {
        return Err(Error::Config("table needs schemes, rates and pilot counts".into()));
    }
    if let Some(r) = opts.rates.iter().find(|&&r| !(1..=16).contains(&r)) {
        return Err(Error::Config(format!("rate {r} bpcu outside 1..=16")));
    }
    let mut jobs = Vec::new();
    for &scheme in &opts.schemes {
        for &bpcu in &opts.rates {
            for &pilots in &opts.pilots {
                for (n_rx, target) in table2_layout(scheme) {
                    jobs.push((scheme, bpcu, n_rx, pilots, target));
                }
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(s, b, n, p, t)| table2_cell(s, b, n, p, t, opts))
        .collect();
    Ok(Table2 {
        pilots: opts.pilots.clone(),
        cells,
    })
}

fn pilot_heading(p: Pilots) -> String {
    match p {
        Pilots::Finite(n) => format!("N_p = {n}"),
        Pilots::Infinite => "P-CSI".into(),
    }
}

impl Table2 {
    pub fn cell(&self, scheme: Scheme, bpcu: u32, n_rx: usize, pilots: Pilots) -> Option<&Table2Cell> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.bpcu == bpcu && c.n_rx == n_rx && c.n_pilots == pilots)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for Table2 {
    /// One block per scheme, one row per rate; each entry lists the
    /// thresholds for the scheme's receive-antenna counts separated by `/`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut schemes: Vec<Scheme> = Vec::new();
        let mut rates: Vec<u32> = Vec::new();
        for c in &self.cells {
            if !schemes.contains(&c.scheme) {
                schemes.push(c.scheme);
            }
            if !rates.contains(&c.bpcu) {
                rates.push(c.bpcu);
            }
        }
        for s in schemes {
            let layout = table2_layout(s);
            let nr: Vec<String> = layout.iter().map(|(n, t)| format!("N_r={n} @ {t:e}")).collect();
            writeln!(f, "{s} [{}]", nr.join(" / "))?;
            let mut head = format!("{:>8}", "rate");
            for &p in &self.pilots {
                write!(head, " | {:^20}", pilot_heading(p))?;
            }
            writeln!(f, "{head}")?;
            for &b in &rates {
                let mut line = format!("{:>8}", format!("{b} bpcu"));
                for &p in &self.pilots {
                    let vals: Vec<String> = layout
                        .iter()
                        .map(|(n, _)| match self.cell(s, b, *n, p).and_then(|c| c.snr_db) {
                            Some(v) => format!("{v:.1}"),
                            None => "n/a".into(),
                        })
                        .collect();
                    write!(line, " | {:^20}", vals.join(" / "))?;
                }
                writeln!(f, "{line}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Containment fractions reported in the bandwidth table.
pub const FPCB_FRACTIONS: [f64; 4] = [0.99, 0.99995, 0.999999, 0.9999999];
/// Decimal-log thresholds reported in the bandwidth table.
pub const BPSDB_THRESHOLDS: [f64; 5] = [3.0, 5.0, 6.0, 7.0, 10.0];

/// One metric row of the bandwidth table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub metric: String,
    pub values: Vec<Bandwidth>,
}

/// Bandwidths of the reference pulses and the first orthogonal pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub columns: Vec<String>,
    pub rows: Vec<Table1Row>,
}

/// The three reference pulses of duration `t_ref` followed by the bank's
/// first pulse with Hermite scale `t0`.
pub fn table1_pulses(t0: f64, t_ref: f64) -> Result<Vec<Pulse>> {
    let mut v = Vec::new();
    for k in [ReferenceKind::Rectangular, ReferenceKind::HalfSine, ReferenceKind::RaisedCosine] {
        v.push(reference_pulse(k, t_ref)?);
    }
    v.push(build_tosd_bank_nt4(t0)?.pulses.swap_remove(0));
    Ok(v)
}

pub fn table1_report(t0: f64, t_ref: f64, opts: &BandwidthOptions) -> Result<Table1> {
    let pulses = table1_pulses(t0, t_ref)?;
    let mut rows = Vec::new();
    for x in FPCB_FRACTIONS {
        rows.push(Table1Row {
            metric: format!("FPCB {}%", (x * 1e9_f64).round() / 1e7),
            values: pulses.iter().map(|p| fpcb(p, x, opts)).collect::<Result<_>>()?,
        });
    }
    for th in BPSDB_THRESHOLDS {
        rows.push(Table1Row {
            metric: format!("BPSDB {th}dB"),
            values: pulses.iter().map(|p| bpsdb(p, th, opts)).collect::<Result<_>>()?,
        });
    }
    Ok(Table1 {
        columns: pulses.into_iter().map(|p| p.label).collect(),
        rows,
    })
}

impl Table1 {
    /// CSV with bandwidths in kHz; capped cells are written as `>30`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut head = vec!["metric".to_string()];
        head.extend(self.columns.iter().map(|c| format!("{c}_khz")));
        w.write_record(&head)?;
        for r in &self.rows {
            let mut rec = vec![r.metric.clone()];
            rec.extend(r.values.iter().map(|b| b.to_string().replace(' ', "")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for Table1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<18}", "bandwidth (kHz)")?;
        for c in &self.columns {
            write!(f, " {c:>14}")?;
        }
        writeln!(f)?;
        for r in &self.rows {
            write!(f, "{:<18}", r.metric)?;
            for v in &r.values {
                write!(f, " {:>14}", v.to_string())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Write time and spectrum CSVs for the reference pulses and the whole
/// four-pulse bank into `dir`; returns the files written.
pub fn export_pulses(dir: &Path, t0: f64, t_ref: f64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut pulses: Vec<(Pulse, f64)> = Vec::new();
    for k in [ReferenceKind::Rectangular, ReferenceKind::HalfSine, ReferenceKind::RaisedCosine] {
        pulses.push((reference_pulse(k, t_ref)?, t_ref));
    }
    for p in build_tosd_bank_nt4(t0)?.pulses {
        pulses.push((p, 5.0 * t0));
    }
    let mut files = Vec::new();
    for (p, half) in pulses {
        let tf = dir.join(format!("{}_time.csv", p.label));
        write_waveform_csv(&p, -half, half, 1001, fs::File::create(&tf)?)?;
        let sf = dir.join(format!("{}_psd.csv", p.label));
        write_spectrum_csv(&p, 30e3, 3001, fs::File::create(&sf)?)?;
        files.push(tf);
        files.push(sf);
    }
    Ok(files)
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn sweep_bytes(spec: &ExperimentSpec) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    run_sweep_to(spec, &mut buf)?;
    Ok(buf)
}

/// Fast invariant checks covering the analytic engine, the simulator and
/// the filter bank.
pub fn validate_suite(seed: u64) -> Result<Vec<Check>> {
    let quad = QuadratureSpec::default();
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for (nr, p) in [(1, Pilots::Finite(1)), (2, Pilots::Finite(10)), (4, Pilots::Infinite)] {
        let link = LinkConfig::new(2, nr, 12.0).with_pilots(p);
        let s = ssk_cf_params(&link)?;
        let t = tosd_cf_params(&link)?;
        worst = worst.max((ssk_conditional_cf(&s, 1.7, 0.0) - 1.0).norm());
        worst = worst.max((tosd_conditional_cf(&t, 0.4, 2.2, 0.0) - 1.0).norm());
    }
    out.push(check("cf_normalization", worst < 1e-14, format!("max |Psi(0) - 1| = {worst:.1e}")));

    let ok = [2usize, 4, 8, 16].iter().all(|&n| {
        let m = BitMapping::natural(n).expect("power of two");
        2 * m.hamming_sum() == (n * n) as u64 * m.bits() as u64
    });
    out.push(check("hamming_sum_identity", ok, "N_t in {2, 4, 8, 16}".into()));

    let mut rel: f64 = 0.0;
    for mode in [Mode::Ssk, Mode::Tosd] {
        let base = LinkConfig::new(2, 2, 10.0);
        let a = abep_iid_rayleigh(mode, &base.with_pilots(Pilots::Finite(1_000_000)), &quad)?;
        let b = abep_iid_rayleigh(mode, &base, &quad)?;
        rel = rel.max((a - b).abs() / b);
    }
    out.push(check("perfect_csi_limit", rel < 1e-3, format!("relative gap {rel:.1e} at N_p r_pm = 1e6")));

    let bank = build_tosd_bank_nt4(1e-4)?;
    let ga = identity_error(&bank.gram_algebraic());
    let gq = identity_error(&bank.gram_quadrature(5e-4)?);
    out.push(check(
        "filter_bank_gram",
        ga < 1e-12 && gq < 1e-3,
        format!("algebraic {ga:.1e}, quadrature {gq:.1e}"),
    ));

    for (scheme, mode) in [(Scheme::Ssk, Mode::Ssk), (Scheme::TosdSsk, Mode::Tosd)] {
        let link = LinkConfig::new(2, 1, 10.0).with_pilots(Pilots::Finite(1));
        let cfg = match scheme {
            Scheme::Ssk => SchemeConfig::ssk(link),
            _ => SchemeConfig::tosd(link),
        };
        let b = estimate_ber(&cfg, &Stopping::fixed(400_000), RngStreams::new(seed, 7))?;
        let a = abep_iid_rayleigh(mode, &link, &quad)?;
        let z = (b.ber - a) / b.std_err;
        out.push(check(
            if mode == Mode::Ssk { "ssk_analytic_vs_mc" } else { "tosd_analytic_vs_mc" },
            z.abs() < 4.0,
            format!("analytic {a:.4e}, simulated {:.4e}, z = {z:.2}", b.ber),
        ));
    }

    let spec = ExperimentSpec {
        schemes: vec![Scheme::Ssk, Scheme::QamSiso],
        sizes: vec![2, 4],
        n_pilots: vec![Pilots::Finite(2)],
        snr_db: SnrGrid::List(vec![0.0, 8.0]),
        method: Method::Both,
        seed: Some(seed),
        stopping: Stopping {
            min_errors: 50,
            max_trials: 50_000,
        },
        ..ExperimentSpec::default()
    };
    let first = sweep_bytes(&spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let second = pool.install(|| sweep_bytes(&spec))?;
    out.push(check(
        "deterministic_replay",
        first == second,
        format!("{} bytes, default pool vs one thread", first.len()),
    ));

    let hs = reference_pulse(ReferenceKind::HalfSine, 1e-3)?;
    let b = fpcb(&hs, 0.99, &BandwidthOptions::default())?;
    out.push(check(
        "half_sine_containment",
        (b.khz() - 1.18).abs() < 0.05,
        format!("99% containment {b} kHz"),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grid_parsing() {
        assert_eq!("0:30:5".parse::<SnrGrid>().unwrap().values().unwrap().len(), 7);
        assert_eq!("1, 2.5,4".parse::<SnrGrid>().unwrap().values().unwrap(), vec![1.0, 2.5, 4.0]);
        assert!("5:0:1".parse::<SnrGrid>().is_err());
        assert!("0:1".parse::<SnrGrid>().is_err());
        assert!("x".parse::<SnrGrid>().is_err());
        let g = "0:1:0.1".parse::<SnrGrid>().unwrap().values().unwrap();
        assert_eq!(g.len(), 11);
    }

    #[test]
    fn spec_from_toml() {
        let s = ExperimentSpec::from_toml_str(
            r#"
            schemes = ["ssk", "tosd"]
            sizes = [2]
            n_rx = [1, 2]
            n_pilots = [1, 3, "inf"]
            snr_db = { start = 0, stop = 20, step = 10 }
            method = "both"
            seed = 9
            [stopping]
            min_errors = 10
            "#,
        )
        .unwrap();
        assert_eq!(s.schemes, vec![Scheme::Ssk, Scheme::TosdSsk]);
        assert_eq!(s.n_pilots[2], Pilots::Infinite);
        assert_eq!(s.stopping.max_trials, Stopping::default().max_trials);
        s.validate().unwrap();
        assert_eq!(s.curves().unwrap().len(), 12);
        assert!(ExperimentSpec::from_toml_str("bogus = 1").is_err());
        let list = ExperimentSpec::from_toml_str("snr_db = [0, 5]").unwrap();
        assert_eq!(list.snr_db, SnrGrid::List(vec![0.0, 5.0]));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mc_without_seed = ExperimentSpec {
            method: Method::Mc,
            ..ExperimentSpec::default()
        };
        assert!(mc_without_seed.validate().is_err());
        let analytic_baseline = ExperimentSpec {
            schemes: vec![Scheme::QamSiso],
            ..ExperimentSpec::default()
        };
        assert!(analytic_baseline.validate().is_err());
        let odd = ExperimentSpec {
            sizes: vec![3],
            ..ExperimentSpec::default()
        };
        assert!(odd.validate().is_err());
        let empty = ExperimentSpec {
            n_rx: vec![],
            ..ExperimentSpec::default()
        };
        assert!(matches!(run_sweep(&empty), Err(Error::Config(_))));
    }

    #[test]
    fn analytic_sweep_is_monotone() {
        let out = run_sweep(&ExperimentSpec::default()).unwrap();
        assert_eq!(out.rows.len(), 7);
        assert_eq!(out.failures, 0);
        let v: Vec<f64> = out.rows.iter().map(|r| r.abep_analytic.unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(out.rows.iter().all(|r| r.ber_mc.is_none() && r.trials == 0));
    }

    #[test]
    fn csv_round_trip_and_layout() {
        let spec = ExperimentSpec {
            title: Some("round trip".into()),
            schemes: vec![Scheme::Ssk, Scheme::AlamoutiQam],
            sizes: vec![4],
            n_pilots: vec![Pilots::Finite(1), Pilots::Infinite],
            snr_db: SnrGrid::List(vec![3.0, 40.0]),
            method: Method::Both,
            seed: Some(3),
            stopping: Stopping {
                min_errors: 20,
                max_trials: 8192,
            },
            ..ExperimentSpec::default()
        };
        let mut buf = Vec::new();
        let out = run_sweep_to(&spec, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            header,
            "scheme,n_tx_or_M,n_rx,n_pilots,r_pm,snr_db,abep_analytic,ber_mc,mc_std_err,trials,flags"
        );
        assert!(text.starts_with("# round trip\n"));
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, out.rows);
        // union bound flag on N_t = 4, no analytic value for the baseline
        assert!(back[0].flags.contains("union_bound"));
        assert!(back.iter().filter(|r| r.scheme == Scheme::AlamoutiQam).all(|r| r.abep_analytic.is_none()));
        assert!(back.iter().any(|r| r.flags.contains("upper_bound_only")));
    }

    #[test]
    fn failures_are_recorded_in_row() {
        let spec = ExperimentSpec {
            snr_db: SnrGrid::List(vec![10.0, f64::INFINITY]),
            ..ExperimentSpec::default()
        };
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(!out.rows[0].failed());
        assert_eq!(out.failures, 1);
        assert!(out.rows[1].failed());
    }

    #[test]
    fn mc_columns_depend_only_on_seed_and_point() {
        let base = ExperimentSpec {
            method: Method::Mc,
            seed: Some(5),
            snr_db: SnrGrid::List(vec![5.0]),
            stopping: Stopping::fixed(10_000),
            ..ExperimentSpec::default()
        };
        let wider = ExperimentSpec {
            snr_db: SnrGrid::List(vec![0.0, 5.0]),
            ..base.clone()
        };
        let a = run_sweep(&base).unwrap().rows;
        let b = run_sweep(&wider).unwrap().rows;
        assert_eq!(a[0], b[1]);
        let other = ExperimentSpec {
            seed: Some(6),
            ..base.clone()
        };
        assert_ne!(run_sweep(&other).unwrap().rows[0].ber_mc, a[0].ber_mc);
    }

    #[test]
    fn crossing_interpolation() {
        let b = |ber: f64| BerEstimate::from_counts(1_000_000, 1_000_000, (ber * 1e6) as u64);
        let pts = vec![(0.0, b(1e-2)), (10.0, b(1e-4)), (20.0, b(1e-6))];
        let s = interpolate_crossing(&pts, 1e-3).unwrap();
        assert!((s - 5.0).abs() < 1e-9);
        assert!(interpolate_crossing(&pts[2..], 1e-3).is_none());
        let s = fit_crossing(&pts, 1e-3, 8.0, 15.0).unwrap();
        assert!((s - 5.0).abs() < 1e-6);
        assert!(fit_crossing(&pts, 1e-3, 30.0, 1.0).is_none());
    }

    #[test]
    fn mc_threshold_bpsk() {
        // BPSK over Rayleigh with perfect CSI: BER = (1 - sqrt(x / (1 + x))) / 2, x = snr / 2
        let link = LinkConfig::new(1, 1, 0.0);
        let cfg = SchemeConfig::qam_siso(link, 2);
        let s = mc_threshold(&cfg, 1e-2, &McThresholdOptions::default(), 11).unwrap();
        let x = 1.0_f64 / (4.0 * 1e-2 * (1.0 - 1e-2)) - 1.0;
        let exact = 10.0 * (2.0 * x).log10();
        assert!((s - exact).abs() < 0.25, "{s} vs {exact}");
        let opts = McThresholdOptions {
            stop_db: 3.0,
            ..McThresholdOptions::default()
        };
        assert!(matches!(mc_threshold(&cfg, 1e-4, &opts, 1), Err(Error::TargetUnreachable { .. })));
    }

    #[test]
    fn table2_rendering() {
        let opts = Table2Options {
            schemes: vec![Scheme::Ssk, Scheme::TosdSsk],
            rates: vec![1],
            pilots: vec![Pilots::Infinite],
            ..Table2Options::default()
        };
        let t = table2_report(&opts).unwrap();
        assert_eq!(t.cells.len(), 5);
        let s = t.to_string();
        assert!(s.contains("P-CSI") && s.contains("1 bpcu"));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scheme,bpcu,n_tx_or_M,n_rx,n_pilots,target,snr_db,method,note\n"));
        assert!(table2_report(&Table2Options {
            rates: vec![0],
            ..opts
        })
        .is_err());
    }

    #[test]
    fn table1_layout_and_export() {
        let t = table1_report(1e-4, 1e-3, &BandwidthOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.columns.len(), 4);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(">30"));
        let dir = tempfile::tempdir().unwrap();
        let files = export_pulses(dir.path(), 1e-4, 1e-3).unwrap();
        assert_eq!(files.len(), 14);
        assert!(files.iter().all(|f| f.exists()));
    }
}
