//! Error-probability analysis and Monte Carlo simulation of space shift
//! keying (SSK) and time-orthogonal signal design SSK (TOSD-SSK) links over
//! Rayleigh fading with pilot-based channel estimation.
//!
//! * [`channel`]: link parameters, pilot estimation, fading draws.
//! * [`quadform`]: conditional characteristic functions and pairwise error
//!   probabilities by characteristic-function inversion.
//! * [`quadrature`]: Gauss-Kronrod integration used by the inversions.
//! * [`abep`]: union-bound ABEP, SNR thresholds, diversity slopes.
//! * [`sim`]: bit-level simulators for SSK, TOSD-SSK and the QAM and
//!   Alamouti baselines.
//! * [`pulse`]: Hermite pulses, the orthonormal filter bank, bandwidth metrics.
//! * [`runner`]: sweeps, threshold tables, bandwidth tables, self-checks.
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! | example | shows |
//! |---|---|
//! | `channel_estimation` | pilot estimates and their error variance |
//! | `conditional_pep` | conditional PEP against a direct simulation |
//! | `abep_curves` | analytic ABEP versus SNR |
//! | `snr_thresholds` | SNR needed for a target ABEP |
//! | `monte_carlo_ber` | simulated BER with standard errors |
//! | `baselines` | QAM and Alamouti thresholds by simulation |
//! | `pulse_bandwidth` | pulse bank and bandwidth metrics |
//! | `custom_fading_mgf` | PEP averaging with a user-supplied fading law |
//! | `sweep_config` | TOML-driven sweep to CSV |

pub mod abep;
pub mod channel;
pub mod error;
pub mod pulse;
pub mod quadform;
pub mod quadrature;
pub mod runner;
pub mod sim;
