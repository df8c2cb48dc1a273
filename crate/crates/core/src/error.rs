use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("transmit index {index} out of range for {n_tx} antennas")]
    TxIndex { index: usize, n_tx: usize },

    #[error("negative channel statistic {0}")]
    NegativeGamma(f64),

    #[error("quadrature did not converge: estimate {estimate:e}, residual {residual:e} after {subdivisions} subdivisions")]
    Quadrature {
        estimate: f64,
        residual: f64,
        subdivisions: usize,
    },

    #[error("inversion produced {0:e}, outside the unit interval")]
    OutOfRange(f64),

    #[error("target {target:e} not reached: curve spans [{low:e}, {high:e}] over [{snr_lo} dB, {snr_hi} dB]")]
    TargetUnreachable {
        target: f64,
        low: f64,
        high: f64,
        snr_lo: f64,
        snr_hi: f64,
    },

    #[error("slope fit needs at least 3 points in window, got {0}")]
    TooFewPoints(usize),

    #[error("Hermite order {0} outside 1..=5")]
    HermiteOrder(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
