//! Online ensembling of sequential portfolio strategies.
//!
//! The crate builds wealth-mixture ensembles ("universally combinatorial"
//! strategies) over a pool of component trading strategies: each period the
//! ensemble holds a wealth-weighted average of all constant convex
//! combinations of the components on a simplex grid. The resulting wealth
//! satisfies an exact mixture identity that turns into a verifiable regret
//! bound against the best constant combination in hindsight.
//!
//! Module map:
//! - [`market_data`]: price/return series ingestion and synthetic generators
//! - [`strategies`]: component strategies (rolling mean-variance, constants)
//! - [`simplex_grid`]: deterministic enumeration of simplex grids
//! - [`ensemble`]: wealth ledgers, mixture portfolios, the period engine
//! - [`analysis`]: baselines, benchmarks, regret bounds, metrics
//! - [`cli`]: configuration-driven experiment runner and file outputs

pub mod analysis;
pub mod cli;
pub mod ensemble;
pub mod market_data;
pub mod numeric;
pub mod simplex_grid;
pub mod strategies;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// Malformed or inconsistent input data at a specific row.
    #[error("ingestion error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    /// Not enough observations for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Rolling-window estimation asked for history that does not exist.
    #[error("insufficient history: period {period} needs {window} prior observations")]
    InsufficientHistory { period: usize, window: usize },

    /// Invalid configuration value or combination.
    #[error("config error: {0}")]
    Config(String),

    /// Parameter outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Estimator output violates its contract (asymmetry, non-PSD).
    #[error("estimator error: {0}")]
    Estimator(String),

    /// Grid too large to enumerate.
    #[error("capacity error: grid has {count} points, cap is {cap}")]
    Capacity { count: u128, cap: u64 },

    /// Invalid runtime data (non-positive returns, dimension mismatch).
    #[error("data error: {0}")]
    Data(String),

    /// Invalid support mask request.
    #[error("support error: {0}")]
    Support(String),

    /// Invalid base-set partition or masses.
    #[error("partition error: {0}")]
    Partition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Support(_) | Error::Partition(_) => 2,
            Error::Capacity { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub use analysis::{BoundCurve, ExceedanceReport, MetricsReport};
pub use cli::{ExperimentConfig, RunManifest};
pub use ensemble::{EnsembleEngine, EnsembleKind, Partition, SupportMask, WealthLedger};
pub use market_data::{PriceSeries, ReturnSeries};
pub use simplex_grid::SimplexGrid;
pub use strategies::{MVConfig, Portfolio, RollingEstimates};
