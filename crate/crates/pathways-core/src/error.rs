use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the stage that raises them.
#[derive(Debug, Error)]
pub enum Error {
    // --- time-series ingestion ---
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row {row} in {path}: {reason}")]
    ParseError {
        path: String,
        row: usize,
        reason: String,
    },
    #[error("non-uniform step at row {row} in {path}: gap of {gap_steps} steps exceeds the {max_gap_steps}-step interpolation limit")]
    NonUniformStep {
        path: String,
        row: usize,
        gap_steps: i64,
        max_gap_steps: i64,
    },
    #[error("time series {path} is empty")]
    EmptySeries { path: String },
    #[error("cannot resample {from_minutes} min to {to_minutes} min: steps are not integer multiples")]
    IncompatibleStep { from_minutes: u32, to_minutes: u32 },
    #[error("renewable scale factor {0} is negative")]
    NegativeScale(f64),

    // --- scenario / topology ---
    #[error("transformer {transformer} has no connection count for sector {sector}")]
    MissingCounts {
        transformer: String,
        sector: String,
    },
    #[error("sector {0} has a nonzero share but zero connections across all transformers")]
    ZeroSectorConnections(String),
    #[error("scenario configuration invalid: {0}")]
    InvalidScenario(String),

    // --- device models ---
    #[error("generator power {p_kw} kW outside [0, {p_max_kw}] kW")]
    OutOfRange { p_kw: f64, p_max_kw: f64 },
    #[error("cost-curve fit is degenerate: all power points identical")]
    DegenerateFit,
    #[error("battery cannot charge ({p_c} kW) and discharge ({p_d} kW) simultaneously")]
    SimultaneousChargeDischarge { p_c: f64, p_d: f64 },

    // --- dispatch ---
    #[error("series does not cover whole days: {len} steps at {dt_minutes} min")]
    PartialDay { len: usize, dt_minutes: u32 },
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("dispatch problem infeasible{}", hint.as_ref().map(|h| format!(": {h}")).unwrap_or_default())]
    Infeasible { hint: Option<String> },
    #[error("solver timed out after {elapsed_s:.1} s; best incumbent gap {gap_pct:.3}%")]
    SolverTimeout { elapsed_s: f64, gap_pct: f64 },
    #[error("solver failed: {0}")]
    SolverFailure(String),

    // --- criteria ---
    #[error("transformer peak {peak_kva:.1} kVA exceeds the largest catalog size {largest_kva:.1} kVA")]
    PeakExceedsCatalog { peak_kva: f64, largest_kva: f64 },
    #[error("transformer size {0} kVA not present in the catalog")]
    UnknownSize(f64),
    #[error("total kWh sold is zero; retail rate undefined")]
    ZeroSales,
    #[error("relative criteria (saving, emission reduction) need a baseline report")]
    MissingBaseline,

    // --- scoring ---
    #[error("weights length {weights} does not match criteria count {criteria}")]
    LengthMismatch { weights: usize, criteria: usize },
    #[error("scoring needs at least 2 pathways, got {0}")]
    TooFewPathways(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
