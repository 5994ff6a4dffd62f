use thiserror::Error;

#[derive(Debug, Error)]
pub enum CpsError {
    #[error("ring must have at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("need at least 2 colors, got {0}")]
    TooFewColors(u8),
    #[error("edge-particle embedding is defined for 3 or 4 colors, got {0}")]
    UnsupportedKappa(u8),
    #[error("site {index} has color {color}, outside [0, {kappa})")]
    ColorOutOfRange { index: usize, color: u8, kappa: u8 },
    #[error("blockade at edge {0} in a 3-color configuration")]
    BlockadeWithoutFourColors(usize),
    #[error("signed edge sum {sum} is not divisible by {kappa}; configuration is not realizable on a ring")]
    NotRealizable { sum: i64, kappa: u8 },
    #[error("edge index {index} out of range for ring of {n} edges")]
    EdgeOutOfRange { index: usize, n: usize },
    #[error("snapshot time {0} outside [0, t_max]")]
    SnapshotOutOfRange(f64),
    #[error("snapshot times must be sorted")]
    UnsortedSnapshots,
    #[error("invalid time horizon {0}")]
    InvalidHorizon(f64),
    #[error("engine {engine} does not support {kappa} colors")]
    EngineKappa { engine: &'static str, kappa: u8 },
    #[error("two events at identical time {0}")]
    SimultaneousEvents(f64),
    #[error("initial particle positions must be strictly increasing (violated at index {0})")]
    UnsortedParticles(usize),
    #[error("window [{t}, {s}] not covered by event log [{start}, {end}]")]
    WindowOutsideLog { t: f64, s: f64, start: f64, end: f64 },
    #[error("window of {needed} sites wraps a ring of {n} sites")]
    WindowWraps { needed: usize, n: usize },
    #[error("sequence length {len} exceeds brute-force bound {bound}")]
    TooLongForBruteForce { len: usize, bound: usize },
    #[error("power-law fit needs at least 3 points in window, got {0}")]
    TooFewPoints(usize),
    #[error("power-law fit requires positive values, got {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },
    #[error("snapshot {index} has width {got}, expected {expected}")]
    WidthMismatch { index: usize, expected: usize, got: usize },
    #[error("mass-transport audit requires a 4-color log")]
    AuditNeedsFourColors,
    #[error("event log is inconsistent with the configuration: {0}")]
    InconsistentLog(String),
    #[error("{0}")]
    Spec(String),
    #[error("replica {replica}: {source}")]
    Replica {
        replica: usize,
        #[source]
        source: Box<CpsError>,
    },
    #[error("cannot build thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CpsError>;
