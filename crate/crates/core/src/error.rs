use thiserror::Error;

/// Rejections raised by the measure, estimator, operator and dynamics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight at index {index} is negative ({weight})")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("points and weights differ in length ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("interval ({a}, {b}) is empty: need a < b")]
    InvalidInterval { a: f64, b: f64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("measure has no mass")]
    EmptyMeasure,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("generalized dimension is undefined at q = 1")]
    QEqualsOne,
    #[error("ball around atom {index} (position {position}) has zero mass at radius {radius}; grid is below resolution")]
    ZeroBallMass {
        index: usize,
        position: f64,
        radius: f64,
    },
    #[error("no atoms survive the trim at alpha = {alpha}, delta = {delta}")]
    AllAtomsDiscarded { alpha: f64, delta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time grid starts at {t_min}, below the witness threshold t0 = {t0}")]
    BelowWitnessThreshold { t_min: f64, t0: f64 },
    #[error("time grid reaches {t_max}, beyond the resolution horizon {horizon}")]
    BeyondHorizon { t_max: f64, horizon: f64 },
    #[error("measure is not uniformly {alpha}-Hölder continuous on the grid (ratio profile slope {slope})")]
    NotHolderContinuous { alpha: f64, slope: f64 },
    #[error("odometer point has {len} coordinates, spec needs {needed}")]
    ShortOdometer { len: usize, needed: usize },
    #[error("operator needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("size {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("eigensolver failed to converge at index {index}")]
    NoConvergence { index: usize },
    #[error("t = {t} violates the light cone; largest admissible t is {t_max}")]
    LightCone { t: f64, t_max: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
