use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("discriminant {0} is not negative")]
    NotImaginary(i64),
    #[error("discriminant {0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("discriminant {0} belongs to Q(sqrt(-1)) or Q(sqrt(-3)), which are excluded")]
    ExcludedField(i64),
    #[error("level must be at least 2, got {0}")]
    InvalidLevel(u64),
    #[error("matrix {entries:?} is not invertible modulo {level}")]
    NonInvertible { entries: [u64; 4], level: u64 },
    #[error("Siegel index became zero modulo {level}")]
    ZeroIndex { level: u64 },
    #[error("levels differ: {0} vs {1}")]
    LevelMismatch(u64, u64),
    #[error("requested precision {requested} bits exceeds the cap of {cap} bits")]
    PrecisionUnachievable { requested: u32, cap: u32 },
    #[error("coefficient {index} is not within tolerance of an integer (residual {residual:e}, imaginary part {imaginary:e})")]
    IntegralityFailure {
        index: usize,
        residual: f64,
        imaginary: f64,
    },
    #[error("no stable integer coefficients up to the precision cap of {cap} bits")]
    PrecisionExhausted { cap: u32 },
    #[error("conjugates {first} and {second} are closer than 2^{threshold_log2} (gap 2^{gap_log2:.1})")]
    SeparationFailure {
        first: usize,
        second: usize,
        gap_log2: f64,
        threshold_log2: f64,
    },
    #[error("level {level} and discriminant {disc} lie outside every known validity region")]
    RegionUnknown { disc: i64, level: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
