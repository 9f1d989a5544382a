use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field exponent {0} outside 2..=8")]
    ExponentOutOfRange(u32),
    #[error("field order {0} is not a power of two")]
    OrderNotPowerOfTwo(usize),
    #[error("polynomial {poly:#b} does not have degree {p}")]
    PolynomialDegree { poly: u32, p: u32 },
    #[error("polynomial {poly:#b} is not primitive over GF(2) (degree {p})")]
    NotPrimitive { poly: u32, p: u32 },
    #[error("division by zero in GF(q)")]
    DivisionByZero,

    #[error("zero coefficient at row {row}, column {col}")]
    ZeroCoefficient { row: usize, col: usize },
    #[error("coefficient {value} at row {row}, column {col} is not in GF({q})")]
    CoefficientOutOfField {
        row: usize,
        col: usize,
        value: usize,
        q: usize,
    },
    #[error("column {col} in row {row} is out of range (n = {n})")]
    ColumnOutOfRange { row: usize, col: usize, n: usize },
    #[error("column {col} appears more than once in row {row}")]
    DuplicateColumn { row: usize, col: usize },
    #[error("2*n = {} is not divisible by d_c = {d_c}", 2 * .n)]
    DegreeDivisibility { n: usize, d_c: usize },
    #[error("construction would give m = {m} rows for n = {n} columns")]
    TooManyRows { m: usize, n: usize },
    #[error("no valid row pair for column {column} after {attempts} attempts")]
    ConstructionFailed { column: usize, attempts: usize },
    #[error("circulant shift {shift} out of range for size {size}")]
    ShiftOutOfRange { shift: usize, size: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("symbol {value} is not in GF({q})")]
    SymbolOutOfField { value: usize, q: usize },
    #[error("field order mismatch: code is over GF({code}), field is GF({field})")]
    FieldMismatch { code: usize, field: usize },

    #[error("code rate {0} outside (0, 1]")]
    RateOutOfRange(f64),
    #[error("truncation length n_m = {n_m} must be in 1..={q}")]
    TruncationLength { n_m: usize, q: usize },
    #[error("invalid message: {0}")]
    InvalidMessage(&'static str),

    #[error("invalid decoder configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("expected {expected} incoming messages, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("quantization must use at least 2 bits for memory sizing")]
    QuantizationDisabled,
    #[error("BER curve does not bracket target {0:e}")]
    NotBracketed(f64),
}
