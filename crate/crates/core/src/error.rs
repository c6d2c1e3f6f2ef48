use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the computational interval [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("shape mismatch in {what}: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Shape {
        what: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0} requires a composite trapezoid grid")]
    UnsupportedGrid(&'static str),

    #[error("matrix is numerically singular ({0})")]
    Singular(&'static str),

    #[error("det(I - alpha K) vanishes on this grid (|det| = {0:e}); the resolvent has a pole")]
    Pole(f64),

    #[error("spectral parameter z = {0} is too close to 0 (|z| < {1:e})")]
    SpectralPointTooSmall(num_complex::Complex64, f64),

    #[error("z lies on the spectrum of the free periodic operator: |cos(sqrt(z) omega) - cos(theta)| = {0:e}")]
    SpectralCollision(f64),

    #[error("degenerate rational symbol: {0}")]
    DegenerateSymbol(String),

    #[error("subset enumeration over N = {0} roots exceeds the limit of {1}")]
    CombinatorialSize(usize, usize),

    #[error("dense discretization of dimension {0} exceeds the limit of {1}")]
    SizeLimit(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
