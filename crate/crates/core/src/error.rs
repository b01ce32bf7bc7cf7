use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported fractal family {0}; expected 2 or 3")]
    UnsupportedFamily(u32),

    #[error("theta = {theta} is outside the valid range for family {family}: 0 < theta <= {max} (open interval (0, {limit}) less a 1e-6 guard at the top)")]
    DegenerateAngle {
        family: u32,
        theta: f64,
        max: f64,
        limit: f64,
    },

    #[error("degenerate similarity: {0}")]
    DegenerateMap(&'static str),

    #[error("polyline of {requested} vertices exceeds the vertex budget of {budget}")]
    VertexBudget { requested: u128, budget: usize },

    #[error("node density must be finite and non-negative, got {0}")]
    NegativeDensity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {usable} usable rows, at least {required} required")]
    InsufficientData { usable: usize, required: usize },

    #[error("no density pairs (rho, rho / r^2) found in the sweep rows")]
    NoMatchingPairs,
}
