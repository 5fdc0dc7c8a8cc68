use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DhoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("overdamped: gamma = {gamma} >= 2*m*omega = {bound}; quantum dynamics requires gamma < 2*m*omega")]
    Overdamped { gamma: f64, bound: f64 },

    #[error("constraint rho*x = sigma*y cannot be satisfied: {0}")]
    ConstraintInfeasible(String),

    #[error("quadrature under-resolved: {nodes} nodes, need at least {required}")]
    QuadratureUnderResolved { nodes: usize, required: usize },

    #[error(
        "truncation leak at t = {t}: leaked mass {leaked:.3e}, edge mass {edge:.3e} with n_max = {n_max}; raise n_max"
    )]
    TruncationLeak {
        t: f64,
        n_max: usize,
        leaked: f64,
        edge: f64,
    },

    #[error("step size underflow at t = {t} (h = {h:e}); tolerance unachievable")]
    ToleranceUnachievable { t: f64, h: f64 },

    #[error("series diverges: |q| = {q_abs} exceeds the convergence guard {guard}")]
    SeriesDivergence { q_abs: f64, guard: f64 },

    #[error("series did not converge within {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("contour under-resolved: doubling the point count moved the result by {delta:e}")]
    ContourUnderResolved { delta: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for DhoError {
    fn from(e: std::io::Error) -> Self {
        DhoError::Io(e.to_string())
    }
}

impl From<csv::Error> for DhoError {
    fn from(e: csv::Error) -> Self {
        DhoError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DhoError>;
