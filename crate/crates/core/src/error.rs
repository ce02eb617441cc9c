use thiserror::Error;

/// Errors raised by the solvers, evaluators and the run driver.
#[derive(Debug, Error)]
pub enum Error {
    /// An input failed validation; `field` names the offending parameter.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// A sampled coefficient violated its positivity floor.
    #[error(
        "coefficient `{name}` is {value:e} at node {node} (x = {x:e}), below the floor {floor:e}"
    )]
    Floor {
        name: String,
        node: usize,
        x: f64,
        value: f64,
        floor: f64,
    },

    /// A density-like field was not strictly positive.
    #[error("{what} must be strictly positive; found {value:e} at node {node}")]
    Domain {
        what: String,
        node: usize,
        value: f64,
    },

    /// The normalization constant of the equilibrium could not be bracketed
    /// or the bisection did not reach its tolerance.
    #[error("equilibrium normalization did not converge: bracket [{lo:e}, {hi:e}], mass residual {residual:e}")]
    Normalization { lo: f64, hi: f64, residual: f64 },

    /// A tridiagonal pivot vanished.
    #[error("singular tridiagonal system at row {row} (pivot {pivot:e})")]
    Singular { row: usize, pivot: f64 },

    /// The explicit finite-volume step produced a non-positive density.
    #[error("positivity lost at step {step} (t = {time:e}, node {node}, rho = {value:e}); reduce dt below the CFL bound")]
    Cfl {
        step: usize,
        time: f64,
        node: usize,
        value: f64,
    },

    /// The Picard iteration left the ball of radius `m_cap`.
    #[error("fixed-point iterate {iteration} has sup norm {norm:e} > M_cap = {cap:e}; reduce the horizon T")]
    Divergence {
        iteration: usize,
        norm: f64,
        cap: f64,
    },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
