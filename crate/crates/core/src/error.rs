use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("pole hit at {z} in subtree `{subtree}`")]
    Pole { z: Complex64, subtree: String },

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A measured precondition failed. `nodes` lists the offending
    /// locations (truncated to the worst few).
    #[error("precondition violated: {what} ({} node(s), first at {})", nodes.len(), fmt_first(nodes))]
    Precondition { what: String, nodes: Vec<Complex64> },

    #[error("disconnected at this resolution: {0}")]
    Disconnected(String),

    #[error("least-squares system is rank deficient at degree {degree}; lower the degree")]
    RankDeficient { degree: usize },

    #[error("fit sup error {sup:.3e} above target {target:.3e} at degree {degree}; increase degree")]
    IncreaseDegree { degree: usize, sup: f64, target: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn fmt_first(nodes: &[Complex64]) -> String {
    match nodes.first() {
        Some(z) => format!("{:.6}{:+.6}i", z.re, z.im),
        None => "-".to_string(),
    }
}

impl Error {
    pub(crate) fn precondition(what: impl Into<String>, mut nodes: Vec<Complex64>) -> Self {
        nodes.truncate(16);
        Error::Precondition { what: what.into(), nodes }
    }
}
