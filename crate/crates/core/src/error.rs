use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The characteristic equation has no real roots, or its decaying root
    /// left the open unit interval.
    #[error("characteristic roots unusable (lambda = {lambda}, mu = {mu}, discriminant = {discriminant})")]
    NonRealRoots {
        lambda: f64,
        mu: f64,
        discriminant: f64,
    },

    /// An iterative numerical procedure did not reach its tolerance.
    #[error("no convergence in {what}: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// Invalid configuration of an oracle or a run.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
