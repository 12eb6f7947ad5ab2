use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice: {0}")]
    Lattice(String),
    #[error("model: {0}")]
    Model(String),
    #[error("basis: {0}")]
    Basis(String),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("mean-field solver: {0}")]
    Solver(String),
    #[error("observable: {0}")]
    Observable(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("fit: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
