use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("infeasible schedule: {0}")]
    Infeasible(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("density breach in cell {cell} at t = {t}: rho = {rho}")]
    VacuumBreach { cell: usize, t: f64, rho: f64 },

    #[error("time step underflow at t = {t}: dt = {dt}")]
    Stiffness { t: f64, dt: f64 },

    #[error("rate fit: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
