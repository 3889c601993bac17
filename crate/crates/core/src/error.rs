use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("density undefined at t = {0}")]
    DensityUndefined(f64),

    #[error("hazard rate undefined at t = {t}: {reason}")]
    HazardUndefined { t: f64, reason: &'static str },

    #[error("moment of order {0} diverges")]
    MomentDiverges(u32),

    #[error("distribution has mass below zero ({0})")]
    NotNonnegative(String),

    #[error("Laplace transform of the denominator vanishes at s = {0}")]
    DivideByZero(f64),

    #[error("finite-difference derivative of order {order} unstable at s = {s}")]
    DerivativeUnstable { order: u32, s: f64 },

    #[error("scaler has mass below zero ({0})")]
    NegativeScaler(String),

    #[error("map is not increasing: f({lo}) > f({hi})")]
    NotIncreasing { lo: f64, hi: f64 },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
