//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid exterior specification: {0}")]
    InvalidExterior(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("policy weight out of [lambda, Lambda] at node {node}, direction {dir}: {value}")]
    PolicyOutOfBounds { node: usize, dir: usize, value: f64 },

    #[error("declared exterior tail growth alpha = {alpha} >= 2s = {two_s}; tail integral diverges")]
    TailDivergence { alpha: f64, two_s: f64 },

    #[error("point {0:?} is not an interior grid node")]
    NotANode(Vec<f64>),

    #[error("non-finite operator value at node {node}")]
    NonFinite { node: usize },

    #[error("pseudo-time iteration did not reach tolerance: residual {residual} after {steps} steps")]
    NonConvergence { residual: f64, steps: usize, history: Vec<f64> },

    #[error("pseudo-time iteration unstable: residual grew over {window} consecutive steps (now {residual})")]
    Instability { residual: f64, window: usize },

    #[error("singular linear system in policy iteration")]
    SingularSystem,

    #[error("eigen iteration did not converge: residual {residual}")]
    EigenNonConvergence { residual: f64 },

    #[error("weight a has no positive part on the grid")]
    EmptyPositivitySet,

    #[error("bracket failure: min u does not change sign on [{m_lo}, {m_hi}] (values {f_lo}, {f_hi})")]
    BracketFailure { m_lo: f64, m_hi: f64, f_lo: f64, f_hi: f64 },

    #[error("threshold ladder not decreasing at M = {m}: min u rose from {prev} to {curr}")]
    MonotonicityViolation { m: f64, prev: f64, curr: f64 },

    #[error("not enough samples near free boundary point {point:?}: {found} found, {needed} needed")]
    InsufficientSamples { point: Vec<f64>, found: usize, needed: usize },

    #[error("config error ({key}): {message}")]
    Config { key: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
