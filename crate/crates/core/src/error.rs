use thiserror::Error;

use crate::space::Vertex;

/// Errors raised by the library. Every message names the module that raised
/// it and, for validity-zone failures, the parameter that has to grow.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("[zoo] unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("[zoo] invalid parameters for `{generator}`: {reason}")]
    InvalidParams { generator: String, reason: String },

    #[error("[core-metric] {vertex} is not a vertex of `{generator}`")]
    NotAVertex { generator: String, vertex: Vertex },

    #[error(
        "[core-metric] window would exceed {limit} vertices (radius {radius}); \
         lower --radius or raise DLSCAPE_MAX_VERTICES"
    )]
    ResourceLimit { radius: u32, limit: usize },

    #[error("[{module}] {vertex} lies outside the window")]
    OutsideWindow { module: &'static str, vertex: Vertex },

    #[error("[{module}] {what} = {value} exceeds {limit}; increase {param}")]
    Validity {
        module: &'static str,
        what: String,
        value: i64,
        limit: i64,
        param: &'static str,
    },

    #[error("[{module}] empty {what}")]
    Empty { module: &'static str, what: &'static str },

    #[error("[{module}] {message}")]
    Domain { module: &'static str, message: String },

    #[error("[dlfield] path is not geodesic at step {step}: {detail}")]
    NonGeodesic { step: usize, detail: String },

    #[error("[corays] no descending neighbor at {0}; field is not distance-like in the zone")]
    NoDescent(Vertex),

    #[error("[gh] not a metric: {reason} (witness {witness:?})")]
    NotMetric { reason: String, witness: Vec<usize> },

    #[error("[pseudometric] internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::UnknownGenerator(_) | Error::InvalidParams { .. } => "zoo",
            Error::NotAVertex { .. } | Error::ResourceLimit { .. } => "core-metric",
            Error::OutsideWindow { module, .. }
            | Error::Validity { module, .. }
            | Error::Empty { module, .. }
            | Error::Domain { module, .. } => module,
            Error::NonGeodesic { .. } => "dlfield",
            Error::NoDescent(_) => "corays",
            Error::NotMetric { .. } => "gh",
            Error::Inconsistent(_) => "pseudometric",
        }
    }

    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
