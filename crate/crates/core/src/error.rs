use thiserror::Error;

use crate::rational::Rational;

/// Resource named by an infeasibility certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Mass,
    Volume,
}

impl std::fmt::Display for Resource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resource::Mass => f.write_str("mass"),
            Resource::Volume => f.write_str("volume"),
        }
    }
}

/// Why no assignment of points to vehicles satisfies the capacity limits.
#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibilityCertificate {
    /// Summed demand exceeds summed fleet capacity.
    Aggregate {
        resource: Resource,
        demand: Rational,
        capacity: Rational,
    },
    /// A single point is larger than every vehicle can carry.
    OversizedPoint {
        point: usize,
        resource: Resource,
        demand: Rational,
    },
    /// Aggregate capacity suffices but no packing of points into vehicles exists.
    Packing,
}

impl std::fmt::Display for InfeasibilityCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InfeasibilityCertificate::Aggregate {
                resource,
                demand,
                capacity,
            } => write!(
                f,
                "total {resource} demand {demand} exceeds fleet {resource} capacity {capacity}"
            ),
            InfeasibilityCertificate::OversizedPoint {
                point,
                resource,
                demand,
            } => write!(
                f,
                "point {point} needs {resource} {demand}, more than any vehicle carries"
            ),
            InfeasibilityCertificate::Packing => {
                f.write_str("no packing of points into vehicles respects every capacity")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("decomposition needs at least 3 points, instance has {points}")]
    DecompositionNotApplicable { points: usize },

    #[error("closed-form coefficients need an odd point count, instance has {points}")]
    ClosedFormNotApplicable { points: usize },

    #[error("A-set {a_ids:?} induces a singular incidence block")]
    SingularPartition { a_ids: Vec<usize> },

    #[error("invalid route for vehicle {vehicle}: {reason}")]
    InvalidRoute { vehicle: usize, reason: String },

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("infeasible assignment: {0}")]
    Infeasible(InfeasibilityCertificate),

    #[error("{what} too large for exhaustive enumeration ({size} > {limit})")]
    OracleLimit {
        what: String,
        size: u128,
        limit: u128,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage context peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Infeasible(_) => 2,
            Error::OracleLimit { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
