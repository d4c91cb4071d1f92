//! Multi-vehicle routing by incidence-matrix decomposition.
//!
//! The joint problem (assign points to capacity-limited vehicles and route each
//! vehicle through its points from a common depot) is split in two. Inverting a
//! square block of the point/path incidence matrix turns each vehicle's path
//! costs into per-point visit coefficients; a capacity-constrained assignment
//! over those coefficients picks each vehicle's point set, and an exact
//! single-vehicle tour is then solved per vehicle. All arithmetic is exact
//! rational, and every stage has an exhaustive counterpart for validation.

pub mod assignment;
pub mod decomposition;
pub mod error;
pub mod fixture;
pub mod instance;
pub mod linalg;
pub mod pipeline;
pub mod rational;
pub mod report;
pub mod router;

pub use error::{Error, Result};
pub use instance::{Instance, PathId, PointId};
pub use pipeline::{run_pipeline, solve_monolithic_oracle, MSource, Plan, Scenario, ScenarioName};
pub use rational::Rational;
