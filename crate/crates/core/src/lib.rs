//! Oracles for convex bodies and functions, and the reductions between them.
//!
//! A convex body is accessed only through oracles: membership (MEM),
//! separation (SEP), optimization (OPT), violation (VIOL) and validity (VAL);
//! a convex function through evaluation (EVAL) and subgradient (GRAD)
//! oracles. The crate implements the reductions between these, the two
//! randomized primitives behind separation from membership, and an
//! ellipsoid-method optimizer, together with exact reference bodies to test
//! against.

pub mod bodies;
pub mod cutting_plane;
pub mod error;
pub mod geometry;
pub mod height;
pub mod oracle;
pub mod reductions;
pub mod separation;
pub mod subgrad;

pub use error::OracleError;
pub use geometry::{GeometryError, HalfSpace, LinfBox, UnitVector, Vector};
pub use oracle::{
    EvaluationOracle, GradAnswer, MembershipAnswer, MembershipOracle, OptimizationAnswer,
    OptimizationOracle, Precision, ProblemGeometry, RandomStream, SeparationAnswer,
    SeparationOracle, SubgradientOracle, ValidityAnswer, ValidityOracle, ViolationAnswer,
    ViolationOracle,
};
