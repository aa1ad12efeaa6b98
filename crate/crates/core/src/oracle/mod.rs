//! The seven GLS oracles as queryable traits.
//!
//! Each oracle is queried with a precision `δ` that bounds both the geometric
//! error of the answer and its failure probability. Answers are assertions:
//! near the boundary of `K` both variants of a membership answer can be
//! correct at once, and callers must accept either.

mod amplify;
mod frame;
mod ledger;
mod noise;
mod random;

pub use amplify::{amplify, Amplified, Reseed, Voter};
pub use frame::{AffineFrame, GlobalView, LocalView};
pub use ledger::{wrap_with_ledger, Counted, LedgerEntry, OracleKind, QueryLedger};
pub use noise::NoisyMembership;
pub use random::{QueryStreams, RandomStream};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, OracleError};
use crate::geometry::{HalfSpace, Vector};

/// Oracle precision `δ ∈ (0, ½)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Precision(f64);

impl Precision {
    /// Largest representable precision; `saturating` clamps to this.
    pub const MAX: f64 = 0.5 - 1e-12;

    pub fn new(delta: f64) -> Result<Self, OracleError> {
        if delta > 0.0 && delta < 0.5 {
            Ok(Precision(delta))
        } else {
            Err(invalid(format!(
                "precision must lie in (0, 0.5), got {delta}"
            )))
        }
    }

    /// Clamps into the valid range. Used where a reduction rescales a
    /// caller-supplied precision and may push it past ½ or towards 0.
    pub fn saturating(delta: f64) -> Self {
        if delta.is_nan() {
            return Precision(Self::MAX);
        }
        Precision(delta.clamp(f64::MIN_POSITIVE, Self::MAX))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn scaled(self, factor: f64) -> Self {
        Precision::saturating(self.0 * factor)
    }
}

impl TryFrom<f64> for Precision {
    type Error = OracleError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Precision::new(v)
    }
}

impl From<Precision> for f64 {
    fn from(p: Precision) -> f64 {
        p.0
    }
}

/// Sandwiching promise `B(center, r) ⊆ K ⊆ B(center, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemGeometry {
    pub center: Vector,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl ProblemGeometry {
    pub fn new(center: Vector, inner_radius: f64, outer_radius: f64) -> Result<Self, OracleError> {
        if !(inner_radius > 0.0) || !inner_radius.is_finite() {
            return Err(invalid(format!(
                "inner radius must be positive, got {inner_radius}"
            )));
        }
        if !(outer_radius >= inner_radius) || !outer_radius.is_finite() {
            return Err(invalid(format!(
                "outer radius {outer_radius} must be finite and at least the inner radius {inner_radius}"
            )));
        }
        Ok(ProblemGeometry {
            center,
            inner_radius,
            outer_radius,
        })
    }

    /// Geometry of a body already centered at the origin.
    pub fn centered(n: usize, inner_radius: f64, outer_radius: f64) -> Result<Self, OracleError> {
        Self::new(Vector::zeros(n), inner_radius, outer_radius)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn kappa(&self) -> f64 {
        self.outer_radius / self.inner_radius
    }

    /// The frame that maps this body into `B(0, r/R) ⊆ K' ⊆ B(0, 1)`.
    pub fn frame(&self) -> AffineFrame {
        AffineFrame::new(self.center.clone(), self.outer_radius)
    }

    /// Geometry of the body after applying [`Self::frame`].
    pub fn normalized(&self) -> ProblemGeometry {
        ProblemGeometry {
            center: Vector::zeros(self.dim()),
            inner_radius: self.inner_radius / self.outer_radius,
            outer_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MembershipAnswer {
    /// `y ∈ B(K, δ)`.
    InsideDilated,
    /// `y ∉ B(K, −δ)`.
    OutsideEroded,
}

impl MembershipAnswer {
    pub fn is_inside(self) -> bool {
        matches!(self, MembershipAnswer::InsideDilated)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationAnswer {
    InsideDilated,
    /// `⟨c, x⟩ ≤ ⟨c, y⟩ + δ` for all `x ∈ B(K, −δ)`, carried as a halfspace.
    Separator(HalfSpace),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizationAnswer {
    Maximizer(Vector),
    EmptyInterior,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationAnswer {
    /// `⟨c, x⟩ ≤ γ + δ` on `B(K, −δ)`.
    AllBelow,
    /// A point of `B(K, δ)` with `⟨c, y⟩ ≥ γ − δ`.
    Witness(Vector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityAnswer {
    AllBelow,
    SomeAbove,
}

/// Value and subgradient answer of a GRAD oracle. `value` may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradAnswer {
    pub value: f64,
    pub subgrad: Vector,
}

pub trait MembershipOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError>;
}

pub trait SeparationOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError>;
}

pub trait OptimizationOracle: Send + Sync {
    fn dim(&self) -> usize;
    /// Maximizes `⟨c, ·⟩` over `K`; `c` is expected to be a unit vector.
    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError>;
}

pub trait ViolationOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError>;
}

pub trait ValidityOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError>;
}

pub trait EvaluationOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, y: &Vector, delta: Precision) -> Result<f64, OracleError>;
}

pub trait SubgradientOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn subgradient(&self, y: &Vector, delta: Precision) -> Result<GradAnswer, OracleError>;
}

macro_rules! forward_pointer_impls {
    ($trait:ident, $method:ident, ($($arg:ident : $ty:ty),*) -> $ret:ty) => {
        impl<T: $trait + ?Sized> $trait for &T {
            fn dim(&self) -> usize { (**self).dim() }
            fn $method(&self, $($arg: $ty),*) -> $ret { (**self).$method($($arg),*) }
        }
        impl<T: $trait + ?Sized> $trait for Box<T> {
            fn dim(&self) -> usize { (**self).dim() }
            fn $method(&self, $($arg: $ty),*) -> $ret { (**self).$method($($arg),*) }
        }
        impl<T: $trait + ?Sized> $trait for Arc<T> {
            fn dim(&self) -> usize { (**self).dim() }
            fn $method(&self, $($arg: $ty),*) -> $ret { (**self).$method($($arg),*) }
        }
    };
}

forward_pointer_impls!(MembershipOracle, membership, (y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError>);
forward_pointer_impls!(SeparationOracle, separate, (y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError>);
forward_pointer_impls!(OptimizationOracle, optimize, (c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError>);
forward_pointer_impls!(ViolationOracle, violation, (c: &Vector, gamma: f64, delta: Precision) -> Result<ViolationAnswer, OracleError>);
forward_pointer_impls!(ValidityOracle, validity, (c: &Vector, gamma: f64, delta: Precision) -> Result<ValidityAnswer, OracleError>);
forward_pointer_impls!(EvaluationOracle, evaluate, (y: &Vector, delta: Precision) -> Result<f64, OracleError>);
forward_pointer_impls!(SubgradientOracle, subgradient, (y: &Vector, delta: Precision) -> Result<GradAnswer, OracleError>);

/// Function oracles only accept `‖y‖₂ ≤ 1` (with a little rounding room).
pub(crate) fn check_unit_ball(y: &Vector) -> Result<(), OracleError> {
    let norm = y.norm2();
    if norm <= 1.0 + 1e-9 {
        Ok(())
    } else {
        Err(OracleError::OutsideUnitBall(norm))
    }
}

pub(crate) fn check_query_dim(expected: usize, y: &Vector) -> Result<(), OracleError> {
    crate::geometry::check_dim(expected, y.dim()).map_err(OracleError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_bounds() {
        assert!(Precision::new(0.0).is_err());
        assert!(Precision::new(0.5).is_err());
        assert!(Precision::new(1e-6).is_ok());
        assert_eq!(Precision::saturating(3.0).value(), Precision::MAX);
        assert!(Precision::saturating(0.0).value() > 0.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(ProblemGeometry::centered(2, 0.0, 1.0).is_err());
        assert!(ProblemGeometry::centered(2, 2.0, 1.0).is_err());
        let g = ProblemGeometry::new(Vector::new(vec![1.0, 2.0]).unwrap(), 0.5, 2.0).unwrap();
        assert_eq!(g.kappa(), 4.0);
        let local = g.normalized();
        assert_eq!(local.outer_radius, 1.0);
        assert_eq!(local.inner_radius, 0.25);
        assert_eq!(local.kappa(), g.kappa());
    }
}
