//! Points, unit directions, halfspaces and ℓ∞ boxes.
//!
//! Every oracle contract in this crate is phrased in terms of the dilated and
//! eroded sets `B(K, δ)` / `B(K, -δ)`. The types here are the small vocabulary
//! those contracts are written in. All comparisons against a boundary are
//! non-strict, so a point exactly on a box face or a hyperplane is contained.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance on `‖c‖₂` accepted by [`UnitVector`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("vector must have at least one coordinate")]
    Empty,
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("cannot normalize a vector of norm {0}")]
    ZeroNorm(f64),
    #[error("vector norm {0} is not within tolerance of 1")]
    NotUnit(f64),
    #[error("box radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("halfspace slack must be finite and nonnegative, got {0}")]
    InvalidSlack(f64),
    #[error("point lies outside the box")]
    OutsideBox,
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<(), GeometryError> {
    if expected == actual {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, actual })
    }
}

/// A point or direction in `Rⁿ` with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::Empty);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index, value });
        }
        Ok(Vector(coords))
    }

    /// Builds a vector from coordinates already known to be finite.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Vector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        assert!(n > 0 && value.is_finite());
        Vector(vec![value; n])
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn try_dot(&self, other: &Vector) -> Result<f64, GeometryError> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.dot(other))
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn dist2(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn with_coord(&self, i: usize, value: f64) -> Vector {
        let mut v = self.clone();
        v.0[i] = value;
        v
    }

    /// Appends one coordinate, lifting a point of `Rⁿ` into `Rⁿ⁺¹`.
    pub fn extended(&self, last: f64) -> Vector {
        let mut coords = self.0.clone();
        coords.push(last);
        Vector(coords)
    }

    /// Splits off the last coordinate. Requires dimension ≥ 2.
    pub fn split_last(&self) -> (Vector, f64) {
        let n = self.dim();
        assert!(n >= 2, "split_last needs at least two coordinates");
        (Vector(self.0[..n - 1].to_vec()), self.0[n - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = GeometryError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.add_scaled(-1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scaled(s)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

/// A direction with `‖c‖₂ = 1` up to [`UNIT_TOLERANCE`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vector", into = "Vector")]
pub struct UnitVector(Vector);

impl UnitVector {
    pub fn new(v: Vector) -> Result<Self, GeometryError> {
        let norm = v.norm2();
        if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            Ok(UnitVector(v))
        } else {
            Err(GeometryError::NotUnit(norm))
        }
    }

    pub fn normalize(v: &Vector) -> Result<Self, GeometryError> {
        let norm = v.norm2();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GeometryError::ZeroNorm(norm));
        }
        Ok(UnitVector(v.scaled(1.0 / norm)))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn dot(&self, v: &Vector) -> f64 {
        self.0.dot(v)
    }

    pub fn negated(&self) -> UnitVector {
        UnitVector(-&self.0)
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<Vector> for UnitVector {
    type Error = GeometryError;
    fn try_from(v: Vector) -> Result<Self, Self::Error> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vector {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

/// The closed halfspace `{y : ⟨normal, y − anchor⟩ ≤ slack}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: UnitVector,
    pub anchor: Vector,
    pub slack: f64,
}

impl HalfSpace {
    pub fn new(normal: UnitVector, anchor: Vector, slack: f64) -> Result<Self, GeometryError> {
        check_dim(normal.dim(), anchor.dim())?;
        if !slack.is_finite() || slack < 0.0 {
            return Err(GeometryError::InvalidSlack(slack));
        }
        Ok(HalfSpace {
            normal,
            anchor,
            slack,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    /// Right-hand side `b` of the equivalent form `⟨normal, y⟩ ≤ b`.
    pub fn offset(&self) -> f64 {
        self.normal.dot(&self.anchor) + self.slack
    }

    pub fn contains(&self, p: &Vector) -> Result<bool, GeometryError> {
        check_dim(self.dim(), p.dim())?;
        Ok(self.normal.dot(&(p - &self.anchor)) <= self.slack)
    }

    pub fn with_slack(&self, slack: f64) -> Result<Self, GeometryError> {
        HalfSpace::new(self.normal.clone(), self.anchor.clone(), slack)
    }
}

/// Free-function form of [`HalfSpace::contains`].
pub fn halfspace_contains(h: &HalfSpace, p: &Vector) -> Result<bool, GeometryError> {
    h.contains(p)
}

/// The ℓ∞ ball `B_∞(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinfBox {
    pub center: Vector,
    pub radius: f64,
}

impl LinfBox {
    pub fn new(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::NonPositiveRadius(radius));
        }
        Ok(LinfBox { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Membership with a few ulps of room, so that points computed as
    /// `center ± radius` count as inside.
    pub fn contains(&self, p: &Vector) -> Result<bool, GeometryError> {
        check_dim(self.dim(), p.dim())?;
        Ok(self.center.iter().zip(p.iter()).all(|(c, x)| {
            (x - c).abs() <= self.radius + 4.0 * f64::EPSILON * (self.radius + c.abs())
        }))
    }

    /// Endpoints of the segment `box ∩ {z + s·e_i}`, lower end first.
    pub fn coordinate_segment(
        &self,
        z: &Vector,
        i: usize,
    ) -> Result<(Vector, Vector), GeometryError> {
        if !self.contains(z)? {
            return Err(GeometryError::OutsideBox);
        }
        if i >= self.dim() {
            return Err(GeometryError::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            });
        }
        let c = self.center[i];
        Ok((
            z.with_coord(i, c - self.radius),
            z.with_coord(i, c + self.radius),
        ))
    }
}

pub fn linf_ball_contains(b: &LinfBox, p: &Vector) -> Result<bool, GeometryError> {
    b.contains(p)
}

/// Coordinate `i` is 0-based here; see [`LinfBox::coordinate_segment`].
pub fn coordinate_segment_endpoints(
    b: &LinfBox,
    z: &Vector,
    i: usize,
) -> Result<(Vector, Vector), GeometryError> {
    b.coordinate_segment(z, i)
}
