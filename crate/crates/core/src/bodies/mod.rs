//! Reference convex bodies and functions with closed-form oracles.
//!
//! These are the ground truth for tests and the "exact" oracles that the
//! reductions are measured against.

mod brute_force;
mod exact;
mod function;
mod polytope;
pub mod random;

pub use brute_force::brute_force_lp;
pub use exact::{ExactBody, ExactFunction};
pub use function::FuncSpec;
pub use polytope::{HPolytope, MAX_ENUMERATION_SUBSETS};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, OracleError};
use crate::geometry::{check_dim, HalfSpace, UnitVector, Vector};
use crate::oracle::{MembershipAnswer, Precision, ProblemGeometry};

/// `{x : (x − c)ᵀ M⁻¹ (x − c) ≤ 1}` for a positive-definite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidBody {
    center: Vector,
    shape: DMatrix<f64>,
    inverse: DMatrix<f64>,
    geometry: ProblemGeometry,
}

impl EllipsoidBody {
    pub fn new(center: Vector, shape: DMatrix<f64>) -> Result<Self, OracleError> {
        let n = center.dim();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(invalid(format!("shape matrix must be {n}x{n}")));
        }
        if (&shape - shape.transpose()).amax() > 1e-12 * shape.amax().max(1.0) {
            return Err(invalid("shape matrix must be symmetric"));
        }
        let eig = shape.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if !(lo > 0.0) {
            return Err(invalid(format!(
                "shape matrix must be positive definite (min eigenvalue {lo})"
            )));
        }
        let inverse = shape
            .clone()
            .cholesky()
            .ok_or_else(|| invalid("shape matrix is not positive definite"))?
            .inverse();
        let geometry = ProblemGeometry::new(center.clone(), lo.sqrt(), hi.sqrt())?;
        Ok(EllipsoidBody {
            center,
            shape,
            inverse,
            geometry,
        })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// `(y − c)ᵀ M⁻¹ (y − c)`.
    pub fn gauge_squared(&self, y: &Vector) -> f64 {
        let d = to_dvec(&(y - &self.center));
        d.dot(&(&self.inverse * &d))
    }

    fn support(&self, c: &Vector) -> (f64, Vector) {
        let cv = to_dvec(c);
        let mc = &self.shape * &cv;
        let q = cv.dot(&mc).max(0.0).sqrt();
        if q == 0.0 {
            return (0.0, self.center.clone());
        }
        let arg = self.center.add_scaled(1.0 / q, &from_dvec(&mc));
        (c.dot(&self.center) + q, arg)
    }

    fn outward_normal(&self, y: &Vector) -> Vector {
        from_dvec(&(&self.inverse * to_dvec(&(y - &self.center))))
    }
}

fn to_dvec(v: &Vector) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn from_dvec(v: &DVector<f64>) -> Vector {
    Vector::from_raw(v.iter().copied().collect())
}

/// A convex body with a certified sandwiching geometry.
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Ball {
        center: Vector,
        radius: f64,
    },
    /// `{x : ‖x − center‖∞ ≤ radius}`.
    Box {
        center: Vector,
        radius: f64,
    },
    /// `{x ≥ 0 : Σ xᵢ ≤ scale}`.
    Simplex {
        dim: usize,
        scale: f64,
    },
    HPolytope(HPolytope),
    Ellipsoid(EllipsoidBody),
    /// Membership is the conjunction; the geometry is the caller's claim.
    Intersection {
        parts: Vec<BodySpec>,
        geometry: ProblemGeometry,
    },
}

impl BodySpec {
    pub fn ball(center: Vector, radius: f64) -> Result<Self, OracleError> {
        check_radius(radius)?;
        Ok(BodySpec::Ball { center, radius })
    }

    pub fn unit_ball(n: usize) -> Self {
        BodySpec::Ball {
            center: Vector::zeros(n),
            radius: 1.0,
        }
    }

    pub fn cube(center: Vector, radius: f64) -> Result<Self, OracleError> {
        check_radius(radius)?;
        Ok(BodySpec::Box { center, radius })
    }

    pub fn simplex(dim: usize, scale: f64) -> Result<Self, OracleError> {
        check_radius(scale)?;
        if dim == 0 {
            return Err(invalid("simplex dimension must be positive"));
        }
        Ok(BodySpec::Simplex { dim, scale })
    }

    pub fn ellipsoid(center: Vector, shape: DMatrix<f64>) -> Result<Self, OracleError> {
        Ok(BodySpec::Ellipsoid(EllipsoidBody::new(center, shape)?))
    }

    pub fn intersection(
        parts: Vec<BodySpec>,
        geometry: ProblemGeometry,
    ) -> Result<Self, OracleError> {
        if parts.is_empty() {
            return Err(invalid("intersection needs at least one part"));
        }
        for p in &parts {
            check_dim(geometry.dim(), p.dim())?;
            if !p.contains(&geometry.center) {
                return Err(invalid("claimed intersection center lies outside a part"));
            }
        }
        Ok(BodySpec::Intersection { parts, geometry })
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Ball { center, .. } | BodySpec::Box { center, .. } => center.dim(),
            BodySpec::Simplex { dim, .. } => *dim,
            BodySpec::HPolytope(p) => p.dim(),
            BodySpec::Ellipsoid(e) => e.center.dim(),
            BodySpec::Intersection { geometry, .. } => geometry.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BodySpec::Ball { .. } => "ball",
            BodySpec::Box { .. } => "box",
            BodySpec::Simplex { .. } => "simplex",
            BodySpec::HPolytope(_) => "hpolytope",
            BodySpec::Ellipsoid(_) => "ellipsoid",
            BodySpec::Intersection { .. } => "intersection",
        }
    }

    pub fn geometry(&self) -> ProblemGeometry {
        let g = match self {
            BodySpec::Ball { center, radius } => {
                ProblemGeometry::new(center.clone(), *radius, *radius)
            }
            BodySpec::Box { center, radius } => ProblemGeometry::new(
                center.clone(),
                *radius,
                radius * (center.dim() as f64).sqrt(),
            ),
            BodySpec::Simplex { dim, scale } => {
                let n = *dim as f64;
                let rho = scale / (n + n.sqrt());
                let far = ((scale - rho).powi(2) + (n - 1.0) * rho * rho).sqrt();
                ProblemGeometry::new(Vector::filled(*dim, rho), rho, far.max(rho * n.sqrt()))
            }
            BodySpec::HPolytope(p) => Ok(p.geometry().clone()),
            BodySpec::Ellipsoid(e) => Ok(e.geometry.clone()),
            BodySpec::Intersection { geometry, .. } => Ok(geometry.clone()),
        };
        g.expect("constructors validate radii")
    }

    pub fn contains(&self, y: &Vector) -> bool {
        match self {
            BodySpec::Ball { center, radius } => y.dist2(center) <= *radius,
            BodySpec::Box { center, radius } => (y - center).norm_inf() <= *radius,
            BodySpec::Simplex { scale, .. } => {
                y.iter().all(|&v| v >= 0.0) && y.iter().sum::<f64>() <= *scale
            }
            BodySpec::HPolytope(p) => p.contains(y),
            BodySpec::Ellipsoid(e) => e.gauge_squared(y) <= 1.0,
            BodySpec::Intersection { parts, .. } => parts.iter().all(|p| p.contains(y)),
        }
    }

    /// `max_{x∈K} ⟨c, x⟩` and a maximizer, for any (not necessarily unit) `c`.
    pub fn support(&self, c: &Vector) -> Result<(f64, Vector), OracleError> {
        check_dim(self.dim(), c.dim())?;
        Ok(match self {
            BodySpec::Ball { center, radius } => {
                let norm = c.norm2();
                let arg = if norm > 0.0 {
                    center.add_scaled(radius / norm, c)
                } else {
                    center.clone()
                };
                (c.dot(center) + radius * norm, arg)
            }
            BodySpec::Box { center, radius } => {
                let arg = Vector::from_raw(
                    center
                        .iter()
                        .zip(c.iter())
                        .map(|(m, ci)| if *ci >= 0.0 { m + radius } else { m - radius })
                        .collect(),
                );
                (c.dot(center) + radius * c.norm1(), arg)
            }
            BodySpec::Simplex { dim, scale } => {
                // Vertices are 0 and scale·e_i; lowest index wins ties, origin wins if all c_i <= 0.
                let mut best = (0.0, None);
                for (i, &ci) in c.iter().enumerate() {
                    if scale * ci > best.0 {
                        best = (scale * ci, Some(i));
                    }
                }
                let arg = match best.1 {
                    Some(i) => Vector::basis(*dim, i).scaled(*scale),
                    None => Vector::zeros(*dim),
                };
                (best.0, arg)
            }
            BodySpec::HPolytope(p) => p.support(c),
            BodySpec::Ellipsoid(e) => e.support(c),
            BodySpec::Intersection { parts, .. } if parts.len() == 1 => parts[0].support(c)?,
            BodySpec::Intersection { .. } => return Err(OracleError::Unsupported(
                "closed-form support of an intersection; optimize with the cutting-plane engine"
                    .into(),
            )),
        })
    }

    /// A halfspace through `y` containing the body, for `y` outside it.
    pub fn exact_separator(&self, y: &Vector) -> Result<Option<HalfSpace>, OracleError> {
        check_dim(self.dim(), y.dim())?;
        if self.contains(y) {
            return Ok(None);
        }
        let normal = match self {
            BodySpec::Ball { center, .. } => y - center,
            BodySpec::Box { center, .. } => {
                let d = y - center;
                let (i, _) = d.iter().enumerate().fold((0, -1.0), |b, (i, v)| {
                    if v.abs() > b.1 {
                        (i, v.abs())
                    } else {
                        b
                    }
                });
                Vector::basis(y.dim(), i).scaled(d[i].signum())
            }
            BodySpec::Simplex { dim, .. } => match y.iter().enumerate().find(|(_, v)| **v < 0.0) {
                Some((i, _)) => -&Vector::basis(*dim, i),
                None => Vector::filled(*dim, 1.0),
            },
            BodySpec::HPolytope(p) => p.normals()[p.max_violation(y).0].clone(),
            BodySpec::Ellipsoid(e) => e.outward_normal(y),
            BodySpec::Intersection { parts, .. } => {
                let part = parts
                    .iter()
                    .find(|p| !p.contains(y))
                    .expect("some part excludes y");
                return part.exact_separator(y);
            }
        };
        Ok(Some(HalfSpace::new(
            UnitVector::normalize(&normal)?,
            y.clone(),
            0.0,
        )?))
    }
}

fn check_radius(r: f64) -> Result<(), OracleError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

/// Exact membership: inside the body itself answers `InsideDilated`,
/// anything else `OutsideEroded`. Both are valid for every `δ`.
pub fn exact_membership(
    spec: &BodySpec,
    y: &Vector,
    _delta: Precision,
) -> Result<MembershipAnswer, OracleError> {
    check_dim(spec.dim(), y.dim())?;
    Ok(if spec.contains(y) {
        MembershipAnswer::InsideDilated
    } else {
        MembershipAnswer::OutsideEroded
    })
}

pub fn exact_support(spec: &BodySpec, c: &UnitVector) -> Result<(f64, Vector), OracleError> {
    spec.support(c.as_vector())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn d() -> Precision {
        Precision::new(0.01).unwrap()
    }

    #[test]
    fn membership_examples() {
        let ball = BodySpec::unit_ball(2);
        assert_eq!(
            exact_membership(&ball, &v(&[0.0, 0.0]), d()).unwrap(),
            MembershipAnswer::InsideDilated
        );
        assert_eq!(
            exact_membership(&ball, &v(&[1.02, 0.0]), d()).unwrap(),
            MembershipAnswer::OutsideEroded
        );
        let cube = BodySpec::HPolytope(HPolytope::cube(2, 1.0).unwrap());
        assert_eq!(
            exact_membership(&cube, &v(&[0.999, 0.999]), d()).unwrap(),
            MembershipAnswer::InsideDilated
        );
        assert!(exact_membership(&cube, &v(&[0.0]), d()).is_err());
    }

    #[test]
    fn support_examples() {
        let c = UnitVector::normalize(&v(&[0.3, -0.4])).unwrap();
        let (val, arg) = exact_support(&BodySpec::unit_ball(2), &c).unwrap();
        assert!((val - 1.0).abs() < 1e-15);
        assert!(arg.dist2(c.as_vector()) < 1e-15);

        let cube = BodySpec::cube(Vector::zeros(3), 1.0).unwrap();
        let c = UnitVector::normalize(&v(&[1.0, 1.0, 1.0])).unwrap();
        let (val, arg) = exact_support(&cube, &c).unwrap();
        assert!((val - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(arg.as_slice(), &[1.0, 1.0, 1.0]);

        let tri = HPolytope::new(
            vec![
                (v(&[1.0, 1.0]), 1.0),
                (v(&[-2.0, 1.0]), 1.0),
                (v(&[1.0, -2.0]), 1.0),
            ],
            Vector::zeros(2),
            0.3,
        )
        .unwrap();
        let (val, arg) = exact_support(
            &BodySpec::HPolytope(tri),
            &UnitVector::new(v(&[0.0, 1.0])).unwrap(),
        )
        .unwrap();
        assert!((val - 1.0).abs() < 1e-12);
        assert!(arg.dist2(&v(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn simplex_geometry_is_tight() {
        let s = BodySpec::simplex(3, 2.0).unwrap();
        let g = s.geometry();
        let rho = g.inner_radius;
        // Incenter is equidistant from x_i = 0 and from the slanted facet.
        let slanted = (2.0 - 3.0 * rho) / 3f64.sqrt();
        assert!((slanted - rho).abs() < 1e-12);
        for vertex in [Vector::zeros(3), v(&[2.0, 0.0, 0.0])] {
            assert!(vertex.dist2(&g.center) <= g.outer_radius + 1e-12);
        }
        assert!(s.support(&v(&[-1.0, -1.0, -1.0])).unwrap().0 == 0.0);
        assert_eq!(
            s.support(&v(&[0.5, 0.5, 0.1])).unwrap().1.as_slice(),
            &[2.0, 0.0, 0.0]
        );
    }

    #[test]
    fn ellipsoid_support_and_separator() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = BodySpec::ellipsoid(v(&[1.0, 0.0]), m).unwrap();
        let (val, arg) = e.support(&v(&[1.0, 0.0])).unwrap();
        assert!((val - 3.0).abs() < 1e-12);
        assert!(arg.dist2(&v(&[3.0, 0.0])) < 1e-12);
        let g = e.geometry();
        assert_eq!((g.inner_radius, g.outer_radius), (1.0, 2.0));
        let y = v(&[2.5, 0.9]);
        let h = e.exact_separator(&y).unwrap().unwrap();
        let (sup, _) = e.support(h.normal.as_vector()).unwrap();
        assert!(sup <= h.offset() + 1e-12);
        assert!(BodySpec::ellipsoid(
            Vector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])
        )
        .is_err());
    }

    #[test]
    fn separators_contain_the_body() {
        let bodies = [
            BodySpec::unit_ball(2),
            BodySpec::cube(v(&[0.5, 0.0]), 1.0).unwrap(),
            BodySpec::simplex(2, 1.0).unwrap(),
            BodySpec::HPolytope(HPolytope::cube(2, 0.7).unwrap()),
        ];
        for b in &bodies {
            for y in [v(&[2.0, 0.3]), v(&[-1.5, -1.5]), v(&[0.1, 3.0])] {
                let h = b.exact_separator(&y).unwrap().unwrap();
                let (sup, _) = b.support(h.normal.as_vector()).unwrap();
                assert!(sup <= h.offset() + 1e-12, "{} at {y:?}", b.name());
            }
            assert!(b.exact_separator(&b.geometry().center).unwrap().is_none());
        }
    }

    #[test]
    fn intersection_membership_and_unsupported_support() {
        let g = ProblemGeometry::centered(2, 0.5, 1.0).unwrap();
        let k = BodySpec::intersection(
            vec![
                BodySpec::unit_ball(2),
                BodySpec::cube(Vector::zeros(2), 0.8).unwrap(),
            ],
            g,
        )
        .unwrap();
        assert!(k.contains(&v(&[0.7, 0.0])));
        assert!(!k.contains(&v(&[0.7, 0.75])));
        assert!(!k.contains(&v(&[0.9, 0.0])));
        assert!(matches!(
            k.support(&v(&[1.0, 0.0])),
            Err(OracleError::Unsupported(_))
        ));
    }
}
