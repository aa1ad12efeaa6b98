use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, OracleError};
use crate::geometry::{check_dim, Vector};

use super::BodySpec;

/// A convex function with closed-form value and subgradient.
#[derive(Debug, Clone, PartialEq)]
pub enum FuncSpec {
    /// `⟨a, x⟩ + b`.
    Linear { a: Vector, b: f64 },
    /// `xᵀAx + ⟨b, x⟩ + c` with `A + Aᵀ` positive semidefinite.
    Quadratic { a: DMatrix<f64>, b: Vector, c: f64 },
    /// `max(0, ‖x − center‖₂ − radius)`; radius 0 gives the plain distance.
    BallDistance { center: Vector, radius: f64 },
    /// `max_i ⟨a_i, x⟩ + b_i`.
    MaxOfLinear(Vec<(Vector, f64)>),
    /// 0 on the body, +∞ outside.
    Indicator(Box<BodySpec>),
}

impl FuncSpec {
    pub fn linear(a: Vector, b: f64) -> Self {
        FuncSpec::Linear { a, b }
    }

    pub fn quadratic(a: DMatrix<f64>, b: Vector, c: f64) -> Result<Self, OracleError> {
        let n = b.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(invalid(format!("quadratic matrix must be {n}x{n}")));
        }
        let sym = &a + a.transpose();
        let min_eig = sym.symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-10 * a.amax().max(1.0) {
            return Err(invalid(format!(
                "quadratic is not convex (min eigenvalue of A + Aᵀ is {min_eig})"
            )));
        }
        Ok(FuncSpec::Quadratic { a, b, c })
    }

    /// `‖x‖₂²`.
    pub fn norm_squared(n: usize) -> Self {
        FuncSpec::Quadratic {
            a: DMatrix::identity(n, n),
            b: Vector::zeros(n),
            c: 0.0,
        }
    }

    /// `‖x‖₂`.
    pub fn norm(n: usize) -> Self {
        FuncSpec::BallDistance {
            center: Vector::zeros(n),
            radius: 0.0,
        }
    }

    pub fn max_of_linear(pieces: Vec<(Vector, f64)>) -> Result<Self, OracleError> {
        let Some(first) = pieces.first() else {
            return Err(invalid("max of linear needs at least one piece"));
        };
        let n = first.0.dim();
        for (a, _) in &pieces {
            check_dim(n, a.dim())?;
        }
        Ok(FuncSpec::MaxOfLinear(pieces))
    }

    pub fn dim(&self) -> usize {
        match self {
            FuncSpec::Linear { a, .. } => a.dim(),
            FuncSpec::Quadratic { b, .. } => b.dim(),
            FuncSpec::BallDistance { center, .. } => center.dim(),
            FuncSpec::MaxOfLinear(p) => p[0].0.dim(),
            FuncSpec::Indicator(body) => body.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FuncSpec::Linear { .. } => "linear",
            FuncSpec::Quadratic { .. } => "quadratic",
            FuncSpec::BallDistance { .. } => "ball_distance",
            FuncSpec::MaxOfLinear(_) => "max_of_linear",
            FuncSpec::Indicator(_) => "indicator",
        }
    }

    pub fn exact_eval(&self, y: &Vector) -> Result<f64, OracleError> {
        Ok(self.exact_grad(y)?.0)
    }

    /// Value and a subgradient. Ties in `MaxOfLinear` go to the lowest index;
    /// the indicator reports a zero subgradient.
    pub fn exact_grad(&self, y: &Vector) -> Result<(f64, Vector), OracleError> {
        check_dim(self.dim(), y.dim())?;
        Ok(match self {
            FuncSpec::Linear { a, b } => (a.dot(y) + b, a.clone()),
            FuncSpec::Quadratic { a, b, c } => {
                let yv = DVector::from_column_slice(y.as_slice());
                let ay = a * &yv;
                let value = yv.dot(&ay) + b.dot(y) + c;
                let grad = (&ay + a.transpose() * &yv)
                    .iter()
                    .zip(b.iter())
                    .map(|(g, bi)| g + bi)
                    .collect();
                (value, Vector::from_raw(grad))
            }
            FuncSpec::BallDistance { center, radius } => {
                let d = y - center;
                let dist = d.norm2();
                if dist > *radius && dist > 0.0 {
                    (dist - radius, d.scaled(1.0 / dist))
                } else {
                    (0.0, Vector::zeros(y.dim()))
                }
            }
            FuncSpec::MaxOfLinear(pieces) => {
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (i, (a, b)) in pieces.iter().enumerate() {
                    let v = a.dot(y) + b;
                    if v > best.0 {
                        best = (v, i);
                    }
                }
                (best.0, pieces[best.1].0.clone())
            }
            // Outside, the subgradient slot carries a separating normal.
            FuncSpec::Indicator(body) => match body.exact_separator(y)? {
                None => (0.0, Vector::zeros(y.dim())),
                Some(h) => (f64::INFINITY, h.normal.into_vector()),
            },
        })
    }

    /// Closed-form gradient for the twice-differentiable variants.
    pub fn gradient(&self, y: &Vector) -> Option<Vector> {
        match self {
            FuncSpec::Linear { .. } | FuncSpec::Quadratic { .. } => {
                self.exact_grad(y).ok().map(|g| g.1)
            }
            _ => None,
        }
    }

    /// Euclidean Lipschitz constant where it is finite on all of ℝⁿ.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            FuncSpec::Linear { a, .. } => Some(a.norm2()),
            FuncSpec::BallDistance { .. } => Some(1.0),
            FuncSpec::MaxOfLinear(p) => Some(p.iter().map(|(a, _)| a.norm2()).fold(0.0, f64::max)),
            FuncSpec::Quadratic { .. } | FuncSpec::Indicator(_) => None,
        }
    }

    /// Upper bound on `‖∂f(z)‖∞` over the box `B∞(center, radius)`.
    pub fn linf_lipschitz_on_box(&self, center: &Vector, radius: f64) -> Option<f64> {
        match self {
            FuncSpec::Linear { a, .. } => Some(a.norm_inf()),
            FuncSpec::Quadratic { a, .. } => {
                let h = a + a.transpose();
                let g = self.gradient(center)?;
                let row_sum = (0..h.nrows())
                    .map(|r| h.row(r).iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                Some(g.norm_inf() + radius * row_sum)
            }
            FuncSpec::BallDistance { .. } => Some(1.0),
            FuncSpec::MaxOfLinear(p) => {
                Some(p.iter().map(|(a, _)| a.norm_inf()).fold(0.0, f64::max))
            }
            FuncSpec::Indicator(_) => None,
        }
    }

    /// Hessian of a quadratic (`A + Aᵀ`).
    pub fn hessian(&self) -> Option<DMatrix<f64>> {
        match self {
            FuncSpec::Quadratic { a, .. } => Some(a + a.transpose()),
            FuncSpec::Linear { a, .. } => Some(DMatrix::zeros(a.dim(), a.dim())),
            _ => None,
        }
    }
}
