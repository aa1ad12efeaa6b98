//! Seeded generators for test bodies, functions and directions.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::OracleError;
use crate::geometry::{UnitVector, Vector};
use crate::oracle::RandomStream;

use super::{FuncSpec, HPolytope};

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::normalize(&Vector::from_raw(v)) {
            return u;
        }
    }
}

/// Haar-ish random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the distribution does not depend on the QR convention.
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// A randomly rotated box with offsets in `[0.5, 1]` plus `extra_cuts`
/// random facets at distance `[0.5, 1]` from the origin. `B(0, 0.5)` is
/// always inside.
pub fn polytope(
    n: usize,
    extra_cuts: usize,
    stream: &RandomStream,
) -> Result<HPolytope, OracleError> {
    let mut rng = stream.rng();
    let q = rotation(n, &mut rng);
    let mut rows = Vec::with_capacity(2 * n + extra_cuts);
    for j in 0..n {
        let axis = Vector::from_raw(q.column(j).iter().copied().collect());
        rows.push((axis.clone(), rng.random_range(0.5..=1.0)));
        rows.push((-&axis, rng.random_range(0.5..=1.0)));
    }
    for _ in 0..extra_cuts {
        rows.push((
            unit_vector(n, &mut rng).into_vector(),
            rng.random_range(0.5..=1.0),
        ));
    }
    HPolytope::new(rows, Vector::zeros(n), 0.5)
}

/// `xᵀAx` with `A = Qᵀ diag(λ) Q`, `λ` uniform in `[lo, hi]`.
pub fn quadratic(
    n: usize,
    lo: f64,
    hi: f64,
    stream: &RandomStream,
) -> Result<FuncSpec, OracleError> {
    let mut rng = stream.rng();
    let q = rotation(n, &mut rng);
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        rng.random_range(lo..=hi)
    }));
    let a = q.transpose() * lambda * &q;
    let a = (&a + a.transpose()) * 0.5;
    FuncSpec::quadratic(a, Vector::zeros(n), 0.0)
}
