//! Randomized finite-difference subgradient estimation for Lipschitz convex
//! functions known only through an approximate evaluation oracle.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::bodies::FuncSpec;
use crate::error::{invalid, OracleError};
use crate::geometry::{LinfBox, Vector};
use crate::oracle::{QueryStreams, RandomStream};

/// A real-valued function on `ℝⁿ` queried pointwise.
pub trait ScalarFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &Vector) -> Result<f64, OracleError>;
}

impl ScalarFunction for FuncSpec {
    fn dim(&self) -> usize {
        FuncSpec::dim(self)
    }
    fn value(&self, y: &Vector) -> Result<f64, OracleError> {
        self.exact_eval(y)
    }
}

impl<T: ScalarFunction + ?Sized> ScalarFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, y: &Vector) -> Result<f64, OracleError> {
        (**self).value(y)
    }
}

/// Adapts a closure into a [`ScalarFunction`].
pub struct FnFunction<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&Vector) -> Result<f64, OracleError> + Send + Sync> FnFunction<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnFunction { dim, f }
    }
}

impl<F: Fn(&Vector) -> Result<f64, OracleError> + Send + Sync> ScalarFunction for FnFunction<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &Vector) -> Result<f64, OracleError> {
        (self.f)(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Uniform in `[−ε, ε]`.
    Uniform,
    /// `±ε` with a random sign.
    Sign,
    /// Alternates `−ε, +ε, −ε, …` over successive queries. The estimator
    /// evaluates the lower segment end first, so this is the worst case for
    /// every coordinate difference.
    Alternating,
}

/// Adds bounded evaluation noise of amplitude `eps` to a function.
pub struct NoisyFunction<F> {
    inner: F,
    eps: f64,
    model: NoiseModel,
    streams: QueryStreams,
    calls: AtomicU64,
}

impl<F> NoisyFunction<F> {
    pub fn new(inner: F, eps: f64, model: NoiseModel, stream: RandomStream) -> Self {
        NoisyFunction {
            inner,
            eps,
            model,
            streams: QueryStreams::new(stream),
            calls: AtomicU64::new(0),
        }
    }
}

impl<F: ScalarFunction> ScalarFunction for NoisyFunction<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, y: &Vector) -> Result<f64, OracleError> {
        let exact = self.inner.value(y)?;
        let k = self.calls.fetch_add(1, Ordering::Relaxed);
        let noise = match self.model {
            NoiseModel::Uniform => self
                .streams
                .next_stream()
                .rng()
                .random_range(-self.eps..=self.eps),
            NoiseModel::Sign => {
                if self.streams.next_stream().rng().random_bool(0.5) {
                    self.eps
                } else {
                    -self.eps
                }
            }
            NoiseModel::Alternating => {
                if k % 2 == 0 {
                    -self.eps
                } else {
                    self.eps
                }
            }
        };
        Ok(exact + noise)
    }
}

/// Parameters of one estimate around the base point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub x: Vector,
    /// Half-width of the outer box `B∞(x, r1)`.
    pub r1: f64,
    /// Additive evaluation error.
    pub eps: f64,
    /// ℓ∞ bound on subgradients over `B∞(x, 2 r1)`.
    pub lipschitz: f64,
    /// Half-width of the inner box `B∞(y, r2)`.
    pub r2: f64,
}

impl EstimatorParams {
    /// Uses the default `r2 = sqrt(eps·r1 / (√n·L))`.
    pub fn new(x: Vector, r1: f64, eps: f64, lipschitz: f64) -> Result<Self, OracleError> {
        let n = x.dim() as f64;
        let r2 = (eps * r1 / (n.sqrt() * lipschitz)).sqrt();
        EstimatorParams {
            x,
            r1,
            eps,
            lipschitz,
            r2,
        }
        .validated()
    }

    pub fn with_r2(mut self, r2: f64) -> Result<Self, OracleError> {
        self.r2 = r2;
        self.validated()
    }

    fn validated(self) -> Result<Self, OracleError> {
        for (name, value) in [("r1", self.r1), ("L", self.lipschitz), ("r2", self.r2)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(invalid(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.eps >= 0.0) {
            return Err(invalid(format!(
                "evaluation error must be nonnegative, got {}",
                self.eps
            )));
        }
        if self.r2 > self.r1 {
            return Err(invalid(format!(
                "inner width r2 = {} exceeds outer width r1 = {}; need eps <= r1·√n·L",
                self.r2, self.r1
            )));
        }
        Ok(self)
    }

    /// Bound on `E[ζ]` in the subgradient guarantee.
    pub fn zeta_mean_bound(&self) -> f64 {
        let n = self.x.dim() as f64;
        3.0 * (self.lipschitz * self.eps / self.r1).sqrt() * n.powf(1.25)
    }

    /// The additive `4n·r1·L` term of the subgradient guarantee.
    pub fn additive_term(&self) -> f64 {
        4.0 * self.x.dim() as f64 * self.r1 * self.lipschitz
    }

    /// `n^{3/2}·(r2/r1)·L`.
    pub fn flatness_bound(&self) -> f64 {
        (self.x.dim() as f64).powf(1.5) * (self.r2 / self.r1) * self.lipschitz
    }
}

/// Output of one estimate, with the sampled points for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub gradient: Vector,
    pub y: Vector,
    pub z: Vector,
}

fn sample_points(
    params: &EstimatorParams,
    stream: &RandomStream,
) -> Result<(Vector, Vector), OracleError> {
    let y = stream
        .child(0)
        .uniform_in_box(&LinfBox::new(params.x.clone(), params.r1)?);
    let z = stream
        .child(1)
        .uniform_in_box(&LinfBox::new(y.clone(), params.r2)?);
    Ok((y, z))
}

/// One approximate subgradient from exactly `2n` evaluations.
///
/// Samples `y` uniformly from `B∞(x, r1)` and `z` from `B∞(y, r2)`, then
/// differences `f` across the inner box along each coordinate line through
/// `z`.
pub fn separate_convex_func<F: ScalarFunction + ?Sized>(
    f: &F,
    params: &EstimatorParams,
    stream: &RandomStream,
) -> Result<Estimate, OracleError> {
    crate::geometry::check_dim(f.dim(), params.x.dim())?;
    let (y, z) = sample_points(params, stream)?;
    let inner = LinfBox::new(y.clone(), params.r2)?;
    let mut g = Vec::with_capacity(z.dim());
    for i in 0..z.dim() {
        let (lo, hi) = inner.coordinate_segment(&z, i)?;
        let f_lo = f.value(&lo)?;
        let f_hi = f.value(&hi)?;
        g.push((f_hi - f_lo) / (2.0 * params.r2));
    }
    Ok(Estimate {
        gradient: Vector::from_raw(g),
        y,
        z,
    })
}

/// Monte Carlo estimate of `E_y E_z ‖∇f(z) − g(y)‖₁`, where `g(y)` is the
/// average gradient over `B∞(y, r2)`. Only for functions with a linear
/// gradient, where that average is `∇f(y)`.
pub fn expected_flatness_defect(
    f: &FuncSpec,
    x: &Vector,
    r1: f64,
    r2: f64,
    samples: usize,
    stream: &RandomStream,
) -> Result<f64, OracleError> {
    let Some(hessian) = f.hessian() else {
        return Err(OracleError::Unsupported(format!(
            "flatness defect needs a closed-form linear gradient, {} has none",
            f.name()
        )));
    };
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let outer = LinfBox::new(x.clone(), r1)?;
    let mut total = 0.0;
    for s in 0..samples as u64 {
        let st = stream.child(s);
        let y = st.child(0).uniform_in_box(&outer);
        let z = st.child(1).uniform_in_box(&LinfBox::new(y.clone(), r2)?);
        let dz = nalgebra::DVector::from_column_slice((&z - &y).as_slice());
        total += (&hessian * dz).iter().map(|v| v.abs()).sum::<f64>();
    }
    Ok(total / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn linear_is_exact() {
        let a = v(&[0.3, -1.25, 2.0]);
        let f = FuncSpec::linear(a.clone(), 0.7);
        let p = EstimatorParams::new(v(&[0.1, 0.2, 0.3]), 0.05, 1e-6, 2.0).unwrap();
        for seed in 0..20 {
            let est = separate_convex_func(&f, &p, &RandomStream::new(seed)).unwrap();
            assert!((&est.gradient - &a).norm_inf() <= 1e-9);
        }
    }

    #[test]
    fn quadratic_recovers_two_y() {
        let f = FuncSpec::norm_squared(4);
        let p = EstimatorParams::new(v(&[0.5, -0.5, 0.0, 0.25]), 0.1, 1e-4, 3.0).unwrap();
        let est = separate_convex_func(&f, &p, &RandomStream::new(9)).unwrap();
        let two_y = est.y.scaled(2.0);
        assert!((&est.gradient - &two_y).norm_inf() <= 1e-12);
        assert!(LinfBox::new(p.x.clone(), p.r1)
            .unwrap()
            .contains(&est.y)
            .unwrap());
        assert!(LinfBox::new(est.y.clone(), p.r2)
            .unwrap()
            .contains(&est.z)
            .unwrap());
    }

    #[test]
    fn abs_value_difference_quotient() {
        let f = FuncSpec::max_of_linear(vec![
            (v(&[1.0, 0.0, 0.0]), 0.0),
            (v(&[-1.0, 0.0, 0.0]), 0.0),
        ])
        .unwrap();
        let p = EstimatorParams::new(Vector::zeros(3), 0.1, 1e-4, 1.0).unwrap();
        for seed in 0..50 {
            let g = separate_convex_func(&f, &p, &RandomStream::new(seed))
                .unwrap()
                .gradient;
            assert!(g[0].abs() <= 1.0 + 1e-12);
            assert_eq!((g[1], g[2]), (0.0, 0.0));
        }
    }

    #[test]
    fn uses_exactly_two_n_evaluations() {
        let calls = AtomicU64::new(0);
        let f = FnFunction::new(5, |y: &Vector| {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(y.norm1())
        });
        let p = EstimatorParams::new(Vector::filled(5, 0.3), 0.01, 1e-6, 1.0).unwrap();
        separate_convex_func(&f, &p, &RandomStream::new(0)).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 10);
    }

    #[test]
    fn alternating_noise_hits_the_bound() {
        let f = FuncSpec::linear(v(&[1.0, 2.0]), 0.0);
        let eps = 1e-5;
        let noisy = NoisyFunction::new(
            f.clone(),
            eps,
            NoiseModel::Alternating,
            RandomStream::new(0),
        );
        let p = EstimatorParams::new(Vector::zeros(2), 0.05, eps, 2.0).unwrap();
        let s = RandomStream::new(4);
        let exact = separate_convex_func(&f, &p, &s).unwrap().gradient;
        let got = separate_convex_func(&noisy, &p, &s).unwrap().gradient;
        for i in 0..2 {
            let dev = (got[i] - exact[i]).abs();
            assert!((dev - eps / p.r2).abs() <= 1e-9 * (eps / p.r2));
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(EstimatorParams::new(Vector::zeros(2), 0.0, 1e-4, 1.0).is_err());
        // eps > r1·√n·L forces r2 > r1.
        assert!(EstimatorParams::new(Vector::zeros(2), 1e-3, 1.0, 1.0).is_err());
        let p = EstimatorParams::new(Vector::zeros(2), 0.1, 1e-4, 1.0).unwrap();
        assert!(p.clone().with_r2(0.2).is_err());
        assert!(p.with_r2(0.01).is_ok());
    }

    #[test]
    fn flatness_defect_examples() {
        let s = RandomStream::new(2);
        let x = v(&[0.1, 0.2]);
        let lin = FuncSpec::linear(v(&[1.0, 1.0]), 0.0);
        assert_eq!(
            expected_flatness_defect(&lin, &x, 0.1, 0.01, 100, &s).unwrap(),
            0.0
        );
        let q = FuncSpec::norm_squared(2);
        let tiny = expected_flatness_defect(&q, &x, 0.1, 1e-9, 100, &s).unwrap();
        assert!(tiny < 1e-8);
        // ‖2(z − y)‖₁ with z − y uniform in [−r2, r2]²: mean 2·2·r2/2.
        let d = expected_flatness_defect(&q, &x, 0.1, 0.01, 20_000, &s).unwrap();
        assert!((d - 0.02).abs() < 1e-3);
        assert!(expected_flatness_defect(&FuncSpec::norm(2), &x, 0.1, 0.01, 10, &s).is_err());
    }
}
