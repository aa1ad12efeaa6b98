//! Optimization from separation with the central-cut ellipsoid method, and
//! the binary-search equivalence between optimization and violation.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, OracleError};
use crate::geometry::{check_dim, HalfSpace, UnitVector, Vector};
use crate::oracle::{
    check_query_dim, OptimizationAnswer, OptimizationOracle, Precision, ProblemGeometry,
    SeparationAnswer, SeparationOracle, ViolationAnswer, ViolationOracle,
};

/// `{center + J u : ‖u‖₂ ≤ 1}`, i.e. shape matrix `P = J Jᵀ`.
///
/// The factor is updated instead of `P`, so the shape stays symmetric
/// positive semidefinite by construction even when the ellipsoid becomes
/// extremely flat.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidState {
    pub center: Vector,
    pub factor: DMatrix<f64>,
    pub iteration: usize,
}

/// Log-volume decrease of one central cut in dimension `n`:
/// `ln((n+1)/n) − ((n−1)/2)·ln(n²/(n²−1))`, and `ln 2` for `n = 1`.
pub fn central_cut_log_decrement(n: usize) -> f64 {
    if n == 1 {
        return std::f64::consts::LN_2;
    }
    let nf = n as f64;
    ((nf + 1.0) / nf).ln() - 0.5 * (nf - 1.0) * (nf * nf / (nf * nf - 1.0)).ln()
}

impl EllipsoidState {
    pub fn ball(center: Vector, radius: f64) -> Self {
        let n = center.dim();
        EllipsoidState {
            center,
            factor: DMatrix::identity(n, n) * radius,
            iteration: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// `P = J Jᵀ`.
    pub fn shape(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }

    /// `½·ln det P = ln |det J|`: the log-volume up to the unit-ball constant.
    pub fn half_log_det(&self) -> Result<f64, OracleError> {
        let det = self.factor.clone().lu().determinant().abs();
        if det > 0.0 && det.is_finite() {
            Ok(det.ln())
        } else {
            // LU underflows for very flat ellipsoids; fall back to the
            // singular values, whose logs sum without underflow.
            let sv = self.factor.clone().svd(false, false).singular_values;
            let total: f64 = sv.iter().map(|s| s.ln()).sum();
            if total.is_finite() {
                Ok(total)
            } else {
                Err(OracleError::IndefiniteShape(self.iteration))
            }
        }
    }

    /// `max_{y ∈ E} ⟨c, y⟩`.
    pub fn support(&self, c: &Vector) -> f64 {
        let cv = DVector::from_column_slice(c.as_slice());
        c.dot(&self.center) + (self.factor.transpose() * cv).norm()
    }

    pub fn contains(&self, y: &Vector) -> Result<bool, OracleError> {
        let d = DVector::from_column_slice((y - &self.center).as_slice());
        let u = self
            .factor
            .clone()
            .lu()
            .solve(&d)
            .ok_or(OracleError::IndefiniteShape(self.iteration))?;
        Ok(u.norm() <= 1.0 + 1e-12)
    }
}

/// Minimum-volume ellipsoid containing `{y ∈ E : ⟨normal, y − center⟩ ≤ 0}`.
///
/// Only the halfspace's normal is used: the cut always passes through the
/// current center. In one dimension this is interval halving.
pub fn ellipsoid_cut(state: &EllipsoidState, h: &HalfSpace) -> Result<EllipsoidState, OracleError> {
    let n = state.dim();
    check_dim(n, h.dim())?;
    let g = DVector::from_column_slice(h.normal.as_vector().as_slice());
    let iteration = state.iteration + 1;
    if n == 1 {
        let half_width = state.factor[(0, 0)].abs();
        let center = Vector::from_raw(vec![state.center[0] - 0.5 * half_width * g[0].signum()]);
        return Ok(EllipsoidState {
            center,
            factor: &state.factor * 0.5,
            iteration,
        });
    }
    let nf = n as f64;
    let w = state.factor.transpose() * &g;
    let w_norm = w.norm();
    if !(w_norm > 0.0) || !w_norm.is_finite() {
        return Err(OracleError::IndefiniteShape(state.iteration));
    }
    let p = w / w_norm;
    let jp = &state.factor * &p;
    let center = Vector::from_raw(
        state
            .center
            .iter()
            .zip(jp.iter())
            .map(|(c, b)| c - b / (nf + 1.0))
            .collect(),
    );
    let beta = 1.0 - ((nf - 1.0) / (nf + 1.0)).sqrt();
    let factor = (&state.factor - (&jp * p.transpose()) * beta) * (nf / (nf * nf - 1.0).sqrt());
    if factor.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::IndefiniteShape(iteration));
    }
    Ok(EllipsoidState {
        center,
        factor,
        iteration,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Target accuracy `ε ∈ (0, 1)`, relative to the outer radius.
    pub eps: f64,
    pub max_iters: Option<usize>,
    pub sep_delta: Option<Precision>,
    /// Exponent in the default `sep_delta = (ε/(nκ))^k`.
    pub sep_delta_exponent: i32,
    /// Stop once the incumbent is within `ε‖c‖r` of `max_{y∈E} ⟨c, y⟩`.
    pub gap_stop: bool,
}

impl OptimizerConfig {
    pub fn new(eps: f64) -> Result<Self, OracleError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!(
                "optimizer accuracy must lie in (0, 1), got {eps}"
            )));
        }
        Ok(OptimizerConfig {
            eps,
            max_iters: None,
            sep_delta: None,
            sep_delta_exponent: 3,
            gap_stop: true,
        })
    }

    /// `⌈2n(n+1)·ln(R/(rε))⌉` unless overridden.
    pub fn max_iters(&self, geometry: &ProblemGeometry) -> usize {
        self.max_iters.unwrap_or_else(|| {
            let n = geometry.dim() as f64;
            let bound = 2.0 * n * (n + 1.0) * (geometry.kappa() / self.eps).ln();
            (bound.ceil() as usize).max(1)
        })
    }

    pub fn sep_delta(&self, geometry: &ProblemGeometry) -> Precision {
        self.sep_delta.unwrap_or_else(|| {
            let base = self.eps / (geometry.dim() as f64 * geometry.kappa());
            Precision::saturating(base.powi(self.sep_delta_exponent))
        })
    }
}

/// Diagnostics of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub answer: OptimizationAnswer,
    pub iterations: usize,
    pub sep_calls: usize,
    pub feasible_points: usize,
    pub final_half_log_det: f64,
}

/// Maximizes `⟨c, ·⟩` over `K` given a separation oracle and the geometry.
pub fn optimize_linear<S: SeparationOracle + ?Sized>(
    cfg: &OptimizerConfig,
    sep: &S,
    geometry: &ProblemGeometry,
    c: &Vector,
) -> Result<OptimizationAnswer, OracleError> {
    Ok(optimize_linear_traced(cfg, sep, geometry, c)?.answer)
}

pub fn optimize_linear_traced<S: SeparationOracle + ?Sized>(
    cfg: &OptimizerConfig,
    sep: &S,
    geometry: &ProblemGeometry,
    c: &Vector,
) -> Result<OptimizationTrace, OracleError> {
    let n = geometry.dim();
    check_dim(n, sep.dim())?;
    check_query_dim(n, c)?;
    let max_iters = cfg.max_iters(geometry);
    let sep_delta = cfg.sep_delta(geometry);
    // vol(E) < vol(B(·, rε)) ⇔ ½ ln det P < n·ln(rε).
    let threshold = n as f64 * (geometry.inner_radius * cfg.eps).ln();
    let objective_cut = if c.is_zero() {
        None
    } else {
        Some(UnitVector::normalize(c)?.negated())
    };

    let mut state = EllipsoidState::ball(geometry.center.clone(), geometry.outer_radius);
    let mut best: Option<(f64, Vector)> = None;
    let mut feasible_points = 0;
    let mut sep_calls = 0;
    let mut half_log_det = state.half_log_det()?;
    let mut converged = false;
    let gap_tol = cfg.eps * c.norm2() * geometry.inner_radius;
    while state.iteration < max_iters {
        if half_log_det < threshold {
            converged = true;
            break;
        }
        // Every point of K beating the incumbent lies in E, so the support
        // of E bounds the optimum. Without this stop a smooth optimum makes
        // the objective cut repeat until E is numerically degenerate.
        if let (true, Some((b, _))) = (cfg.gap_stop, &best) {
            if state.support(c) - b <= gap_tol {
                converged = true;
                break;
            }
        }
        sep_calls += 1;
        let normal = match sep.separate(&state.center, sep_delta)? {
            SeparationAnswer::InsideDilated => {
                feasible_points += 1;
                let value = c.dot(&state.center);
                if best.as_ref().map_or(true, |(b, _)| value > *b) {
                    best = Some((value, state.center.clone()));
                }
                match &objective_cut {
                    Some(normal) => normal.clone(),
                    None => break,
                }
            }
            SeparationAnswer::Separator(h) => h.normal,
        };
        let h = HalfSpace::new(normal, state.center.clone(), 0.0)?;
        state = ellipsoid_cut(&state, &h)?;
        half_log_det = state.half_log_det()?;
    }
    if !converged && half_log_det < threshold {
        converged = true;
    }
    let answer = match best {
        Some((_, y)) => OptimizationAnswer::Maximizer(y),
        None if converged => OptimizationAnswer::EmptyInterior,
        None => return Err(OracleError::MaxItersExhausted(max_iters)),
    };
    Ok(OptimizationTrace {
        answer,
        iterations: state.iteration,
        sep_calls,
        feasible_points,
        final_half_log_det: half_log_det,
    })
}

/// An optimization oracle backed by the ellipsoid method.
///
/// A query at precision `δ` runs with `ε = δ/(R + r)`, so that for unit `c`
/// the objective gap `ε‖c‖(R + r)` is at most `δ`.
pub struct CuttingPlaneOptimizer<S> {
    sep: S,
    geometry: ProblemGeometry,
    config: OptimizerConfig,
}

impl<S: SeparationOracle> CuttingPlaneOptimizer<S> {
    pub fn new(sep: S, geometry: ProblemGeometry, config: OptimizerConfig) -> Self {
        CuttingPlaneOptimizer {
            sep,
            geometry,
            config,
        }
    }

    pub fn separation_oracle(&self) -> &S {
        &self.sep
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    fn query_config(&self, delta: Precision) -> OptimizerConfig {
        let mut cfg = self.config.clone();
        let span = self.geometry.outer_radius + self.geometry.inner_radius;
        cfg.eps = (delta.value() / span).min(0.5);
        cfg
    }
}

impl<S: SeparationOracle> OptimizationOracle for CuttingPlaneOptimizer<S> {
    fn dim(&self) -> usize {
        self.geometry.dim()
    }

    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        optimize_linear(&self.query_config(delta), &self.sep, &self.geometry, c)
    }
}

/// Number of violation queries used by [`opt_from_viol_query`] before the
/// fallback query: `⌈log₂(2/δ)⌉`.
pub fn opt_from_viol_calls(delta: f64) -> usize {
    (2.0 / delta).log2().ceil().max(0.0) as usize
}

/// Optimization by bisection on the threshold `γ ∈ [−1, 1]`, for bodies in
/// the unit ball and unit `c`.
///
/// Keeps the last witness. If no query produced one, asks once more at
/// `γ = −1` and reports an empty interior if that fails too.
pub fn opt_from_viol_query<V: ViolationOracle + ?Sized>(
    viol: &V,
    c: &Vector,
    delta: f64,
) -> Result<OptimizationAnswer, OracleError> {
    if !(delta > 0.0) {
        return Err(invalid(format!("precision must be positive, got {delta}")));
    }
    let inner = Precision::saturating(delta);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut witness = None;
    let check = |y: &Vector, gamma: f64| -> Result<(), OracleError> {
        let value = c.dot(y);
        if value < gamma - inner.value() - 1e-12 {
            Err(OracleError::Inconsistency(format!(
                "violation witness has ⟨c, y⟩ = {value} below γ − δ = {}",
                gamma - inner.value()
            )))
        } else {
            Ok(())
        }
    };
    for _ in 0..opt_from_viol_calls(delta) {
        let mid = 0.5 * (lo + hi);
        match viol.violation(c, mid, inner)? {
            ViolationAnswer::Witness(y) => {
                check(&y, mid)?;
                lo = mid;
                witness = Some(y);
            }
            ViolationAnswer::AllBelow => hi = mid,
        }
    }
    if witness.is_none() {
        if let ViolationAnswer::Witness(y) = viol.violation(c, -1.0, inner)? {
            check(&y, -1.0)?;
            witness = Some(y);
        }
    }
    Ok(match witness {
        Some(y) => OptimizationAnswer::Maximizer(y),
        None => OptimizationAnswer::EmptyInterior,
    })
}

/// OPT from VIOL for a body inside the unit ball.
pub struct OptFromViol<V> {
    viol: V,
}

pub fn opt_from_viol<V: ViolationOracle>(viol: V) -> OptFromViol<V> {
    OptFromViol { viol }
}

impl<V: ViolationOracle> OptimizationOracle for OptFromViol<V> {
    fn dim(&self) -> usize {
        self.viol.dim()
    }
    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        opt_from_viol_query(&self.viol, c, delta.value())
    }
}

/// VIOL from a single OPT query.
pub struct ViolFromOpt<O> {
    opt: O,
}

pub fn viol_from_opt<O: OptimizationOracle>(opt: O) -> ViolFromOpt<O> {
    ViolFromOpt { opt }
}

impl<O: OptimizationOracle> ViolationOracle for ViolFromOpt<O> {
    fn dim(&self) -> usize {
        self.opt.dim()
    }
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        Ok(match self.opt.optimize(c, delta)? {
            OptimizationAnswer::Maximizer(y) if c.dot(&y) >= gamma - delta.value() => {
                ViolationAnswer::Witness(y)
            }
            _ => ViolationAnswer::AllBelow,
        })
    }
}
