//! Optimization and validity for `K` are subgradient and evaluation oracles
//! for the support function `1_K*(c) = max_{x ∈ K} ⟨c, x⟩` on `‖c‖₂ ≤ 1`.
//!
//! Bodies are expected in a normalized frame, `B(0, r) ⊆ K ⊆ B(0, 1)`, so
//! that `1_K*` takes values in `[0, 1]` there.

use crate::error::{invalid, OracleError};
use crate::geometry::{UnitVector, Vector};
use crate::oracle::{
    check_query_dim, check_unit_ball, EvaluationOracle, GradAnswer, OptimizationAnswer,
    OptimizationOracle, Precision, ValidityAnswer, ValidityOracle,
};

/// `EVAL(1_K*)` and `GRAD(1_K*)` from one `OPT(K)` query at `δ/(3+κ)`.
#[derive(Debug, Clone)]
pub struct SupportFunction<O> {
    opt: O,
    kappa: f64,
}

impl<O: OptimizationOracle> SupportFunction<O> {
    pub fn new(opt: O, kappa: f64) -> Result<Self, OracleError> {
        if !(kappa >= 1.0) {
            return Err(invalid(format!(
                "roundness must be at least 1, got {kappa}"
            )));
        }
        Ok(SupportFunction { opt, kappa })
    }

    pub fn optimization_oracle(&self) -> &O {
        &self.opt
    }

    pub fn inner_precision(&self, delta: Precision) -> Precision {
        delta.scaled(1.0 / (3.0 + self.kappa))
    }
}

/// Value `⟨c, y⟩` and subgradient `y` for the maximizer `y` of `c`.
///
/// At `c = 0` any point of `K` is a subgradient; `e₁` is optimized.
pub fn grad_conjugate_from_opt<O: OptimizationOracle + ?Sized>(
    opt: &O,
    kappa: f64,
    c: &Vector,
    delta: Precision,
) -> Result<GradAnswer, OracleError> {
    check_query_dim(opt.dim(), c)?;
    check_unit_ball(c)?;
    let direction = if c.is_zero() {
        Vector::basis(c.dim(), 0)
    } else {
        UnitVector::normalize(c)?.into_vector()
    };
    match opt.optimize(&direction, delta.scaled(1.0 / (3.0 + kappa)))? {
        OptimizationAnswer::Maximizer(y) => Ok(GradAnswer {
            value: c.dot(&y),
            subgrad: y,
        }),
        OptimizationAnswer::EmptyInterior => Err(OracleError::Precondition(
            "the optimization oracle reported an empty interior".into(),
        )),
    }
}

pub fn support_eval_from_opt<O: OptimizationOracle + ?Sized>(
    opt: &O,
    kappa: f64,
    c: &Vector,
    delta: Precision,
) -> Result<f64, OracleError> {
    Ok(grad_conjugate_from_opt(opt, kappa, c, delta)?.value)
}

impl<O: OptimizationOracle> EvaluationOracle for SupportFunction<O> {
    fn dim(&self) -> usize {
        self.opt.dim()
    }
    fn evaluate(&self, c: &Vector, delta: Precision) -> Result<f64, OracleError> {
        support_eval_from_opt(&self.opt, self.kappa, c, delta)
    }
}

impl<O: OptimizationOracle> crate::oracle::SubgradientOracle for SupportFunction<O> {
    fn dim(&self) -> usize {
        self.opt.dim()
    }
    fn subgradient(&self, c: &Vector, delta: Precision) -> Result<GradAnswer, OracleError> {
        grad_conjugate_from_opt(&self.opt, self.kappa, c, delta)
    }
}

/// `VAL(K)` from one `EVAL(1_K*)` query: all below iff `1_K*(c) ≤ γ`.
#[derive(Debug, Clone)]
pub struct ValFromEvalSupport<E>(pub E);

pub fn val_from_eval_support<E: EvaluationOracle + ?Sized>(
    eval: &E,
    c: &Vector,
    gamma: f64,
    delta: Precision,
) -> Result<ValidityAnswer, OracleError> {
    Ok(if eval.evaluate(c, delta)? <= gamma {
        ValidityAnswer::AllBelow
    } else {
        ValidityAnswer::SomeAbove
    })
}

impl<E: EvaluationOracle> ValidityOracle for ValFromEvalSupport<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        val_from_eval_support(&self.0, c, gamma, delta)
    }
}

/// `EVAL(1_K*)` by bisection on `γ ∈ [−1, 1]` against `VAL(K)`.
#[derive(Debug, Clone)]
pub struct EvalSupportFromVal<V> {
    val: V,
    kappa: f64,
}

/// `⌈log₂(2κ/δ)⌉` validity queries per evaluation.
pub fn eval_support_from_val_calls(kappa: f64, delta: Precision) -> usize {
    (2.0 * kappa / delta.value()).log2().ceil() as usize
}

/// Validity precision `δ / (2(2+κ)·max(1, log₂(1/δ)))`: each answer moves
/// the estimate by at most `2(2+κ)` times its precision.
pub fn eval_support_from_val_precision(kappa: f64, delta: Precision) -> Precision {
    let log = (1.0 / delta.value()).log2().max(1.0);
    delta.scaled(1.0 / (2.0 * (2.0 + kappa) * log))
}

impl<V: ValidityOracle> EvalSupportFromVal<V> {
    pub fn new(val: V, kappa: f64) -> Result<Self, OracleError> {
        if !(kappa >= 1.0) {
            return Err(invalid(format!(
                "roundness must be at least 1, got {kappa}"
            )));
        }
        Ok(EvalSupportFromVal { val, kappa })
    }

    pub fn validity_oracle(&self) -> &V {
        &self.val
    }
}

pub fn eval_support_from_val<V: ValidityOracle + ?Sized>(
    val: &V,
    kappa: f64,
    c: &Vector,
    delta: Precision,
) -> Result<f64, OracleError> {
    check_query_dim(val.dim(), c)?;
    check_unit_ball(c)?;
    let norm = c.norm2();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let direction = c.scaled(1.0 / norm);
    let inner = eval_support_from_val_precision(kappa, delta);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut above = false;
    for _ in 0..eval_support_from_val_calls(kappa, delta) {
        let mid = 0.5 * (lo + hi);
        match val.validity(&direction, mid, inner)? {
            ValidityAnswer::AllBelow => hi = mid,
            ValidityAnswer::SomeAbove => {
                lo = mid;
                above = true;
            }
        }
    }
    // The origin is in K, so the support is nonnegative.
    if !above {
        return Err(OracleError::Inconsistency(format!(
            "validity oracle placed the support of {c:?} below zero although the origin is inside"
        )));
    }
    Ok(norm * 0.5 * (lo + hi))
}

impl<V: ValidityOracle> EvaluationOracle for EvalSupportFromVal<V> {
    fn dim(&self) -> usize {
        self.val.dim()
    }
    fn evaluate(&self, c: &Vector, delta: Precision) -> Result<f64, OracleError> {
        eval_support_from_val(&self.val, self.kappa, c, delta)
    }
}
