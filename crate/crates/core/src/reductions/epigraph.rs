//! The scaled epigraph `K_f = {(x/2, t/4) : ‖x‖₂ ≤ 1, f(x) ≤ t ≤ 2}` of a
//! convex `f : B(0, 1) → [0, 1]`, which turns function oracles for `f` into
//! set oracles for `K_f ⊂ R^{n+1}` and back.
//!
//! `K_f` contains the cylinder `B(0, ½) × [¼, ½]`, hence the ball of radius
//! `1/8` around `(0, 3/8)`, and lies within `5/8` of that point.

use crate::error::{invalid, OracleError};
use crate::geometry::{HalfSpace, UnitVector, Vector};
use crate::oracle::{
    check_query_dim, check_unit_ball, EvaluationOracle, GradAnswer, MembershipAnswer,
    MembershipOracle, OptimizationAnswer, OptimizationOracle, Precision, ProblemGeometry,
    SeparationAnswer, SeparationOracle, SubgradientOracle,
};

/// Certified geometry of `K_f` in dimension `n + 1`.
pub fn epigraph_geometry(n: usize) -> ProblemGeometry {
    let center = Vector::zeros(n).extended(0.375);
    ProblemGeometry::new(center, 0.125, 0.625).expect("epigraph geometry is valid")
}

/// Tolerance on sampled values of `f` when certifying its range.
const RANGE_SLACK: f64 = 0.05;

/// `K_f` accessed through an EVAL (and, for separation, GRAD) oracle of `f`.
#[derive(Debug, Clone)]
pub struct EpigraphBody<F> {
    f: F,
    n: usize,
}

impl<F: EvaluationOracle> EpigraphBody<F> {
    /// Checks `f` at the origin and at `±e_i` against the range `[0, 1]`.
    /// Convexity puts the maximum on the sphere, so this is a sanity check
    /// rather than a proof.
    pub fn new(f: F) -> Result<Self, OracleError> {
        let n = f.dim();
        let probe = Precision::new(0.01)?;
        let mut points = vec![Vector::zeros(n)];
        for i in 0..n {
            points.push(Vector::basis(n, i));
            points.push(Vector::basis(n, i).scaled(-1.0));
        }
        for p in &points {
            let value = f.evaluate(p, probe)?;
            if !(value >= -RANGE_SLACK && value <= 1.0 + RANGE_SLACK) {
                return Err(invalid(format!(
                    "epigraph needs f with values in [0, 1], got f({p:?}) = {value}"
                )));
            }
        }
        Ok(EpigraphBody { f, n })
    }

    pub fn new_unchecked(f: F) -> Self {
        let n = f.dim();
        EpigraphBody { f, n }
    }

    pub fn function(&self) -> &F {
        &self.f
    }

    pub fn geometry(&self) -> ProblemGeometry {
        epigraph_geometry(self.n)
    }

    /// `(x, t)` if the point satisfies `‖x‖ ≤ 1` and `t ≤ 2`.
    fn unpack(&self, p: &Vector) -> Result<Option<(Vector, f64)>, OracleError> {
        check_query_dim(self.n + 1, p)?;
        let (u, s) = p.split_last();
        let (x, t) = (u.scaled(2.0), 4.0 * s);
        Ok((x.norm2() <= 1.0 && t <= 2.0).then_some((x, t)))
    }
}

impl<F: EvaluationOracle> MembershipOracle for EpigraphBody<F> {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn membership(&self, p: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        let Some((x, t)) = self.unpack(p)? else {
            return Ok(MembershipAnswer::OutsideEroded);
        };
        let alpha = self.f.evaluate(&x, delta.scaled(0.1))?;
        Ok(if alpha <= t {
            MembershipAnswer::InsideDilated
        } else {
            MembershipAnswer::OutsideEroded
        })
    }
}

/// Separation for `K_f` from one GRAD query of `f`: below the graph, the cut
/// is the linearization `t ≥ α + ⟨g, x' − x⟩`, i.e. normal `∝ (2g, −4)`.
impl<F: EvaluationOracle + SubgradientOracle> SeparationOracle for EpigraphBody<F> {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn separate(&self, p: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        check_query_dim(self.n + 1, p)?;
        let (u, s) = p.split_last();
        let normal = if 2.0 * u.norm2() > 1.0 {
            u.extended(0.0)
        } else if 4.0 * s > 2.0 {
            Vector::basis(self.n + 1, self.n)
        } else {
            let answer = self.f.subgradient(&u.scaled(2.0), delta.scaled(0.1))?;
            if answer.value <= 4.0 * s {
                return Ok(SeparationAnswer::InsideDilated);
            }
            answer.subgrad.scaled(2.0).extended(-4.0)
        };
        let normal = UnitVector::normalize(&normal)?;
        Ok(SeparationAnswer::Separator(HalfSpace::new(
            normal,
            p.clone(),
            0.0,
        )?))
    }
}

/// `EVAL(f)` by bisection on `t ∈ [0, 2]` against `MEM(K_f)`.
#[derive(Debug, Clone)]
pub struct EvalFromMemEpigraph<M> {
    mem: M,
    n: usize,
}

/// Bisection steps for precision `δ`: `⌈log₂(2/δ)⌉`.
pub fn eval_from_mem_epigraph_calls(delta: Precision) -> usize {
    (2.0 / delta.value()).log2().ceil() as usize
}

/// Membership precision `δ / (4⌈log₂(2/δ)⌉)` used per bisection step.
pub fn eval_from_mem_epigraph_precision(delta: Precision) -> Precision {
    delta.scaled(1.0 / (4.0 * eval_from_mem_epigraph_calls(delta).max(1) as f64))
}

impl<M: MembershipOracle> EvalFromMemEpigraph<M> {
    pub fn new(mem: M) -> Result<Self, OracleError> {
        let dim = mem.dim();
        if dim < 2 {
            return Err(invalid("an epigraph lives in dimension at least 2"));
        }
        Ok(EvalFromMemEpigraph { mem, n: dim - 1 })
    }

    pub fn membership_oracle(&self) -> &M {
        &self.mem
    }
}

pub fn eval_from_mem_epigraph<M: MembershipOracle>(
    mem: &M,
    y: &Vector,
    delta: Precision,
) -> Result<f64, OracleError> {
    let n = mem.dim() - 1;
    check_query_dim(n, y)?;
    check_unit_ball(y)?;
    let u = y.scaled(0.5);
    let inner = eval_from_mem_epigraph_precision(delta);
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    let mut found = false;
    for _ in 0..eval_from_mem_epigraph_calls(delta) {
        let mid = 0.5 * (lo + hi);
        if mem.membership(&u.extended(mid / 4.0), inner)?.is_inside() {
            hi = mid;
            found = true;
        } else {
            lo = mid;
        }
    }
    Ok(if found {
        0.5 * (lo + hi)
    } else {
        f64::INFINITY
    })
}

impl<M: MembershipOracle> EvaluationOracle for EvalFromMemEpigraph<M> {
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate(&self, y: &Vector, delta: Precision) -> Result<f64, OracleError> {
        eval_from_mem_epigraph(&self.mem, y, delta)
    }
}

/// `MEM(K)` read off a separation oracle.
#[derive(Debug, Clone)]
pub struct MemFromSep<S>(pub S);

impl<S: SeparationOracle> MembershipOracle for MemFromSep<S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        Ok(match self.0.separate(y, delta)? {
            SeparationAnswer::InsideDilated => MembershipAnswer::InsideDilated,
            SeparationAnswer::Separator(_) => MembershipAnswer::OutsideEroded,
        })
    }
}

/// Smallest `|c_t|` accepted from an epigraph cut.
pub const VERTICAL_CUT_TOL: f64 = 1e-9;

/// `GRAD(f)` from `SEP(K_f)`: the cut at a point just below the graph has
/// normal `(c_u, c_t)` with `c_t < 0`, and `2c_u/|c_t|` is a subgradient.
///
/// The value comes from `eval`. The query depth starts at
/// `depth_factor·δ` below the estimated value and doubles twice if the cut
/// is vertical or the point is reported inside.
#[derive(Debug, Clone)]
pub struct GradFromSepEpigraph<S, E> {
    sep: S,
    eval: E,
    n: usize,
    pub depth_factor: f64,
}

impl<S: SeparationOracle + Clone> GradFromSepEpigraph<S, EvalFromMemEpigraph<MemFromSep<S>>> {
    /// Values by bisection against the membership side of `sep`.
    pub fn new(sep: S) -> Result<Self, OracleError> {
        let eval = EvalFromMemEpigraph::new(MemFromSep(sep.clone()))?;
        Self::with_eval(sep, eval)
    }
}

impl<S: SeparationOracle, E: EvaluationOracle> GradFromSepEpigraph<S, E> {
    pub fn with_eval(sep: S, eval: E) -> Result<Self, OracleError> {
        if sep.dim() != eval.dim() + 1 {
            return Err(invalid(format!(
                "epigraph separation in dimension {} does not match a function of {} variables",
                sep.dim(),
                eval.dim()
            )));
        }
        Ok(GradFromSepEpigraph {
            n: eval.dim(),
            sep,
            eval,
            depth_factor: 1.0,
        })
    }

    pub fn separation_oracle(&self) -> &S {
        &self.sep
    }

    pub fn evaluation_oracle(&self) -> &E {
        &self.eval
    }
}

impl<S: SeparationOracle, E: EvaluationOracle> SubgradientOracle for GradFromSepEpigraph<S, E> {
    fn dim(&self) -> usize {
        self.n
    }

    fn subgradient(&self, y: &Vector, delta: Precision) -> Result<GradAnswer, OracleError> {
        check_query_dim(self.n, y)?;
        check_unit_ball(y)?;
        let inner = delta.scaled(0.25);
        let alpha = self.eval.evaluate(y, inner)?;
        if !alpha.is_finite() {
            return Err(OracleError::Precondition(format!(
                "function value at {y:?} is not finite; the epigraph is empty there"
            )));
        }
        let u = y.scaled(0.5);
        let mut depth = self.depth_factor * delta.value();
        let mut vertical = false;
        for _ in 0..3 {
            let p = u.extended((alpha - depth) / 4.0);
            if let SeparationAnswer::Separator(h) = self.sep.separate(&p, inner)? {
                let (c_u, c_t) = h.normal.as_vector().split_last();
                if c_t < -VERTICAL_CUT_TOL {
                    return Ok(GradAnswer {
                        value: alpha,
                        subgrad: c_u.scaled(2.0 / c_t.abs()),
                    });
                }
                vertical = true;
            }
            depth *= 2.0;
        }
        if vertical {
            Err(OracleError::VerticalCut)
        } else {
            Err(OracleError::Inconsistency(format!(
                "points below the estimated value {alpha} at {y:?} are reported inside the epigraph"
            )))
        }
    }
}

/// `GRAD(f*)` from `OPT(K_f)`: maximize `⟨c, x⟩ − t` over `K_f` with one
/// query at `δ/6`; the maximizer's `x` is the subgradient and
/// `⟨c, x⟩ − t` the value.
///
/// `f*` is finite everywhere, so `c` is not restricted to the unit ball.
#[derive(Debug, Clone)]
pub struct ConjugateFromEpigraph<O> {
    opt: O,
    n: usize,
}

impl<O: OptimizationOracle> ConjugateFromEpigraph<O> {
    pub fn new(opt: O) -> Result<Self, OracleError> {
        let dim = opt.dim();
        if dim < 2 {
            return Err(invalid("an epigraph lives in dimension at least 2"));
        }
        Ok(ConjugateFromEpigraph { opt, n: dim - 1 })
    }

    pub fn optimization_oracle(&self) -> &O {
        &self.opt
    }
}

impl<O: OptimizationOracle> SubgradientOracle for ConjugateFromEpigraph<O> {
    fn dim(&self) -> usize {
        self.n
    }

    fn subgradient(&self, c: &Vector, delta: Precision) -> Result<GradAnswer, OracleError> {
        check_query_dim(self.n, c)?;
        // ⟨c, x⟩ − t = ⟨2c, u⟩ − 4s in the coordinates of K_f.
        let objective = UnitVector::normalize(&c.scaled(2.0).extended(-4.0))?;
        match self
            .opt
            .optimize(objective.as_vector(), delta.scaled(1.0 / 6.0))?
        {
            OptimizationAnswer::Maximizer(p) => {
                let (u, s) = p.split_last();
                let x = u.scaled(2.0);
                Ok(GradAnswer {
                    value: c.dot(&x) - 4.0 * s,
                    subgrad: x,
                })
            }
            OptimizationAnswer::EmptyInterior => Err(OracleError::Precondition(
                "the epigraph body was reported to have an empty interior".into(),
            )),
        }
    }
}

impl<O: OptimizationOracle> EvaluationOracle for ConjugateFromEpigraph<O> {
    fn dim(&self) -> usize {
        self.n
    }
    fn evaluate(&self, c: &Vector, delta: Precision) -> Result<f64, OracleError> {
        Ok(self.subgradient(c, delta)?.value)
    }
}
