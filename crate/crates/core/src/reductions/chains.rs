//! Composed reductions between set oracles.
//!
//! Chains work in the normalized frame of the body (`B(0, r) ⊆ K ⊆ B(0, 1)`
//! after recentering and scaling) and translate queries and answers at the
//! boundary. Every layer is wrapped in its own [`QueryLedger`], so a chain's
//! full call tree can be inspected through [`ChainLedgers`].

use std::sync::Arc;

use crate::cutting_plane::{CuttingPlaneOptimizer, OptimizerConfig};
use crate::error::{invalid, OracleError};
use crate::geometry::{HalfSpace, UnitVector, Vector};
use crate::oracle::{
    check_query_dim, AffineFrame, Counted, LocalView, MembershipOracle, OptimizationAnswer,
    OptimizationOracle, OracleKind, Precision, ProblemGeometry, QueryLedger, RandomStream,
    SeparationAnswer, SeparationOracle, SubgradientOracle, ValidityOracle,
};
use crate::separation::{SepFromMem, SeparatorConfig, SlackMode};

use super::epigraph::{
    epigraph_geometry, ConjugateFromEpigraph, EpigraphBody, GradFromSepEpigraph,
};
use super::support::{EvalSupportFromVal, SupportFunction};

/// Smoothing radius for separators inside chains, in the normalized frame.
///
/// A zero-slack cut from the subgradient estimator can cut into `K` by about
/// `L·r1` near a kink, which with the schedule's `r1` is several times the
/// optimizer's target accuracy at a vertex optimum.
pub const CHAIN_R1: f64 = 1e-3;

/// Knobs shared by the chains. Separation from membership always uses the
/// practical schedule; these override parts of it.
#[derive(Debug, Clone)]
pub struct ChainOptions {
    pub stream: RandomStream,
    /// Membership precision of the separator, default `1e-4`.
    pub sep_eps: Option<f64>,
    pub slack_mode: SlackMode,
    pub r1: Option<f64>,
    pub retries: Option<usize>,
    pub sep_delta_exponent: Option<i32>,
}

impl ChainOptions {
    pub fn new(stream: RandomStream) -> Self {
        ChainOptions {
            stream,
            sep_eps: None,
            slack_mode: SlackMode::Anchored,
            r1: None,
            retries: None,
            sep_delta_exponent: None,
        }
    }

    pub fn separator_config(&self, geometry: &ProblemGeometry) -> SeparatorConfig {
        let mut cfg = SeparatorConfig::practical(geometry.normalized());
        cfg.mode = self.slack_mode;
        if let Some(eps) = self.sep_eps {
            cfg.eps = eps;
        }
        cfg.r1_override = self.r1;
        if let Some(retries) = self.retries {
            cfg.retries = retries;
        }
        cfg
    }

    /// Separator settings for separators inside chains, whose cuts feed an
    /// optimizer or a gradient estimate: `r1` is capped at [`CHAIN_R1`]
    /// unless overridden.
    pub fn chain_separator_config(&self, geometry: &ProblemGeometry) -> SeparatorConfig {
        let mut cfg = self.separator_config(geometry);
        if cfg.r1_override.is_none() {
            cfg.r1_override = Some(cfg.r1().min(CHAIN_R1));
        }
        cfg
    }

    pub fn optimizer_config(&self, eps: f64) -> Result<OptimizerConfig, OracleError> {
        let mut cfg = OptimizerConfig::new(eps)?;
        if let Some(k) = self.sep_delta_exponent {
            cfg.sep_delta_exponent = k;
        }
        Ok(cfg)
    }
}

/// Named per-layer ledgers, innermost first.
#[derive(Debug, Clone, Default)]
pub struct ChainLedgers {
    layers: Vec<(&'static str, Arc<QueryLedger>)>,
}

impl ChainLedgers {
    fn wrap<O>(&mut self, name: &'static str, oracle: O) -> Counted<O> {
        let ledger = QueryLedger::new();
        self.layers.push((name, ledger.clone()));
        Counted::new(oracle, ledger)
    }

    pub fn layers(&self) -> &[(&'static str, Arc<QueryLedger>)] {
        &self.layers
    }

    pub fn get(&self, name: &str) -> Option<&Arc<QueryLedger>> {
        self.layers.iter().find(|(n, _)| *n == name).map(|(_, l)| l)
    }

    /// Calls of `kind` recorded at layer `name`, 0 for unknown layers.
    pub fn total(&self, name: &str, kind: OracleKind) -> u64 {
        self.get(name).map_or(0, |l| l.total(kind))
    }
}

/// Separation from membership with the practical schedule.
pub fn sep_from_mem<M: MembershipOracle>(
    mem: M,
    geometry: &ProblemGeometry,
    options: &ChainOptions,
) -> SepFromMem<M> {
    SepFromMem::new(
        mem,
        geometry,
        options.separator_config(geometry),
        options.stream.clone(),
    )
}

/// The ellipsoid method over separation from membership.
pub fn opt_from_mem<M: MembershipOracle>(
    mem: M,
    geometry: &ProblemGeometry,
    options: &ChainOptions,
) -> Result<CuttingPlaneOptimizer<SepFromMem<M>>, OracleError> {
    let sep = SepFromMem::new(
        mem,
        geometry,
        options.chain_separator_config(geometry),
        options.stream.clone(),
    );
    Ok(CuttingPlaneOptimizer::new(
        sep,
        geometry.clone(),
        options.optimizer_config(0.01)?,
    ))
}

/// Optimization from validity:
/// `VAL(K) → EVAL(1_K*) → MEM(K_{1_K*}) → SEP(K_{1_K*}) → GRAD(1_K*)`,
/// whose subgradient at `c` is the maximizer.
///
/// `1_K*` is positively homogeneous, so the subgradient is taken at `c/2`:
/// at `‖c‖ = 1` the query would sit on the side wall of the epigraph body,
/// where cuts are nearly vertical.
pub struct OptFromVal {
    grad: Box<dyn SubgradientOracle>,
    frame: AffineFrame,
    ledgers: ChainLedgers,
    n: usize,
}

/// Layer names of [`OptFromVal`].
pub mod opt_from_val_layers {
    pub const VAL: &str = "body.VAL";
    pub const SUPPORT_EVAL: &str = "support.EVAL";
    pub const EPIGRAPH_MEM: &str = "epigraph.MEM";
    pub const EPIGRAPH_SEP: &str = "epigraph.SEP";
    pub const SUPPORT_GRAD: &str = "support.GRAD";
}

impl OptFromVal {
    pub fn new<V: ValidityOracle + 'static>(
        val: V,
        geometry: &ProblemGeometry,
        options: &ChainOptions,
    ) -> Result<Self, OracleError> {
        use opt_from_val_layers::*;
        let n = geometry.dim();
        check_dim_match(n, val.dim())?;
        let frame = geometry.frame();
        let kappa = geometry.kappa();
        let mut ledgers = ChainLedgers::default();
        let local = ledgers.wrap(VAL, LocalView::new(val, frame.clone()));
        let eval = Arc::new(ledgers.wrap(SUPPORT_EVAL, EvalSupportFromVal::new(local, kappa)?));
        let epi = ledgers.wrap(
            EPIGRAPH_MEM,
            EpigraphBody::new(eval.clone()).map_err(|e| e.context("opt_from_val"))?,
        );
        let g_f = epigraph_geometry(n);
        let sep = ledgers.wrap(
            EPIGRAPH_SEP,
            SepFromMem::new(
                epi,
                &g_f,
                options.chain_separator_config(&g_f),
                options.stream.clone(),
            ),
        );
        let grad = ledgers.wrap(SUPPORT_GRAD, GradFromSepEpigraph::with_eval(sep, eval)?);
        Ok(OptFromVal {
            grad: Box::new(grad),
            frame,
            ledgers,
            n,
        })
    }

    pub fn ledgers(&self) -> &ChainLedgers {
        &self.ledgers
    }
}

impl OptimizationOracle for OptFromVal {
    fn dim(&self) -> usize {
        self.n
    }

    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        check_query_dim(self.n, c)?;
        let direction = UnitVector::normalize(c)?;
        let local_delta = Precision::saturating(delta.value() / self.frame.scale);
        let answer = self
            .grad
            .subgradient(&direction.as_vector().scaled(0.5), local_delta.scaled(0.25))
            .map_err(|e| e.context("opt_from_val"))?;
        Ok(OptimizationAnswer::Maximizer(
            self.frame.to_global(&answer.subgrad),
        ))
    }
}

/// Separation from optimization:
/// `OPT(K) → EVAL(1_K*) → MEM(K_{1_K*}) → SEP → OPT(K_{1_K*}) → GRAD(1_K)`.
///
/// `1_K` is the conjugate of `1_K*`; at `y ∉ K` its value
/// `max_{‖x‖≤1} ⟨y, x⟩ − 1_K*(x)` is positive and the maximizing `x` is an
/// outward normal.
pub struct SepFromOpt {
    conjugate: Box<dyn SubgradientOracle>,
    frame: AffineFrame,
    ledgers: ChainLedgers,
    n: usize,
}

/// Layer names of [`SepFromOpt`].
pub mod sep_from_opt_layers {
    pub const OPT: &str = "body.OPT";
    pub const SUPPORT_EVAL: &str = "support.EVAL";
    pub const EPIGRAPH_MEM: &str = "epigraph.MEM";
    pub const EPIGRAPH_SEP: &str = "epigraph.SEP";
    pub const EPIGRAPH_OPT: &str = "epigraph.OPT";
}

impl SepFromOpt {
    pub fn new<O: OptimizationOracle + 'static>(
        opt: O,
        geometry: &ProblemGeometry,
        options: &ChainOptions,
    ) -> Result<Self, OracleError> {
        use sep_from_opt_layers::*;
        let n = geometry.dim();
        check_dim_match(n, opt.dim())?;
        let frame = geometry.frame();
        let mut ledgers = ChainLedgers::default();
        let local = ledgers.wrap(OPT, LocalView::new(opt, frame.clone()));
        let support = ledgers.wrap(SUPPORT_EVAL, SupportFunction::new(local, geometry.kappa())?);
        let epi = ledgers.wrap(
            EPIGRAPH_MEM,
            EpigraphBody::new(support).map_err(|e| e.context("sep_from_opt"))?,
        );
        let g_f = epigraph_geometry(n);
        let sep = ledgers.wrap(
            EPIGRAPH_SEP,
            SepFromMem::new(
                epi,
                &g_f,
                options.chain_separator_config(&g_f),
                options.stream.clone(),
            ),
        );
        let opt_f = ledgers.wrap(
            EPIGRAPH_OPT,
            CuttingPlaneOptimizer::new(sep, g_f, options.optimizer_config(0.01)?),
        );
        Ok(SepFromOpt {
            conjugate: Box::new(ConjugateFromEpigraph::new(opt_f)?),
            frame,
            ledgers,
            n,
        })
    }

    pub fn ledgers(&self) -> &ChainLedgers {
        &self.ledgers
    }
}

impl SeparationOracle for SepFromOpt {
    fn dim(&self) -> usize {
        self.n
    }

    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        check_query_dim(self.n, y)?;
        let local_delta = Precision::saturating(delta.value() / self.frame.scale);
        let answer = self
            .conjugate
            .subgradient(&self.frame.to_local(y), local_delta)
            .map_err(|e| e.context("sep_from_opt"))?;
        if answer.value <= local_delta.value() || answer.subgrad.is_zero() {
            return Ok(SeparationAnswer::InsideDilated);
        }
        let normal = UnitVector::normalize(&answer.subgrad)?;
        Ok(SeparationAnswer::Separator(HalfSpace::new(
            normal,
            y.clone(),
            0.0,
        )?))
    }
}

fn check_dim_match(expected: usize, got: usize) -> Result<(), OracleError> {
    if expected == got {
        Ok(())
    } else {
        Err(invalid(format!(
            "oracle dimension {got} does not match geometry dimension {expected}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{BodySpec, ExactBody, ExactFunction, FuncSpec};
    use crate::oracle::EvaluationOracle;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn d(x: f64) -> Precision {
        Precision::new(x).unwrap()
    }

    #[test]
    fn opt_from_mem_on_the_disk() {
        let k = ExactBody::new(BodySpec::unit_ball(2));
        let g = k.spec().geometry();
        let opt = opt_from_mem(k, &g, &ChainOptions::new(RandomStream::new(5))).unwrap();
        match opt.optimize(&v(&[0.0, 1.0]), d(0.01)).unwrap() {
            OptimizationAnswer::Maximizer(y) => assert!(y[1] >= 0.98, "{y:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conjugate_of_the_squared_norm() {
        // f = ‖x‖² on the unit ball: f*(c) = ‖c‖²/4 with maximizer c/2.
        let epi = EpigraphBody::new(ExactFunction::new(FuncSpec::norm_squared(2))).unwrap();
        let g_f = epi.geometry();
        let opt = CuttingPlaneOptimizer::new(epi, g_f, OptimizerConfig::new(0.01).unwrap());
        let conj = ConjugateFromEpigraph::new(opt).unwrap();
        let c = v(&[0.8, -0.4]);
        let answer = conj.subgradient(&c, d(1e-3)).unwrap();
        assert!((answer.value - 0.2).abs() <= 6e-3, "{}", answer.value);
        assert!(
            answer.subgrad.dist2(&v(&[0.4, -0.2])) <= 0.05,
            "{:?}",
            answer.subgrad
        );
        assert!((conj.evaluate(&c, d(1e-3)).unwrap() - 0.2).abs() <= 6e-3);
    }

    #[test]
    fn opt_from_val_on_the_square() {
        let k = ExactBody::new(BodySpec::cube(Vector::zeros(2), 1.0).unwrap());
        let g = k.spec().geometry();
        let opt = OptFromVal::new(k, &g, &ChainOptions::new(RandomStream::new(1))).unwrap();
        let c = v(&[1.0, 0.0]);
        match opt.optimize(&c, d(0.01)).unwrap() {
            OptimizationAnswer::Maximizer(y) => assert!((c.dot(&y) - 1.0).abs() <= 0.05, "{y:?}"),
            other => panic!("{other:?}"),
        }
        assert!(
            opt.ledgers()
                .total(opt_from_val_layers::VAL, OracleKind::Val)
                > 0
        );
    }

    #[test]
    fn sep_from_opt_cuts_off_a_far_point() {
        let k = ExactBody::new(BodySpec::unit_ball(2));
        let g = k.spec().geometry();
        let sep = SepFromOpt::new(k, &g, &ChainOptions::new(RandomStream::new(2))).unwrap();
        match sep.separate(&v(&[1.5, 0.0]), d(0.01)).unwrap() {
            SeparationAnswer::Separator(h) => {
                assert!(
                    h.normal.as_vector()[0] >= 15f64.to_radians().cos(),
                    "{:?}",
                    h.normal
                );
                assert!(h.offset() >= 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            sep.separate(&v(&[0.2, 0.1]), d(0.01)).unwrap(),
            SeparationAnswer::InsideDilated
        );
        assert!(
            sep.ledgers()
                .total(sep_from_opt_layers::OPT, OracleKind::Opt)
                > 0
        );
    }
}
