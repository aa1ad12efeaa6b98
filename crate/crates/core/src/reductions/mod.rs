//! Reductions between set oracles and function oracles.
//!
//! Three correspondences carry most of the work: membership and separation
//! are the EVAL and GRAD oracles of the indicator `1_K`; validity and
//! optimization are those of the support function `1_K*`; and a function
//! `f` is recovered from the body `K_f` above its graph. The composed chains
//! stack these with separation from membership and the ellipsoid method.

mod chains;
mod epigraph;
mod indicator;
mod support;

pub use chains::{
    opt_from_mem, opt_from_val_layers, sep_from_mem, sep_from_opt_layers, ChainLedgers,
    ChainOptions, OptFromVal, SepFromOpt,
};
pub use epigraph::{
    epigraph_geometry, eval_from_mem_epigraph, eval_from_mem_epigraph_calls,
    eval_from_mem_epigraph_precision, ConjugateFromEpigraph, EpigraphBody, EvalFromMemEpigraph,
    GradFromSepEpigraph, MemFromSep, VERTICAL_CUT_TOL,
};
pub use indicator::{
    eval_from_mem_indicator, grad_from_sep_indicator, mem_from_eval_indicator,
    sep_from_grad_indicator, IndicatorEval, IndicatorGrad, MemFromIndicator, SepFromIndicator,
    INDICATOR_THRESHOLD,
};
pub use support::{
    eval_support_from_val, eval_support_from_val_calls, eval_support_from_val_precision,
    grad_conjugate_from_opt, support_eval_from_opt, val_from_eval_support, EvalSupportFromVal,
    SupportFunction, ValFromEvalSupport,
};

use crate::error::OracleError;
use crate::geometry::Vector;
use crate::oracle::{
    OptimizationAnswer, OptimizationOracle, Precision, ValidityAnswer, ValidityOracle,
};

/// `VAL(K)` from one `OPT(K)` query: some point above iff the maximizer
/// reaches `γ`.
#[derive(Debug, Clone)]
pub struct ValFromOpt<O>(pub O);

impl<O: OptimizationOracle> ValidityOracle for ValFromOpt<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        Ok(match self.0.optimize(c, delta)? {
            OptimizationAnswer::Maximizer(y) if c.dot(&y) >= gamma => ValidityAnswer::SomeAbove,
            _ => ValidityAnswer::AllBelow,
        })
    }
}
