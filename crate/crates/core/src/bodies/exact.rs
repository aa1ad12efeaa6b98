use std::sync::Arc;

use crate::error::OracleError;
use crate::geometry::Vector;
use crate::oracle::{
    check_query_dim, check_unit_ball, EvaluationOracle, GradAnswer, MembershipAnswer,
    MembershipOracle, OptimizationAnswer, OptimizationOracle, Precision, SeparationAnswer,
    SeparationOracle, SubgradientOracle, ValidityAnswer, ValidityOracle, ViolationAnswer,
    ViolationOracle,
};

use super::{exact_membership, BodySpec, FuncSpec};

/// All set oracles of a reference body, answered exactly.
#[derive(Debug, Clone)]
pub struct ExactBody {
    spec: Arc<BodySpec>,
}

impl ExactBody {
    pub fn new(spec: BodySpec) -> Self {
        ExactBody {
            spec: Arc::new(spec),
        }
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }
}

impl MembershipOracle for ExactBody {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        exact_membership(&self.spec, y, delta)
    }
}

impl SeparationOracle for ExactBody {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn separate(&self, y: &Vector, _delta: Precision) -> Result<SeparationAnswer, OracleError> {
        Ok(match self.spec.exact_separator(y)? {
            Some(h) => SeparationAnswer::Separator(h),
            None => SeparationAnswer::InsideDilated,
        })
    }
}

impl OptimizationOracle for ExactBody {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn optimize(&self, c: &Vector, _delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        Ok(OptimizationAnswer::Maximizer(self.spec.support(c)?.1))
    }
}

impl ViolationOracle for ExactBody {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        _delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        let (value, arg) = self.spec.support(c)?;
        Ok(if value >= gamma {
            ViolationAnswer::Witness(arg)
        } else {
            ViolationAnswer::AllBelow
        })
    }
}

impl ValidityOracle for ExactBody {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        _delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        let (value, _) = self.spec.support(c)?;
        Ok(if value > gamma {
            ValidityAnswer::SomeAbove
        } else {
            ValidityAnswer::AllBelow
        })
    }
}

/// EVAL and GRAD oracles of a reference function on the unit ball.
#[derive(Debug, Clone)]
pub struct ExactFunction {
    spec: Arc<FuncSpec>,
}

impl ExactFunction {
    pub fn new(spec: FuncSpec) -> Self {
        ExactFunction {
            spec: Arc::new(spec),
        }
    }

    pub fn spec(&self) -> &FuncSpec {
        &self.spec
    }

    // Indicators are defined everywhere, everything else on the unit ball.
    fn check_domain(&self, y: &Vector) -> Result<(), OracleError> {
        match *self.spec {
            FuncSpec::Indicator(_) => Ok(()),
            _ => check_unit_ball(y),
        }
    }
}

impl EvaluationOracle for ExactFunction {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn evaluate(&self, y: &Vector, _delta: Precision) -> Result<f64, OracleError> {
        check_query_dim(self.spec.dim(), y)?;
        self.check_domain(y)?;
        self.spec.exact_eval(y)
    }
}

impl SubgradientOracle for ExactFunction {
    fn dim(&self) -> usize {
        self.spec.dim()
    }
    fn subgradient(&self, y: &Vector, _delta: Precision) -> Result<GradAnswer, OracleError> {
        check_query_dim(self.spec.dim(), y)?;
        self.check_domain(y)?;
        let (value, subgrad) = self.spec.exact_grad(y)?;
        Ok(GradAnswer { value, subgrad })
    }
}
