//! Membership and separation for `K` are evaluation and subgradient oracles
//! for the indicator `1_K` (0 on `K`, `+∞` off it).
//!
//! A noisy EVAL may return any value, so answers are classified at the
//! threshold `½`: below is inside, at or above is outside.

use crate::error::OracleError;
use crate::geometry::{HalfSpace, UnitVector, Vector};
use crate::oracle::{
    EvaluationOracle, GradAnswer, MembershipAnswer, MembershipOracle, Precision, SeparationAnswer,
    SeparationOracle, SubgradientOracle,
};

pub const INDICATOR_THRESHOLD: f64 = 0.5;

/// `EVAL(1_K)` from `MEM(K)`.
#[derive(Debug, Clone)]
pub struct IndicatorEval<M>(pub M);

/// `MEM(K)` from `EVAL(1_K)`.
#[derive(Debug, Clone)]
pub struct MemFromIndicator<E>(pub E);

/// `GRAD(1_K)` from `SEP(K)`. A separator is reported as value `+∞` with
/// the unit normal in the subgradient slot; its slack is not carried.
#[derive(Debug, Clone)]
pub struct IndicatorGrad<S>(pub S);

/// `SEP(K)` from `GRAD(1_K)`. The halfspace is anchored at the query.
#[derive(Debug, Clone)]
pub struct SepFromIndicator<G>(pub G);

pub fn mem_from_eval_indicator<E: EvaluationOracle>(eval: E) -> MemFromIndicator<E> {
    MemFromIndicator(eval)
}

pub fn eval_from_mem_indicator<M: MembershipOracle>(mem: M) -> IndicatorEval<M> {
    IndicatorEval(mem)
}

pub fn sep_from_grad_indicator<G: SubgradientOracle>(grad: G) -> SepFromIndicator<G> {
    SepFromIndicator(grad)
}

pub fn grad_from_sep_indicator<S: SeparationOracle>(sep: S) -> IndicatorGrad<S> {
    IndicatorGrad(sep)
}

impl<M: MembershipOracle> EvaluationOracle for IndicatorEval<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn evaluate(&self, y: &Vector, delta: Precision) -> Result<f64, OracleError> {
        Ok(match self.0.membership(y, delta)? {
            MembershipAnswer::InsideDilated => 0.0,
            MembershipAnswer::OutsideEroded => f64::INFINITY,
        })
    }
}

impl<E: EvaluationOracle> MembershipOracle for MemFromIndicator<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        Ok(if self.0.evaluate(y, delta)? < INDICATOR_THRESHOLD {
            MembershipAnswer::InsideDilated
        } else {
            MembershipAnswer::OutsideEroded
        })
    }
}

impl<S: SeparationOracle> SubgradientOracle for IndicatorGrad<S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn subgradient(&self, y: &Vector, delta: Precision) -> Result<GradAnswer, OracleError> {
        Ok(match self.0.separate(y, delta)? {
            SeparationAnswer::InsideDilated => GradAnswer {
                value: 0.0,
                subgrad: Vector::zeros(y.dim()),
            },
            SeparationAnswer::Separator(h) => GradAnswer {
                value: f64::INFINITY,
                subgrad: h.normal.into_vector(),
            },
        })
    }
}

impl<G: SubgradientOracle> SeparationOracle for SepFromIndicator<G> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        let answer = self.0.subgradient(y, delta)?;
        if answer.value < INDICATOR_THRESHOLD {
            return Ok(SeparationAnswer::InsideDilated);
        }
        let normal = UnitVector::normalize(&answer.subgrad).map_err(|e| {
            OracleError::from(e).context("indicator subgradient carries no direction")
        })?;
        Ok(SeparationAnswer::Separator(HalfSpace::new(
            normal,
            y.clone(),
            0.0,
        )?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{BodySpec, ExactBody, ExactFunction, FuncSpec};
    use crate::oracle::RandomStream;
    use rand_distr::{Distribution, Uniform};

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn indicator_values_classify() {
        let d = Precision::new(0.01).unwrap();
        let ind = ExactFunction::new(FuncSpec::Indicator(Box::new(BodySpec::unit_ball(2))));
        assert_eq!(ind.evaluate(&v(&[0.0, 0.0]), d).unwrap(), 0.0);
        let mem = mem_from_eval_indicator(ind.clone());
        assert_eq!(
            mem.membership(&v(&[0.0, 0.0]), d).unwrap(),
            MembershipAnswer::InsideDilated
        );
        assert_eq!(ind.evaluate(&v(&[2.0, 0.0]), d).unwrap(), f64::INFINITY);
        assert_eq!(
            mem.membership(&v(&[2.0, 0.0]), d).unwrap(),
            MembershipAnswer::OutsideEroded
        );

        let sep = sep_from_grad_indicator(ind);
        match sep.separate(&v(&[2.0, 0.0]), d).unwrap() {
            SeparationAnswer::Separator(h) => {
                assert!((h.normal.as_vector()[0] - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn membership_round_trip_is_identity() {
        let d = Precision::new(0.01).unwrap();
        let body = ExactBody::new(BodySpec::cube(Vector::zeros(3), 1.0).unwrap());
        let round = mem_from_eval_indicator(eval_from_mem_indicator(body.clone()));
        let mut rng = RandomStream::new(17).rng();
        let coord = Uniform::new(-2.0, 2.0).unwrap();
        for _ in 0..1000 {
            let y = Vector::new((0..3).map(|_| coord.sample(&mut rng)).collect()).unwrap();
            assert_eq!(
                round.membership(&y, d).unwrap(),
                body.membership(&y, d).unwrap()
            );
        }
    }

    #[test]
    fn separation_round_trip_keeps_the_normal() {
        let d = Precision::new(0.01).unwrap();
        let body = ExactBody::new(BodySpec::unit_ball(2));
        let round = sep_from_grad_indicator(grad_from_sep_indicator(body.clone()));
        for y in [v(&[0.2, 0.1]), v(&[0.0, 3.0]), v(&[-1.5, 1.5])] {
            match (
                round.separate(&y, d).unwrap(),
                body.separate(&y, d).unwrap(),
            ) {
                (SeparationAnswer::InsideDilated, SeparationAnswer::InsideDilated) => {}
                (SeparationAnswer::Separator(a), SeparationAnswer::Separator(b)) => {
                    assert_eq!(a.normal, b.normal);
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
