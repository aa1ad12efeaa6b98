use super::*;

/// Randomized oracles that can be re-instantiated on an independent stream.
pub trait Reseed {
    fn reseeded(&self, stream: RandomStream) -> Self;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Voter {
    /// Majority vote over assertion-only answers (MEM, VAL).
    Majority,
    /// Keep the witness with the largest objective (OPT, VIOL).
    Best,
}

impl Voter {
    fn name(self) -> &'static str {
        match self {
            Voter::Majority => "majority",
            Voter::Best => "best",
        }
    }
}

/// Repetition-based amplification of a randomized oracle.
///
/// Replica 0 is the original oracle; replicas `1..k` are reseeded on
/// `stream.child(i)`. With one repetition the wrapper answers exactly like the
/// original.
#[derive(Debug, Clone)]
pub struct Amplified<O> {
    replicas: Vec<O>,
    voter: Voter,
}

pub fn amplify<O: Clone + Reseed>(
    oracle: &O,
    stream: &RandomStream,
    repetitions: usize,
    voter: Voter,
) -> Result<Amplified<O>, OracleError> {
    if repetitions == 0 {
        return Err(invalid("amplification needs at least one repetition"));
    }
    let mut replicas = Vec::with_capacity(repetitions);
    replicas.push(oracle.clone());
    for i in 1..repetitions {
        replicas.push(oracle.reseeded(stream.child(i as u64)));
    }
    Ok(Amplified { replicas, voter })
}

impl<O> Amplified<O> {
    pub fn repetitions(&self) -> usize {
        self.replicas.len()
    }

    fn require(&self, voter: Voter, kind: &'static str) -> Result<(), OracleError> {
        if self.voter == voter {
            Ok(())
        } else {
            Err(OracleError::IncompatibleVoter {
                voter: self.voter.name(),
                kind,
            })
        }
    }

    fn dim_of(&self, f: impl Fn(&O) -> usize) -> usize {
        f(&self.replicas[0])
    }
}

impl<O: MembershipOracle> MembershipOracle for Amplified<O> {
    fn dim(&self) -> usize {
        self.dim_of(|o| o.dim())
    }

    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        self.require(Voter::Majority, "membership")?;
        let mut inside = 0usize;
        let mut first = None;
        for r in &self.replicas {
            let a = r.membership(y, delta)?;
            first.get_or_insert(a);
            inside += a.is_inside() as usize;
        }
        let outside = self.replicas.len() - inside;
        Ok(match inside.cmp(&outside) {
            std::cmp::Ordering::Greater => MembershipAnswer::InsideDilated,
            std::cmp::Ordering::Less => MembershipAnswer::OutsideEroded,
            std::cmp::Ordering::Equal => first.expect("at least one replica"),
        })
    }
}

impl<O: ValidityOracle> ValidityOracle for Amplified<O> {
    fn dim(&self) -> usize {
        self.dim_of(|o| o.dim())
    }

    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        self.require(Voter::Majority, "validity")?;
        let mut below = 0usize;
        let mut first = None;
        for r in &self.replicas {
            let a = r.validity(c, gamma, delta)?;
            first.get_or_insert(a);
            below += (a == ValidityAnswer::AllBelow) as usize;
        }
        let above = self.replicas.len() - below;
        Ok(match below.cmp(&above) {
            std::cmp::Ordering::Greater => ValidityAnswer::AllBelow,
            std::cmp::Ordering::Less => ValidityAnswer::SomeAbove,
            std::cmp::Ordering::Equal => first.expect("at least one replica"),
        })
    }
}

impl<O: OptimizationOracle> OptimizationOracle for Amplified<O> {
    fn dim(&self) -> usize {
        self.dim_of(|o| o.dim())
    }

    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        self.require(Voter::Best, "optimization")?;
        let mut best: Option<(f64, Vector)> = None;
        for r in &self.replicas {
            if let OptimizationAnswer::Maximizer(y) = r.optimize(c, delta)? {
                let value = c.dot(&y);
                if best.as_ref().map_or(true, |(b, _)| value > *b) {
                    best = Some((value, y));
                }
            }
        }
        Ok(match best {
            Some((_, y)) => OptimizationAnswer::Maximizer(y),
            None => OptimizationAnswer::EmptyInterior,
        })
    }
}

impl<O: ViolationOracle> ViolationOracle for Amplified<O> {
    fn dim(&self) -> usize {
        self.dim_of(|o| o.dim())
    }

    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        self.require(Voter::Best, "violation")?;
        let mut best: Option<(f64, Vector)> = None;
        for r in &self.replicas {
            if let ViolationAnswer::Witness(y) = r.violation(c, gamma, delta)? {
                let value = c.dot(&y);
                if best.as_ref().map_or(true, |(b, _)| value > *b) {
                    best = Some((value, y));
                }
            }
        }
        Ok(match best {
            Some((_, y)) => ViolationAnswer::Witness(y),
            None => ViolationAnswer::AllBelow,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    /// Returns a fixed list of maximizers, one per replica index.
    #[derive(Debug)]
    struct Scripted {
        points: Vec<Vector>,
        index: usize,
        calls: AtomicUsize,
    }

    impl Clone for Scripted {
        fn clone(&self) -> Self {
            Scripted {
                points: self.points.clone(),
                index: self.index,
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl Reseed for Scripted {
        fn reseeded(&self, stream: RandomStream) -> Self {
            Scripted {
                points: self.points.clone(),
                index: *stream.path().last().unwrap() as usize,
                calls: AtomicUsize::new(0),
            }
        }
    }

    impl OptimizationOracle for Scripted {
        fn dim(&self) -> usize {
            2
        }
        fn optimize(&self, _: &Vector, _: Precision) -> Result<OptimizationAnswer, OracleError> {
            self.calls.fetch_add(1, Ordering::Relaxed);
            Ok(OptimizationAnswer::Maximizer(
                self.points[self.index].clone(),
            ))
        }
    }

    impl MembershipOracle for Scripted {
        fn dim(&self) -> usize {
            2
        }
        fn membership(&self, _: &Vector, _: Precision) -> Result<MembershipAnswer, OracleError> {
            Ok(MembershipAnswer::InsideDilated)
        }
    }

    fn scripted() -> Scripted {
        let pts = [[0.1, 0.0], [0.7, 0.2], [0.4, 0.9], [-1.0, 0.0]];
        Scripted {
            points: pts
                .iter()
                .map(|p| Vector::new(p.to_vec()).unwrap())
                .collect(),
            index: 0,
            calls: AtomicUsize::new(0),
        }
    }

    #[test]
    fn best_voter_keeps_largest_objective() {
        let amp = amplify(&scripted(), &RandomStream::new(0), 4, Voter::Best).unwrap();
        let c = Vector::new(vec![1.0, 0.0]).unwrap();
        let d = Precision::new(0.01).unwrap();
        match amp.optimize(&c, d).unwrap() {
            OptimizationAnswer::Maximizer(y) => assert_eq!(y.as_slice(), &[0.7, 0.2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_repetition_is_the_original() {
        let base = scripted();
        let amp = amplify(&base, &RandomStream::new(0), 1, Voter::Best).unwrap();
        let c = Vector::new(vec![0.0, 1.0]).unwrap();
        let d = Precision::new(0.01).unwrap();
        assert_eq!(amp.optimize(&c, d).unwrap(), base.optimize(&c, d).unwrap());
    }

    #[test]
    fn rejects_mismatched_voter_and_zero_reps() {
        let d = Precision::new(0.01).unwrap();
        let amp = amplify(&scripted(), &RandomStream::new(0), 3, Voter::Best).unwrap();
        assert!(matches!(
            amp.membership(&Vector::zeros(2), d),
            Err(OracleError::IncompatibleVoter { .. })
        ));
        let amp = amplify(&scripted(), &RandomStream::new(0), 3, Voter::Majority).unwrap();
        assert!(amp.optimize(&Vector::basis(2, 0), d).is_err());
        assert!(amplify(&scripted(), &RandomStream::new(0), 0, Voter::Best).is_err());
    }
}
