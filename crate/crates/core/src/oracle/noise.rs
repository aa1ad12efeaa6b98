use rand::Rng;

use super::*;

/// A membership oracle whose answers are flipped with a fixed probability.
///
/// Randomness for query `k` comes from `stream.child(k)`, so two oracles
/// built from the same stream answer the same query sequence identically.
#[derive(Debug, Clone)]
pub struct NoisyMembership<M> {
    inner: M,
    flip_probability: f64,
    streams: QueryStreams,
}

impl<M> NoisyMembership<M> {
    pub fn new(inner: M, flip_probability: f64, stream: RandomStream) -> Result<Self, OracleError> {
        if !(0.0..=1.0).contains(&flip_probability) {
            return Err(invalid(format!(
                "flip probability must be in [0, 1], got {flip_probability}"
            )));
        }
        Ok(NoisyMembership {
            inner,
            flip_probability,
            streams: QueryStreams::new(stream),
        })
    }
}

impl<M: MembershipOracle> MembershipOracle for NoisyMembership<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        let answer = self.inner.membership(y, delta)?;
        let flip = self
            .streams
            .next_stream()
            .rng()
            .random_bool(self.flip_probability);
        Ok(match (flip, answer) {
            (false, a) => a,
            (true, MembershipAnswer::InsideDilated) => MembershipAnswer::OutsideEroded,
            (true, MembershipAnswer::OutsideEroded) => MembershipAnswer::InsideDilated,
        })
    }
}

impl<M: Clone> Reseed for NoisyMembership<M> {
    fn reseeded(&self, stream: RandomStream) -> Self {
        NoisyMembership {
            inner: self.inner.clone(),
            flip_probability: self.flip_probability,
            streams: QueryStreams::new(stream),
        }
    }
}
