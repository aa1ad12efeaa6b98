use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OracleKind {
    Mem,
    Sep,
    Opt,
    Viol,
    Val,
    Eval,
    Grad,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OracleKind::Mem => "MEM",
            OracleKind::Sep => "SEP",
            OracleKind::Opt => "OPT",
            OracleKind::Viol => "VIOL",
            OracleKind::Val => "VAL",
            OracleKind::Eval => "EVAL",
            OracleKind::Grad => "GRAD",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub kind: OracleKind,
    pub delta: f64,
    pub count: u64,
}

/// Query counts keyed by oracle kind and the exact precision passed.
///
/// Shared between decorated oracles through an `Arc`; increments are
/// serialized by a mutex so concurrent trials cannot lose counts.
#[derive(Debug, Default)]
pub struct QueryLedger {
    counts: Mutex<BTreeMap<(OracleKind, u64), u64>>,
}

impl QueryLedger {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn record(&self, kind: OracleKind, delta: Precision) {
        let mut counts = self.counts.lock().expect("ledger mutex poisoned");
        *counts.entry((kind, delta.value().to_bits())).or_insert(0) += 1;
    }

    pub fn count(&self, kind: OracleKind, delta: Precision) -> u64 {
        let counts = self.counts.lock().expect("ledger mutex poisoned");
        counts
            .get(&(kind, delta.value().to_bits()))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self, kind: OracleKind) -> u64 {
        let counts = self.counts.lock().expect("ledger mutex poisoned");
        counts
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn snapshot(&self) -> Vec<LedgerEntry> {
        let counts = self.counts.lock().expect("ledger mutex poisoned");
        counts
            .iter()
            .map(|(&(kind, bits), &count)| LedgerEntry {
                kind,
                delta: f64::from_bits(bits),
                count,
            })
            .collect()
    }
}

/// An oracle that records every query in a [`QueryLedger`] and otherwise
/// answers exactly like the wrapped oracle.
#[derive(Debug, Clone)]
pub struct Counted<O> {
    inner: O,
    ledger: Arc<QueryLedger>,
}

impl<O> Counted<O> {
    pub fn new(inner: O, ledger: Arc<QueryLedger>) -> Self {
        Counted { inner, ledger }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn ledger(&self) -> &Arc<QueryLedger> {
        &self.ledger
    }
}

pub fn wrap_with_ledger<O>(oracle: O, ledger: Arc<QueryLedger>) -> Counted<O> {
    Counted::new(oracle, ledger)
}

impl<O: MembershipOracle> MembershipOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        self.ledger.record(OracleKind::Mem, delta);
        self.inner.membership(y, delta)
    }
}

impl<O: SeparationOracle> SeparationOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        self.ledger.record(OracleKind::Sep, delta);
        self.inner.separate(y, delta)
    }
}

impl<O: OptimizationOracle> OptimizationOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        self.ledger.record(OracleKind::Opt, delta);
        self.inner.optimize(c, delta)
    }
}

impl<O: ViolationOracle> ViolationOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        self.ledger.record(OracleKind::Viol, delta);
        self.inner.violation(c, gamma, delta)
    }
}

impl<O: ValidityOracle> ValidityOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        self.ledger.record(OracleKind::Val, delta);
        self.inner.validity(c, gamma, delta)
    }
}

impl<O: EvaluationOracle> EvaluationOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&self, y: &Vector, delta: Precision) -> Result<f64, OracleError> {
        self.ledger.record(OracleKind::Eval, delta);
        self.inner.evaluate(y, delta)
    }
}

impl<O: SubgradientOracle> SubgradientOracle for Counted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn subgradient(&self, y: &Vector, delta: Precision) -> Result<GradAnswer, OracleError> {
        self.ledger.record(OracleKind::Grad, delta);
        self.inner.subgradient(y, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct AlwaysInside;
    impl MembershipOracle for AlwaysInside {
        fn dim(&self) -> usize {
            2
        }
        fn membership(&self, _: &Vector, _: Precision) -> Result<MembershipAnswer, OracleError> {
            Ok(MembershipAnswer::InsideDilated)
        }
    }

    #[test]
    fn counts_per_kind_and_precision() {
        let ledger = QueryLedger::new();
        let mem = wrap_with_ledger(AlwaysInside, ledger.clone());
        let d = Precision::new(1e-6).unwrap();
        assert_eq!(ledger.count(OracleKind::Mem, d), 0);
        for _ in 0..3 {
            assert!(mem.membership(&Vector::zeros(2), d).unwrap().is_inside());
        }
        assert_eq!(ledger.count(OracleKind::Mem, d), 3);
        assert_eq!(
            ledger.count(OracleKind::Mem, Precision::new(1e-5).unwrap()),
            0
        );
        assert_eq!(ledger.total(OracleKind::Sep), 0);
        assert_eq!(ledger.snapshot().len(), 1);
    }

    #[test]
    fn concurrent_increments_are_not_lost() {
        let ledger = QueryLedger::new();
        let mem = Arc::new(wrap_with_ledger(AlwaysInside, ledger.clone()));
        let d = Precision::new(0.01).unwrap();
        std::thread::scope(|s| {
            for _ in 0..8 {
                let mem = mem.clone();
                s.spawn(move || {
                    for _ in 0..500 {
                        mem.membership(&Vector::zeros(2), d).unwrap();
                    }
                });
            }
        });
        assert_eq!(ledger.total(OracleKind::Mem), 4000);
    }
}
