use super::*;

/// The map `x ↦ (x − center) / scale` into a normalized frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFrame {
    pub center: Vector,
    pub scale: f64,
}

impl AffineFrame {
    pub fn new(center: Vector, scale: f64) -> Self {
        assert!(
            scale > 0.0 && scale.is_finite(),
            "frame scale must be positive"
        );
        AffineFrame { center, scale }
    }

    pub fn identity(n: usize) -> Self {
        AffineFrame::new(Vector::zeros(n), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn to_local(&self, x: &Vector) -> Vector {
        (x - &self.center).scaled(1.0 / self.scale)
    }

    pub fn to_global(&self, x: &Vector) -> Vector {
        self.center.add_scaled(self.scale, x)
    }

    /// Threshold `γ` for `⟨c, x⟩` in global coordinates, expressed locally.
    fn gamma_to_local(&self, c: &Vector, gamma: f64) -> f64 {
        (gamma - c.dot(&self.center)) / self.scale
    }

    fn gamma_to_global(&self, c: &Vector, gamma: f64) -> f64 {
        self.scale * gamma + c.dot(&self.center)
    }

    fn halfspace_to_local(&self, h: HalfSpace) -> Result<HalfSpace, OracleError> {
        Ok(HalfSpace::new(
            h.normal,
            self.to_local(&h.anchor),
            h.slack / self.scale,
        )?)
    }

    fn halfspace_to_global(&self, h: HalfSpace) -> Result<HalfSpace, OracleError> {
        Ok(HalfSpace::new(
            h.normal,
            self.to_global(&h.anchor),
            h.slack * self.scale,
        )?)
    }
}

/// A globally-defined oracle seen through a normalizing frame.
#[derive(Debug, Clone)]
pub struct LocalView<O> {
    inner: O,
    frame: AffineFrame,
}

impl<O> LocalView<O> {
    pub fn new(inner: O, frame: AffineFrame) -> Self {
        LocalView { inner, frame }
    }

    pub fn frame(&self) -> &AffineFrame {
        &self.frame
    }

    fn delta(&self, delta: Precision) -> Precision {
        delta.scaled(self.frame.scale)
    }
}

/// A locally-defined oracle mapped back to global coordinates.
#[derive(Debug, Clone)]
pub struct GlobalView<O> {
    inner: O,
    frame: AffineFrame,
}

impl<O> GlobalView<O> {
    pub fn new(inner: O, frame: AffineFrame) -> Self {
        GlobalView { inner, frame }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    fn delta(&self, delta: Precision) -> Precision {
        delta.scaled(1.0 / self.frame.scale)
    }
}

impl<O: MembershipOracle> MembershipOracle for LocalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        self.inner
            .membership(&self.frame.to_global(y), self.delta(delta))
    }
}

impl<O: SeparationOracle> SeparationOracle for LocalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        Ok(
            match self
                .inner
                .separate(&self.frame.to_global(y), self.delta(delta))?
            {
                SeparationAnswer::Separator(h) => {
                    SeparationAnswer::Separator(self.frame.halfspace_to_local(h)?)
                }
                SeparationAnswer::InsideDilated => SeparationAnswer::InsideDilated,
            },
        )
    }
}

impl<O: OptimizationOracle> OptimizationOracle for LocalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        Ok(match self.inner.optimize(c, self.delta(delta))? {
            OptimizationAnswer::Maximizer(y) => {
                OptimizationAnswer::Maximizer(self.frame.to_local(&y))
            }
            OptimizationAnswer::EmptyInterior => OptimizationAnswer::EmptyInterior,
        })
    }
}

impl<O: ViolationOracle> ViolationOracle for LocalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        let gamma = self.frame.gamma_to_global(c, gamma);
        Ok(match self.inner.violation(c, gamma, self.delta(delta))? {
            ViolationAnswer::Witness(y) => ViolationAnswer::Witness(self.frame.to_local(&y)),
            ViolationAnswer::AllBelow => ViolationAnswer::AllBelow,
        })
    }
}

impl<O: ValidityOracle> ValidityOracle for LocalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        let gamma = self.frame.gamma_to_global(c, gamma);
        self.inner.validity(c, gamma, self.delta(delta))
    }
}

impl<O: MembershipOracle> MembershipOracle for GlobalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn membership(&self, y: &Vector, delta: Precision) -> Result<MembershipAnswer, OracleError> {
        self.inner
            .membership(&self.frame.to_local(y), self.delta(delta))
    }
}

impl<O: SeparationOracle> SeparationOracle for GlobalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn separate(&self, y: &Vector, delta: Precision) -> Result<SeparationAnswer, OracleError> {
        Ok(
            match self
                .inner
                .separate(&self.frame.to_local(y), self.delta(delta))?
            {
                SeparationAnswer::Separator(h) => {
                    SeparationAnswer::Separator(self.frame.halfspace_to_global(h)?)
                }
                SeparationAnswer::InsideDilated => SeparationAnswer::InsideDilated,
            },
        )
    }
}

impl<O: OptimizationOracle> OptimizationOracle for GlobalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn optimize(&self, c: &Vector, delta: Precision) -> Result<OptimizationAnswer, OracleError> {
        Ok(match self.inner.optimize(c, self.delta(delta))? {
            OptimizationAnswer::Maximizer(y) => {
                OptimizationAnswer::Maximizer(self.frame.to_global(&y))
            }
            OptimizationAnswer::EmptyInterior => OptimizationAnswer::EmptyInterior,
        })
    }
}

impl<O: ViolationOracle> ViolationOracle for GlobalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn violation(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ViolationAnswer, OracleError> {
        let gamma = self.frame.gamma_to_local(c, gamma);
        Ok(match self.inner.violation(c, gamma, self.delta(delta))? {
            ViolationAnswer::Witness(y) => ViolationAnswer::Witness(self.frame.to_global(&y)),
            ViolationAnswer::AllBelow => ViolationAnswer::AllBelow,
        })
    }
}

impl<O: ValidityOracle> ValidityOracle for GlobalView<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn validity(
        &self,
        c: &Vector,
        gamma: f64,
        delta: Precision,
    ) -> Result<ValidityAnswer, OracleError> {
        let gamma = self.frame.gamma_to_local(c, gamma);
        self.inner.validity(c, gamma, self.delta(delta))
    }
}
