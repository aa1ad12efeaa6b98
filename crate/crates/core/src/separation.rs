//! Separation from membership: the height-function gradient at `x` is an
//! approximate outward normal of `K`.

use serde::{Deserialize, Serialize};

use crate::error::OracleError;
use crate::geometry::{HalfSpace, UnitVector, Vector};
use crate::height::HeightOracle;
use crate::oracle::{
    check_query_dim, LocalView, MembershipOracle, Precision, ProblemGeometry, QueryStreams,
    RandomStream, SeparationAnswer, SeparationOracle,
};
use crate::subgrad::{separate_convex_func, EstimatorParams};

/// Constant in the theoretical membership precision `c0·η⁶ / (n^{7/2} κ⁶)`.
pub const THEORETICAL_C0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlackMode {
    /// Slack `(50/ρ)·n^{7/6}·R^{2/3}·κ·ε^{1/3} / ‖g̃‖₂`.
    Theoretical,
    /// Zero slack through the query point.
    Anchored,
}

/// Parameters of one separation query. The geometry must be centered at the
/// origin; [`SepFromMem`] takes care of that for arbitrary bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorConfig {
    /// Membership precision and schedule input `ε ∈ (0, r]`.
    pub eps: f64,
    /// Failure probability knob `ρ ∈ (0, 1)`.
    pub rho: f64,
    pub geometry: ProblemGeometry,
    pub r1_override: Option<f64>,
    pub retries: usize,
    pub mode: SlackMode,
    /// Height-function bisection tolerance as a multiple of the default
    /// `4ε / (2‖x‖)`.
    pub bin_tol_factor: f64,
}

impl SeparatorConfig {
    pub const PRACTICAL_EPS: f64 = 1e-4;
    pub const PRACTICAL_RHO: f64 = 0.1;
    /// Height values must be far more accurate than the `4ε` budget: the
    /// coordinate differences divide their error by `r2 ≈ √(ε·r1)`.
    pub const PRACTICAL_BIN_TOL_FACTOR: f64 = 1e-3;
    pub const DEFAULT_RETRIES: usize = 3;

    /// Fixed `ε = 1e-4`, `ρ = 0.1`, anchored halfspaces.
    pub fn practical(geometry: ProblemGeometry) -> Self {
        SeparatorConfig {
            eps: Self::PRACTICAL_EPS,
            rho: Self::PRACTICAL_RHO,
            geometry,
            r1_override: None,
            retries: Self::DEFAULT_RETRIES,
            mode: SlackMode::Anchored,
            bin_tol_factor: Self::PRACTICAL_BIN_TOL_FACTOR,
        }
    }

    /// The schedule from the complexity analysis for target precision `η`:
    /// `ε = c0·η⁶/(n^{7/2}κ⁶)` and `ρ = (n^{7/6}κ²ε^{1/3})^{1/2}`.
    pub fn theoretical(geometry: ProblemGeometry, eta: Precision) -> Self {
        let eps = theoretical_mem_precision(geometry.dim(), geometry.kappa(), eta);
        SeparatorConfig {
            eps,
            rho: theoretical_rho(geometry.dim(), geometry.kappa(), eps),
            geometry,
            r1_override: None,
            retries: Self::DEFAULT_RETRIES,
            mode: SlackMode::Theoretical,
            bin_tol_factor: 1.0,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        let r = self.geometry.inner_radius;
        if !(self.eps > 0.0) || self.eps > r {
            return Err(OracleError::Precondition(format!(
                "membership precision {} must lie in (0, r = {r}]",
                self.eps
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(OracleError::InvalidParameter(format!(
                "rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        if !(self.bin_tol_factor > 0.0) {
            return Err(OracleError::InvalidParameter(
                "bin_tol_factor must be positive".into(),
            ));
        }
        if !self.geometry.center.is_zero() {
            return Err(OracleError::Precondition(
                "separation expects a body centered at the origin".into(),
            ));
        }
        Ok(())
    }

    /// `min(n^{1/6} ε^{1/3} R^{2/3} / κ, r / (4√n))` unless overridden.
    pub fn r1(&self) -> f64 {
        if let Some(r1) = self.r1_override {
            return r1;
        }
        let n = self.geometry.dim() as f64;
        let (r, big_r, kappa) = (
            self.geometry.inner_radius,
            self.geometry.outer_radius,
            self.geometry.kappa(),
        );
        let schedule = n.powf(1.0 / 6.0) * self.eps.cbrt() * big_r.powf(2.0 / 3.0) / kappa;
        schedule.min(r / (4.0 * n.sqrt()))
    }

    /// Lipschitz bound `3κ` used for the height function.
    pub fn lipschitz(&self) -> f64 {
        3.0 * self.geometry.kappa()
    }

    pub fn theoretical_slack(&self, gradient_norm: f64) -> f64 {
        let n = self.geometry.dim() as f64;
        (50.0 / self.rho)
            * n.powf(7.0 / 6.0)
            * self.geometry.outer_radius.powf(2.0 / 3.0)
            * self.geometry.kappa()
            * self.eps.cbrt()
            / gradient_norm
    }
}

pub fn theoretical_mem_precision(n: usize, kappa: f64, eta: Precision) -> f64 {
    THEORETICAL_C0 * eta.value().powi(6) / ((n as f64).powf(3.5) * kappa.powi(6))
}

pub fn theoretical_rho(n: usize, kappa: f64, mem_precision: f64) -> f64 {
    ((n as f64).powf(7.0 / 6.0) * kappa * kappa * mem_precision.cbrt()).sqrt()
}

/// One separation query at `x` for a body with `B(0, r) ⊆ K ⊆ B(0, R)`.
pub fn separate<M: MembershipOracle + ?Sized>(
    cfg: &SeparatorConfig,
    mem: &M,
    x: &Vector,
    stream: &RandomStream,
) -> Result<SeparationAnswer, OracleError> {
    cfg.validate()?;
    check_query_dim(cfg.geometry.dim(), x)?;
    let delta = Precision::saturating(cfg.eps);
    if mem.membership(x, delta)?.is_inside() {
        return Ok(SeparationAnswer::InsideDilated);
    }
    let x_norm = x.norm2();
    if x_norm > cfg.geometry.outer_radius {
        return Ok(SeparationAnswer::Separator(HalfSpace::new(
            UnitVector::normalize(x)?,
            x.clone(),
            0.0,
        )?));
    }

    let eps_eval = 4.0 * cfg.eps;
    let bin_tol = cfg.bin_tol_factor * HeightOracle::<M>::default_bin_tol(eps_eval, x);
    let height = HeightOracle::new(mem, x.clone(), cfg.geometry.outer_radius, delta, bin_tol)?;
    let params = EstimatorParams::new(Vector::zeros(x.dim()), cfg.r1(), eps_eval, cfg.lipschitz())?;
    let bound = 1.0 / (4.0 * cfg.geometry.kappa());
    let mut last_norm = 0.0;
    for attempt in 0..=cfg.retries {
        let est = separate_convex_func(&height, &params, &stream.child(attempt as u64))?;
        let norm = est.gradient.norm2();
        last_norm = norm;
        if norm >= bound {
            debug_assert!(norm >= bound);
            let slack = match cfg.mode {
                SlackMode::Anchored => 0.0,
                SlackMode::Theoretical => cfg.theoretical_slack(norm),
            };
            let normal = UnitVector::normalize(&est.gradient)?;
            return Ok(SeparationAnswer::Separator(HalfSpace::new(
                normal,
                x.clone(),
                slack,
            )?));
        }
    }
    Err(OracleError::DegenerateGradient {
        norm: last_norm,
        bound,
        attempts: cfg.retries + 1,
    })
}

/// A separation oracle built on a membership oracle for a body with
/// arbitrary certified geometry.
///
/// Queries are mapped into the frame where the body sits in the unit ball
/// around the origin; all parameters in the config refer to that frame.
/// Parameters are fixed at construction, so the per-query precision is not
/// consulted. Query `k` draws its randomness from `stream.child(k)`.
pub struct SepFromMem<M> {
    local: LocalView<M>,
    config: SeparatorConfig,
    streams: QueryStreams,
    dim: usize,
}

impl<M: MembershipOracle> SepFromMem<M> {
    /// `config.geometry` is replaced by the normalized geometry.
    pub fn new(
        mem: M,
        geometry: &ProblemGeometry,
        mut config: SeparatorConfig,
        stream: RandomStream,
    ) -> Self {
        config.geometry = geometry.normalized();
        SepFromMem {
            dim: geometry.dim(),
            local: LocalView::new(mem, geometry.frame()),
            config,
            streams: QueryStreams::new(stream),
        }
    }

    pub fn practical(mem: M, geometry: &ProblemGeometry, stream: RandomStream) -> Self {
        let cfg = SeparatorConfig::practical(geometry.normalized());
        Self::new(mem, geometry, cfg, stream)
    }

    pub fn config(&self) -> &SeparatorConfig {
        &self.config
    }

    pub fn membership_oracle(&self) -> &LocalView<M> {
        &self.local
    }
}

/// Separation oracle from a membership oracle with the theoretical schedule
/// for precision `eta`.
pub fn sep_oracle_from_mem<M: MembershipOracle>(
    mem: M,
    geometry: &ProblemGeometry,
    eta: Precision,
    stream: RandomStream,
) -> SepFromMem<M> {
    let cfg = SeparatorConfig::theoretical(geometry.normalized(), eta);
    SepFromMem::new(mem, geometry, cfg, stream)
}

impl<M: MembershipOracle> SeparationOracle for SepFromMem<M> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn separate(&self, y: &Vector, _delta: Precision) -> Result<SeparationAnswer, OracleError> {
        check_query_dim(self.dim, y)?;
        let frame = self.local.frame();
        let stream = self.streams.next_stream();
        Ok(
            match separate(&self.config, &self.local, &frame.to_local(y), &stream)? {
                SeparationAnswer::InsideDilated => SeparationAnswer::InsideDilated,
                SeparationAnswer::Separator(h) => SeparationAnswer::Separator(HalfSpace::new(
                    h.normal,
                    y.clone(),
                    h.slack * frame.scale,
                )?),
            },
        )
    }
}
