//! The height function `h_x(d) = −α_x(d)·‖x‖₂`, where `α_x(d)` is the largest
//! `α` with `d + αx ∈ K`, evaluated by bisection over a membership oracle.

use crate::error::{invalid, OracleError};
use crate::geometry::{check_dim, Vector};
use crate::oracle::{MembershipOracle, Precision};
use crate::subgrad::ScalarFunction;

/// Height function of a body with `B(0, r) ⊆ K ⊆ B(0, R)` along `x`.
#[derive(Debug, Clone)]
pub struct HeightOracle<'a, M: ?Sized> {
    mem: &'a M,
    x: Vector,
    x_norm: f64,
    outer_radius: f64,
    delta: Precision,
    bin_tol: f64,
}

impl<'a, M: MembershipOracle + ?Sized> HeightOracle<'a, M> {
    pub fn new(
        mem: &'a M,
        x: Vector,
        outer_radius: f64,
        delta: Precision,
        bin_tol: f64,
    ) -> Result<Self, OracleError> {
        check_dim(mem.dim(), x.dim())?;
        let x_norm = x.norm2();
        if !(x_norm > 0.0) {
            return Err(invalid("height function direction must be nonzero"));
        }
        if !(bin_tol > 0.0) || !(outer_radius > 0.0) {
            return Err(invalid(
                "bisection tolerance and outer radius must be positive",
            ));
        }
        Ok(HeightOracle {
            mem,
            x,
            x_norm,
            outer_radius,
            delta,
            bin_tol,
        })
    }

    /// The tolerance giving additive error `eps_eval` on `h_x`.
    pub fn default_bin_tol(eps_eval: f64, x: &Vector) -> f64 {
        eps_eval / (2.0 * x.norm2())
    }

    pub fn bin_tol(&self) -> f64 {
        self.bin_tol
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// Bound on `|ĥ − h|` from bisection alone.
    pub fn evaluation_error(&self) -> f64 {
        self.bin_tol * self.x_norm
    }

    /// Number of bisection steps for a query at `d`.
    pub fn iterations(&self, d: &Vector) -> usize {
        let range = self.initial_hi(d);
        if range <= self.bin_tol {
            0
        } else {
            (range / self.bin_tol).log2().ceil() as usize
        }
    }

    fn initial_hi(&self, d: &Vector) -> f64 {
        (self.outer_radius + d.norm2() + self.delta.value()) / self.x_norm
    }

    /// `α̂` within `bin_tol` of `α_x(d)`, as seen through the oracle.
    pub fn alpha_x(&self, d: &Vector) -> Result<f64, OracleError> {
        check_dim(self.x.dim(), d.dim())?;
        let mut lo = 0.0;
        let mut hi = self.initial_hi(d);
        for _ in 0..self.iterations(d) {
            let mid = 0.5 * (lo + hi);
            if self
                .mem
                .membership(&d.add_scaled(mid, &self.x), self.delta)?
                .is_inside()
            {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 && !self.mem.membership(d, self.delta)?.is_inside() {
            return Err(OracleError::Precondition(format!(
                "height function queried at a point outside the body (‖d‖ = {:.3e})",
                d.norm2()
            )));
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn h_x(&self, d: &Vector) -> Result<f64, OracleError> {
        Ok(-self.alpha_x(d)? * self.x_norm)
    }
}

impl<M: MembershipOracle + ?Sized> ScalarFunction for HeightOracle<'_, M> {
    fn dim(&self) -> usize {
        self.x.dim()
    }

    fn value(&self, y: &Vector) -> Result<f64, OracleError> {
        self.h_x(y)
    }
}
