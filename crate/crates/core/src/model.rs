//! Model parameters and barrier geometry.
//!
//! Barriers sit at `x_n = x0 * lambda^n` for every integer `n` on the half
//! line `x > 0`. The barrier at `x_n` carries strength `mu / (2 x_n)` in the
//! potential, so the slope of a solution jumps by `(mu / x_n) psi(x_n)` across
//! it. Only the product `mu = m V0` enters any formula (with `hbar = 1`).

use serde::Serialize;

use crate::error::{Error, Result};

/// Default interval window used by sweeps over barrier indices.
pub const DEFAULT_INDEX_WINDOW: (i32, i32) = (-64, 64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    x0: f64,
    lambda: f64,
    mu: f64,
}

impl ModelParams {
    /// Validates `x0 > 0`, `lambda > 1` and a finite `mu`.
    ///
    /// `mu <= 0` is accepted here; operations that need a repulsive array
    /// check it through [`ModelParams::require_positive_mu`].
    pub fn new(x0: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::domain(format!(
                "x0 must be finite and > 0, got {x0}"
            )));
        }
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::domain(format!(
                "lambda must be finite and > 1, got {lambda}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::domain(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { x0, lambda, mu })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ln_lambda(&self) -> f64 {
        self.lambda.ln()
    }

    /// Same geometry with a different coupling.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.x0, self.lambda, mu)
    }

    pub fn require_positive_mu(&self) -> Result<()> {
        if self.mu > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "mu = m V0 must be > 0 for this operation, got {}",
                self.mu
            )))
        }
    }

    pub(crate) fn require_non_negative_mu(&self) -> Result<()> {
        if self.mu >= 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "mu = m V0 must be >= 0 for this operation, got {}",
                self.mu
            )))
        }
    }

    /// `ln x_n = ln x0 + n ln lambda`.
    pub fn ln_barrier_position(&self, n: i32) -> f64 {
        self.x0.ln() + f64::from(n) * self.ln_lambda()
    }
}

/// Label of the interval `[x_n, x_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IntervalIndex(pub i32);

impl IntervalIndex {
    pub fn left(self, params: &ModelParams) -> f64 {
        barrier_position(params, self.0)
    }

    pub fn right(self, params: &ModelParams) -> f64 {
        barrier_position(params, self.0 + 1)
    }

    pub fn midpoint(self, params: &ModelParams) -> f64 {
        0.5 * (self.left(params) + self.right(params))
    }
}

/// Barrier position `x0 * lambda^n`.
pub fn barrier_position(params: &ModelParams, n: i32) -> f64 {
    // powi is exact enough for moderate n; beyond that go through logs so
    // that intermediate powers cannot overflow before the x0 factor applies.
    if n.unsigned_abs() <= 64 {
        params.x0 * params.lambda.powi(n)
    } else {
        params.ln_barrier_position(n).exp()
    }
}

/// The coefficient `mu / x_n` in `psi'(x_n+) - psi'(x_n-) = (mu / x_n) psi(x_n)`.
pub fn jump_coefficient(params: &ModelParams, n: i32) -> f64 {
    params.mu / barrier_position(params, n)
}

/// Spacing `d_n = x_n - x_{n-1} = x0 lambda^(n-1) (lambda - 1)`.
pub fn spacing(params: &ModelParams, n: i32) -> f64 {
    barrier_position(params, n - 1) * (params.lambda - 1.0)
}

/// Index `n` of the interval `[x_n, x_{n+1})` containing `x`.
///
/// A point exactly on a barrier belongs to the interval on its right.
pub fn interval_index(params: &ModelParams, x: f64) -> Result<i32> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!(
            "position must be finite and > 0, got {x}"
        )));
    }
    let guess = ((x / params.x0).ln() / params.ln_lambda()).floor();
    if guess.is_nan() || guess.abs() >= f64::from(i32::MAX - 2) {
        return Err(Error::domain(format!(
            "position {x} is outside the index range"
        )));
    }
    let mut n = guess as i32;
    // The logarithm can land one off near a barrier; settle against the
    // positions actually used everywhere else.
    while barrier_position(params, n) > x {
        n -= 1;
    }
    while barrier_position(params, n + 1) <= x {
        n += 1;
    }
    Ok(n)
}
