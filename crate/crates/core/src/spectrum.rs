//! Exact transfer across barriers away from zero energy.
//!
//! For `E < 0` the solution between barriers is
//! `C_n e^(-kappa (x - x_n)) + D_n e^(kappa (x - x_n))`; for `E > 0` it is
//! `A_n e^(i k (x - x_n)) + B_n e^(-i k (x - x_n))`. Both are matched across
//! each barrier by continuity and the derivative jump `(mu / x_n) psi(x_n)`.
//! Energies enter only through `kappa x0` and `k x0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{barrier_position, spacing, ModelParams};

/// Decaying/growing amplitudes on interval `n`, stored as `e^ln_scale (c, d)`
/// so that long sweeps never overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvanescentCoeffs {
    pub n: i32,
    pub c: f64,
    pub d: f64,
    pub ln_scale: f64,
    pub kappa_x0: f64,
}

impl EvanescentCoeffs {
    pub fn new(n: i32, c: f64, d: f64, kappa_x0: f64) -> Self {
        Self {
            n,
            c,
            d,
            ln_scale: 0.0,
            kappa_x0,
        }
    }

    /// `ln |D_n|`, `-inf` when `D_n = 0`.
    pub fn ln_abs_d(&self) -> f64 {
        self.ln_scale + self.d.abs().ln()
    }

    pub fn ln_abs_c(&self) -> f64 {
        self.ln_scale + self.c.abs().ln()
    }

    /// `ln max(|C_n|, |D_n|)`.
    pub fn ln_magnitude(&self) -> f64 {
        self.ln_scale + self.c.abs().max(self.d.abs()).ln()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Carry `(C_{n-1}, D_{n-1})` across barrier `x_n`.
///
/// With `P = C_{n-1} e^(-kappa d_n)`, `Q = D_{n-1} e^(kappa d_n)` the values
/// arriving at `x_n`, continuity and the jump give
/// `C_n = P - g (P + Q) / 2`, `D_n = Q + g (P + Q) / 2`, `g = mu / (kappa x_n)`.
/// The step matrix has determinant 1.
pub fn evanescent_step(
    params: &ModelParams,
    kappa_x0: f64,
    input: &EvanescentCoeffs,
) -> Result<EvanescentCoeffs> {
    check_positive("kappa x0", kappa_x0)?;
    params.require_non_negative_mu()?;
    let n = input.n + 1;
    let kappa = kappa_x0 / params.x0();
    let kd = kappa * spacing(params, n);
    let g = params.mu() / (kappa * barrier_position(params, n));
    // Factor e^(kappa d) out of both amplitudes.
    let p = input.c * (-2.0 * kd).exp();
    let q = input.d;
    let half_jump = 0.5 * g * (p + q);
    let c = p - half_jump;
    let d = q + half_jump;
    let m = c.abs().max(d.abs());
    let (c, d, ln_m) = if m > 0.0 {
        (c / m, d / m, m.ln())
    } else {
        (c, d, 0.0)
    };
    Ok(EvanescentCoeffs {
        n,
        c,
        d,
        ln_scale: input.ln_scale + kd + ln_m,
        kappa_x0,
    })
}

/// Matrix of [`evanescent_step`] into interval `n`, in unscaled amplitudes.
pub fn evanescent_matrix(params: &ModelParams, kappa_x0: f64, n: i32) -> [[f64; 2]; 2] {
    let kappa = kappa_x0 / params.x0();
    let kd = kappa * spacing(params, n);
    let g = params.mu() / (kappa * barrier_position(params, n));
    let (em, ep) = ((-kd).exp(), kd.exp());
    [
        [em * (1.0 - 0.5 * g), -0.5 * g * ep],
        [0.5 * g * em, ep * (1.0 + 0.5 * g)],
    ]
}

/// Outcome of the `E < 0` growth certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCertificate {
    pub kappa_x0: f64,
    /// Interval the sweep starts on.
    pub start: i32,
    pub steps: u32,
    /// `kappa * sum d_n` over the window.
    pub free_growth: f64,
    /// Smallest `ln |D_end / D_start| / free_growth` over the rays with `D_start != 0`.
    pub worst_ratio: f64,
    pub threshold: f64,
    /// Steps until a pure-decay start (`D = 0`) has `|D_n| > |C_start|`.
    pub pure_decay_steps: Option<u32>,
    pub pure_decay_limit: u32,
    pub passed: bool,
}

/// Growth certificate threshold on `ln |D_end / D_start| / (kappa sum d_n)`.
pub const GROWTH_THRESHOLD: f64 = 0.9;
pub const CERTIFICATE_STEPS: u32 = 10;
pub const PURE_DECAY_LIMIT: u32 = 3;

/// First interval `n0 >= 0` with `kappa d_{n0+1} >= 1`, so each step of the
/// window crosses at least one decay length.
pub fn certificate_start(params: &ModelParams, kappa_x0: f64) -> i32 {
    let kappa = kappa_x0 / params.x0();
    let mut n0 = 0;
    while kappa * spacing(params, n0 + 1) < 1.0 && n0 < 10_000 {
        n0 += 1;
    }
    n0
}

/// Propagate each ray `(C, D)` through [`CERTIFICATE_STEPS`] exact steps
/// from [`certificate_start`] and check that every ray with `D != 0` grows by
/// at least [`GROWTH_THRESHOLD`] of the free rate, and that the `D = 0` ray
/// acquires a growing component within [`PURE_DECAY_LIMIT`] steps.
pub fn growth_certificate(
    params: &ModelParams,
    kappa_x0: f64,
    rays: &[(f64, f64)],
) -> Result<GrowthCertificate> {
    check_positive("kappa x0", kappa_x0)?;
    params.require_positive_mu()?;
    let start = certificate_start(params, kappa_x0);
    let kappa = kappa_x0 / params.x0();
    let free_growth: f64 = (1..=CERTIFICATE_STEPS as i32)
        .map(|j| kappa * spacing(params, start + j))
        .sum();
    let mut worst_ratio = f64::INFINITY;
    for &(c, d) in rays {
        if d == 0.0 {
            continue;
        }
        let mut s = EvanescentCoeffs::new(start, c, d, kappa_x0);
        let ln_d0 = s.ln_abs_d();
        for _ in 0..CERTIFICATE_STEPS {
            s = evanescent_step(params, kappa_x0, &s)?;
        }
        worst_ratio = worst_ratio.min((s.ln_abs_d() - ln_d0) / free_growth);
    }
    let mut s = EvanescentCoeffs::new(start, 1.0, 0.0, kappa_x0);
    let mut pure_decay_steps = None;
    for step in 1..=PURE_DECAY_LIMIT {
        s = evanescent_step(params, kappa_x0, &s)?;
        if s.ln_abs_d() > 0.0 {
            pure_decay_steps = Some(step);
            break;
        }
    }
    let passed = worst_ratio >= GROWTH_THRESHOLD && pure_decay_steps.is_some();
    Ok(GrowthCertificate {
        kappa_x0,
        start,
        steps: CERTIFICATE_STEPS,
        free_growth,
        worst_ratio,
        threshold: GROWTH_THRESHOLD,
        pure_decay_steps,
        pure_decay_limit: PURE_DECAY_LIMIT,
        passed,
    })
}

/// Plane-wave amplitudes on interval `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneWaveCoeffs {
    pub n: i32,
    pub a: Complex64,
    pub b: Complex64,
    pub k_x0: f64,
}

impl PlaneWaveCoeffs {
    /// `|A|^2 - |B|^2`.
    pub fn current(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }
}

/// Scattering step into interval `n`:
/// `[[e^(i t)(1 + h), h e^(-i t)], [-h e^(i t), e^(-i t)(1 - h)]]`
/// with `t = k d_n` and `h = mu / (2 i k x_n)`.
pub fn scattering_matrix(params: &ModelParams, k_x0: f64, n: i32) -> [[Complex64; 2]; 2] {
    let k = k_x0 / params.x0();
    let theta = k * spacing(params, n);
    let eta = Complex64::new(0.0, -params.mu() / (2.0 * k * barrier_position(params, n)));
    let ep = Complex64::from_polar(1.0, theta);
    let em = ep.conj();
    [[ep * (1.0 + eta), eta * em], [-eta * ep, em * (1.0 - eta)]]
}

pub fn scattering_step(
    params: &ModelParams,
    k_x0: f64,
    input: &PlaneWaveCoeffs,
) -> Result<PlaneWaveCoeffs> {
    check_positive("k x0", k_x0)?;
    params.require_non_negative_mu()?;
    let n = input.n + 1;
    let m = scattering_matrix(params, k_x0, n);
    Ok(PlaneWaveCoeffs {
        n,
        a: m[0][0] * input.a + m[0][1] * input.b,
        b: m[1][0] * input.a + m[1][1] * input.b,
        k_x0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeRow {
    pub n: i32,
    pub abs_a: f64,
    pub abs_b: f64,
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTrace {
    pub rows: Vec<AmplitudeRow>,
    /// Largest `|current_n - current_start|`.
    pub max_current_drift: f64,
    pub drift_tolerance: f64,
    /// Set when the drift exceeds the tolerance.
    pub flagged: bool,
}

pub const CURRENT_DRIFT_TOLERANCE: f64 = 1e-10;

/// Propagate `start` through `steps` barriers, recording `|A_n|`, `|B_n|`
/// and the current after each step (the start row included).
pub fn amplitude_trace(
    params: &ModelParams,
    k_x0: f64,
    start: PlaneWaveCoeffs,
    steps: u32,
) -> Result<AmplitudeTrace> {
    if steps == 0 {
        return Err(Error::domain("amplitude trace needs at least one step"));
    }
    let j0 = start.current();
    let row = |s: &PlaneWaveCoeffs| AmplitudeRow {
        n: s.n,
        abs_a: s.a.norm(),
        abs_b: s.b.norm(),
        current: s.current(),
    };
    let mut rows = vec![row(&start)];
    let mut s = start;
    let mut drift: f64 = 0.0;
    for _ in 0..steps {
        s = scattering_step(params, k_x0, &s)?;
        drift = drift.max((s.current() - j0).abs());
        rows.push(row(&s));
    }
    let tol = CURRENT_DRIFT_TOLERANCE * j0.abs().max(1.0);
    Ok(AmplitudeTrace {
        rows,
        max_current_drift: drift,
        drift_tolerance: tol,
        flagged: drift > tol,
    })
}
