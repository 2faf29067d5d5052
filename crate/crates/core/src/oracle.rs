//! Brute-force cross-checks that avoid the closed forms: raw transfer-matrix
//! propagation, a backward (Miller) recurrence for the decaying ray, an ODE
//! with the delta barriers smeared into rectangles, and adaptive quadrature
//! of the momentum transform.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{barrier_position, spacing, ModelParams};
use crate::momentum::CutoffSpec;
use crate::quad::adaptive;
use crate::zero_mode::{Direction, ZeroModeState};

/// Slope and intercept of the piece on interval `n`, as plain floats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawCoeffs {
    pub n: i32,
    pub a: f64,
    pub b: f64,
}

fn raw_step(params: &ModelParams, n: i32, a: f64, b: f64, direction: Direction) -> (f64, f64) {
    let mu = match direction {
        Direction::Forward => params.mu(),
        Direction::Backward => -params.mu(),
    };
    let xn = barrier_position(params, n);
    ((1.0 + mu) * a + mu / xn * b, -mu * xn * a + (1.0 - mu) * b)
}

/// Apply the barrier recursion `steps` times starting from `(a, b)` on
/// interval `start`. Forward steps cross `x_{n+1}`; backward steps cross
/// `x_n` and land on interval `n - 1`. The start is the first element.
pub fn propagate_raw(
    params: &ModelParams,
    start: RawCoeffs,
    steps: u32,
    direction: Direction,
) -> Vec<RawCoeffs> {
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(start);
    let mut cur = start;
    for _ in 0..steps {
        cur = match direction {
            Direction::Forward => {
                let n = cur.n + 1;
                let (a, b) = raw_step(params, n, cur.a, cur.b, direction);
                RawCoeffs { n, a, b }
            }
            Direction::Backward => {
                let (a, b) = raw_step(params, cur.n, cur.a, cur.b, direction);
                RawCoeffs { n: cur.n - 1, a, b }
            }
        };
        out.push(cur);
    }
    out
}

/// The decaying ray recovered by backward recurrence.
///
/// Any start far out at interval `seed_n` is dominated, after propagating
/// back, by the solution that decays forward; the growing admixture shrinks
/// like `(r_decay / r_grow)^(seed_n - n)`. The result is normalized so that
/// `a_0 = a0` and covers intervals `0..=n_last`.
pub fn miller_decaying_ray(
    params: &ModelParams,
    a0: f64,
    n_last: i32,
    extra: u32,
) -> Result<Vec<RawCoeffs>> {
    params.require_positive_mu()?;
    if n_last < 0 {
        return Err(Error::domain("n_last must be >= 0"));
    }
    let seed_n = n_last + extra as i32;
    let mut cur = RawCoeffs {
        n: seed_n,
        a: 1.0,
        b: 0.0,
    };
    let mut ln_scale = 0.0;
    let mut kept: Vec<(RawCoeffs, f64)> = Vec::with_capacity(n_last as usize + 1);
    while cur.n > 0 {
        let (a, b) = raw_step(params, cur.n, cur.a, cur.b, Direction::Backward);
        let m = a.abs().max(b.abs() / barrier_position(params, cur.n - 1));
        ln_scale += m.ln();
        cur = RawCoeffs {
            n: cur.n - 1,
            a: a / m,
            b: b / m,
        };
        if cur.n <= n_last {
            kept.push((cur, ln_scale));
        }
    }
    let (first, first_scale) = *kept.last().expect("n_last >= 0 keeps interval 0");
    let norm = a0 / first.a;
    let mut out: Vec<RawCoeffs> = kept
        .into_iter()
        .rev()
        .map(|(c, s)| {
            let f = norm * (s - first_scale).exp();
            RawCoeffs {
                n: c.n,
                a: c.a * f,
                b: c.b * f,
            }
        })
        .collect();
    out.sort_by_key(|c| c.n);
    Ok(out)
}

/// Delta barriers replaced by rectangles of width `width_frac * d_n`
/// centred on `x_n` and height `mu / (x_n w_n)`, so each carries the same
/// jump `mu / x_n` in `psi'' = V psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizedPotential {
    pub params: ModelParams,
    pub width_frac: f64,
    /// Inclusive interval range covered by the integration.
    pub window: (i32, i32),
}

pub const MAX_WIDTH_FRAC: f64 = 0.1;

impl RegularizedPotential {
    pub fn new(params: ModelParams, width_frac: f64, window: (i32, i32)) -> Result<Self> {
        if !(width_frac > 0.0 && width_frac <= MAX_WIDTH_FRAC) {
            return Err(Error::Config(format!(
                "width_frac must lie in (0, {MAX_WIDTH_FRAC}], got {width_frac}"
            )));
        }
        if window.0 > window.1 {
            return Err(Error::Config(format!("empty window {window:?}")));
        }
        params.require_non_negative_mu()?;
        let reg = Self {
            params,
            width_frac,
            window,
        };
        for n in window.0..=window.1 + 1 {
            let right_edge = barrier_position(&params, n) + 0.5 * reg.width(n);
            let next_left = barrier_position(&params, n + 1) - 0.5 * reg.width(n + 1);
            if right_edge >= next_left {
                return Err(Error::Config(format!(
                    "rectangles at x_{n} and x_{} overlap",
                    n + 1
                )));
            }
        }
        Ok(reg)
    }

    pub fn width(&self, n: i32) -> f64 {
        self.width_frac * spacing(&self.params, n)
    }

    pub fn height(&self, n: i32) -> f64 {
        self.params.mu() / (barrier_position(&self.params, n) * self.width(n))
    }

    /// Rectangle containing `x`, if any.
    pub fn rectangle_at(&self, x: f64) -> Option<i32> {
        (self.window.0..=self.window.1 + 1).find(|&n| {
            let c = barrier_position(&self.params, n);
            (x - c).abs() < 0.5 * self.width(n)
        })
    }

    fn span(&self) -> (f64, f64) {
        (
            barrier_position(&self.params, self.window.0),
            barrier_position(&self.params, self.window.1 + 1),
        )
    }

    /// Piece boundaries and the constant potential on each piece.
    fn pieces(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.span();
        let mut edges = vec![lo];
        let mut potential = Vec::new();
        for n in self.window.0..=self.window.1 + 1 {
            let c = barrier_position(&self.params, n);
            let half = 0.5 * self.width(n);
            for (e, v) in [(c - half, 0.0), (c + half, self.height(n))] {
                if e > *edges.last().unwrap() && e < hi {
                    edges.push(e);
                    potential.push(v);
                }
            }
        }
        edges.push(hi);
        potential.push(0.0);
        // potential[i] applies on [edges[i], edges[i+1]]; fix the first
        // piece if the window starts inside a rectangle.
        if let Some(n) = self.rectangle_at(0.5 * (edges[0] + edges[1])) {
            potential[0] = self.height(n);
        }
        (edges, potential)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeSample {
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
}

/// Steps of the fourth-order Runge-Kutta integrator per rectangle.
pub const RK4_STEPS_PER_RECTANGLE: usize = 32;

fn rk4_piece(psi: f64, dpsi: f64, v: f64, from: f64, to: f64, steps: usize) -> (f64, f64) {
    let h = (to - from) / steps as f64;
    let (mut y, mut z) = (psi, dpsi);
    for _ in 0..steps {
        let k1 = (z, v * y);
        let k2 = (z + 0.5 * h * k1.1, v * (y + 0.5 * h * k1.0));
        let k3 = (z + 0.5 * h * k2.1, v * (y + 0.5 * h * k2.0));
        let k4 = (z + h * k3.1, v * (y + h * k3.0));
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (y, z)
}

/// Integrate `psi'' = V_reg psi` from `(x_seed, psi, dpsi)` to each target
/// (in either direction). Steps never straddle a rectangle edge.
pub fn integrate_with_seed(
    reg: &RegularizedPotential,
    x_seed: f64,
    psi: f64,
    dpsi: f64,
    targets: &[f64],
) -> Result<Vec<OdeSample>> {
    let (lo, hi) = reg.span();
    let (edges, potential) = reg.pieces();
    let piece_of = |x: f64| -> usize {
        match edges.binary_search_by(|e| e.total_cmp(&x)) {
            Ok(i) => i.min(potential.len() - 1),
            Err(i) => i.saturating_sub(1).min(potential.len() - 1),
        }
    };
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if !(t >= lo && t <= hi) || !(x_seed >= lo && x_seed <= hi) {
            return Err(Error::domain(format!(
                "points must lie in the window [{lo}, {hi}], got seed {x_seed} target {t}"
            )));
        }
        let (mut y, mut z, mut x) = (psi, dpsi, x_seed);
        while x != t {
            let i = piece_of(if t > x { x } else { x - f64::EPSILON * x.abs() });
            let stop = if t > x {
                edges[i + 1].min(t)
            } else {
                edges[i].max(t)
            };
            let stop = if stop == x {
                // sitting on an edge: step into the neighbouring piece
                if t > x {
                    edges[(i + 2).min(edges.len() - 1)].min(t)
                } else {
                    edges[i.saturating_sub(1)].max(t)
                }
            } else {
                stop
            };
            let mid = 0.5 * (x + stop);
            let v = potential[piece_of(mid)];
            let steps = if v == 0.0 { 1 } else { RK4_STEPS_PER_RECTANGLE };
            (y, z) = rk4_piece(y, z, v, x, stop, steps);
            x = stop;
        }
        out.push(OdeSample {
            x: t,
            psi: y,
            dpsi: z,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeComparison {
    /// `(x, psi_ode, psi0)` at each interval midpoint of the window.
    pub samples: Vec<(f64, f64, f64)>,
    pub max_relative_deviation: f64,
}

/// Integrate the regularized equation seeded from the closed form at
/// `match_at` and compare with `psi0` at every interval midpoint.
pub fn ode_zero_mode(
    reg: &RegularizedPotential,
    state: &ZeroModeState,
    match_at: f64,
) -> Result<OdeComparison> {
    if let Some(n) = reg.rectangle_at(match_at) {
        return Err(Error::Config(format!(
            "match_at = {match_at} lies inside the rectangle at x_{n}"
        )));
    }
    let psi = state.evaluate(match_at)?;
    let dpsi = state.slope(match_at)?;
    let mids: Vec<f64> = (reg.window.0..=reg.window.1)
        .map(|n| 0.5 * (barrier_position(&reg.params, n) + barrier_position(&reg.params, n + 1)))
        .collect();
    let ode = integrate_with_seed(reg, match_at, psi, dpsi, &mids)?;
    let mut samples = Vec::with_capacity(mids.len());
    let mut worst: f64 = 0.0;
    for s in ode {
        let exact = state.evaluate(s.x)?;
        worst = worst.max(((s.psi - exact) / exact).abs());
        samples.push((s.x, s.psi, exact));
    }
    Ok(OdeComparison {
        samples,
        max_relative_deviation: worst,
    })
}

/// Adaptive quadrature of `psi0(x) e^(-i q x)`, `q = p - i epsilon |p|`,
/// over `[x_{n_c}, x_{n_max + 1}]`, one adaptive run per interval.
pub fn quadrature_transform(state: &ZeroModeState, spec: &CutoffSpec, p: f64) -> Result<Complex64> {
    spec.validate()?;
    let params = state.params();
    let q = Complex64::new(p, -spec.epsilon * p.abs());
    let minus_i = Complex64::new(0.0, -1.0);
    let mut total = Complex64::new(0.0, 0.0);
    for n in spec.n_c..=spec.n_max {
        let lo = barrier_position(params, n);
        let hi = barrier_position(params, n + 1);
        // psi0 on the interval from its endpoint values, not its coefficients.
        let c = state.coefficients(n);
        let (a, b) = (c.a(), c.b());
        let scale = state.value_at_barrier(n).value().abs() * (hi - lo);
        let cycles = (q.re.abs() * (hi - lo) / std::f64::consts::TAU).ceil() as usize;
        let r = adaptive(
            |x| (minus_i * q * x).exp() * (a * x + b),
            lo,
            hi,
            1e-15 * scale,
            1e-13,
            64 + 4 * cycles,
        )
        .map_err(|e| match e {
            Error::NonConvergence { detail, .. } => Error::NonConvergence {
                what: "quadrature transform",
                detail: format!("interval {n}: {detail}"),
            },
            other => other,
        })?;
        total += r.value;
    }
    Ok(total / (2.0 * std::f64::consts::PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zero_mode::{initial_b0, DEFAULT_A0};

    fn params(lambda: f64, mu: f64) -> ModelParams {
        ModelParams::new(1.0, lambda, mu).unwrap()
    }

    #[test]
    fn round_trip() {
        let p = params(1.2, 1.0);
        let start = RawCoeffs {
            n: 0,
            a: -0.8,
            b: 0.3,
        };
        let fwd = propagate_raw(&p, start, 8, Direction::Forward);
        let back = propagate_raw(&p, *fwd.last().unwrap(), 8, Direction::Backward);
        let end = back.last().unwrap();
        assert_eq!(end.n, 0);
        assert!((end.a - start.a).abs() < 1e-10 && (end.b - start.b).abs() < 1e-10);
    }

    #[test]
    fn miller_matches_tuned_b0() {
        for (lambda, mu) in [(1.2, 1.0), (3.0, 0.5), (2.0, 2.0)] {
            let p = params(lambda, mu);
            let ray = miller_decaying_ray(&p, DEFAULT_A0, 10, 80).unwrap();
            let b0 = initial_b0(&p, DEFAULT_A0).unwrap();
            assert_eq!(ray[0].n, 0);
            assert!((ray[0].b - b0).abs() < 1e-12 * b0.abs(), "{lambda} {mu}");
        }
    }

    #[test]
    fn free_ode_is_linear() {
        let reg = RegularizedPotential::new(params(1.5, 0.0), 0.05, (0, 4)).unwrap();
        let targets: Vec<f64> = (0..20).map(|i| 1.0 + 0.3 * f64::from(i)).collect();
        let out = integrate_with_seed(&reg, 2.2, 0.7, -0.1, &targets).unwrap();
        for s in out {
            assert_eq!(s.dpsi, -0.1);
            assert!((s.psi - (0.7 - 0.1 * (s.x - 2.2))).abs() < 1e-14);
        }
    }

    #[test]
    fn regularized_jump() {
        let p = params(1.2, 1.0);
        let reg = RegularizedPotential::new(p, 1e-3, (0, 6)).unwrap();
        let n = 3;
        let xn = barrier_position(&p, n);
        let half = 0.5 * reg.width(n);
        let out = integrate_with_seed(&reg, xn - 2.0 * half, 1.0, 0.0, &[xn + 2.0 * half]).unwrap();
        let jump = out[0].dpsi;
        assert!((jump - 1.0 / xn).abs() < 1e-3 / xn);
    }

    #[test]
    fn configuration_errors() {
        let p = params(1.2, 1.0);
        assert!(RegularizedPotential::new(p, 0.0, (0, 6)).is_err());
        assert!(RegularizedPotential::new(p, 0.2, (0, 6)).is_err());
        let reg = RegularizedPotential::new(p, 1e-2, (0, 6)).unwrap();
        let s = ZeroModeState::new(p, DEFAULT_A0).unwrap();
        assert!(matches!(
            ode_zero_mode(&reg, &s, barrier_position(&p, 2)),
            Err(Error::Config(_))
        ));
    }
}
