//! The zero-energy mode.
//!
//! Between barriers the zero-energy Schrödinger equation reduces to
//! `psi'' = 0`, so the mode is piecewise linear, `psi(x) = a_n x + b_n` on
//! `[x_n, x_{n+1})`. Continuity plus the slope jump at each barrier give a
//! 2x2 recursion with unit determinant and trace 2. Its coefficient sequence
//! obeys
//!
//! ```text
//! a_{n+2} - (1 + mu + (1 - mu)/lambda) a_{n+1} + a_n / lambda = 0
//! ```
//!
//! with one root above 1 and one in `(0, 1)`. Starting on the decaying ray
//! gives the closed form
//!
//! ```text
//! psi(x) = a0 r^(n-1) (r x - s x_n),   s = (1 - r (1 - mu)) / mu,
//! ```
//!
//! where `r` is the decaying root. The mode obeys `psi(lambda x) =
//! lambda^(-alpha) psi(x)` with `alpha = ln r_grow / ln lambda`, because
//! `lambda r_decay = 1 / r_grow`.
//!
//! For `mu > 0` and `lambda > 1` the characteristic polynomial is negative at
//! 1 (its value there is `-mu (1 - 1/lambda)`) and positive at 0, so the roots
//! are always real with `0 < r_decay < 1 < r_grow`. The root functions still
//! check this and report instead of extrapolating.

use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::SignedLog;
use crate::model::{barrier_position, interval_index, ModelParams};

/// Overall scale used when none is given; negative so that `psi > 0`.
pub const DEFAULT_A0: f64 = -0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootData {
    pub r_grow: f64,
    pub r_decay: f64,
    pub discriminant: f64,
    pub alpha: f64,
}

/// Roots of `r^2 - 2 r + 1/lambda = 0` (the `mu = 1` array).
pub fn roots_special(lambda: f64) -> Result<RootData> {
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::domain(format!("lambda must be > 1, got {lambda}")));
    }
    let root = (1.0 - 1.0 / lambda).sqrt();
    let r_grow = 1.0 + root;
    // 1 - root loses digits for large lambda; lambda r_decay = 1 / r_grow.
    let r_decay = 1.0 / (lambda * r_grow);
    Ok(RootData {
        r_grow,
        r_decay,
        discriminant: 4.0 - 4.0 / lambda,
        alpha: root.ln_1p() / lambda.ln(),
    })
}

/// Roots of `r^2 - (1 + mu + (1 - mu)/lambda) r + 1/lambda = 0`.
pub fn roots_generic(lambda: f64, mu: f64) -> Result<RootData> {
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::domain(format!("lambda must be > 1, got {lambda}")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain(format!("mu must be > 0, got {mu}")));
    }
    let sum = 1.0 + mu + (1.0 - mu) / lambda;
    let discriminant = sum * sum - 4.0 / lambda;
    if discriminant.is_nan() || discriminant <= 0.0 {
        return Err(Error::NonRealRoots {
            lambda,
            mu,
            discriminant,
        });
    }
    let r_grow = 0.5 * (sum + discriminant.sqrt());
    let r_decay = 1.0 / (lambda * r_grow);
    if !(r_decay > 0.0 && r_decay < 1.0 && r_grow > 1.0) {
        return Err(Error::NonRealRoots {
            lambda,
            mu,
            discriminant,
        });
    }
    Ok(RootData {
        r_grow,
        r_decay,
        discriminant,
        alpha: r_grow.ln() / lambda.ln(),
    })
}

/// The `b0` that places `(a0, b0)` on the decaying ray:
/// `b0 = (x_1 / mu) a0 (r_decay - (1 + mu))`.
pub fn initial_b0(params: &ModelParams, a0: f64) -> Result<f64> {
    params.require_positive_mu()?;
    let mu = params.mu();
    let roots = roots_generic(params.lambda(), mu)?;
    Ok(barrier_position(params, 1) / mu * a0 * (roots.r_decay - (1.0 + mu)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(a_{n-1}, b_{n-1}) -> (a_n, b_n)` across barrier `n`.
    Forward,
    /// `(a_n, b_n) -> (a_{n-1}, b_{n-1})`.
    Backward,
}

/// A 2x2 transfer matrix with its determinant cached at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer2<T = f64> {
    entries: [[T; 2]; 2],
    det: T,
}

impl<T> Transfer2<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    pub fn new(entries: [[T; 2]; 2]) -> Self {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        Self { entries, det }
    }

    pub fn entries(&self) -> [[T; 2]; 2] {
        self.entries
    }

    pub fn det(&self) -> T {
        self.det
    }

    pub fn trace(&self) -> T {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Transfer2<T>) -> Transfer2<T> {
        let a = &self.entries;
        let b = &rhs.entries;
        Transfer2::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Zero-energy recursion matrix across barrier `n`.
///
/// Forward: `[[1 + mu, mu / x_n], [-mu x_n, 1 - mu]]`. The backward matrix is
/// the forward one with `mu -> -mu`, which is also its inverse.
pub fn step_matrix(params: &ModelParams, n: i32, direction: Direction) -> Transfer2 {
    let mu = match direction {
        Direction::Forward => params.mu(),
        Direction::Backward => -params.mu(),
    };
    let xn = barrier_position(params, n);
    Transfer2::new([[1.0 + mu, mu / xn], [-mu * xn, 1.0 - mu]])
}

/// Coefficients `(a_n, b_n)` of the linear piece on `[x_n, x_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentCoeffs {
    pub n: i32,
    pub a: SignedLog,
    pub b: SignedLog,
}

impl SegmentCoeffs {
    pub fn a(&self) -> f64 {
        self.a.value()
    }

    pub fn b(&self) -> f64 {
        self.b.value()
    }
}

/// The assembled zero-energy mode for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModeState {
    params: ModelParams,
    a0: f64,
    roots: RootData,
    c_prime: f64,
    /// `s = x~_n / x_n`; equal to 1 when `mu = 1`.
    s_ratio: f64,
}

impl ZeroModeState {
    pub fn new(params: ModelParams, a0: f64) -> Result<Self> {
        params.require_positive_mu()?;
        if !(a0.is_finite() && a0 != 0.0) {
            return Err(Error::domain(format!(
                "a0 must be finite and nonzero, got {a0}"
            )));
        }
        let mu = params.mu();
        let roots = if mu == 1.0 {
            roots_special(params.lambda())?
        } else {
            roots_generic(params.lambda(), mu)?
        };
        let r = roots.r_decay;
        let s_ratio = (1.0 - r * (1.0 - mu)) / mu;
        let c_prime = a0 * params.x0().powf(1.0 + roots.alpha) * (r - s_ratio) / r;
        Ok(Self {
            params,
            a0,
            roots,
            c_prime,
            s_ratio,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn b0(&self) -> f64 {
        -self.a0 * self.s_ratio * self.params.x0() / self.roots.r_decay
    }

    pub fn roots(&self) -> &RootData {
        &self.roots
    }

    pub fn alpha(&self) -> f64 {
        self.roots.alpha
    }

    /// Envelope constant `C'` with `psi(x_n) = C' x_n^(-alpha)`.
    pub fn c_prime(&self) -> f64 {
        self.c_prime
    }

    /// `x~_n / x_n`.
    pub fn s_ratio(&self) -> f64 {
        self.s_ratio
    }

    /// `(C' lambda^(-alpha), C' lambda^alpha)`; the bounds on `g` when
    /// `a0 < 0`.
    pub fn envelope(&self) -> (f64, f64) {
        // lambda^alpha = r_grow exactly by construction of alpha.
        let la = self.params.lambda().powf(self.roots.alpha);
        (self.c_prime / la, self.c_prime * la)
    }

    /// Closed-form `(a_n, b_n)`:
    /// `a_n = a0 r^n`, `b_n = -a0 r^(n-1) s x_n`.
    pub fn coefficients(&self, n: i32) -> SegmentCoeffs {
        let ln_r = self.roots.r_decay.ln();
        let a0 = SignedLog::from_f64(self.a0);
        let nf = f64::from(n);
        let a = a0.scale_exp(nf * ln_r);
        let b = SignedLog::from_f64(-self.a0 * self.s_ratio)
            .scale_exp((nf - 1.0) * ln_r + self.params.ln_barrier_position(n));
        SegmentCoeffs { n, a, b }
    }

    /// `psi(x_n)` in sign/log form.
    pub fn value_at_barrier(&self, n: i32) -> SignedLog {
        self.piece(n, 1.0)
    }

    /// `a0 r^(n-1) x_n (r u - s)` for `x = u x_n`.
    fn piece(&self, n: i32, u: f64) -> SignedLog {
        let r = self.roots.r_decay;
        let shape = SignedLog::from_f64(self.a0 * (r * u - self.s_ratio));
        shape.scale_exp((f64::from(n) - 1.0) * r.ln() + self.params.ln_barrier_position(n))
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let n = interval_index(&self.params, x)?;
        let u = x / barrier_position(&self.params, n);
        Ok(self.piece(n, u).value())
    }

    /// Slope `psi'(x) = a_n` of the piece containing `x`.
    pub fn slope(&self, x: f64) -> Result<f64> {
        let n = interval_index(&self.params, x)?;
        Ok(self.coefficients(n).a())
    }

    /// `g(x) = psi(x) x^alpha`, invariant under `x -> lambda x`.
    pub fn ratio_g(&self, x: f64) -> Result<f64> {
        let n = interval_index(&self.params, x)?;
        let u = x / barrier_position(&self.params, n);
        Ok(self.profile_at(u))
    }

    /// `f(v) = g(x0 e^v)`, periodic in `v` with period `ln lambda`.
    pub fn log_profile_f(&self, v: f64) -> f64 {
        let period = self.params.ln_lambda();
        let w = v.rem_euclid(period);
        let u = w.exp().clamp(1.0, self.params.lambda());
        self.profile_at(u)
    }

    /// `g` as a function of the position `u in [1, lambda]` within an interval:
    /// `a0 x0^(1+alpha) (r u - s) u^alpha / r`.
    fn profile_at(&self, u: f64) -> f64 {
        let r = self.roots.r_decay;
        self.a0
            * self.params.x0().powf(1.0 + self.roots.alpha)
            * (r * u - self.s_ratio)
            * u.powf(self.roots.alpha)
            / r
    }

    /// Ratio `lambda^3 r^2` between consecutive per-interval norms.
    pub fn norm_ratio(&self) -> f64 {
        let lambda = self.params.lambda();
        let r = self.roots.r_decay;
        lambda * lambda * lambda * r * r
    }

    /// `I = int_1^lambda (r u - s)^2 du`.
    fn unit_norm_integral(&self) -> f64 {
        let r = self.roots.r_decay;
        let s = self.s_ratio;
        let lambda = self.params.lambda();
        ((r * lambda - s).powi(3) - (r - s).powi(3)) / (3.0 * r)
    }

    /// `int_{x_n}^{x_{n+1}} psi^2 dx = (a0^2 x0^3 / r^2) (lambda^3 r^2)^n I`.
    pub fn interval_norm(&self, n: i32) -> f64 {
        let r = self.roots.r_decay;
        let x0 = self.params.x0();
        let prefactor = self.a0 * self.a0 * x0 * x0 * x0 / (r * r) * self.unit_norm_integral();
        prefactor * (f64::from(n) * self.norm_ratio().ln()).exp()
    }

    /// Sum of [`interval_norm`](Self::interval_norm) over `n_lo..=n_hi`.
    pub fn partial_norm(&self, n_lo: i32, n_hi: i32) -> Result<f64> {
        if n_lo > n_hi {
            return Err(Error::domain(format!(
                "partial_norm needs n_lo <= n_hi, got {n_lo} > {n_hi}"
            )));
        }
        let count = f64::from(n_hi) - f64::from(n_lo) + 1.0;
        let ln_q = self.norm_ratio().ln();
        // (q^count - 1)/(q - 1) via expm1 so q -> 1 degrades to `count`.
        let geometric = if ln_q == 0.0 {
            count
        } else {
            (count * ln_q).exp_m1() / ln_q.exp_m1()
        };
        Ok(self.interval_norm(n_lo) * geometric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::jump_coefficient;

    const PHI: f64 = 1.618_033_988_749_895;

    fn fig1_state() -> ZeroModeState {
        ZeroModeState::new(ModelParams::new(1.0, 1.2, 1.0).unwrap(), DEFAULT_A0).unwrap()
    }

    #[test]
    fn special_roots() {
        let r = roots_special(4.0 / 3.0).unwrap();
        assert!((r.r_decay - 0.5).abs() < 1e-15);
        assert!((r.r_grow - 1.5).abs() < 1e-15);
        assert!((roots_special(PHI).unwrap().alpha - 1.0).abs() < 1e-12);
        assert!((roots_special(3.0).unwrap().alpha - 0.5433).abs() < 5e-4);
        let lambda = 2.5;
        let r = roots_special(lambda).unwrap();
        assert!((lambda * r.r_decay - 1.0 / (1.0 + (1.0 - 1.0 / lambda).sqrt())).abs() < 1e-15);
        assert!(roots_special(1.0).is_err());
        assert!(roots_special(0.3).is_err());
    }

    #[test]
    fn generic_roots() {
        let r = roots_generic(2.0, 1.0).unwrap();
        assert!((r.r_decay - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        // r^2 - 2.5 r + 0.5 = 0
        let r = roots_generic(2.0, 2.0).unwrap();
        let d = (6.25f64 - 2.0).sqrt();
        assert!((r.r_grow - (2.5 + d) / 2.0).abs() < 1e-14);
        assert!((r.r_decay - (2.5 - d) / 2.0).abs() < 1e-14);
        assert!((r.r_grow - 2.280776).abs() < 1e-6);
        assert!((r.r_decay - 0.219224).abs() < 1e-6);
        assert!(roots_generic(2.0, 0.0).is_err());
        assert!(roots_generic(2.0, -1.0).is_err());
        assert!(roots_generic(0.9, 1.0).is_err());
    }

    #[test]
    fn generic_equals_special_at_unit_coupling() {
        for lambda in [1.01, 1.2, PHI, 2.0, 3.0, 17.0, 1e6] {
            let g = roots_generic(lambda, 1.0).unwrap();
            let s = roots_special(lambda).unwrap();
            assert!((g.r_grow - s.r_grow).abs() <= 1e-14 * s.r_grow);
            assert!((g.r_decay - s.r_decay).abs() <= 1e-14 * s.r_decay);
            assert!((g.alpha - s.alpha).abs() <= 1e-14 * s.alpha);
        }
    }

    #[test]
    fn initial_b0_values() {
        let p = ModelParams::new(1.0, 1.2, 1.0).unwrap();
        assert!((initial_b0(&p, -0.8).unwrap() - 1.351918).abs() < 1e-6);
        let p = ModelParams::new(1.0, 4.0 / 3.0, 1.0).unwrap();
        assert!((initial_b0(&p, 1.0).unwrap() + 2.0).abs() < 1e-14);
        let p = ModelParams::new(1.0, 2.0, 0.0).unwrap();
        assert!(initial_b0(&p, 1.0).is_err());
    }

    #[test]
    fn state_b0_matches_initial_b0() {
        for (lambda, mu) in [(1.2, 1.0), (3.0, 0.5), (2.0, 2.0), (PHI, 0.1)] {
            let p = ModelParams::new(0.7, lambda, mu).unwrap();
            let st = ZeroModeState::new(p, -1.3).unwrap();
            let b0 = initial_b0(&p, -1.3).unwrap();
            assert!((st.b0() - b0).abs() <= 1e-13 * b0.abs(), "{lambda} {mu}");
            assert!((st.coefficients(0).b() - b0).abs() <= 1e-13 * b0.abs());
        }
    }

    #[test]
    fn step_matrix_entries() {
        let p = ModelParams::new(1.0, 2.0, 1.0).unwrap();
        let m = step_matrix(&p, 1, Direction::Forward).entries();
        assert_eq!(m, [[2.0, 0.5], [-2.0, 0.0]]);
        let back = step_matrix(&p, 1, Direction::Backward);
        let neg = step_matrix(&p.with_mu(-1.0).unwrap(), 1, Direction::Forward);
        assert_eq!(back.entries(), neg.entries());
        let id = step_matrix(&p, 1, Direction::Forward).compose(&back);
        assert_eq!(id.entries(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn closed_form_values() {
        let st = fig1_state();
        assert!((st.evaluate(1.0).unwrap() - 0.551918).abs() < 1e-6);
        assert!((st.evaluate(1.0).unwrap() - st.c_prime()).abs() < 1e-15);
        // a_10 = a0 r^10
        let a10 = st.coefficients(10).a();
        assert!((a10 - (-4.211_969_324_004_5e-3)).abs() < 1e-15);
        let (lo, hi) = st.envelope();
        assert!((hi - 0.78).abs() < 0.01 && (lo - 0.39).abs() < 0.01);
        assert!((st.alpha() - 1.877_707_665_886_147_6).abs() < 1e-13);
    }

    #[test]
    fn recursion_residual() {
        let st = fig1_state();
        let p = st.params();
        let mu = p.mu();
        let c4 = st.coefficients(4);
        let c5 = st.coefficients(5);
        let x5 = barrier_position(p, 5);
        let resid = c5.a() - (1.0 + mu) * c4.a() - mu / x5 * c4.b();
        assert!(resid.abs() < 1e-13);
    }

    #[test]
    fn derivative_jump_at_barriers() {
        for (lambda, mu) in [(1.2, 1.0), (3.0, 2.0), (2.0, 0.5)] {
            let st = ZeroModeState::new(ModelParams::new(1.0, lambda, mu).unwrap(), -0.8).unwrap();
            let p = *st.params();
            for n in -30..=30 {
                let jump = st.coefficients(n).a() - st.coefficients(n - 1).a();
                let psi = st.value_at_barrier(n).value();
                let expected = jump_coefficient(&p, n) * psi;
                assert!(
                    (jump - expected).abs() <= 1e-12 * expected.abs(),
                    "n={n}: {jump} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn continuity_at_barriers() {
        let st = ZeroModeState::new(ModelParams::new(2.0, 1.7, 0.6).unwrap(), -0.8).unwrap();
        for n in -20..=20 {
            let xn = barrier_position(st.params(), n);
            let left = st.coefficients(n - 1);
            let right = st.coefficients(n);
            let l = left.a() * xn + left.b();
            let r = right.a() * xn + right.b();
            assert!((l - r).abs() <= 1e-12 * r.abs(), "n={n}");
            assert!((st.evaluate(xn).unwrap() - r).abs() <= 1e-12 * r.abs());
        }
    }

    #[test]
    fn generic_c_prime_reduces() {
        let st = fig1_state();
        let r2 = st.roots().r_decay;
        let x0: f64 = 1.0;
        let expected = -0.8 * (1.0 - 1.0 / r2) * x0.powf(st.alpha() + 1.0);
        assert!((st.c_prime() - expected).abs() < 1e-15);
    }

    #[test]
    fn norm_geometry() {
        let st = fig1_state();
        assert!((st.norm_ratio() - 0.605_093_908_156_889_4).abs() < 1e-14);
        let total = st.partial_norm(-3, 2).unwrap();
        let direct: f64 = (-3..=2).map(|n| st.interval_norm(n)).sum();
        assert!((total - direct).abs() <= 1e-13 * direct);
        assert!(st.partial_norm(2, 1).is_err());
    }

    #[test]
    fn degenerate_norm_ratio_counts_intervals() {
        // lambda^3 r^2 = lambda / r_grow^2 = 1 at r_grow = sqrt(lambda); for
        // mu = 1 that is t^3 - t^2 - t - 1 = 0 with t = sqrt(lambda).
        // Bisect on the special branch.
        let mut lo = 1.0001;
        let mut hi = 100.0;
        let f = |l: f64| {
            let r = roots_special(l).unwrap();
            l * l * l * r.r_decay * r.r_decay - 1.0
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let st = ZeroModeState::new(ModelParams::new(1.0, lo, 1.0).unwrap(), -0.8).unwrap();
        let q = st.norm_ratio();
        assert!((q - 1.0).abs() < 1e-12);
        let one = st.interval_norm(0);
        let sum = st.partial_norm(0, 99).unwrap();
        assert!(sum.is_finite());
        assert!((sum - 100.0 * one).abs() <= 1e-8 * sum);
    }
}
