//! Cutoff momentum-space transform of the zero mode and its small-`p` regimes.
//!
//! `psi~(p) = (2 pi)^(-1/2) int_{x_c}^inf psi0(x) e^(-i p x) dx` is summed
//! exactly over the linear pieces. Past the cutoff `|psi0|` and the slopes
//! `|a_n|` decrease monotonically, so integrating the tail beyond `x_N` by
//! parts gives its leading term `psi0(x_N) e^(-i q x_N) / (i q)` exactly and
//! bounds the rest by `2 |a_N| / |q|^2`. The leading term is added and the
//! sum stops once that bound is small.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{barrier_position, spacing};
use crate::quad::gauss_legendre;
use crate::special::{exp_integral_e1, ln_gamma, EULER_GAMMA};
use crate::zero_mode::{roots_generic, roots_special, ZeroModeState};
use crate::ModelParams;

/// `|alpha - 1|` at or below which the critical regime applies.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Regulators used for the `epsilon -> 0` extrapolation when `alpha <= 1`.
pub const EPSILON_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Relative disagreement between the extrapolated ladder and the direct sum
/// above which a sample is flagged.
pub const LADDER_TOLERANCE: f64 = 1e-5;

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn from_alpha(alpha: f64) -> Self {
        if (alpha - 1.0).abs() <= CRITICAL_TOLERANCE {
            Regime::Critical
        } else if alpha < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn regime_classify(lambda: f64, mu: f64) -> Result<Regime> {
    let roots = if mu == 1.0 {
        roots_special(lambda)?
    } else {
        roots_generic(lambda, mu)?
    };
    Ok(Regime::from_alpha(roots.alpha))
}

/// Where the transform starts and how it may be truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec {
    /// Cutoff at the barrier `x_c = x_{n_c}`.
    pub n_c: i32,
    /// Last interval the sum may include. Reaching it before the tail bound
    /// is met flags the sample.
    pub n_max: i32,
    /// Regulator: the transform is evaluated at `p - i epsilon |p|`.
    pub epsilon: f64,
    /// Stop once the tail bound is below `tail_rtol` times the partial sum.
    pub tail_rtol: f64,
}

impl CutoffSpec {
    /// Cutoff at `x_{n_c}` with the sum allowed to run until `x_n` nears the
    /// top of the double range.
    pub fn new(params: &ModelParams, n_c: i32) -> Self {
        let reach = ((650.0 - params.x0().ln()) / params.ln_lambda()).floor();
        let n_max = (reach.min(f64::from(i32::MAX / 2)) as i32).max(n_c + 1);
        Self {
            n_c,
            n_max,
            epsilon: 0.0,
            tail_rtol: 1e-12,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max <= self.n_c {
            return Err(Error::Config(format!(
                "n_max ({}) must exceed n_c ({})",
                self.n_max, self.n_c
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.tail_rtol > 0.0 && self.tail_rtol < 1.0) {
            return Err(Error::Config(format!(
                "tail_rtol must lie in (0, 1), got {}",
                self.tail_rtol
            )));
        }
        Ok(())
    }

    pub fn x_c(&self, params: &ModelParams) -> f64 {
        barrier_position(params, self.n_c)
    }
}

/// Regulated values at [`EPSILON_LADDER`] and their Richardson extrapolant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonLadder {
    pub epsilons: [f64; 3],
    pub values: [Complex64; 3],
    pub extrapolated: Complex64,
    /// `|R_1 - R_1'|` and `|R_2 - R_1'|` for the first- and second-level
    /// Richardson estimates.
    pub differences: [f64; 2],
    /// Successive differences decrease.
    pub cauchy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumSample {
    pub p: f64,
    pub value: Complex64,
    pub magnitude_sq: f64,
    pub regime: Regime,
    pub epsilon: f64,
    /// Last interval included in the sum.
    pub n_last: i32,
    /// Bound on the magnitude of the omitted tail (same units as `value`).
    pub truncation_bound: f64,
    /// Leading boundary term of the tail past interval `n_last`, included in
    /// `value`.
    pub tail_correction: Complex64,
    pub ladder: Option<EpsilonLadder>,
    pub flagged: bool,
}

/// `int_{x_lo}^{x_hi} (a x + b) e^(-i p x) dx`.
pub fn segment_transform(a: f64, b: f64, x_lo: f64, x_hi: f64, p: Complex64) -> Complex64 {
    segment_local(a * x_lo + b, a, x_lo, x_hi - x_lo, p)
}

/// Same integral written around the left end: `psi_lo` is the value there,
/// `h` the width.
fn segment_local(psi_lo: f64, a: f64, x_lo: f64, h: f64, p: Complex64) -> Complex64 {
    if p == Complex64::new(0.0, 0.0) {
        return Complex64::new(psi_lo * h + 0.5 * a * h * h, 0.0);
    }
    let z = Complex64::new(0.0, -1.0) * p * h;
    let (phi1, phi2) = phi_functions(z);
    let phase = (Complex64::new(0.0, -1.0) * p * x_lo).exp();
    phase * (phi1 * (psi_lo * h) + phi2 * (a * h * h))
}

/// `(e^z - 1) / z` and `int_0^1 s e^(z s) ds = (e^z (z - 1) + 1) / z^2`.
fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut phi2 = Complex64::new(0.0, 0.0);
        for k in 0..30 {
            let kf = k as f64;
            // term = z^k / k!
            phi1 += term / (kf + 1.0);
            phi2 += term / (kf + 2.0);
            term *= z / (kf + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        (phi1, phi2)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    }
}

struct SegmentSum {
    sum: Complex64,
    correction: Complex64,
    n_last: i32,
    bound: f64,
    converged: bool,
}

fn segment_sum(state: &ZeroModeState, spec: &CutoffSpec, p: f64, epsilon: f64) -> SegmentSum {
    let params = state.params();
    let q = Complex64::new(p, -epsilon * p.abs());
    let qn = q.norm();
    let alpha = state.alpha();
    let lambda = params.lambda();
    let geometric = if alpha > 1.0 {
        1.0 / (1.0 - lambda.powf(1.0 - alpha))
    } else {
        f64::INFINITY
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = spec.n_c;
    loop {
        let x_lo = barrier_position(params, n);
        let h = spacing(params, n + 1);
        let psi_lo = state.value_at_barrier(n).value();
        let a = state.coefficients(n).a();
        sum += segment_local(psi_lo, a, x_lo, h, q);
        let next = n + 1;
        let x_next = x_lo + h;
        let psi_next = state.value_at_barrier(next).value();
        let a_next = state.coefficients(next).a().abs();
        let damping = (-epsilon * p.abs() * x_next).exp();
        // Tail from x_N: psi(x_N) e^(-i q x_N) / (i q) exactly, plus a
        // remainder bounded by 2 |a_N| / |q|^2 (the slopes are monotone).
        let correction =
            psi_next * (Complex64::new(0.0, -1.0) * q * x_next).exp() / (Complex64::i() * q);
        let psi_next = psi_next.abs();
        let mut whole_tail = 2.0 / qn;
        whole_tail = whole_tail.min(spacing(params, next + 1) * geometric);
        if epsilon > 0.0 {
            whole_tail = whole_tail.min(1.0 / (epsilon * p.abs()));
        }
        let bound = damping * (2.0 * a_next / (qn * qn)).min(psi_next * (whole_tail + 1.0 / qn));
        let total = sum + correction;
        if bound <= spec.tail_rtol * total.norm() || bound == 0.0 {
            return SegmentSum {
                sum,
                correction,
                n_last: n,
                bound,
                converged: true,
            };
        }
        if next > spec.n_max {
            return SegmentSum {
                sum,
                correction,
                n_last: n,
                bound,
                converged: false,
            };
        }
        n = next;
    }
}

/// Regulated, truncated transform at a single `epsilon`, with no
/// extrapolation. `p` may be negative.
pub fn regulated_transform(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    p: f64,
    epsilon: f64,
) -> Result<MomentumSample> {
    spec.validate()?;
    if !(p.is_finite() && p != 0.0) {
        return Err(Error::domain(format!(
            "momentum must be finite and nonzero, got {p}"
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let s = segment_sum(state, spec, p, epsilon);
    let value = (s.sum + s.correction) * inv_sqrt_2pi();
    Ok(MomentumSample {
        p,
        value,
        magnitude_sq: value.norm_sqr(),
        regime: Regime::from_alpha(state.alpha()),
        epsilon,
        n_last: s.n_last,
        truncation_bound: s.bound * inv_sqrt_2pi(),
        tail_correction: s.correction * inv_sqrt_2pi(),
        ladder: None,
        flagged: !s.converged,
    })
}

/// The cutoff transform `psi~(p)`.
///
/// At `spec.epsilon > 0` this is the regulated value. At `epsilon = 0` the
/// value is the direct sum; for `alpha <= 1`, where the integral converges
/// only conditionally, the ladder extrapolation to `epsilon = 0` is also
/// computed and the sample is flagged if the two disagree or the ladder is
/// not Cauchy.
pub fn cutoff_transform(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    p: f64,
) -> Result<MomentumSample> {
    let mut sample = regulated_transform(state, spec, p, spec.epsilon)?;
    if spec.epsilon == 0.0 && state.alpha() <= 1.0 {
        let ladder = epsilon_ladder(state, spec, p)?;
        let scale = sample.value.norm().max(f64::MIN_POSITIVE);
        if !ladder.cauchy || (ladder.extrapolated - sample.value).norm() > LADDER_TOLERANCE * scale
        {
            sample.flagged = true;
        }
        sample.ladder = Some(ladder);
    }
    Ok(sample)
}

/// Richardson extrapolation to `epsilon = 0` over [`EPSILON_LADDER`].
pub fn epsilon_ladder(state: &ZeroModeState, spec: &CutoffSpec, p: f64) -> Result<EpsilonLadder> {
    let mut values = [Complex64::new(0.0, 0.0); 3];
    for (v, &eps) in values.iter_mut().zip(EPSILON_LADDER.iter()) {
        let s = regulated_transform(state, spec, p, eps)?;
        if s.flagged {
            return Err(Error::NonConvergence {
                what: "epsilon ladder",
                detail: format!(
                    "regulated sum at p = {p}, epsilon = {eps} did not meet its tail bound"
                ),
            });
        }
        *v = s.value;
    }
    // Ladder ratio 10: first level removes O(eps), second removes O(eps^2).
    let r12 = (values[1] * 10.0 - values[0]) / 9.0;
    let r23 = (values[2] * 10.0 - values[1]) / 9.0;
    let extrapolated = (r23 * 100.0 - r12) / 99.0;
    let d1 = (r23 - r12).norm();
    let d2 = (extrapolated - r23).norm();
    Ok(EpsilonLadder {
        epsilons: EPSILON_LADDER,
        values,
        extrapolated,
        differences: [d1, d2],
        cauchy: d2 <= d1,
    })
}

/// Fourier coefficients of the log-periodic profile `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub k_max: usize,
    /// `c_k` for `k = 0..=k_max`; `c_{-k}` is the conjugate.
    pub coefficients: Vec<Complex64>,
    /// Period `ln lambda`.
    pub period: f64,
}

impl ModeTable {
    pub fn beta(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.period
    }

    pub fn c(&self, k: i64) -> Complex64 {
        let c = self.coefficients[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// `sum_{|k| <= k_max} c_k e^(i beta_k v)`.
    pub fn reconstruct(&self, v: f64) -> f64 {
        let mut s = self.coefficients[0].re;
        for k in 1..=self.k_max {
            let rot = Complex64::from_polar(1.0, self.beta(k as i64) * v);
            s += 2.0 * (self.coefficients[k] * rot).re;
        }
        s
    }
}

/// Gauss-Legendre order per panel in [`mode_coefficients`].
const MODE_NODES: usize = 16;

/// `c_k = (1 / ln lambda) int_0^{ln lambda} f(v) e^(-i beta_k v) dv` for
/// `0 <= k <= k_max`, by composite Gauss-Legendre with one panel per
/// oscillation of the highest harmonic.
pub fn mode_coefficients(state: &ZeroModeState, k_max: usize) -> Result<ModeTable> {
    let period = state.params().ln_lambda();
    let panels = k_max.max(4);
    let (x, w) = gauss_legendre(MODE_NODES);
    let h = period / panels as f64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let beta1 = 2.0 * PI / period;
    for panel in 0..panels {
        let lo = h * panel as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let v = lo + 0.5 * h * (xi + 1.0);
            let weight = 0.5 * h * wi * state.log_profile_f(v) / period;
            let step = Complex64::from_polar(1.0, -beta1 * v);
            let mut rot = Complex64::new(weight, 0.0);
            for c in coefficients.iter_mut() {
                *c += rot;
                rot *= step;
            }
        }
    }
    if coefficients
        .iter()
        .any(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(Error::NonConvergence {
            what: "mode coefficients",
            detail: "non-finite Fourier coefficient".into(),
        });
    }
    Ok(ModeTable {
        k_max,
        coefficients,
        period,
    })
}

/// Small-`p` asymptote at `alpha = 1`:
/// `(c_0 / sqrt(2 pi)) [-gamma - ln(p x_c) - i pi / 2]`
/// plus, for each `k != 0`,
/// `(c_k / sqrt(2 pi)) [x0^(-i beta_k) p^(-i beta_k) e^(pi beta_k / 2) Gamma(i beta_k) - x_c^(i beta_k) / (i beta_k)]`.
///
/// The second term in the bracket is the part of the lower limit that does
/// not vanish as `p -> 0`; with `x_c` on a barrier `x_c^(i beta_k) x0^(-i beta_k) = 1`.
pub fn critical_asymptote(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    table: &ModeTable,
    p: f64,
) -> Result<Complex64> {
    if Regime::from_alpha(state.alpha()) != Regime::Critical {
        return Err(Error::domain(format!(
            "critical asymptote needs |alpha - 1| <= {CRITICAL_TOLERANCE}, got alpha = {}",
            state.alpha()
        )));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("momentum must be > 0, got {p}")));
    }
    let params = state.params();
    let x_c = spec.x_c(params);
    let i = Complex64::i();
    let mut total = table.c(0) * Complex64::new(-EULER_GAMMA - (p * x_c).ln(), -0.5 * PI);
    let ln_px0 = (p * params.x0()).ln();
    for k in 1..=table.k_max as i64 {
        for kk in [k, -k] {
            let beta = table.beta(kk);
            let ln_tilde = ln_gamma(Complex64::new(0.0, beta)) + 0.5 * PI * beta;
            let oscillating = (ln_tilde - i * beta * ln_px0).exp();
            let lower = 1.0 / (i * beta);
            total += table.c(kk) * (oscillating - lower);
        }
    }
    Ok(total * inv_sqrt_2pi())
}

/// Exact `k = 0` part of the critical transform, `(c_0 / sqrt(2 pi)) E1(i p x_c)`.
pub fn critical_leading_exact(
    spec: &CutoffSpec,
    table: &ModeTable,
    params: &ModelParams,
    p: f64,
) -> Result<Complex64> {
    let z = Complex64::new(0.0, p * spec.x_c(params));
    Ok(table.c(0) * exp_integral_e1(z)? * inv_sqrt_2pi())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupercriticalLimit {
    pub c0: Complex64,
    pub k_used: usize,
    /// `(K, C_0(K))` for each truncation tried.
    pub partial_sums: Vec<(usize, Complex64)>,
    /// `|c_K| / |c_0|` at the accepted truncation.
    pub tail_coefficient: f64,
}

/// Mode-sum tolerance and harmonic cap for [`supercritical_limit`].
pub const MODE_SUM_TOLERANCE: f64 = 1e-10;
pub const MODE_SUM_CAP: usize = 4096;
pub const MODE_TAIL_FLOOR: f64 = 1e-6;

/// `C_0 = (1 / sqrt(2 pi)) sum_k c_k x0^(-i beta_k) x_c^(1 - alpha + i beta_k) / (alpha - 1 - i beta_k)`,
/// the `p -> 0` limit of the transform when `alpha > 1`. The harmonic count
/// doubles from `k_start` until successive sums agree to
/// [`MODE_SUM_TOLERANCE`] relative.
pub fn supercritical_limit(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    k_start: usize,
) -> Result<SupercriticalLimit> {
    if Regime::from_alpha(state.alpha()) != Regime::Supercritical {
        return Err(Error::domain(format!(
            "supercritical limit needs alpha > 1, got alpha = {}",
            state.alpha()
        )));
    }
    let params = state.params();
    let alpha = state.alpha();
    let x_c = spec.x_c(params);
    let prefactor = x_c.powf(1.0 - alpha) * inv_sqrt_2pi();
    let phase_base = (x_c / params.x0()).ln();
    let mut k = k_start.max(1);
    let mut partial_sums: Vec<(usize, Complex64)> = Vec::new();
    loop {
        let table = mode_coefficients(state, k)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for kk in -(k as i64)..=(k as i64) {
            let beta = table.beta(kk);
            let phase = Complex64::from_polar(1.0, beta * phase_base);
            sum += table.c(kk) * phase / Complex64::new(alpha - 1.0, -beta);
        }
        let c0 = sum * prefactor;
        if let Some(&(_, prev)) = partial_sums.last() {
            let tail_coefficient = table.c(k as i64).norm() / table.c(0).norm();
            if (c0 - prev).norm() <= MODE_SUM_TOLERANCE * c0.norm()
                && tail_coefficient < MODE_TAIL_FLOOR
            {
                partial_sums.push((k, c0));
                return Ok(SupercriticalLimit {
                    c0,
                    k_used: k,
                    partial_sums,
                    tail_coefficient,
                });
            }
        }
        partial_sums.push((k, c0));
        if k >= MODE_SUM_CAP {
            return Err(Error::NonConvergence {
                what: "supercritical mode sum",
                detail: format!("partial sums {partial_sums:?}"),
            });
        }
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;
    use crate::zero_mode::DEFAULT_A0;

    fn state(lambda: f64, mu: f64) -> ZeroModeState {
        ZeroModeState::new(ModelParams::new(1.0, lambda, mu).unwrap(), DEFAULT_A0).unwrap()
    }

    #[test]
    fn segment_trivial_cases() {
        let v = segment_transform(0.7, -0.2, 1.0, 3.0, Complex64::new(0.0, 0.0));
        assert!((v.re - (0.35 * 8.0 - 0.4)).abs() < 1e-15);
        let p = 2.3;
        let v = segment_transform(0.0, 1.0, 0.0, 2.0 * PI / p, Complex64::new(p, 0.0));
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn segment_matches_quadrature_across_series_switch() {
        for (p, h) in [(1e-3, 1.0), (0.2, 2.0), (0.26, 2.0), (40.0, 0.7)] {
            for eps in [0.0, 0.1] {
                let q = Complex64::new(p, -eps * p);
                let (a, b, lo) = (-0.3, 1.4, 2.0);
                let got = segment_transform(a, b, lo, lo + h, q);
                let r = adaptive(
                    |x| (a * x + b) * (Complex64::new(0.0, -1.0) * q * x).exp(),
                    lo,
                    lo + h,
                    1e-16,
                    1e-14,
                    1000,
                )
                .unwrap();
                assert!(
                    (got - r.value).norm() < 1e-12 * r.value.norm(),
                    "p={p} h={h}"
                );
            }
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(regime_classify(3.0, 1.0).unwrap(), Regime::Subcritical);
        assert_eq!(
            regime_classify(1.618_033_988_75, 1.0).unwrap(),
            Regime::Critical
        );
        assert_eq!(regime_classify(1.2, 1.0).unwrap(), Regime::Supercritical);
        assert!(regime_classify(1.2, 0.0).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        let s = state(3.0, 1.0);
        let spec = CutoffSpec::new(s.params(), 0);
        let a = cutoff_transform(&s, &spec, 0.37).unwrap();
        let b = cutoff_transform(&s, &spec, -0.37).unwrap();
        assert!((a.value - b.value.conj()).norm() < 1e-13 * a.value.norm());
        assert!((a.magnitude_sq - a.value.norm_sqr()).abs() == 0.0);
        assert!(!a.flagged && !b.flagged);
    }

    #[test]
    fn ladder_agrees_with_direct_sum() {
        let s = state(3.0, 1.0);
        let spec = CutoffSpec::new(s.params(), 0);
        for p in [1e-3, 0.05, 2.0] {
            let sample = cutoff_transform(&s, &spec, p).unwrap();
            let ladder = sample.ladder.unwrap();
            assert!(ladder.cauchy);
            assert!(
                (ladder.extrapolated - sample.value).norm()
                    < LADDER_TOLERANCE * sample.value.norm()
            );
            assert!(!sample.flagged);
        }
    }

    #[test]
    fn mode_table_properties() {
        let s = state(1.2, 1.0);
        let t = mode_coefficients(&s, 32).unwrap();
        let (lo, hi) = s.envelope();
        assert!(t.c(0).im.abs() < 1e-15);
        assert!(t.c(0).re >= lo && t.c(0).re <= hi);
        assert_eq!(t.c(-3), t.c(3).conj());
        // mean of f by direct quadrature
        let r = adaptive(
            |v| Complex64::new(s.log_profile_f(v), 0.0),
            0.0,
            t.period,
            1e-16,
            1e-14,
            1000,
        )
        .unwrap();
        assert!((r.value.re / t.period - t.c(0).re).abs() < 1e-14);
    }

    #[test]
    fn supercritical_k0_term_and_reality() {
        let s = state(1.2, 1.0);
        let spec = CutoffSpec::new(s.params(), 0);
        let lim = supercritical_limit(&s, &spec, 8).unwrap();
        assert!(lim.c0.im.abs() < 1e-10 * lim.c0.norm());
        let t = mode_coefficients(&s, 0).unwrap();
        let k0 = t.c(0).re / (s.alpha() - 1.0) * inv_sqrt_2pi();
        let (_, first) = lim.partial_sums[0];
        assert!(first.norm() > 0.0);
        // the k = 0 term dominates
        assert!((lim.c0.re - k0).abs() < 0.05 * k0.abs());
        assert!(supercritical_limit(&state(3.0, 1.0), &spec, 8).is_err());
    }

    #[test]
    fn critical_asymptote_domain() {
        let s = state(3.0, 1.0);
        let spec = CutoffSpec::new(s.params(), 0);
        let t = mode_coefficients(&s, 4).unwrap();
        assert!(critical_asymptote(&s, &spec, &t, 1e-4).is_err());
    }

    #[test]
    fn spec_validation() {
        let s = state(3.0, 1.0);
        let mut spec = CutoffSpec::new(s.params(), 0);
        assert!(spec.validate().is_ok());
        spec.n_max = 0;
        assert!(spec.validate().is_err());
        let spec = CutoffSpec::new(s.params(), 0).with_epsilon(-1.0);
        assert!(spec.validate().is_err());
        assert!(cutoff_transform(&s, &CutoffSpec::new(s.params(), 0), 0.0).is_err());
    }
}
