//! Special functions at the accuracy the momentum-space asymptotics need.
//!
//! Not a general library: `E1` is good to about 1e-13 relative away from the
//! negative real axis, the complex gamma function to about 1e-14 relative for
//! moderate imaginary parts, and the incomplete gamma function is only
//! available through its small-argument expansion.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const SERIES_RADIUS: f64 = 4.0;

/// Exponential integral `E1(z) = int_z^inf e^(-t) / t dt` (principal branch).
pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::domain("E1 has a logarithmic singularity at z = 0"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("E1 argument must be finite"));
    }
    if z.norm() <= SERIES_RADIUS {
        Ok(e1_series(z))
    } else {
        e1_continued_fraction(z)
    }
}

fn e1_series(z: Complex64) -> Complex64 {
    // E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        term *= -z / kf;
        let contribution = term / kf;
        sum += contribution;
        if contribution.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    // Modified Lentz on e^(-z) / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...))).
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::NonConvergence {
        what: "E1 continued fraction",
        detail: format!("z = {z}"),
    })
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` for complex `z`, on a branch whose exponential is `Gamma(z)`.
///
/// Working in logs keeps `Gamma(s) e^(pi Im s / 2)`-type products finite
/// for large imaginary parts.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
        PI.ln() - ln_sin_pi(z) - ln_gamma(1.0 - z)
    } else {
        let zm = z - 1.0;
        let mut acc = Complex64::new(LANCZOS[0], 0.0);
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (zm + i as f64);
        }
        let t = zm + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (zm + 0.5) * t.ln() - t + acc.ln()
    }
}

/// `ln sin(pi z)` without overflowing for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = z * PI;
    let i = Complex64::i();
    if w.im > 1.0 {
        // sin w = e^(-i w) (i/2) (1 - e^(2 i w))
        -i * w + (i * 0.5).ln() + (1.0 - (2.0 * i * w).exp()).ln()
    } else if w.im < -1.0 {
        // sin w = e^(i w) (-i/2) (1 - e^(-2 i w))
        i * w + (-i * 0.5).ln() + (1.0 - (-2.0 * i * w).exp()).ln()
    } else {
        w.sin().ln()
    }
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Small-argument form of the upper incomplete gamma function,
/// `Gamma(s, z) ~ Gamma(s) - z^s / s`, together with the next term of the
/// series, `z^(s+1) / (s+1)`, and a bound on what the two-term value leaves
/// out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperGammaExpansion {
    pub value: Complex64,
    pub next_term: Complex64,
    pub error_bound: f64,
}

pub fn upper_gamma_small_z(s: Complex64, z: Complex64) -> Result<UpperGammaExpansion> {
    if z.norm().is_nan() || z.norm() >= 1.0 {
        return Err(Error::domain(format!(
            "small-argument expansion needs |z| < 1, got |z| = {}",
            z.norm()
        )));
    }
    if s.im == 0.0 && s.re <= 0.0 && s.re.fract() == 0.0 {
        return Err(Error::domain(format!("s = {s} is a pole of Gamma")));
    }
    let ln_z = z.ln();
    let zs = (s * ln_z).exp();
    let value = gamma(s) - zs / s;
    let next_term = zs * z / (s + 1.0);
    // Remaining terms alternate in k with |z|^k / k!; geometric bound.
    let tail_ratio = z.norm() * (s + 1.0).norm() / (2.0 * (s + 2.0).norm());
    let error_bound = next_term.norm() / (1.0 - tail_ratio.min(0.5));
    Ok(UpperGammaExpansion {
        value,
        next_term,
        error_bound,
    })
}
