use serde::Serialize;

/// A real number stored as sign and natural-log magnitude.
///
/// Powers like `r^n` and `lambda^n` for large `|n|` leave the double range
/// long before the products they feed into do, so coefficients are carried
/// in this form and collapsed only at the end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    /// -1, 0 or +1.
    pub sign: f64,
    /// `ln |value|`; `-inf` for zero.
    pub ln_mag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0.0,
        ln_mag: f64::NEG_INFINITY,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: v.signum(),
                ln_mag: v.abs().ln(),
            }
        }
    }

    pub fn from_parts(sign: f64, ln_mag: f64) -> Self {
        if sign == 0.0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                ln_mag,
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_mag.exp()
        }
    }

    /// Multiply by `e^t`.
    pub fn scale_exp(self, t: f64) -> SignedLog {
        SignedLog::from_parts(self.sign, self.ln_mag + t)
    }
}

impl std::ops::Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, other: SignedLog) -> SignedLog {
        SignedLog::from_parts(self.sign * other.sign, self.ln_mag + other.ln_mag)
    }
}
