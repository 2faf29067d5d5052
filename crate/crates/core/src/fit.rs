//! Small fitting helpers shared by the acceptance checks and the CLI.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain(format!(
            "regression needs two equal-length samples of size >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("regression abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    })
}

/// Lag (in units of `step`) at which the autocorrelation of a uniformly
/// sampled series peaks, searched over `[min_lag, max_lag]` and refined by a
/// parabola through the peak and its neighbours.
pub fn autocorrelation_period(
    samples: &[f64],
    step: f64,
    min_lag: f64,
    max_lag: f64,
) -> Result<f64> {
    if !(step > 0.0 && min_lag > 0.0 && max_lag > min_lag) {
        return Err(Error::domain(
            "autocorrelation needs step > 0 and 0 < min_lag < max_lag",
        ));
    }
    let lo = (min_lag / step).floor().max(1.0) as usize;
    let hi = (max_lag / step).ceil() as usize;
    if hi + 2 >= samples.len() {
        return Err(Error::domain(format!(
            "series of {} samples too short for lag {max_lag}",
            samples.len()
        )));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let centred: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    let acf = |lag: usize| -> f64 {
        let m = centred.len() - lag;
        centred[..m]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / m as f64
    };
    let values: Vec<f64> = (lo.saturating_sub(1)..=hi + 1).map(acf).collect();
    let offset = lo.saturating_sub(1);
    let (best, _) = (lo..=hi)
        .map(|lag| (lag, values[lag - offset]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty lag range");
    let (ym, y0, yp) = (
        values[best - 1 - offset],
        values[best - offset],
        values[best + 1 - offset],
    );
    let denom = ym - 2.0 * y0 + yp;
    let shift = if denom < 0.0 {
        (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok((best as f64 + shift) * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_line() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.25 * v).collect();
        let f = linear_regression(&x, &y).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-13);
        assert!(f.rms_residual < 1e-13);
        assert!(linear_regression(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(linear_regression(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn autocorrelation_finds_period() {
        let period = 3f64.ln();
        let step = 0.01;
        let s: Vec<f64> = (0..3000)
            .map(|i| {
                let t = i as f64 * step;
                (2.0 * std::f64::consts::PI * t / period).sin()
                    + 0.3 * (4.0 * std::f64::consts::PI * t / period).cos()
            })
            .collect();
        let p = autocorrelation_period(&s, step, 0.5 * period, 1.5 * period).unwrap();
        assert!((p / period - 1.0).abs() < 5e-3, "{p}");
    }
}
