use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use dsi_barrier_core::fit::{autocorrelation_period, linear_regression};
use dsi_barrier_core::momentum::{
    cutoff_transform, mode_coefficients, regulated_transform, supercritical_limit, LADDER_TOLERANCE,
};
use dsi_barrier_core::spectrum::{
    amplitude_trace, growth_certificate, CURRENT_DRIFT_TOLERANCE, GROWTH_THRESHOLD,
};
use dsi_barrier_core::{
    interval_index, CutoffSpec, MomentumSample, PlaneWaveCoeffs, Regime, ZeroModeState,
    GOLDEN_RATIO,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, file_name, write_csv, Cell, Sidecar};

/// Result of a command: a JSON summary for `--json`, a human-readable
/// report otherwise, and the failure to exit with once output is written.
#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome {
            json,
            text,
            failure: None,
        }
    }
}

/// Relative tolerance for the rowwise scaling check on exported data.
pub const EXPORT_SCALING_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for the `+-p` conjugate-pair check.
pub const CONJUGATE_TOLERANCE: f64 = 1e-12;
/// Incident `(A, B)` at `n = 0` for the scattering trace.
const INCIDENT: (f64, f64) = (1.0, 0.0);

pub fn build_state(config: &RunConfig) -> CliResult<ZeroModeState> {
    Ok(ZeroModeState::new(config.params, config.a0)?)
}

fn files_written(paths: &[std::path::PathBuf]) -> String {
    paths
        .iter()
        .map(|p| format!("wrote {}", p.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn alpha(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let p = config.params;
    let r = state.roots();
    let regime = Regime::from_alpha(state.alpha());
    let relation = if (p.lambda() - GOLDEN_RATIO).abs() <= 1e-12 * GOLDEN_RATIO {
        "at"
    } else if p.lambda() > GOLDEN_RATIO {
        "above"
    } else {
        "below"
    };
    let json = json!({
        "lambda": p.lambda(),
        "mu": p.mu(),
        "r_grow": r.r_grow,
        "r_decay": r.r_decay,
        "ln_r_grow": r.r_grow.ln(),
        "ln_r_decay": r.r_decay.ln(),
        "alpha": state.alpha(),
        "regime": regime.as_str(),
        "threshold_lambda_mu1": GOLDEN_RATIO,
        "lambda_vs_threshold": relation,
    });
    let mut text = format!(
        "lambda = {}, mu = {}\nr_grow = {:.12}, r_decay = {:.12}\nalpha = {:.10}\nregime = {}\n",
        p.lambda(),
        p.mu(),
        r.r_grow,
        r.r_decay,
        state.alpha(),
        regime
    );
    text.push_str(&format!(
        "mu = 1 threshold lambda* = (1 + sqrt 5) / 2 = {GOLDEN_RATIO:.12}; lambda is {relation} it"
    ));
    if p.mu() != 1.0 {
        text.push_str(" (the threshold refers to mu = 1)");
    }
    Ok(Outcome::ok(json, text))
}

pub fn fig1(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let p = *state.params();
    let (lambda, x0, alpha) = (p.lambda(), p.x0(), state.alpha());
    let us = config.grid.values();
    type Row = (Vec<Cell>, Vec<Cell>, f64);
    let rows: Vec<CliResult<Row>> = us
        .par_iter()
        .map(|&u| {
            let x = x0 * u.exp();
            let psi = state.evaluate(x)?;
            let psi_up = state.evaluate(lambda * x)?;
            let psi_down = state.evaluate(x / lambda)?;
            let g = state.ratio_g(x)?;
            let dev = ((psi_up - lambda.powf(-alpha) * psi) / psi_up).abs();
            Ok((
                vec![
                    Cell::Num(u),
                    Cell::Num(psi),
                    Cell::Num(psi_up),
                    Cell::Num(psi_down),
                ],
                vec![Cell::Num(u), Cell::Num(g)],
                dev,
            ))
        })
        .collect();
    let mut wave = Vec::with_capacity(us.len());
    let mut ratio = Vec::with_capacity(us.len());
    let mut gs = Vec::with_capacity(us.len());
    let mut max_dev: f64 = 0.0;
    for r in rows {
        let (w, g, d) = r?;
        if let Cell::Num(v) = g[1] {
            gs.push(v);
        }
        wave.push(w);
        ratio.push(g);
        max_dev = max_dev.max(d);
    }
    let (lower, upper) = state.envelope();
    let step = us[1] - us[0];
    let period = p.ln_lambda();
    let measured_period = autocorrelation_period(&gs, step, 0.5 * period, 1.5 * period).ok();
    let g_min = gs.iter().copied().fold(f64::INFINITY, f64::min);
    let g_max = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    ensure_dir(&config.out_dir)?;
    let f1 = write_csv(
        &config.out_dir,
        "fig1_wavefunction.csv",
        &[
            "ln_x_over_x0",
            "psi0_x",
            "psi0_lambda_x",
            "psi0_x_over_lambda",
        ],
        &wave,
    )?;
    let f2 = write_csv(
        &config.out_dir,
        "fig1_ratio.csv",
        &["ln_x_over_x0", "g"],
        &ratio,
    )?;
    let results = json!({
        "c_prime": state.c_prime(),
        "envelope_upper": upper,
        "envelope_lower": lower,
        "g_min": g_min,
        "g_max": g_max,
        "period_ln_lambda": period,
        "measured_period": measured_period,
        "max_scaling_deviation": max_dev,
    });
    let tolerances = json!({ "scaling_rowwise": EXPORT_SCALING_TOLERANCE });
    let sidecar = Sidecar::new(
        config,
        &state,
        tolerances,
        vec![file_name(&f1), file_name(&f2)],
        results.clone(),
    );
    let meta = sidecar.write(&config.out_dir)?;
    let mut out = Outcome::ok(
        results,
        format!(
            "{}\nenvelopes C' lambda^alpha = {upper:.6}, C' lambda^-alpha = {lower:.6}",
            files_written(&[f1, f2, meta])
        ),
    );
    if max_dev > EXPORT_SCALING_TOLERANCE {
        out.failure = Some(CliError::Invariant(format!(
            "exported scaling deviation {max_dev:e}"
        )));
    }
    Ok(out)
}

fn sample_grid(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    ps: &[f64],
) -> CliResult<Vec<MomentumSample>> {
    let samples: Vec<_> = ps
        .par_iter()
        .map(|&p| cutoff_transform(state, spec, p))
        .collect();
    samples
        .into_iter()
        .map(|s| s.map_err(CliError::from))
        .collect()
}

fn conjugate_check(
    state: &ZeroModeState,
    spec: &CutoffSpec,
    samples: &[MomentumSample],
) -> CliResult<f64> {
    let picks = [0, samples.len() / 2, samples.len() - 1];
    let mut worst: f64 = 0.0;
    for &i in &picks {
        let s = &samples[i];
        let minus = regulated_transform(state, spec, -s.p, s.epsilon)?;
        let plus = regulated_transform(state, spec, s.p, s.epsilon)?;
        worst = worst.max((plus.value - minus.value.conj()).norm() / plus.value.norm());
    }
    Ok(worst)
}

fn cutoff_spec(config: &RunConfig) -> CliResult<CutoffSpec> {
    let spec = CutoffSpec::new(&config.params, config.n_c).with_epsilon(config.epsilon);
    spec.validate()?;
    Ok(spec)
}

fn cutoff_tolerances(spec: &CutoffSpec) -> Value {
    json!({
        "tail_rtol": spec.tail_rtol,
        "epsilon": spec.epsilon,
        "ladder_tolerance": LADDER_TOLERANCE,
        "conjugate_pair": CONJUGATE_TOLERANCE,
    })
}

pub fn fig2(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let alpha = state.alpha();
    if Regime::from_alpha(alpha) != Regime::Subcritical {
        return Err(CliError::Config(format!(
            "fig2 needs 0 < alpha < 1, got alpha = {alpha}"
        )));
    }
    let spec = cutoff_spec(config)?;
    let ps = config.grid.values();
    let samples = sample_grid(&state, &spec, &ps)?;
    let conj = conjugate_check(&state, &spec, &samples)?;

    let beta = 2.0 * (1.0 - alpha);
    let kept: Vec<&MomentumSample> = samples.iter().filter(|s| !s.flagged).collect();
    let excluded: Vec<f64> = samples.iter().filter(|s| s.flagged).map(|s| s.p).collect();
    if kept.len() < 2 {
        return Err(CliError::NonConvergence(format!(
            "{} of {} samples flagged",
            excluded.len(),
            samples.len()
        )));
    }
    let lp: Vec<f64> = kept.iter().map(|s| s.p.ln()).collect();
    let lm: Vec<f64> = kept.iter().map(|s| s.magnitude_sq.ln()).collect();
    // least squares constant at the fixed theoretical slope
    let ln_const = lp.iter().zip(&lm).map(|(x, y)| y + beta * x).sum::<f64>() / lp.len() as f64;
    let envelope_const = ln_const.exp();
    let fit = linear_regression(&lp, &lm)?;
    let measured_period = if excluded.is_empty() {
        let resid: Vec<f64> = lp
            .iter()
            .zip(&lm)
            .map(|(x, y)| y - fit.predict(*x))
            .collect();
        let period = config.params.ln_lambda();
        autocorrelation_period(&resid, lp[1] - lp[0], 0.5 * period, 1.5 * period).ok()
    } else {
        None
    };
    let rows: Vec<Vec<Cell>> = kept
        .iter()
        .map(|s| {
            vec![
                Cell::Num(s.p),
                Cell::Num(s.magnitude_sq),
                Cell::Num(envelope_const * s.p.powf(-beta)),
            ]
        })
        .collect();

    ensure_dir(&config.out_dir)?;
    let f = write_csv(
        &config.out_dir,
        "fig2_momentum.csv",
        &["p", "magnitude_sq", "envelope"],
        &rows,
    )?;
    let results = json!({
        "n_c": spec.n_c,
        "x_c": spec.x_c(&config.params),
        "theoretical_slope": -beta,
        "measured_slope": fit.slope,
        "fit_intercept": fit.intercept,
        "fit_rms_residual": fit.rms_residual,
        "envelope_exponent": -beta,
        "envelope_constant": envelope_const,
        "envelope_fit": "least squares in ln|psi|^2 at the fixed exponent -2(1 - alpha)",
        "period_ln_lambda": config.params.ln_lambda(),
        "measured_period": measured_period,
        "excluded_p": excluded,
        "conjugate_pair_deviation": conj,
    });
    let sidecar = Sidecar::new(
        config,
        &state,
        cutoff_tolerances(&spec),
        vec![file_name(&f)],
        results.clone(),
    );
    let meta = sidecar.write(&config.out_dir)?;
    let mut out = Outcome::ok(
        results,
        format!(
            "{}\nslope {:.6} (theory {:.6}); {} samples excluded",
            files_written(&[f, meta]),
            fit.slope,
            -beta,
            excluded.len()
        ),
    );
    if conj > CONJUGATE_TOLERANCE {
        out.failure = Some(CliError::Invariant(format!(
            "conjugate pair deviation {conj:e}"
        )));
    }
    Ok(out)
}

pub fn wavefunction(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let p = *state.params();
    let xs = config.grid.values();
    let rows: Vec<CliResult<Vec<Cell>>> = xs
        .par_iter()
        .map(|&x| {
            Ok(vec![
                Cell::Num(x),
                Cell::Num((x / p.x0()).ln()),
                Cell::Int(i64::from(interval_index(&p, x)?)),
                Cell::Num(state.evaluate(x)?),
                Cell::Num(state.slope(x)?),
                Cell::Num(state.ratio_g(x)?),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<CliResult<Vec<_>>>()?;
    ensure_dir(&config.out_dir)?;
    let f = write_csv(
        &config.out_dir,
        "wavefunction.csv",
        &["x", "ln_x_over_x0", "interval", "psi", "dpsi", "g"],
        &rows,
    )?;
    let (lower, upper) = state.envelope();
    let results = json!({
        "b0": state.b0(),
        "c_prime": state.c_prime(),
        "envelope_upper": upper,
        "envelope_lower": lower,
        "norm_ratio": state.norm_ratio(),
    });
    let sidecar = Sidecar::new(
        config,
        &state,
        json!({}),
        vec![file_name(&f)],
        results.clone(),
    );
    let meta = sidecar.write(&config.out_dir)?;
    Ok(Outcome::ok(results, files_written(&[f, meta])))
}

pub fn momentum(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let spec = cutoff_spec(config)?;
    let ps = config.grid.values();
    let samples = sample_grid(&state, &spec, &ps)?;
    let conj = conjugate_check(&state, &spec, &samples)?;
    let rows: Vec<Vec<Cell>> = samples
        .iter()
        .map(|s| {
            vec![
                Cell::Num(s.p),
                Cell::Num(s.value.re),
                Cell::Num(s.value.im),
                Cell::Num(s.magnitude_sq),
                Cell::Int(i64::from(s.n_last)),
                Cell::Num(s.truncation_bound),
                Cell::Int(i64::from(s.flagged)),
            ]
        })
        .collect();
    let regime = Regime::from_alpha(state.alpha());
    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    let reference = match regime {
        Regime::Subcritical => json!({ "magnitude_sq_exponent": -2.0 * (1.0 - state.alpha()) }),
        Regime::Critical => {
            let c0 = mode_coefficients(&state, 128)?.c(0).re;
            json!({ "c0": c0, "ln_p_slope": -c0 * inv_sqrt_2pi })
        }
        Regime::Supercritical => {
            let lim = supercritical_limit(&state, &spec, 8)?;
            json!({
                "c0_re": lim.c0.re,
                "c0_im": lim.c0.im,
                "c0_magnitude_sq": lim.c0.norm_sqr(),
                "harmonics": lim.k_used,
            })
        }
    };
    let flagged: Vec<f64> = samples.iter().filter(|s| s.flagged).map(|s| s.p).collect();
    ensure_dir(&config.out_dir)?;
    let f = write_csv(
        &config.out_dir,
        "momentum.csv",
        &[
            "p",
            "re",
            "im",
            "magnitude_sq",
            "n_last",
            "truncation_bound",
            "flagged",
        ],
        &rows,
    )?;
    let results = json!({
        "n_c": spec.n_c,
        "x_c": spec.x_c(&config.params),
        "reference": reference,
        "flagged_p": flagged,
        "conjugate_pair_deviation": conj,
    });
    let sidecar = Sidecar::new(
        config,
        &state,
        cutoff_tolerances(&spec),
        vec![file_name(&f)],
        results.clone(),
    );
    let meta = sidecar.write(&config.out_dir)?;
    let mut out = Outcome::ok(
        results,
        format!(
            "{}\n{} flagged samples",
            files_written(&[f, meta]),
            flagged.len()
        ),
    );
    if conj > CONJUGATE_TOLERANCE {
        out.failure = Some(CliError::Invariant(format!(
            "conjugate pair deviation {conj:e}"
        )));
    }
    Ok(out)
}

/// Evenly spread initial rays `(cos t, sin t)` plus the pure-decay ray.
pub fn certificate_rays(count: usize) -> Vec<(f64, f64)> {
    let mut rays: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let t = PI * (i as f64 + 0.5) / count as f64;
            (t.cos(), t.sin())
        })
        .collect();
    rays.push((1.0, 0.0));
    rays
}

pub fn spectrum(config: &RunConfig) -> CliResult<Outcome> {
    let state = build_state(config)?;
    let p = config.params;
    let rays = certificate_rays(64);
    let certs = config
        .kappa_x0
        .iter()
        .map(|&k| growth_certificate(&p, k, &rays))
        .collect::<Result<Vec<_>, _>>()?;
    let cert_rows: Vec<Vec<Cell>> = certs
        .iter()
        .map(|c| {
            vec![
                Cell::Num(c.kappa_x0),
                Cell::Int(i64::from(c.start)),
                Cell::Num(c.free_growth),
                Cell::Num(c.worst_ratio),
                Cell::Int(c.pure_decay_steps.map_or(-1, i64::from)),
                Cell::Int(i64::from(c.passed)),
            ]
        })
        .collect();
    let start = PlaneWaveCoeffs {
        n: 0,
        a: Complex64::new(INCIDENT.0, 0.0),
        b: Complex64::new(INCIDENT.1, 0.0),
        k_x0: config.k_x0,
    };
    let trace = amplitude_trace(&p, config.k_x0, start, config.steps)?;
    let trace_rows: Vec<Vec<Cell>> = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Int(i64::from(r.n)),
                Cell::Num(r.abs_a),
                Cell::Num(r.abs_b),
                Cell::Num(r.current),
            ]
        })
        .collect();
    ensure_dir(&config.out_dir)?;
    let f1 = write_csv(
        &config.out_dir,
        "spectrum_certificate.csv",
        &[
            "kappa_x0",
            "start",
            "free_growth",
            "worst_ratio",
            "pure_decay_steps",
            "passed",
        ],
        &cert_rows,
    )?;
    let f2 = write_csv(
        &config.out_dir,
        "spectrum_scattering.csv",
        &["n", "abs_a", "abs_b", "current"],
        &trace_rows,
    )?;
    let results = json!({
        "certificates": certs,
        "scattering": { "k_x0": config.k_x0, "steps": config.steps, "max_current_drift": trace.max_current_drift, "flagged": trace.flagged },
    });
    let tolerances =
        json!({ "growth_threshold": GROWTH_THRESHOLD, "current_drift": CURRENT_DRIFT_TOLERANCE });
    let sidecar = Sidecar::new(
        config,
        &state,
        tolerances,
        vec![file_name(&f1), file_name(&f2)],
        results.clone(),
    );
    let meta = sidecar.write(&config.out_dir)?;
    let failed: Vec<f64> = certs
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.kappa_x0)
        .collect();
    let mut out = Outcome::ok(
        results,
        format!(
            "{}\ncertificates passed {}/{}; current drift {:.2e}",
            files_written(&[f1, f2, meta]),
            certs.len() - failed.len(),
            certs.len(),
            trace.max_current_drift
        ),
    );
    if !failed.is_empty() {
        out.failure = Some(CliError::Invariant(format!(
            "growth certificate failed at kappa x0 = {failed:?}"
        )));
    } else if trace.flagged {
        out.failure = Some(CliError::Invariant(format!(
            "current drift {:e}",
            trace.max_current_drift
        )));
    }
    Ok(out)
}
