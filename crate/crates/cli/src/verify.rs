//! Invariant and oracle suite behind `dsi-barrier verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use dsi_barrier_core::momentum::regulated_transform;
use dsi_barrier_core::oracle::{propagate_raw, RawCoeffs};
use dsi_barrier_core::spectrum::{amplitude_trace, growth_certificate};
use dsi_barrier_core::{
    barrier_position, interval_index, step_matrix, CutoffSpec, Direction, ModelParams,
    PlaneWaveCoeffs, ZeroModeState, GOLDEN_RATIO,
};

use crate::commands::{certificate_rays, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const LAMBDAS: [f64; 3] = [1.2, GOLDEN_RATIO, 3.0];
pub const MUS: [f64; 3] = [0.5, 1.0, 2.0];
/// Spacing ratios for the negative-energy certificate.
pub const CERTIFICATE_LAMBDAS: [f64; 3] = [GOLDEN_RATIO, 2.0, 3.0];
/// Relative perturbation of `b0` applied by `--inject-fault`.
pub const FAULT_SIZE: f64 = 1e-3;
pub const SCALING_TOLERANCE: f64 = 1e-12;
pub const MATRIX_TOLERANCE: f64 = 1e-13;
pub const NORM_RATIO_TOLERANCE: f64 = 1e-10;
pub const DSI_TOLERANCE: f64 = 1e-8;
const DSI_EPSILON: f64 = 1e-3;
const DECADES: f64 = 6.0;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub lambda: f64,
    pub mu: f64,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn check(name: &'static str, p: &ModelParams, value: f64, tolerance: f64, detail: String) -> Check {
    Check {
        check: name,
        lambda: p.lambda(),
        mu: p.mu(),
        passed: value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn scaling_closed_form(
    s: &ZeroModeState,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> CliResult<Check> {
    let p = s.params();
    let (lambda, x0) = (p.lambda(), p.x0());
    let scale = lambda.powf(-s.alpha());
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = log_uniform(rng, x0 * 1e-3, x0 * 1e3);
        worst = worst.max(rel(s.evaluate(lambda * x)?, scale * s.evaluate(x)?));
    }
    Ok(check(
        "scaling_closed_form",
        p,
        worst,
        SCALING_TOLERANCE,
        format!("{samples} points over {DECADES} decades"),
    ))
}

/// Scaling check on coefficients propagated backward from `(a0, b0)` at
/// `n = 0`, the stable direction for the decaying ray.
fn scaling_raw(
    s: &ZeroModeState,
    rng: &mut ChaCha8Rng,
    samples: usize,
    fault: bool,
) -> CliResult<Check> {
    let p = s.params();
    let lambda = p.lambda();
    let steps = (DECADES * std::f64::consts::LN_10 / p.ln_lambda()).ceil() as u32 + 1;
    let b0 = if fault {
        s.b0() * (1.0 + FAULT_SIZE)
    } else {
        s.b0()
    };
    let trace = propagate_raw(
        p,
        RawCoeffs {
            n: 0,
            a: s.a0(),
            b: b0,
        },
        steps,
        Direction::Backward,
    );
    let n_lo = trace.last().map_or(0, |c| c.n);
    let psi = |x: f64| -> CliResult<f64> {
        let n = interval_index(p, x)?;
        let c = &trace[(-n) as usize];
        debug_assert_eq!(c.n, n);
        Ok(c.a * x + c.b)
    };
    let scale = lambda.powf(-s.alpha());
    let (lo, hi) = (barrier_position(p, n_lo), barrier_position(p, 0));
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = log_uniform(rng, lo, hi);
        worst = worst.max(rel(psi(lambda * x)?, scale * psi(x)?));
    }
    let detail = format!(
        "{steps} backward steps{}",
        if fault { ", b0 perturbed" } else { "" }
    );
    Ok(check(
        "scaling_raw_propagation",
        p,
        worst,
        SCALING_TOLERANCE,
        detail,
    ))
}

fn matrix_algebra(p: &ModelParams, rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(-40..=40);
        let f = step_matrix(p, n, Direction::Forward);
        let prod = f.compose(&step_matrix(p, n, Direction::Backward)).entries();
        let x = barrier_position(p, n);
        worst = worst
            .max((f.det() - 1.0).abs())
            .max((f.trace() - 2.0).abs())
            .max((prod[0][0] - 1.0).abs())
            .max((prod[1][1] - 1.0).abs())
            .max((prod[0][1] * x).abs())
            .max((prod[1][0] / x).abs());
    }
    check(
        "matrix_algebra",
        p,
        worst,
        MATRIX_TOLERANCE,
        "det, trace and inverse at 100 barriers".into(),
    )
}

fn g_bounds(s: &ZeroModeState, rng: &mut ChaCha8Rng, samples: usize) -> CliResult<Check> {
    let p = s.params();
    let (lo, hi) = s.envelope();
    let mut worst_period: f64 = 0.0;
    let mut outside = 0usize;
    for _ in 0..samples {
        let x = log_uniform(rng, p.x0() * 1e-3, p.x0() * 1e3);
        let g = s.ratio_g(x)?;
        if g < lo * (1.0 - 1e-14) || g > hi * (1.0 + 1e-14) {
            outside += 1;
        }
        worst_period = worst_period.max(rel(s.ratio_g(p.lambda() * x)?, g));
    }
    let value = if outside > 0 {
        f64::INFINITY
    } else {
        worst_period
    };
    Ok(check(
        "g_bounds_and_period",
        p,
        value,
        SCALING_TOLERANCE,
        format!("{outside} samples outside the envelope"),
    ))
}

fn norm_ratio(s: &ZeroModeState) -> Check {
    let expected = s.norm_ratio();
    let worst = (-10..10)
        .map(|n| rel(s.interval_norm(n + 1) / s.interval_norm(n), expected))
        .fold(0.0, f64::max);
    check(
        "norm_geometric_ratio",
        s.params(),
        worst,
        NORM_RATIO_TOLERANCE,
        format!("ratio {expected:.12}"),
    )
}

fn dsi_identity(s: &ZeroModeState, rng: &mut ChaCha8Rng) -> CliResult<Check> {
    let p = s.params();
    let factor = p.lambda().powf(s.alpha() - 1.0);
    let (spec0, spec1) = (CutoffSpec::new(p, 0), CutoffSpec::new(p, 1));
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let q = log_uniform(rng, 1e-3, 10.0);
        let lhs = regulated_transform(s, &spec0, p.lambda() * q, DSI_EPSILON)?.value;
        let rhs = regulated_transform(s, &spec1, q, DSI_EPSILON)?.value * factor;
        worst = worst.max((lhs - rhs).norm() / lhs.norm());
    }
    Ok(check(
        "momentum_dsi_identity",
        p,
        worst,
        DSI_TOLERANCE,
        format!("5 momenta, epsilon {DSI_EPSILON}"),
    ))
}

fn certificate_check(p: &ModelParams) -> CliResult<Check> {
    let cert = growth_certificate(p, 1.0, &certificate_rays(64))?;
    Ok(Check {
        check: "negative_energy_certificate",
        lambda: p.lambda(),
        mu: p.mu(),
        passed: cert.passed,
        value: cert.worst_ratio,
        tolerance: cert.threshold,
        detail: format!(
            "kappa x0 = 1, start {}, pure decay steps {:?}",
            cert.start, cert.pure_decay_steps
        ),
    })
}

fn scattering_check(p: &ModelParams) -> CliResult<Check> {
    let start = PlaneWaveCoeffs {
        n: 0,
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        k_x0: 1.0,
    };
    let trace = amplitude_trace(p, 1.0, start, 40)?;
    Ok(check(
        "scattering_current",
        p,
        trace.max_current_drift,
        trace.drift_tolerance,
        "k x0 = 1, 40 barriers".into(),
    ))
}

fn run_point(p: ModelParams, config: &RunConfig, index: u64, fault: bool) -> CliResult<Vec<Check>> {
    let s = ZeroModeState::new(p, config.a0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(
        config
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index),
    );
    let mut out = vec![
        scaling_closed_form(&s, &mut rng, config.samples)?,
        scaling_raw(&s, &mut rng, config.samples, fault)?,
        matrix_algebra(&p, &mut rng),
        g_bounds(&s, &mut rng, config.samples)?,
        norm_ratio(&s),
        dsi_identity(&s, &mut rng)?,
        scattering_check(&p)?,
    ];
    if CERTIFICATE_LAMBDAS.contains(&p.lambda()) {
        out.push(certificate_check(&p)?);
    }
    Ok(out)
}

pub fn run_checks(config: &RunConfig, fault: bool) -> CliResult<Vec<Check>> {
    let x0 = config.params.x0();
    let mut lambdas = LAMBDAS.to_vec();
    lambdas.extend(CERTIFICATE_LAMBDAS.iter().filter(|l| !LAMBDAS.contains(l)));
    let points: Vec<ModelParams> = lambdas
        .iter()
        .flat_map(|&l| MUS.iter().map(move |&m| ModelParams::new(x0, l, m)))
        .collect::<Result<_, _>>()?;
    let results: Vec<CliResult<Vec<Check>>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &p)| run_point(p, config, i as u64, fault))
        .collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    Ok(checks)
}

pub fn verify(config: &RunConfig, fault: bool) -> CliResult<Outcome> {
    let checks = run_checks(config, fault)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let json: Value = json!({
        "passed": failed == 0,
        "seed": config.seed,
        "samples": config.samples,
        "fault_injected": fault,
        "failed": failed,
        "checks": checks,
    });
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{} {:<28} lambda={:<8.6} mu={:<4} value={:.3e} tol={:.1e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.check,
                c.lambda,
                c.mu,
                c.value,
                c.tolerance,
                c.detail
            )
        })
        .collect();
    lines.push(format!(
        "verify: {} passed, {failed} failed",
        checks.len() - failed
    ));
    let failure = (failed > 0).then(|| CliError::Invariant(format!("{failed} checks failed")));
    Ok(Outcome {
        json,
        text: lines.join("\n"),
        failure,
    })
}
