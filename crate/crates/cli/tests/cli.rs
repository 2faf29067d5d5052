use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use dsi_barrier_core::fit::autocorrelation_period;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dsi-barrier"));
    c.env_remove("DSI_BARRIER_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = args.to_vec();
    full.extend(["--out", dir.to_str().unwrap()]);
    run(&full)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn repeated_runs_are_byte_identical() {
    for cmd in ["fig1", "fig2", "momentum", "wavefunction", "spectrum"] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(code(&run_in(a.path(), &[cmd])), 0, "{cmd}");
        let o = bin()
            .env("DSI_BARRIER_THREADS", "1")
            .args([cmd, "--out", b.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in names {
            let x = fs::read(a.path().join(&name)).unwrap();
            let y = fs::read(b.path().join(&name)).unwrap();
            assert!(x == y, "{cmd}: {name:?} differs");
        }
    }
}

#[test]
fn verify_passes_and_is_seeded() {
    let a = run(&["verify", "--json", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    let b = run(&["verify", "--json", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    let certs: Vec<_> = checks
        .iter()
        .filter(|c| c["check"] == "negative_energy_certificate")
        .collect();
    assert!(!certs.is_empty() && certs.iter().all(|c| c["passed"] == true));
    for lambda in [1.2, 1.618_033_988_749_895, 3.0] {
        for mu in [0.5, 1.0, 2.0] {
            assert!(checks
                .iter()
                .any(|c| c["lambda"] == lambda && c["mu"] == mu));
        }
    }
}

#[test]
fn injected_fault_breaks_scaling_check() {
    let o = run(&["verify", "--json", "--inject-fault"]);
    assert_eq!(code(&o), 4);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let checks = v["checks"].as_array().unwrap();
    let raw = checks
        .iter()
        .filter(|c| c["check"] == "scaling_raw_propagation")
        .count();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert!(raw >= 9);
    assert_eq!(failed.len(), raw);
    assert!(failed.iter().all(|c| *c == "scaling_raw_propagation"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["alpha", "--lambda", "0.5"])), 2);
    assert_eq!(code(&run(&["alpha", "--mu", "-1"])), 2);
    assert_eq!(
        code(&run(&["alpha", "--config", "/nonexistent/run.ini"])),
        2
    );
    let bad = dir.path().join("bad.ini");
    fs::write(&bad, "[fig1]\nwidth = 3\n").unwrap();
    assert_eq!(code(&run(&["fig1", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run_in(dir.path(), &["fig2", "--lambda", "1.2"])), 2);
    let o = bin()
        .env("DSI_BARRIER_THREADS", "zero")
        .arg("alpha")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["alpha", "--bogus"])), 2);
    let blocked = dir.path().join("file");
    fs::write(&blocked, "").unwrap();
    let o = run(&["fig1", "--out", blocked.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn alpha_reports() {
    let o = run(&["alpha", "--lambda", "3", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 0.5433).abs() < 5e-4);
    assert_eq!(v["regime"], "subcritical");
    let o = run(&["alpha", "--lambda", "1.618033988749895", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["regime"], "critical");
    let o = run(&["alpha", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 1.877_707_665_886_147_6).abs() < 1e-12);
    assert_eq!(v["regime"], "supercritical");
    let text = String::from_utf8(run(&["alpha"]).stdout).unwrap();
    assert!(text.contains("alpha = 1.8777") && text.contains("below"));
}

#[test]
fn sidecar_schema() {
    let dir = TempDir::new().unwrap();
    for cmd in ["fig1", "fig2", "wavefunction", "momentum", "spectrum"] {
        assert_eq!(code(&run_in(dir.path(), &[cmd])), 0);
        let v = read_json(&dir.path().join(format!("{cmd}.json")));
        assert_eq!(v["schema"], "dsi-barrier/1");
        assert_eq!(v["command"], cmd);
        assert_eq!(v["software"]["name"], "dsi-barrier-cli");
        assert!(v["software"]["version"].is_string());
        for key in ["x0", "lambda", "mu", "a0"] {
            assert!(v["params"][key].is_f64(), "{cmd} {key}");
        }
        assert!(v["alpha"].is_f64());
        assert!(v["roots"]["r_grow"].is_f64() && v["roots"]["r_decay"].is_f64());
        assert!(v["regime"].is_string());
        assert!(v["tolerances"].is_object());
        for f in v["files"].as_array().unwrap() {
            assert!(dir.path().join(f.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn fig1_dataset() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["fig1"])), 0);
    let meta = read_json(&dir.path().join("fig1.json"));
    let upper = meta["results"]["envelope_upper"].as_f64().unwrap();
    let lower = meta["results"]["envelope_lower"].as_f64().unwrap();
    assert_eq!(format!("{upper:.2}/{lower:.2}"), "0.78/0.39");
    let alpha = meta["alpha"].as_f64().unwrap();
    let (header, rows) = read_csv(&dir.path().join("fig1_wavefunction.csv"));
    assert_eq!(
        header,
        [
            "ln_x_over_x0",
            "psi0_x",
            "psi0_lambda_x",
            "psi0_x_over_lambda"
        ]
    );
    let scale = 1.2f64.powf(-alpha);
    for r in &rows {
        assert!(((r[2] - scale * r[1]) / r[2]).abs() < 1e-12);
        assert!(((r[1] - scale * r[3]) / r[1]).abs() < 1e-12);
    }
    let (header, rows) = read_csv(&dir.path().join("fig1_ratio.csv"));
    assert_eq!(header, ["ln_x_over_x0", "g"]);
    let g: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert!(g.iter().all(|v| *v >= lower && *v <= upper));
    let period = 1.2f64.ln();
    let est =
        autocorrelation_period(&g, rows[1][0] - rows[0][0], 0.5 * period, 1.5 * period).unwrap();
    assert!((est / period - 1.0).abs() < 0.02, "{est}");
}

#[test]
fn fig2_dataset() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["fig2"])), 0);
    let meta = read_json(&dir.path().join("fig2.json"));
    let r = &meta["results"];
    assert_eq!(r["n_c"], 0);
    let theory = r["theoretical_slope"].as_f64().unwrap();
    assert!((theory + 0.9133).abs() < 1e-4);
    let slope = r["measured_slope"].as_f64().unwrap();
    assert!((slope / theory - 1.0).abs() < 0.05, "{slope}");
    let period = r["measured_period"].as_f64().unwrap();
    assert!((period / 3f64.ln() - 1.0).abs() < 0.02, "{period}");
    assert!(r["conjugate_pair_deviation"].as_f64().unwrap() < 1e-12);
    let (header, rows) = read_csv(&dir.path().join("fig2_momentum.csv"));
    assert_eq!(header, ["p", "magnitude_sq", "envelope"]);
    assert_eq!(rows.len() + r["excluded_p"].as_array().unwrap().len(), 400);
    let c = r["envelope_constant"].as_f64().unwrap();
    for row in &rows {
        assert!((row[2] / (c * row[0].powf(theory)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        "[model]\nlambda = 2.5\nmu = 0.5\n[wavefunction]\npoints = 5\nmin = 0.5\nmax = 8\n",
    )
    .unwrap();
    let o = run_in(
        dir.path(),
        &[
            "wavefunction",
            "--config",
            cfg.to_str().unwrap(),
            "--mu",
            "2",
        ],
    );
    assert_eq!(code(&o), 0);
    let meta = read_json(&dir.path().join("wavefunction.json"));
    assert_eq!(meta["params"]["lambda"], 2.5);
    assert_eq!(meta["params"]["mu"], 2.0);
    let (_, rows) = read_csv(&dir.path().join("wavefunction.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[4][0], 8.0);
}

#[test]
fn momentum_regimes_report_references() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run_in(dir.path(), &["momentum"])), 0);
    let meta = read_json(&dir.path().join("momentum.json"));
    let c0 = meta["results"]["reference"]["c0_magnitude_sq"]
        .as_f64()
        .unwrap();
    let (header, rows) = read_csv(&dir.path().join("momentum.csv"));
    assert_eq!(header[3], "magnitude_sq");
    assert!((rows[0][3] / c0 - 1.0).abs() < 0.01);
    assert_eq!(
        code(&run_in(
            dir.path(),
            &["momentum", "--lambda", "1.618033988749895"]
        )),
        0
    );
    let meta = read_json(&dir.path().join("momentum.json"));
    assert_eq!(meta["regime"], "critical");
    assert!(meta["results"]["reference"]["ln_p_slope"].as_f64().unwrap() < 0.0);
}
