use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use reachtime_cli::RunReport;
use serde_json::{json, Value};
use tempfile::TempDir;

fn reachtime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reachtime"))
        .args(args)
        .env("REACHTIME_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.display().to_string()
}

fn report(dir: &Path) -> RunReport {
    RunReport::load(&dir.join("report.json")).expect("report.json parses")
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn servoing(kind: &str, delta: f64, alpha: f64) -> Value {
    json!({
        "plant": { "builder": "servoing" },
        "sigma0": [1.0, 1.0],
        "delta": delta,
        "alpha_u": alpha,
        "kind": kind,
    })
}

#[test]
fn unknown_case_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let r = reachtime(&["reproduce", "--case", "nope", "--out", &s(&out)]);
    assert_eq!(code(&r), 2, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out.exists());
}

#[test]
fn malformed_config_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"plant\": ").unwrap();
    let r = reachtime(&["synth", "--config", &s(&bad), "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 2);

    let cfg = json!({ "plant": { "builder": "servoing" }, "sigma0": [1.0], "kind": "vsc" });
    let path = write_config(tmp.path(), "short.json", &cfg);
    let r = reachtime(&["synth", "--config", &path, "--out", &s(&tmp.path().join("short"))]);
    assert_eq!(code(&r), 2);
    assert_eq!(report(&tmp.path().join("short")).status, "config_error");

    let mut cfg = servoing("vsc", 0.0, 20.0);
    cfg["typo_field"] = json!(1);
    let path = write_config(tmp.path(), "typo.json", &cfg);
    assert_eq!(
        code(&reachtime(&["synth", "--config", &path, "--out", &s(tmp.path())])),
        2
    );
}

#[test]
fn tight_budget_is_infeasible_with_a_diagnostic_report() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("vsc", 2.0, 1e-3));
    let r = reachtime(&["synth", "--config", &path, "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 3);
    let rep = report(tmp.path());
    assert_eq!(rep.status, "infeasible");
    assert!(rep.error.is_some());
    assert!(rep.certificate.is_none());
    assert_eq!(rep.input.unwrap().alpha_u, Some(1e-3));
}

#[test]
fn uvc_synthesis_matches_the_reference_bound() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("uvc", 0.0, 20.0));
    let r = reachtime(&["synth", "--config", &path, "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let cert = report(tmp.path()).certificate.expect("certificate");
    assert!((cert.t_bound() - 0.3764).abs() < 0.02 * 0.3764, "{}", cert.t_bound());
    let rho = cert.rho().unwrap();
    assert!((rho - 4.0).abs() < 0.15 * 4.0, "{rho}");
    let grid = fs::read_to_string(tmp.path().join("rho_grid.csv")).unwrap();
    assert!(grid.starts_with("rho,theta,feasible\n"));
}

#[test]
fn fixed_clock_runs_are_byte_identical_and_verify() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("vsc", 2.0, 20.0));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let r = reachtime(&[
            "synth",
            "--config",
            &path,
            "--out",
            &s(dir),
            "--fixed-clock",
            "--seed",
            "11",
        ]);
        assert_eq!(code(&r), 0);
    }
    let ra = fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, fs::read(b.join("report.json")).unwrap());
    assert!(!String::from_utf8(ra).unwrap().contains("timings"));

    let r = reachtime(&["verify", "--report", &s(&a.join("report.json"))]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn tampered_certificate_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("vsc", 0.0, 20.0));
    assert_eq!(
        code(&reachtime(&["synth", "--config", &path, "--out", &s(tmp.path())])),
        0
    );
    let rp = tmp.path().join("report.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&rp).unwrap()).unwrap();
    // Same certificate, but checked against a much wider rotation range.
    v["input"]["plant"]["delta_bar"] = json!(1.5);
    fs::write(&rp, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(code(&reachtime(&["verify", "--report", &s(&rp)])), 3);
}

#[test]
fn rov_simulation_writes_one_csv_per_vertex() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "plant": { "builder": "rov" },
        "sigma0": [1.0, 1.0, std::f64::consts::FRAC_PI_4],
        "alpha_u": 1000.0,
        "kind": "vsc",
        "sim": { "dt": 1e-4, "horizon": 1.5 }
    });
    let path = write_config(tmp.path(), "c.json", &cfg);
    let synth = tmp.path().join("synth");
    assert_eq!(code(&reachtime(&["synth", "--config", &path, "--out", &s(&synth)])), 0);
    let sim = tmp.path().join("sim");
    let r = reachtime(&[
        "simulate",
        "--config",
        &path,
        "--certificate",
        &s(&synth.join("report.json")),
        "--out",
        &s(&sim),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let rep = report(&sim);
    let bound = rep.certificate.as_ref().unwrap().t_bound();
    assert_eq!(rep.simulations.len(), 4);
    for rec in &rep.simulations {
        let t = rec.reaching_time.expect("reaches");
        assert!(t <= bound + 2e-4, "{}: {t} > {bound}", rec.label);
        let csv = fs::read_to_string(sim.join(rec.csv.as_ref().unwrap())).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "t,sigma_1,sigma_2,sigma_3,u_1,u_2,u_3,u_4,u_norm,v");
    }
}

#[test]
fn scalar_gain_from_config_reaches_on_time() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "plant": { "builder": "inline", "vertices": [[[1.0]]] },
        "sigma0": [1.0],
        "delta": 1.0,
        "kind": "vsc",
        "gain": [[-2.0]],
        "disturbance": { "channels": [[]], "offset": [1.0], "bound": 1.0 },
        "sim": { "dt": 1e-4, "horizon": 1.2 }
    });
    let path = write_config(tmp.path(), "c.json", &cfg);
    let r = reachtime(&["simulate", "--config", &path, "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 0);
    let rep = report(tmp.path());
    assert!(rep.certificate.is_none());
    let t = rep.simulations[0].reaching_time.unwrap();
    assert!((t - 1.0).abs() <= 2e-4, "{t}");
}

#[test]
fn runaway_gain_exits_with_divergence() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "plant": { "builder": "inline", "vertices": [[[1.0]]] },
        "sigma0": [1.0],
        "kind": "uvc",
        "gain": [[1e9]]
    });
    let path = write_config(tmp.path(), "c.json", &cfg);
    let r = reachtime(&["simulate", "--config", &path, "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 4);
    let rep = report(tmp.path());
    assert_eq!(rep.status, "divergence");
    assert!(rep.simulations[0].error.is_some());
}

#[test]
fn single_point_sweep_has_one_row() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = servoing("uvc", 0.0, 20.0);
    cfg["sweep_points"] = json!(1);
    cfg["rho_range"] = json!([4.0, 4.0]);
    let path = write_config(tmp.path(), "c.json", &cfg);
    assert_eq!(
        code(&reachtime(&["sweep-rho", "--config", &path, "--out", &s(tmp.path())])),
        0
    );
    let csv = fs::read_to_string(tmp.path().join("rho_sweep.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert_eq!(lines[0], "rho,theta,feasible");
    assert!(lines[1].ends_with(",true"));
}

#[test]
fn sweep_rejects_vsc() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("vsc", 0.0, 20.0));
    assert_eq!(
        code(&reachtime(&["sweep-rho", "--config", &path, "--out", &s(tmp.path())])),
        2
    );
}

#[test]
fn reproduce_writes_a_comparison_row() {
    let tmp = TempDir::new().unwrap();
    let r = reachtime(&[
        "reproduce",
        "--case",
        "rov-vsc",
        "--out",
        &s(tmp.path()),
        "--fixed-clock",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("rov-vsc")), "{stdout}");
    let rep = report(&tmp.path().join("rov-vsc"));
    assert_eq!(rep.case.as_deref(), Some("rov-vsc"));
    let table = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    let cmp = rep.comparison.unwrap();
    assert!(cmp.relative_error.abs() < 0.02);
    assert!(cmp.simulated_reach.unwrap() <= cmp.computed_bound);
}

#[test]
fn dump_program_writes_json() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "c.json", &servoing("uvc", 0.0, 20.0));
    assert_eq!(
        code(&reachtime(&[
            "dump-program",
            "--config",
            &path,
            "--out",
            &s(tmp.path())
        ])),
        2
    );
    let r = reachtime(&["dump-program", "--config", &path, "--rho", "4", "--out", &s(tmp.path())]);
    assert_eq!(code(&r), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("program.json")).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn seed_flag_changes_random_members_only_through_the_seed() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = servoing("uvc", 0.0, 20.0);
    cfg["gain"] = json!([[-3.0, 0.0], [0.0, -3.0]]);
    cfg["simulate"] = json!({ "vertices": false, "random_weights": 2 });
    cfg["sim"] = json!({ "horizon": 0.3, "dt": 1e-3 });
    let path = write_config(tmp.path(), "c.json", &cfg);
    let run = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        assert_eq!(
            code(&reachtime(&[
                "simulate",
                "--config",
                &path,
                "--out",
                &s(&out),
                "--seed",
                seed,
                "--fixed-clock"
            ])),
            0
        );
        report(&out)
            .simulations
            .iter()
            .map(|r| r.selection.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = reachtime_cli::ScenarioConfig::load(&path).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
