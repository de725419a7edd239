//! End-to-end runs of the `wgqed` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RECT: &str = r#"
[emitter]
kind = "chiral"

[pulse]
shape = "rect"
gamma_tp = 2.0
photons = 1
"#;

/// Short grid with every output switched on, small enough to pin row counts.
const SMALL: &str = r#"
[emitter]
kind = "chiral"

[pulse]
shape = "rect"
gamma_tp = 2.0
photons = 1

[grid]
gamma_dt = 0.01
gamma_tmax = 5.0

[outputs]
g1 = true
spectrum = true
intensity = true
stationary = true
stride = 50

[spectra]
omega_min = -5.0
omega_max = 5.0
n_omega = 11
"#;

struct Run {
    dir: TempDir,
    out: PathBuf,
    output: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exit code")
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }
}

fn wgqed(args: &[&str], config: Option<&str>, extra_env: &[(&str, &str)]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wgqed"));
    cmd.args(args).env_remove("WGQED_OUT_DIR").current_dir(dir.path());
    if let Some(text) = config {
        let path = dir.path().join("scenario.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(&path);
    }
    if !extra_env.iter().any(|(k, _)| *k == "WGQED_OUT_DIR") {
        cmd.arg("--out").arg(&out);
    }
    cmd.envs(extra_env.iter().copied());
    let output = cmd.output().unwrap();
    Run { dir, out, output }
}

fn header_and_rows(text: &str) -> (&str, usize) {
    let mut lines = text.lines();
    (lines.next().unwrap(), lines.count())
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn golden_headers_and_row_counts() {
    let run = wgqed(&["simulate"], Some(SMALL), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    // 500 bins; g1 rows i ∈ {0, 50, …, 450, 499}, τ steps of 50: 10 + 9 + … + 1 + 1
    let expected = [
        ("population_analytic.csv", "gamma_t,n_tls,photons_r,photons_l,photons_in", 500),
        ("population_mps.csv", "gamma_t,n_tls,photons_r,photons_l,photons_in", 500),
        ("flux_analytic.csv", "gamma_t,flux_r,flux_l", 500),
        ("flux_mps.csv", "gamma_t,flux_r,flux_l", 500),
        ("g1_analytic.csv", "gamma_t,gamma_tau,g1_re,g1_im", 56),
        ("g1_mps.csv", "gamma_t,gamma_tau,g1_re,g1_im", 56),
        ("spectrum_analytic.csv", "gamma_t,omega_minus_wp_over_gamma,s", 12 * 11),
        ("spectrum_mps.csv", "gamma_t,omega_minus_wp_over_gamma,s", 12 * 11),
        ("intensity_analytic.csv", "gamma_t,omega_minus_wp_over_gamma,i", 11 * 11),
        ("intensity_mps.csv", "gamma_t,omega_minus_wp_over_gamma,i", 11 * 11),
        ("stationary_analytic.csv", "omega_minus_wp_over_gamma,s,input_spectrum,closed_form", 11),
        ("stationary_mps.csv", "omega_minus_wp_over_gamma,s,input_spectrum,closed_form", 11),
        ("diff_summary.csv", "quantity,max_abs_error,rms_error", 3),
    ];
    for (name, header, rows) in expected {
        let text = run.read(name);
        assert!(!text.contains('\r'));
        assert_eq!(header_and_rows(&text), (header, rows), "{name}");
    }
    assert_eq!(csv_files(&run.out).len(), expected.len());
    // the first row of each file
    assert_eq!(run.read("population_analytic.csv").lines().nth(1).unwrap().split(',').next(), Some("0.01"));
    assert_eq!(run.read("flux_mps.csv").lines().nth(1).unwrap().split(',').next(), Some("0.005"));
    assert!(run.read("spectrum_mps.csv").lines().nth(1).unwrap().starts_with("0,-5,0"));

    let manifest: serde_json::Value = serde_json::from_str(&run.read("manifest.json")).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), expected.len());
    for engine in ["analytic", "mps"] {
        let r = &manifest["engines"][engine]["residuals"];
        assert!(r["conservation_error"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn both_engines_agree_on_the_reference_pulse() {
    let run = wgqed(&["simulate", "--engine", "both"], Some(RECT), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let diff = run.read("diff_summary.csv");
    let n_tls: Vec<&str> = diff.lines().find(|l| l.starts_with("n_tls,")).unwrap().split(',').collect();
    let max: f64 = n_tls[1].parse().unwrap();
    assert!(max <= 2e-3, "{max}");
    assert!(max > 0.0);
}

#[test]
fn outputs_are_deterministic_across_runs_and_thread_counts() {
    let a = wgqed(&["spectra", "--threads", "1"], Some(SMALL), &[]);
    let b = wgqed(&["spectra", "--threads", "3"], Some(SMALL), &[]);
    let c = wgqed(&["spectra", "--threads", "3"], Some(SMALL), &[]);
    for r in [&a, &b, &c] {
        assert_eq!(r.code(), 0, "{}", r.stderr());
    }
    let files = csv_files(&a.out);
    assert!(files.len() >= 10);
    assert_eq!(files, csv_files(&b.out));
    assert_eq!(files, csv_files(&c.out));
}

#[test]
fn rerunning_a_manifest_reproduces_the_csvs() {
    let first = wgqed(&["spectra"], Some(SMALL), &[]);
    assert_eq!(first.code(), 0, "{}", first.stderr());
    let manifest = first.out.join("manifest.json");
    let again = wgqed(&["spectra", "--config", manifest.to_str().unwrap()], None, &[]);
    assert_eq!(again.code(), 0, "{}", again.stderr());
    assert_eq!(csv_files(&first.out), csv_files(&again.out));

    // the recorded hashes describe the files on disk
    let m: serde_json::Value = serde_json::from_str(&first.read("manifest.json")).unwrap();
    let m2: serde_json::Value = serde_json::from_str(&again.read("manifest.json")).unwrap();
    assert_eq!(m["outputs"], m2["outputs"]);
    assert_eq!(m["config"], m2["config"]);
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let cases = [
        RECT.replace("photons = 1", "photons = 3"),
        RECT.replace("kind = \"chiral\"", "kind = \"chiral\"\ncolour = \"blue\""),
        format!("{RECT}\n[grid]\ngamma_dt = 0.1\n"),
        format!("{RECT}\n[grid]\ngamma_dt = 0.003\n"),
        RECT.replace("kind = \"chiral\"", "kind = \"symmetric\"\ndelta_over_gamma = 1.0"),
        "[emitter]\nkind = \"chiral\"\n[pulse]\nshape = \"sampled\"\nphotons = 1\nsamples = [0.0, 0.0, 0.0, 0.0]\n[grid]\ngamma_dt = 0.01\n"
            .to_string(),
        "not toml at all [".to_string(),
    ];
    for text in &cases {
        let run = wgqed(&["simulate"], Some(text), &[]);
        assert_eq!(run.code(), 2, "{text}\n{}", run.stderr());
        assert!(run.stderr().contains("invalid configuration"));
        assert!(!run.out.join("manifest.json").exists());
    }
    let missing = wgqed(&["simulate", "--config", "/nonexistent/scenario.toml"], None, &[]);
    assert_eq!(missing.code(), 2);
}

#[test]
fn engine_failures_exit_with_code_three() {
    // a two-photon bidirectional chain needs bond dimension 4
    let text = RECT.replace("chiral", "symmetric").replace("photons = 1", "photons = 2") + "\n[mps]\nmax_bond = 3\n";
    let run = wgqed(&["simulate"], Some(&text), &[]);
    assert_eq!(run.code(), 3, "{}", run.stderr());
    let report: serde_json::Value = serde_json::from_str(&run.read("error.json")).unwrap();
    assert_eq!(report["failed_engine"], "mps");
    assert_eq!(report["engines"]["analytic"]["status"], "ok");
    assert!(report["engines"]["analytic"]["residuals"]["conservation_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("from_env");
    let run = wgqed(&["simulate", "--engine", "analytic"], Some(RECT), &[("WGQED_OUT_DIR", env_out.to_str().unwrap())]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    assert!(env_out.join("manifest.json").exists());

    // the flag wins over the environment
    let flag_out = dir.path().join("from_flag");
    let status = Command::new(env!("CARGO_BIN_EXE_wgqed"))
        .args(["simulate", "--engine", "analytic", "--config"])
        .arg(run.dir.path().join("scenario.toml"))
        .arg("--out")
        .arg(&flag_out)
        .env("WGQED_OUT_DIR", dir.path().join("unused"))
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(flag_out.join("manifest.json").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn verify_passes_and_catches_a_flipped_drive() {
    let clean = wgqed(&["verify"], None, &[]);
    assert_eq!(clean.code(), 0, "{}", String::from_utf8_lossy(&clean.output.stdout));
    let report: serde_json::Value = serde_json::from_str(&clean.read("verify_report.json")).unwrap();
    assert_eq!(report["failed"], 0);
    let checks = report["checks"].as_array().unwrap();
    let order = checks.iter().find(|c| c["name"] == "cross_engine/order").unwrap();
    assert!((order["value"].as_f64().unwrap() - 2.0).abs() < 0.5);

    let broken = wgqed(&["verify", "--inject-drive-sign-flip"], None, &[]);
    assert_eq!(broken.code(), 1);
    let report: serde_json::Value = serde_json::from_str(&broken.read("verify_report.json")).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"factor_two/analytic"), "{failed:?}");
    assert!(failed.iter().any(|n| n.starts_with("conservation/")), "{failed:?}");
    // the MPS engine does not use the hierarchy
    assert!(!failed.contains(&"conservation/chiral/n1/mps"));
}

#[test]
fn verify_adds_scenario_checks() {
    let run = wgqed(&["verify"], Some(&RECT.replace("photons = 1", "photons = 2")), &[]);
    assert_eq!(run.code(), 0);
    let stdout = String::from_utf8_lossy(&run.output.stdout);
    assert!(stdout.contains("scenario/conservation/mps"));
    assert!(stdout.contains("scenario/cross_engine"));
}

#[test]
fn sweep_reports_peaks_and_ratios() {
    let text = "[emitter]\nkind = \"chiral\"\n[pulse]\nshape = \"rect\"\nphotons = 1\n[grid]\ngamma_dt = 0.01\n[sweep]\ngamma_tp = [2.0, 10.0, 60.0]\n";
    let run = wgqed(&["sweep"], Some(text), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let csv = run.read("sweep.csv");
    assert_eq!(header_and_rows(&csv), ("gamma_tp,engine,peak_n1,peak_n2,r21,closed_form_n1,status", 6));
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[6], "ok");
        let (peak, closed): (f64, f64) = (f[2].parse().unwrap(), f[5].parse().unwrap());
        let tol = if f[1] == "analytic" { 1e-6 } else { 5e-3 };
        assert!((peak - closed).abs() < tol, "{line}");
        let r21: f64 = f[4].parse().unwrap();
        assert!(r21 > 0.9 && r21 < 2.0);
    }
}

#[test]
fn failed_sweep_points_are_marked() {
    let text = "[emitter]\nkind = \"symmetric\"\n[pulse]\nshape = \"rect\"\nphotons = 1\n[grid]\ngamma_dt = 0.01\n[mps]\nmax_bond = 3\n[sweep]\ngamma_tp = [2.0, 4.0]\n";
    let run = wgqed(&["sweep"], Some(text), &[]);
    assert_eq!(run.code(), 3, "{}", run.stderr());
    let csv = run.read("sweep.csv");
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        match f[1] {
            "analytic" => assert_eq!(f[6], "ok"),
            _ => assert!(f[6].starts_with("failed"), "{line}"),
        }
    }
    let m: serde_json::Value = serde_json::from_str(&run.read("manifest.json")).unwrap();
    assert_eq!(m["failed"], 2);
}

#[test]
fn free_pulse_spectra_and_plot_script() {
    let run = wgqed(&["spectra", "--no-emitter"], Some(SMALL), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let stationary = run.read("stationary_free.csv");
    for line in stationary.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        // without an emitter the pulse keeps its own spectrum
        assert!((f[1] - f[2]).abs() < 0.02 * 0.32, "{line}");
    }
    let script = run.out.join("plot_spectra.py");
    assert!(script.exists());
    let python = Command::new("python3")
        .args(["-c", "import ast, sys; ast.parse(open(sys.argv[1]).read())"])
        .arg(&script)
        .output();
    if let Ok(out) = python {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "toml") {
            let config = wgqed_cli::ScenarioConfig::load(&path).unwrap();
            config.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}
