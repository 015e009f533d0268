//! End-to-end checks of the command-line binary: artifacts, exit codes and
//! byte-identical reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deepdeal"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("deepdeal-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn single_run_emits_results_and_summary() {
    let out = temp_dir("single");
    let status = bin()
        .args(["single", "85,125", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let results = read(&out, "results.csv");
    assert!(results.starts_with("# schema: deepdeal-results-v1\n"));
    assert_eq!(
        results.lines().count(),
        2 + 3,
        "DEEP-DEAL, DEEP and REF-E rows"
    );
    let summary = read(&out, "summary.txt");
    assert!(summary.contains("DEEP-DEAL"));
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn drops_without_baseline_m_is_a_config_error() {
    let out = temp_dir("dropserr");
    let output = bin().args(["drops", "--out"]).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("baseline"), "stderr: {stderr}");
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn unknown_config_key_reports_line_and_exits_1() {
    let out = temp_dir("badcfg");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("bad.cfg");
    fs::write(&cfg, "seed = 3\nmystery_knob = 7\n").unwrap();
    let output = bin()
        .args(["sweep2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("mystery_knob"), "stderr: {stderr}");
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn drops_emits_cdfs_and_reruns_byte_identically() {
    let out_a = temp_dir("drops-a");
    let out_b = temp_dir("drops-b");
    let cfg_text = "k_users = 6\nn_drops = 5\nbaseline_m = 20\ncell_radius_m = 1500\n";
    let cfg = std::env::temp_dir().join(format!("deepdeal-drops-{}.cfg", std::process::id()));
    fs::write(&cfg, cfg_text).unwrap();

    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["drops", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .arg("--seed")
            .arg("77")
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in [
        "results.csv",
        "cdf_ee.csv",
        "cdf_ibo.csv",
        "cdf_m.csv",
        "summary.txt",
    ] {
        let a = read(&out_a, name);
        let b = read(&out_b, name);
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let cdf = read(&out_a, "cdf_ee.csv");
    assert!(cdf.starts_with("# schema: deepdeal-cdf-v1\n"));
    assert_eq!(cdf.lines().count(), 2 + 5, "one entry per drop");

    let _ = fs::remove_dir_all(&out_a);
    let _ = fs::remove_dir_all(&out_b);
    let _ = fs::remove_file(&cfg);
}

#[test]
fn validate_emits_pass_report() {
    let out = temp_dir("validate");
    let cfg = std::env::temp_dir().join(format!("deepdeal-val-{}.cfg", std::process::id()));
    fs::write(&cfg, "mc_samples = 50000\nmc_psi = 1.0,100\n").unwrap();
    let output = bin()
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("overall: PASS"), "stdout: {stdout}");
    let csv = read(&out, "validation.csv");
    assert!(csv.starts_with("# schema: deepdeal-validation-v1\n"));
    assert_eq!(csv.lines().count(), 2 + 2);
    let _ = fs::remove_dir_all(&out);
    let _ = fs::remove_file(&cfg);
}

#[test]
fn pa_class_flag_switches_the_model() {
    let out_b = temp_dir("classb");
    let out_p = temp_dir("perfect");
    for (out, class) in [(&out_b, "classb"), (&out_p, "perfect")] {
        let status = bin()
            .args(["single", "100,100", "--pa-class", class, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let b = read(&out_b, "results.csv");
    let p = read(&out_p, "results.csv");
    assert!(b.contains(",classb,"));
    assert!(p.contains(",perfect,"));
    assert_ne!(b, p);
    let _ = fs::remove_dir_all(&out_b);
    let _ = fs::remove_dir_all(&out_p);
}
