//! End-to-end runs of the `ladcf` binary against a small synthetic dataset.

use std::path::Path;
use std::process::{Command, Output};

fn ladcf(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ladcf"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawning ladcf")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Renders one 12-frame constant-velocity sequence into `root/seqs/linear`.
fn render_fixture(root: &Path) {
    let seq_dir = root.join("seqs").join("linear");
    let out = ladcf(
        &[
            "synth",
            "linear",
            "--frames",
            "12",
            "--noise",
            "25",
            "--seed",
            "3",
            "--out",
            seq_dir.to_str().unwrap(),
        ],
        root,
    );
    assert_success(&out, "synth");
    assert!(seq_dir.join("groundtruth_rect.txt").is_file());
    assert!(seq_dir.join("img").join("0001.png").is_file());
    assert!(seq_dir.join("img").join("0012.png").is_file());
}

#[test]
fn track_writes_reproducible_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    render_fixture(tmp.path());
    let seq = tmp.path().join("seqs").join("linear");

    let run = |out_dir: &str| {
        let out = ladcf(
            &["track", seq.to_str().unwrap(), "--out", out_dir],
            tmp.path(),
        );
        assert_success(&out, "track");
        std::fs::read_to_string(tmp.path().join(out_dir).join("trajectory.txt")).unwrap()
    };

    let first = run("run-a");
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines.len(), 12, "one trajectory line per frame");
    for line in &lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "line {line:?}");
        for f in &fields {
            f.parse::<f64>().expect("numeric field");
            assert_eq!(f.split('.').nth(1).map(str::len), Some(2), "two decimals in {f:?}");
        }
    }

    // Bit-identical on rerun: no hidden global state, no wall-clock leakage.
    let second = run("run-b");
    assert_eq!(first, second);
}

#[test]
fn track_overlay_writes_one_image_per_frame() {
    let tmp = tempfile::tempdir().unwrap();
    render_fixture(tmp.path());
    let seq = tmp.path().join("seqs").join("linear");

    let out = ladcf(
        &["track", seq.to_str().unwrap(), "--out", "ov", "--overlay"],
        tmp.path(),
    );
    assert_success(&out, "track --overlay");
    let overlay = tmp.path().join("ov").join("overlay");
    for k in 1..=12 {
        let path = overlay.join(format!("{k:04}.png"));
        assert!(path.is_file(), "missing {}", path.display());
    }
    let img = image::open(overlay.join("0001.png")).unwrap().to_rgb8();
    let red = img.pixels().filter(|p| p.0 == [255, 48, 48]).count();
    assert!(red > 50, "outline pixels present, got {red}");
}

#[test]
fn eval_writes_report_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    render_fixture(tmp.path());
    let dataset = tmp.path().join("seqs");

    let out = ladcf(
        &["eval", dataset.to_str().unwrap(), "--out", "report"],
        tmp.path(),
    );
    assert_success(&out, "eval");

    let report_dir = tmp.path().join("report");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_dir.join("report.json")).unwrap())
            .unwrap();
    let seqs = report["sequences"].as_array().unwrap();
    assert_eq!(seqs.len(), 1);
    assert_eq!(seqs[0]["name"], "linear");
    let success = seqs[0]["success"].as_array().unwrap();
    let precision = seqs[0]["precision"].as_array().unwrap();
    assert_eq!(success.len(), 101);
    assert_eq!(precision.len(), 51);
    let auc = report["mean_auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc), "auc {auc}");
    // Success is non-increasing in the overlap threshold.
    let values: Vec<f64> = success.iter().map(|v| v.as_f64().unwrap()).collect();
    for pair in values.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12);
    }

    for name in ["precision.csv", "success.csv"] {
        let text = std::fs::read_to_string(report_dir.join(name)).unwrap();
        assert!(text.lines().count() > 50, "{name} has threshold rows");
    }
    for name in ["precision.svg", "success.svg"] {
        let text = std::fs::read_to_string(report_dir.join(name)).unwrap();
        assert!(text.starts_with("<svg"), "{name} is an svg");
        assert!(text.contains("<polyline"), "{name} has curves");
    }
}

#[test]
fn config_file_is_honored_and_validated() {
    let tmp = tempfile::tempdir().unwrap();
    render_fixture(tmp.path());
    let seq = tmp.path().join("seqs").join("linear");

    let good = tmp.path().join("good.conf");
    std::fs::write(&good, "# tweaked run\nlambda1 = 1.0\nK = 2\nscales = 3\n").unwrap();
    let out = ladcf(
        &[
            "track",
            seq.to_str().unwrap(),
            "--config",
            good.to_str().unwrap(),
            "--out",
            "cfg-run",
        ],
        tmp.path(),
    );
    assert_success(&out, "track with config");

    let bad = tmp.path().join("bad.conf");
    std::fs::write(&bad, "lambda1 = 1.0\nwat = 7\n").unwrap();
    let out = ladcf(
        &[
            "track",
            seq.to_str().unwrap(),
            "--config",
            bad.to_str().unwrap(),
            "--out",
            "cfg-bad",
        ],
        tmp.path(),
    );
    assert!(!out.status.success(), "unknown key must fail");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown key"), "stderr: {stderr}");
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn selftest_reports_every_check_passing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ladcf(&["selftest"], tmp.path());
    assert_success(&out, "selftest");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS]"), "stdout: {stdout}");
    assert!(!stdout.contains("[FAIL]"), "stdout: {stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count() >= 8);
}
