use std::path::Path;
use std::process::{Command, Output};

use noon_spectroscopy::cli::scenario::fig3_comb;
use noon_spectroscopy::io::{parse_columns, read_spectrum_csv, SPECTRUM_HEADER};
use noon_spectroscopy::PeakReport;

fn noonspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noonspec"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = noonspec(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    assert_eq!(
        noonspec(&["simulate", "--preset", "nope", "--out", p(&out)])
            .status
            .code(),
        Some(2)
    );

    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"version": 1, "pump": {"kind": "laser"}}"#).unwrap();
    assert_eq!(
        noonspec(&["simulate", "--config", p(&cfg), "--out", p(&out)])
            .status
            .code(),
        Some(2)
    );

    let aliasing = tmp.path().join("alias.json");
    std::fs::write(
        &aliasing,
        r#"{"version": 1, "pump": {"kind": "monochromatic", "center_thz": 740.25},
            "time_grid": {"step_ps": 0.001, "count": 1024}}"#,
    )
    .unwrap();
    assert_eq!(
        noonspec(&["simulate", "--config", p(&aliasing), "--out", p(&out)])
            .status
            .code(),
        Some(3)
    );

    let uneven = tmp.path().join("uneven.csv");
    std::fs::write(&uneven, "t_ps,g\n0,1\n0.001,0.5\n0.003,0\n").unwrap();
    assert_eq!(
        noonspec(&["recover", p(&uneven), "--out", p(&out)]).status.code(),
        Some(4)
    );

    let malformed = tmp.path().join("bad.csv");
    std::fs::write(&malformed, "t_ps,g\n0,abc\n").unwrap();
    assert_eq!(
        noonspec(&["recover", p(&malformed), "--out", p(&out)]).status.code(),
        Some(2)
    );

    // no output directory anywhere
    assert_eq!(noonspec(&["simulate", "--preset", "fig3"]).status.code(), Some(2));
}

#[test]
fn single_line_preset_runs_oscillate_at_their_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["simulate", "--preset", "fig2", "--out", p(tmp.path())]);
    for (run, nu) in [
        ("nu_740.215", 740.215),
        ("nu_740.250", 740.250),
        ("nu_740.300", 740.300),
    ] {
        let summary: serde_json::Value =
            serde_json::from_str(&read(&tmp.path().join(run).join("summary.json"))).unwrap();
        let found = summary["dominant_oscillation_thz"].as_f64().unwrap();
        assert!((found - nu).abs() <= 1.0 / 32.768, "{run}: {found}");
    }
}

#[test]
fn transparent_sample_leaves_spectrum_unchanged() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["simulate", "--preset", "fig3", "--out", p(tmp.path())]);
    assert_eq!(
        read(&tmp.path().join("spectrum.csv")),
        read(&tmp.path().join("transmitted.csv"))
    );
    for name in ["interferogram.csv", "trace.csv", "summary.json"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    assert!(!tmp.path().join("counts.csv").exists());
}

#[test]
fn comb_preset_recovery_matches_line_areas() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let rec = tmp.path().join("rec");
    ok(&["simulate", "--preset", "fig3", "--out", p(&sim)]);
    ok(&["recover", p(&sim.join("trace.csv")), "--out", p(&rec)]);

    let folded = read_spectrum_csv(&read(&rec.join("folded.csv"))).unwrap();
    let comb = fig3_comb();
    let total: f64 = comb.iter().map(|l| l.weight).sum();
    for line in &comb {
        let area = folded.mass_between(line.center - 0.25, line.center + 0.25);
        let expected = line.weight / total;
        assert!(
            (area - expected).abs() <= 0.01 * expected,
            "{}: {area} vs {expected}",
            line.center
        );
    }
    let peaks: PeakReport = serde_json::from_str(&read(&rec.join("peaks.json"))).unwrap();
    assert_eq!(peaks.len(), comb.len());

    let recovered = read(&rec.join("recovered.csv"));
    assert!(recovered.starts_with("nu_thz,amplitude_abs,amplitude_re,amplitude_im\n"));
}

#[test]
fn downshifted_recovery_folds_to_the_same_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--preset", "fig3", "--out", p(&sim)]);
    let trace = sim.join("trace.csv");
    ok(&["recover", p(&trace), "--out", p(&tmp.path().join("a"))]);
    ok(&[
        "recover",
        p(&trace),
        "--out",
        p(&tmp.path().join("b")),
        "--downshift-thz",
        "740",
    ]);

    let cols = |dir: &str| parse_columns(&read(&tmp.path().join(dir).join("folded.csv")), SPECTRUM_HEADER).unwrap();
    let (a, b) = (cols("a"), cols("b"));
    assert_eq!(a[0], b[0]);
    let scale = a[1].iter().copied().fold(0.0, f64::max);
    for (x, y) in a[1].iter().zip(&b[1]) {
        assert!((x - y).abs() <= 1e-9 * scale);
    }
    // the shifted two-sided output is labelled around the reference
    let shifted = parse_columns(
        &read(&tmp.path().join("b").join("recovered.csv")),
        "nu_thz,amplitude_abs,amplitude_re,amplitude_im",
    )
    .unwrap();
    let mid = shifted[0][shifted[0].len() / 2];
    assert!((mid - 740.0).abs() < 0.031);
}

#[test]
fn zero_trace_gives_empty_peaks() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("zero.csv");
    let mut text = String::from("t_ps,g\n");
    for n in 0..256 {
        text.push_str(&format!("{},0\n", n as f64 * 0.0005));
    }
    std::fs::write(&trace, text).unwrap();
    ok(&["recover", p(&trace), "--out", p(&tmp.path().join("r"))]);
    let peaks: PeakReport = serde_json::from_str(&read(&tmp.path().join("r").join("peaks.json"))).unwrap();
    assert!(peaks.is_empty());
}

#[test]
fn noise_outputs_and_single_trial_study() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--preset",
        "noise",
        "--out",
        p(&tmp.path().join("s")),
        "--seed",
        "3",
    ]);
    for name in ["counts.csv", "trace_noisy.csv"] {
        assert!(tmp.path().join("s").join(name).exists(), "{name}");
    }

    let out = ok(&[
        "noise-study",
        "--preset",
        "noise",
        "--out",
        p(&tmp.path().join("n")),
        "--trials",
        "1000",
        "--repeats",
        "20",
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("n/a"));
    let csv = read(&tmp.path().join("n").join("scaling.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n_trials,std_height,std_center"));
    assert!(lines.next().unwrap().starts_with("1000,"));
}

#[test]
fn shown_presets_load_as_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&["presets", "show", "fig4"]);
    let cfg = tmp.path().join("fig4.json");
    std::fs::write(&cfg, &out.stdout).unwrap();
    ok(&["simulate", "--config", p(&cfg), "--out", p(&tmp.path().join("run"))]);
    let summary: serde_json::Value = serde_json::from_str(&read(&tmp.path().join("run").join("summary.json"))).unwrap();
    assert!(summary["surviving_fraction"].as_f64().unwrap() < 1.0);

    let list = String::from_utf8(ok(&["presets", "list"]).stdout).unwrap();
    for name in ["fig2", "fig3", "fig4", "noise"] {
        assert!(list.contains(name));
    }
}
