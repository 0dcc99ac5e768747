use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blocksparse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn blocksparse")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_exact_signal(dir: &Path) -> String {
    let mut text = String::from("layout: d=5\n");
    for i in 0..1000 {
        text.push_str(if i < 10 { "0.31622776601683794\n" } else { "0\n" });
    }
    let path = dir.join("exact.txt");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {report}"))
        .parse()
        .unwrap()
}

#[test]
fn bound_examples() {
    let out = run(&["bound", "--k2", "2", "--d", "5", "--signal-length", "1000", "--m", "500"]);
    assert!(out.status.success());
    let value: f64 = stdout(&out).trim().parse().unwrap();
    assert!((value - 0.184_018_867_541_345).abs() < 1e-12);

    let with_noise = run(&[
        "bound", "--k2", "2", "--d", "5", "--signal-length", "1000", "--m", "500", "--delta", "0.1", "--kappa3", "2",
    ]);
    let v: f64 = stdout(&with_noise).trim().parse().unwrap();
    assert!((v - (0.184_018_867_541_345 + 0.2)).abs() < 1e-12);

    let bigger_m = run(&["bound", "--k2", "2", "--d", "5", "--signal-length", "1000", "--m", "250"]);
    let v250: f64 = stdout(&bigger_m).trim().parse().unwrap();
    assert!(v250 > value);

    let bad = run(&["bound", "--k2", "2", "--d", "5", "--signal-length", "100", "--m", "500"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn estimate_report_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_exact_signal(dir.path());
    let args = [
        "estimate", "--signal", &signal, "--alpha", "2", "--gamma-alpha", "0.7071067811865476", "--sigma", "0.1",
        "--n1", "500", "--n-alpha", "500", "--seed", "7", "--truth",
    ];
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout(&out);
    let (k, lo, hi) = (field(&report, "k_hat"), field(&report, "ci_low"), field(&report, "ci_high"));
    assert!(lo <= k && k <= hi);
    assert!((field(&report, "k_true") - 2.0).abs() < 1e-12);
    assert!(report.contains("seed=7\n") && report.contains("clamped_flags="));
    assert_eq!(stdout(&run(&args)), report);

    let csv = stdout(&run(&[&args[..], &["--format", "csv"]].concat()));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("alpha,n1,n_alpha,v1_hat,va_hat,k_hat,theta1,theta_a,w_hat,ci_low,ci_high,clamped_flags,seed"));
}

#[test]
fn estimate_interval_covers_truth_across_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_exact_signal(dir.path());
    let covered = (0..40)
        .filter(|seed| {
            let seed = seed.to_string();
            let out = run(&[
                "estimate", "--signal", &signal, "--gamma-alpha", "0.7071067811865476", "--sigma", "0.1", "--seed",
                &seed,
            ]);
            let r = stdout(&out);
            field(&r, "ci_low") <= 2.0 && 2.0 <= field(&r, "ci_high")
        })
        .count();
    // 95% intervals: 40 seeds should rarely see more than 6 misses
    assert!(covered >= 34, "covered {covered}/40");
}

#[test]
fn exit_codes() {
    let missing = run(&["estimate", "--signal", "/nonexistent/signal.txt"]);
    assert_eq!(missing.status.code(), Some(2));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    assert_eq!(run(&["estimate"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let signal = write_exact_signal(dir.path());
    assert_eq!(run(&["estimate", "--signal", &signal, "--alpha", "3"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--signal", &signal, "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--signal", &signal, "--noise", "t:0.5", "--sigma", "1"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--signal", &signal, "--n1", "0"]).status.code(), Some(2));

    let zero = dir.path().join("zero.txt");
    fs::write(&zero, "layout: d=2\n0\n0\n0\n0\n").unwrap();
    let degenerate = run(&["estimate", "--signal", zero.to_str().unwrap()]);
    assert_eq!(degenerate.status.code(), Some(3));
    assert!(String::from_utf8(degenerate.stderr).unwrap().contains("median absolute measurement is 0"));

    let malformed = dir.path().join("bad.txt");
    fs::write(&malformed, "layout: d=2\n1\nfoo\n").unwrap();
    let out = run(&["estimate", "--signal", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));
}

#[test]
fn measure_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let signal = write_exact_signal(dir.path());
    let matrix = dir.path().join("a.csv");
    let out = run(&[
        "measure", "--signal", &signal, "--alpha", "2", "--n", "20", "--seed", "3", "--matrix", matrix.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let y: Vec<f64> = stdout(&out).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(y.len(), 20);
    let rows: Vec<Vec<f64>> = fs::read_to_string(&matrix)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    let c = 0.31622776601683794;
    for (row, yi) in rows.iter().zip(&y) {
        assert_eq!(row.len(), 1000);
        let dot: f64 = row[..10].iter().map(|a| a * c).sum();
        assert!((dot - yi).abs() < 1e-9 * (1.0 + yi.abs()));
    }
    let plain = run(&["measure", "--signal", &signal, "--alpha", "2", "--n", "20", "--seed", "3"]);
    assert_eq!(stdout(&plain), stdout(&out));

    let draws = run(&["sample-stable", "--alpha", "1.5", "--dim", "3", "--count", "5", "--seed", "1"]);
    assert!(draws.status.success());
    let text = stdout(&draws);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.split(',').count() == 3));
    assert_eq!(run(&["sample-stable", "--alpha", "0", "--count", "1"]).status.code(), Some(2));
}

#[test]
fn experiment_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("error_curve.cfg");
    fs::write(
        &config,
        "study = error_curve\nsignal_length = 100\nreplications = 5\ngrid = 50,100\ntheory_draws = 10000\nseed = 11\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let status = run(&["experiment", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    }
    for name in ["error_curve.csv", "manifest.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.join("error_curve.csv")).unwrap();
    assert!(csv.starts_with("param_variant,n_total,mean_rel_err,theory"));
    assert_eq!(csv.lines().count(), 3);
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 11") && manifest.contains("# blocksparse "));

    fs::write(&config, "study = error_curve\nreplications = many\n").unwrap();
    let bad = run(&["experiment", "--config", config.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("line 2"));
}
