use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squeezelab"))
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn kernel_at_the_disc_center() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let o = run(&[
        "--domain",
        disc.to_str().unwrap(),
        "--cmd",
        "kernel",
        "--point",
        "0",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k = v["kernel"].as_f64().unwrap();
    assert!(
        (k - 1.0 / std::f64::consts::PI).abs() < 0.02 / std::f64::consts::PI,
        "{k}"
    );
    assert_eq!(v["degree"], 12);
}

#[test]
fn saved_kernel_is_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let saved = dir.path().join("disc.kernel");
    let o = run(&[
        "--domain",
        disc.to_str().unwrap(),
        "--cmd",
        "kernel",
        "--degree",
        "4",
        "--count",
        "5000",
        "--save-kernel",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let ev = squeezelab::bergman::io::load(&saved).unwrap();
    assert_eq!(ev.degree(), 4);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let d = disc.to_str().unwrap();
    assert_eq!(run(&["--domain", d, "--cmd", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["--cmd", "kernel"]).status.code(), Some(2));
    assert_eq!(
        run(&["--domain", d, "--cmd", "kernel", "--point", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["--domain", d, "--cmd", "kernel", "--point", "0,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["--domain", d, "--cmd", "metric", "--dir", "x"]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        run(&["--domain", missing.to_str().unwrap(), "--cmd", "kernel"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.cfg", "kind = ellipsoid\ncoeffs = 1, x\n");
    let o = run(&["--domain", bad.to_str().unwrap(), "--cmd", "kernel"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.cfg:2:13"), "{err}");
}

#[test]
fn metric_and_squeeze_on_the_ball() {
    let dir = tempfile::tempdir().unwrap();
    let ball = config(dir.path(), "ball.cfg", "kind = ball\ndim = 2\n");
    let b = ball.to_str().unwrap();
    let o = run(&[
        "--domain",
        b,
        "--cmd",
        "metric",
        "--degree",
        "4",
        "--count",
        "20000",
        "--point",
        "0.3i,-0.2",
        "--dir",
        "1,1i",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let ke = row[head.iter().position(|h| *h == "kahler_einstein").unwrap()];
    let kob = row[head.iter().position(|h| *h == "kobayashi").unwrap()];
    // the two closed forms coincide on the ball
    assert_eq!(ke, kob);

    let o = run(&[
        "--domain", b, "--cmd", "squeeze", "--point", "0.5,0.1", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["a"], 1.0);
    assert_eq!(v["valid"], true);
}

#[test]
fn bracket_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let out = dir.path().join("b.json");
    let o = run(&[
        "--domain",
        disc.to_str().unwrap(),
        "--cmd",
        "bracket",
        "--point",
        "0.5",
        "--degree",
        "3",
        "--trace",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let (lo, hi) = (
        v["caratheodory_lower"].as_f64().unwrap(),
        v["kobayashi_upper"].as_f64().unwrap(),
    );
    let exact = 16.0 / 9.0;
    assert!(
        lo <= exact * 1.001 && hi >= exact * 0.999 && hi - lo < 0.01 * exact,
        "[{lo}, {hi}]"
    );
    let trace = std::fs::read_to_string(dir.path().join("b.json.trace.csv")).unwrap();
    assert!(trace.starts_with("start,stage,iteration"));
}

#[test]
fn verify_disc_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let d = disc.to_str().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[
            "--domain",
            d,
            "--cmd",
            "verify",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 8);
    assert!(v.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn zero_slack_fails_saturated_claims() {
    let dir = tempfile::tempdir().unwrap();
    let disc = config(dir.path(), "disc.cfg", "kind = disc\n");
    let o = run(&[
        "--domain",
        disc.to_str().unwrap(),
        "--cmd",
        "verify",
        "--slack",
        "0",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().skip(1).any(|l| l.contains(",false,")));
}

#[test]
fn empty_config_verifies_to_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let empty = config(dir.path(), "empty.cfg", "# no domain\n");
    let o = run(&[
        "--domain",
        empty.to_str().unwrap(),
        "--cmd",
        "verify",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[]");
}
