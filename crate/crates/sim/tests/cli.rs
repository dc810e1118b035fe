use std::process::{Command, Output};

fn leakbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakbf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn run_writes_csv_with_config_header() {
    let o = leakbf(&["run", "--scheme", "zf,zf-pa", "--snr-db", "0,10", "--trials", "3", "--seed", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "#! seed = 5"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("scheme,"));
    assert_eq!(data.len(), 1 + 4);
}

#[test]
fn output_file_replays_to_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let o = leakbf(&[
        "run", "--scheme", "malc,ralc-pa", "--snr-db", "10", "--trials", "2", "--format", "json", "--set",
        "l_algo1=2", "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = leakbf(&["run", "--config", first.to_str().unwrap(), "--format", "json", "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&first).unwrap(), std::fs::read_to_string(&second).unwrap());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "# small run\nschemes = slnr\nsnr_db = 5\ntrials = 2\nseed = 9\n").unwrap();
    let o = leakbf(&["run", "--config", cfg.to_str().unwrap(), "--snr-db", "15"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("slnr,") && l.contains(",15,")));
}

#[test]
fn usage_errors_exit_with_code_2() {
    for args in [
        &["run", "--scheme", "zf", "--snr-db", "0:0:10"][..],
        &["run", "--scheme", "zz"],
        &["run", "--scheme", "zf", "--set", "detla=0.5"],
        &["run", "--scheme", "zf", "--set", "n"],
        &["cdf", "--recipe", "fig4"],
    ] {
        let o = leakbf(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stderr.starts_with(b"error: "), "{args:?}");
    }
}

#[test]
fn unknown_key_suggests_the_closest_one() {
    let o = leakbf(&["run", "--scheme", "zf", "--set", "detla=0.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
}

#[test]
fn cdf_emits_both_quantities() {
    let o = leakbf(&["cdf", "--trials", "500", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("P_D,")));
    assert!(text.lines().any(|l| l.starts_with("P_V,")));
}

#[test]
fn verify_passes() {
    let o = leakbf(&["verify", "--trials", "5"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
