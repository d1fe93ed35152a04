//! End-to-end checks of the command-line binary: worked-example golden
//! reports, determinism, usage errors, and a real two-process TCP run.

use std::net::TcpListener;
use std::process::Command;

fn sfe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfe"))
}

fn run_ok(args: &[&str]) -> String {
    let out = sfe().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 report")
}

#[test]
fn hamming_worked_example_matches_golden_report() {
    let got = run_ok(&[
        "--protocol",
        "hamming",
        "--seed",
        "1",
        "--param",
        "n=2",
        "--param",
        "x=01",
        "--param",
        "y=11",
    ]);
    let golden = include_str!("golden/hamming_worked.json");
    assert_eq!(
        got.trim_end(),
        golden.trim_end(),
        "report drifted from golden"
    );
    let parsed: serde_json::Value = serde_json::from_str(&got).unwrap();
    assert_eq!(parsed["outputs"]["distance"], 1);
}

#[test]
fn equality_worked_example_matches_golden_report() {
    let got = run_ok(&[
        "--protocol",
        "equality",
        "--seed",
        "1",
        "--param",
        "bits=4",
        "--param",
        "x=1101",
        "--param",
        "y=1010",
    ]);
    let golden = include_str!("golden/equality_worked.json");
    assert_eq!(got.trim_end(), golden.trim_end());
    let parsed: serde_json::Value = serde_json::from_str(&got).unwrap();
    assert_eq!(parsed["outputs"]["equal"], false);
}

#[test]
fn identical_configs_reproduce_identical_reports() {
    let args = [
        "--protocol",
        "millionaires",
        "--seed",
        "42",
        "--param",
        "n=16",
        "--param",
        "eps_exp=20",
    ];
    assert_eq!(run_ok(&args), run_ok(&args));
}

#[test]
fn unknown_protocol_and_bad_params_exit_nonzero() {
    let out = sfe().args(["--protocol", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown protocol"));

    let out = sfe()
        .args(["--protocol", "hamming", "--param", "n"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = sfe()
        .args(["--protocol", "hamming", "--ot", "imaginary"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_vars_mirror_flags() {
    let out = sfe()
        .env("SFE_PROTOCOL", "hamming")
        .env("SFE_SEED", "1")
        .args(["--param", "n=2", "--param", "x=01", "--param", "y=11"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).expect("report parses");
    assert_eq!(parsed["outputs"]["distance"], 1);
}

#[test]
fn two_process_tcp_run_with_group_backend() {
    // reserve a free port, then hand it to the listener process
    let port = {
        let probe = TcpListener::bind("127.0.0.1:0").unwrap();
        probe.local_addr().unwrap().port()
    };
    let addr = format!("127.0.0.1:{port}");
    let bob = sfe()
        .args([
            "--protocol",
            "hamming",
            "--seed",
            "5",
            "--ot",
            "group",
            "--param",
            "n=2",
            "--param",
            "y=11",
            "--listen",
            &addr,
        ])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn()
        .expect("listener starts");
    // give the listener a moment to bind
    std::thread::sleep(std::time::Duration::from_millis(400));
    let alice = sfe()
        .args([
            "--protocol",
            "hamming",
            "--seed",
            "5",
            "--ot",
            "group",
            "--param",
            "n=2",
            "--param",
            "x=01",
            "--connect",
            &addr,
        ])
        .output()
        .expect("connector runs");
    let bob_out = bob.wait_with_output().expect("listener finishes");
    assert!(
        alice.status.success(),
        "{}",
        String::from_utf8_lossy(&alice.stderr)
    );
    assert!(bob_out.status.success());
    let a: serde_json::Value = serde_json::from_slice(&alice.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&bob_out.stdout).unwrap();
    assert_eq!(a["outputs"]["distance"], 1);
    assert_eq!(b["outputs"]["distance"], 1);
}

#[test]
fn ideal_backend_refuses_two_process_mode() {
    let port = {
        let probe = TcpListener::bind("127.0.0.1:0").unwrap();
        probe.local_addr().unwrap().port()
    };
    let addr = format!("127.0.0.1:{port}");
    let bob = sfe()
        .args(["--protocol", "hamming", "--listen", &addr])
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    std::thread::sleep(std::time::Duration::from_millis(400));
    // connect with anything so the listener proceeds to its backend check
    let _ = std::net::TcpStream::connect(&addr);
    let out = bob.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("channel-only backend"));
}
