//! End-to-end checks of the command-line interface and its exit codes.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_knotlock"))
}

fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("knotlock-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, content).unwrap();
    path
}

fn alice_config() -> std::path::PathBuf {
    write_temp(
        "alice.cfg",
        "%KNOTWIRE 1\nTYPE CONFIG\nPRIMES 2 3\nTWISTS 3 1\nALPHA 2\nSEED 7\nMOVES 10\nEND\n",
    )
}

fn bob_config() -> std::path::PathBuf {
    write_temp(
        "bob.cfg",
        "%KNOTWIRE 1\nTYPE CONFIG\nPRIMES 5 7\nTWISTS 2 2\nALPHA 2\nSEED 8\nMOVES 10\nEND\n",
    )
}

#[test]
fn encode_prints_reference_values() {
    let out = bin()
        .args([
            "encode", "--primes", "2,3", "--twists", "3,1", "--alpha", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), "N=2304 M=4 beta=1.622389603610978");
}

#[test]
fn encode_emit_produces_a_share_document() {
    let out = bin()
        .args([
            "encode", "--primes", "2,3", "--twists", "3,1", "--alpha", "2", "--emit",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("%KNOTWIRE 1\nTYPE SHARE\n"));
    assert!(stdout.contains("BETA 1.622389603610978 P=16\n"));
    assert!(stdout.ends_with("END\n"));
}

#[test]
fn decode_prints_entries() {
    let out = bin()
        .args(["decode", "--n", "2304", "--alpha", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "(2,3) (3,1)");
}

#[test]
fn decode_rejects_non_power_multiplicity() {
    let out = bin()
        .args(["decode", "--n", "24", "--alpha", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let out = bin().args(["encode", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["challenge", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn challenge_respond_verify_pipeline() {
    let alice = alice_config();
    let bob = bob_config();

    let challenge = bin()
        .args([
            "challenge",
            "--config",
            alice.to_str().unwrap(),
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert!(challenge.status.success());
    let challenge_doc = String::from_utf8(challenge.stdout).unwrap();
    assert!(challenge_doc.starts_with("%KNOTWIRE 1\nTYPE CHALLENGE\n"));
    let challenge_path = write_temp("challenge.doc", &challenge_doc);

    let response = bin()
        .args([
            "respond",
            "--in",
            challenge_path.to_str().unwrap(),
            "--config",
            bob.to_str().unwrap(),
            "--seed",
            "2",
        ])
        .output()
        .unwrap();
    assert!(response.status.success());
    let response_doc = String::from_utf8(response.stdout).unwrap();
    assert!(response_doc.contains("TYPE RESPONSE"));
    assert!(response_doc.contains("GAMMA "));
    let response_path = write_temp("response.doc", &response_doc);

    let verify = bin()
        .args([
            "verify",
            "--in",
            response_path.to_str().unwrap(),
            "--state",
            alice.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(0));
    assert!(String::from_utf8(verify.stdout)
        .unwrap()
        .contains("VERDICT OK"));

    // tamper one digit of GAMMA: verification must reject with exit 1
    let tampered = response_doc.replace("GAMMA 1", "GAMMA 2");
    assert_ne!(tampered, response_doc, "test needs a GAMMA starting with 1");
    let tampered_path = write_temp("tampered.doc", &tampered);
    let verify = bin()
        .args([
            "verify",
            "--in",
            tampered_path.to_str().unwrap(),
            "--state",
            alice.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(1));
}

#[test]
fn respond_reads_stdin_with_dash() {
    let alice = alice_config();
    let bob = bob_config();
    let challenge = bin()
        .args([
            "challenge",
            "--config",
            alice.to_str().unwrap(),
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    let mut child = bin()
        .args(["respond", "--in", "-", "--config", bob.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(&challenge.stdout)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("TYPE RESPONSE"));
}

#[test]
fn equiv_preserves_total_framing() {
    let alice = alice_config();
    let challenge = bin()
        .args([
            "challenge",
            "--config",
            alice.to_str().unwrap(),
            "--seed",
            "4",
        ])
        .output()
        .unwrap();
    let challenge_path = write_temp(
        "equiv-in.doc",
        &String::from_utf8(challenge.stdout).unwrap(),
    );
    let out = bin()
        .args([
            "equiv",
            "--in",
            challenge_path.to_str().unwrap(),
            "--moves",
            "25",
            "--seed",
            "99",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = String::from_utf8(out.stdout).unwrap();
    // the framing redistributes but the total must stay 4
    let frame_line = doc.lines().find(|l| l.starts_with("FRAME ")).unwrap();
    let total: u64 = frame_line[6..]
        .split(' ')
        .filter(|t| *t != ".")
        .map(|t| t.parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 4);
}

struct KillOnDrop(Child);
impl Drop for KillOnDrop {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_and_connect_run_a_session() {
    let alice = alice_config();
    let bob = bob_config();
    let mut server = KillOnDrop(
        bin()
            .args([
                "serve",
                "--listen",
                "127.0.0.1:0",
                "--config",
                alice.to_str().unwrap(),
                "--seed",
                "42",
                "--sessions",
                "1",
            ])
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap(),
    );
    // the server reports its bound address on stderr
    let mut err_reader = BufReader::new(server.0.stderr.take().unwrap());
    let mut line = String::new();
    err_reader.read_line(&mut line).unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .unwrap()
        .to_string();

    let client = bin()
        .args([
            "connect",
            "--to",
            &addr,
            "--config",
            bob.to_str().unwrap(),
            "--seed",
            "42",
        ])
        .output()
        .unwrap();
    assert_eq!(client.status.code(), Some(0), "client must be accepted");
    let client_out = String::from_utf8(client.stdout).unwrap();
    assert!(client_out.contains("VERDICT OK"));
    assert!(client_out.contains("# outcome: OK"));

    let mut server_stdout = server.0.stdout.take().unwrap();
    let status = server.0.wait().unwrap();
    assert!(status.success());
    let mut server_text = String::new();
    std::io::Read::read_to_string(&mut server_stdout, &mut server_text).unwrap();
    assert!(server_text.contains("VERDICT OK"));
}
