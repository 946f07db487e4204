use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn twotier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twotier")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_lemmas_passes_on_fixtures() {
    for name in ["kk_example.toml", "mv1.toml", "gabidulin_gf8.toml", "mv2_compressed.toml"] {
        let out = twotier(&["verify-lemmas", "--config", path_str(&fixture(name))]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["command"], "verify-lemmas");
        assert_eq!(v["result"]["all_pass"], true);
    }
    let out = twotier(&["verify-lemmas", "--config", path_str(&fixture("kk_example.toml"))]);
    assert_eq!(json(&out)["result"]["union_size"], 25);
}

#[test]
fn dependent_alphas_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("kk_example.toml")).unwrap();
    let bad = text.replace("\"g^4\"", "\"g^3\"");
    assert_ne!(bad, text);
    let path = dir.path().join("bad.toml");
    fs::write(&path, bad).unwrap();
    let out = twotier(&["verify-lemmas", "--config", path_str(&path)]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_and_missing_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.toml");
    fs::write(&path, "[field]\np = 2\nn = 3\nbogus = 1\n").unwrap();
    assert_eq!(code(&twotier(&["verify-lemmas", "--config", path_str(&path)])), 2);
    let missing = dir.path().join("none.toml");
    assert_eq!(code(&twotier(&["verify-lemmas", "--config", path_str(&missing)])), 2);
    assert_eq!(code(&twotier(&["no-such-command"])), 2);
}

#[test]
fn tiny_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = fs::read_to_string(fixture("kk_gf9.toml")).unwrap();
    text.push_str("\n[budget]\ncodebook = 1000000\nunion = 10\n");
    let path = dir.path().join("budget.toml");
    fs::write(&path, text).unwrap();
    let out = twotier(&["analyze-distances", "--config", path_str(&path)]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn encode_then_decode_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (name, message, index) in [("kk_example.toml", "g", 2), ("mv1.toml", "1", 1), ("gabidulin_gf8.toml", "g^2", 4)] {
        let config = fixture(name);
        let packets = dir.path().join(format!("{name}.txt"));
        let out = twotier(&[
            "encode",
            "--config",
            path_str(&config),
            "--message",
            message,
            "--format",
            "packets",
            "--out",
            path_str(&packets),
        ]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let out = twotier(&["decode", "--config", path_str(&config), "--packets", path_str(&packets)]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["result"]["chosen"], index, "{name}");
        assert_eq!(v["result"]["tie"], false, "{name}");
    }
}

#[test]
fn empty_packet_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let packets = dir.path().join("empty.txt");
    fs::write(&packets, "").unwrap();
    let out = twotier(&["decode", "--config", path_str(&fixture("mv1.toml")), "--packets", path_str(&packets)]);
    assert_eq!(code(&out), 2);
    fs::write(&packets, "1010\n").unwrap();
    let out = twotier(&["decode", "--config", path_str(&fixture("mv1.toml")), "--packets", path_str(&packets)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_matches_reference() {
    let config = fixture("mv1.toml");
    let args = ["simulate", "--config", path_str(&config), "--seed", "2024", "--trials", "200"];
    let first = twotier(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = twotier(&args);
    assert_eq!(first.stdout, second.stdout);
    let reference = fs::read(fixture("mv1_simulate_reference.json")).unwrap();
    assert_eq!(json(&first), serde_json::from_slice::<Value>(&reference).unwrap());
    let other = twotier(&["simulate", "--config", path_str(&config), "--seed", "2025", "--trials", "200"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn csv_outputs_have_headers() {
    let out = twotier(&["analyze-distances", "--config", path_str(&fixture("mv1.toml")), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 2);
    let out = twotier(&["simulate", "--config", path_str(&fixture("mv1.toml")), "--trials", "10", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() >= 2);
}
