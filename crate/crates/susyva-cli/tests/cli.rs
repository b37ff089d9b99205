//! End-to-end runs of the `susyva` binary: outputs, exit codes and algebra lookup.

use std::path::PathBuf;
use std::process::{Command, Output};

fn susyva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susyva")).args(args).env_remove("SUSYVA_PATH").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const BOSON: &str = "[header]\nname = mybos\ncase = W\nN = 0\n[generators]\nb even 1\n\
                     [brackets]\n[b, b] = lambda\n";

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("susyva-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bracket_of_catalogued_generators() {
    let o = susyva(&["bracket", "B1", "Psi", "G"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(lambda + chi*S) Psi + m*lambda*chi");
}

#[test]
fn central_charge_of_the_boson_fermion_vector() {
    let o = susyva(&["central-charge", "B1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("-3*m^2 + 3/2"), "{}", stdout(&o));
}

#[test]
fn jacobi_exit_codes() {
    assert_eq!(susyva(&["jacobi", "K1", "--all"]).status.code(), Some(0));
    let o = susyva(&["jacobi", "spin7"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn errors_are_categorized() {
    let o = susyva(&["bracket", "nope", "a", "b"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[unknown-algebra]"), "{}", stderr(&o));
    let o = susyva(&["bracket", "B1", ":(Psi", "G"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unclosed"), "{}", stderr(&o));
}

#[test]
fn json_output_parses() {
    let o = susyva(&["--format", "json", "bracket", "B1", "Psi", "G"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bracket"], "(lambda + chi*S) Psi + m*lambda*chi");
    let o = susyva(&["--format", "json", "bracket", "nope", "a", "b"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"]["category"], "unknown-algebra");
}

#[test]
fn algebra_files_by_path_and_search_path() {
    let dir = scratch_dir("path");
    let file = dir.join("mybos.alg");
    std::fs::write(&file, BOSON).unwrap();
    let o = susyva(&["bracket", file.to_str().unwrap(), "b", "b"]);
    assert_eq!(stdout(&o).trim(), "lambda", "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_susyva"))
        .args(["bracket", "mybos", "b", "T b"])
        .env("SUSYVA_PATH", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("lambda^2"), "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mode_tables_and_expansions() {
    let o = susyva(&["modes", "K1", "--window", "-1..1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[L_-1, L_1] = -2*L_0"), "{text}");
    let o = susyva(&["modes", "K1", "--window", "-1..1", "--method", "ope"]);
    assert_eq!(stdout(&o), text);
    let o = susyva(&["expand", "K1", "G"]);
    assert!(stdout(&o).contains("2*L(z)"), "{}", stdout(&o));
}

#[test]
fn delta_check_and_list() {
    let o = susyva(&["delta-check", "--case", "W", "--N", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAIL"));
    let o = susyva(&["list"]);
    for name in ["B1", "K1", "spin7-c12", "free-fermion"] {
        assert!(stdout(&o).lines().any(|l| l.starts_with(name)), "{name}");
    }
}
