//! Acceptance criterion 10: rerunning any command with the same seed and
//! configuration produces byte-identical outputs.

use std::fs;
use std::process::Command;

fn flatwalk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flatwalk"))
}

fn run_to_file(args: &[&str], out: &std::path::Path) -> Vec<u8> {
    let status = flatwalk()
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    assert!(status.success(), "command failed: {args:?}");
    fs::read(out).expect("output written")
}

fn run_stdout(args: &[&str]) -> Vec<u8> {
    let out = flatwalk().args(args).output().expect("binary runs");
    assert!(out.status.success(), "command failed: {args:?}");
    out.stdout
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut all_identical = true;
    let mut details = Vec::new();

    // The stated example: scaled simulation on the auto-sized plane.
    let f1 = dir.path().join("sim1.csv");
    let f2 = dir.path().join("sim2.csv");
    let args = [
        "simulate",
        "--generate",
        "plane:auto",
        "--eta",
        "0.1",
        "--t",
        "1",
        "--paths",
        "1000",
        "--seed",
        "7",
    ];
    let a = run_to_file(&args, &f1);
    let b = run_to_file(&args, &f2);
    all_identical &= a == b;
    details.push(format!("simulate csv bytes {} identical {}", a.len(), a == b));

    // Every other command, by stdout bytes.
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "--generate", "fan:3", "--seed", "7"],
        vec!["cat0", "--generate", "plane:2", "--seed", "7"],
        vec![
            "fdd",
            "--generate",
            "plane:6",
            "--eta",
            "0.4",
            "--times",
            "0.5,1",
            "--paths",
            "200",
            "--seed",
            "7",
        ],
        vec![
            "sweep",
            "--generate",
            "plane:8",
            "--etas",
            "0.5,0.4",
            "--t",
            "1",
            "--paths",
            "500",
            "--seed",
            "7",
        ],
        vec![
            "tightness",
            "--generate",
            "plane:4",
            "--eta",
            "0.4",
            "--window",
            "0.1",
            "--mesh",
            "0.02",
            "--epsilon",
            "0.5",
            "--paths",
            "200",
            "--seed",
            "7",
        ],
        vec![
            "resolvent",
            "--generate",
            "fan:3",
            "--lambda",
            "1",
            "--terms",
            "6",
            "--samples",
            "2000",
            "--seed",
            "7",
        ],
        vec!["dual", "--generate", "fan:3", "--seed", "7"],
        vec![
            "walk",
            "--generate",
            "line:50",
            "--horizon",
            "500",
            "--walks",
            "500",
            "--seed",
            "7",
        ],
        vec![
            "resistance",
            "--generate",
            "tree:3:6",
            "--radius",
            "5",
            "--seed",
            "7",
        ],
        vec!["classify", "--generate", "book:3:3", "--seed", "7"],
    ];
    for args in &commands {
        let a = run_stdout(args);
        let b = run_stdout(args);
        let same = a == b;
        all_identical &= same;
        details.push(format!("{} identical {}", args[0], same));
    }

    println!(
        "criterion 10 [determinism]: {} ({})",
        if all_identical { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(all_identical, "{details:?}");
}
