//! Drives the full command-line workflow in a scratch directory:
//! generate → ambient → train-dod → score → train-rom → eval →
//! baseline → compare. Each step is the same code path as the
//! `dodrom` binary.
//!
//! ```bash
//! cargo run --release -p dod-rom --example cli_pipeline
//! ```

use dod_rom::cli::run;

fn sh(args: &[&str]) {
    println!("$ dodrom {}", args.join(" "));
    let code = run(std::iter::once("dodrom").chain(args.iter().copied()));
    assert_eq!(code, 0, "command failed with exit code {code}");
    println!();
}

fn main() {
    let dir = std::env::temp_dir().join(format!("dodrom-pipeline-{}", std::process::id()));
    let dir = dir.to_str().unwrap().to_string();
    std::fs::create_dir_all(&dir).unwrap();
    let p = |name: &str| format!("{dir}/{name}");

    sh(&[
        "generate",
        "--problem", "modal-1d",
        "--train", "120",
        "--test", "40",
        "--seed", "7",
        "--out", &dir,
    ]);
    sh(&[
        "ambient",
        "--data", &p("train.snap"),
        "--na", "7",
        "--out", &p("ambient.model"),
    ]);
    sh(&[
        "train-dod",
        "--data", &p("train.snap"),
        "--ambient", &p("ambient.model"),
        "--arch", "compact",
        "--n", "2",
        "--epochs", "1500",
        "--lr", "1e-2",
        "--seed", "42",
        "--out", &p("dod.model"),
    ]);
    sh(&[
        "score",
        "--model", &p("dod.model"),
        "--pairs", "2000",
        "--seed", "3",
    ]);
    sh(&[
        "train-rom",
        "--dod", &p("dod.model"),
        "--data", &p("train.snap"),
        "--m", "5",
        "--epochs", "1500",
        "--out", &p("rom.model"),
    ]);
    sh(&[
        "eval",
        "--model", &p("rom.model"),
        "--data", &p("test.snap"),
        "--report", &p("eval_rom.csv"),
    ]);
    sh(&[
        "baseline",
        "--method", "cpod",
        "--data", &p("train.snap"),
        "--n", "2",
        "--clusters", "4",
        "--test", &p("test.snap"),
        "--report", &p("baseline_cpod.csv"),
    ]);
    sh(&[
        "compare",
        "--dir", &dir,
        "--out", &p("summary.csv"),
    ]);

    println!("summary table:");
    print!("{}", std::fs::read_to_string(p("summary.csv")).unwrap());
    println!("\nscratch outputs live in {dir}");
}
