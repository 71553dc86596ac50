//! End-to-end checks of the `dodrom` binary: the full pipeline on a
//! small run, plus the exit-code contract (0 success, 2 IO/format,
//! 3 dimension, 4 training failure).

use std::path::{Path, PathBuf};
use std::process::Command;

fn dodrom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dodrom"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = dodrom().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn full_pipeline_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let (code, out, err) = run(&[
        "generate",
        "--problem",
        "modal-1d",
        "--train",
        "60",
        "--test",
        "20",
        "--seed",
        "5",
        "--out",
        &p(dir, "run"),
    ]);
    assert_eq!(code, 0, "generate failed: {err}");
    assert!(out.contains("60 train"));
    let run_dir = dir.join("run");
    assert!(run_dir.join("train.snap").exists());
    assert!(run_dir.join("test.snap").exists());
    assert!(run_dir.join("problem.json").exists());

    // Determinism: regenerating with the same seed gives identical bytes.
    let first = std::fs::read(run_dir.join("train.snap")).unwrap();
    let (code, _, _) = run(&[
        "generate",
        "--problem",
        "modal-1d",
        "--train",
        "60",
        "--test",
        "20",
        "--seed",
        "5",
        "--out",
        &p(dir, "run"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(first, std::fs::read(run_dir.join("train.snap")).unwrap());

    let (code, out, err) = run(&[
        "ambient",
        "--data",
        &p(&run_dir, "train.snap"),
        "--na",
        "6",
        "--out",
        &p(&run_dir, "ambient.model"),
    ]);
    assert_eq!(code, 0, "ambient failed: {err}");
    assert!(out.contains("retained energy"));

    let (code, _, err) = run(&[
        "train-dod",
        "--data",
        &p(&run_dir, "train.snap"),
        "--ambient",
        &p(&run_dir, "ambient.model"),
        "--arch",
        "compact",
        "--n",
        "2",
        "--epochs",
        "300",
        "--seed",
        "42",
        "--out",
        &p(&run_dir, "dod.model"),
    ]);
    assert_eq!(code, 0, "train-dod failed: {err}");
    // Loss-history CSV lands next to the model by default.
    let loss_csv = run_dir.join("dod.model.loss.csv");
    assert!(loss_csv.exists());
    let text = std::fs::read_to_string(&loss_csv).unwrap();
    assert!(text.starts_with("epoch,train_loss,val_loss\n"));
    assert_eq!(text.lines().count(), 301);

    let (code, out, err) = run(&[
        "score",
        "--model",
        &p(&run_dir, "dod.model"),
        "--pairs",
        "500",
        "--seed",
        "1",
        "--delta",
        "0.25",
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0, "score failed: {err}");
    assert!(out.contains("adaptivity score"));
    assert!(out.contains("10000"), "sample-size bound missing: {out}");

    let (code, _, err) = run(&[
        "train-rom",
        "--dod",
        &p(&run_dir, "dod.model"),
        "--data",
        &p(&run_dir, "train.snap"),
        "--m",
        "5",
        "--epochs",
        "300",
        "--out",
        &p(&run_dir, "rom.model"),
    ]);
    assert_eq!(code, 0, "train-rom failed: {err}");

    let (code, out, err) = run(&[
        "eval",
        "--model",
        &p(&run_dir, "rom.model"),
        "--data",
        &p(&run_dir, "test.snap"),
        "--report",
        &p(&run_dir, "eval_rom.csv"),
    ]);
    assert_eq!(code, 0, "eval failed: {err}");
    assert!(out.contains("identity_residual"));
    let report = std::fs::read_to_string(run_dir.join("eval_rom.csv")).unwrap();
    assert!(report.starts_with(
        "model_type,n,mrpe,mre,ambient_sq,dod_sq,coeff_sq,total_sq,identity_residual\n"
    ));

    for (method, extra) in [
        ("pod", vec![]),
        ("cpod", vec!["--clusters", "2"]),
        ("ae", vec!["--na", "6", "--epochs", "200"]),
    ] {
        let report = format!("baseline_{method}.csv");
        let train_path = p(&run_dir, "train.snap");
        let test_path = p(&run_dir, "test.snap");
        let report_path = p(&run_dir, &report);
        let mut args = vec![
            "baseline",
            "--method",
            method,
            "--data",
            &train_path,
            "--n",
            "2",
            "--test",
            &test_path,
            "--report",
            &report_path,
        ];
        args.extend(extra);
        let (code, _, err) = run(&args);
        assert_eq!(code, 0, "baseline {method} failed: {err}");
        assert!(run_dir.join(&report).exists());
    }

    let (code, _, err) = run(&[
        "compare",
        "--dir",
        &p(dir, "run"),
        "--out",
        &p(&run_dir, "summary.csv"),
    ]);
    assert_eq!(code, 0, "compare failed: {err}");
    let summary = std::fs::read_to_string(run_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("method,n,clusters,mrpe,mre\n"));
    // One eval row and three baseline rows.
    assert_eq!(summary.lines().count(), 5, "summary:\n{summary}");

    // Reruns with identical seeds reproduce the reports bitwise.
    let before = std::fs::read(run_dir.join("eval_rom.csv")).unwrap();
    let (code, _, _) = run(&[
        "eval",
        "--model",
        &p(&run_dir, "rom.model"),
        "--data",
        &p(&run_dir, "test.snap"),
        "--report",
        &p(&run_dir, "eval_rom.csv"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(before, std::fs::read(run_dir.join("eval_rom.csv")).unwrap());
}

#[test]
fn exit_code_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // Unknown problem preset: config error, code 2.
    let (code, _, err) = run(&[
        "generate",
        "--problem",
        "no-such-problem",
        "--train",
        "5",
        "--test",
        "2",
        "--out",
        &p(dir, "x"),
    ]);
    assert_eq!(code, 2, "unknown preset: {err}");

    // Missing file: IO error, code 2.
    let (code, _, _) = run(&[
        "ambient",
        "--data",
        &p(dir, "missing.snap"),
        "--na",
        "3",
        "--out",
        &p(dir, "out.model"),
    ]);
    assert_eq!(code, 2);

    // Prepare a real run directory for the corruption cases.
    let (code, _, _) = run(&[
        "generate",
        "--problem",
        "travel-1d",
        "--train",
        "12",
        "--test",
        "4",
        "--seed",
        "3",
        "--out",
        &p(dir, "run"),
    ]);
    assert_eq!(code, 0);
    let run_dir = dir.join("run");

    // Corrupted snapshot payload: format error, code 2.
    let snap = run_dir.join("train.snap");
    let mut bytes = std::fs::read(&snap).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    let corrupted = run_dir.join("corrupted.snap");
    std::fs::write(&corrupted, &bytes).unwrap();
    let (code, _, err) = run(&[
        "ambient",
        "--data",
        corrupted.to_str().unwrap(),
        "--na",
        "3",
        "--out",
        &p(&run_dir, "out.model"),
    ]);
    assert_eq!(code, 2, "corrupted snapshot: {err}");
    assert!(err.contains("CRC"));

    // Problem definition with the wrong grid: dimension error, code 3.
    let other = dod_rom::problems::SyntheticProblem::travel_time_2d();
    let other_path = run_dir.join("other_problem.json");
    std::fs::write(&other_path, serde_json::to_string(&other).unwrap()).unwrap();
    let (code, _, err) = run(&[
        "ambient",
        "--data",
        snap.to_str().unwrap(),
        "--problem",
        other_path.to_str().unwrap(),
        "--na",
        "3",
        "--out",
        &p(&run_dir, "out.model"),
    ]);
    assert_eq!(code, 3, "grid mismatch: {err}");

    // Unknown architecture preset: code 2.
    let (code, _, _) = run(&[
        "ambient",
        "--data",
        snap.to_str().unwrap(),
        "--na",
        "3",
        "--out",
        &p(&run_dir, "ambient.model"),
    ]);
    assert_eq!(code, 0);
    let (code, _, err) = run(&[
        "train-dod",
        "--data",
        snap.to_str().unwrap(),
        "--ambient",
        &p(&run_dir, "ambient.model"),
        "--arch",
        "no-such-arch",
        "--n",
        "2",
        "--epochs",
        "5",
        "--out",
        &p(&run_dir, "dod.model"),
    ]);
    assert_eq!(code, 2, "unknown arch preset: {err}");

    // Unknown baseline method: code 2.
    let (code, _, _) = run(&[
        "baseline",
        "--method",
        "magic",
        "--data",
        snap.to_str().unwrap(),
        "--n",
        "2",
        "--report",
        &p(&run_dir, "r.csv"),
    ]);
    assert_eq!(code, 2);

    // Requesting more ambient modes than the numerical rank: the
    // truncation would cross the null space, a data-rank error, code 3.
    // A point μ-box pins every sample to one slice, so the data are
    // exactly rank 2.
    let slice_problem = dod_rom::problems::SyntheticProblem::new(
        dod_rom::problems::ProblemKind::ModalSuperposition,
        dod_rom::problems::GridSpec::OneD {
            points: 64,
            extent: (0.0, 1.0),
        },
        vec![(0.4, 0.4)],
        vec![(0.25, 2.0), (0.25, 2.0)],
    )
    .unwrap();
    let slice_path = run_dir.join("slice_problem.json");
    std::fs::write(&slice_path, serde_json::to_string(&slice_problem).unwrap()).unwrap();
    let (code, _, _) = run(&[
        "generate",
        "--problem",
        slice_path.to_str().unwrap(),
        "--train",
        "12",
        "--test",
        "4",
        "--seed",
        "9",
        "--out",
        &p(dir, "slice"),
    ]);
    assert_eq!(code, 0);
    let (code, _, err) = run(&[
        "ambient",
        "--data",
        &p(&dir.join("slice"), "train.snap"),
        "--na",
        "3",
        "--out",
        &p(&run_dir, "too_big.model"),
    ]);
    assert_eq!(code, 3, "rank overflow: {err}");
}
