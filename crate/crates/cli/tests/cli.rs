use std::path::Path;
use std::process::{Command, Output};

use nlts::testkit::{simulate_series, trade_like_theta};
use nlts::ModelSpec;

fn nlts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlts")).args(args).output().unwrap()
}

fn write_series(path: &Path, seed: u64) {
    let y = simulate_series(&ModelSpec::new(1, 2, 1), &trade_like_theta(), 48, 5.0, seed);
    let text: String = y.values().iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(nlts(&[]).status.code(), Some(2));
    assert_eq!(nlts(&["fit"]).status.code(), Some(2));
    assert_eq!(nlts(&["fit", "--input", "/nonexistent/x.csv"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_series(&input, 1);
    let out = nlts(&["fit", "--input", input.to_str().unwrap(), "--h-frac", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h fraction"));
}

#[test]
fn batch_missing_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlts(&[
        "batch",
        "--input-dir",
        dir.path().join("missing").to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_batch_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    let out_dir = dir.path().join("out");
    let out = nlts(&["batch", "--input-dir", input.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let s = json(&out_dir.join("summary.json"));
    assert_eq!(s["series"], 0);
    assert_eq!(s["failures"], 0);
}

#[test]
fn batch_notes_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    write_series(&input.join("good.csv"), 2);
    std::fs::write(input.join("bad.csv"), "1\n2\nabc\n").unwrap();
    let out_dir = dir.path().join("out");
    let args = [
        "batch",
        "--input-dir",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--nsamp",
        "20",
        "--jobs",
        "2",
    ];
    let out = nlts(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&out_dir.join("summary.json"));
    assert_eq!(s["series"], 2);
    assert_eq!(s["succeeded"], 1);
    assert_eq!(s["failures"], 1);
    assert_eq!(s["failed"][0]["series_id"], "bad");
    let r = json(&out_dir.join("good.json"));
    assert_eq!(r["series_id"], "good");
    assert!(!out_dir.join("bad.json").exists());

    std::fs::remove_file(input.join("good.csv")).unwrap();
    assert_eq!(nlts(&args).status.code(), Some(3));
}

#[test]
fn fit_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_series(&input, 4);
    let run = |tag: &str| {
        let report = dir.path().join(format!("{tag}.json"));
        let wedge = dir.path().join(format!("{tag}.svg"));
        let profiles = dir.path().join(format!("{tag}_profiles.json"));
        let out = nlts(&[
            "fit",
            "--input",
            input.to_str().unwrap(),
            "--nsamp",
            "30",
            "--seed",
            "9",
            "--out",
            report.to_str().unwrap(),
            "--wedge",
            wedge.to_str().unwrap(),
            "--profiles",
            profiles.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        [report, wedge.clone(), wedge.with_extension("tsv"), profiles]
            .map(|p| std::fs::read(p).unwrap())
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let r: serde_json::Value = serde_json::from_slice(&a[0]).unwrap();
    assert_eq!(r["series_id"], "s");
    assert_eq!(r["seed"], 9);
    assert_eq!(r["model"]["A"], 1);
    assert!(String::from_utf8_lossy(&a[1]).starts_with("<svg"));

    let stdout = nlts(&["fit", "--input", input.to_str().unwrap(), "--nsamp", "30", "--seed", "9"]);
    assert_eq!(stdout.stdout, a[0]);
}
