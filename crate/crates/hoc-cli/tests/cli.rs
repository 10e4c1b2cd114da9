//! End-to-end tests against the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hoc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hoc"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    hoc()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn generate_exhaustive_and7_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "generate",
            "--rows",
            "64",
            "--background",
            "6",
            "--plant",
            "0-5:Q6->6",
            "--exhaustive",
            "-o",
            "and7.csv",
        ],
        dir.path(),
    );
    assert_success(&out);
    let csv = read(dir.path().join("and7.csv"));
    assert_eq!(csv.lines().count(), 65);
    assert!(dir.path().join("and7.csv.manifest.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("and7.csv.manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["args"]["plants"][0]["quorum"], 6);
    assert!(manifest["dataset"]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn generate_requires_a_plant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "--rows", "10", "--background", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = run(
            &[
                "generate", "--rows", "40", "--background", "5", "--plant", "0,1:Q2->5@0.1",
                "--seed", "7", "-o", name,
            ],
            dir.path(),
        );
        assert_success(&out);
    }
    assert_eq!(read(dir.path().join("a.csv")), read(dir.path().join("b.csv")));
}

#[test]
fn scramble_exact_weighted_and_cap_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("three.csv"),
        "a,b,c\n0,0,0\n0.5,0.5,0.5\n1,1,1\n",
    )
    .unwrap();
    let out = run(
        &["scramble", "-i", "three.csv", "--exact", "-o", "sds.csv"],
        dir.path(),
    );
    assert_success(&out);
    let sds = read(dir.path().join("sds.csv"));
    assert_eq!(sds.lines().count(), 28); // header + 27 combinations
    assert!(sds.lines().next().unwrap().ends_with("weight"));

    let capped = run(
        &[
            "scramble", "-i", "three.csv", "--exact", "--cap", "10", "-o", "x.csv",
        ],
        dir.path(),
    );
    assert_eq!(capped.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&capped.stderr);
    assert!(msg.contains("Monte-Carlo"), "stderr: {msg}");
}

#[test]
fn scramble_mc_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "a,b\n1,0\n0,1\n1,1\n").unwrap();
    for name in ["m1.csv", "m2.csv"] {
        let out = run(
            &[
                "scramble", "-i", "d.csv", "--mc", "--size", "1000", "--seed", "7", "-o", name,
            ],
            dir.path(),
        );
        assert_success(&out);
    }
    assert_eq!(read(dir.path().join("m1.csv")), read(dir.path().join("m2.csv")));
}

fn write_and7(dir: &Path) {
    let out = run(
        &[
            "generate", "--background", "6", "--plant", "0-5:Q6->6", "--exhaustive", "-o",
            "and7.csv",
        ],
        dir,
    );
    assert_success(&out);
}

#[test]
fn eval_reports_exact_oracle_and_undef() {
    let dir = tempfile::tempdir().unwrap();
    write_and7(dir.path());
    std::fs::write(
        dir.path().join("net.json"),
        r#"{
  "inputs": ["v0","v1","v2","v3","v4","v5","v6"],
  "layers": [[
    {"inputs": ["v0","v1","v2","v3","v4","v5","v6"], "quorum": 7},
    {"inputs": ["v0"], "quorum": 1},
    {"inputs": ["v0","v1"], "quorum": 2}
  ]]
}"#,
    )
    .unwrap();
    let out = run(
        &["eval", "-i", "and7.csv", "--network", "net.json", "--exact"],
        dir.path(),
    );
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "layer\tnode\tinputs\tquorum\tqr\tqs\thoc"
    );
    let rule_row = lines.next().unwrap();
    assert!(rule_row.ends_with("0.984375"), "row: {rule_row}");
    // the single-column rule is its own null: qr == qs -> undef
    assert!(text.lines().any(|l| l.ends_with("undef")));
}

#[test]
fn eval_top_limits_rows_per_layer_sorted() {
    let dir = tempfile::tempdir().unwrap();
    write_and7(dir.path());
    // 7 single-input rules in one layer; --top 5 keeps five
    let nodes: Vec<String> = (0..7)
        .map(|i| format!(r#"{{"inputs": ["v{i}"], "quorum": 1}}"#))
        .collect();
    std::fs::write(
        dir.path().join("net.json"),
        format!(
            r#"{{"inputs": ["v0","v1","v2","v3","v4","v5","v6"], "layers": [[{}]]}}"#,
            nodes.join(",")
        ),
    )
    .unwrap();
    let out = run(
        &[
            "eval", "-i", "and7.csv", "--network", "net.json", "--exact", "--top", "5",
        ],
        dir.path(),
    );
    assert_success(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 6); // header + 5 rows
}

#[test]
fn eval_json_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write_and7(dir.path());
    std::fs::write(
        dir.path().join("net.json"),
        r#"{"inputs": ["v0","v1","v2","v3","v4","v5","v6"],
            "layers": [[{"inputs": ["v0","v6"], "quorum": 2}]]}"#,
    )
    .unwrap();
    let out = run(
        &[
            "eval", "-i", "and7.csv", "--network", "net.json", "--exact", "--format", "json",
            "-o", "report.json",
        ],
        dir.path(),
    );
    assert_success(&out);
    let report: serde_json::Value = serde_json::from_str(&read(dir.path().join("report.json"))).unwrap();
    assert_eq!(report[0]["layer"], 1);
    assert_eq!(report[0]["quorum"], 2);
    assert!(report[0]["qr"].is_number());
}

#[test]
fn search_writes_all_artifacts_and_both_algos_run() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        &[
            "generate", "--rows", "60", "--background", "7", "--plant", "0-2:Q3->7", "--seed",
            "3", "-o", "d.csv",
        ],
        dir.path(),
    );
    assert_success(&gen);
    for (algo, out_dir) in [("poet", "run_poet"), ("ga", "run_ga")] {
        let out = run(
            &[
                "search", "-i", "d.csv", "--algo", algo, "--generations", "10", "--population",
                "8", "--layers", "3", "--sds-size", "300", "--report-size", "500", "--seed", "5",
                "--out-dir", out_dir,
            ],
            dir.path(),
        );
        assert_success(&out);
        for artifact in [
            "best_network.json",
            "rule_report.tsv",
            "rule_report.json",
            "history.csv",
            "checkpoint.json",
            "manifest.json",
        ] {
            assert!(
                dir.path().join(out_dir).join(artifact).exists(),
                "{out_dir}/{artifact} missing"
            );
        }
        let history = read(dir.path().join(out_dir).join("history.csv"));
        assert_eq!(history.lines().count(), 11);
        assert_eq!(history.lines().next().unwrap(), "generation,best_fitness,mean_fitness");
    }
}

#[test]
fn search_resume_reproduces_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        &[
            "generate", "--rows", "40", "--background", "6", "--plant", "0,1:Q2->6", "--seed",
            "2", "-o", "d.csv",
        ],
        dir.path(),
    );
    assert_success(&gen);
    let base = &[
        "search", "-i", "d.csv", "--generations", "14", "--population", "6", "--layers", "2",
        "--sds-size", "200", "--report-size", "300", "--seed", "8",
    ];

    let mut full = base.to_vec();
    full.extend(["--out-dir", "full"]);
    assert_success(&run(&full, dir.path()));

    // interrupted run: checkpoint every 7 generations, stop at 7
    let mut partial = base.to_vec();
    partial[2] = "7"; // --generations 7
    assert_eq!(partial[1], "-i");
    let mut partial_args: Vec<&str> = vec![
        "search", "-i", "d.csv", "--generations", "7", "--population", "6", "--layers", "2",
        "--sds-size", "200", "--report-size", "300", "--seed", "8", "--out-dir", "part",
    ];
    assert_success(&run(&partial_args, dir.path()));
    // hand-edit the checkpoint config back to the full horizon, as a
    // resume of the same run would see it
    let ckpt_path = dir.path().join("part/checkpoint.json");
    let mut ckpt: serde_json::Value = serde_json::from_str(&read(ckpt_path.clone())).unwrap();
    ckpt["config"]["generations"] = serde_json::json!(14);
    std::fs::write(&ckpt_path, serde_json::to_string(&ckpt).unwrap()).unwrap();

    partial_args = vec![
        "search", "-i", "d.csv", "--resume", "part/checkpoint.json", "--out-dir", "resumed",
    ];
    assert_success(&run(&partial_args, dir.path()));

    let full_history = read(dir.path().join("full/history.csv"));
    let resumed_history = read(dir.path().join("resumed/history.csv"));
    let full_tail: Vec<&str> = full_history.lines().skip(8).collect();
    let resumed_tail: Vec<&str> = resumed_history.lines().skip(8).collect();
    assert_eq!(full_tail, resumed_tail);
    assert_eq!(
        read(dir.path().join("full/best_network.json")),
        read(dir.path().join("resumed/best_network.json"))
    );
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(
        &[
            "generate", "--rows", "50", "--background", "6", "--plant", "0-2:Q2->6", "--seed",
            "4", "-o", "d.csv",
        ],
        dir.path(),
    );
    assert_success(&gen);
    for (workers, out_dir) in [("1", "w1"), ("2", "w2")] {
        let out = run(
            &[
                "search", "--workers", workers, "-i", "d.csv", "--generations", "12",
                "--population", "8", "--layers", "3", "--sds-size", "400", "--report-size",
                "300", "--seed", "6", "--out-dir", out_dir,
            ],
            dir.path(),
        );
        assert_success(&out);
    }
    assert_eq!(
        read(dir.path().join("w1/history.csv")),
        read(dir.path().join("w2/history.csv"))
    );
    assert_eq!(
        read(dir.path().join("w1/rule_report.tsv")),
        read(dir.path().join("w2/rule_report.tsv"))
    );
}

#[test]
fn baseline_matrices_with_undef_entries() {
    let dir = tempfile::tempdir().unwrap();
    // b duplicates a; c is constant
    std::fs::write(dir.path().join("d.csv"), "a,b,c\n1,1,1\n0,0,1\n1,1,1\n0,0,1\n").unwrap();
    let out = run(
        &["baseline", "-i", "d.csv", "--out-dir", "base"],
        dir.path(),
    );
    assert_success(&out);
    let pearson = read(dir.path().join("base/pearson.csv"));
    let mut lines = pearson.lines();
    assert_eq!(lines.next().unwrap(), "name,a,b,c");
    let row_a = lines.next().unwrap();
    assert_eq!(row_a, "a,1,1,undef");
    let mi = read(dir.path().join("base/mi.csv"));
    let mi_row_a: Vec<&str> = mi.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(mi_row_a[1], "1"); // self-information of a fair column
    assert_eq!(mi_row_a[2], "1"); // identical column
    assert_eq!(mi_row_a[3], "0"); // constant column carries nothing
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scramble", "--definitely-not-a-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["baseline", "-i", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
