use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use datacopy::report::ReportDocument;

fn datacopy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_datacopy"))
        .args(args)
        .env_remove("DATACOPY_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn sample(dir: &Path, n: usize, seed: u64) -> String {
    let path = dir.join(format!("train_{n}_{seed}.csv"));
    let path_s = path.to_str().unwrap().to_string();
    let out = datacopy(&[
        "sample",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &path_s,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path_s
}

const SMALL: &[&str] = &[
    "--m", "4000", "--b", "40", "--k", "2", "--u-size", "500", "--gamma", "0.005",
];

fn detect(train: &str, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["detect", "--train", train, "--out", out];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    datacopy(&args)
}

#[test]
fn missing_training_file_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = detect(
        dir.path().join("absent.csv").to_str().unwrap(),
        report.to_str().unwrap(),
        &["--builtin", "halfmoons"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());
}

#[test]
fn malformed_training_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("bad.csv");
    fs::write(&train, "# x,y\n0,1\n2,oops\n").unwrap();
    let out = detect(
        train.to_str().unwrap(),
        dir.path().join("r.json").to_str().unwrap(),
        &["--builtin", "halfmoons"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn sampler_protocol_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 100, 1);
    let report = dir.path().join("r.json");
    for (cmd, needle) in [
        ("read req; echo '0.0 0.0'; exit 0", "line 2"),
        ("read req; echo 'a b'", "line 1"),
    ] {
        let out = detect(&train, report.to_str().unwrap(), &["--sampler-cmd", cmd]);
        assert_eq!(out.status.code(), Some(3), "{cmd}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{}", stderr(&out));
        assert!(!report.exists());
    }
}

#[test]
fn invalid_parameters_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 100, 1);
    let out = detect(
        &train,
        dir.path().join("r.json").to_str().unwrap(),
        &["--builtin", "halfmoons", "--lambda", "0.5"],
    );
    assert_eq!(out.status.code(), Some(4));
    let out = datacopy(&[
        "detect",
        "--train",
        &train,
        "--builtin",
        "halfmoons",
        "--threads",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn halfmoons_report_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 300, 2);
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "2", "1"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let out = detect(
            &train,
            path.to_str().unwrap(),
            &["--builtin", "copier", "--seed", "9", "--threads", threads],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("cr_hat "));
        let doc = ReportDocument::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        assert!(doc.timing.is_some());
        assert_eq!(doc.seed, 9);
        assert_eq!(doc.inputs.len(), 1);
        let cr = doc.result["cr_hat"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&cr));
        assert!(cr > 0.0, "the copier should register");
        assert_eq!(doc.result["regions"].as_array().unwrap().len(), 300);
        bodies.push(doc.body_json().unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0], bodies[2]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 200, 3);
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"lambda": 5.0, "gamma": 0.004, "seed": 4}"#).unwrap();
    let report = dir.path().join("r.json");
    let out = detect(
        &train,
        report.to_str().unwrap(),
        &[
            "--builtin",
            "halfmoons",
            "--config",
            config.to_str().unwrap(),
            "--lambda",
            "7",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = ReportDocument::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    let params = &doc.config["params"];
    assert_eq!(params["lambda"].as_f64(), Some(7.0));
    // SMALL sets gamma on the command line too.
    assert_eq!(params["gamma"].as_f64(), Some(0.005));
    assert_eq!(params["seed"].as_u64(), Some(4));

    fs::write(&config, r#"{"lambda": 5.0, "lamda": 6.0}"#).unwrap();
    let out = detect(
        &train,
        report.to_str().unwrap(),
        &[
            "--builtin",
            "halfmoons",
            "--config",
            config.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lamda"), "{}", stderr(&out));
}

#[test]
fn thread_env_var_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 100, 1);
    let out = Command::new(env!("CARGO_BIN_EXE_datacopy"))
        .args(["estimate-k", "--train", &train])
        .env("DATACOPY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn external_sampler_and_sample_file_sources() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 100, 5);
    // Every generated point sits on the first training point.
    let first = fs::read_to_string(&train)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .replace(',', " ");
    let script = format!("while read req n d; do i=0; while [ $i -lt $n ]; do echo '{first}'; i=$((i+1)); done; done");
    let report = dir.path().join("r.json");
    let out = detect(
        &train,
        report.to_str().unwrap(),
        &["--sampler-cmd", &script],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = ReportDocument::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc.result["cr_hat"].as_f64(), Some(1.0));

    // A sample file too short for m + u is a sampler error.
    let short = sample(dir.path(), 50, 6);
    let out = detect(&train, report.to_str().unwrap(), &["--sample-file", &short]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn baseline_and_estimate_k_run() {
    let dir = tempfile::tempdir().unwrap();
    let train = sample(dir.path(), 400, 7);
    let test = sample(dir.path(), 400, 8);
    let generated = sample(dir.path(), 400, 9);
    let report = dir.path().join("b.json");
    let out = datacopy(&[
        "baseline",
        "--train",
        &train,
        "--test",
        &test,
        "--generated",
        &generated,
        "--clusters",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = ReportDocument::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc.inputs.len(), 3);
    assert_eq!(
        doc.result["report"]["per_cluster"]
            .as_array()
            .unwrap()
            .len(),
        3
    );

    let circle = dir.path().join("circle.csv");
    let circle = circle.to_str().unwrap();
    let out = datacopy(&[
        "sample",
        "--dist",
        "uniform-circle",
        "--n",
        "20000",
        "--out",
        circle,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = datacopy(&["estimate-k", "--train", circle]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "k = 1");
}

#[test]
fn quick_experiment_emits_flagged_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"n": 200, "detection": {"k": 2, "m": 3000, "b": 30, "u_size": 300},
            "rhos": [0.4], "clusters": [1], "repetitions": 2, "null_runs": 5}"#,
    )
    .unwrap();
    let csv = dir.path().join("t.csv");
    let report = dir.path().join("t.json");
    let out = datacopy(&[
        "experiment-halfmoons",
        "--quick",
        "--config",
        config.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("reduced precision"), "{text}");
    let csv = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let doc = ReportDocument::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc.result["reduced_precision"].as_bool(), Some(true));
}

#[test]
fn lowerbound_and_kde_experiments_run() {
    let out = datacopy(&[
        "experiment-lowerbound",
        "--kappa",
        "8",
        "--gamma",
        "0.2",
        "--trials",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0.722222"));
    let out = datacopy(&["experiment-kde", "--trials", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
}
