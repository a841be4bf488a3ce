use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn cindep(model: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cindep"))
        .arg("--model")
        .arg(fixture(model))
        .args(args)
        .env_remove(cindep_cli::QUAD_ORDER_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn stress_on_power_uniform() {
    let out = cindep(
        "power_uniform_fgm.json",
        &["stress", "--i", "1", "--j", "2"],
    );
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.344444444444\n");
    let out = cindep(
        "power_uniform_fgm_positive.json",
        &["stress", "--i", "1", "--j", "2"],
    );
    assert_eq!(stdout(&out), "0.322222222222\n");
    let out = cindep(
        "power_uniform_fgm.json",
        &["stress", "--i", "2", "--j", "1"],
    );
    assert_eq!(stdout(&out), "0.655555555556\n");
}

#[test]
fn scalar_commands() {
    let out = cindep(
        "iid_independence_n2.json",
        &["order-cdf", "--r", "2", "--x", "0.5"],
    );
    assert_eq!(stdout(&out), "0.25\n");
    let out = cindep(
        "iid_independence_n2.json",
        &[
            "pair-cdf", "--r", "1", "--s", "2", "--x", "0.25", "--y", "0.5",
        ],
    );
    assert_eq!(stdout(&out), "0.1875\n");
    let out = cindep("iid_independence_n2.json", &["joint-cdf", "--x", "0.5,0.4"]);
    assert_eq!(stdout(&out), "0.2\n");
    let out = cindep("fgm_pair.json", &["eval-copula", "--u", "0.5,0.5"]);
    assert_eq!(stdout(&out), "0.270833333333\n");
    let out = cindep(
        "fgm_pair.json",
        &["eval-copula", "--u", "0.5,0.5", "--w", "0.5"],
    );
    assert_eq!(stdout(&out), "0.197916666667\n");
    let out = cindep(
        "iid_independence_n2.json",
        &["mrl", "--k", "2", "--r", "1", "--t", "0"],
    );
    assert_eq!(stdout(&out), "0.666666666667\n");
}

#[test]
fn printed_values_round_trip() {
    let out = cindep("mixed.json", &["order-cdf", "--r", "2", "--x", "0.7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let v: f64 = text.trim().parse().unwrap();
    assert_eq!(cindep_cli::fmt_sig(v), text.trim());
}

#[test]
fn verify_ci_reports() {
    let out = cindep(
        "fgm_pair.json",
        &["verify-ci", "--candidate", "builtin:fgm-pair"],
    );
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("passed true\n"));
    let out = cindep(
        "fgm_pair.json",
        &["verify-ci", "--candidate", "builtin:direct-fgm"],
    );
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("passed false\n"));
    let out = cindep(
        "mixed.json",
        &["verify-ci", "--candidate", "builtin:fgm-pair"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = cindep("fgm_pair.json", &["verify-ci", "--candidate", "fgm"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn order_cdf_table_is_monotone() {
    let out = cindep(
        "iid_independence_n2.json",
        &[
            "table",
            "--op",
            "order-cdf",
            "--r",
            "2",
            "--grid",
            "0:1:0.25",
        ],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,cdf_r2"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|p| p[0] <= p[1]));
    assert_eq!(
        text,
        "x,cdf_r2\n0,0\n0.25,0.0625\n0.5,0.25\n0.75,0.5625\n1,1\n"
    );

    let out = cindep(
        "mixed.json",
        &[
            "table",
            "--op",
            "mrl",
            "--k",
            "3",
            "--r",
            "1",
            "--grid",
            "0:0.4:0.2",
        ],
    );
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|p| p[0] >= p[1]), "{text}");
}

#[test]
fn files_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = cindep(
            "mixed.json",
            &[
                "sample",
                "--count",
                "500",
                "--seed",
                "42",
                "--out",
                path.to_str().unwrap(),
            ],
        );
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("x1,x2,x3,z\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 501);

    let table = dir.path().join("t.csv");
    let args = [
        "table", "--op", "pair-cdf", "--r", "1", "--s", "3", "--grid", "0:2:0.5", "--out",
    ];
    let mut full: Vec<&str> = args.to_vec();
    full.push(table.to_str().unwrap());
    assert!(cindep("mixed.json", &full).status.success());
    let once = std::fs::read(&table).unwrap();
    assert!(cindep("mixed.json", &full).status.success());
    assert_eq!(once, std::fs::read(&table).unwrap());
}

#[test]
fn exit_codes() {
    // model-file problems
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let run = |path: &PathBuf| {
        Command::new(env!("CARGO_BIN_EXE_cindep"))
            .arg("--model")
            .arg(path)
            .args(["order-cdf", "--r", "1", "--x", "0.5"])
            .env_remove(cindep_cli::QUAD_ORDER_ENV)
            .output()
            .unwrap()
    };
    let broken = write("broken.json", "{\n  \"z\": [\n");
    let out = run(&broken);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json:3:"));
    let unknown = write(
        "unknown.json",
        r#"{"z": {"marginal": {"family": "gamma", "shape": 2}}, "components": []}"#,
    );
    let out = run(&unknown);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown marginal family \"gamma\""));
    let range = write(
        "range.json",
        r#"{"z": {"marginal": {"family": "uniform01"}},
            "components": [{"marginal": {"family": "uniform01"}, "copula": {"family": "fgm", "alpha": 2}}]}"#,
    );
    let out = run(&range);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must lie in [-1, 1]"));
    let empty = write(
        "empty.json",
        r#"{"z": {"marginal": {"family": "uniform01"}}, "components": []}"#,
    );
    assert!(String::from_utf8_lossy(&run(&empty).stderr).contains("at least one component"));

    // values the model rejects
    let out = cindep("fgm_pair.json", &["order-cdf", "--r", "3", "--x", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cindep(
        "fgm_pair.json",
        &[
            "pair-cdf", "--r", "1", "--s", "2", "--x", "0.6", "--y", "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    // numerical failure: conditioning event of probability zero
    let out = cindep(
        "iid_independence_n2.json",
        &["mrl", "--k", "2", "--r", "1", "--t", "1"],
    );
    assert_eq!(out.status.code(), Some(3));

    // usage
    let out = cindep(
        "fgm_pair.json",
        &["table", "--op", "order-cdf", "--r", "1", "--grid", "0:1:0"],
    );
    assert_eq!(out.status.code(), Some(4));
    let out = cindep(
        "fgm_pair.json",
        &["table", "--op", "order-cdf", "--grid", "0:1:0.5"],
    );
    assert_eq!(out.status.code(), Some(4));
    let out = cindep(
        "fgm_pair.json",
        &[
            "table",
            "--op",
            "order-cdf",
            "--r",
            "1",
            "--k",
            "2",
            "--grid",
            "0:1:0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    let out = cindep("fgm_pair.json", &["order-cdf", "--r", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_cindep"))
        .args(["stress", "--i", "1", "--j", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_cindep"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn quadrature_order_from_environment() {
    let run = |order: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cindep"));
        cmd.arg("--model")
            .arg(fixture("fgm_pair.json"))
            .args(["eval-copula", "--u", "0.5,0.5"]);
        match order {
            Some(o) => cmd.env(cindep_cli::QUAD_ORDER_ENV, o),
            None => cmd.env_remove(cindep_cli::QUAD_ORDER_ENV),
        };
        cmd.output().unwrap()
    };
    // two FGM h-functions make a quadratic in w: one node is not enough,
    // two are exact
    assert_eq!(stdout(&run(Some("1"))), "0.25\n");
    assert_eq!(stdout(&run(Some("2"))), "0.270833333333\n");
    assert_eq!(run(Some("0")).status.code(), Some(2));
    assert_eq!(run(Some("many")).status.code(), Some(2));
    assert_eq!(stdout(&run(None)), "0.270833333333\n");
}
