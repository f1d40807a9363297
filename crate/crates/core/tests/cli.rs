use dentlab::cli::run;
use serde_json::Value;

fn call(args: &[&str], stdin: &str) -> dentlab::cli::Outcome {
    let mut full = vec!["dentlab"];
    full.extend_from_slice(args);
    run(full, stdin)
}

fn json(out: &dentlab::cli::Outcome) -> Value {
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn norm_t_single_coordinate() {
    let out = call(&["norm-t"], r#"{"entries":[{"index":5,"value":"1"}]}"#);
    assert_eq!(json(&out)["value"], "1");
}

#[test]
fn norm_t_four_ones() {
    let input = r#"{"entries":[{"index":3,"value":"1"},{"index":4,"value":"1"},{"index":5,"value":"1"},{"index":6,"value":"1"}]}"#;
    let v = json(&call(&["norm-t"], input));
    assert_eq!(v["value"], "3/2");
    assert!(v["certificate"]["split"].is_object());
}

#[test]
fn norm_t_bad_rational() {
    let out = call(&["norm-t"], r#"{"entries":[{"index":5,"value":"1/0"}]}"#);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("value"), "{}", out.stderr);
}

#[test]
fn norm_t_support_cap() {
    let entries: Vec<String> = (1..=40)
        .map(|i| format!(r#"{{"index":{i},"value":"1"}}"#))
        .collect();
    let out = call(
        &["norm-t"],
        &format!(r#"{{"entries":[{}]}}"#, entries.join(",")),
    );
    assert_eq!(out.code, 3, "{}", out.stderr);
}

#[test]
fn norm_eu_examples() {
    let v = json(&call(
        &["norm-eu"],
        r#"{"entries":[{"node":"0","value":"1"},{"node":"10","value":"-1"}]}"#,
    ));
    assert_eq!(v["value"], "1");
    assert_eq!(v["witness"], serde_json::json!(["0", "10"]));

    let v = json(&call(&["norm-eu"], r#"{"entries":[]}"#));
    assert_eq!(v["value"], "0");

    let chain = r#"{"entries":[{"node":"","value":"1/2"},{"node":"1","value":"-1"},{"node":"10","value":"1"}]}"#;
    let v = json(&call(&["norm-eu"], chain));
    assert_eq!(v["value"], "1");
    assert_eq!(v["witness"].as_array().unwrap().len(), 1);
}

#[test]
fn gauge_of_vertex_and_zero() {
    let vertex = r#"{"entries":[{"node":"","value":"1"},{"node":"1","value":"1"},{"node":"10","value":"1"},{"node":"101","value":"1"}]}"#;
    let v = json(&call(&["gauge", "--n", "3", "--depth", "3"], vertex));
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!(value <= 0.125 + 1e-6);
    assert_eq!(v["tolerance"], "0.000001");

    let v = json(&call(
        &["gauge", "--n", "2", "--depth", "3"],
        r#"{"entries":[]}"#,
    ));
    assert_eq!(v["value"], "0");
}

/// Exact gauges of a single leaf coordinate at depth 3, from the
/// enumerated linear program: `2ⁿ/3`.
#[test]
fn gauge_of_leaf_matches_table() {
    let leaf = r#"{"entries":[{"node":"010","value":"1"}]}"#;
    for (n, exact) in [(1, 2.0 / 3.0), (2, 4.0 / 3.0), (3, 8.0 / 3.0)] {
        let v = json(&call(
            &["gauge", "--n", &n.to_string(), "--depth", "3"],
            leaf,
        ));
        let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
        assert!((value - exact).abs() <= 2e-6, "{n}: {value}");
    }
}

#[test]
fn triple_norm_and_t_op() {
    let vertex = r#"{"entries":[{"node":"","value":"1"},{"node":"0","value":"1"},{"node":"01","value":"1"}]}"#;
    let v = json(&call(&["triple-norm", "--depth", "2"], vertex));
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!(value <= 0.578);
    assert_eq!(v["gauges"].as_array().unwrap().len(), 8);
    assert_eq!(v["truncated"], false);

    let v = json(&call(
        &["t-op"],
        r#"{"depth":2,"leaves":[{"node":"01","value":"1"}]}"#,
    ));
    assert_eq!(v["norm"], "1");
    assert_eq!(v["bounded"], true);
}

#[test]
fn experiments_output() {
    let out = call(
        &[
            "experiments",
            "superadditivity",
            "--depth",
            "6",
            "--instances",
            "500",
            "--seed",
            "7",
        ],
        "",
    );
    assert_eq!(out.code, 0);
    assert!(out.stderr.contains("500/500 hold"), "{}", out.stderr);
    assert!(out
        .stdout
        .starts_with("experiment,superadditivity\ndepth,6\nseed,7\n"));

    let out = call(&["experiments", "separation"], "");
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().skip(4).all(|l| l.ends_with(",true")));

    let again = call(&["experiments", "separation"], "");
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn experiments_json_format() {
    let out = call(
        &[
            "experiments",
            "slices",
            "--depth",
            "4",
            "--instances",
            "3",
            "--format",
            "json",
        ],
        "",
    );
    let v = json(&out);
    assert_eq!(v["tally"], serde_json::json!([3, 3]));
}

#[test]
fn unknown_experiment_and_usage_errors() {
    assert_eq!(call(&["experiments", "nope"], "").code, 2);
    assert_eq!(call(&["frobnicate"], "").code, 2);
    assert_eq!(call(&["gauge"], "{}").code, 2);
    assert_eq!(call(&["norm-eu"], "not json").code, 2);
}

#[test]
fn violations_exit_four_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.csv");
    let out = call(
        &[
            "experiments",
            "blocks",
            "--depth",
            "6",
            "--instances",
            "200",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ],
        "",
    );
    if out.code == 4 {
        assert!(out.stderr.contains("violating instance"));
        assert!(dir.path().join("blocks.csv.violation.json").exists());
    } else {
        assert_eq!(out.code, 0);
    }
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("experiment,blocks\n"));
}
