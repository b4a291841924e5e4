use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_damped-chain"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    validate(&v);
    v
}

fn validate(v: &Value) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(v)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn round5(x: f64) -> f64 {
    (x * 1e5).round() / 1e5
}

#[test]
fn expand_prints_coefficient_table() {
    let input = data("five_node.edges");
    let v = ok_json(&["expand", "--input", &input, "--epsilon-order", "2"]);
    let rows = v["result"]["expansion"]["rows"].as_array().unwrap();
    let expected = [
        [0.14096, -0.01946],
        [-0.04591, 0.00456],
        [-0.03168, 0.00497],
        [-0.03168, 0.00497],
        [-0.03168, 0.00497],
    ];
    for (row, want) in rows.iter().zip(expected) {
        let c = row["coefficients"].as_array().unwrap();
        assert_eq!(round5(f(&c[0])), want[0]);
        assert_eq!(round5(f(&c[1])), want[1]);
    }
}

#[test]
fn first_bound_columns_with_exact_constants() {
    let input = data("five_node.edges");
    let tail = 67.0 / 4488.0 * 34f64.sqrt() + 49.0 / 132.0;
    let c = format!("{}", 2.0 * tail);
    let lambda = format!("{}", 1.0 / 3.0);
    let v = ok_json(&[
        "bounds",
        "--input",
        &input,
        "--theorem",
        "1",
        "--epsilon",
        "0.15",
        "--constant-c",
        &c,
        "--lambda",
        &lambda,
    ]);
    let report = &v["result"]["reports"][0];
    assert_eq!(report["theorem"], "T1");
    let rows = report["rows"].as_array().unwrap();
    let bounds: Vec<f64> = rows.iter().map(|r| round5(f(&r["bound"]))).collect();
    assert_eq!(&bounds[..3], &[0.08738, 0.07510, 0.07283]);
    for r in rows {
        assert!(f(&r["actual"]) <= f(&r["bound"]));
    }
}

#[test]
fn estimated_constants_still_dominate() {
    let input = data("five_node.edges");
    let v = ok_json(&["bounds", "--input", &input, "--epsilon", "0.15"]);
    let reports = v["result"]["reports"].as_array().unwrap();
    let names: Vec<&str> = reports
        .iter()
        .map(|r| r["theorem"].as_str().unwrap())
        .collect();
    assert_eq!(names[..2], ["T1", "T5"]);
    for r in reports {
        for row in r["rows"].as_array().unwrap() {
            assert!(f(&row["actual"]) <= f(&row["bound"]) + 1e-12);
        }
    }
}

#[test]
fn four_state_chain_is_regular() {
    let v = ok_json(&["structure", "--input", &data("four_state.json")]);
    assert_eq!(v["result"]["regime"], "regular");
    let v = ok_json(&["structure", "--input", &data("two_networks.edges")]);
    assert_eq!(v["result"]["regime"], "singular");
    assert_eq!(
        v["result"]["classes"][1]["states"],
        serde_json::json!([5, 6, 7, 8])
    );
}

#[test]
fn every_command_matches_schema() {
    let five = data("five_node.edges");
    let two = data("two_networks.edges");
    let csv = data("five_state.csv");
    ok_json(&[
        "stationary",
        "--input",
        &csv,
        "--epsilon-grid",
        "0,0.05,0.15,1",
    ]);
    ok_json(&[
        "expand",
        "--input",
        &two,
        "--order",
        "3",
        "--epsilon",
        "0.1",
    ]);
    ok_json(&[
        "bounds",
        "--input",
        &two,
        "--epsilon",
        "0.15",
        "--initial",
        "point:5",
    ]);
    ok_json(&[
        "bounds",
        "--input",
        &five,
        "--epsilon",
        "0.5",
        "--theorem",
        "6",
        "--coupling-N",
        "3",
    ]);
    ok_json(&[
        "coupling-sim",
        "--input",
        &five,
        "--epsilon",
        "0.15",
        "--seed",
        "9",
        "--trials",
        "500",
    ]);
    ok_json(&[
        "triangular",
        "--input",
        &two,
        "--epsilon",
        "0.1",
        "--n-grid",
        "0:30:5",
    ]);
    let v = ok_json(&[
        "report",
        "--input",
        &two,
        "--seed",
        "4",
        "--trials",
        "200",
        "--horizon",
        "10",
    ]);
    for key in [
        "structure",
        "stationary",
        "limit",
        "spectrum",
        "expansion",
        "bounds",
        "coupling",
        "triangular",
    ] {
        assert!(
            v["result"][key].get("error").is_none(),
            "{key} failed: {}",
            v["result"][key]
        );
    }
}

#[test]
fn coupling_sim_is_reproducible_across_thread_counts() {
    let input = data("five_node.edges");
    let args = [
        "coupling-sim",
        "--input",
        &input,
        "--epsilon",
        "0.15",
        "--seed",
        "77",
        "--trials",
        "20000",
    ];
    let a = run_env(&args, &[("DAMPED_CHAIN_THREADS", "1")]);
    let b = run_env(&args, &[("DAMPED_CHAIN_THREADS", "4")]);
    let c = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["rng"], "chacha8-stream-per-trial");
    for row in v["result"]["rows"].as_array().unwrap() {
        assert_eq!(row["within_three_se"], true);
    }
}

#[test]
fn errors_are_structured() {
    let five = data("five_node.edges");
    let cases: [(&[&str], i32, &str); 5] = [
        (
            &[
                "stationary",
                "--input",
                "/no/such/file.edges",
                "--epsilon",
                "0.1",
            ],
            3,
            "io",
        ),
        (
            &[
                "bounds",
                "--input",
                &five,
                "--epsilon",
                "0.1",
                "--theorem",
                "7",
            ],
            4,
            "regime_mismatch",
        ),
        (
            &[
                "bounds",
                "--input",
                &five,
                "--epsilon",
                "0.1",
                "--theorem",
                "2",
            ],
            4,
            "regime_mismatch",
        ),
        (
            &["stationary", "--input", &five, "--epsilon", "1.5"],
            4,
            "invalid_epsilon",
        ),
        (
            &[
                "triangular",
                "--input",
                &five,
                "--epsilon",
                "0.1",
                "--initial",
                "point:9",
            ],
            2,
            "usage",
        ),
    ];
    for (args, code, kind) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let v = json(&out);
        validate(&v);
        assert_eq!(v["error"]["kind"], kind, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let dangling = dir.path().join("d.edges");
    std::fs::write(&dangling, "1 2\n").unwrap();
    let out = run(&["structure", "--input", dangling.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["kind"], "dangling_node");
    let out = run(&[
        "structure",
        "--input",
        dangling.to_str().unwrap(),
        "--dangling-policy",
        "self-loop",
    ]);
    assert!(out.status.success());

    let out = run(&["coupling-sim", "--input", &five, "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_and_plot_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let plot = dir.path().join("p.csv");
    let input = data("five_node.edges");
    let status = run(&[
        "structure",
        "--input",
        &input,
        "--out",
        out.to_str().unwrap(),
        "--plot-data",
        plot.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    validate(&v);
    let csv = std::fs::read_to_string(&plot).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("class,n,q_n,delta_n"));
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[1], "12");
    assert!((last[3].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 0.02);

    let plot = dir.path().join("t.csv");
    let two = data("two_networks.edges");
    let out = run(&[
        "triangular",
        "--input",
        &two,
        "--epsilon",
        "0.1",
        "--plot-data",
        plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&plot).unwrap();
    assert!(csv.starts_with("n,t,state,trajectory,mixture,relative_error,bound\n"));
    assert_eq!(csv.lines().count(), 1 + 31 * 8);
}

#[test]
fn damping_file_and_echoed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.txt");
    std::fs::write(&d, "0.1 0.2 0.3 0.2 0.2\n").unwrap();
    let input = data("five_node.edges");
    let v = ok_json(&[
        "stationary",
        "--input",
        &input,
        "--epsilon",
        "0.3",
        "--damping",
        d.to_str().unwrap(),
    ]);
    assert_eq!(v["inputs"]["damping"]["weights"][2], 0.3);
    assert!(v["inputs"]["damping"]["source"]
        .as_str()
        .unwrap()
        .starts_with("file:"));
    assert_eq!(v["inputs"]["epsilon_grid"][0], 0.3);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}
