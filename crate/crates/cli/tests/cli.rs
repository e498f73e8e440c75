use std::path::{Path, PathBuf};

use maxlinsat_cli::{run, Outcome, EXIT_GUARD, EXIT_INPUT, EXIT_OK, EXIT_USAGE};
use maxlinsat_core::fixtures;
use maxlinsat_core::io::{parse_report, Problem, ProblemFile, ReportKind};
use serde_json::Value;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture(name: &str) -> String {
    fixture_dir().join(format!("{name}.json")).display().to_string()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("maxlinsat").chain(args.iter().copied()))
}

fn validate(schema: &str, doc: &Value) {
    let text = std::fs::read_to_string(schema_dir().join(format!("{schema}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

/// Runs a command expected to succeed and checks its report against the
/// loader and the shipped schema.
fn report(args: &[&str]) -> Value {
    let out = cli(args);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    let parsed = parse_report(&out.stdout).unwrap();
    let schema = match parsed.kind {
        ReportKind::Transform => "transform",
        ReportKind::Analysis => "analysis",
        ReportKind::Solve => "solve",
        ReportKind::Estimate => "estimate",
        ReportKind::Gadget => "gadget",
    };
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    validate(schema, &doc);
    doc["report"].clone()
}

#[test]
fn shipped_fixtures_match_library() {
    let bless = std::env::var_os("MAXLINSAT_BLESS").is_some();
    for (name, f) in fixtures::all() {
        let path = fixture_dir().join(format!("{name}.json"));
        if bless {
            f.save(&path).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(text, f.to_json(), "{name} is stale; rerun with MAXLINSAT_BLESS=1");
    }
}

#[test]
fn fixtures_round_trip_byte_identical_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixture_dir()).unwrap() {
        let path = entry.unwrap().path();
        let original = std::fs::read_to_string(&path).unwrap();
        validate("problem", &serde_json::from_str(&original).unwrap());
        let loaded = ProblemFile::load(&path).unwrap();
        let copy = dir.path().join(path.file_name().unwrap());
        loaded.save(&copy).unwrap();
        assert_eq!(std::fs::read_to_string(&copy).unwrap(), original, "{}", path.display());
        assert_eq!(ProblemFile::load(&copy).unwrap(), loaded);
    }
}

#[test]
fn knapsack_fixture_shape() {
    let f = ProblemFile::load(fixture("knapsack")).unwrap();
    let Problem::Constraint(m) = f.problem else { panic!("knapsack is a constraint model") };
    assert_eq!((m.variables.len(), m.constraints.len(), m.objectives.len()), (3, 1, 1));
}

#[test]
fn solve_and_gadget_brute() {
    let r = report(&["solve", &fixture("and_gadget"), "--solver", "brute"]);
    assert_eq!(r["weight"], 3);
    assert_eq!(r["assignment"], serde_json::json!([1, 1]));
}

#[test]
fn estimate_repetition3_lookup() {
    let r = report(&["estimate", &fixture("repetition3"), "--l", "1", "--decoder", "lookup"]);
    assert_eq!(r["feasibility"]["fraction"], 1.0);
    assert_eq!(r["regime"], "exact_preparable");
    assert_eq!(r["l"], 1);
}

#[test]
fn estimate_duplicate_rows_is_approximate() {
    let r = report(&["estimate", &fixture("duplicate_rows"), "--l", "1", "--decoder", "lookup"]);
    assert!(r["feasibility"]["fraction"].as_f64().unwrap() < 1.0);
    assert_eq!(r["regime"], "approximate");
}

#[test]
fn transform_triangle_reports_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("weighted.json");
    let r = report(&["transform", &fixture("triangle_colouring"), "--out", out.to_str().unwrap()]);
    let sets = r["diagnostics"]["dependencies"]["sets"].as_array().unwrap();
    assert!(sets.iter().any(|s| s["tag"] == "cycle" && s["rows"].as_array().unwrap().len() == 3));
    assert_eq!(r["diagnostics"]["prime"], 3);
    let written = ProblemFile::load(&out).unwrap();
    let Problem::Linsat(inst) = written.problem else { panic!("weighted output is a linsat file") };
    assert_eq!(inst.num_constraints(), 3);
}

#[test]
fn analyze_fixtures() {
    let eq3 = report(&["analyze", &fixture("eq3")]);
    assert_eq!(eq3["min_distance"], serde_json::json!({"kind": "exact", "value": 3}));
    assert_eq!(eq3["dependencies"]["sets"][0]["rows"], serde_json::json!([0, 1, 2]));
    let dup = report(&["analyze", &fixture("duplicate_rows")]);
    assert_eq!(dup["min_distance"]["value"], 2);
    assert_eq!(dup["dependencies"]["sets"][0]["tag"], "duplicate");
    let cut = report(&["analyze", &fixture("triangle_maxcut"), "--dmin-cap", "4", "--dep-cap", "3"]);
    assert_eq!(cut["min_distance"]["value"], 3);
    let model = report(&["analyze", &fixture("vertex_cover")]);
    assert_eq!(model["source"], "constraint");
}

#[test]
fn solvers_on_models_map_back() {
    for solver in ["brute", "anneal", "prange"] {
        let r = report(&["solve", &fixture("knapsack"), "--solver", solver, "--seed", "5", "--restarts", "4"]);
        let decoded = &r["source"]["decoded"];
        if solver == "brute" {
            // Items (3, 5) and (2, 3) fill capacity 5 for value 8.
            assert_eq!(decoded["objective"], "8");
            assert_eq!(decoded["violated"], serde_json::json!([]));
            assert_eq!(r["source"]["mapped_value"], decoded["total"]);
        }
    }
}

#[test]
fn gadget_synthesis() {
    let exact = report(&["gadget", "synth", "--table", "0001", "--q", "2", "--max-constraints", "3"]);
    assert_eq!((exact["gadget"]["s_yes"].as_u64(), exact["gadget"]["s_no"].as_u64()), (Some(3), Some(1)));
    assert_eq!(exact["verified"], true);
    let approx = report(&["gadget", "synth", "--table", "0001", "--max-constraints", "2", "--approximate"]);
    assert_eq!(approx["gadget"]["constraints"].as_array().unwrap().len(), 2);
    assert_eq!(approx["verified"], true);
    let none = report(&["gadget", "synth", "--table", "0001", "--max-constraints", "1"]);
    assert_eq!(none["gadget"], Value::Null);
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&[]).code, EXIT_USAGE);
    assert_eq!(cli(&["solve", &fixture("and_gadget"), "--solver", "quantum"]).code, EXIT_USAGE);
    assert_eq!(cli(&["estimate", &fixture("and_gadget"), "--decoder", "magic"]).code, EXIT_USAGE);
    let help = cli(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("transform"));

    let missing = cli(&["analyze", "/nonexistent/problem.json"]);
    assert_eq!(missing.code, EXIT_INPUT);
    assert_eq!(cli(&["transform", &fixture("and_gadget")]).code, EXIT_INPUT);
    assert_eq!(cli(&["gadget", "synth", "--table", "011"]).code, EXIT_INPUT);
    assert_eq!(cli(&["gadget", "synth", "--table", "0001", "--q", "4"]).code, EXIT_INPUT);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"format_version": 1, "kind": "constraint", "model": {"variables": [{"name": "x", "lower": 0, "upper": 1}],
        "constraints": [{"expr": {"terms": []}, "relation": "NEAR"}]}}"#,
    )
    .unwrap();
    let out = cli(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("model.constraints[0].relation"), "{}", out.stderr);

    // 2^30 assignments is past the brute-force limit.
    let big = dir.path().join("big.json");
    let vars: Vec<String> = (0..30).map(|i| format!("\"v{i}\"")).collect();
    std::fs::write(
        &big,
        format!(
            r#"{{"format_version": 1, "kind": "linsat", "instance": {{"field_order": 2, "variables": [{}],
            "constraints": [{{"terms": [[0, 1]], "members": [[1, 1]]}}]}}}}"#,
            vars.join(", ")
        ),
    )
    .unwrap();
    let out = cli(&["solve", big.to_str().unwrap(), "--solver", "brute"]);
    assert_eq!(out.code, EXIT_GUARD, "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threading() {
    let commands: Vec<Vec<String>> = vec![
        vec![
            "solve".into(),
            fixture("vertex_cover"),
            "--solver".into(),
            "anneal".into(),
            "--seed".into(),
            "11".into(),
            "--restarts".into(),
            "3".into(),
        ],
        vec![
            "solve".into(),
            fixture("knapsack"),
            "--solver".into(),
            "prange".into(),
            "--seed".into(),
            "2".into(),
            "--restarts".into(),
            "6".into(),
        ],
        vec![
            "estimate".into(),
            fixture("triangle_maxcut"),
            "--decoder".into(),
            "isd".into(),
            "--samples".into(),
            "50".into(),
            "--seed".into(),
            "9".into(),
        ],
        vec!["estimate".into(), fixture("eq3"), "--samples".into(), "40".into(), "--seed".into(), "4".into()],
        vec!["transform".into(), fixture("vertex_cover")],
        vec!["analyze".into(), fixture("knapsack")],
    ];
    for args in commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = cli(&args);
        let b = cli(&args);
        let mut seq_args = vec!["--sequential"];
        seq_args.extend(&args);
        let c = cli(&seq_args);
        assert_eq!(a.code, EXIT_OK, "{args:?}: {}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, c.stdout, "{args:?} sequential");
    }
}
